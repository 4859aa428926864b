"""Text and JSON documents.

Nets and markings use a line-oriented grammar with ``#`` comments::

    net small
    place Q
    trans b
    in b Q (3,5]
    out b R (0,1]

SD-TNs start with ``sdtn <name>``, take arcs without intervals, and add
``transfer in <p>... out <p>... move <src> <tgt>...`` and ``ignore <p>``.
Markings list ``token <place> <age>`` lines; SD-TN markings list
``count <place> <n|w>`` lines. Symbolic sets are stored as JSON bundles.
"""

from __future__ import annotations

import re
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from tpnv.errors import InvalidInterval, ParseError, ShapeMismatch
from tpnv.multiset import Bag
from tpnv.net import TPN, Arc, Interval, TimedMarking
from tpnv.omega import OMEGA, OmegaMarking
from tpnv.regions import MRUC, Region, RegionToken
from tpnv.sdtn import SDTN, SDTNTransition, Transfer
from tpnv.zeno import SymbolicSetBundle

VERDICT_SCHEMA = "tpnv.verdict/1"
BUNDLE_SCHEMA = "tpnv.bundle/1"

Answer = Literal["YES", "NO", "BOUNDED", "UNBOUNDED"]


# ============================================================================
# Net documents
# ============================================================================


@dataclass(frozen=True)
class NetDocument:
    """A parsed net with the line of each declaration."""

    net: TPN | SDTN
    lines: Mapping[str, int] = field(default_factory=dict)

    @property
    def is_sdtn(self) -> bool:
        return isinstance(self.net, SDTN)


# A comment starts at a word beginning with '#'; SD-TN names such as t#0 keep theirs.
_COMMENT_RE = re.compile(r"(?:^|\s)#.*$")


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        content = _COMMENT_RE.sub("", raw).strip()
        if content:
            yield number, content.split()


class _NetBuilder:
    def __init__(self, kind: str, name: str) -> None:
        self.kind = kind
        self.name = name
        self.places: list[str] = []
        self.transitions: list[str] = []
        self.lines: dict[str, int] = {}
        self.input_arcs: list[Arc] = []
        self.output_arcs: list[Arc] = []
        self.sdtn_arcs: dict[str, tuple[set[str], set[str]]] = {}
        self.arc_keys: set[tuple[str, str, str]] = set()
        self.transfer: Transfer | None = None
        self.ignored: set[str] = set()

    def declare(self, line: int, kind: str, ident: str) -> None:
        if ident in self.lines:
            raise ParseError(line, f"{ident!r} already declared on line {self.lines[ident]}")
        if kind == "place" and self.kind == "net" and "@" in ident:
            raise ParseError(line, f"place name {ident!r} may not contain '@'")
        self.lines[ident] = line
        if kind == "place":
            self.places.append(ident)
        else:
            self.transitions.append(ident)
            self.sdtn_arcs[ident] = (set(), set())

    def place(self, line: int, ident: str) -> str:
        if ident not in self.places:
            raise ParseError(line, f"undeclared place {ident!r}")
        return ident

    def arc(self, line: int, direction: str, args: list[str]) -> None:
        if len(args) < 2:
            raise ParseError(line, f"expected '{direction} <trans> <place> ...'")
        transition, place = args[0], self.place(line, args[1])
        if transition not in self.transitions:
            raise ParseError(line, f"undeclared transition {transition!r}")
        key = (direction, transition, place)
        if key in self.arc_keys:
            raise ParseError(line, f"duplicate arc {direction} {transition} {place}")
        self.arc_keys.add(key)
        if self.kind == "sdtn":
            if len(args) != 2:
                raise ParseError(line, "SD-TN arcs carry no interval")
            self.sdtn_arcs[transition][0 if direction == "in" else 1].add(place)
            return
        try:
            interval = Interval.parse("".join(args[2:]))
        except InvalidInterval as e:
            raise ParseError(line, e.message) from None
        target = self.input_arcs if direction == "in" else self.output_arcs
        target.append(Arc(transition, place, interval))

    def transfer_line(self, line: int, args: list[str]) -> None:
        if self.transfer is not None:
            raise ParseError(line, "a net has at most one transfer")
        sections: dict[str, list[str]] = {"in": [], "out": [], "move": []}
        current: str | None = None
        for word in args:
            if word in sections:
                current = word
            elif current is None:
                raise ParseError(line, f"expected 'in', 'out' or 'move' before {word!r}")
            else:
                sections[current].append(self.place(line, word))
        moves = sections["move"]
        if len(moves) % 2:
            raise ParseError(line, "moves come in source/target pairs")
        try:
            self.transfer = Transfer(
                frozenset(sections["in"]),
                frozenset(sections["out"]),
                tuple(zip(moves[::2], moves[1::2], strict=True)),
            )
        except ShapeMismatch as e:
            raise ParseError(line, e.message) from None

    def build(self) -> TPN | SDTN:
        if self.kind == "net":
            return TPN(
                self.name,
                tuple(self.places),
                tuple(self.transitions),
                tuple(self.input_arcs),
                tuple(self.output_arcs),
            )
        transitions = tuple(
            SDTNTransition(t, frozenset(self.sdtn_arcs[t][0]), frozenset(self.sdtn_arcs[t][1]))
            for t in self.transitions
        )
        try:
            return SDTN(self.name, tuple(self.places), transitions, self.transfer, frozenset(self.ignored))
        except ShapeMismatch as e:
            raise ParseError(0, e.message) from None


def parse_net(text: str) -> NetDocument:
    """Parse a ``net`` or ``sdtn`` document.

    Raises:
        ParseError: On syntax errors, duplicate declarations or undeclared
            references, with the offending line.
    """
    builder: _NetBuilder | None = None
    for line, words in _lines(text):
        keyword, args = words[0], words[1:]
        if builder is None:
            if keyword not in ("net", "sdtn") or len(args) != 1:
                raise ParseError(line, "document must start with 'net <name>' or 'sdtn <name>'")
            builder = _NetBuilder(keyword, args[0])
            continue
        match keyword:
            case "place" | "trans":
                if len(args) != 1:
                    raise ParseError(line, f"expected '{keyword} <id>'")
                builder.declare(line, "place" if keyword == "place" else "trans", args[0])
            case "in" | "out":
                builder.arc(line, keyword, args)
            case "transfer" if builder.kind == "sdtn":
                builder.transfer_line(line, args)
            case "ignore" if builder.kind == "sdtn":
                builder.ignored.update(builder.place(line, a) for a in args)
            case "net" | "sdtn":
                raise ParseError(line, "only one net per document")
            case _:
                raise ParseError(line, f"unknown keyword {keyword!r}")
    if builder is None:
        raise ParseError(0, "empty document")
    return NetDocument(builder.build(), dict(builder.lines))


def parse_tpn(text: str) -> TPN:
    """Parse a document that must hold a timed net.

    Raises:
        ParseError: If the document is malformed or declares an SD-TN.
    """
    document = parse_net(text)
    if not isinstance(document.net, TPN):
        raise ParseError(0, "expected a timed net, found an SD-TN")
    return document.net


def serialize_net(net: TPN | SDTN) -> str:
    """Render a net in the document grammar; ``parse_net`` reads it back unchanged."""
    if isinstance(net, TPN):
        out = [f"net {net.name}"]
        out += [f"place {p}" for p in net.places]
        out += [f"trans {t}" for t in net.transitions]
        out += [f"in {a.transition} {a.place} {a.interval}" for a in net.input_arcs]
        out += [f"out {a.transition} {a.place} {a.interval}" for a in net.output_arcs]
        return "\n".join(out) + "\n"
    order = net.index
    out = [f"sdtn {net.name}"]
    out += [f"place {p}" for p in net.places]
    out += [f"trans {t.name}" for t in net.transitions]
    for t in net.transitions:
        out += [f"in {t.name} {p}" for p in sorted(t.inputs, key=order.__getitem__)]
        out += [f"out {t.name} {p}" for p in sorted(t.outputs, key=order.__getitem__)]
    if net.transfer is not None:
        tr = net.transfer
        words = ["transfer", "in", *sorted(tr.inputs, key=order.__getitem__)]
        words += ["out", *sorted(tr.outputs, key=order.__getitem__)]
        words += ["move", *(p for move in tr.moves for p in move)]
        out.append(" ".join(words))
    if net.ignored:
        out.append("ignore " + " ".join(sorted(net.ignored, key=order.__getitem__)))
    return "\n".join(out) + "\n"


# ============================================================================
# Markings
# ============================================================================


def _age(line: int, text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(line, f"not a rational age: {text!r}") from None
    if value < 0:
        raise ParseError(line, f"negative age {text}")
    return value


def parse_marking(text: str) -> TimedMarking:
    """Parse ``token <place> <age>`` lines; ages are decimals or ``num/den``, kept exact.

    Raises:
        ParseError: On a malformed line.
    """
    tokens: list[tuple[str, Fraction]] = []
    for line, words in _lines(text):
        if words[0] != "token" or len(words) != 3:
            raise ParseError(line, "expected 'token <place> <age>'")
        tokens.append((words[1], _age(line, words[2])))
    return Bag.of(tokens)


def serialize_marking(m: TimedMarking) -> str:
    return "".join(f"token {p} {age}\n" for p, age in m)


def check_marking(net: TPN, m: TimedMarking) -> None:
    """Reject markings that mention places the net does not declare.

    Raises:
        ParseError: If a token sits on an undeclared place.
    """
    for place, _ in m.distinct():
        if place not in net.places:
            raise ParseError(0, f"marking mentions undeclared place {place!r}")


def parse_counts(text: str, net: SDTN) -> OmegaMarking:
    """Parse ``count <place> <n|w>`` lines into a vector over the net's places.

    Raises:
        ParseError: On a malformed line or an undeclared place.
    """
    counts: dict[str, int | float] = {}
    for line, words in _lines(text):
        if words[0] != "count" or len(words) != 3:
            raise ParseError(line, "expected 'count <place> <n|w>'")
        place, value = words[1], words[2]
        if place not in net.index:
            raise ParseError(line, f"undeclared place {place!r}")
        if value in ("w", "ω"):
            counts[place] = OMEGA
        elif value.isdigit():
            counts[place] = counts.get(place, 0) + int(value)
        else:
            raise ParseError(line, f"not a count: {value!r}")
    return OmegaMarking(net.vector(counts))


# ============================================================================
# Regions
# ============================================================================

_REGION_RE = re.compile(r"^b0=\[(?P<b0>[^\]]*)\]\s+word=\[(?P<word>[^\]]*)\]\s+bmax=\[(?P<bmax>[^\]]*)\]$")


def _region_tokens(line: int, text: str) -> list[RegionToken]:
    out: list[RegionToken] = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        place, sep, level = item.rpartition("@")
        if not sep or not place or not level.isdigit():
            raise ParseError(line, f"expected <place>@<k>, got {item!r}")
        out.append((place, int(level)))
    return out


def parse_region(text: str, max_constant: int, line: int = 0) -> Region:
    """Parse the ``Region.to_text`` form.

    Raises:
        ParseError: If the text is malformed or a level exceeds the max constant.
    """
    match = _REGION_RE.match(text.strip())
    if match is None:
        raise ParseError(line, f"not a region: {text!r}")
    classes = re.findall(r"\{([^}]*)\}", match["word"])
    try:
        return Region(
            Bag.of(_region_tokens(line, match["b0"])),
            tuple(Bag.of(_region_tokens(line, c)) for c in classes),
            Bag.of(filter(None, (s.strip() for s in match["bmax"].split(",")))),
            max_constant,
        )
    except ValueError as e:
        raise ParseError(line, str(e)) from None


def serialize_mruc(z: MRUC) -> list[str]:
    return [r.to_text() for r in z]


def parse_mruc(lines: list[str], max_constant: int) -> MRUC:
    return MRUC.of(max_constant, [parse_region(text, max_constant, i) for i, text in enumerate(lines, start=1)])


# ============================================================================
# JSON documents
# ============================================================================


class Verdict(BaseModel):
    """Machine-readable result of an analysis command."""

    model_config = ConfigDict(populate_by_name=True)

    schema_: Literal["tpnv.verdict/1"] = Field(default=VERDICT_SCHEMA, alias="schema")
    command: str
    net: str
    answer: Answer
    witness: list[str] = Field(default_factory=list)
    stats: dict[str, int | float | str] = Field(default_factory=dict)


class BundleDocument(BaseModel):
    """A persisted ``SymbolicSetBundle``."""

    model_config = ConfigDict(populate_by_name=True)

    schema_: Literal["tpnv.bundle/1"] = Field(default=BUNDLE_SCHEMA, alias="schema")
    net: str
    max: int = Field(ge=0)
    sets: dict[str, list[str]]


_BUNDLE_SETS = ("zeno", "allzeno", "zerotime", "pre_allzeno", "zeno_discrete")


def bundle_document(bundle: SymbolicSetBundle) -> BundleDocument:
    return BundleDocument(
        net=serialize_net(bundle.net),
        max=bundle.net.max_constant,
        sets={name: serialize_mruc(getattr(bundle, name)) for name in _BUNDLE_SETS},
    )


def save_bundle(bundle: SymbolicSetBundle, path: Path) -> None:
    path.write_text(bundle_document(bundle).model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")


def load_bundle(path: Path, net: TPN | None = None) -> SymbolicSetBundle:
    """Read a bundle written by ``save_bundle``.

    Args:
        path: Bundle file.
        net: When given, the bundle must have been built for this net.

    Raises:
        ParseError: If the file is not a valid bundle or belongs to another net.
    """
    try:
        document = BundleDocument.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ParseError(0, f"invalid bundle {path}: {e.error_count()} validation error(s)") from None
    stored = parse_tpn(document.net)
    if net is not None and stored != net:
        raise ParseError(0, f"bundle {path} was built for net {stored.name!r}, not this one")
    missing = [name for name in _BUNDLE_SETS if name not in document.sets]
    if missing:
        raise ParseError(0, f"bundle {path} lacks sets: {', '.join(missing)}")
    sets = {name: parse_mruc(document.sets[name], document.max) for name in _BUNDLE_SETS}
    return SymbolicSetBundle(net=stored, **sets)
