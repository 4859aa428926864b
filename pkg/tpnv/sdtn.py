"""Simultaneous-disjoint-transfer nets and the translation from timed nets.

An SD-TN is an untimed Petri net with at most one extra transfer transition
that empties a set of pairwise disjoint source places into their targets in
one step. A dense-timed net translates into an SD-TN whose places encode
(place, age symbol) pairs; the transfer simulates the passing of time.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import product

from tpnv.errors import NoTransfer, NotEnabled, ShapeMismatch
from tpnv.net import TPN, Interval

logger = logging.getLogger(__name__)

TRANSFER = "Trans"
P_DISC = "p_disc"
P_TIME1 = "p_time1"
P_TIME2 = "p_time2"
P_COUNT = "p_count"
P_DUMP = "p_dump"
CONTROL_PLACES = (P_DISC, P_TIME1, P_TIME2, P_COUNT, P_DUMP)
T_SWITCH_TIME = "t_switch_time"
T_SWITCH_DISC = "t_switch_disc"

Vector = tuple[int | float, ...]
"""Counts per place; ``math.inf`` stands for omega."""


# ============================================================================
# Age symbols
# ============================================================================


class SymKind(str, Enum):
    EXACT = ""
    PLUS = "+"
    MINUS = "-"


_KIND_OFFSET = {SymKind.EXACT: 0, SymKind.PLUS: 1, SymKind.MINUS: -1}


@dataclass(frozen=True, slots=True)
class Sym:
    """An age symbol: exactly ``k``, just above ``k``, or just below ``k``.

    Ordered ``k < k+ < (k+1)- < k+1``.
    """

    level: int
    kind: SymKind = SymKind.EXACT

    def __post_init__(self) -> None:
        if self.level < 0 or (self.kind is SymKind.MINUS and self.level == 0):
            raise ValueError(f"no age symbol {self.level}{self.kind.value}")

    @property
    def rank(self) -> int:
        return 3 * self.level + _KIND_OFFSET[self.kind]

    def __lt__(self, other: Sym) -> bool:
        return self.rank < other.rank

    def __str__(self) -> str:
        return f"{self.level}{self.kind.value}"


def symbols(max_constant: int) -> tuple[Sym, ...]:
    """Every symbol for a max constant, in increasing order."""
    syms = [Sym(k) for k in range(max_constant + 1)]
    syms += [Sym(k, SymKind.PLUS) for k in range(max_constant + 1)]
    syms += [Sym(k, SymKind.MINUS) for k in range(1, max_constant + 1)]
    return tuple(sorted(syms))


def sym_in_interval(sym: Sym, interval: Interval, max_constant: int) -> bool:
    """Whether every age the symbol stands for lies in the interval."""
    if sym.kind is SymKind.EXACT:
        return interval.contains(sym.level)
    if sym.kind is SymKind.MINUS:
        return interval.contains_open_unit(sym.level - 1)
    if sym.level == max_constant:
        return interval.unbounded
    return interval.contains_open_unit(sym.level)


def enc(interval: Interval, max_constant: int) -> tuple[Sym, ...]:
    """The age symbols covered by an interval.

    Examples:
        >>> [str(s) for s in enc(Interval.closed(1, 2), 2)]
        ['1', '1+', '2-', '2']
    """
    return tuple(s for s in symbols(max_constant) if sym_in_interval(s, interval, max_constant))


def sym_place(place: str, sym: Sym) -> str:
    return f"{place}@{sym}"


# ============================================================================
# Nets
# ============================================================================


@dataclass(frozen=True, slots=True)
class SDTNTransition:
    name: str
    inputs: frozenset[str]
    outputs: frozenset[str]


@dataclass(frozen=True, slots=True)
class Transfer:
    """The transfer transition: a Petri part plus simultaneous moves.

    Raises:
        ShapeMismatch: If two moves share a place or a move touches the Petri part.
    """

    inputs: frozenset[str] = frozenset()
    outputs: frozenset[str] = frozenset()
    moves: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        touched = [p for move in self.moves for p in move]
        if len(set(touched)) != len(touched):
            raise ShapeMismatch("transfer sources and targets must be pairwise distinct")
        if set(touched) & (self.inputs | self.outputs):
            raise ShapeMismatch("transfer places must be disjoint from its input and output places")

    @property
    def sources(self) -> frozenset[str]:
        return frozenset(src for src, _ in self.moves)


@dataclass(frozen=True)
class SDTN:
    """A simultaneous-disjoint-transfer net.

    Attributes:
        name: Net name.
        places: Places in a fixed order; vectors index into it.
        transitions: Ordinary transitions.
        transfer: The transfer transition, if any.
        ignored: Places excluded from comparisons and cycle analyses.
    """

    name: str
    places: tuple[str, ...]
    transitions: tuple[SDTNTransition, ...] = ()
    transfer: Transfer | None = None
    ignored: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        declared = set(self.places)
        if len(declared) != len(self.places):
            raise ShapeMismatch("duplicate place declaration")
        names = [t.name for t in self.transitions]
        if len(set(names)) != len(names) or TRANSFER in names:
            raise ShapeMismatch("duplicate or reserved transition name")
        for t in self.transitions:
            if not t.inputs | t.outputs <= declared:
                raise ShapeMismatch(f"transition {t.name} names undeclared places")
        if self.transfer is not None:
            used = self.transfer.inputs | self.transfer.outputs | {p for m in self.transfer.moves for p in m}
            if not used <= declared:
                raise ShapeMismatch("transfer names undeclared places")
        if not self.ignored <= declared:
            raise ShapeMismatch("ignored places must be declared")

    @cached_property
    def index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.places)}

    @cached_property
    def _by_name(self) -> dict[str, SDTNTransition]:
        return {t.name: t for t in self.transitions}

    def transition(self, name: str) -> SDTNTransition:
        return self._by_name[name]

    def vector(self, counts: Mapping[str, int | float]) -> Vector:
        """A count vector from a sparse place mapping.

        Raises:
            ShapeMismatch: If a place is not declared.
        """
        unknown = set(counts) - set(self.places)
        if unknown:
            raise ShapeMismatch(f"unknown places {sorted(unknown)}")
        return tuple(counts.get(p, 0) for p in self.places)

    def labels(self) -> tuple[str, ...]:
        """Transition labels, the transfer last."""
        names = tuple(t.name for t in self.transitions)
        return (*names, TRANSFER) if self.transfer is not None else names


@dataclass(frozen=True, slots=True)
class SDTNMarking:
    """A marking of an SD-TN: one natural count per place of the net."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(n < 0 for n in self.counts):
            raise ValueError("negative token count")

    @classmethod
    def of(cls, net: SDTN, counts: Mapping[str, int]) -> SDTNMarking:
        return cls(tuple(int(n) for n in net.vector(counts)))

    def get(self, net: SDTN, place: str) -> int:
        return self.counts[net.index[place]]

    def support(self, net: SDTN) -> dict[str, int]:
        return {p: n for p, n in zip(net.places, self.counts, strict=True) if n}


def fire_vector(net: SDTN, counts: Vector, name: str) -> Vector:
    """Fire an ordinary transition on a vector that may hold omega entries.

    Raises:
        NotEnabled: If an input place is empty.
    """
    t = net.transition(name)
    index = net.index
    result = list(counts)
    for p in t.inputs:
        if counts[index[p]] < 1:
            raise NotEnabled(f"{name} needs a token on {p}")
    for p in t.inputs - t.outputs:
        result[index[p]] -= 1
    for p in t.outputs - t.inputs:
        result[index[p]] += 1
    return tuple(result)


def transfer_vector(net: SDTN, counts: Vector) -> Vector:
    """Fire the transfer on a vector that may hold omega entries.

    Raises:
        NoTransfer: If the net has no transfer.
        NotEnabled: If an input place of the transfer is empty.
    """
    if net.transfer is None:
        raise NoTransfer(f"{net.name} has no transfer transition")
    index = net.index
    tr = net.transfer
    for p in tr.inputs:
        if counts[index[p]] < 1:
            raise NotEnabled(f"transfer needs a token on {p}")
    result = list(counts)
    for p in tr.inputs - tr.outputs:
        result[index[p]] -= 1
    for p in tr.outputs - tr.inputs:
        result[index[p]] += 1
    for src, tgt in tr.moves:
        result[index[tgt]] = counts[index[tgt]] + counts[index[src]]
        result[index[src]] = 0
    return tuple(result)


def is_enabled_vector(net: SDTN, counts: Vector, label: str) -> bool:
    if label == TRANSFER:
        return net.transfer is not None and all(counts[net.index[p]] >= 1 for p in net.transfer.inputs)
    return all(counts[net.index[p]] >= 1 for p in net.transition(label).inputs)


def sdtn_fire(net: SDTN, m: SDTNMarking, name: str) -> SDTNMarking:
    return SDTNMarking(tuple(int(n) for n in fire_vector(net, m.counts, name)))


def sdtn_fire_transfer(net: SDTN, m: SDTNMarking) -> SDTNMarking:
    return SDTNMarking(tuple(int(n) for n in transfer_vector(net, m.counts)))


# ============================================================================
# Translation
# ============================================================================


class TranslationMode(str, Enum):
    """With (dense) or without (discrete) the time-passing phase."""

    DENSE = "dense"
    DISCRETE = "discrete"


@dataclass(frozen=True)
class TranslationMap:
    """How a timed net's places and transitions appear in its SD-TN.

    Attributes:
        mode: Translation mode.
        max: Max constant of the source net.
        source_places: Places of the timed net.
        families: Per timed transition, the names of its SD-TN copies.
        integer_ages: Whether only integer symbols (and ``max+``) were used on arcs.
    """

    mode: TranslationMode
    max: int
    source_places: tuple[str, ...]
    families: tuple[tuple[str, tuple[str, ...]], ...] = field(default=())
    integer_ages: bool = False

    def place(self, place: str, sym: Sym) -> str:
        return sym_place(place, sym)

    def family(self, transition: str) -> tuple[str, ...]:
        return dict(self.families)[transition]

    @property
    def control_places(self) -> tuple[str, ...]:
        return CONTROL_PLACES if self.mode is TranslationMode.DENSE else ()

    def symbolic_places(self) -> tuple[str, ...]:
        return tuple(sym_place(p, s) for p in self.source_places for s in symbols(self.max))


def _allowed(interval: Interval, max_constant: int, integer_ages: bool) -> tuple[Sym, ...]:
    syms = enc(interval, max_constant)
    if integer_ages:
        syms = tuple(s for s in syms if s.kind is SymKind.EXACT or s == Sym(max_constant, SymKind.PLUS))
    return syms


def translate(
    net: TPN,
    mode: TranslationMode = TranslationMode.DENSE,
    *,
    integer_ages: bool = False,
) -> tuple[SDTN, TranslationMap]:
    """Translate a timed net into an SD-TN.

    Args:
        net: The timed net.
        mode: DENSE adds the time-passing phase; DISCRETE yields a plain Petri net.
        integer_ages: Restrict arc symbols to integer ages and ``max+``, as
            needed under discrete-time semantics.

    Returns:
        The SD-TN and the map relating it to ``net``.
    """
    top = net.max_constant
    syms = symbols(top)
    places = [sym_place(p, s) for p in net.places for s in syms]
    dense = mode is TranslationMode.DENSE
    if dense:
        places += CONTROL_PLACES
    transitions: list[SDTNTransition] = []
    families: list[tuple[str, tuple[str, ...]]] = []
    for t in net.transitions:
        ins, outs = net.inputs_of(t), net.outputs_of(t)
        choices: Sequence[Iterable[Sym]] = [_allowed(a.interval, top, integer_ages) for a in (*ins, *outs)]
        members: list[str] = []
        for i, combo in enumerate(product(*choices)):
            inputs = {sym_place(a.place, s) for a, s in zip(ins, combo[: len(ins)], strict=True)}
            outputs = {sym_place(a.place, s) for a, s in zip(outs, combo[len(ins) :], strict=True)}
            if dense:
                inputs.add(P_DISC)
                outputs |= {P_DISC, P_COUNT}
            name = f"{t}#{i}"
            members.append(name)
            transitions.append(SDTNTransition(name, frozenset(inputs), frozenset(outputs)))
        families.append((t, tuple(members)))
    transfer = None
    ignored: frozenset[str] = frozenset()
    if dense:
        transitions.append(SDTNTransition(T_SWITCH_TIME, frozenset({P_DISC, P_COUNT}), frozenset({P_TIME1})))
        for p in net.places:
            for k in range(1, top + 1):
                below = sym_place(p, Sym(k, SymKind.MINUS))
                for target in (Sym(k), Sym(k, SymKind.PLUS)):
                    transitions.append(
                        SDTNTransition(
                            f"{below}>{target}",
                            frozenset({P_TIME2, below}),
                            frozenset({P_TIME2, sym_place(p, target)}),
                        )
                    )
        transitions.append(SDTNTransition(T_SWITCH_DISC, frozenset({P_TIME2}), frozenset({P_DISC})))
        moves = [(sym_place(p, Sym(k)), sym_place(p, Sym(k, SymKind.PLUS))) for p in net.places for k in range(top + 1)]
        moves.append((P_COUNT, P_DUMP))
        transfer = Transfer(frozenset({P_TIME1}), frozenset({P_TIME2}), tuple(moves))
        ignored = frozenset({P_DUMP})
    sdtn = SDTN(f"{net.name}-{mode.value}", tuple(places), tuple(transitions), transfer, ignored)
    tmap = TranslationMap(mode, top, net.places, tuple(families), integer_ages)
    logger.info(
        "translated %s (%s): %d places, %d transitions",
        net.name,
        mode.value,
        len(sdtn.places),
        len(sdtn.transitions) + (transfer is not None),
    )
    return sdtn, tmap


def is_standard(net: SDTN, m: SDTNMarking) -> bool:
    """Whether the control places hold exactly one token, on ``p_disc``.

    ``p_dump`` is ignored.
    """
    return (
        m.get(net, P_DISC) == 1
        and m.get(net, P_TIME1) == 0
        and m.get(net, P_TIME2) == 0
        and m.get(net, P_COUNT) == 0
    )
