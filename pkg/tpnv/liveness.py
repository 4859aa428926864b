"""Token liveness.

A token is live if some run lets a transition consume it, aged by the run's
delay. The question reduces to coverability: the token is parked on a fresh
place that no transition touches, so it keeps aging, and the targets are the
markings in which a consumer of the token's place is enabled with the parked
token in range.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from tpnv.config import Settings
from tpnv.errors import TokenNotInMarking
from tpnv.multiset import Bag, ordered_partitions
from tpnv.net import TPN, Arc, TimedMarking, enabled
from tpnv.regions import MRUC, Region, RegionToken, mruc_member, pre_star, region_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class TokenRef:
    """A token ``(place, age)`` of a marking."""

    place: str
    age: Fraction

    @classmethod
    def parse(cls, text: str) -> TokenRef:
        """Parse ``place@age``, e.g. ``p@1/2`` or ``p@0.9``.

        Raises:
            ValueError: If the text has no ``@`` or the age is not a rational.
        """
        place, sep, age = text.rpartition("@")
        if not sep or not place:
            raise ValueError(f"expected <place>@<age>, got {text!r}")
        return cls(place, Fraction(age))

    @property
    def token(self) -> tuple[str, Fraction]:
        return self.place, self.age


def _require(m: TimedMarking, tok: TokenRef) -> None:
    if tok.token not in m:
        raise TokenNotInMarking(f"no token ({tok.place},{tok.age}) in the marking")


def is_syntactically_dead(tok: TokenRef, k: int) -> bool:
    """Whether the token is at least ``k`` time units old."""
    return tok.age >= k


def can_consume(net: TPN, m: TimedMarking, tok: TokenRef) -> bool:
    """Whether an enabled transition accepts the token's place and age right now."""
    _require(m, tok)
    for t in net.transitions:
        interval = net.input_interval(t, tok.place)
        if interval is not None and interval.contains(tok.age) and enabled(net, m, t):
            return True
    return False


def coverable(
    net: TPN,
    m_init: TimedMarking,
    m_fin: Iterable[TimedMarking],
    settings: Settings | None = None,
) -> bool:
    """Whether ``m_init`` reaches a marking above some member of ``m_fin``."""
    top = net.max_constant
    targets = MRUC.of(top, [region_of(m, top) for m in m_fin])
    if not targets:
        return False
    return mruc_member(m_init, pre_star(net, targets, settings=settings))


def _fresh_place(net: TPN, place: str) -> str:
    name = f"{place}*"
    while name in net.places:
        name += "*"
    return name


def _age_classes(arc: Arc, top: int) -> list[tuple[str, int]]:
    """Symbolic age positions of an arc: integer, fractional, or beyond max."""
    options: list[tuple[str, int]] = [("int", k) for k in range(top + 1) if arc.interval.contains(k)]
    options += [("frac", k) for k in range(top) if arc.interval.contains_open_unit(k)]
    if arc.interval.unbounded:
        options.append(("old", top))
    return options


def consumption_targets(net: TPN, transition: str, place: str, parked: str) -> list[Region]:
    """Every region in which ``transition`` can fire with its ``place`` token taken from ``parked``."""
    top = net.max_constant
    arcs = net.inputs_of(transition)
    regions: list[Region] = []
    for combo in product(*(_age_classes(a, top) for a in arcs)):
        b0: list[RegionToken] = []
        fractional: list[RegionToken] = []
        old: list[str] = []
        for arc, (kind, k) in zip(arcs, combo, strict=True):
            owner = parked if arc.place == place else arc.place
            if kind == "int":
                b0.append((owner, k))
            elif kind == "frac":
                fractional.append((owner, k))
            else:
                old.append(owner)
        for word in ordered_partitions(Bag.of(fractional)):
            regions.append(Region(Bag.of(b0), word, Bag.of(old), top))
    return regions


def is_live(net: TPN, m: TimedMarking, tok: TokenRef, settings: Settings | None = None) -> bool:
    """Whether some run ends with the (aged) token being consumable."""
    _require(m, tok)
    consumers = [t for t in net.transitions if net.input_interval(t, tok.place) is not None]
    if not consumers:
        return False
    parked = _fresh_place(net, tok.place)
    extended = net.with_place(parked)
    targets = [r for t in consumers for r in consumption_targets(extended, t, tok.place, parked)]
    start = m.remove(tok.token).add((parked, tok.age))
    closure = pre_star(extended, MRUC.of(net.max_constant, targets), settings=settings)
    live = mruc_member(start, closure)
    logger.debug("token %s@%s live=%s (%d target regions)", tok.place, tok.age, live, len(targets))
    return live


def live_part(net: TPN, m: TimedMarking, settings: Settings | None = None) -> TimedMarking:
    """The tokens of ``m`` that are live in ``m``."""
    kept: dict[tuple[str, Fraction], int] = {}
    for token, n in m.items:
        if is_live(net, m, TokenRef(*token), settings):
            kept[token] = n
    return Bag.from_counts(kept)
