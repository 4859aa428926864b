"""Region abstraction of timed markings.

A region ``(b0, word, bmax)`` groups the tokens of a marking into integer-aged
tokens, classes of tokens sharing a fractional part (ordered by that part) and
tokens older than the net's max constant. Sets of markings are represented as
finite unions of upward closures of regions (MRUCs).
"""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import floor

from tpnv.config import Settings, get_settings
from tpnv.errors import LimitExceeded, MaxMismatch
from tpnv.multiset import Bag
from tpnv.net import TPN, Interval, TimedMarking

logger = logging.getLogger(__name__)

RegionToken = tuple[str, int]
"""A place paired with the integer part of a token's age."""

FractionClass = Bag[RegionToken]


class TimeDomain(str, Enum):
    """Time model of an analysis."""

    DENSE = "dense"
    DISCRETE = "discrete"


# ============================================================================
# Regions
# ============================================================================


@dataclass(frozen=True, slots=True)
class Region:
    """A symbolic class of timed markings.

    Attributes:
        b0: Tokens with integer age ``k <= max``, as ``(place, k)``.
        word: Classes of tokens with equal fractional part, by increasing
            fraction; ``(place, k)`` stands for an age in ``(k, k+1)``.
        bmax: Places of tokens older than ``max``.
        max: The net's max constant.
    """

    b0: Bag[RegionToken]
    word: tuple[FractionClass, ...]
    bmax: Bag[str]
    max: int

    def __post_init__(self) -> None:
        for place, k in self.b0:
            if not 0 <= k <= self.max:
                raise ValueError(f"integer token ({place},{k}) outside 0..{self.max}")
        for cls in self.word:
            if not cls:
                raise ValueError("empty fractional class")
            for place, k in cls:
                if not 0 <= k < self.max:
                    raise ValueError(f"fractional token ({place},{k}) outside 0..{self.max - 1}")

    @classmethod
    def empty(cls, max_constant: int) -> Region:
        return cls(Bag(), (), Bag(), max_constant)

    @property
    def size(self) -> int:
        return len(self.b0) + sum(len(c) for c in self.word) + len(self.bmax)

    def to_text(self) -> str:
        """Render as ``b0=[p@1] word=[{p@0,q@0}] bmax=[q]``."""
        b0 = ",".join(f"{p}@{k}" for p, k in self.b0)
        word = ",".join("{" + ",".join(f"{p}@{k}" for p, k in c) + "}" for c in self.word)
        bmax = ",".join(self.bmax)
        return f"b0=[{b0}] word=[{word}] bmax=[{bmax}]"

    def __str__(self) -> str:
        return self.to_text()


def region_of(m: TimedMarking, max_constant: int) -> Region:
    """The unique region a marking belongs to."""
    b0: list[RegionToken] = []
    bmax: list[str] = []
    by_fraction: defaultdict[Fraction, list[RegionToken]] = defaultdict(list)
    for place, age in m:
        if age > max_constant:
            bmax.append(place)
        elif age.denominator == 1:
            b0.append((place, int(age)))
        else:
            k = floor(age)
            by_fraction[age - k].append((place, k))
    word = tuple(Bag.of(by_fraction[f]) for f in sorted(by_fraction))
    return Region(Bag.of(b0), word, Bag.of(bmax), max_constant)


def region_member(m: TimedMarking, region: Region) -> bool:
    return region_of(m, region.max) == region


def _word_leq(small: tuple[FractionClass, ...], large: tuple[FractionClass, ...]) -> bool:
    # Leftmost matching is optimal for subsequence embedding.
    j = 0
    for cls in small:
        while j < len(large) and not cls <= large[j]:
            j += 1
        if j == len(large):
            return False
        j += 1
    return True


def region_leq(r1: Region, r2: Region) -> bool:
    """The region ordering: multiset inclusion on b0 and bmax, word embedding on classes.

    Raises:
        MaxMismatch: If the regions were built for different max constants.
    """
    if r1.max != r2.max:
        raise MaxMismatch(f"regions for max {r1.max} and {r2.max}")
    if r1.size > r2.size:
        return False
    return r1.b0 <= r2.b0 and r1.bmax <= r2.bmax and _word_leq(r1.word, r2.word)


def region_less_strict(r1: Region, r2: Region) -> bool:
    return r1 != r2 and region_leq(r1, r2)


# ============================================================================
# Multi-region upward closures
# ============================================================================


@dataclass(frozen=True, slots=True)
class MRUC:
    """A finite union of region upward closures, kept as an antichain."""

    max: int
    regions: frozenset[Region] = frozenset()

    def __post_init__(self) -> None:
        for region in self.regions:
            if region.max != self.max:
                raise MaxMismatch(f"region for max {region.max} in a set for max {self.max}")

    @classmethod
    def of(cls, max_constant: int, regions: Iterable[Region]) -> MRUC:
        """Build a minimized MRUC."""
        return mruc_minimize(cls(max_constant, frozenset(regions)))

    def __iter__(self) -> Iterator[Region]:
        return iter(sorted(self.regions, key=_region_order))

    def __len__(self) -> int:
        return len(self.regions)

    def __bool__(self) -> bool:
        return bool(self.regions)


def _region_order(region: Region) -> tuple[int, str]:
    return region.size, region.to_text()


def mruc_minimize(z: MRUC) -> MRUC:
    """Drop every region that is above another one."""
    kept: list[Region] = []
    for region in sorted(z.regions, key=_region_order):
        if not any(region_leq(k, region) for k in kept):
            kept.append(region)
    return MRUC(z.max, frozenset(kept))


def mruc_member(m: TimedMarking, z: MRUC) -> bool:
    if not z.regions:
        return False
    own = region_of(m, z.max)
    return any(region_leq(r, own) for r in z.regions)


def _check_max(z1: MRUC, z2: MRUC) -> None:
    if z1.max != z2.max:
        raise MaxMismatch(f"region sets for max {z1.max} and {z2.max}")


def mruc_union(z1: MRUC, z2: MRUC) -> MRUC:
    _check_max(z1, z2)
    return MRUC.of(z1.max, z1.regions | z2.regions)


def _superpositions(
    a: tuple[FractionClass, ...], b: tuple[FractionClass, ...]
) -> Iterator[tuple[FractionClass, ...]]:
    """Order-preserving merges of two words, fusing aligned classes by maximum."""
    if not a:
        yield b
        return
    if not b:
        yield a
        return
    for rest in _superpositions(a[1:], b):
        yield (a[0], *rest)
    for rest in _superpositions(a, b[1:]):
        yield (b[0], *rest)
    for rest in _superpositions(a[1:], b[1:]):
        yield (a[0] | b[0], *rest)


def minimal_upper_bounds(r1: Region, r2: Region) -> set[Region]:
    """Regions above both arguments, including all minimal ones."""
    if r1.max != r2.max:
        raise MaxMismatch(f"regions for max {r1.max} and {r2.max}")
    b0, bmax = r1.b0 | r2.b0, r1.bmax | r2.bmax
    return {Region(b0, word, bmax, r1.max) for word in _superpositions(r1.word, r2.word)}


def mruc_intersect(z1: MRUC, z2: MRUC) -> MRUC:
    _check_max(z1, z2)
    bounds: set[Region] = set()
    for r1 in z1.regions:
        for r2 in z2.regions:
            bounds |= minimal_upper_bounds(r1, r2)
    return MRUC.of(z1.max, bounds)


# ============================================================================
# Successors
# ============================================================================


def time_succ(region: Region) -> Region:
    """The next region reached by letting time pass."""
    top = region.max
    if region.b0:
        moved = Bag.of(p for p, k in region.b0 if k == top)
        rest = Bag.of((p, k) for p, k in region.b0 if k < top)
        word = ((rest,) if rest else ()) + region.word
        return Region(Bag(), word, region.bmax + moved, top)
    if region.word:
        last = region.word[-1]
        return Region(Bag.of((p, k + 1) for p, k in last), region.word[:-1], region.bmax, top)
    return region


def tick_succ(region: Region) -> Region:
    """The region reached by one discrete-time tick."""
    top = region.max
    aged = Bag.of((p, k + 1) for p, k in region.b0 if k < top)
    moved = Bag.of(p for p, k in region.b0 if k == top)
    return Region(aged, region.word, region.bmax + moved, top)


def _successor(region: Region, domain: TimeDomain) -> Region:
    return time_succ(region) if domain is TimeDomain.DENSE else tick_succ(region)


def _take(region: Region, place: str, interval: Interval) -> list[Region]:
    """Regions obtained by removing one token of ``place`` whose age lies in ``interval``."""
    out: list[Region] = []
    for tok in region.b0.distinct():
        if tok[0] == place and interval.contains(tok[1]):
            out.append(Region(region.b0.remove(tok), region.word, region.bmax, region.max))
    for i, cls in enumerate(region.word):
        for tok in cls.distinct():
            if tok[0] == place and interval.contains_open_unit(tok[1]):
                shrunk = cls.remove(tok)
                word = region.word[:i] + ((shrunk,) if shrunk else ()) + region.word[i + 1 :]
                out.append(Region(region.b0, word, region.bmax, region.max))
    if place in region.bmax and interval.unbounded:
        out.append(Region(region.b0, region.word, region.bmax.remove(place), region.max))
    return out


def _put(region: Region, place: str, interval: Interval, domain: TimeDomain) -> list[Region]:
    """Regions obtained by adding one token of ``place`` at every age position allowed by ``interval``."""
    top = region.max
    out: list[Region] = []
    for k in range(top + 1):
        if interval.contains(k):
            out.append(Region(region.b0.add((place, k)), region.word, region.bmax, top))
    if domain is TimeDomain.DENSE:
        for k in range(top):
            if not interval.contains_open_unit(k):
                continue
            tok = (place, k)
            for i, cls in enumerate(region.word):
                word = region.word[:i] + (cls.add(tok),) + region.word[i + 1 :]
                out.append(Region(region.b0, word, region.bmax, top))
            for i in range(len(region.word) + 1):
                word = region.word[:i] + (Bag.of([tok]),) + region.word[i:]
                out.append(Region(region.b0, word, region.bmax, top))
    if interval.unbounded:
        out.append(Region(region.b0, region.word, region.bmax.add(place), top))
    return out


def post_regions(net: TPN, region: Region, domain: TimeDomain = TimeDomain.DENSE) -> set[Region]:
    """Successor regions by one timed or one discrete step.

    Pure aging inside the region itself is not reported.
    """
    result: set[Region] = set()
    later = _successor(region, domain)
    if later != region:
        result.add(later)
    for t in net.transitions:
        result |= discrete_post(net, region, t, domain)
    return result


def discrete_post(net: TPN, region: Region, transition: str, domain: TimeDomain = TimeDomain.DENSE) -> set[Region]:
    """Successor regions by firing one given transition."""
    frontier = {region}
    for arc in net.inputs_of(transition):
        frontier = {r for f in frontier for r in _take(f, arc.place, arc.interval)}
    for arc in net.outputs_of(transition):
        frontier = {r for f in frontier for r in _put(f, arc.place, arc.interval, domain)}
    return frontier


# ============================================================================
# Predecessors
# ============================================================================


def _time_pred(region: Region) -> list[Region]:
    """Exact inverse of ``time_succ``."""
    top = region.max
    out: list[Region] = []
    if region.b0:
        if all(k >= 1 for _, k in region.b0.distinct()):
            cls = Bag.of((p, k - 1) for p, k in region.b0)
            out.append(Region(Bag(), region.word + (cls,), region.bmax, top))
        return out
    for aged in region.bmax.sub_bags():
        kept = region.bmax - aged
        at_max = Bag.of((p, top) for p in aged)
        if at_max:
            out.append(Region(at_max, region.word, kept, top))
        if region.word:
            out.append(Region(at_max + region.word[0], region.word[1:], kept, top))
    return out


def _tick_pred(region: Region) -> list[Region]:
    """Exact inverse of ``tick_succ``."""
    top = region.max
    if any(k == 0 for _, k in region.b0.distinct()):
        return []
    younger = Bag.of((p, k - 1) for p, k in region.b0)
    out: list[Region] = []
    for aged in region.bmax.sub_bags():
        pred = Region(younger + Bag.of((p, top) for p in aged), (), region.bmax - aged, top)
        if pred != region:
            out.append(pred)
    return out


def pre_regions(net: TPN, region: Region, domain: TimeDomain = TimeDomain.DENSE) -> set[Region]:
    """Regions whose upward closures cover the one-step predecessors of ``region``'s closure."""
    result: set[Region] = set(_time_pred(region) if domain is TimeDomain.DENSE else _tick_pred(region))
    for t in net.transitions:
        frontier = {region}
        for arc in net.outputs_of(t):
            frontier = {r for f in frontier for r in (f, *_take(f, arc.place, arc.interval))}
        for arc in net.inputs_of(t):
            frontier = {r for f in frontier for r in _put(f, arc.place, arc.interval, domain)}
        result |= frontier
    return result


def pre_star(
    net: TPN,
    target: MRUC,
    domain: TimeDomain = TimeDomain.DENSE,
    settings: Settings | None = None,
) -> MRUC:
    """Backward reachability: every marking that can reach the target's closure.

    A FIFO worklist over minimal regions; a candidate above a kept region is
    dropped, and kept regions above a new one are evicted.

    Raises:
        MaxMismatch: If the target was built for another max constant.
        LimitExceeded: If more than ``max_regions`` regions are processed.
    """
    if target.max != net.max_constant:
        raise MaxMismatch(f"target for max {target.max}, net {net.name} has max {net.max_constant}")
    limit = get_settings(settings).max_regions
    kept: set[Region] = set(mruc_minimize(target).regions)
    queue: deque[Region] = deque(sorted(kept, key=_region_order))
    processed = 0
    while queue:
        region = queue.popleft()
        if region not in kept:
            continue
        processed += 1
        if processed > limit:
            raise LimitExceeded("max_regions", limit)
        for pred in sorted(pre_regions(net, region, domain), key=_region_order):
            if any(region_leq(k, pred) for k in kept):
                continue
            kept = {k for k in kept if not region_leq(pred, k)}
            kept.add(pred)
            queue.append(pred)
    logger.debug("pre_star on %s: %d regions processed, %d minimal", net.name, processed, len(kept))
    return MRUC(target.max, frozenset(kept))
