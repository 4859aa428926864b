"""Zenoness, all-zenoness and zero-time analysis.

A timed marking is mapped to a standard marking of the SD-TN translation; the
minimal standard markings with an infinite SD-TN run are turned back into
regions, and backward reachability over regions yields the symbolic sets.
"""

from __future__ import annotations

import logging
import threading
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import floor

from tpnv.config import Settings, get_settings
from tpnv.errors import NotStandard
from tpnv.multiset import Bag, ordered_partitions
from tpnv.net import TPN, TimedMarking
from tpnv.omega import inf_min, inf_min_standard
from tpnv.regions import (
    MRUC,
    FractionClass,
    Region,
    RegionToken,
    TimeDomain,
    mruc_intersect,
    mruc_member,
    pre_star,
)
from tpnv.sdtn import (
    P_DISC,
    SDTN,
    SDTNMarking,
    Sym,
    SymKind,
    TranslationMap,
    TranslationMode,
    is_standard,
    sym_place,
    translate,
)

logger = logging.getLogger(__name__)

Word = tuple[FractionClass, ...]


@dataclass(frozen=True, slots=True)
class DeltaParam:
    """The width of the "just above an integer" band, strictly between 0 and 1."""

    value: Fraction

    def __post_init__(self) -> None:
        if not 0 < self.value < 1:
            raise ValueError(f"delta must lie strictly between 0 and 1, got {self.value}")


# ============================================================================
# Timed markings to SD-TN markings and back
# ============================================================================


def int_delta(m: TimedMarking, delta: DeltaParam, net: SDTN, tm: TranslationMap) -> SDTNMarking:
    """Encode a timed marking, splitting fractional ages at ``delta``.

    Examples:
        An age of 1/2 with delta 4/5 lands on ``p@0+``; 19/20 lands on ``p@1-``.
    """
    counts: dict[str, int] = {P_DISC: 1}
    for place, age in m:
        if age > tm.max:
            sym = Sym(tm.max, SymKind.PLUS)
        elif age.denominator == 1:
            sym = Sym(int(age))
        else:
            k = floor(age)
            sym = Sym(k, SymKind.PLUS) if age - k <= delta.value else Sym(k + 1, SymKind.MINUS)
        key = sym_place(place, sym)
        counts[key] = counts.get(key, 0) + 1
    return SDTNMarking.of(net, counts)


def int_marking(m: TimedMarking, net: SDTN, tm: TranslationMap) -> SDTNMarking:
    """Encode a timed marking with every fractional age just above its integer part."""
    counts: dict[str, int] = {P_DISC: 1} if P_DISC in net.index else {}
    for place, age in m:
        if age > tm.max:
            sym = Sym(tm.max, SymKind.PLUS)
        elif age.denominator == 1:
            sym = Sym(int(age))
        else:
            sym = Sym(floor(age), SymKind.PLUS)
        key = sym_place(place, sym)
        counts[key] = counts.get(key, 0) + 1
    return SDTNMarking.of(net, counts)


def tau(m: SDTNMarking, net: SDTN, tm: TranslationMap) -> SDTNMarking:
    """Let an arbitrarily small positive delay pass: integer ages move just above.

    Raises:
        NotStandard: If ``m`` is not a standard marking.
    """
    if not is_standard(net, m):
        raise NotStandard("tau is defined on standard markings only")
    counts = m.support(net)
    for place in tm.source_places:
        for k in range(tm.max + 1):
            exact = sym_place(place, Sym(k))
            moved = counts.pop(exact, 0)
            if moved:
                above = sym_place(place, Sym(k, SymKind.PLUS))
                counts[above] = counts.get(above, 0) + moved
    return SDTNMarking.of(net, counts)


def _fractional_bag(m: SDTNMarking, net: SDTN, tm: TranslationMap, kind: SymKind) -> Bag[RegionToken]:
    tokens: dict[RegionToken, int] = {}
    for place in tm.source_places:
        for k in range(tm.max):
            sym = Sym(k, SymKind.PLUS) if kind is SymKind.PLUS else Sym(k + 1, SymKind.MINUS)
            n = m.get(net, sym_place(place, sym))
            if n:
                tokens[(place, k)] = n
    return Bag.from_counts(tokens)


def perm_minus(m: SDTNMarking, net: SDTN, tm: TranslationMap) -> frozenset[Word]:
    """Orderings into fractional classes of the tokens just below an integer."""
    return frozenset(ordered_partitions(_fractional_bag(m, net, tm, SymKind.MINUS)))


def perm_plus(m: SDTNMarking, net: SDTN, tm: TranslationMap) -> frozenset[Word]:
    """Orderings into fractional classes of the tokens just above an integer below max."""
    return frozenset(ordered_partitions(_fractional_bag(m, net, tm, SymKind.PLUS)))


def reg_from_sdtn(m: SDTNMarking, w_plus: Word, w_minus: Word, net: SDTN, tm: TranslationMap) -> Region:
    """The region with integer tokens and old tokens from ``m`` and the word ``w_plus`` then ``w_minus``."""
    b0: dict[RegionToken, int] = {}
    bmax: dict[str, int] = {}
    for place in tm.source_places:
        for k in range(tm.max + 1):
            n = m.get(net, sym_place(place, Sym(k)))
            if n:
                b0[(place, k)] = n
        old = m.get(net, sym_place(place, Sym(tm.max, SymKind.PLUS)))
        if old:
            bmax[place] = old
    return Region(Bag.from_counts(b0), w_plus + w_minus, Bag.from_counts(bmax), tm.max)


def _has_minus_tokens(m: SDTNMarking, net: SDTN, tm: TranslationMap) -> bool:
    return any(
        m.get(net, sym_place(p, Sym(k, SymKind.MINUS))) for p in tm.source_places for k in range(1, tm.max + 1)
    )


def _word_key(word: Word) -> str:
    return "|".join(",".join(f"{p}@{k}" for p, k in cls) for cls in word)


def _marking_key(m: SDTNMarking) -> tuple[int, ...]:
    return m.counts


def tau_preimages(m: SDTNMarking, net: SDTN, tm: TranslationMap) -> frozenset[SDTNMarking]:
    """Standard markings mapped onto ``m`` by ``tau``."""
    counts = m.support(net)
    pairs = [
        (sym_place(p, Sym(k)), sym_place(p, Sym(k, SymKind.PLUS))) for p in tm.source_places for k in range(tm.max + 1)
    ]
    if any(counts.get(exact, 0) for exact, _ in pairs):
        return frozenset()
    splits: list[list[tuple[str, str, int, int]]] = []
    for place, above in pairs:
        total = counts.get(above, 0)
        splits.append([(above, place, total - n, n) for n in range(total + 1)])
    result: set[SDTNMarking] = set()
    for choice in product(*splits):
        pre = dict(counts)
        for above, place, stay, moved in choice:
            pre[above] = stay
            pre[place] = moved
        result.add(SDTNMarking.of(net, {p: n for p, n in pre.items() if n}))
    return frozenset(result)


# ============================================================================
# Symbolic sets
# ============================================================================


class _PreStarCache:
    def __init__(self, net: TPN, domain: TimeDomain, settings: Settings | None) -> None:
        self._net = net
        self._domain = domain
        self._settings = settings
        self._lock = threading.Lock()
        self._done: dict[Region, MRUC] = {}

    def __call__(self, region: Region) -> MRUC:
        with self._lock:
            cached = self._done.get(region)
        if cached is not None:
            return cached
        result = pre_star(self._net, MRUC.of(region.max, [region]), self._domain, self._settings)
        with self._lock:
            self._done[region] = result
        return result


def _union(max_constant: int, parts: Iterable[MRUC]) -> MRUC:
    return MRUC.of(max_constant, [r for part in parts for r in part.regions])


def build_zeno(net: TPN, settings: Settings | None = None) -> MRUC:
    """The markings with an infinite run of finite total delay."""
    sdtn, tm = translate(net, TranslationMode.DENSE)
    minimal = sorted(inf_min_standard(sdtn, settings), key=_marking_key)
    logger.info("zeno: %d minimal standard markings with infinite runs", len(minimal))
    closure = _PreStarCache(net, TimeDomain.DENSE, settings)

    def solve(job: tuple[SDTNMarking, Word]) -> MRUC:
        m, w_plus = job
        acc: MRUC | None = None
        for w_minus in sorted(perm_minus(m, sdtn, tm), key=_word_key):
            part = closure(reg_from_sdtn(m, w_plus, w_minus, sdtn, tm))
            acc = part if acc is None else mruc_intersect(acc, part)
            if not acc:
                break
        return acc if acc is not None else MRUC(tm.max)

    jobs = [(m, w) for m in minimal for w in sorted(perm_plus(m, sdtn, tm), key=_word_key)]
    workers = get_settings(settings).jobs
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(solve, jobs))
    else:
        parts = [solve(job) for job in jobs]
    return _union(tm.max, parts)


def _minus_free_minimal(sdtn: SDTN, tm: TranslationMap, settings: Settings | None) -> list[SDTNMarking]:
    if tm.mode is TranslationMode.DENSE:
        found = inf_min_standard(sdtn, settings)
    else:
        found = inf_min(sdtn, settings)
    return sorted((m for m in found if not _has_minus_tokens(m, sdtn, tm)), key=_marking_key)


def build_allzeno(net: TPN, settings: Settings | None = None) -> MRUC:
    """The markings with runs of arbitrarily small total delay."""
    sdtn, tm = translate(net, TranslationMode.DENSE)
    gamma: set[SDTNMarking] = set()
    for m in _minus_free_minimal(sdtn, tm, settings):
        gamma.add(m)
        gamma |= tau_preimages(m, sdtn, tm)
    regions = [reg_from_sdtn(m, w, (), sdtn, tm) for m in gamma for w in perm_plus(m, sdtn, tm)]
    return MRUC.of(tm.max, regions)


def build_zerotime(net: TPN, settings: Settings | None = None) -> MRUC:
    """The markings with an infinite run taking no time at all."""
    sdtn, tm = translate(net, TranslationMode.DISCRETE)
    regions = [
        reg_from_sdtn(m, w, (), sdtn, tm)
        for m in _minus_free_minimal(sdtn, tm, settings)
        for w in perm_plus(m, sdtn, tm)
    ]
    return MRUC.of(tm.max, regions)


def build_zeno_discrete(net: TPN, settings: Settings | None = None) -> MRUC:
    """Zeno markings under discrete time: integer ages, one-tick delays.

    Such a run ends with an infinite suffix that takes no time, so the set is
    the backward closure of the integer markings with an infinite untimed run.
    """
    sdtn, tm = translate(net, TranslationMode.DISCRETE, integer_ages=True)
    regions = [reg_from_sdtn(m, (), (), sdtn, tm) for m in _minus_free_minimal(sdtn, tm, settings)]
    return pre_star(net, MRUC.of(tm.max, regions), TimeDomain.DISCRETE, settings)


@dataclass(frozen=True)
class SymbolicSetBundle:
    """The symbolic sets of one net, all for the net's max constant."""

    net: TPN
    zeno: MRUC
    allzeno: MRUC
    zerotime: MRUC
    pre_allzeno: MRUC
    zeno_discrete: MRUC

    @property
    def translation(self) -> tuple[SDTN, TranslationMap]:
        return translate(self.net, TranslationMode.DENSE)


def build_bundle(net: TPN, settings: Settings | None = None) -> SymbolicSetBundle:
    """Construct every symbolic set of a net."""
    allzeno = build_allzeno(net, settings)
    bundle = SymbolicSetBundle(
        net=net,
        zeno=build_zeno(net, settings),
        allzeno=allzeno,
        zerotime=build_zerotime(net, settings),
        pre_allzeno=pre_star(net, allzeno, TimeDomain.DENSE, settings),
        zeno_discrete=build_zeno_discrete(net, settings),
    )
    logger.info(
        "bundle for %s: zeno %d, allzeno %d, zerotime %d, pre_allzeno %d regions",
        net.name,
        len(bundle.zeno),
        len(bundle.allzeno),
        len(bundle.zerotime),
        len(bundle.pre_allzeno),
    )
    return bundle


_bundles: dict[TPN, SymbolicSetBundle] = {}
_bundles_lock = threading.Lock()


def bundle_for(net: TPN, settings: Settings | None = None) -> SymbolicSetBundle:
    """The cached bundle of a net, built on first use."""
    with _bundles_lock:
        cached = _bundles.get(net)
    if cached is not None:
        return cached
    bundle = build_bundle(net, settings)
    with _bundles_lock:
        _bundles[net] = bundle
    return bundle


def is_zeno(net: TPN, m: TimedMarking, bundle: SymbolicSetBundle | None = None) -> bool:
    return mruc_member(m, (bundle or bundle_for(net)).zeno)


def is_allzeno(net: TPN, m: TimedMarking, bundle: SymbolicSetBundle | None = None) -> bool:
    return mruc_member(m, (bundle or bundle_for(net)).allzeno)


def is_zerotime(net: TPN, m: TimedMarking, bundle: SymbolicSetBundle | None = None) -> bool:
    return mruc_member(m, (bundle or bundle_for(net)).zerotime)


def is_zeno_discrete(net: TPN, m: TimedMarking, bundle: SymbolicSetBundle | None = None) -> bool:
    """Discrete-time zenoness; ``m`` should carry integer ages."""
    return mruc_member(m, (bundle or bundle_for(net)).zeno_discrete)
