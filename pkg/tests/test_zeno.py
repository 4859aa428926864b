"""Tests for zenoness, all-zenoness and zero-time analysis."""

import random
from fractions import Fraction

import pytest

from tests.conftest import load_marking, net_of
from tests.oracles import discrete_zeno_oracle, random_marking, random_net
from tpnv.config import Settings
from tpnv.errors import LimitExceeded, NotStandard, SolverUnknown
from tpnv.multiset import Bag
from tpnv.net import TPN, marking
from tpnv.regions import mruc_member, region_of
from tpnv.sdtn import P_DISC, P_TIME1, SDTN, SDTNMarking, TranslationMap, TranslationMode, translate
from tpnv.zeno import (
    DeltaParam,
    build_allzeno,
    build_bundle,
    build_zeno,
    build_zeno_discrete,
    build_zerotime,
    int_delta,
    int_marking,
    is_allzeno,
    is_zeno,
    is_zeno_discrete,
    is_zerotime,
    perm_minus,
    perm_plus,
    reg_from_sdtn,
    tau,
)


def dense(places: str, top: int) -> tuple[SDTN, TranslationMap]:
    """The dense translation of a net with the given places and max constant."""
    arcs = [("in", "t", p, f"[0,{top}]") for p in places.split()]
    return translate(net_of("symbols", places, arcs))


# ============================================================================
# Encodings
# ============================================================================


def test_int_delta() -> None:
    """Test the split of fractional ages at delta."""
    sdtn, tm = dense("p", 2)
    m = marking(("p", 1), ("p", "1/2"), ("p", "19/20"), ("p", "19/10"), ("p", "21/10"), ("p", "39/10"))
    encoded = int_delta(m, DeltaParam(Fraction(4, 5)), sdtn, tm)
    assert encoded.support(sdtn) == {"p@1": 1, "p@0+": 1, "p@1-": 1, "p@2-": 1, "p@2+": 2, P_DISC: 1}


def test_int_delta_of_empty_marking() -> None:
    """Test that only the control token remains."""
    sdtn, tm = dense("p", 2)
    assert int_delta(Bag(), DeltaParam(Fraction(1, 2)), sdtn, tm).support(sdtn) == {P_DISC: 1}


@pytest.mark.parametrize("value", [Fraction(0), Fraction(1), Fraction(-1, 2)])
def test_delta_bounds(value: Fraction) -> None:
    """Test that delta lies strictly between 0 and 1."""
    with pytest.raises(ValueError):
        DeltaParam(value)


@pytest.mark.parametrize(
    ("top", "age", "expected"),
    [
        (1, "1/2", "p@0+"),
        (2, "2", "p@2"),
        (1, "3/2", "p@1+"),
        (2, "5/4", "p@1+"),
    ],
)
def test_int_marking(top: int, age: str, expected: str) -> None:
    """Test that fractional ages land just above their integer part."""
    sdtn, tm = dense("p", top)
    assert int_marking(marking(("p", age)), sdtn, tm).support(sdtn) == {expected: 1, P_DISC: 1}


def test_tau() -> None:
    """Test that integer tokens move just above and other tokens stay."""
    sdtn, tm = dense("p", 2)
    m = SDTNMarking.of(sdtn, {"p@0": 2, "p@1-": 1, "p@2": 1, P_DISC: 1})
    moved = tau(m, sdtn, tm)
    assert moved.support(sdtn) == {"p@0+": 2, "p@1-": 1, "p@2+": 1, P_DISC: 1}
    assert tau(moved, sdtn, tm) == moved
    with pytest.raises(NotStandard):
        tau(SDTNMarking.of(sdtn, {"p@0": 1, P_TIME1: 1}), sdtn, tm)


def test_perm_and_regions() -> None:
    """Test the orderings of fractional tokens and the regions they give."""
    sdtn, tm = dense("p q", 1)
    m = SDTNMarking.of(sdtn, {P_DISC: 1, "p@1": 1, "q@1+": 1, "p@0+": 1, "q@1-": 2})
    minus = perm_minus(m, sdtn, tm)
    plus = perm_plus(m, sdtn, tm)
    assert len(minus) == 2
    assert plus == frozenset({(Bag.of([("p", 0)]),)})

    (w_plus,) = plus
    regions = {reg_from_sdtn(m, w_plus, w, sdtn, tm) for w in minus}
    assert len(regions) == 2
    assert {r.to_text() for r in regions} == {
        "b0=[p@1] word=[{p@0},{q@0,q@0}] bmax=[q]",
        "b0=[p@1] word=[{p@0},{q@0},{q@0}] bmax=[q]",
    }


def test_perm_of_integer_marking() -> None:
    """Test that markings without fractional symbols give the empty word."""
    sdtn, tm = dense("p", 1)
    m = SDTNMarking.of(sdtn, {P_DISC: 1, "p@1": 2})
    assert perm_minus(m, sdtn, tm) == frozenset({()})
    assert perm_plus(m, sdtn, tm) == frozenset({()})
    assert reg_from_sdtn(m, (), (), sdtn, tm).word == ()


def test_int_marking_regions_cover_the_marking() -> None:
    """Test that some ordering of the encoded tokens rebuilds the region of the marking."""
    sdtn, tm = dense("p q", 2)
    rng = random.Random(4)
    for _ in range(100):
        m = Bag.of([(rng.choice("pq"), Fraction(rng.randint(0, 14), 4)) for _ in range(rng.randint(0, 4))])
        encoded = int_marking(m, sdtn, tm)
        rebuilt = {reg_from_sdtn(encoded, w, (), sdtn, tm) for w in perm_plus(encoded, sdtn, tm)}
        assert region_of(m, 2) in rebuilt


# ============================================================================
# Symbolic sets
# ============================================================================


def test_zero_time_loop(loop_net: TPN) -> None:
    """Test a transition that fires forever without letting time pass."""
    young = marking(("p", 0))
    assert mruc_member(young, build_zeno(loop_net))
    assert mruc_member(young, build_allzeno(loop_net))
    assert mruc_member(young, build_zerotime(loop_net))
    assert mruc_member(marking(("p", 0), ("p", "0.5")), build_zeno(loop_net))
    assert not mruc_member(marking(("p", "0.5")), build_zeno(loop_net))
    assert not is_zeno(loop_net, Bag())


def test_loop_that_needs_aging() -> None:
    """Test that a loop taking one time unit per round is neither zeno nor zero-time."""
    net = net_of("aging", "p", [("in", "t", "p", "[1,1]"), ("out", "t", "p", "[0,0]")])
    bundle = build_bundle(net)
    for m in (marking(("p", 0)), marking(("p", 1)), marking(("p", 1), ("p", "1/2"))):
        assert not is_zeno(net, m, bundle)
        assert not is_allzeno(net, m, bundle)
        assert not is_zerotime(net, m, bundle)


def test_net_without_transitions(oneplace_net: TPN) -> None:
    """Test that no marking has an infinite run."""
    bundle = build_bundle(oneplace_net)
    assert not bundle.zeno
    assert not bundle.allzeno
    assert not bundle.zerotime
    assert not bundle.zeno_discrete


def test_zeno_discrete_after_a_tick() -> None:
    """Test a zero-time loop that is only enabled once its token is one tick old."""
    net = net_of("late", "p", [("in", "t", "p", "[1,1]"), ("out", "t", "p", "[1,1]")])
    discrete = build_zeno_discrete(net)
    assert mruc_member(marking(("p", 0)), discrete)
    assert mruc_member(marking(("p", 1)), discrete)
    assert not mruc_member(marking(("p", 2)), discrete)
    assert is_zeno_discrete(net, marking(("p", 0)))
    assert not is_zeno_discrete(net, marking(("p", 2)))


@pytest.mark.slow
def test_nasty_net(nasty_net: TPN) -> None:
    """Test a zeno marking from which no all-zeno marking is reachable."""
    bundle = build_bundle(nasty_net)
    m0 = load_marking("nasty-m0.mrk")
    assert is_zeno(nasty_net, m0, bundle)
    assert not is_allzeno(nasty_net, m0, bundle)
    assert not mruc_member(m0, bundle.pre_allzeno)
    assert is_allzeno(nasty_net, load_marking("nasty-allzeno.mrk"), bundle)


@pytest.mark.parametrize("seed", [0, 1, 2, *(pytest.param(s, marks=pytest.mark.slow) for s in range(3, 30))])
def test_zeno_discrete_agrees_with_search(seed: int) -> None:
    """Test discrete-time zenoness against a search over integer configurations."""
    rng = random.Random(seed)
    net = random_net(rng, max_places=2, max_transitions=2, top=2)
    discrete = build_zeno_discrete(net)
    for _ in range(4):
        m = random_marking(rng, net, integer=True)
        expected = discrete_zeno_oracle(net, m)
        if expected is not None:
            assert mruc_member(m, discrete) == expected


def check_inclusion_chain(rng: random.Random, net: TPN, samples: int = 20) -> None:
    """Check zero-time, all-zeno, all-zeno predecessors and zeno on sampled markings."""
    settings = Settings(_env_file=None, max_regions=20_000)  # type: ignore[call-arg]
    try:
        bundle = build_bundle(net, settings)
    except (LimitExceeded, SolverUnknown) as e:
        pytest.skip(f"{net.name}: {e.message}")
    for _ in range(samples):
        m = random_marking(rng, net)
        if is_zerotime(net, m, bundle):
            assert is_allzeno(net, m, bundle)
        if is_allzeno(net, m, bundle):
            assert mruc_member(m, bundle.pre_allzeno)
        if mruc_member(m, bundle.pre_allzeno):
            assert is_zeno(net, m, bundle)
        bigger = m + Bag.of([(rng.choice(net.places), Fraction(rng.randrange(7), 3))])
        for members in (bundle.zeno, bundle.allzeno, bundle.zerotime, bundle.pre_allzeno):
            if mruc_member(m, members):
                assert mruc_member(bigger, members)


@pytest.mark.parametrize("seed", range(3))
def test_inclusion_chain_small_nets(seed: int) -> None:
    """Test the inclusion chain on two-place nets with unit constants."""
    rng = random.Random(seed)
    check_inclusion_chain(rng, random_net(rng, max_places=2, max_transitions=2, top=1))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(200))
def test_inclusion_chain(seed: int) -> None:
    """Test the inclusion chain on random nets with up to three places."""
    rng = random.Random(1_000 + seed)
    check_inclusion_chain(rng, random_net(rng, max_places=3, max_transitions=3, top=2))


def test_translation_mode_of_bundle(loop_net: TPN) -> None:
    """Test that the bundle exposes the dense translation."""
    _, tm = build_bundle(loop_net).translation
    assert tm.mode is TranslationMode.DENSE
