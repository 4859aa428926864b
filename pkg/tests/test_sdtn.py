"""Tests for SD-TNs and the translation from timed nets."""

import pytest

from tests.conftest import load_net
from tpnv.errors import NoTransfer, NotEnabled, ShapeMismatch
from tpnv.formats import parse_net, serialize_net
from tpnv.net import Interval
from tpnv.sdtn import (
    CONTROL_PLACES,
    P_DISC,
    P_DUMP,
    P_TIME1,
    SDTN,
    T_SWITCH_DISC,
    T_SWITCH_TIME,
    SDTNMarking,
    SDTNTransition,
    Sym,
    SymKind,
    Transfer,
    TranslationMode,
    enc,
    is_standard,
    sdtn_fire,
    sdtn_fire_transfer,
    symbols,
    translate,
)


def sdtn_pred() -> SDTN:
    return SDTN(
        "sdtn_pred",
        ("p1", "p2", "p3"),
        (SDTNTransition("t1", frozenset({"p3"}), frozenset({"p1", "p2", "p3"})),),
        Transfer(moves=(("p1", "p3"),)),
    )


# ============================================================================
# Age symbols
# ============================================================================


def test_symbols_are_ordered() -> None:
    """Test the symbol order k < k+ < (k+1)- < k+1."""
    assert [str(s) for s in symbols(1)] == ["0", "0+", "1-", "1", "1+"]
    with pytest.raises(ValueError):
        Sym(0, SymKind.MINUS)


@pytest.mark.parametrize(
    ("interval", "expected"),
    [
        ("[1,2]", ["1", "1+", "2-", "2"]),
        ("[1,2)", ["1", "1+", "2-"]),
        ("[1,inf)", ["1", "1+", "2-", "2", "2+"]),
        ("(0,1)", ["0+", "1-"]),
        ("[0,0]", ["0"]),
    ],
)
def test_enc(interval: str, expected: list[str]) -> None:
    """Test the symbols covered by an interval for max 2."""
    assert [str(s) for s in enc(Interval.parse(interval), 2)] == expected


# ============================================================================
# Nets and firing
# ============================================================================


def test_transfer_moves_every_token() -> None:
    """Test that the transfer empties its sources into their targets."""
    net = sdtn_pred()
    m = SDTNMarking.of(net, {"p1": 2})
    assert sdtn_fire_transfer(net, m) == SDTNMarking.of(net, {"p3": 2})
    grown = sdtn_fire(net, SDTNMarking.of(net, {"p3": 1}), "t1")
    assert grown == SDTNMarking.of(net, {"p1": 1, "p2": 1, "p3": 1})


def test_fire_errors() -> None:
    """Test disabled transitions and nets without a transfer."""
    net = sdtn_pred()
    with pytest.raises(NotEnabled):
        sdtn_fire(net, SDTNMarking.of(net, {"p1": 2}), "t1")
    plain = SDTN("plain", ("p",), (SDTNTransition("t", frozenset({"p"}), frozenset()),))
    with pytest.raises(NoTransfer):
        sdtn_fire_transfer(plain, SDTNMarking.of(plain, {"p": 1}))


def test_transfer_shape() -> None:
    """Test that moves are pairwise disjoint and avoid the Petri part."""
    with pytest.raises(ShapeMismatch):
        Transfer(moves=(("a", "b"), ("b", "c")))
    with pytest.raises(ShapeMismatch):
        Transfer(inputs=frozenset({"a"}), moves=(("a", "b"),))
    with pytest.raises(ShapeMismatch):
        SDTN("bad", ("a",), (), Transfer(moves=(("a", "b"),)))


# ============================================================================
# Translation
# ============================================================================


@pytest.mark.parametrize(("name", "size"), [("sdtrans.tpn", 4), ("sdtrans2.tpn", 16)])
def test_translation_family_sizes(name: str, size: int) -> None:
    """Test one SD-TN transition per choice of arc symbols."""
    sdtn, tm = translate(load_net(name))
    family = tm.family("t")
    assert len(family) == size
    assert all(sdtn.transition(t).inputs >= {P_DISC} for t in family)


def test_dense_translation_adds_control() -> None:
    """Test the control places, the phase switches and the transfer."""
    sdtn, tm = translate(load_net("sdtrans.tpn"))
    assert set(sdtn.places) - set(tm.symbolic_places()) == set(CONTROL_PLACES)
    names = {t.name for t in sdtn.transitions}
    assert {T_SWITCH_TIME, T_SWITCH_DISC} <= names
    assert {"p@1->1", "p@1->1+", "q@1->1", "q@1->1+"} <= names
    assert len(sdtn.transitions) == 10
    assert sdtn.transfer is not None
    assert sdtn.transfer.inputs == frozenset({P_TIME1})
    assert ("p@0", "p@0+") in sdtn.transfer.moves
    assert sdtn.ignored == frozenset({P_DUMP})


def test_discrete_translation_is_plain() -> None:
    """Test that the discrete translation has no control and no transfer."""
    sdtn, tm = translate(load_net("sdtrans.tpn"), TranslationMode.DISCRETE)
    assert sdtn.transfer is None
    assert set(sdtn.places) == set(tm.symbolic_places())
    assert tm.control_places == ()


def test_integer_ages_translation() -> None:
    """Test that only integer symbols and max+ remain on arcs."""
    _, tm = translate(load_net("sdtrans.tpn"), TranslationMode.DISCRETE, integer_ages=True)
    assert len(tm.family("t")) == 2


def test_is_standard() -> None:
    """Test the standard control pattern."""
    sdtn, _ = translate(load_net("sdtrans.tpn"))
    assert is_standard(sdtn, SDTNMarking.of(sdtn, {P_DISC: 1, "p@0": 3}))
    assert is_standard(sdtn, SDTNMarking.of(sdtn, {P_DISC: 1, P_DUMP: 4}))
    assert not is_standard(sdtn, SDTNMarking.of(sdtn, {P_DISC: 1, P_TIME1: 1}))
    assert not is_standard(sdtn, SDTNMarking.of(sdtn, {"p@0": 1}))


def test_translation_document_round_trip() -> None:
    """Test that a translated net reads back unchanged."""
    sdtn, _ = translate(load_net("sdtrans2.tpn"))
    document = parse_net(serialize_net(sdtn))
    assert document.is_sdtn
    assert document.net == sdtn
