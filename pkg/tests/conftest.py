"""Shared fixtures: the sample nets under nets/ and small hand-built nets."""

from pathlib import Path

import pytest

from tpnv.config import Settings
from tpnv.formats import parse_marking, parse_tpn
from tpnv.net import TPN, Arc, Interval, TimedMarking

NETS = Path(__file__).resolve().parent.parent / "nets"


def load_net(name: str) -> TPN:
    return parse_tpn((NETS / name).read_text(encoding="utf-8"))


def load_marking(name: str) -> TimedMarking:
    return parse_marking((NETS / name).read_text(encoding="utf-8"))


def net_of(name: str, places: str, arcs: list[tuple[str, str, str, str]]) -> TPN:
    """Build a net from ``(direction, transition, place, interval)`` rows."""
    transitions = tuple(dict.fromkeys(t for _, t, _, _ in arcs))
    ins = tuple(Arc(t, p, Interval.parse(i)) for d, t, p, i in arcs if d == "in")
    outs = tuple(Arc(t, p, Interval.parse(i)) for d, t, p, i in arcs if d == "out")
    return TPN(name, tuple(places.split()), transitions, ins, outs)


@pytest.fixture
def settings() -> Settings:
    return Settings(_env_file=None)  # type: ignore[call-arg]


@pytest.fixture
def small_net() -> TPN:
    return load_net("small.tpn")


@pytest.fixture
def nasty_net() -> TPN:
    return load_net("nasty.tpn")


@pytest.fixture
def loop_net() -> TPN:
    return load_net("loop.tpn")


@pytest.fixture
def pump_net() -> TPN:
    return load_net("pump.tpn")


@pytest.fixture
def oneplace_net() -> TPN:
    return load_net("oneplace.tpn")


@pytest.fixture
def consumer_net() -> TPN:
    """A token on p can only be consumed while younger than 1; q tokens never."""
    return net_of("consumer", "p q r", [("in", "t", "p", "[0,1)"), ("out", "t", "r", "[0,0]")])
