"""Dense-timed Petri nets: syntax, exact operational semantics, runs and delays.

Ages are ``fractions.Fraction`` throughout; no floating point enters the
semantics. A timed marking is a ``Bag`` of ``(place, age)`` tokens.
"""

from __future__ import annotations

import logging
import math
import random
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

from tpnv.errors import InvalidInterval, NotEnabled, ShapeMismatch
from tpnv.multiset import Bag

logger = logging.getLogger(__name__)

Token = tuple[str, Fraction]
TimedMarking = Bag[Token]

INF = math.inf
"""Returned by ``run_delay`` for runs of unbounded delay."""


# ============================================================================
# Intervals
# ============================================================================

_INTERVAL_RE = re.compile(
    r"^\s*(?P<lo_b>[\[(])\s*(?P<lo>\d+)\s*[,:]\s*(?P<hi>\d+|inf|INF|oo)\s*(?P<hi_b>[\])])\s*$"
)


@dataclass(frozen=True, slots=True)
class Interval:
    """An age interval with natural bounds.

    Attributes:
        lower: Lower bound.
        upper: Upper bound, or None for an unbounded interval.
        lower_closed: Whether ``lower`` itself belongs to the interval.
        upper_closed: Whether ``upper`` itself belongs to the interval.

    Raises:
        InvalidInterval: If the interval is empty or malformed.
    """

    lower: int
    upper: int | None = None
    lower_closed: bool = True
    upper_closed: bool = False

    def __post_init__(self) -> None:
        if self.lower < 0:
            raise InvalidInterval(f"negative lower bound {self.lower}")
        if self.upper is None:
            if self.upper_closed:
                raise InvalidInterval("an unbounded interval cannot be closed on the right")
            return
        if self.upper < self.lower:
            raise InvalidInterval(f"empty interval: {self.upper} < {self.lower}")
        if self.upper == self.lower and not (self.lower_closed and self.upper_closed):
            raise InvalidInterval(f"empty interval at {self.lower}")

    @classmethod
    def closed(cls, lower: int, upper: int) -> Interval:
        return cls(lower, upper, True, True)

    @classmethod
    def point(cls, value: int) -> Interval:
        return cls(value, value, True, True)

    @classmethod
    def parse(cls, text: str) -> Interval:
        """Parse ``[a,b]``, ``(a,b]``, ``[a,inf)`` and friends; ``:`` may replace ``,``.

        Raises:
            InvalidInterval: If the text is not an interval literal.
        """
        match = _INTERVAL_RE.match(text)
        if match is None:
            raise InvalidInterval(f"not an interval: {text!r}")
        hi = match["hi"]
        upper = None if hi.lower() in {"inf", "oo"} else int(hi)
        return cls(int(match["lo"]), upper, match["lo_b"] == "[", match["hi_b"] == "]")

    @property
    def unbounded(self) -> bool:
        return self.upper is None

    def contains(self, x: Fraction | int) -> bool:
        if x < self.lower or (x == self.lower and not self.lower_closed):
            return False
        if self.upper is None:
            return True
        return x < self.upper or (x == self.upper and self.upper_closed)

    def contains_open_unit(self, k: int) -> bool:
        """Whether the open interval ``(k, k+1)`` lies inside this interval."""
        return self.lower <= k and (self.upper is None or k + 1 <= self.upper)

    def __str__(self) -> str:
        left = "[" if self.lower_closed else "("
        right = "]" if self.upper_closed else ")"
        upper = "inf" if self.upper is None else str(self.upper)
        return f"{left}{self.lower},{upper}{right}"


def interval_contains(interval: Interval, x: Fraction | int) -> bool:
    """Test whether an age lies in an interval."""
    return interval.contains(x)


def canonical_output_age(interval: Interval) -> Fraction:
    """Pick a deterministic age inside an interval.

    The lower bound when it is closed, otherwise the lower bound plus half of
    ``min(1, span)``, where an unbounded span counts as 1.

    Examples:
        >>> canonical_output_age(Interval(0, 1, False, False))
        Fraction(1, 2)
    """
    if interval.lower_closed:
        return Fraction(interval.lower)
    span = 1 if interval.upper is None else interval.upper - interval.lower
    return interval.lower + Fraction(min(1, span), 2)


# ============================================================================
# Nets
# ============================================================================


@dataclass(frozen=True, slots=True)
class Arc:
    """An input or output arc between a transition and a place."""

    transition: str
    place: str
    interval: Interval


@dataclass(frozen=True)
class TPN:
    """A dense-timed Petri net.

    ``In`` and ``Out`` are partial functions, so a transition has at most one
    input arc and one output arc per place.

    Attributes:
        name: Net name used in documents and reports.
        places: Declared places, in declaration order.
        transitions: Declared transitions, in declaration order.
        input_arcs: Arcs from places to transitions.
        output_arcs: Arcs from transitions to places.

    Raises:
        ShapeMismatch: If an arc refers to an undeclared node or is duplicated.
    """

    name: str
    places: tuple[str, ...]
    transitions: tuple[str, ...]
    input_arcs: tuple[Arc, ...] = ()
    output_arcs: tuple[Arc, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.places)) != len(self.places):
            raise ShapeMismatch("duplicate place declaration")
        if len(set(self.transitions)) != len(self.transitions):
            raise ShapeMismatch("duplicate transition declaration")
        places, transitions = set(self.places), set(self.transitions)
        for kind, arcs in (("input", self.input_arcs), ("output", self.output_arcs)):
            seen: set[tuple[str, str]] = set()
            for arc in arcs:
                if arc.transition not in transitions:
                    raise ShapeMismatch(f"{kind} arc names undeclared transition {arc.transition!r}")
                if arc.place not in places:
                    raise ShapeMismatch(f"{kind} arc names undeclared place {arc.place!r}")
                key = (arc.transition, arc.place)
                if key in seen:
                    raise ShapeMismatch(f"duplicate {kind} arc {arc.transition} {arc.place}")
                seen.add(key)

    @cached_property
    def _inputs(self) -> dict[str, tuple[Arc, ...]]:
        return {t: tuple(a for a in self.input_arcs if a.transition == t) for t in self.transitions}

    @cached_property
    def _outputs(self) -> dict[str, tuple[Arc, ...]]:
        return {t: tuple(a for a in self.output_arcs if a.transition == t) for t in self.transitions}

    def inputs_of(self, transition: str) -> tuple[Arc, ...]:
        return self._inputs[transition]

    def outputs_of(self, transition: str) -> tuple[Arc, ...]:
        return self._outputs[transition]

    def input_interval(self, transition: str, place: str) -> Interval | None:
        for arc in self.inputs_of(transition):
            if arc.place == place:
                return arc.interval
        return None

    @cached_property
    def max_constant(self) -> int:
        return max_constant(self)

    def with_place(self, place: str) -> TPN:
        """Return a copy with one extra isolated place."""
        return TPN(self.name, (*self.places, place), self.transitions, self.input_arcs, self.output_arcs)


def max_constant(net: TPN) -> int:
    """The largest finite bound written on any arc, 0 if there is none."""
    bounds = [0]
    for arc in (*net.input_arcs, *net.output_arcs):
        bounds.append(arc.interval.lower)
        if arc.interval.upper is not None:
            bounds.append(arc.interval.upper)
    return max(bounds)


# ============================================================================
# Markings and firing
# ============================================================================


def marking(*tokens: tuple[str, Fraction | int | str]) -> TimedMarking:
    """Build a timed marking, converting ages to exact rationals.

    Examples:
        >>> marking(("Q", "2.0"), ("R", "4.3")).count(("R", Fraction(43, 10)))
        1
    """
    converted: list[Token] = []
    for place, age in tokens:
        value = Fraction(age)
        if value < 0:
            raise ValueError(f"negative age {age} on {place}")
        converted.append((place, value))
    return Bag.of(converted)


def marking_leq(m1: TimedMarking, m2: TimedMarking) -> bool:
    """Multiset inclusion of timed markings, with exact age comparison."""
    return m1 <= m2


def elapse(m: TimedMarking, d: Fraction | int) -> TimedMarking:
    """Age every token by exactly ``d``.

    Raises:
        ValueError: If ``d`` is not positive.
    """
    if d <= 0:
        raise ValueError(f"delay must be positive, got {d}")
    return Bag.from_counts({(p, x + d): n for (p, x), n in m.items})


@dataclass(frozen=True, slots=True)
class Binding:
    """Tokens consumed and produced by one firing.

    ``consumed[i]`` belongs to the i-th input arc of the transition and
    ``produced[i]`` to its i-th output arc.
    """

    consumed: tuple[Token, ...]
    produced: tuple[Token, ...]


def _input_candidates(net: TPN, m: TimedMarking, transition: str) -> list[list[Token]]:
    return [
        [tok for tok in m.distinct() if tok[0] == arc.place and interval_contains(arc.interval, tok[1])]
        for arc in net.inputs_of(transition)
    ]


def enumerate_input_bindings(net: TPN, m: TimedMarking, transition: str) -> frozenset[TimedMarking]:
    """All input multisets witnessing that ``transition`` is enabled.

    Input arcs sit on distinct places, so each arc picks its token independently.
    """
    return frozenset(Bag.of(choice) for choice in product(*_input_candidates(net, m, transition)))


def enabled(net: TPN, m: TimedMarking, transition: str) -> bool:
    return all(_input_candidates(net, m, transition))


def fire_discrete(net: TPN, m: TimedMarking, transition: str, binding: Binding) -> TimedMarking:
    """Fire a transition: ``(M - consumed) + produced``.

    Raises:
        ShapeMismatch: If the binding does not line up with the arcs.
        NotEnabled: If a consumed token is missing or an age violates its interval.
    """
    inputs, outputs = net.inputs_of(transition), net.outputs_of(transition)
    if len(binding.consumed) != len(inputs) or len(binding.produced) != len(outputs):
        raise ShapeMismatch(f"binding size does not match the arcs of {transition}")
    for arc, (place, age) in zip(inputs, binding.consumed, strict=True):
        if place != arc.place:
            raise ShapeMismatch(f"{transition} consumes from {arc.place}, binding names {place}")
        if not arc.interval.contains(age):
            raise NotEnabled(f"age {age} of {place} outside {arc.interval} for {transition}")
    for arc, (place, age) in zip(outputs, binding.produced, strict=True):
        if place != arc.place:
            raise ShapeMismatch(f"{transition} produces into {arc.place}, binding names {place}")
        if not arc.interval.contains(age):
            raise NotEnabled(f"produced age {age} on {place} outside {arc.interval} for {transition}")
    consumed = Bag.of(binding.consumed)
    if not consumed <= m:
        raise NotEnabled(f"{transition} consumes tokens absent from the marking")
    return (m - consumed) + Bag.of(binding.produced)


def canonical_binding(net: TPN, transition: str, consumed: Iterable[Token]) -> Binding:
    """Pair consumed tokens with canonical output ages."""
    produced = tuple((arc.place, canonical_output_age(arc.interval)) for arc in net.outputs_of(transition))
    return Binding(tuple(consumed), produced)


# ============================================================================
# Runs
# ============================================================================


@dataclass(frozen=True, slots=True)
class Discrete:
    transition: str
    binding: Binding


@dataclass(frozen=True, slots=True)
class Elapse:
    amount: Fraction

    def __post_init__(self) -> None:
        if self.amount <= 0:
            raise ValueError(f"elapse amount must be positive, got {self.amount}")


Step = Discrete | Elapse


def _normalize(steps: Sequence[Step]) -> tuple[Step, ...]:
    merged: list[Step] = []
    for step in steps:
        if isinstance(step, Elapse) and merged and isinstance(merged[-1], Elapse):
            merged[-1] = Elapse(merged[-1].amount + step.amount)
        else:
            merged.append(step)
    return tuple(merged)


@dataclass(frozen=True)
class Run:
    """A finite run, optionally continued by a repeated period.

    When ``period`` is nonempty the run is infinite: the period repeats forever,
    its k-th repetition scaling every ``Elapse`` by ``period_scale ** k``.
    Discrete steps of the period keep their bindings, so only ``prefix`` and
    the first repetition are replayable verbatim.

    Attributes:
        start: Initial marking.
        steps: The finite prefix, normalized.
        period: Steps repeated forever, empty for finite runs.
        period_scale: Ratio applied to elapses between repetitions, in (0, 1].
    """

    start: TimedMarking
    steps: tuple[Step, ...] = ()
    period: tuple[Step, ...] = ()
    period_scale: Fraction = field(default=Fraction(1))

    def __post_init__(self) -> None:
        if not 0 < self.period_scale <= 1:
            raise ValueError(f"period scale must lie in (0, 1], got {self.period_scale}")
        object.__setattr__(self, "steps", _normalize(self.steps))
        object.__setattr__(self, "period", _normalize(self.period))

    @property
    def is_finite(self) -> bool:
        return not self.period

    def markings(self, net: TPN) -> Iterator[TimedMarking]:
        """Replay the prefix, yielding the start and every intermediate marking.

        Raises:
            NotEnabled: If some step cannot be taken.
        """
        current = self.start
        yield current
        for step in self.steps:
            if isinstance(step, Elapse):
                current = elapse(current, step.amount)
            else:
                current = fire_discrete(net, current, step.transition, step.binding)
            yield current

    def final(self, net: TPN) -> TimedMarking:
        last = self.start
        for last in self.markings(net):
            pass
        return last


def run_delay(run: Run) -> Fraction | float:
    """Total time elapsed along a run; ``INF`` if it diverges.

    Examples:
        >>> run_delay(Run(Bag(), (Elapse(Fraction(3, 2)), Elapse(Fraction(1, 4)))))
        Fraction(7, 4)
    """
    prefix = sum((s.amount for s in run.steps if isinstance(s, Elapse)), Fraction(0))
    if run.is_finite:
        return prefix
    period = sum((s.amount for s in run.period if isinstance(s, Elapse)), Fraction(0))
    if period == 0:
        return prefix
    if run.period_scale == 1:
        return INF
    return prefix + period / (1 - run.period_scale)


# ============================================================================
# Simulation
# ============================================================================

_SIMULATION_DELAYS = (Fraction(1, 4), Fraction(1, 2), Fraction(1))


def simulate(net: TPN, start: TimedMarking, steps: int, rng: random.Random) -> Run:
    """Draw a random run of at most ``steps`` steps.

    Each step fires a uniformly chosen enabled binding with canonical output
    ages, or lets a random amount of time pass. Two elapses never follow each
    other.
    """
    current = start
    taken: list[Step] = []
    for _ in range(steps):
        moves: list[Step] = []
        for t in net.transitions:
            for choice in product(*_input_candidates(net, current, t)):
                moves.append(Discrete(t, canonical_binding(net, t, choice)))
        if not taken or not isinstance(taken[-1], Elapse):
            moves.append(Elapse(rng.choice(_SIMULATION_DELAYS)))
        if not moves:
            break
        move = rng.choice(moves)
        if isinstance(move, Elapse):
            current = elapse(current, move.amount)
        else:
            current = fire_discrete(net, current, move.transition, move.binding)
        taken.append(move)
    logger.debug("simulated %d steps on %s", len(taken), net.name)
    return Run(start, tuple(taken))
