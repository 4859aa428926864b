"""Immutable hashable multisets.

Markings, regions and SD-TN counting vectors are all multisets. ``Bag`` keeps
its elements in a canonical sorted tuple so that equal bags hash equally and
iterate in a reproducible order.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from itertools import product
from typing import Any, Generic, TypeVar

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class Bag(Generic[T]):
    """A finite multiset.

    Attributes:
        items: Sorted ``(element, count)`` pairs with positive counts.

    Examples:
        >>> Bag.of(["p", "q", "p"]).count("p")
        2
        >>> Bag.of("ab") <= Bag.of("abb")
        True
    """

    items: tuple[tuple[T, int], ...] = ()

    @classmethod
    def of(cls, elements: Iterable[T] = ()) -> Bag[T]:
        """Build a bag from elements listed with repetition."""
        return cls.from_counts(Counter(elements))

    @classmethod
    def from_counts(cls, counts: Mapping[T, int]) -> Bag[T]:
        """Build a bag from an element-to-count mapping, dropping zero counts.

        Raises:
            ValueError: If a count is negative.
        """
        for element, n in counts.items():
            if n < 0:
                raise ValueError(f"negative count {n} for {element!r}")
        ordered = sorted(((e, n) for e, n in counts.items() if n), key=_sort_key)
        return cls(tuple(ordered))

    def count(self, element: T) -> int:
        for e, n in self.items:
            if e == element:
                return n
        return 0

    def counts(self) -> dict[T, int]:
        return dict(self.items)

    def distinct(self) -> tuple[T, ...]:
        return tuple(e for e, _ in self.items)

    def __contains__(self, element: object) -> bool:
        return any(e == element for e, _ in self.items)

    def __iter__(self) -> Iterator[T]:
        for e, n in self.items:
            for _ in range(n):
                yield e

    def __len__(self) -> int:
        return sum(n for _, n in self.items)

    def __bool__(self) -> bool:
        return bool(self.items)

    def __le__(self, other: Bag[T]) -> bool:
        theirs = other.counts()
        return all(n <= theirs.get(e, 0) for e, n in self.items)

    def __lt__(self, other: Bag[T]) -> bool:
        return self <= other and self != other

    def __add__(self, other: Bag[T]) -> Bag[T]:
        merged = Counter(self.counts())
        merged.update(other.counts())
        return Bag.from_counts(merged)

    def __sub__(self, other: Bag[T]) -> Bag[T]:
        """Multiset difference.

        Raises:
            ValueError: If ``other`` is not included in ``self``.
        """
        if not other <= self:
            raise ValueError("cannot subtract a bag that is not included")
        mine = self.counts()
        for e, n in other.items:
            mine[e] -= n
        return Bag.from_counts(mine)

    def __or__(self, other: Bag[T]) -> Bag[T]:
        """Componentwise maximum."""
        merged = self.counts()
        for e, n in other.items:
            merged[e] = max(merged.get(e, 0), n)
        return Bag.from_counts(merged)

    def add(self, element: T, n: int = 1) -> Bag[T]:
        merged = self.counts()
        merged[element] = merged.get(element, 0) + n
        return Bag.from_counts(merged)

    def remove(self, element: T, n: int = 1) -> Bag[T]:
        """Remove ``n`` copies of ``element``.

        Raises:
            ValueError: If fewer than ``n`` copies are present.
        """
        if self.count(element) < n:
            raise ValueError(f"{element!r} occurs fewer than {n} times")
        merged = self.counts()
        merged[element] -= n
        return Bag.from_counts(merged)

    def sub_bags(self) -> Iterator[Bag[T]]:
        """Enumerate every sub-multiset, the empty bag first."""
        ranges = [range(n + 1) for _, n in self.items]
        elements = self.distinct()
        for choice in product(*ranges):
            yield Bag.from_counts(dict(zip(elements, choice, strict=True)))

    def __repr__(self) -> str:
        inner = ", ".join(f"{e!r}" if n == 1 else f"{e!r}x{n}" for e, n in self.items)
        return f"Bag([{inner}])"


def _sort_key(pair: tuple[Any, int]) -> Any:
    return pair[0]


def ordered_partitions(bag: Bag[T]) -> Iterator[tuple[Bag[T], ...]]:
    """Enumerate the ways to split a bag into a sequence of nonempty blocks.

    Every distinct sequence is produced exactly once; the empty bag yields the
    single empty sequence.

    Examples:
        >>> sorted(len(w) for w in ordered_partitions(Bag.of(["q", "q"])))
        [1, 2]
    """
    if not bag:
        yield ()
        return
    for first in bag.sub_bags():
        if not first:
            continue
        for rest in ordered_partitions(bag - first):
            yield (first, *rest)
