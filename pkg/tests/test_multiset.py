"""Tests for the multiset type."""

import pytest

from tpnv.multiset import Bag, ordered_partitions


def test_bag_is_order_independent() -> None:
    """Test that bags built in different orders are equal and hash equally."""
    a = Bag.of(["q", "p", "q"])
    b = Bag.of(["q", "q", "p"])
    assert a == b
    assert hash(a) == hash(b)
    assert list(a) == ["p", "q", "q"]
    assert len(a) == 3


def test_bag_arithmetic() -> None:
    """Test sum, difference, maximum and inclusion."""
    a = Bag.of("aab")
    b = Bag.of("abc")
    assert a + b == Bag.of("aaabbc")
    assert (a + b) - b == a
    assert a | b == Bag.of("aabc")
    assert Bag.of("ab") <= a
    assert not a <= b
    assert Bag.of("ab") < a
    assert not a < a


def test_bag_rejects_invalid_operations() -> None:
    """Test negative counts and removals of absent elements."""
    with pytest.raises(ValueError):
        Bag.from_counts({"p": -1})
    with pytest.raises(ValueError):
        Bag.of("a") - Bag.of("b")
    with pytest.raises(ValueError):
        Bag.of("a").remove("a", 2)


def test_sub_bags() -> None:
    """Test that every sub-multiset is enumerated once, the empty bag first."""
    subs = list(Bag.of("aab").sub_bags())
    assert len(subs) == 6
    assert len(set(subs)) == 6
    assert subs[0] == Bag()


@pytest.mark.parametrize(
    ("elements", "expected"),
    [
        ("", 1),
        ("a", 1),
        ("ab", 3),
        ("qq", 2),
        ("abc", 13),
    ],
)
def test_ordered_partitions_count(elements: str, expected: int) -> None:
    """Test the number of ordered splittings into nonempty blocks."""
    words = list(ordered_partitions(Bag.of(elements)))
    assert len(words) == expected
    assert len(set(words)) == expected
    for word in words:
        assert all(word)
        assert sum((block for block in word), Bag()) == Bag.of(elements)
