import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from topogen.dyadic import (
    Dyadic,
    SignedDigitRepr,
    combine,
    eval_repr,
    lsb_position,
    normalize,
    parse_dyadic,
)

dyadics = st.builds(normalize, st.integers(-(2**40), 2**40), st.integers(0, 40))


@pytest.mark.parametrize(
    "num, scale, expected",
    [((6, 2), None, (3, 1)), ((0, 5), None, (0, 0)), ((7, 3), None, (7, 3))],
)
def test_normalize_examples(num, scale, expected):
    d = normalize(*num)
    assert (d.num, d.scale) == expected


def test_noncanonical_construction_rejected():
    with pytest.raises(ValueError):
        Dyadic(6, 2)
    with pytest.raises(ValueError):
        Dyadic(0, 3)


@given(st.integers(-(2**60), 2**60), st.integers(0, 60))
def test_normalize_canonical_and_exact(num, scale):
    d = normalize(num, scale)
    assert d.to_fraction() == Fraction(num, 2**scale)
    assert d.scale == 0 or d.num % 2 == 1
    assert d == Dyadic.from_fraction(Fraction(num, 2**scale))


def test_combine_examples():
    assert combine(2, parse_dyadic("3/4"), -1, parse_dyadic("1/2")) == Dyadic(1)
    assert combine(5, parse_dyadic("3/2"), -7, parse_dyadic("17/16")) == parse_dyadic("1/16")
    assert combine(0, parse_dyadic("5/2^9"), 0, parse_dyadic("-3")) == Dyadic(0)


@given(dyadics, dyadics, dyadics)
def test_addition_laws(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x + y == y + x
    assert combine(1, x, 1, -x) == Dyadic(0)
    assert (x + y).to_fraction() == x.to_fraction() + y.to_fraction()


@given(st.integers(-50, 50), dyadics, st.integers(-50, 50), dyadics)
def test_combine_matches_fractions(u, x, v, y):
    assert combine(u, x, v, y).to_fraction() == u * x.to_fraction() + v * y.to_fraction()


def test_eval_repr_examples():
    assert eval_repr(SignedDigitRepr({0: 1, 2: -1})) == parse_dyadic("3/4")
    assert eval_repr(SignedDigitRepr()) == Dyadic(0)
    assert eval_repr(SignedDigitRepr({1: 1, 2: 1})) == parse_dyadic("3/4")
    assert eval_repr({-3: 1, 1: -1}) == parse_dyadic("15/2")


def test_signed_digit_repr_drops_zeros_and_rejects_big_digits():
    r = SignedDigitRepr({0: 1, 1: 0, 5: -1})
    assert dict(r) == {0: 1, 5: -1}
    with pytest.raises(ValueError):
        SignedDigitRepr({2: 2})


@pytest.mark.parametrize("text, expected", [("3/8", 3), ("5", 0), ("1/2", 1), ("4", -2), ("-12", -2)])
def test_lsb_position_examples(text, expected):
    assert lsb_position(parse_dyadic(text)) == expected


def test_lsb_position_rejects_zero():
    with pytest.raises(ValueError):
        lsb_position(Dyadic(0))


def _all_reprs(lo, hi):
    """value -> list of digit maps, over every {-1,0,1} vector on positions lo..hi."""
    table = {}
    positions = range(lo, hi + 1)
    for digits in itertools.product((-1, 0, 1), repeat=len(positions)):
        rep = {p: a for p, a in zip(positions, digits) if a}
        table.setdefault(eval_repr(rep), []).append(rep)
    return table


def test_lsb_position_forced_digit_brute_force():
    table = _all_reprs(-3, 6)
    rng = random.Random(11)
    values = [v for v in table if v.num != 0]
    for x in rng.choices(values, k=1000):
        lsb = lsb_position(x)
        for rep in table[x]:
            assert lsb in rep
            assert max(rep) == lsb


@pytest.mark.parametrize(
    "text, num, scale",
    [("3/2", 3, 1), ("-9/2^4", -9, 4), ("17/16", 17, 4), ("6/4", 3, 1), ("0", 0, 0), ("-7", -7, 0)],
)
def test_parse(text, num, scale):
    d = parse_dyadic(text)
    assert (d.num, d.scale) == (num, scale)


@pytest.mark.parametrize("bad", ["1/3", "x", "1/2^", "3/0"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_dyadic(bad)


@given(dyadics)
def test_text_round_trip(x):
    assert parse_dyadic(str(x)) == x


def test_to_decimal():
    assert parse_dyadic("-9/2^4").to_decimal() == "-0.5625"
    assert Dyadic(3).to_decimal() == "3"


def test_ordering():
    assert parse_dyadic("1/4") < parse_dyadic("1/2") <= Dyadic(1)
    assert abs(parse_dyadic("-3/8")) == parse_dyadic("3/8")
    assert parse_dyadic("3/2") * parse_dyadic("1/2") == parse_dyadic("3/4")
