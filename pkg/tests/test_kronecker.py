import math
import random
from fractions import Fraction

import pytest
import sympy

from topogen.kronecker import (
    CoordVector,
    CoveringEstimate,
    is_topological_generator,
    orbit_covering_radius,
    orbit_radius_series,
    parse_basis,
    parse_coords,
    rational_rank,
)

SQRT2 = math.sqrt(2)
PHI = (1 + math.sqrt(5)) / 2


@pytest.mark.parametrize(
    "matrix, rank",
    [([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 3), ([[1, 0], [2, 0]], 1), ([[1, 0], [0, 1], [1, 1]], 2), ([], 0)],
)
def test_rank_examples(matrix, rank):
    assert rational_rank(matrix) == rank


def test_rank_against_sympy():
    rng = random.Random(2)
    for _ in range(100):
        r, c = rng.randint(1, 5), rng.randint(1, 5)
        rows = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(c)] for _ in range(r)]
        if rng.random() < 0.4 and r > 1:
            a, b = rng.sample(range(r), 2)
            rows[a] = [2 * x - y for x, y in zip(rows[b], rows[(b + 1) % r])]
        assert rational_rank(rows) == sympy.Matrix(rows).rank()


class TestGenerator:
    def test_rational(self):
        assert not is_topological_generator(CoordVector(("1",), ((Fraction(1, 3),),)))

    def test_sqrt2(self):
        assert is_topological_generator(CoordVector(("1", "sqrt2"), ((0, 1),)))

    def test_dependent_pair(self):
        assert not is_topological_generator(CoordVector(("1", "sqrt2"), ((0, 1), (1, 1))))

    def test_independent_pair(self):
        assert is_topological_generator(CoordVector(("1", "sqrt2", "sqrt3"), ((0, 1, 0), (0, 0, 1))))

    def test_bad_row(self):
        with pytest.raises(ValueError):
            CoordVector(("1", "sqrt2"), ((0, 1, 2),))


class TestCovering:
    def test_one_third(self):
        assert orbit_covering_radius(Fraction(1, 3), 100) == Fraction(1, 3)

    def test_fixed_point(self):
        assert orbit_covering_radius(Fraction(0), 10) == 1
        assert orbit_covering_radius(0.0, 10) == 1.0

    def test_sqrt2_direct_sort(self):
        pts = sorted((k * SQRT2) % 1 for k in range(1000))
        gap = max(max(b - a for a, b in zip(pts, pts[1:])), 1 - pts[-1] + pts[0])
        r = orbit_covering_radius(SQRT2, 1000)
        assert abs(r - gap) < 1e-9
        assert r < 0.005

    @pytest.mark.parametrize("a", [SQRT2, PHI, Fraction(987, 610), Fraction(1393, 985)])
    def test_monotone_and_small(self, a):
        Ks = [1, 10, 100, 1000, 10_000]
        radii = [float(r) for _, r in orbit_radius_series(a, Ks)]
        assert all(x >= y for x, y in zip(radii, radii[1:]))
        assert radii[-1] < 0.01

    def test_two_dimensional(self):
        est = orbit_covering_radius([SQRT2, math.sqrt(3)], 400, resolution=64)
        assert isinstance(est, CoveringEstimate)
        assert 0 < est.radius < 0.1
        assert est.cell_diameter == pytest.approx(math.sqrt(2) / 64)
        assert not est.coarse

    def test_coarse_flag(self):
        est = orbit_covering_radius([SQRT2, math.sqrt(3)], 20000, resolution=8)
        assert est.coarse

    def test_rejects_empty_orbit(self):
        with pytest.raises(ValueError):
            orbit_covering_radius(SQRT2, 0)


def test_parsers():
    syms, vals = parse_basis("1,sqrt2,pi")
    assert syms == ["1", "sqrt2", "pi"]
    assert vals[1] == pytest.approx(SQRT2) and vals[2] == pytest.approx(math.pi)
    assert parse_coords("0,1;1,1", 2) == [[0, 1], [1, 1]]
    with pytest.raises(ValueError):
        parse_basis("sqrt2,1")
    with pytest.raises(ValueError):
        parse_coords("0,1,2", 2)
