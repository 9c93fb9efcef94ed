import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import MU_STAR, NU_STAR, random_cd_pair
from oracles import put_from_cdf, w1_from_cdf
from smot.errors import MassMismatch, NegativeMass, OutOfRange
from smot.measure import (
    DiscreteMeasure,
    Interval,
    barycenter,
    leq_convex,
    leq_convex_decreasing,
    leq_pcd,
    minimum,
    potential_u,
    put_value,
    put_violation,
    quantile,
    restrict,
    subtract,
    wasserstein1,
)

ZERO = DiscreteMeasure()

atoms = st.lists(
    st.tuples(st.fractions(min_value=-6, max_value=6, max_denominator=4),
              st.fractions(min_value=F(1, 8), max_value=3, max_denominator=8)),
    min_size=1, max_size=6,
)
measures = atoms.map(DiscreteMeasure)


def normalized(m: DiscreteMeasure, total=1) -> DiscreteMeasure:
    return m.scale(F(total) / m.mass)


unit_measures = measures.map(normalized)
points = st.fractions(min_value=-8, max_value=8, max_denominator=6)
cd_pairs = st.integers(0, 10**6).map(lambda s: random_cd_pair(random.Random(s), 5, 6))


# -- construction -----------------------------------------------------------

def test_atoms_are_sorted_merged_and_zero_dropped():
    m = DiscreteMeasure([(2, F(1, 4)), (0, F(1, 4)), (2, F(1, 4)), (5, 0)])
    assert m.atoms == ((0, F(1, 4)), (2, F(1, 2)))


def test_negative_mass_rejected():
    with pytest.raises(NegativeMass):
        DiscreteMeasure([(0, F(-1, 3))])


def test_float_atoms_closer_than_tolerance_merge():
    m = DiscreteMeasure([(0.1 + 0.2, 0.5), (0.3, 0.5)])
    assert len(m) == 1 and m.mass == pytest.approx(1.0)


# -- put function, potential, quantile, barycenter ---------------------------

def test_put_value_examples():
    assert put_value(MU_STAR, 0) == F(1, 3)
    assert put_value(ZERO, 5) == 0
    assert put_value(NU_STAR, 0) == F(13, 6)


def test_potential_examples():
    assert potential_u(DiscreteMeasure.dirac(0), 3) == 3
    assert potential_u(MU_STAR, 0) == F(2, 3)
    t = 1
    via_put = 2 * put_value(MU_STAR, t) - t * MU_STAR.mass + MU_STAR.first_moment
    # direct sum: (|1+1| + |1-0| + |1-1|) / 3
    assert potential_u(MU_STAR, t) == via_put == 1


def test_quantile_examples():
    assert quantile(NU_STAR, F(1, 3)) == -4
    assert quantile(NU_STAR, F(2, 5)) == F(-5, 2)
    assert quantile(NU_STAR, 1) == 2
    assert quantile(NU_STAR, 0) == -4
    with pytest.raises(OutOfRange):
        quantile(NU_STAR, F(4, 3))


def test_barycenter_examples():
    assert barycenter(NU_STAR) == F(-3, 2)
    assert barycenter(DiscreteMeasure.dirac(F(7, 2), 5)) == F(7, 2)
    assert barycenter(MU_STAR) == 0
    assert barycenter(ZERO) == 0


@given(measures, points)
def test_put_matches_cdf_integral(m, t):
    assert put_value(m, t) == put_from_cdf(list(m), t)


@given(measures, points, points, points)
def test_put_is_convex_and_increasing(m, a, b, c):
    t1, t2, t3 = sorted({a, b, c}) if len({a, b, c}) == 3 else (F(-1), F(0), F(1))
    p1, p2, p3 = (put_value(m, t) for t in (t1, t2, t3))
    s12 = (p2 - p1) / (t2 - t1)
    s23 = (p3 - p2) / (t3 - t2)
    assert 0 <= s12 <= s23


@given(measures, points)
def test_put_derivative_jump_is_atom_mass(m, t):
    h = F(1, 10**6)  # smaller than any atom spacing produced by the strategy
    right = (put_value(m, t + h) - put_value(m, t)) / h
    left = (put_value(m, t) - put_value(m, t - h)) / h
    assert right - left == m.mass_at(t)


# -- orders -------------------------------------------------------------------

def test_order_examples():
    assert leq_convex_decreasing(DiscreteMeasure.dirac(1, F(1, 3)), NU_STAR) is False  # masses differ
    assert leq_pcd(DiscreteMeasure.dirac(1, F(1, 3)), NU_STAR)
    assert leq_convex_decreasing(ZERO, ZERO)
    assert not leq_convex_decreasing(DiscreteMeasure.dirac(0, 2), DiscreteMeasure.dirac(0))
    assert leq_convex_decreasing(MU_STAR, NU_STAR)
    assert leq_convex_decreasing(MU_STAR, MU_STAR)
    assert not leq_convex_decreasing(NU_STAR, MU_STAR)
    half = DiscreteMeasure.dirac(0, F(1, 2))
    spread = DiscreteMeasure([(-1, F(1, 4)), (1, F(1, 4))])
    assert leq_convex(half, spread)
    assert not leq_convex(MU_STAR, NU_STAR)
    assert not leq_convex(DiscreteMeasure.dirac(0), DiscreteMeasure.dirac(1))


def test_put_violation_reports_witness():
    where = put_violation(NU_STAR, MU_STAR)
    assert where is not None
    t = where[0] if isinstance(where, tuple) else where
    assert put_value(NU_STAR, t) > put_value(MU_STAR, t)
    assert put_violation(MU_STAR, NU_STAR) is None


def _order_oracle(a, b) -> bool:
    """Put domination on a refined grid through the cdf integral, plus mass and barycenter."""
    if a.mass != b.mass:
        return False
    grid = sorted({x for x, _ in a} | {x for x, _ in b})
    fine = grid + [(u + v) / 2 for u, v in zip(grid, grid[1:])] + [grid[-1] + 1]
    ok = all(put_from_cdf(list(a), t) <= put_from_cdf(list(b), t) for t in fine)
    return ok and barycenter(a) >= barycenter(b)


@given(unit_measures, unit_measures)
def test_cd_order_matches_oracle(a, b):
    assert leq_convex_decreasing(a, b) == _order_oracle(a, b)


@given(cd_pairs)
def test_generated_pairs_are_ordered(pair):
    mu, nu = pair
    assert leq_convex_decreasing(mu, nu)
    assert _order_oracle(mu, nu)


@given(unit_measures, unit_measures)
def test_cd_order_antisymmetric(a, b):
    if leq_convex_decreasing(a, b) and leq_convex_decreasing(b, a):
        assert a == b


@given(unit_measures, unit_measures)
def test_pcd_equals_cd_for_equal_mass(a, b):
    assert leq_pcd(a, b) == leq_convex_decreasing(a, b)


@given(unit_measures, unit_measures)
def test_convex_order_implies_cd_order(a, b):
    if leq_convex(a, b):
        assert leq_convex_decreasing(a, b)


@given(measures, measures)
def test_pcd_requires_mass_inequality(a, b):
    if leq_pcd(a, b):
        assert a.mass <= b.mass


# -- Wasserstein --------------------------------------------------------------

def test_wasserstein_examples():
    assert wasserstein1(DiscreteMeasure.dirac(0), DiscreteMeasure.dirac(1)) == 1
    assert wasserstein1(MU_STAR, MU_STAR) == 0
    assert wasserstein1(DiscreteMeasure.uniform([0, 1]), DiscreteMeasure.uniform([0, 2])) == F(1, 2)
    with pytest.raises(MassMismatch):
        wasserstein1(DiscreteMeasure.dirac(0), DiscreteMeasure.dirac(0, 2))


@given(unit_measures, unit_measures)
def test_wasserstein_matches_cdf_formula(a, b):
    assert wasserstein1(a, b) == w1_from_cdf(list(a), list(b))


@settings(max_examples=60)
@given(unit_measures, unit_measures, unit_measures)
def test_wasserstein_is_a_metric(a, b, c):
    assert wasserstein1(a, b) == wasserstein1(b, a)
    assert (wasserstein1(a, b) == 0) == (a == b)
    assert wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c)


# -- set operations -----------------------------------------------------------

def test_restrict_minimum_subtract_examples():
    assert restrict(MU_STAR, Interval(hi=0, hi_closed=True)) == DiscreteMeasure([(-1, F(1, 3)), (0, F(1, 3))])
    assert minimum(MU_STAR, NU_STAR).is_zero()
    assert subtract(NU_STAR, DiscreteMeasure.dirac(-4, F(1, 3))) == DiscreteMeasure([(F(-5, 2), F(1, 3)), (2, F(1, 3))])
    with pytest.raises(NegativeMass):
        subtract(MU_STAR, NU_STAR)


def test_subtract_clamps_float_noise():
    a = DiscreteMeasure([(0.0, 0.3)])
    b = DiscreteMeasure([(0.0, 0.1 + 0.2)])
    assert subtract(a, b).is_zero()


@given(measures, measures)
def test_add_then_subtract_round_trips(a, b):
    assert (a + b) - b == a


def test_interval_contains():
    iv = Interval(0, 2, lo_closed=False, hi_closed=True)
    assert not iv.contains(0) and iv.contains(1) and iv.contains(2) and not iv.contains(3)
    assert Interval().contains(10**9)
