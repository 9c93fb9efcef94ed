import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import MU_STAR, NU_STAR, random_cd_pair
from oracles import enumerate_vertices, transport_standard_form, vertex_count_bound
from smot.coupling import Coupling
from smot.geometry import exp_product
from smot.lp import (
    DRIFT_EQ_ZERO,
    DRIFT_LEQ_ZERO,
    UNCONSTRAINED,
    DualCertificate,
    TransportLp,
    plan_matrix,
    simplex_solve,
    solve_transport,
    verify_certificate,
)
from smot.measure import DiscreteMeasure, barycenter
from smot.structure import decompose

seeds = st.integers(0, 10**6)
KINDS = (DRIFT_LEQ_ZERO, DRIFT_EQ_ZERO, UNCONSTRAINED)


# -- raw simplex --------------------------------------------------------------

def test_one_variable_bound():
    # max x s.t. x + s = 1  ->  min -x
    res = simplex_solve([[1.0, 1.0]], [1.0], [-1.0, 0.0])
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(1.0)
    assert res.y[0] == pytest.approx(-1.0)  # dual of the bound, sign per minimization


def test_infeasible_and_unbounded():
    assert simplex_solve([[1.0, 1.0]], [-1.0], [0.0, 0.0]).status == "infeasible"
    assert simplex_solve([[1.0, -1.0]], [0.0], [-1.0, 0.0]).status == "unbounded"


def test_degenerate_cycling_example_terminates():
    # the classic instance on which the largest-coefficient rule cycles
    A = [[0.25, -60, -0.04, 9, 1, 0, 0],
         [0.5, -90, -0.02, 3, 0, 1, 0],
         [0, 0, 1, 0, 0, 0, 1]]
    b = [0, 0, 1]
    c = [-0.75, 150, -0.02, 6, 0, 0, 0]
    res = simplex_solve(A, b, c)
    assert res.status == "optimal"
    assert res.value == pytest.approx(-0.05)


def test_redundant_equality_rows():
    A = [[1, 1, 0], [1, 1, 0], [0, 1, 1]]
    res = simplex_solve(A, [1, 1, 1], [1, 2, 0])
    assert res.status == "optimal" and res.value == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_simplex_matches_vertex_enumeration_on_random_lps(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 4), rng.integers(3, 7)
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    x0 = rng.integers(0, 3, size=n).astype(float)
    b = A @ x0  # feasible by construction
    c = rng.integers(0, 5, size=n).astype(float)  # nonnegative cost keeps it bounded
    res = simplex_solve(A, b, c)
    best = enumerate_vertices(A, b, c)
    assert res.status == "optimal"
    assert res.value == pytest.approx(best[0], abs=1e-8)


# -- transport LP -------------------------------------------------------------

def test_transport_2x2_identity_reward():
    lp = TransportLp([0, 1], [0, 1], [0.5, 0.5], [0.5, 0.5], np.eye(2), UNCONSTRAINED)
    sol = solve_transport(lp)
    A, b, c = transport_standard_form(lp.xs, lp.ys, lp.mu_w, lp.nu_w, lp.reward, UNCONSTRAINED, "max")
    assert sol.value == pytest.approx(-enumerate_vertices(A, b, c)[0])
    assert np.allclose(sol.matrix, np.diag([0.5, 0.5]))


def _random_lp(seed, max_x, max_y, kind, sense="max"):
    rng = random.Random(seed)
    # equality drift rows need equal barycenters
    mu, nu = random_cd_pair(rng, max_x, max_y, shift=0.0 if kind == DRIFT_EQ_ZERO else 0.35)
    R = np.random.default_rng(seed).normal(size=(len(mu), len(nu)))
    return TransportLp(mu.xs, nu.xs, [float(w) for w in mu.ws], [float(w) for w in nu.ws], R, kind, sense)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(KINDS), st.sampled_from(["max", "min"]))
def test_transport_matches_vertex_enumeration(seed, kind, sense):
    lp = _random_lp(seed, 4, 4, kind, sense)
    A, b, c = transport_standard_form(lp.xs, lp.ys, lp.mu_w, lp.nu_w, lp.reward, kind, sense)
    if vertex_count_bound(A) > 20000:
        return  # enumeration would be too slow; the instance is skipped, not weakened
    sol = solve_transport(lp)
    best = enumerate_vertices(A, b, c)
    assert sol.status == "optimal" and best is not None
    oracle = -best[0] if sense == "max" else best[0]
    assert sol.value == pytest.approx(oracle, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from(KINDS), st.sampled_from(["max", "min"]))
def test_strong_duality_and_certificate(seed, kind, sense):
    lp = _random_lp(seed, 6, 6, kind, sense)
    sol = solve_transport(lp)
    assert sol.status == "optimal"
    assert abs(sol.value - sol.dual.value(lp)) <= 1e-9 * (1 + abs(sol.value))
    rep = verify_certificate(lp, sol.matrix, sol.dual)
    assert rep.ok, rep.detail
    assert rep.extra["grid_inequality"]
    # every cell carrying mass is tight
    tight = set(rep.extra["gamma"])
    assert all((x, y) in tight for x, y, w in sol.plan.entries() if w > 1e-9)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_values_are_monotone_in_the_constraint(seed):
    base = _random_lp(seed, 5, 6, DRIFT_LEQ_ZERO)
    vals = {}
    for kind in KINDS:
        lp = TransportLp(base.xs, base.ys, base.mu_w, base.nu_w, base.reward, kind)
        sol = solve_transport(lp)
        vals[kind] = sol.value if sol.status == "optimal" else None
    assert vals[DRIFT_LEQ_ZERO] <= vals[UNCONSTRAINED] + 1e-9
    if vals[DRIFT_EQ_ZERO] is not None:
        assert vals[DRIFT_EQ_ZERO] <= vals[DRIFT_LEQ_ZERO] + 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_equal_barycenters_make_constraints_equivalent(seed):
    rng = random.Random(seed)
    mu, _ = random_cd_pair(rng, 4, 5)
    spread = []
    for x, w in mu:
        d = F(rng.randint(0, 3))
        spread += [(x - d, w / 2), (x + d, w / 2)]
    nu = DiscreteMeasure(spread)
    assert barycenter(mu) == barycenter(nu)
    R = np.random.default_rng(seed).normal(size=(len(mu), len(nu)))
    args = (mu.xs, nu.xs, [float(w) for w in mu.ws], [float(w) for w in nu.ws], R)
    sm = solve_transport(TransportLp(*args, DRIFT_LEQ_ZERO))
    mg = solve_transport(TransportLp(*args, DRIFT_EQ_ZERO))
    assert sm.value == pytest.approx(mg.value, abs=1e-9)


def test_infeasible_when_order_fails():
    lp = TransportLp.from_measures(NU_STAR, MU_STAR, exp_product())
    assert solve_transport(lp).status == "infeasible"
    lp = TransportLp([0], [0], [1.0], [2.0], [[0.0]])
    assert solve_transport(lp).status == "infeasible"


def test_certificate_for_first_example_and_tampering():
    lp = TransportLp.from_measures(MU_STAR, NU_STAR, exp_product())
    sol = solve_transport(lp)
    assert verify_certificate(lp, sol.plan, sol.dual).ok
    psi = sol.dual.psi.copy()
    psi[0] += 1.0
    bad = DualCertificate(sol.dual.phi, psi, sol.dual.h)
    rep = verify_certificate(lp, sol.plan, bad)
    assert not rep.ok and rep.violation == "gap"
    assert bad.value(lp) - sol.dual.value(lp) == pytest.approx(lp.nu_w[0])


def test_certificate_rejects_infeasible_primal():
    lp = TransportLp.from_measures(MU_STAR, NU_STAR, exp_product())
    sol = solve_transport(lp)
    P = sol.matrix.copy()
    P[0, 0] += 0.1
    rep = verify_certificate(lp, P, sol.dual)
    assert not rep.ok and rep.violation == "primal"


def test_sigma_restricted_inequality_is_reported():
    lp = TransportLp.from_measures(MU_STAR, NU_STAR, exp_product())
    sol = solve_transport(lp)
    dec = decompose(MU_STAR, NU_STAR)
    rep = verify_certificate(lp, sol.plan, sol.dual, sigma=dec.in_sigma)
    assert rep.extra["sigma_inequality"] is True


def test_martingale_truncation_has_negative_multiplier():
    c = [F(1, 2 ** i) for i in range(1, 7)]
    total = sum(c)
    mu = DiscreteMeasure((i, ci / total) for i, ci in enumerate(c, start=1))
    nu = DiscreteMeasure((i + d, ci / total / 3) for i, ci in enumerate(c, start=1) for d in (-1, 0, 1))
    lp = TransportLp.from_measures(mu, nu, lambda x, y: 0.0 if x == y else 1.0, DRIFT_EQ_ZERO)
    sol = solve_transport(lp)
    assert sol.status == "optimal"
    assert sol.dual.h.min() < 0
    assert verify_certificate(lp, sol.matrix, sol.dual).ok


def test_plan_matrix_rejects_off_grid_mass():
    lp = TransportLp.from_measures(MU_STAR, NU_STAR, exp_product())
    with pytest.raises(ValueError):
        plan_matrix(lp, Coupling.from_entries([(0, 7, 1)]))


def test_transport_lp_validation():
    with pytest.raises(ValueError):
        TransportLp([0], [0], [1.0], [1.0], [[0.0]], "sideways")
    with pytest.raises(ValueError):
        TransportLp([0], [0, 1], [1.0], [0.5, 0.5], [[0.0]])
    with pytest.raises(ValueError):
        TransportLp([0], [0], [1.0], [1.0], [[np.inf]])


def test_uniqueness_hint_on_unique_example():
    lp = TransportLp.from_measures(MU_STAR, NU_STAR, exp_product())
    assert solve_transport(lp).uniqueness_hint
    flat = TransportLp.from_measures(MU_STAR, NU_STAR, lambda x, y: 0.0, UNCONSTRAINED)
    assert not solve_transport(flat).uniqueness_hint
