"""Dense simplex solver and the transport LPs used as optimality oracle.

``simplex_solve`` minimizes ``c @ x`` subject to ``A @ x = b, x >= 0`` with
a two-phase tableau method and Bland's rule.  Artificial columns are kept in
the tableau for the whole run: their block is the current basis inverse,
from which the duals ``y = c_B B^{-1}`` are read.  A row that stays covered
by an artificial after phase one is linearly dependent on the others; the
artificial then sits in the basis at level zero and never moves.

Transport LPs are posed in the variables ``P_ij`` (plus one slack per row
for the supermartingale constraint) with rows

* ``sum_j P_ij = mu_i``                      (dual ``phi_i``)
* ``sum_i P_ij = nu_j``                      (dual ``psi_j``)
* ``sum_j P_ij (y_j - x_i) [+ s_i] = 0``     (dual ``h_i``)

For maximization the certificate satisfies
``phi_i + psi_j + h_i (y_j - x_i) >= f_ij`` with ``h >= 0`` under the
inequality constraint; for minimization every inequality flips.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .coupling import Coupling
from .errors import SolverError
from .measure import DiscreteMeasure
from .numeric import Scalar, as_float
from .report import CheckReport

DRIFT_LEQ_ZERO = "drift_leq_zero"
DRIFT_EQ_ZERO = "drift_eq_zero"
UNCONSTRAINED = "none"
CONSTRAINT_KINDS = (DRIFT_LEQ_ZERO, DRIFT_EQ_ZERO, UNCONSTRAINED)

_SENSES = {"max": "max", "maximize": "max", "min": "min", "minimize": "min"}

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    value: float | None = None
    basis: list[int] = field(default_factory=list)
    reduced_costs: np.ndarray | None = None
    iterations: int = 0


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T: np.ndarray, basis: list[int], allowed: int, eps: float, max_iter: int) -> tuple[str, int]:
    """Bland-rule iterations on a tableau whose last row holds reduced costs."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        obj = T[m, :allowed]
        entering = np.flatnonzero(obj < -eps)
        if entering.size == 0:
            return OPTIMAL, it
        c = int(entering[0])
        col = T[:m, c]
        rows = np.flatnonzero(col > eps)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + eps * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, c)
        basis[r] = c
    raise SolverError(f"simplex did not terminate within {max_iter} pivots")


def simplex_solve(A, b, c, eps: float = 1e-9, max_iter: int | None = None) -> SimplexResult:
    """Minimize ``c @ x`` over ``A @ x = b, x >= 0``."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    # columns: n real, m artificial, rhs
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))
    _, it1 = _run(T, basis, n, eps, max_iter)
    scale = 1.0 + np.abs(b).sum()
    if -T[m, -1] > eps * scale * 10:
        return SimplexResult(INFEASIBLE, iterations=it1)
    # drive artificials out of the basis where a real column can replace them
    for r in range(m):
        if basis[r] >= n:
            cand = np.flatnonzero(np.abs(T[r, :n]) > eps)
            if cand.size:
                _pivot(T, r, int(cand[0]))
                basis[r] = int(cand[0])
    # phase two cost row: c_j - c_B B^{-1} A_j
    cost = np.concatenate([c, np.zeros(m)])
    T[m, :-1] = cost
    T[m, -1] = 0.0
    for r, j in enumerate(basis):
        if cost[j] != 0.0:
            T[m] -= cost[j] * T[r]
    status, it2 = _run(T, basis, n, eps, max_iter)
    if status != OPTIMAL:
        return SimplexResult(status, iterations=it1 + it2)
    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    x = x[:n]
    x[np.abs(x) <= eps] = 0.0
    binv = T[:m, n:n + m]
    y = cost[basis] @ binv
    y = y * sign
    return SimplexResult(
        OPTIMAL,
        x=x,
        y=y,
        value=float(c @ x),
        basis=list(basis),
        reduced_costs=T[m, :n].copy(),
        iterations=it1 + it2,
    )


@dataclass
class TransportLp:
    xs: Sequence[Scalar]
    ys: Sequence[Scalar]
    mu_w: np.ndarray
    nu_w: np.ndarray
    reward: np.ndarray
    constraint_kind: str = DRIFT_LEQ_ZERO
    sense: str = "max"

    def __post_init__(self):
        if self.constraint_kind not in CONSTRAINT_KINDS:
            raise ValueError(f"unknown constraint kind {self.constraint_kind!r}")
        if self.sense not in _SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")
        self.sense = _SENSES[self.sense]
        self.mu_w = np.asarray(self.mu_w, dtype=float)
        self.nu_w = np.asarray(self.nu_w, dtype=float)
        self.reward = np.asarray(self.reward, dtype=float)
        if self.reward.shape != (len(self.xs), len(self.ys)):
            raise ValueError("reward matrix shape does not match the grids")
        if not np.all(np.isfinite(self.reward)):
            raise ValueError("reward must be finite on the grid")

    @classmethod
    def from_measures(
        cls,
        mu: DiscreteMeasure,
        nu: DiscreteMeasure,
        f: Callable[[float, float], float],
        constraint_kind: str = DRIFT_LEQ_ZERO,
        sense: str = "max",
    ) -> "TransportLp":
        xs, ys = mu.xs, nu.xs
        reward = np.array([[f(as_float(x), as_float(y)) for y in ys] for x in xs], dtype=float)
        return cls(xs, ys, [as_float(w) for w in mu.ws], [as_float(w) for w in nu.ws],
                   reward, constraint_kind, sense)

    @property
    def displacement(self) -> np.ndarray:
        x = np.array([as_float(v) for v in self.xs])
        y = np.array([as_float(v) for v in self.ys])
        return y[None, :] - x[:, None]

    def objective(self, plan: np.ndarray) -> float:
        return float((self.reward * plan).sum())


@dataclass(frozen=True)
class DualCertificate:
    phi: np.ndarray
    psi: np.ndarray
    h: np.ndarray

    def value(self, lp: TransportLp) -> float:
        return float(self.phi @ lp.mu_w + self.psi @ lp.nu_w)

    def slack(self, lp: TransportLp) -> np.ndarray:
        """``phi_i + psi_j + h_i (y_j - x_i) - f_ij``; nonnegative for a maximization certificate."""
        return self.phi[:, None] + self.psi[None, :] + self.h[:, None] * lp.displacement - lp.reward


@dataclass
class LpSolution:
    status: str
    plan: Coupling | None = None
    matrix: np.ndarray | None = None
    value: float | None = None
    dual: DualCertificate | None = None
    uniqueness_hint: bool = False
    iterations: int = 0


def _build(lp: TransportLp):
    nx, ny = len(lp.xs), len(lp.ys)
    nv = nx * ny
    drift_rows = lp.constraint_kind != UNCONSTRAINED
    slacks = lp.constraint_kind == DRIFT_LEQ_ZERO
    m = nx + ny + (nx if drift_rows else 0)
    n = nv + (nx if slacks else 0)
    A = np.zeros((m, n))
    d = lp.displacement
    for i in range(nx):
        A[i, i * ny:(i + 1) * ny] = 1.0
    for j in range(ny):
        A[nx + j, j:nv:ny] = 1.0
    if drift_rows:
        for i in range(nx):
            A[nx + ny + i, i * ny:(i + 1) * ny] = d[i]
            if slacks:
                A[nx + ny + i, nv + i] = 1.0
    b = np.concatenate([lp.mu_w, lp.nu_w, np.zeros(nx if drift_rows else 0)])
    f = lp.reward.reshape(-1)
    c = np.concatenate([-f if lp.sense == "max" else f, np.zeros(nx if slacks else 0)])
    return A, b, c


def _center_drift_multiplier(lp: TransportLp, phi, psi, h):
    """Shift along ``(phi + b x, psi - b y, h + b)`` so that ``h`` has zero mu-mean.

    With equality drift rows the dual optimum is only defined up to this
    direction; it leaves every dual constraint and, for equal barycenters,
    the dual objective unchanged.
    """
    x = np.array([as_float(v) for v in lp.xs])
    y = np.array([as_float(v) for v in lp.ys])
    b = -float(lp.mu_w @ h) / float(lp.mu_w.sum())
    return phi + b * x, psi - b * y, h + b


def solve_transport(lp: TransportLp, eps: float = 1e-9) -> LpSolution:
    nx, ny = len(lp.xs), len(lp.ys)
    if abs(lp.mu_w.sum() - lp.nu_w.sum()) > eps * max(1.0, lp.mu_w.sum()) * 10:
        return LpSolution(INFEASIBLE)
    A, b, c = _build(lp)
    res = simplex_solve(A, b, c, eps)
    if res.status != OPTIMAL:
        return LpSolution(res.status, iterations=res.iterations)
    P = res.x[: nx * ny].reshape(nx, ny)
    y = res.y if lp.sense == "min" else -res.y
    phi, psi = y[:nx], y[nx:nx + ny]
    h = y[nx + ny:] if lp.constraint_kind != UNCONSTRAINED else np.zeros(nx)
    if lp.constraint_kind == DRIFT_EQ_ZERO:
        phi, psi, h = _center_drift_multiplier(lp, phi, psi, h)
    nonbasic = np.setdiff1d(np.arange(A.shape[1]), res.basis)
    unique = not np.any(np.abs(res.reduced_costs[nonbasic]) <= eps)
    plan = Coupling(
        (x, DiscreteMeasure((lp.ys[j], float(P[i, j])) for j in range(ny) if P[i, j] > 0))
        for i, x in enumerate(lp.xs)
    )
    return LpSolution(OPTIMAL, plan, P, lp.objective(P), DualCertificate(phi, psi, h), bool(unique), res.iterations)


def plan_matrix(lp: TransportLp, plan: Coupling) -> np.ndarray:
    """Dense ``P_ij`` for ``plan`` on the grids of ``lp``; mass off the grid raises ``ValueError``."""
    P = np.zeros((len(lp.xs), len(lp.ys)))
    xi = {as_float(x): i for i, x in enumerate(lp.xs)}
    yj = {as_float(y): j for j, y in enumerate(lp.ys)}
    for x, y, w in plan.entries():
        try:
            P[xi[as_float(x)], yj[as_float(y)]] += as_float(w)
        except KeyError:
            raise ValueError(f"plan charges ({x}, {y}), which is off the LP grid") from None
    return P


def verify_certificate(lp: TransportLp, plan, dual: DualCertificate, eps: float = 1e-9, sigma=None) -> CheckReport:
    """Primal and dual feasibility, zero duality gap and complementary slackness.

    ``plan`` is a ``Coupling`` or a dense matrix.  ``sigma`` is an optional
    predicate ``(x, y) -> bool``; when given, the dual inequality is also
    evaluated on those cells only and reported separately.  The report
    always carries the tight set ``gamma`` and the binding set ``m0``.
    """
    P = plan if isinstance(plan, np.ndarray) else plan_matrix(lp, plan)
    sgn = 1.0 if lp.sense == "max" else -1.0
    d = lp.displacement
    scale = 1.0 + float(np.abs(lp.reward).max(initial=0.0))
    tol = eps * scale
    problems = []

    if P.min(initial=0.0) < -eps:
        problems.append(("primal", "negative cell mass"))
    if np.abs(P.sum(axis=1) - lp.mu_w).max(initial=0.0) > eps:
        problems.append(("primal", "row sums differ from mu"))
    if np.abs(P.sum(axis=0) - lp.nu_w).max(initial=0.0) > eps:
        problems.append(("primal", "column sums differ from nu"))
    drifts = (P * d).sum(axis=1)
    if lp.constraint_kind == DRIFT_LEQ_ZERO and drifts.max(initial=0.0) > eps * 10:
        problems.append(("primal", "upward drift"))
    if lp.constraint_kind == DRIFT_EQ_ZERO and np.abs(drifts).max(initial=0.0) > eps * 10:
        problems.append(("primal", "nonzero drift"))

    slack = sgn * dual.slack(lp)
    grid_ok = bool(slack.min(initial=0.0) >= -tol)
    if not grid_ok:
        i, j = np.unravel_index(int(np.argmin(slack)), slack.shape)
        problems.append(("dual", f"inequality fails at ({lp.xs[i]}, {lp.ys[j]}) by {-slack[i, j]:.3g}"))
    h_eff = sgn * dual.h
    if lp.constraint_kind == DRIFT_LEQ_ZERO and h_eff.min(initial=0.0) < -tol:
        problems.append(("dual", "drift multiplier has the wrong sign"))
    if lp.constraint_kind == UNCONSTRAINED and np.abs(dual.h).max(initial=0.0) > tol:
        problems.append(("dual", "drift multiplier must vanish without a drift constraint"))

    primal = lp.objective(P)
    dual_value = dual.value(lp)
    gap = abs(primal - dual_value)
    if gap > eps * (1 + abs(primal)):
        problems.append(("gap", f"primal {primal!r} vs dual {dual_value!r}"))

    cs_cells = np.abs(P * slack).sum()
    cs_rows = np.abs(h_eff * drifts).sum() if lp.constraint_kind == DRIFT_LEQ_ZERO else 0.0
    if cs_cells + cs_rows > eps * (1 + abs(primal)) * 10:
        problems.append(("slackness", f"complementary slackness residual {cs_cells + cs_rows:.3g}"))

    tight = np.abs(slack) <= tol * 10
    gamma = [(lp.xs[i], lp.ys[j]) for i, j in zip(*np.nonzero(tight))]
    m0 = [lp.xs[i] for i in np.flatnonzero(h_eff > tol)] if lp.constraint_kind == DRIFT_LEQ_ZERO else []
    extra = {
        "primal": primal,
        "dual": dual_value,
        "gap": gap,
        "grid_inequality": grid_ok,
        "gamma": gamma,
        "m0": m0,
    }
    if sigma is not None:
        mask = np.array([[bool(sigma(x, y)) for y in lp.ys] for x in lp.xs])
        extra["sigma_inequality"] = bool(np.all(slack[mask] >= -tol))
    if problems:
        kind, detail = problems[0]
        return CheckReport(False, "certificate", kind, detail, extra)
    return CheckReport(True, "certificate", extra=extra)
