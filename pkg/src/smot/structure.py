"""Barriers and the irreducible decomposition of a pair ``mu <=_cd nu``.

Everything is driven by the gap ``D = p_nu - p_mu``, which is nonnegative,
zero left of all atoms, linear between consecutive atoms of either measure,
and constant right of the last atom.  Equality of the put functions on a
segment between grid points is therefore decided by ``D`` vanishing at both
endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .coupling import Coupling
from .errors import DecompositionError
from .measure import (
    DiscreteMeasure,
    Interval,
    _grid,
    barycenter,
    leq_convex,
    leq_convex_decreasing,
    measures_close,
    put_on_grid,
    put_value,
    restrict,
    subtract,
)
from .numeric import INF, Scalar, is_zero, isclose, lt
from .report import CheckReport, failed, passed

SUPERMARTINGALE = "supermartingale"
MARTINGALE = "martingale"
IDENTITY = "identity"


@dataclass(frozen=True)
class Component:
    index: int
    I: Interval
    J: Interval
    mu: DiscreteMeasure
    nu: DiscreteMeasure
    kind: str


@dataclass(frozen=True)
class ComponentDecomposition:
    x_star: Scalar
    components: tuple[Component, ...]
    identity: DiscreteMeasure = field(default_factory=DiscreteMeasure)

    @property
    def supermartingale(self) -> Component | None:
        return next((c for c in self.components if c.kind == SUPERMARTINGALE), None)

    @property
    def martingale_components(self) -> list[Component]:
        return [c for c in self.components if c.kind == MARTINGALE]

    def component_of(self, x: Scalar) -> Component | None:
        return next((c for c in self.components if c.kind != IDENTITY and c.I.contains(x)), None)

    def in_sigma(self, x: Scalar, y: Scalar) -> bool:
        return sigma_contains(self, x, y)


def _gap(mu: DiscreteMeasure, nu: DiscreteMeasure, t: Scalar) -> Scalar:
    return put_value(nu, t) - put_value(mu, t)


def _gaps(mu: DiscreteMeasure, nu: DiscreteMeasure, grid) -> list:
    return [pn - pm for pm, pn in zip(put_on_grid(mu, grid), put_on_grid(nu, grid))]


def maximal_barrier(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Scalar:
    """Largest point where the put functions touch; ``+inf`` when they agree at infinity."""
    grid = _grid(mu, nu)
    if not grid:
        return INF
    # the gap vanishes at the first grid point, so ``zeros`` is never empty
    zeros = [t for t, d in zip(grid, _gaps(mu, nu, grid)) if is_zero(d)]
    return INF if zeros[-1] == grid[-1] else zeros[-1]


def _solve_endpoints(a, b, mass, moment):
    """Masses ``(alpha, beta)`` at ``a`` and ``b`` with total ``mass`` and first moment ``moment``."""
    beta = (moment - a * mass) / (b - a)
    return mass - beta, beta


def decompose(mu: DiscreteMeasure, nu: DiscreteMeasure) -> ComponentDecomposition:
    if not leq_convex_decreasing(mu, nu):
        raise DecompositionError("decomposition requires mu <=_cd nu")
    x_star = maximal_barrier(mu, nu)
    grid = [t for t in _grid(mu, nu) if t <= x_star]
    # martingale components: open stretches of {D > 0} strictly left of x*
    spans = []
    last_zero, positive_since = None, False
    for t, d in zip(grid, _gaps(mu, nu, grid)):
        if not is_zero(d):
            positive_since = True
            continue
        if last_zero is not None and positive_since:
            spans.append((last_zero, t))
        last_zero, positive_since = t, False
    components = []
    used_nu = []
    for k, (a, b) in enumerate(spans, start=1):
        inner = Interval(a, b)
        mu_k = restrict(mu, inner)
        nu_inner = restrict(nu, inner)
        alpha, beta = _solve_endpoints(a, b, mu_k.mass - nu_inner.mass, mu_k.first_moment - nu_inner.first_moment)
        if lt(alpha, 0) or lt(beta, 0):
            raise DecompositionError(f"negative endpoint mass on ({a}, {b}): {alpha}, {beta}")
        nu_k = DiscreteMeasure(list(nu_inner) + [(a, alpha), (b, beta)])
        J = Interval(a, b, lo_closed=not is_zero(nu_k.mass_at(a)), hi_closed=not is_zero(nu_k.mass_at(b)))
        components.append(Component(k, inner, J, mu_k, nu_k, MARTINGALE))
        used_nu.append(nu_k)
    if x_star != INF:
        I0 = Interval(x_star, INF)
        mu_0 = restrict(mu, I0)
        if not mu_0.is_zero():
            nu_right = restrict(nu, I0)
            at_star = mu_0.mass - nu_right.mass
            if lt(at_star, 0):
                raise DecompositionError(f"negative mass {at_star} left for the barrier {x_star}")
            nu_0 = DiscreteMeasure(list(nu_right) + [(x_star, at_star)])
            J0 = Interval(x_star, INF, lo_closed=not is_zero(nu_0.mass_at(x_star)))
            components.insert(0, Component(0, I0, J0, mu_0, nu_0, SUPERMARTINGALE))
            used_nu.append(nu_0)
    covered = [c.I for c in components]
    mu_id = DiscreteMeasure((x, w) for x, w in mu if not any(iv.contains(x) for iv in covered))
    nu_id = nu
    for part in used_nu:
        nu_id = subtract(nu_id, part)
    if not measures_close(mu_id, nu_id):
        raise DecompositionError(f"identity parts disagree: {mu_id!r} vs {nu_id!r}")
    if not mu_id.is_zero():
        components.append(Component(-1, Interval(-INF, INF), Interval(-INF, INF), mu_id, nu_id, IDENTITY))
    return ComponentDecomposition(x_star, tuple(components), mu_id)


def sigma_contains(dec: ComponentDecomposition, x: Scalar, y: Scalar) -> bool:
    """Membership in the diagonal or one of the rectangles ``I_k x J_k`` (``k >= 0``)."""
    if isclose(x, y):
        return True
    return any(c.kind != IDENTITY and c.I.contains(x) and c.J.contains(y) for c in dec.components)


def recheck_components(dec: ComponentDecomposition) -> CheckReport:
    """Mass/barycenter bookkeeping and irreducibility of each component."""
    for c in dec.components:
        if c.kind == IDENTITY:
            if not measures_close(c.mu, c.nu):
                return failed("components", c.index, "identity component has different marginals")
            continue
        if c.kind == MARTINGALE and not leq_convex(c.mu, c.nu):
            return failed("components", c.index, "martingale component is not in convex order")
        if c.kind == SUPERMARTINGALE and not leq_convex_decreasing(c.mu, c.nu):
            return failed("components", c.index, "supermartingale component is not in cd order")
        grid = _grid(c.mu, c.nu)
        for t, d in zip(grid, _gaps(c.mu, c.nu, grid)):
            inside = c.I.contains(t)
            touching = is_zero(d)
            if inside == touching:
                return failed("components", (c.index, t), f"component {c.index}: I_k != {{p_mu < p_nu}} at {t}")
        # between grid points the gap is linear, so {D > 0} is open and matches I_k
    return passed("components")


def restricted_drifts(p: Coupling, x_star: Scalar) -> dict:
    """Row drifts of ``p`` restricted to ``{X < x*}``."""
    return {x: barycenter(k) - x for x, k in p.rows if x < x_star}


def support_in_sigma(p: Coupling, dec: ComponentDecomposition) -> CheckReport:
    for x, y in p.support():
        if not sigma_contains(dec, x, y):
            return failed("sigma", (x, y), f"mass at ({x}, {y}) outside the union of component domains")
    return passed("sigma")


def extremal_decomposition_check(
    p: Coupling,
    m_set,
    f: Callable[[float, float], float],
    sense: str = "max",
    eps: float = 1e-8,
) -> CheckReport:
    """Compare each restriction of ``p`` with the LP optimum between its own marginals.

    Rows in ``m_set`` must be an optimal martingale transport, the remaining
    rows an optimal unconstrained transport.
    """
    from .lp import TransportLp, solve_transport

    m_set = set(m_set)
    parts = {
        "martingale": (p.restrict_rows(lambda x: any(isclose(x, m) for m in m_set)), "drift_eq_zero"),
        "unconstrained": (p.restrict_rows(lambda x: not any(isclose(x, m) for m in m_set)), "none"),
    }
    results = {}
    ok = True
    for name, (part, kind) in parts.items():
        if not part.rows:
            results[name] = {"empty": True, "optimal": True}
            continue
        lp = TransportLp.from_measures(part.first_marginal, part.second_marginal, f, kind, sense)
        sol = solve_transport(lp)
        achieved = float(part.integrate(lambda x, y: f(float(x), float(y))))
        gap = abs(achieved - sol.value)
        optimal = sol.status == "optimal" and gap <= eps * (1 + abs(sol.value))
        ok = ok and optimal
        results[name] = {"value": achieved, "optimum": sol.value, "gap": gap, "optimal": optimal}
    if ok:
        return passed("extremal_decomposition", parts=results)
    return failed("extremal_decomposition", None, "a restriction is not optimal", parts=results)
