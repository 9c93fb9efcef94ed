"""Shadows of atomic measures in the convex-decreasing order.

The shadow of ``k * delta_x`` in ``nu`` is a quantile slice of ``nu``: with
``G`` the left-continuous quantile function of ``nu`` and
``theta_s = Leb|[s, s+k] o G^{-1}``, the map ``s -> k * bary(theta_s)`` is
``F(s) = M(s + k) - M(s)`` where ``M(t) = int_0^t G``.  ``M`` is piecewise
linear with kinks at the cumulative masses of ``nu``, so ``F`` is
nondecreasing and piecewise linear with kinks at ``C_j`` and ``C_j - k``.
The shadow is ``theta_{s*}`` for the largest ``s*`` with ``F(s*) <= k x``,
found by a breakpoint scan followed by one linear solve.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ShadowInfeasible
from .measure import DiscreteMeasure, Interval, leq_pcd, quantile, subtract
from .numeric import Scalar, is_exact, isclose, le, lt


@dataclass(frozen=True)
class ShadowResult:
    shadow: DiscreteMeasure
    s_star: Scalar
    # shadow lives on [lo, hi] and agrees with nu on the open interval (lo, hi)
    window: Interval


class _QuantileSlices:
    """Cumulative bookkeeping for slices ``(s, s + k]`` of ``nu``."""

    def __init__(self, nu: DiscreteMeasure):
        self.nu = nu
        self.cum = [Fraction(0)]
        self.moment = [Fraction(0)]
        for x, w in nu:
            self.cum.append(self.cum[-1] + w)
            self.moment.append(self.moment[-1] + x * w)
        self.total = self.cum[-1]

    def integral(self, t: Scalar) -> Scalar:
        """``M(t) = int_0^t G``."""
        if t <= 0:
            return 0 * t
        cum = self.cum
        j = bisect_left(cum, t, 1)
        if j == len(cum):
            return self.moment[-1]
        return self.moment[j - 1] + self.nu.atoms[j - 1][0] * (t - cum[j - 1])

    def slice_moment(self, s: Scalar, k: Scalar) -> Scalar:
        return self.integral(s + k) - self.integral(s)

    def slice(self, s: Scalar, k: Scalar) -> DiscreteMeasure:
        out = []
        hi = s + k
        for j, (x, _) in enumerate(self.nu.atoms):
            overlap = min(self.cum[j + 1], hi) - max(self.cum[j], s)
            if overlap > 0:
                out.append((x, overlap))
        return DiscreteMeasure(out)


def shadow_dirac(x: Scalar, k: Scalar, nu: DiscreteMeasure) -> ShadowResult:
    """Shadow of ``k * delta_x`` in ``nu``."""
    if k < 0:
        raise ValueError(f"negative mass {k}")
    if k == 0 or isclose(k, 0):
        return ShadowResult(DiscreteMeasure(), 0 * k, Interval(x, x, True, True))
    qs = _QuantileSlices(nu)
    total = qs.total
    if lt(total, k):
        raise ShadowInfeasible(f"mass {k} exceeds available mass {total}", slack=None)
    if k > total:
        k = total
    target = k * x
    f0 = qs.slice_moment(0 * k, k)
    if lt(target, f0):
        raise ShadowInfeasible(
            f"leftmost slice of mass {k} has barycenter {f0 / k} > {x}", slack=f0 / k - x
        )
    top = total - k
    pts = {0 * k, top}
    for c in qs.cum[1:-1]:
        if 0 < c < top:
            pts.add(c)
        if 0 < c - k < top:
            pts.add(c - k)
    breaks = sorted(pts)
    values = [qs.slice_moment(b, k) for b in breaks]
    last = max(i for i, v in enumerate(values) if le(v, target))
    if last == len(breaks) - 1:
        s_star = top
    else:
        b0, b1 = breaks[last], breaks[last + 1]
        v0, v1 = values[last], values[last + 1]
        s_star = b0 + (target - v0) * (b1 - b0) / (v1 - v0)
        if not is_exact(s_star):
            s_star = min(max(s_star, b0), b1)
    theta = qs.slice(s_star, k)
    a = quantile(nu, s_star)
    b = quantile(nu, s_star + k)
    if b < x:
        # nu has no mass right of b; report the window as [a, x]
        b = x
    return ShadowResult(theta, s_star, Interval(a, b, True, True))


def shadow(mu: DiscreteMeasure, nu: DiscreteMeasure, order: Sequence[int] | None = None) -> DiscreteMeasure:
    """Shadow of ``mu`` in ``nu``, built atom by atom.

    Atoms are processed by increasing location unless ``order`` (a
    permutation of atom indices) is given; the result does not depend on it.
    """
    if not leq_pcd(mu, nu):
        raise ShadowInfeasible("mu is not dominated by nu in the positive-convex-decreasing order")
    atoms = mu.atoms
    idx = range(len(atoms)) if order is None else order
    remainder = nu
    pieces = []
    for i in idx:
        x, w = atoms[i]
        res = shadow_dirac(x, w, remainder)
        pieces.extend(res.shadow)
        remainder = subtract(remainder, res.shadow)
    return DiscreteMeasure(pieces)
