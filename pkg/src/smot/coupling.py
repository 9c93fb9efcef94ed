"""Transport plans and the two canonical supermartingale couplings."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .errors import NotInConvexDecreasingOrder
from .measure import (
    DiscreteMeasure,
    barycenter,
    leq_convex_decreasing,
    measures_close,
    put_violation,
    subtract,
)
from .numeric import Scalar, isclose, le, tolerance
from .report import CheckReport, failed, passed
from .shadow import shadow_dirac


class Coupling:
    """Sparse joint measure stored row by row: each source atom ``x`` owns a kernel over ``y``.

    Kernels are unnormalized; a row's kernel mass is the first-marginal mass at ``x``.
    """

    __slots__ = ("_rows",)

    def __init__(self, rows: Iterable[tuple[Scalar, DiscreteMeasure]] = ()):
        merged: dict = {}
        for x, kernel in rows:
            key = next((k for k in merged if isclose(k, x)), x)
            merged[key] = merged[key] + kernel if key in merged else kernel
        self._rows = tuple(sorted(((x, k) for x, k in merged.items() if not k.is_zero()), key=lambda r: r[0]))

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[Scalar, Scalar, Scalar]]) -> "Coupling":
        by_x: dict = {}
        for x, y, w in entries:
            by_x.setdefault(x, []).append((y, w))
        return cls((x, DiscreteMeasure(pairs)) for x, pairs in by_x.items())

    @classmethod
    def identity(cls, m: DiscreteMeasure) -> "Coupling":
        return cls((x, DiscreteMeasure.dirac(x, w)) for x, w in m)

    @property
    def rows(self) -> tuple[tuple[Scalar, DiscreteMeasure], ...]:
        return self._rows

    @property
    def first_marginal(self) -> DiscreteMeasure:
        return DiscreteMeasure((x, k.mass) for x, k in self._rows)

    @property
    def second_marginal(self) -> DiscreteMeasure:
        return DiscreteMeasure(atom for _, k in self._rows for atom in k)

    def kernel(self, x: Scalar) -> DiscreteMeasure:
        for xr, k in self._rows:
            if isclose(xr, x):
                return k
        return DiscreteMeasure()

    def entries(self) -> Iterator[tuple[Scalar, Scalar, Scalar]]:
        for x, k in self._rows:
            for y, w in k:
                yield x, y, w

    def mass(self, x: Scalar, y: Scalar) -> Scalar:
        return self.kernel(x).mass_at(y)

    def support(self) -> list[tuple[Scalar, Scalar]]:
        return [(x, y) for x, y, _ in self.entries()]

    def drift(self, x: Scalar) -> Scalar:
        return barycenter(self.kernel(x)) - x

    def integrate(self, f: Callable[[Scalar, Scalar], float]):
        return sum(w * f(x, y) for x, y, w in self.entries())

    def restrict_rows(self, keep: Callable[[Scalar], bool]) -> "Coupling":
        return Coupling((x, k) for x, k in self._rows if keep(x))

    def cumulative_image(self, upto: Scalar, *, from_right: bool = False) -> DiscreteMeasure:
        """Second marginal of the rows with ``x <= upto`` (or ``x >= upto`` from the right)."""
        rows = [k for x, k in self._rows if (x >= upto if from_right else x <= upto)]
        return DiscreteMeasure(atom for k in rows for atom in k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Coupling):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __repr__(self) -> str:
        body = "; ".join(f"{x} -> {k!r}" for x, k in self._rows)
        return f"Coupling({body})"


def couplings_close(p: Coupling, q: Coupling, eps: float | None = None) -> bool:
    """Atomwise equality of two plans up to ``eps`` on every cell mass."""
    xs = sorted({x for x, _ in p.rows} | {x for x, _ in q.rows})
    return all(measures_close(p.kernel(x), q.kernel(x), eps) for x in xs)


def coupling_distance(p: Coupling, q: Coupling) -> Scalar:
    """Largest absolute cell-mass difference between two plans."""
    cells = {(x, y) for x, y in p.support()} | {(x, y) for x, y in q.support()}
    return max((abs(p.mass(x, y) - q.mass(x, y)) for x, y in cells), default=Fraction(0))


def _require_order(mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    if leq_convex_decreasing(mu, nu):
        return
    if not isclose(mu.mass, nu.mass):
        raise NotInConvexDecreasingOrder(f"total masses differ: {mu.mass} vs {nu.mass}")
    witness = put_violation(mu, nu)
    if witness is not None:
        t, pm, pn = witness
        raise NotInConvexDecreasingOrder(f"put functions cross at t={t}: p_mu={pm} > p_nu={pn}", witness)
    raise NotInConvexDecreasingOrder(
        f"barycenter of mu ({barycenter(mu)}) is below barycenter of nu ({barycenter(nu)})"
    )


def _sequential_transport(mu: DiscreteMeasure, nu: DiscreteMeasure, atoms) -> Coupling:
    _require_order(mu, nu)
    remainder = nu
    rows = []
    for x, w in atoms:
        k = min(w, remainder.mass) if isclose(w, remainder.mass) else w
        image = shadow_dirac(x, k, remainder).shadow
        rows.append((x, image))
        remainder = subtract(remainder, image)
    return Coupling(rows)


def increasing_transport(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    """Map the atoms of ``mu`` left to right, each to its shadow in what is left of ``nu``."""
    return _sequential_transport(mu, nu, mu.atoms)


def decreasing_transport(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    """Mirror image of :func:`increasing_transport`: atoms are processed right to left."""
    return _sequential_transport(mu, nu, reversed(mu.atoms))


@dataclass(frozen=True)
class MartingaleClassification:
    martingale_points: frozenset
    drifts: dict

    @property
    def strict_points(self) -> frozenset:
        return frozenset(self.drifts) - self.martingale_points


def _drift_scale(x) -> float:
    return max(1.0, abs(float(x)))


def classify_martingale_points(p: Coupling, eps: float | None = None) -> MartingaleClassification:
    eps = tolerance() if eps is None else eps
    drifts = {x: barycenter(k) - x for x, k in p.rows}
    mart = frozenset(x for x, d in drifts.items() if d == 0 or abs(d) <= eps * _drift_scale(x))
    return MartingaleClassification(mart, drifts)


def validate(p: Coupling, mu: DiscreteMeasure, nu: DiscreteMeasure, eps: float | None = None) -> CheckReport:
    """Marginal and supermartingale check; reports the first violation found."""
    eps = tolerance() if eps is None else eps
    for x, y, w in p.entries():
        if w < 0:
            return failed("negative", (x, y, w), f"negative mass {w} at ({x}, {y})")
    first = p.first_marginal
    if not measures_close(first, mu, eps):
        bad = next(t for t in sorted({a for a, _ in first} | {a for a, _ in mu})
                   if not isclose(first.mass_at(t), mu.mass_at(t), eps))
        return failed("marginal", ("first", bad, first.mass_at(bad), mu.mass_at(bad)),
                      f"first marginal at {bad}: {first.mass_at(bad)} != {mu.mass_at(bad)}")
    second = p.second_marginal
    if not measures_close(second, nu, eps):
        bad = next(t for t in sorted({a for a, _ in second} | {a for a, _ in nu})
                   if not isclose(second.mass_at(t), nu.mass_at(t), eps))
        return failed("marginal", ("second", bad, second.mass_at(bad), nu.mass_at(bad)),
                      f"second marginal at {bad}: {second.mass_at(bad)} != {nu.mass_at(bad)}")
    for x, k in p.rows:
        d = barycenter(k) - x
        if d > 0 and not d <= eps * _drift_scale(x):
            return failed("drift", (x, d), f"row {x} drifts upward by {d}")
    return passed("validity")


def is_supermartingale(p: Coupling, eps: float | None = None) -> bool:
    eps = tolerance() if eps is None else eps
    return all(le(barycenter(k) - x, 0) or barycenter(k) - x <= eps * _drift_scale(x) for x, k in p.rows)
