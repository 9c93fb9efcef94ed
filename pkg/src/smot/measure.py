"""Finite atomic measures on the real line.

Order tests (``leq_convex_decreasing``, ``leq_convex``, ``leq_pcd``) are
decided on a finite grid.  For atomic ``a`` and ``b`` both put functions
``p(t) = sum w_i (t - x_i)^+`` are piecewise linear with kinks only at atoms,
vanish left of the smallest atom, and are affine right of the largest one.
Hence ``p_a <= p_b`` everywhere iff it holds at every atom of ``a`` and ``b``
and the slopes to the right of the grid compare correctly.  With equal masses
the slopes coincide and the gap at ``+inf`` is ``mass * (bary(a) - bary(b))``,
which is why the barycenter inequality appears in ``leq_convex_decreasing``.
For ``leq_pcd`` the right slope of ``p_b - p_a`` is ``b(R) - a(R) >= 0``, so
the grid test alone is exact.  Nonnegative convex decreasing test functions
are (limits of) nonnegative combinations of constants and hinges
``(t - .)^+``, which reduces the pcd order to mass plus put domination.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import MassMismatch, NegativeMass, OutOfRange
from .numeric import INF, Scalar, is_zero, isclose, le, lt, tolerance


class DiscreteMeasure:
    """Nonnegative measure with finitely many atoms, stored sorted by location.

    Construction normalizes the input: atoms are sorted, coincident locations
    (within tolerance when floats are involved) are merged, and zero masses
    are dropped.  Masses below ``-eps`` raise ``NegativeMass``.
    """

    __slots__ = ("_atoms",)

    def __init__(self, atoms: Iterable[tuple[Scalar, Scalar]] = ()):
        merged: list[list] = []
        for x, w in sorted(((x, w) for x, w in atoms), key=lambda a: a[0]):
            if merged and isclose(merged[-1][0], x):
                merged[-1][1] += w
            else:
                merged.append([x, w])
        out = []
        for x, w in merged:
            if is_zero(w):
                continue
            if w < 0:
                raise NegativeMass(f"negative mass {w} at {x}")
            out.append((x, w))
        self._atoms = tuple(out)

    @classmethod
    def dirac(cls, x: Scalar, mass: Scalar = 1) -> "DiscreteMeasure":
        return cls([(x, mass)])

    @classmethod
    def uniform(cls, xs: Sequence[Scalar], total: Scalar = 1) -> "DiscreteMeasure":
        n = len(xs)
        w = Fraction(total) / n if isinstance(total, (int, Fraction)) else total / n
        return cls([(x, w) for x in xs])

    @property
    def atoms(self) -> tuple[tuple[Scalar, Scalar], ...]:
        return self._atoms

    @property
    def xs(self) -> list[Scalar]:
        return [x for x, _ in self._atoms]

    @property
    def ws(self) -> list[Scalar]:
        return [w for _, w in self._atoms]

    @property
    def mass(self) -> Scalar:
        return sum((w for _, w in self._atoms), Fraction(0))

    @property
    def first_moment(self) -> Scalar:
        return sum((x * w for x, w in self._atoms), Fraction(0))

    def is_zero(self) -> bool:
        return not self._atoms

    def mass_at(self, x: Scalar) -> Scalar:
        i = bisect_left(self.xs, x)
        for j in (i - 1, i):
            if 0 <= j < len(self._atoms) and isclose(self._atoms[j][0], x):
                return self._atoms[j][1]
        return Fraction(0)

    def scale(self, c: Scalar) -> "DiscreteMeasure":
        return DiscreteMeasure((x, c * w) for x, w in self._atoms)

    def __iter__(self) -> Iterator[tuple[Scalar, Scalar]]:
        return iter(self._atoms)

    def __len__(self) -> int:
        return len(self._atoms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self._atoms == other._atoms

    def __hash__(self) -> int:
        return hash(self._atoms)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return add(self, other)

    def __sub__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return subtract(self, other)

    def __repr__(self) -> str:
        body = ", ".join(f"{x}: {w}" for x, w in self._atoms)
        return f"DiscreteMeasure({{{body}}})"


ZERO = DiscreteMeasure()


@dataclass(frozen=True)
class Interval:
    lo: Scalar = -INF
    hi: Scalar = INF
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")
        if self.lo == -INF and self.lo_closed or self.hi == INF and self.hi_closed:
            raise ValueError("infinite endpoints are always open")

    def contains(self, x: Scalar) -> bool:
        above = x > self.lo or (self.lo_closed and x == self.lo)
        below = x < self.hi or (self.hi_closed and x == self.hi)
        return above and below

    __contains__ = contains

    def __str__(self) -> str:
        from .numeric import fmt

        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{fmt(self.lo)}, {fmt(self.hi)}{right}"


def put_value(m: DiscreteMeasure, t: Scalar) -> Scalar:
    return sum((w * (t - x) for x, w in m if x < t), Fraction(0))


def potential_u(m: DiscreteMeasure, t: Scalar) -> Scalar:
    return sum((w * abs(t - x) for x, w in m), Fraction(0))


def barycenter(m: DiscreteMeasure) -> Scalar:
    if m.is_zero():
        return Fraction(0)
    return m.first_moment / m.mass


def quantile(m: DiscreteMeasure, s: Scalar) -> Scalar:
    """Left-continuous inverse of the cumulative mass function.

    ``quantile(m, s)`` is the smallest atom ``x`` with ``m((-inf, x]) >= s``;
    ``s = 0`` returns the smallest atom.
    """
    if m.is_zero():
        raise OutOfRange("quantile of the zero measure")
    total = m.mass
    if s < 0 or lt(total, s):
        raise OutOfRange(f"mass level {s} outside [0, {total}]")
    cum = Fraction(0)
    for x, w in m:
        cum += w
        if le(s, cum):
            return x
    return m.atoms[-1][0]


def _grid(*measures: DiscreteMeasure) -> list[Scalar]:
    pts = sorted({x for m in measures for x, _ in m})
    out: list[Scalar] = []
    for t in pts:
        if not out or not isclose(out[-1], t):
            out.append(t)
    return out


def put_on_grid(m: DiscreteMeasure, grid: Sequence[Scalar]) -> list[Scalar]:
    """``put_value(m, t)`` for every ``t`` of the sorted ``grid`` in one sweep."""
    out = []
    atoms = m.atoms
    i, mass, moment = 0, Fraction(0), Fraction(0)
    for t in grid:
        while i < len(atoms) and atoms[i][0] < t:
            mass += atoms[i][1]
            moment += atoms[i][0] * atoms[i][1]
            i += 1
        out.append(t * mass - moment)
    return out


def put_violation(a: DiscreteMeasure, b: DiscreteMeasure):
    """First grid point where ``p_a > p_b`` beyond tolerance, as ``(t, p_a(t), p_b(t))``."""
    grid = _grid(a, b)
    for t, pa, pb in zip(grid, put_on_grid(a, grid), put_on_grid(b, grid)):
        if lt(pb, pa):
            return t, pa, pb
    return None


def leq_convex_decreasing(a: DiscreteMeasure, b: DiscreteMeasure) -> bool:
    if not isclose(a.mass, b.mass):
        return False
    if put_violation(a, b) is not None:
        return False
    return le(barycenter(b), barycenter(a))


def leq_convex(a: DiscreteMeasure, b: DiscreteMeasure) -> bool:
    return leq_convex_decreasing(a, b) and isclose(barycenter(a), barycenter(b))


def leq_pcd(a: DiscreteMeasure, b: DiscreteMeasure) -> bool:
    if a.is_zero():
        return True
    if lt(b.mass, a.mass):
        return False
    return put_violation(a, b) is None


def _cum_breaks(m: DiscreteMeasure) -> list[Scalar]:
    out, cum = [], Fraction(0)
    for _, w in m:
        cum += w
        out.append(cum)
    return out


def wasserstein1(a: DiscreteMeasure, b: DiscreteMeasure) -> Scalar:
    """Integral of ``|G_a - G_b|`` over ``[0, mass]`` on the merged cdf breakpoints."""
    if not isclose(a.mass, b.mass):
        raise MassMismatch(f"masses differ: {a.mass} vs {b.mass}")
    if a.is_zero() and b.is_zero():
        return Fraction(0)
    ca, cb = _cum_breaks(a), _cum_breaks(b)
    ia = ib = 0
    prev = Fraction(0)
    total = Fraction(0)
    na, nb = len(ca), len(cb)
    while ia < na and ib < nb:
        nxt = min(ca[ia], cb[ib])
        total += (nxt - prev) * abs(a.atoms[ia][0] - b.atoms[ib][0])
        prev = nxt
        # advance whichever breakpoints were reached (both, on ties)
        if le(ca[ia], nxt):
            ia += 1
        if ib < nb and le(cb[ib], nxt):
            ib += 1
    return total


def restrict(m: DiscreteMeasure, interval: Interval) -> DiscreteMeasure:
    return DiscreteMeasure((x, w) for x, w in m if interval.contains(x))


def add(a: DiscreteMeasure, b: DiscreteMeasure) -> DiscreteMeasure:
    return DiscreteMeasure(list(a) + list(b))


def subtract(a: DiscreteMeasure, b: DiscreteMeasure) -> DiscreteMeasure:
    """``a - b``; requires ``b <= a`` atomwise (within tolerance for floats)."""
    out = dict(a.atoms)
    for y, w in b:
        key = _match(out, y)
        if key is None:
            if is_zero(w):
                continue
            raise NegativeMass(f"subtracting mass {w} at {y} where the minuend has none")
        rest = out[key] - w
        if rest < 0:
            if not isclose(out[key], w):
                raise NegativeMass(f"subtraction underflow at {y}: {out[key]} - {w}")
            rest = 0 * rest
        out[key] = rest
    return DiscreteMeasure(out.items())


def _match(d: dict, y: Scalar):
    if y in d:
        return y
    for key in d:
        if isclose(key, y):
            return key
    return None


def minimum(a: DiscreteMeasure, b: DiscreteMeasure) -> DiscreteMeasure:
    """Atomwise minimum ``a ^ b``."""
    out = []
    for x, w in a:
        v = b.mass_at(x)
        if v:
            out.append((x, min(w, v)))
    return DiscreteMeasure(out)


def measures_close(a: DiscreteMeasure, b: DiscreteMeasure, eps: float | None = None) -> bool:
    """Atomwise comparison: every location carries the same mass up to ``eps``.

    Atoms of negligible mass present on only one side are tolerated.
    """
    eps = tolerance() if eps is None else eps
    for t in _grid(a, b):
        if not isclose(a.mass_at(t), b.mass_at(t), eps):
            return False
    return True


def atomwise_distance(a: DiscreteMeasure, b: DiscreteMeasure) -> Scalar:
    """Largest absolute mass difference over the union of supports."""
    return max((abs(a.mass_at(t) - b.mass_at(t)) for t in _grid(a, b)), default=Fraction(0))
