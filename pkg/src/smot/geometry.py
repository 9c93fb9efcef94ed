"""Spence-Mirrlees rewards, support monotonicity and local competitors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable

from .coupling import (
    Coupling,
    classify_martingale_points,
    couplings_close,
    decreasing_transport,
    increasing_transport,
)
from .errors import NotInConvexDecreasingOrder, ParseError
from .expr import parse_expression
from .numeric import as_float, tolerance
from .report import CheckReport, failed, passed

PLUS, MINUS = 1, -1


def _tanh_concave(x: float, y: float) -> float:
    return math.tanh(x) * (math.sqrt(1.0 + y * y) - y)


def _tanh_convex(x: float, y: float) -> float:
    return -math.tanh(x) * (math.sqrt(1.0 + y * y) + y)


def _exp_product(x: float, y: float) -> float:
    return math.exp(x) * math.exp(y)


@dataclass(frozen=True)
class RewardSpec:
    """A reward ``f(x, y)`` together with what is known about its cross-differences.

    ``first`` / ``second`` record which of ``f`` (``+1``) or ``-f`` (``-1``)
    is first- / second-order Spence-Mirrlees; ``0`` means unknown or neither.
    """

    kind: str
    params: tuple = ()
    text: str = ""
    sign: int = 1
    first: int = 0
    second: int = 0
    _fn: Callable[[float, float], float] = field(default=None, repr=False, compare=False)

    def __call__(self, x, y) -> float:
        return self.sign * self._fn(as_float(x), as_float(y))

    def negated(self) -> "RewardSpec":
        return RewardSpec(self.kind, self.params, self.text, -self.sign, -self.first, -self.second, self._fn)

    @property
    def supermartingale_sm(self) -> bool:
        """``f`` second-order SM and ``-f`` first-order SM."""
        return self.first == MINUS and self.second == PLUS

    def describe(self) -> str:
        base = self.text or self.kind
        if self.params:
            base += ":" + ",".join(str(p) for p in self.params)
        return base if self.sign > 0 else f"-({base})"


def canonical_reward() -> RewardSpec:
    """``tanh(x) (sqrt(1+y^2) - y)``, with ``f_xy < 0`` and ``f_xyy > 0``.

    Equivalently ``-tanh(x) * psi(y)`` with ``psi(y) = y - sqrt(1+y^2)``
    increasing and concave.
    """
    return RewardSpec("canonical_supermartingale_sm", text="tanh(x)*(sqrt(1+y^2)-y)",
                      first=MINUS, second=PLUS, _fn=_tanh_concave)


def canonical_literal_reward() -> RewardSpec:
    """``-tanh(x) (sqrt(1+y^2) + y)``; cross-differences are decreasing *and concave*."""
    return RewardSpec("canonical_literal", text="-tanh(x)*(sqrt(1+y^2)+y)",
                      first=MINUS, second=MINUS, _fn=_tanh_convex)


def exp_product() -> RewardSpec:
    return RewardSpec("exp_product", text="exp(x)*exp(y)", first=PLUS, second=PLUS, _fn=_exp_product)


def exp_product_plus_bilinear(c: float) -> RewardSpec:
    c = float(c)
    return RewardSpec(
        "exp_product_plus_bilinear",
        (c,),
        text="exp(x)*exp(y)+c*x*y",
        first=PLUS if c >= 0 else 0,
        second=PLUS,
        _fn=lambda x, y: math.exp(x) * math.exp(y) + c * x * y,
    )


def expression_reward(text: str) -> RewardSpec:
    return RewardSpec("expression", text=text, _fn=parse_expression(text))


CATALOG = {
    "canonical": canonical_reward,
    "canonical_supermartingale_sm": canonical_reward,
    "negated_canonical": lambda: canonical_reward().negated(),
    "canonical_literal": canonical_literal_reward,
    "exp_product": exp_product,
}


def parse_reward(spec: str) -> RewardSpec:
    """Catalog name (optionally ``-name`` or ``exp_product_plus_bilinear:c``) or an expression."""
    text = spec.strip()
    names = set(CATALOG) | {"exp_product_plus_bilinear"}
    neg = text.startswith("-") and text[1:].split(":")[0] in names
    name = text[1:] if neg else text
    head, _, arg = name.partition(":")
    if head == "exp_product_plus_bilinear":
        try:
            r = exp_product_plus_bilinear(float(arg) if arg else 1.0)
        except ValueError:
            raise ParseError(f"bad coefficient in {spec!r}") from None
    elif head in CATALOG and not arg:
        r = CATALOG[head]()
    else:
        return expression_reward(text)
    return r.negated() if neg else r


def check_spence_mirrlees(
    f: Callable[[float, float], float],
    xs: Iterable,
    ys: Iterable,
    order: str = "first",
    sign: str = "plus",
    strict: bool = True,
    eps: float | None = None,
) -> CheckReport:
    """Grid test of ``s * (f(x2, .) - f(x1, .))`` being increasing (first) or convex (second).

    ``s`` is ``+1`` for ``sign="plus"`` and ``-1`` for ``"minus"``.  Strict
    mode requires every consecutive difference (or slope increment) to be
    positive beyond ``eps``; relaxed mode tolerates ``-eps``.
    """
    eps = tolerance() if eps is None else eps
    s = 1.0 if sign == "plus" else -1.0
    xs = sorted(as_float(x) for x in xs)
    ys = sorted(as_float(y) for y in ys)
    if order == "second" and len(ys) < 3:
        raise ValueError("second-order test needs at least three y values")
    name = f"spence_mirrlees_{order}_{sign}"
    for x1, x2 in combinations(xs, 2):
        diff = [s * (f(x2, y) - f(x1, y)) for y in ys]
        scale = 1.0 + max(abs(d) for d in diff)
        if order == "first":
            steps = [(ys[k], ys[k + 1], diff[k + 1] - diff[k]) for k in range(len(ys) - 1)]
        else:
            steps = []
            for k in range(len(ys) - 2):
                y0, y1, y2 = ys[k:k + 3]
                slope_l = (diff[k + 1] - diff[k]) / (y1 - y0)
                slope_r = (diff[k + 2] - diff[k + 1]) / (y2 - y1)
                steps.append((y0, y2, slope_r - slope_l))
        for ya, yb, step in steps:
            bad = step <= eps * scale if strict else step < -eps * scale
            if bad:
                return failed(name, (x1, x2, ya, yb), f"increment {step:.3g} between y={ya} and y={yb} for x1={x1}, x2={x2}")
    return passed(name)


@dataclass(frozen=True)
class SupportGraph:
    """A support set ``points`` with martingale set ``m_set = m0 | m1``."""

    points: frozenset
    m_set: frozenset = frozenset()
    m0: frozenset = frozenset()
    m1: frozenset = None

    def __post_init__(self):
        m1 = self.m_set - self.m0 if self.m1 is None else frozenset(self.m1)
        object.__setattr__(self, "m1", m1)
        if self.m0 & m1:
            raise ValueError("m0 and m1 must be disjoint")
        if (self.m0 | m1) != self.m_set:
            raise ValueError("m0 and m1 must partition m_set")

    @classmethod
    def from_coupling(cls, p: Coupling, m_set=None, m0=(), extra_points=(), eps: float | None = None) -> "SupportGraph":
        if m_set is None:
            m_set = classify_martingale_points(p, eps).martingale_points
        pts = frozenset(p.support()) | frozenset(extra_points)
        return cls(pts, frozenset(m_set), frozenset(m0))

    @property
    def projection(self) -> list:
        return sorted({x for x, _ in self.points})

    def section(self, x) -> list:
        return sorted(y for xx, y in self.points if xx == x)


def check_first_order(sg: SupportGraph, direction: str = "left") -> CheckReport:
    """Left: ``y1 <= y2`` whenever ``x2`` is outside M; right: ``y2 <= y1`` whenever ``x1`` is outside M."""
    pts = sorted(sg.points)
    name = f"first_order_{direction}"
    for i, (x1, y1) in enumerate(pts):
        for x2, y2 in pts[i + 1:]:
            if x2 <= x1:
                continue
            if direction == "left" and x2 not in sg.m_set and y1 > y2:
                return failed(name, ((x1, y1), (x2, y2)), f"paths ({x1},{y1}) and ({x2},{y2}) cross with {x2} outside M")
            if direction == "right" and x1 not in sg.m_set and y2 > y1:
                return failed(name, ((x1, y1), (x2, y2)), f"paths ({x1},{y1}) and ({x2},{y2}) do not cross with {x1} outside M")
    return passed(name)


def check_second_order(sg: SupportGraph, direction: str = "left") -> CheckReport:
    """No point ``(x', y')`` with ``y'`` strictly inside the span of a section at ``x``.

    Only ``x < x'`` counts for ``left``; only ``x' < x`` for ``right``.
    """
    name = f"second_order_{direction}"
    for x in sg.projection:
        sec = sg.section(x)
        if len(sec) < 2:
            continue
        lo, hi = sec[0], sec[-1]
        for xp, yp in sorted(sg.points):
            relevant = xp > x if direction == "left" else xp < x
            if relevant and lo < yp < hi:
                y1 = max(y for y in sec if y < yp)
                y2 = min(y for y in sec if y > yp)
                return failed(name, ((x, y1), (x, y2), (xp, yp)), f"{yp} lies strictly between {y1} and {y2} from x={x}")
    return passed(name)


def check_nondegenerate(sg: SupportGraph) -> CheckReport:
    for x in sg.projection:
        sec = sg.section(x)
        up = any(y > x for y in sec)
        down = any(y < x for y in sec)
        if up and not down:
            return failed("nondegenerate", (x, "i"), f"row {x} has an up-path but no down-path")
        if x in sg.m_set and down and not up:
            return failed("nondegenerate", (x, "ii"), f"martingale row {x} has a down-path but no up-path")
        if not any(y <= x for y in sec):
            return failed("nondegenerate", (x, "i'"), f"row {x} has no path with y <= x")
        if x in sg.m_set and not any(y >= x for y in sec):
            return failed("nondegenerate", (x, "ii'"), f"martingale row {x} has no path with y >= x")
    return passed("nondegenerate")


def monotonicity_suite(sg: SupportGraph, pattern: str = "increasing") -> CheckReport:
    """Nondegenerate plus first-order right / second-order left (``increasing``) or the mirror (``decreasing``)."""
    first, second = ("right", "left") if pattern == "increasing" else ("left", "right")
    checks = [check_nondegenerate(sg), check_first_order(sg, first), check_second_order(sg, second)]
    results = {r.check: r.ok for r in checks}
    bad = next((r for r in checks if not r.ok), None)
    if bad is None:
        return passed(f"monotonicity_{pattern}", results=results)
    return failed(f"monotonicity_{pattern}", bad.violation, f"{bad.check}: {bad.detail}", results=results)


def monotonicity_with_ties(p: Coupling, tight_cells, pattern: str = "increasing", m_set=None,
                           eps: float | None = None) -> CheckReport:
    """Run the suite on ``p``'s support and again with the zero-mass tight cells added.

    Passes when the support alone passes; the tie variant is reported alongside.
    """
    if m_set is None:
        m_set = classify_martingale_points(p, eps).martingale_points
    bare = monotonicity_suite(SupportGraph.from_coupling(p, m_set, eps=eps), pattern)
    ties = monotonicity_suite(SupportGraph.from_coupling(p, m_set, extra_points=tight_cells, eps=eps), pattern)
    variants = {"support": bare.ok, "support_with_ties": ties.ok}
    if bare.ok:
        return passed("monotonicity_gamma", variants=variants)
    return failed("monotonicity_gamma", bare.violation, bare.detail, variants=variants)


def verify_canonical(p: Coupling, pattern: str = "increasing", m_set=None, eps: float | None = None) -> CheckReport:
    """Run the geometric suite and, if it passes, rebuild the canonical coupling between ``p``'s marginals.

    A plan that passes the suite while being a martingale on M must coincide
    with the increasing (resp. decreasing) transport; the report says whether it does.
    """
    cls = classify_martingale_points(p, eps)
    if m_set is None:
        m_set = cls.martingale_points
    nonmart = [x for x in m_set if x not in cls.martingale_points]
    if nonmart:
        return failed("canonical", ("drift", nonmart[0]), f"row {nonmart[0]} is in M but drifts")
    suite = monotonicity_suite(SupportGraph.from_coupling(p, m_set), pattern)
    if not suite.ok:
        return failed("canonical", suite.violation, suite.detail, geometry=False)
    build = increasing_transport if pattern == "increasing" else decreasing_transport
    try:
        ref = build(p.first_marginal, p.second_marginal)
    except NotInConvexDecreasingOrder as exc:
        return failed("canonical", "order", str(exc), geometry=True)
    if couplings_close(p, ref, eps):
        return passed("canonical", geometry=True)
    return failed("canonical", "mismatch", f"plan passes the suite but differs from the {pattern} transport", geometry=True)


def _in_sigma(sigma, x, y) -> bool:
    if sigma is None:
        return True
    if callable(sigma):
        return bool(sigma(x, y))
    return sigma.in_sigma(x, y)


def _admissible(delta: dict, m0, m1, eps: float) -> bool:
    for x, d in delta.items():
        if x in m1 and abs(d) > eps:
            return False
        if x in m0 and d > eps:
            return False
    return True


def verify_local_optimality(p: Coupling, f: Callable, m0=(), m1=(), sigma=None, eps: float | None = None) -> CheckReport:
    """Search pair swaps and triple splits over the support for an improving competitor.

    Pair swap: ``(x1,y1),(x2,y2) -> (x1,y2),(x2,y1)`` with weights 1/2.
    Triple split: ``(x,y1),(x,y2),(x',y')`` with ``y1 < y' < y2``; the mass at
    ``x`` is split as ``a`` on ``y1`` and ``1-a`` on ``y2`` with
    ``a = (y2 - y')/(y2 - y1)`` so that its barycenter is ``y'``, then the
    roles of ``x`` and ``x'`` are exchanged.  Competitors must respect the
    barycenter rules on ``m0`` (no increase) and ``m1`` (no change) and lie in ``sigma``.
    """
    eps = tolerance() if eps is None else eps
    m0, m1 = frozenset(m0), frozenset(m1)
    pts = sorted(p.support())
    fv = lambda x, y: f(x, y)
    tested = 0
    for (x1, y1), (x2, y2) in combinations(pts, 2):
        if x1 == x2 or y1 == y2:
            continue
        delta = {x1: as_float(y2) - as_float(y1), x2: as_float(y1) - as_float(y2)}
        if not _admissible(delta, m0, m1, eps):
            continue
        if not (_in_sigma(sigma, x1, y2) and _in_sigma(sigma, x2, y1)):
            continue
        tested += 1
        base = 0.5 * (fv(x1, y1) + fv(x2, y2))
        comp = 0.5 * (fv(x1, y2) + fv(x2, y1))
        if comp > base + eps * (1 + abs(base)):
            return failed("local_optimality", ("swap", (x1, y1), (x2, y2)),
                          f"swapping targets of ({x1},{y1}) and ({x2},{y2}) gains {comp - base:.3g}", tested=tested)
    xs = sorted({x for x, _ in pts})
    sections = {x: sorted(y for xx, y in pts if xx == x) for x in xs}
    for x in xs:
        sec = sections[x]
        for y1, y2 in combinations(sec, 2):
            for xp in xs:
                if xp == x:
                    continue
                for yp in sections[xp]:
                    if not y1 < yp < y2:
                        continue
                    if not all(_in_sigma(sigma, a, b) for a, b in ((xp, y1), (xp, y2), (x, yp))):
                        continue
                    tested += 1
                    a = (as_float(y2) - as_float(yp)) / (as_float(y2) - as_float(y1))
                    base = 0.5 * (a * fv(x, y1) + (1 - a) * fv(x, y2) + fv(xp, yp))
                    comp = 0.5 * (a * fv(xp, y1) + (1 - a) * fv(xp, y2) + fv(x, yp))
                    if comp > base + eps * (1 + abs(base)):
                        return failed("local_optimality", ("split", (x, y1), (x, y2), (xp, yp)),
                                      f"exchanging ({x}; {y1},{y2}) with ({xp},{yp}) gains {comp - base:.3g}",
                                      tested=tested)
    return passed("local_optimality", tested=tested)
