"""Piecewise-uniform marginals and SVG drawings of couplings."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .coupling import Coupling, classify_martingale_points
from .measure import DiscreteMeasure
from .numeric import as_float

WIDTH, HEIGHT = 1200, 300
MARGIN = 40
TOP, BOTTOM = 60, 240

# Marginals used for the bundled figures: the source has a flat bulk with a
# heavier right shoulder, the target spreads it and shifts mass to the left.
FIGURE_MU = [(Fraction(-1), Fraction(1), Fraction(3, 5)), (Fraction(1), Fraction(2), Fraction(2, 5))]
FIGURE_NU = [
    (Fraction(-3), Fraction(-1), Fraction(2, 5)),
    (Fraction(-1), Fraction(0), Fraction(1, 5)),
    (Fraction(0), Fraction(3), Fraction(2, 5)),
]


def discretize_piecewise_uniform(pieces: Sequence[tuple], n: int) -> DiscreteMeasure:
    """``n`` equal-mass atoms at the barycenters of consecutive quantile slices.

    ``pieces`` are ``(lo, hi, mass)`` with disjoint, increasing intervals;
    ``lo == hi`` denotes a point mass.  The result has the same total mass
    and barycenter as the density, exactly.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    pieces = [(Fraction(lo), Fraction(hi), Fraction(m)) for lo, hi, m in pieces if m != 0]
    for lo, hi, m in pieces:
        if hi < lo or m < 0:
            raise ValueError(f"bad piece ({lo}, {hi}, {m})")
    for (_, hi, _), (lo, _, _) in zip(pieces, pieces[1:]):
        if lo < hi:
            raise ValueError("density pieces must be increasing and non-overlapping")
    total = sum(m for _, _, m in pieces)
    if total == 0:
        return DiscreteMeasure()
    step = total / n
    atoms = []
    # walk the slices [k*step, (k+1)*step] against the piece boundaries
    starts = []
    c = Fraction(0)
    for lo, hi, m in pieces:
        starts.append(c)
        c += m
    for k in range(n):
        a, b = k * step, (k + 1) * step
        moment = Fraction(0)
        for (lo, hi, m), c0 in zip(pieces, starts):
            u, v = max(a, c0), min(b, c0 + m)
            if v <= u:
                continue
            left = lo + (u - c0) / m * (hi - lo)
            right = lo + (v - c0) / m * (hi - lo)
            moment += (v - u) * (left + right) / 2
        atoms.append((moment / step, step))
    return DiscreteMeasure(atoms)


def figure_marginals(n: int = 200) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    return discretize_piecewise_uniform(FIGURE_MU, n), discretize_piecewise_uniform(FIGURE_NU, n)


def _f(v: float) -> str:
    return f"{v:.3f}"


def render_svg(p: Coupling, title: str = "", eps: float | None = None) -> str:
    """Each support pair ``(x, y)`` becomes a segment from ``x`` on the top axis to ``y`` on the bottom axis.

    Martingale rows are solid black, rows with strict downward drift dashed gray.
    """
    mart = classify_martingale_points(p, eps).martingale_points
    xs = [x for x, _ in p.rows]
    ys = sorted({y for _, k in p.rows for y, _ in k})
    pts = [as_float(v) for v in xs + ys]
    lo, hi = (min(pts), max(pts)) if pts else (0.0, 1.0)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    scale = (WIDTH - 2 * MARGIN) / (hi - lo)

    def pos(v) -> float:
        return MARGIN + (as_float(v) - lo) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        esc = title.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(f'<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{esc}</text>')
    out.append('<g stroke-width="0.6" fill="none">')
    for x, k in p.rows:
        style = 'stroke="black"' if x in mart else 'stroke="gray" stroke-dasharray="4 3"'
        for y, _ in k:
            out.append(f'<line x1="{_f(pos(x))}" y1="{TOP}" x2="{_f(pos(y))}" y2="{BOTTOM}" {style}/>')
    out.append("</g>")
    out.append('<g stroke="black" stroke-width="1">')
    out.append(f'<line x1="{MARGIN}" y1="{TOP}" x2="{WIDTH - MARGIN}" y2="{TOP}"/>')
    out.append(f'<line x1="{MARGIN}" y1="{BOTTOM}" x2="{WIDTH - MARGIN}" y2="{BOTTOM}"/>')
    for x in xs:
        out.append(f'<line x1="{_f(pos(x))}" y1="{TOP - 5}" x2="{_f(pos(x))}" y2="{TOP}"/>')
    for y in ys:
        out.append(f'<line x1="{_f(pos(y))}" y1="{BOTTOM}" x2="{_f(pos(y))}" y2="{BOTTOM + 5}"/>')
    out.append("</g>")
    out.append(f'<text x="{MARGIN - 20}" y="{TOP + 4}" font-family="sans-serif" font-size="12">x</text>')
    out.append(f'<text x="{MARGIN - 20}" y="{BOTTOM + 4}" font-family="sans-serif" font-size="12">y</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def martingale_runs(p: Coupling, eps: float | None = None) -> list[tuple[bool, int]]:
    """Run-length encoding of the martingale flag along the source atoms, left to right."""
    mart = classify_martingale_points(p, eps).martingale_points
    runs: list[list] = []
    for x, _ in p.rows:
        flag = x in mart
        if runs and runs[-1][0] == flag:
            runs[-1][1] += 1
        else:
            runs.append([flag, 1])
    return [(f, c) for f, c in runs]
