"""Independent reference computations used to cross-check the library.

None of these reuse library code paths: puts are integrated from the cdf,
the Wasserstein distance comes from the cdf formula, LPs are solved by
brute-force enumeration of basic feasible solutions or by scipy.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np


def put_from_cdf(atoms, t):
    """``int_{-inf}^t F(s) ds`` for an atomic measure, summed piece by piece."""
    xs = sorted(atoms)
    total = Fraction(0)
    cdf = Fraction(0)
    prev = None
    for x, w in xs:
        if x >= t:
            break
        if prev is not None:
            total += cdf * (x - prev)
        cdf += w
        prev = x
    if prev is not None:
        total += cdf * (t - prev)
    return total


def w1_from_cdf(a, b):
    """``int |F_a - F_b| dx``."""
    pts = sorted({x for x, _ in a} | {x for x, _ in b})
    total = Fraction(0)
    for left, right in zip(pts, pts[1:]):
        fa = sum((w for x, w in a if x <= left), Fraction(0))
        fb = sum((w for x, w in b if x <= left), Fraction(0))
        total += abs(fa - fb) * (right - left)
    return total


def transport_standard_form(xs, ys, mu_w, nu_w, reward, kind, sense):
    """Equality-form data of the transport LP, built independently of the library."""
    nx, ny = len(xs), len(ys)
    rows, rhs = [], []
    for i in range(nx):
        r = np.zeros(nx * ny)
        r[i * ny:(i + 1) * ny] = 1
        rows.append(r)
        rhs.append(mu_w[i])
    for j in range(ny):
        r = np.zeros(nx * ny)
        r[j::ny] = 1
        rows.append(r)
        rhs.append(nu_w[j])
    A = np.array(rows)
    c = -np.asarray(reward, float).reshape(-1) if sense == "max" else np.asarray(reward, float).reshape(-1)
    if kind == "none":
        return A, np.array(rhs), c
    drift = np.zeros((nx, nx * ny))
    for i in range(nx):
        drift[i, i * ny:(i + 1) * ny] = [float(y) - float(xs[i]) for y in ys]
    if kind == "drift_eq_zero":
        return np.vstack([A, drift]), np.array(rhs + [0.0] * nx), c
    A = np.hstack([A, np.zeros((A.shape[0], nx))])
    A = np.vstack([A, np.hstack([drift, np.eye(nx)])])
    return A, np.array(rhs + [0.0] * nx), np.concatenate([c, np.zeros(nx)])


def enumerate_vertices(A, b, c, tol=1e-9):
    """Best objective ``min c @ x`` over all basic feasible solutions, by brute force."""
    # keep a maximal independent set of rows
    keep = []
    for i in range(A.shape[0]):
        if np.linalg.matrix_rank(A[keep + [i]]) > len(keep):
            keep.append(i)
    A, b = A[keep], b[keep]
    m, n = A.shape
    best = None
    for cols in combinations(range(n), m):
        B = A[:, cols]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        xb = np.linalg.solve(B, b)
        if xb.min() < -tol:
            continue
        x = np.zeros(n)
        x[list(cols)] = xb
        v = float(c @ x)
        if best is None or v < best[0] - tol:
            best = (v, x)
    return best


def vertex_count_bound(A) -> int:
    rank = np.linalg.matrix_rank(A)
    from math import comb

    return comb(A.shape[1], rank)
