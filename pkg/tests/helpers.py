"""Independent oracles and data builders shared by the tests."""

from fractions import Fraction
from itertools import combinations

import numpy as np

from aerq.core import validate_dataset


def random_dataset(rng, n, p, law="normal", hetero=0.0):
    x = rng.uniform(-1, 1, size=(n, p))
    beta = rng.normal(size=p + 1)
    e = {
        "normal": lambda: rng.standard_normal(n),
        "t3": lambda: rng.standard_t(3, n),
        "pareto": lambda: rng.pareto(1.5, n),
    }[law]()
    if hetero and p:
        e = e * np.exp(hetero * x.mean(axis=1))
    return validate_dataset(beta[0] + x @ beta[1:] + e, x)


def brute_force_extreme(y, x):
    """Minimum of sum_i x*_i'b over vertices of {b : x*_i'b >= y_i}.

    Every (p+1)-subset of observations is made to bind; infeasible and
    singular candidates are dropped. Returns (objective, coef).
    """
    y = np.asarray(y, float)
    design = np.column_stack([np.ones(len(y)), np.asarray(x, float).reshape(len(y), -1)])
    k = design.shape[1]
    best = (np.inf, None)
    scale = 1e-9 * (1 + np.abs(y).max())
    for rows in combinations(range(len(y)), k):
        sub = design[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        b = np.linalg.solve(sub, y[list(rows)])
        if np.all(design @ b >= y - scale):
            val = design.sum(axis=0) @ b
            if val < best[0]:
                best = (val, b)
    return best


def exact_solve(a, b):
    """Gauss-Jordan over Fractions; returns None if singular."""
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(bv)] for row, bv in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [u - f * v for u, v in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def exact_extreme(y, x):
    """Exact-rational version of :func:`brute_force_extreme` for small fixtures.

    Returns (objective, coef, binding rows) as Fractions.
    """
    y = [Fraction(v) for v in y]
    design = [[Fraction(1)] + [Fraction(v) for v in row] for row in x]
    k = len(design[0])
    colsum = [sum(r[j] for r in design) for j in range(k)]
    best = None
    for rows in combinations(range(len(y)), k):
        b = exact_solve([design[i] for i in rows], [y[i] for i in rows])
        if b is None:
            continue
        if all(sum(d * bj for d, bj in zip(row, b)) >= yi for row, yi in zip(design, y)):
            val = sum(c * bj for c, bj in zip(colsum, b))
            if best is None or val < best[0]:
                best = (val, b, rows)
    return best


def vertex_enumeration(c, a, b, senses, lower, upper, maximize=False):
    """Optimal objective of a small bounded LP by enumerating basic solutions.

    Bounds must be finite. Returns None when no vertex is feasible.
    """
    c, a, b = np.asarray(c, float), np.asarray(a, float), np.asarray(b, float)
    nv = c.size
    rows = [(a[i], b[i], s) for i, s in enumerate(senses)]
    for j in range(nv):
        e = np.zeros(nv)
        e[j] = 1
        rows.append((e, lower[j], ">="))
        rows.append((e, upper[j], "<="))
    eq = [r for r in rows if r[2] == "="]
    ineq = [r for r in rows if r[2] != "="]
    best = None
    for extra in combinations(ineq, nv - len(eq)) if nv >= len(eq) else []:
        chosen = eq + list(extra)
        m = np.array([r[0] for r in chosen])
        if abs(np.linalg.det(m)) < 1e-10:
            continue
        xv = np.linalg.solve(m, np.array([r[1] for r in chosen]))
        ok = True
        for coef, rhs, s in rows:
            v = coef @ xv
            tol = 1e-9 * (1 + abs(rhs))
            if (s == "<=" and v > rhs + tol) or (s == ">=" and v < rhs - tol) or (s == "=" and abs(v - rhs) > tol):
                ok = False
                break
        if ok:
            val = c @ xv
            if best is None or (val > best if maximize else val < best):
                best = val
    return best
