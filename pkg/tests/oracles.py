"""Independent reference computations used to freeze and check expected values."""

import itertools

import numpy as np


def scan_max(a, x):
    best = None
    for aj, xj in zip(a, x):
        v = aj + xj
        if best is None or v > best:
            best = v
    return best


def scan_min(b, x):
    best = None
    for bj, xj in zip(b, x):
        v = bj + xj
        if best is None or v < best:
            best = v
    return best


def scan_rows(A, b, x):
    """(max value, first maximising row) by an explicit loop."""
    best, idx = None, None
    for i, (row, off) in enumerate(zip(A, b)):
        v = sum(r * xi for r, xi in zip(row, x)) + off
        if best is None or v > best:
            best, idx = v, i
    return best, idx


def vertex_enumeration(c, A, b, lo, hi, tol=1e-9):
    """Optimal value of min c.z s.t. A z <= b, lo <= z <= hi (finite box) by vertex enumeration.

    Returns ("optimal", value) or ("infeasible", None).
    """
    c = np.asarray(c, float)
    n = c.size
    A = np.asarray(A, float).reshape(-1, n)
    G = np.vstack([A, np.eye(n), -np.eye(n)])
    h = np.concatenate([np.asarray(b, float), np.asarray(hi, float), -np.asarray(lo, float)])
    subsets = np.array(list(itertools.combinations(range(G.shape[0]), n)))
    Gs = G[subsets]
    hs = h[subsets]
    ok = np.abs(np.linalg.det(Gs)) > 1e-10
    if not ok.any():
        return "infeasible", None
    Z = np.linalg.solve(Gs[ok], hs[ok][..., None])[..., 0]
    scale = np.maximum(1.0, np.abs(h))
    feas = np.all(Z @ G.T <= h + tol * scale, axis=1)
    if not feas.any():
        return "infeasible", None
    return "optimal", float(np.min(Z[feas] @ c))


def random_lp(rng, feasible_bias=0.7):
    n = int(rng.integers(1, 6))
    p = int(rng.integers(0, 9))
    A = rng.normal(size=(p, n))
    lo = rng.uniform(-10, 0, size=n)
    hi = rng.uniform(0, 10, size=n)
    if rng.random() < feasible_bias:
        z0 = rng.uniform(lo, hi)
        b = A @ z0 + rng.uniform(0, 3, size=p)
    else:
        b = rng.normal(scale=5, size=p) - 3
    c = rng.normal(size=n)
    return c, A, b, lo, hi


def tally(y_true, y_pred):
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        if t == 1 and p == 1:
            tp += 1
        elif t == -1 and p == 1:
            fp += 1
        elif t == 1 and p == -1:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn
