"""Inequality-form linear programs and a dense two-phase primal simplex.

Problems are stated as

    minimize    c . z
    subject to  A z <= b,   lower <= z <= upper

with +-inf allowed in the bounds.  :func:`lp_standardize` rewrites them as
``A' x = b', x >= 0`` and :func:`lp_solve` runs a tableau simplex on that form.
The Dantzig pricing rule is used until the objective stalls, after which the
solver switches to Bland's rule for good.  Large problems can be routed to
HiGHS through scipy with ``backend="highs"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument, IterationLimit, SolverError

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
CAP_FACTOR = 50  # pivot cap = CAP_FACTOR * (rows + cols)
STALL_FACTOR = 3  # Bland fallback after this many * (rows + cols) stalled pivots

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    objective: np.ndarray
    ineq_A: np.ndarray
    ineq_b: np.ndarray
    lower_bounds: np.ndarray | None = None
    upper_bounds: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise InvalidArgument("objective must be a non-empty vector")
        n = c.size
        if sp.issparse(self.ineq_A):
            A = sp.csr_matrix(self.ineq_A, dtype=float)
        else:
            A = np.asarray(self.ineq_A, dtype=float)
            if A.size == 0:
                A = A.reshape(0, n)
        b = np.asarray(self.ineq_b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[1] != n:
            raise InvalidArgument(f"constraint matrix has shape {A.shape}, expected (*, {n})")
        if b.shape[0] != A.shape[0]:
            raise InvalidArgument(f"{A.shape[0]} constraint rows but {b.shape[0]} right-hand sides")
        lo = np.zeros(n) if self.lower_bounds is None else np.asarray(self.lower_bounds, dtype=float)
        hi = np.full(n, np.inf) if self.upper_bounds is None else np.asarray(self.upper_bounds, dtype=float)
        if lo.shape != (n,) or hi.shape != (n,):
            raise InvalidArgument("bound vectors must have one entry per variable")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise InvalidArgument("bounds must be real, -inf (lower) or +inf (upper)")
        if np.any(lo > hi):
            raise InvalidArgument("lower bound exceeds upper bound")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(b)):
            raise InvalidArgument("objective and right-hand side must be finite")
        self.objective, self.ineq_A, self.ineq_b = c, A, b
        self.lower_bounds, self.upper_bounds = lo, hi

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.ineq_A.shape[0]

    def dense_A(self) -> np.ndarray:
        return self.ineq_A.toarray() if sp.issparse(self.ineq_A) else self.ineq_A

    def max_violation(self, z) -> float:
        """Largest constraint or bound violation at ``z`` (0 if feasible)."""
        z = np.asarray(z, dtype=float)
        viol = 0.0
        if self.n_rows:
            viol = max(viol, float(np.max(self.ineq_A @ z - self.ineq_b)))
        viol = max(viol, float(np.max(self.lower_bounds - z)), float(np.max(z - self.upper_bounds)))
        return max(viol, 0.0)


@dataclass
class LpSolution:
    status: str
    z: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0
    ray: np.ndarray | None = None
    pivots: list = field(default_factory=list, repr=False)


@dataclass
class StandardForm:
    """``A x = b, x >= 0`` plus the affine map back to original variables.

    The first ``n_struct`` columns are structural, the remaining ones are the
    slacks of the inequality rows (one per row, in row order).  Original
    variables are recovered as ``z = shift + T x[:n_struct]``.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    shift: np.ndarray
    T: np.ndarray
    n_struct: int
    const: float

    def recover(self, x) -> np.ndarray:
        return self.shift + self.T @ np.asarray(x, dtype=float)[: self.n_struct]

    def recover_direction(self, dx) -> np.ndarray:
        return self.T @ np.asarray(dx, dtype=float)[: self.n_struct]


def lp_standardize(p: LpProblem) -> StandardForm:
    n = p.n_vars
    lo, hi = p.lower_bounds, p.upper_bounds
    A = p.dense_A()
    shift = np.zeros(n)
    cols = []  # (orig var, sign)
    extra_rows = []  # (struct column, rhs): x_col <= rhs
    for j in range(n):
        if np.isfinite(lo[j]):
            shift[j] = lo[j]
            cols.append((j, 1.0))
            if np.isfinite(hi[j]):
                extra_rows.append((len(cols) - 1, hi[j] - lo[j]))
        elif np.isfinite(hi[j]):
            shift[j] = hi[j]
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ns = len(cols)
    T = np.zeros((n, ns))
    for k, (j, s) in enumerate(cols):
        T[j, k] = s
    rows_A = A @ T
    rhs = p.ineq_b - A @ shift
    if extra_rows:
        E = np.zeros((len(extra_rows), ns))
        for r, (k, _) in enumerate(extra_rows):
            E[r, k] = 1.0
        rows_A = np.vstack([rows_A, E])
        rhs = np.concatenate([rhs, [u for _, u in extra_rows]])
    m = rows_A.shape[0]
    std_A = np.hstack([rows_A, np.eye(m)])
    std_c = np.concatenate([p.objective @ T, np.zeros(m)])
    return StandardForm(std_A, rhs, std_c, shift, T, ns, float(p.objective @ shift))


class _Tableau:
    """Dense tableau ``[B^-1 A | B^-1 b]`` with a reduced-cost row at the bottom."""

    def __init__(self, A, b, basis):
        m, N = A.shape
        self.m = m
        self.T = np.zeros((m + 1, N + 1))
        self.T[:m, :N] = A
        self.T[:m, N] = b
        self.basis = list(basis)

    def set_costs(self, c):
        N = self.T.shape[1] - 1
        cb = c[self.basis]
        self.T[-1, :N] = c - cb @ self.T[:-1, :N]
        self.T[-1, N] = -cb @ self.T[:-1, N]

    @property
    def objective(self) -> float:
        return -self.T[-1, -1]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j

    def drop_row(self, r):
        self.T = np.delete(self.T, r, axis=0)
        del self.basis[r]
        self.m -= 1


class _Pivoter:
    """Pricing/ratio rules plus the stall and iteration bookkeeping."""

    def __init__(self, cap, stall_limit, bland=False):
        self.cap = cap
        self.stall_limit = stall_limit
        self.bland = bland
        self.count = 0
        self.history = []

    def run(self, tab: _Tableau, ncols: int) -> tuple[str, int | None]:
        """Pivot until optimal (returns ``(OPTIMAL, None)``) or unbounded
        (returns ``(UNBOUNDED, entering column)``)."""
        best = tab.objective
        stall = 0
        while True:
            d = tab.T[-1, :ncols]
            neg = np.flatnonzero(d < -OPT_TOL)
            if neg.size == 0:
                return OPTIMAL, None
            j = int(neg[0]) if self.bland else int(neg[np.argmin(d[neg])])
            col = tab.T[: tab.m, j]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return UNBOUNDED, j
            ratios = tab.T[rows, -1] / col[rows]
            rmin = ratios.min()
            tied = rows[ratios <= rmin + 1e-12 * max(1.0, abs(rmin))]
            r = int(min(tied, key=lambda i: tab.basis[i]))
            if self.count >= self.cap:
                raise IterationLimit(f"simplex exceeded {self.cap} pivots", iterations=self.count)
            tab.pivot(r, j)
            self.count += 1
            self.history.append((r, j))
            obj = tab.objective
            if obj < best - OPT_TOL * max(1.0, abs(best)):
                best = obj
                stall = 0
            else:
                stall += 1
                if not self.bland and stall >= self.stall_limit:
                    self.bland = True


def _simplex(sf: StandardForm, bland=False) -> tuple[str, np.ndarray | None, np.ndarray | None, _Pivoter]:
    A = sf.A.copy()
    b = sf.b.copy()
    m, N = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    slack0 = sf.n_struct
    art_rows = np.flatnonzero(neg)
    n_art = art_rows.size
    basis = [slack0 + i for i in range(m)]
    if n_art:
        art = np.zeros((m, n_art))
        for k, i in enumerate(art_rows):
            art[i, k] = 1.0
            basis[i] = N + k
        A = np.hstack([A, art])
    piv = _Pivoter(cap=CAP_FACTOR * (m + N), stall_limit=STALL_FACTOR * (m + N), bland=bland)
    tab = _Tableau(A, b, basis)

    def best_iterate():
        x = np.zeros(A.shape[1])
        x[tab.basis] = tab.T[:-1, -1]
        return sf.recover(x[:N])

    try:
        if n_art:
            c1 = np.concatenate([np.zeros(N), np.ones(n_art)])
            tab.set_costs(c1)
            piv.run(tab, N + n_art)
            if tab.objective > FEAS_TOL * max(1.0, float(np.max(np.abs(b), initial=0.0))):
                return INFEASIBLE, None, None, piv
            # drive any remaining artificials out of the basis
            r = 0
            while r < tab.m:
                if tab.basis[r] >= N:
                    row = tab.T[r, :N]
                    cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                    if cand.size:
                        tab.pivot(r, int(cand[np.argmax(np.abs(row[cand]))]))
                        piv.history.append((r, tab.basis[r]))
                    else:
                        tab.drop_row(r)
                        continue
                r += 1
            tab.T = np.delete(tab.T, np.s_[N:N + n_art], axis=1)
        tab.set_costs(sf.c)
        status, enter = piv.run(tab, N)
    except IterationLimit as exc:
        exc.best = best_iterate() if not any(bi >= N for bi in tab.basis) else None
        raise
    if status == UNBOUNDED:
        dx = np.zeros(N)
        dx[enter] = 1.0
        for i, bi in enumerate(tab.basis):
            dx[bi] -= tab.T[i, enter]
        return UNBOUNDED, None, dx, piv
    x = np.zeros(N)
    x[tab.basis] = tab.T[:-1, -1]
    x = _refine(sf, tab.basis, x)
    return OPTIMAL, x, None, piv


def _refine(sf: StandardForm, basis, x):
    """Recompute basic values from the original columns to shed pivoting error."""
    B = sf.A[:, basis]
    try:
        if B.shape[0] == B.shape[1]:
            xb = np.linalg.solve(B, sf.b)
        else:
            xb = np.linalg.lstsq(B, sf.b, rcond=None)[0]
    except np.linalg.LinAlgError:
        return x
    if not np.all(np.isfinite(xb)) or np.any(xb < -1e-7):
        return x
    out = np.zeros_like(x)
    out[basis] = np.maximum(xb, 0.0)
    return out


def _solve_highs(p: LpProblem) -> LpSolution:
    from scipy.optimize import linprog

    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
              for lo, hi in zip(p.lower_bounds, p.upper_bounds)]
    res = linprog(p.objective, A_ub=p.ineq_A if p.n_rows else None, b_ub=p.ineq_b if p.n_rows else None,
                  bounds=bounds, method="highs-ds",
                  options={"primal_feasibility_tolerance": FEAS_TOL,
                           "dual_feasibility_tolerance": OPT_TOL})
    it = int(getattr(res, "nit", 0) or 0)
    if res.status == 0:
        z = np.clip(res.x, p.lower_bounds, p.upper_bounds)
        return LpSolution(OPTIMAL, z, float(p.objective @ z), it)
    if res.status == 2:
        return LpSolution(INFEASIBLE, iterations=it)
    if res.status == 3:
        return LpSolution(UNBOUNDED, iterations=it)
    if res.status == 1:
        raise IterationLimit(f"HiGHS hit its iteration limit: {res.message}", iterations=it)
    raise SolverError(f"HiGHS failed: {res.message}")


def lp_solve(p: LpProblem, backend: str = "simplex", bland: bool = False) -> LpSolution:
    """Solve ``p``.

    ``backend`` is ``"simplex"`` (the dense tableau method in this module) or
    ``"highs"``.  ``bland=True`` uses Bland's rule from the first pivot.
    """
    if backend == "highs":
        return _solve_highs(p)
    if backend != "simplex":
        raise InvalidArgument(f"unknown LP backend {backend!r}")
    sf = lp_standardize(p)
    status, x, dx, piv = _simplex(sf, bland=bland)
    if status == OPTIMAL:
        z = sf.recover(x)
        return LpSolution(OPTIMAL, z, float(p.objective @ z), piv.count, pivots=piv.history)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=piv.count, ray=sf.recover_direction(dx), pivots=piv.history)
    return LpSolution(INFEASIBLE, iterations=piv.count, pivots=piv.history)


def _fmt(v: float) -> str:
    return repr(float(v))


def dump_problem(p: LpProblem) -> str:
    """Plain-text rendering: objective line, one constraint per line, bounds."""
    A = p.dense_A()
    lines = [f"# lp vars={p.n_vars} rows={p.n_rows}",
             "minimize " + " ".join(_fmt(v) for v in p.objective)]
    for i in range(p.n_rows):
        lines.append("row " + " ".join(_fmt(v) for v in A[i]) + " <= " + _fmt(p.ineq_b[i]))
    lines.append("lower " + " ".join(_fmt(v) for v in p.lower_bounds))
    lines.append("upper " + " ".join(_fmt(v) for v in p.upper_bounds))
    return "\n".join(lines) + "\n"


def load_problem(text: str) -> LpProblem:
    c = None
    rows, rhs, lo, hi = [], [], None, None
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head == "minimize":
            c = [float(t) for t in rest.split()]
        elif head == "row":
            lhs, _, r = rest.partition(" <= ")
            rows.append([float(t) for t in lhs.split()])
            rhs.append(float(r))
        elif head == "lower":
            lo = [float(t) for t in rest.split()]
        elif head == "upper":
            hi = [float(t) for t in rest.split()]
        else:
            raise InvalidArgument(f"unrecognised line in LP dump: {line[:40]!r}")
    if c is None:
        raise InvalidArgument("LP dump has no objective line")
    A = np.array(rows, dtype=float).reshape(len(rows), len(c))
    return LpProblem(c, A, rhs, lo, hi)
