"""Penalty convex-concave training of max-affine difference classifiers.

Each sample contributes a difference-of-convex margin constraint

    negative:  max_i p_i(x) + 1 <= max_j q_j(x) + xi + s
    positive:  max_j q_j(x) + 1 <= max_i p_i(x) + xi + s

where ``p`` and ``q`` are the affine pieces of the two max-affine blocks.  The
right-hand maximum is replaced by its active piece at the current iterate,
which turns every constraint into a family of linear rows, and the resulting
LP is solved.  The slack ``s`` is priced by a penalty weight that grows each
iteration, so infeasible starting points are allowed.

The l-DEP frees all of W, c, M, d.  DEP and the single-operator perceptrons
are the same loop with some blocks frozen; see :class:`Parameterization`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument, InvalidData, SolverError
from .lp import OPTIMAL, LpProblem, lp_solve
from .morph import DepModel, LabelMap, LDepModel, MorphPerceptron

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max_iter"
SUBPROBLEM_FAILED = "subproblem_failed"

# dense tableau size (rows * columns) above which "auto" hands LPs to HiGHS
AUTO_SIMPLEX_LIMIT = 400_000


@dataclass(frozen=True)
class TrainConfig:
    r1: int = 10
    r2: int = 10
    max_ccp_iter: int = 100
    penalty_init: float = 0.005
    penalty_growth: float = 1.2
    penalty_max: float = 1e8
    tol_objective: float = 1e-5
    tol_slack: float = 1e-5
    seed: int = 0
    restarts: int = 5
    init_scale: float = 1.0
    param_bound: float = 1e3
    lp_backend: str = "auto"

    def __post_init__(self):
        if self.r1 < 1 or self.r2 < 1:
            raise InvalidArgument("r1 and r2 must be >= 1")
        if self.max_ccp_iter < 1 or self.restarts < 1:
            raise InvalidArgument("max_ccp_iter and restarts must be >= 1")
        if not self.penalty_init > 0 or not self.penalty_growth > 1:
            raise InvalidArgument("penalty_init must be > 0 and penalty_growth > 1")
        if self.penalty_init > self.penalty_max:
            raise InvalidArgument("penalty_init exceeds penalty_max")
        if not (self.tol_objective > 0 and self.tol_slack > 0):
            raise InvalidArgument("tolerances must be positive")
        if not (self.init_scale > 0 and self.param_bound > 0):
            raise InvalidArgument("init_scale and param_bound must be positive")
        if self.lp_backend not in ("auto", "simplex", "highs"):
            raise InvalidArgument(f"unknown lp_backend {self.lp_backend!r}")


@dataclass
class TrainReport:
    iterations: int = 0
    objective_history: list = field(default_factory=list)
    hinge_history: list = field(default_factory=list)
    slack_history: list = field(default_factory=list)
    penalty_history: list = field(default_factory=list)
    status: str = MAX_ITER
    best_restart: int = 0
    restart_hinges: list = field(default_factory=list)
    restart_status: list = field(default_factory=list)
    param_history: list | None = None

    def to_table(self) -> str:
        lines = [f"# status={self.status} best_restart={self.best_restart} iterations={self.iterations}",
                 f"{'iter':>5} {'hinge':>14} {'slack':>14} {'objective':>14}"]
        for t, (h, s, o) in enumerate(zip(self.hinge_history, self.slack_history, self.objective_history), 1):
            lines.append(f"{t:>5} {h:>14.8g} {s:>14.8g} {o:>14.8g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LabeledData:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise InvalidArgument(f"X must be a non-empty matrix, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise InvalidArgument("y must have one entry per row of X")
        if not np.all(np.isin(y, (-1, 1))):
            raise InvalidArgument("y entries must be -1 or +1")
        if not np.all(np.isfinite(X)):
            raise InvalidData("X contains missing or non-finite values; impute first")
        y = y.astype(int)
        if not (np.any(y == 1) and np.any(y == -1)):
            raise InvalidData("both classes must be present")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def counts(self) -> dict:
        return {1: int(np.sum(self.y == 1)), -1: int(np.sum(self.y == -1))}


def encode_labels(raw_labels, positive_label):
    """Map class names to +-1 with ``positive_label`` as +1."""
    classes = sorted(set(raw_labels), key=str)
    if len(classes) != 2:
        raise InvalidArgument(f"expected exactly two classes, found {len(classes)}: {classes[:5]}")
    if positive_label not in classes:
        raise InvalidArgument(f"positive label {positive_label!r} not among classes {classes}")
    negative = classes[0] if classes[1] == positive_label else classes[1]
    labels = LabelMap(positive_label, negative)
    y = np.array([1 if v == positive_label else -1 for v in raw_labels], dtype=int)
    return y, labels


# -- parameterisation ----------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """Affine pieces ``v_i(x) = sum_f x_f theta[lin[i, f]] + off_coef theta[off[i]] + F[i] . x + f0[i]``.

    ``lin`` / ``off`` are index arrays into the free parameter vector, or None
    when that part of the block is frozen.
    """

    rows: int
    lin: np.ndarray | None
    off: np.ndarray | None
    off_coef: float
    F: np.ndarray
    f0: np.ndarray

    def values(self, theta, X):
        v = X @ self.F.T + self.f0
        if self.lin is not None:
            v = v + X @ theta[self.lin].T
        if self.off is not None:
            v = v + self.off_coef * theta[self.off]
        return v

    def terms(self, X, rows):
        """Sparse linear forms for pieces ``rows[q]`` evaluated at samples ``X[q]``.

        Returns (cols, vals, const) with cols/vals of shape (q, nnz).
        """
        q = rows.shape[0]
        cols, vals = [], []
        if self.lin is not None:
            cols.append(self.lin[rows])
            vals.append(X)
        if self.off is not None:
            cols.append(self.off[rows][:, None])
            vals.append(np.full((q, 1), self.off_coef))
        const = np.einsum("qf,qf->q", X, self.F[rows]) + self.f0[rows]
        if cols:
            return np.hstack(cols), np.hstack(vals), const
        return np.zeros((q, 0), dtype=int), np.zeros((q, 0)), const


@dataclass(frozen=True)
class Parameterization:
    kind: str
    n_theta: int
    pos: Block
    neg: Block
    beta: float | None = None

    def to_arrays(self, theta, n):
        """(W, c, M, d) of the max-affine form for parameter vector ``theta``."""
        def dense(block):
            A = block.F.copy()
            b = block.f0.copy()
            if block.lin is not None:
                A = A + theta[block.lin]
            if block.off is not None:
                b = b + block.off_coef * theta[block.off]
            return A, b
        W, c = dense(self.pos)
        M, d = dense(self.neg)
        return W, c, M, d


def ldep_parameterization(n, r1, r2) -> Parameterization:
    W = np.arange(r1 * n).reshape(r1, n)
    c = r1 * n + np.arange(r1)
    base = r1 * (n + 1)
    M = base + np.arange(r2 * n).reshape(r2, n)
    d = base + r2 * n + np.arange(r2)
    return Parameterization(
        "ldep", base + r2 * (n + 1),
        Block(r1, W, c, 1.0, np.zeros((r1, n)), np.zeros(r1)),
        Block(r2, M, d, 1.0, np.zeros((r2, n)), np.zeros(r2)))


def dep_parameterization(n, beta) -> Parameterization:
    a = np.arange(n)
    b = n + np.arange(n)
    eye = np.eye(n)
    return Parameterization(
        "dep", 2 * n,
        Block(n, None, a, beta, beta * eye, np.zeros(n)),
        Block(n, None, b, beta - 1.0, (beta - 1.0) * eye, np.zeros(n)),
        beta=beta)


def perceptron_parameterization(n, kind) -> Parameterization:
    idx = np.arange(n)
    eye = np.eye(n)
    zero = Block(1, None, None, 0.0, np.zeros((1, n)), np.zeros(1))
    if kind == "dilation":
        return Parameterization(kind, n, Block(n, None, idx, 1.0, eye, np.zeros(n)), zero)
    if kind == "erosion":
        return Parameterization(kind, n, zero, Block(n, None, idx, -1.0, -eye, np.zeros(n)))
    raise InvalidArgument(f"kind must be 'dilation' or 'erosion', got {kind!r}")


def ldep_theta(W, c, M, d):
    return np.concatenate([np.ravel(W), np.ravel(c), np.ravel(M), np.ravel(d)]).astype(float)


def init_params(config: TrainConfig, n: int, restart_index: int):
    """Random (W, c, M, d) for one restart; offsets start at zero."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    rng = np.random.default_rng([config.seed, restart_index])
    scale = config.init_scale / math.sqrt(n)
    W = rng.uniform(-scale, scale, size=(config.r1, n))
    M = rng.uniform(-scale, scale, size=(config.r2, n))
    return W, np.zeros(config.r1), M, np.zeros(config.r2)


def _init_theta(par: Parameterization, config, n, restart):
    if par.kind == "ldep":
        return ldep_theta(*init_params(config, n, restart))
    rng = np.random.default_rng([config.seed, restart])
    scale = config.init_scale / math.sqrt(n)
    return rng.uniform(-scale, scale, size=par.n_theta)


# -- objective pieces ------------------------------------------------------------

def _decision(par, theta, X):
    return par.pos.values(theta, X).max(axis=1) - par.neg.values(theta, X).max(axis=1)


def hinge_objective(model: LDepModel, data: LabeledData) -> float:
    """sum_k max(0, 1 - y_k tau(x_k))."""
    if data.n != model.input_dim:
        raise InvalidArgument(f"model expects {model.input_dim} features, data has {data.n}")
    tau = model.decision_function(data.X)
    return float(np.sum(np.maximum(0.0, 1.0 - data.y * tau)))


def margin_violations(par, theta, data: LabeledData):
    """1 - y_k tau(x_k): the linearised violation at the linearisation point itself."""
    return 1.0 - data.y * _decision(par, theta, data.X)


def penalized_at_point(par, theta, data, penalty) -> float:
    """Penalised objective of ``theta`` in the LP convexified at ``theta``.

    Each violated sample costs ``min(1, penalty)`` per unit: the cheaper of
    the hinge variable and the penalty slack absorbs it.
    """
    g = np.maximum(margin_violations(par, theta, data), 0.0)
    return float(min(1.0, penalty) * g.sum())


@dataclass(frozen=True)
class Subproblem:
    lp: LpProblem
    n_theta: int
    m: int

    def split(self, z):
        k = self.n_theta
        m = self.m
        return z[:k], z[k:k + m], z[k + m:k + 2 * m], z[k + 2 * m:k + 3 * m]

    def point(self, theta, xi, s):
        """Full LP vector for given parameters and slacks, with h = max(xi, 0)."""
        return np.concatenate([theta, xi, np.maximum(xi, 0.0), s])


def build_subproblem(par: Parameterization, theta, data: LabeledData, penalty: float,
                     param_bound: float = 1e3) -> Subproblem:
    """Linearise every margin constraint at ``theta`` and assemble the LP.

    Variable order: theta, xi (free), h (>= 0), s (>= 0).  Rows: the margin
    families (negatives first, then positives, sample order within each),
    followed by one ``xi_k - h_k <= 0`` row per sample.
    """
    if not penalty > 0:
        raise InvalidArgument("penalty must be positive")
    X, y = data.X, data.y
    m, nt = data.m, par.n_theta
    nvar = nt + 3 * m
    xi0, s0 = nt, nt + 2 * m
    row_cols, row_vals, row_rhs, row_sample = [], [], [], []

    def family(samples, big: Block, small: Block):
        # rows: big_i(theta) + 1 <= small_{active}(theta) + xi_k + s_k  for every i
        if samples.size == 0:
            return
        Xs = X[samples]
        active = np.argmax(small.values(theta, Xs), axis=1)
        r = big.rows
        k_rep = np.repeat(samples, r)
        X_rep = np.repeat(Xs, r, axis=0)
        i_rep = np.tile(np.arange(r), samples.size)
        bc, bv, bconst = big.terms(X_rep, i_rep)
        sc, sv, sconst = small.terms(X_rep, np.repeat(active, r))
        cols = np.hstack([bc, sc, (xi0 + k_rep)[:, None], (s0 + k_rep)[:, None]])
        vals = np.hstack([bv, -sv, -np.ones((k_rep.size, 2))])
        row_cols.append(cols)
        row_vals.append(vals)
        row_rhs.append(sconst - bconst - 1.0)
        row_sample.append(k_rep)

    family(np.flatnonzero(y == -1), par.pos, par.neg)
    family(np.flatnonzero(y == 1), par.neg, par.pos)

    n_margin = sum(r.size for r in row_rhs)
    coo_r, coo_c, coo_v = [], [], []
    offset = 0
    for cols, vals in zip(row_cols, row_vals):
        q, w = cols.shape
        coo_r.append(np.repeat(offset + np.arange(q), w))
        coo_c.append(cols.ravel())
        coo_v.append(vals.ravel())
        offset += q
    k = np.arange(m)
    coo_r += [n_margin + k, n_margin + k]
    coo_c += [xi0 + k, nt + m + k]
    coo_v += [np.ones(m), -np.ones(m)]
    A = sp.coo_matrix((np.concatenate(coo_v), (np.concatenate(coo_r), np.concatenate(coo_c))),
                      shape=(n_margin + m, nvar)).tocsr()
    A.eliminate_zeros()
    b = np.concatenate(row_rhs + [np.zeros(m)])
    cost = np.concatenate([np.zeros(nt + m), np.ones(m), np.full(m, float(penalty))])
    lo = np.concatenate([np.full(nt, -param_bound), np.full(m, -np.inf), np.zeros(2 * m)])
    hi = np.concatenate([np.full(nt, param_bound), np.full(3 * m, np.inf)])
    return Subproblem(LpProblem(cost, A, b, lo, hi), nt, m)


def _pick_backend(config: TrainConfig, sub: Subproblem) -> str:
    if config.lp_backend != "auto":
        return config.lp_backend
    lp = sub.lp
    rows = lp.n_rows + sub.n_theta  # box bounds become rows in standard form
    cols = lp.n_vars + sub.m + rows  # free xi are split; one slack per row
    return "simplex" if rows * cols <= AUTO_SIMPLEX_LIMIT else "highs"


# -- the CCP loop ----------------------------------------------------------------

@dataclass
class _Run:
    theta: np.ndarray
    report: TrainReport
    hinge: float


def _ccp_run(par, data, config, theta, keep_params=False, on_subproblem=None) -> _Run:
    rep = TrainReport(param_history=[theta.copy()] if keep_params else None)
    penalty = config.penalty_init
    prev = penalized_at_point(par, theta, data, penalty)
    status = MAX_ITER
    for t in range(config.max_ccp_iter):
        sub = build_subproblem(par, theta, data, penalty, config.param_bound)
        if on_subproblem is not None:
            on_subproblem(sub)
        try:
            sol = lp_solve(sub.lp, backend=_pick_backend(config, sub))
        except SolverError as exc:
            log.warning("subproblem %d failed: %s", t, exc)
            status = SUBPROBLEM_FAILED
            break
        if sol.status != OPTIMAL:
            log.warning("subproblem %d is %s", t, sol.status)
            status = SUBPROBLEM_FAILED
            break
        theta_new, _, _, s = sub.split(sol.z)
        theta = theta_new.copy()
        obj = sol.objective_value
        slack = float(np.sum(s))
        hinge = float(np.sum(np.maximum(margin_violations(par, theta, data), 0.0)))
        rep.objective_history.append(obj)
        rep.slack_history.append(slack)
        rep.hinge_history.append(hinge)
        rep.penalty_history.append(penalty)
        if keep_params:
            rep.param_history.append(theta.copy())
        rep.iterations = t + 1
        if abs(obj - prev) <= config.tol_objective * max(1.0, abs(prev)) and slack <= config.tol_slack:
            status = CONVERGED
            break
        prev = obj
        penalty = min(config.penalty_growth * penalty, config.penalty_max)
    rep.status = status
    hinge = float(np.sum(np.maximum(margin_violations(par, theta, data), 0.0)))
    return _Run(theta, rep, hinge)


def train_parameterized(par, data, config, init=None, keep_params=False, on_subproblem=None):
    """Best-of-restarts CCP over an arbitrary parameterisation; returns (theta, report)."""
    runs = []
    for r in range(config.restarts if init is None else 1):
        theta0 = np.asarray(init, dtype=float) if init is not None else _init_theta(par, config, data.n, r)
        run = _ccp_run(par, data, config, theta0.copy(), keep_params, on_subproblem)
        log.info("%s restart %d: %s after %d iterations, hinge %.6g",
                 par.kind, r, run.report.status, run.report.iterations, run.hinge)
        runs.append(run)
    best = min(range(len(runs)), key=lambda i: (runs[i].hinge, i))
    rep = runs[best].report
    rep.best_restart = best
    rep.restart_hinges = [r.hinge for r in runs]
    rep.restart_status = [r.report.status for r in runs]
    return runs[best].theta, rep


def train_ldep(data: LabeledData, config: TrainConfig, labels: LabelMap | None = None,
               init=None, keep_params=False, on_subproblem=None):
    """Train an l-DEP classifier.  ``init`` optionally fixes (W, c, M, d) for a single run."""
    labels = labels or LabelMap("+1", "-1")
    par = ldep_parameterization(data.n, config.r1, config.r2)
    theta0 = None if init is None else ldep_theta(*init)
    theta, rep = train_parameterized(par, data, config, theta0, keep_params, on_subproblem)
    W, c, M, d = par.to_arrays(theta, data.n)
    return LDepModel.from_arrays(W, c, M, d, labels), rep


def train_dep(data: LabeledData, beta: float, config: TrainConfig, labels: LabelMap | None = None,
              keep_params=False, on_subproblem=None):
    if not 0.0 < beta < 1.0:
        raise InvalidArgument(f"beta must lie strictly between 0 and 1, got {beta}")
    labels = labels or LabelMap("+1", "-1")
    par = dep_parameterization(data.n, beta)
    theta, rep = train_parameterized(par, data, config, None, keep_params, on_subproblem)
    n = data.n
    return DepModel(theta[:n], theta[n:], beta, labels), rep


def train_morph_perceptron(data: LabeledData, kind: str, config: TrainConfig,
                           labels: LabelMap | None = None, keep_params=False, on_subproblem=None):
    labels = labels or LabelMap("+1", "-1")
    par = perceptron_parameterization(data.n, kind)
    theta, rep = train_parameterized(par, data, config, None, keep_params, on_subproblem)
    return MorphPerceptron(theta, kind, labels), rep
