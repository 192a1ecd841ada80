"""Max-plus / min-plus primitives and the morphological decision functions.

Every classifier in the package reduces to a difference of two max-affine
functions,

    tau(x) = max_i(w_i . x + c_i) - max_j(m_j . x + d_j),

which is what :class:`LDepModel` stores.  The DEP and single-operator
perceptrons keep their own parameterisation for evaluation but can be
converted with :func:`as_ldep`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidData

FORMAT_VERSION = 1


def _vec(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgument(f"{name} must be a non-empty vector, got shape {arr.shape}")
    return arr


def _mat(A, name):
    arr = np.asarray(A, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidArgument(f"{name} must be a non-empty matrix, got shape {arr.shape}")
    return arr


def _same_len(a, x):
    if a.shape != x.shape:
        raise InvalidArgument(f"dimension mismatch: {a.shape[0]} weights vs {x.shape[0]} inputs")


def dilation(a, x) -> float:
    """max_j (a_j + x_j)."""
    a, x = _vec(a, "a"), _vec(x, "x")
    _same_len(a, x)
    return float(np.max(a + x))


def erosion(b, x) -> float:
    """min_j (b_j + x_j)."""
    b, x = _vec(b, "b"), _vec(x, "x")
    _same_len(b, x)
    return float(np.min(b + x))


@dataclass(frozen=True)
class MaxAffine:
    """x -> max over rows of (A[i] . x + b[i])."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = _mat(self.A, "A")
        b = _vec(self.b, "b")
        if b.shape[0] != A.shape[0]:
            raise InvalidArgument(f"offset length {b.shape[0]} != row count {A.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidArgument("MaxAffine entries must be finite")
        A = A.copy()
        b = b.copy()
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def rows(self) -> int:
        return self.A.shape[0]

    @property
    def columns(self) -> int:
        return self.A.shape[1]

    def affine(self, X):
        """Row values for a batch: returns an (m, rows) array."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.columns:
            raise InvalidArgument(f"expected inputs with {self.columns} columns, got shape {X.shape}")
        return X @ self.A.T + self.b


def max_affine_eval(f: MaxAffine, x) -> tuple[float, int]:
    """Value of ``f`` at ``x`` and the smallest row index attaining it."""
    x = _vec(x, "x")
    if x.shape[0] != f.columns:
        raise InvalidArgument(f"dimension mismatch: {f.columns} columns vs input of length {x.shape[0]}")
    # row-by-row dots so the reported value is bit-identical to row . x + offset
    vals = np.array([row @ x for row in f.A]) + f.b
    idx = int(np.argmax(vals))  # argmax returns the first maximiser
    return float(vals[idx]), idx


@dataclass(frozen=True)
class LabelMap:
    """Bijection between the two class names and {+1, -1}."""

    positive_label: str
    negative_label: str

    def __post_init__(self):
        if self.positive_label == self.negative_label:
            raise InvalidArgument("positive and negative labels must differ")

    def sign(self, label) -> int:
        if label == self.positive_label:
            return 1
        if label == self.negative_label:
            return -1
        raise InvalidArgument(f"unknown class {label!r}")

    def label(self, s: int) -> str:
        if s == 1:
            return self.positive_label
        if s == -1:
            return self.negative_label
        raise InvalidArgument(f"sign must be +1 or -1, got {s!r}")

    def swapped(self) -> "LabelMap":
        return LabelMap(self.negative_label, self.positive_label)


@dataclass(frozen=True)
class LDepModel:
    pos: MaxAffine
    neg: MaxAffine
    labels: LabelMap
    kind: str = "ldep"

    def __post_init__(self):
        if self.pos.columns != self.neg.columns:
            raise InvalidArgument(
                f"blocks disagree on input dimension: {self.pos.columns} vs {self.neg.columns}")

    @property
    def input_dim(self) -> int:
        return self.pos.columns

    @property
    def r1(self) -> int:
        return self.pos.rows

    @property
    def r2(self) -> int:
        return self.neg.rows

    @classmethod
    def from_arrays(cls, W, c, M, d, labels: LabelMap, kind="ldep") -> "LDepModel":
        return cls(MaxAffine(W, c), MaxAffine(M, d), labels, kind)

    def decision_function(self, X) -> np.ndarray:
        """tau for every row of ``X``."""
        return self.pos.affine(X).max(axis=1) - self.neg.affine(X).max(axis=1)

    def predict(self, X) -> list:
        tau = self.decision_function(X)
        return [self.labels.positive_label if t >= 0 else self.labels.negative_label for t in tau]


def ldep_tau(model: LDepModel, x) -> float:
    x = _vec(x, "x")
    if x.shape[0] != model.input_dim:
        raise InvalidArgument(f"dimension mismatch: model expects {model.input_dim}, got {x.shape[0]}")
    return max_affine_eval(model.pos, x)[0] - max_affine_eval(model.neg, x)[0]


def ldep_tau_convex_form(beta, R1, R2, a, b, x) -> float:
    """beta * dilation(a, R1 x) + (1 - beta) * erosion(b, R2 x)."""
    if not 0.0 <= beta <= 1.0:
        raise InvalidArgument(f"beta must lie in [0, 1], got {beta}")
    R1, R2 = _mat(R1, "R1"), _mat(R2, "R2")
    a, b, x = _vec(a, "a"), _vec(b, "b"), _vec(x, "x")
    if R1.shape[1] != x.shape[0] or R2.shape[1] != x.shape[0]:
        raise InvalidArgument("matrix column counts must match the input length")
    if a.shape[0] != R1.shape[0] or b.shape[0] != R2.shape[0]:
        raise InvalidArgument("offset lengths must match the matrix row counts")
    return beta * dilation(a, R1 @ x) + (1.0 - beta) * erosion(b, R2 @ x)


def ldep_from_convex_form(beta, R1, R2, a, b, labels: LabelMap) -> LDepModel:
    """W = beta R1, c = beta a, M = (beta - 1) R2, d = (beta - 1) b."""
    R1, R2 = _mat(R1, "R1"), _mat(R2, "R2")
    a, b = _vec(a, "a"), _vec(b, "b")
    return LDepModel.from_arrays(beta * R1, beta * a, (beta - 1.0) * R2, (beta - 1.0) * b, labels)


@dataclass(frozen=True)
class DepModel:
    a: np.ndarray
    b: np.ndarray
    beta: float
    labels: LabelMap

    def __post_init__(self):
        a, b = _vec(self.a, "a"), _vec(self.b, "b")
        _same_len(a, b)
        if not 0.0 <= self.beta <= 1.0:
            raise InvalidArgument(f"beta must lie in [0, 1], got {self.beta}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidArgument("DEP weights must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def dep_tau(model: DepModel, x) -> float:
    return model.beta * dilation(model.a, x) + (1.0 - model.beta) * erosion(model.b, x)


@dataclass(frozen=True)
class MorphPerceptron:
    weights: np.ndarray
    kind: str
    labels: LabelMap

    def __post_init__(self):
        w = _vec(self.weights, "weights")
        if self.kind not in ("dilation", "erosion"):
            raise InvalidArgument(f"kind must be 'dilation' or 'erosion', got {self.kind!r}")
        if not np.all(np.isfinite(w)):
            raise InvalidArgument("weights must be finite")
        object.__setattr__(self, "weights", w)


def morph_decision(model: MorphPerceptron, x) -> float:
    if model.kind == "dilation":
        return dilation(model.weights, x)
    return erosion(model.weights, x)


def hard_limiter(v: float) -> int:
    return 1 if v >= 0 else -1


def predict(decision_value, labels: LabelMap):
    """Class name for a decision value; zero goes to the positive class."""
    v = float(decision_value)
    if not math.isfinite(v):
        raise InvalidArgument(f"decision value must be finite, got {decision_value!r}")
    return labels.label(hard_limiter(v))


def as_ldep(model) -> LDepModel:
    """Rewrite any of the morphological classifiers as a max-affine difference."""
    if isinstance(model, LDepModel):
        return model
    if isinstance(model, DepModel):
        n = model.a.shape[0]
        eye = np.eye(n)
        beta = model.beta
        return LDepModel.from_arrays(beta * eye, beta * model.a,
                                     (beta - 1.0) * eye, (beta - 1.0) * model.b,
                                     model.labels, kind="dep")
    if isinstance(model, MorphPerceptron):
        n = model.weights.shape[0]
        zero = (np.zeros((1, n)), np.zeros(1))
        if model.kind == "dilation":
            return LDepModel.from_arrays(np.eye(n), model.weights, *zero, model.labels, kind="dilation")
        # min(b + x) = -max(-x - b)
        return LDepModel.from_arrays(*zero, -np.eye(n), -model.weights, model.labels, kind="erosion")
    raise InvalidArgument(f"cannot convert {type(model).__name__} to an l-DEP model")


# -- serialisation -----------------------------------------------------------

def model_to_dict(model: LDepModel, extra: dict | None = None) -> dict:
    doc = {
        "version": FORMAT_VERSION,
        "kind": model.kind,
        "input_dim": model.input_dim,
        "r1": model.r1,
        "r2": model.r2,
        "W": model.pos.A.tolist(),
        "c": model.pos.b.tolist(),
        "M": model.neg.A.tolist(),
        "d": model.neg.b.tolist(),
        "positive_label": model.labels.positive_label,
        "negative_label": model.labels.negative_label,
    }
    if extra:
        doc.update(extra)
    return doc


def model_from_dict(doc: dict) -> LDepModel:
    try:
        version = doc["version"]
        if version != FORMAT_VERSION:
            raise InvalidData(f"unsupported model format version {version!r}")
        model = LDepModel.from_arrays(doc["W"], doc["c"], doc["M"], doc["d"],
                                      LabelMap(doc["positive_label"], doc["negative_label"]),
                                      kind=doc.get("kind", "ldep"))
    except KeyError as exc:
        raise InvalidData(f"model document lacks field {exc.args[0]!r}") from None
    if model.input_dim != doc["input_dim"] or model.r1 != doc["r1"] or model.r2 != doc["r2"]:
        raise InvalidData("model document header disagrees with its matrices")
    return model


def dumps_model(model: LDepModel, extra: dict | None = None) -> str:
    # json emits repr() floats, which round-trip exactly
    return json.dumps(model_to_dict(model, extra), indent=1) + "\n"


def loads_model(text: str) -> LDepModel:
    return model_from_dict(json.loads(text))
