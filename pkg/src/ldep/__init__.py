"""Linear dilation-erosion perceptron: max-affine difference classifiers trained by penalty CCP."""

from .ccp import (LabeledData, TrainConfig, TrainReport, encode_labels, hinge_objective, init_params,
                  train_dep, train_ldep, train_morph_perceptron)
from .errors import InvalidArgument, InvalidData, IterationLimit, LdepError, SolverError
from .lp import LpProblem, LpSolution, lp_solve, lp_standardize
from .morph import (DepModel, LabelMap, LDepModel, MaxAffine, MorphPerceptron, dep_tau, dilation,
                    erosion, ldep_tau, ldep_tau_convex_form, max_affine_eval, morph_decision, predict)

__version__ = "0.1.0"

__all__ = [
    "DepModel", "InvalidArgument", "InvalidData", "IterationLimit", "LDepModel", "LabelMap",
    "LabeledData", "LdepError", "LpProblem", "LpSolution", "MaxAffine", "MorphPerceptron",
    "SolverError", "TrainConfig", "TrainReport", "dep_tau", "dilation", "encode_labels", "erosion",
    "hinge_objective", "init_params", "ldep_tau", "ldep_tau_convex_form", "lp_solve",
    "lp_standardize", "max_affine_eval", "morph_decision", "predict", "train_dep", "train_ldep",
    "train_morph_perceptron",
]
