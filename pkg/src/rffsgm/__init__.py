"""Random-Fourier-feature SVM trained by SGM, with stability measurements.

The SGM inner loop runs in a compiled extension when one is built; otherwise
a pure-Python kernel with the same contract is used. ``rffsgm.BACKEND``
names the active one.
"""

from ._backend import BACKEND
from .data import Dataset, SplitSpec, load_csv, load_dataset, load_benchmark, load_libsvm, split, standardize
from .errors import ConfigurationError, DataFormatError, DomainError, TrainingDivergence
from .loss import HUBER_HINGE, LossConstants, huber_hinge, huber_hinge_grad_w, regularized_objective
from .rff import FourierFeatureMap, KernelParams, derived_sigma_p, exact_kernel, median_heuristic_gamma, sample_map
from .sgm import Schedule, SgmConfig, SgmModel, empirical_risk, predict, resolve_eta, train

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigurationError",
    "DataFormatError",
    "Dataset",
    "DomainError",
    "FourierFeatureMap",
    "HUBER_HINGE",
    "KernelParams",
    "LossConstants",
    "Schedule",
    "SgmConfig",
    "SgmModel",
    "SplitSpec",
    "TrainingDivergence",
    "derived_sigma_p",
    "empirical_risk",
    "exact_kernel",
    "huber_hinge",
    "huber_hinge_grad_w",
    "load_csv",
    "load_dataset",
    "load_libsvm",
    "load_benchmark",
    "median_heuristic_gamma",
    "predict",
    "regularized_objective",
    "resolve_eta",
    "sample_map",
    "split",
    "standardize",
    "train",
]
