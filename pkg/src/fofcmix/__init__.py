"""Find One Factor Clusters on mixed continuous and discrete data.

Clusters measured variables into pure 1-factor measurement models with
vanishing-tetrad tests, and provides the analytic machinery for checking
how well discretized Gaussian data keeps those constraints.
"""

__version__ = "0.1.0"

from .bvn import bvn_cdf, bvn_pdf, bvn_rect_prob
from .correlation import mixed_matrix, pearson_matrix, polychoric, spearman_matrix, tetrachoric
from .data import Column, CorrelationMatrix, Dataset, read_dataset, write_dataset
from .discrete import discrete_cor, discrete_cov_exact
from .errors import (
    DegenerateDistributionError,
    DomainError,
    EstimationError,
    FofcError,
    PreconditionError,
    TestUndefinedError,
)
from .evaluation import Condition, batch_score, final_precision, final_recall
from .fofc import Clustering, fofc, fofc_from_corr
from .simulate import MeasurementModelSpec, discretize, implied_covariance, random_model, simulate_gaussian
from .tetrad import TetradConfig, delta_test, wishart_test

__all__ = [
    "Clustering", "Column", "Condition", "CorrelationMatrix", "Dataset",
    "DegenerateDistributionError", "DomainError", "EstimationError", "FofcError",
    "MeasurementModelSpec", "PreconditionError", "TestUndefinedError", "TetradConfig",
    "batch_score", "bvn_cdf", "bvn_pdf", "bvn_rect_prob", "delta_test", "discrete_cor",
    "discrete_cov_exact", "discretize", "final_precision", "final_recall", "fofc",
    "fofc_from_corr", "implied_covariance", "mixed_matrix", "pearson_matrix", "polychoric",
    "random_model", "read_dataset", "simulate_gaussian", "spearman_matrix", "tetrachoric",
    "wishart_test", "write_dataset",
]
