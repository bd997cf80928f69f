"""GRNN forecasting and consensus Bayesian-network analysis of the
World Happiness panel."""

from . import variables
from .bayesnet import (
    CategoricalCpt,
    Dag,
    DiscreteBayesNet,
    bic_score,
    family_score,
    fit_cpts,
    joint_probability,
)
from .discretize import (
    DiscretizationScheme,
    DiscreteTable,
    Level,
    bin_of,
    default_scheme,
    discretize,
)
from .grnn import GrnnModel, fit, predict, predict_batch, select_sigma
from .inference import Posterior, enumerate_query, query, query_sweep
from .linear import LinearModel, fit_linear, select_ridge_lambda
from .metrics import MetricReport, score
from .pipeline import (
    FeatureTable,
    RawTable,
    SplitSpec,
    filter_countries,
    impute,
    load_raw,
    split,
)
from .structure import (
    ArcStrengthTable,
    bootstrap_learn,
    consensus,
    hill_climb,
    threshold_arcs,
)

__version__ = "0.1.0"

__all__ = [
    "ArcStrengthTable",
    "CategoricalCpt",
    "Dag",
    "DiscreteBayesNet",
    "DiscretizationScheme",
    "DiscreteTable",
    "FeatureTable",
    "GrnnModel",
    "Level",
    "LinearModel",
    "MetricReport",
    "Posterior",
    "RawTable",
    "SplitSpec",
    "bic_score",
    "bin_of",
    "bootstrap_learn",
    "consensus",
    "default_scheme",
    "discretize",
    "enumerate_query",
    "family_score",
    "filter_countries",
    "fit",
    "fit_cpts",
    "fit_linear",
    "hill_climb",
    "impute",
    "joint_probability",
    "load_raw",
    "predict",
    "predict_batch",
    "query",
    "query_sweep",
    "score",
    "select_ridge_lambda",
    "select_sigma",
    "split",
    "threshold_arcs",
    "variables",
]
