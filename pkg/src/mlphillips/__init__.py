"""Mittag-Leffler function fits of the unemployment/inflation relation.

Modules: special_functions (gamma, Pochhammer, Mittag-Leffler series),
dataio (CSV records and binning), models, optimizer (Nelder-Mead),
fitting (pipeline and synthetic demos), cli.
"""

from .dataio import AveragedPoint, DataSet, EconRecord, bin_average, embedded_datasets, load_dataset
from .fitting import FitReport, evaluate_published, fit_model, reproduce_tables, synthetic_demo
from .models import ExpParams, MLModelParams, ModelKind, PowerParams
from .optimizer import OptimResult, SimplexConfig, multi_start, nelder_mead
from .special_functions import (
    DEFAULT_POLICY,
    MLTwoParams,
    PrabhakarParams,
    SeriesPolicy,
    ShuklaParams,
    ml_one,
    ml_prabhakar,
    ml_shukla,
    ml_two,
)

__version__ = "0.1.0"
