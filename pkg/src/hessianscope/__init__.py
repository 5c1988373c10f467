"""Matrix-free curvature analysis of neural-network loss surfaces.

The package trains small classifiers, extracts extreme eigenpairs of
the loss Hessian through exact Hessian-vector products along training
trajectories, and studies how well local quadratic models of the loss
hold up over time, over finite step ranges, and as step-size advice.
"""

from .analysis import (CurvatureSeries, LineSearchResult, LossProfile,
                       QuadraticFit, SearchGrid, curvature_over_time,
                       directional_loss_profile, improvement_report,
                       optimal_step_search, quadratic_fit)
from .config import ConfigError, RunConfig, load_config
from .data import Dataset, FixedSubset, IdxFormatError, fixed_subset, load_idx, make_blobs
from .eigen import (DenseOracleResult, EigenPair, LinearMap, NonConvergedError,
                    SpectrumReport, dense_eig_oracle, dense_hessian_oracle,
                    dense_map, hessian_map, hessian_spectrum, lanczos_extreme,
                    rayleigh)
from .model import Batch, ModelSpec, forward_loss, init_params, make_loss_operator
from .ndcore import DimensionMismatchError, LossOperator, NonFiniteError
from .negcurve import (LogRow, NegCurveConfig, TrackerState, alternating_update,
                       init_tracker, run_alternating, run_baseline,
                       tracker_step)
from .train import (Checkpoint, RmsPropConfig, Trajectory, TrainerState,
                    init_state, load_trajectory, rmsprop_step, save_trajectory,
                    train)

__version__ = "0.1.0"

__all__ = [
    "Batch", "Checkpoint", "ConfigError", "CurvatureSeries", "Dataset",
    "DenseOracleResult", "DimensionMismatchError", "EigenPair", "FixedSubset",
    "IdxFormatError", "LineSearchResult", "LinearMap", "LogRow",
    "LossOperator", "LossProfile", "ModelSpec", "NegCurveConfig",
    "NonConvergedError", "NonFiniteError", "QuadraticFit", "RmsPropConfig",
    "RunConfig", "SearchGrid", "SpectrumReport", "TrackerState",
    "TrainerState", "Trajectory", "alternating_update", "curvature_over_time",
    "dense_eig_oracle", "dense_hessian_oracle", "dense_map",
    "directional_loss_profile", "fixed_subset", "forward_loss", "hessian_map",
    "hessian_spectrum", "improvement_report", "init_params", "init_state",
    "init_tracker", "lanczos_extreme", "load_config", "load_idx",
    "load_trajectory", "make_blobs", "make_loss_operator",
    "optimal_step_search", "quadratic_fit", "rayleigh", "rmsprop_step",
    "run_alternating", "run_baseline", "save_trajectory", "tracker_step",
    "train",
]
