"""Time-varying-parameter regressions and VARs with shrink-then-sparsify inference."""

__version__ = "0.1.0"

from .dist_kernels import RngStream
from .errors import (
    DataError,
    NumericalError,
    ParameterDomainError,
    ShapeError,
    UsageError,
)
from .experiments import (
    DgpConfig,
    ForecastResult,
    ForecastTask,
    McmcProfile,
    PROFILES,
    apply_transform,
    gaussian_iid_benchmark,
    generate_dgp,
    generate_var_dgp,
    run_forecast_exercise,
    run_simulation_study,
    summarize_regression_fit,
    summarize_var_fit,
)
from .savs import PipTable, SparsifiedDraw, block_labels, compute_pips, savs_sparsify
from .state_space import NcParamVector, StateTrajectory, build_design, ffbs
from .stochvol import SvState, sv_forecast, sv_sweep
from .tvp_models import (
    DrawRecord,
    PRIOR_KINDS,
    RegressionSpec,
    VAR_PRIOR_KINDS,
    VarSpec,
    fit_tvp_regression,
    fit_tvp_var,
    reconstruct_beta_path,
    reconstruct_cov_matrices,
)

__all__ = [
    "DataError",
    "DgpConfig",
    "DrawRecord",
    "ForecastResult",
    "ForecastTask",
    "McmcProfile",
    "NcParamVector",
    "NumericalError",
    "PRIOR_KINDS",
    "PROFILES",
    "ParameterDomainError",
    "PipTable",
    "RegressionSpec",
    "RngStream",
    "ShapeError",
    "SparsifiedDraw",
    "StateTrajectory",
    "SvState",
    "UsageError",
    "VAR_PRIOR_KINDS",
    "VarSpec",
    "__version__",
    "apply_transform",
    "block_labels",
    "build_design",
    "compute_pips",
    "ffbs",
    "fit_tvp_regression",
    "fit_tvp_var",
    "gaussian_iid_benchmark",
    "generate_dgp",
    "generate_var_dgp",
    "reconstruct_beta_path",
    "reconstruct_cov_matrices",
    "run_forecast_exercise",
    "run_simulation_study",
    "savs_sparsify",
    "summarize_regression_fit",
    "summarize_var_fit",
    "sv_forecast",
    "sv_sweep",
]
