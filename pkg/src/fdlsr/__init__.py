"""Fisher discriminative least squares regression (FDLSR) and LSR/DLSR baselines."""

__version__ = "0.1.0"

from .classify import ProjectedGallery, accuracy, nn_predict, project
from .dataset import (
    Dataset,
    DatasetError,
    build_label_matrix,
    load_csv,
    normalize_columns,
    random_projection,
    split_per_class,
    synth_blobs,
)
from .evaluation import GridResult, TrialReport, grid_search, margin_stats, run_trials
from .fisher import MeanMatrices, fisher_gradient, fisher_value, mean_matrices
from .solvers import (
    RelaxedTargets,
    SolverConfig,
    SolverError,
    SolverTrace,
    build_direction_matrix,
    fit_dlsr,
    fit_fdlsr,
    fit_lsr,
    objective,
    ridge_kernel,
    update_q,
    update_s,
    update_t,
)
