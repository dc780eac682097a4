"""2:4 structured-sparsity pruning of dense weight matrices.

Layerwise one-shot pruning that minimizes the reconstruction loss
Tr((W - W*) H (W - W*)^T) subject to every aligned group of 4 weights
keeping at most 2 nonzeros. The main method runs proximal gradient descent
with a cellwise triple-product penalty whose prox is solved exactly through
three convex cases; score-based (wanda) and OBS-style (sparsegpt) pruners,
closed-form shrinkage penalties, masked-gradient post-optimization, and
exact brute-force references are included for comparison.
"""

from .baselines import (
    brute_force_mask_search,
    simple_reg_prune,
    sparsegpt_prune,
    wanda_prune,
    wanda_scores,
)
from .cells import (
    CellConvergenceError,
    KktReport,
    ProxResult,
    SignedPerm,
    brute_force_prox_oracle,
    cell_objective,
    hessian_f,
    hessian_g,
    inv_pos_sort,
    kkt_check,
    lambda_thresholds,
    pos_sort,
    prox_cells,
    prox_enumerate,
    prox_full,
    prox_simple,
    regularizer_rNM,
    solve_case_gd,
    solve_case_ipm,
)
from .harness import (
    BENCH_METHODS,
    BenchRow,
    SyntheticSpec,
    benchmark_csv,
    gen_synthetic,
    reg_path_csv,
    reg_path_sweep,
    run_benchmark,
    toy_problem,
)
from .linalg import (
    hessian_from_data,
    is_psd,
    layer_loss,
    loss_gradient,
    max_eigenvalue,
    precondition,
    unprecondition,
)
from .matio import (
    load_matrix,
    read_matrix,
    read_matrix_csv,
    save_matrix,
    write_matrix,
    write_matrix_csv,
)
from .pruner import (
    LambdaSchedule,
    PruneConfig,
    PruneReport,
    clamp_top2,
    is_24_sparse,
    mask_of,
    masked_gd,
    prune_prox,
    schedule_lambda,
)
from .rng import SplitMix64

__all__ = [
    "BENCH_METHODS",
    "BenchRow",
    "CellConvergenceError",
    "KktReport",
    "LambdaSchedule",
    "ProxResult",
    "PruneConfig",
    "PruneReport",
    "SignedPerm",
    "SplitMix64",
    "SyntheticSpec",
    "benchmark_csv",
    "brute_force_mask_search",
    "brute_force_prox_oracle",
    "cell_objective",
    "clamp_top2",
    "gen_synthetic",
    "hessian_f",
    "hessian_from_data",
    "hessian_g",
    "inv_pos_sort",
    "is_24_sparse",
    "is_psd",
    "kkt_check",
    "lambda_thresholds",
    "layer_loss",
    "load_matrix",
    "loss_gradient",
    "mask_of",
    "masked_gd",
    "max_eigenvalue",
    "pos_sort",
    "precondition",
    "prox_cells",
    "prox_enumerate",
    "prox_full",
    "prox_simple",
    "prune_prox",
    "read_matrix",
    "read_matrix_csv",
    "reg_path_csv",
    "reg_path_sweep",
    "regularizer_rNM",
    "run_benchmark",
    "save_matrix",
    "schedule_lambda",
    "simple_reg_prune",
    "solve_case_gd",
    "solve_case_ipm",
    "sparsegpt_prune",
    "toy_problem",
    "unprecondition",
    "wanda_prune",
    "wanda_scores",
    "write_matrix",
    "write_matrix_csv",
]
