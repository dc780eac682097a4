"""Reference pruners to compare against.

wanda_prune scores each weight by |w| times the root mean squared activation
of its input channel and keeps the top 2 per cell; it is exactly optimal when
the input features are uncorrelated (diagonal hessian). sparsegpt_prune is an
OBS-style reconstruction: it walks the matrix in 4-column blocks left to
right, prunes the 2 lowest-error weights per cell, and compensates the still
unfrozen weights through the inverse hessian of the remaining columns.
simple_reg_prune runs the proximal pipeline with the closed-form
hard-threshold / soft-threshold / shrinkage cell proxes. The brute-force mask
search is the exact (exponential) reference for tiny instances.
"""

from itertools import combinations, product

import numpy as np

from .cells import prox_simple_cells
from .pruner import LambdaSchedule, PruneConfig, mask_of, proximal_prune_loop


def wanda_scores(W_star: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Score matrix |W*_ij| * sqrt(H_jj)."""
    diag = np.maximum(np.diag(np.asarray(H, dtype=np.float64)), 0.0)
    return np.abs(np.asarray(W_star, dtype=np.float64)) * np.sqrt(diag)[None, :]


def _prune_two_smallest(values: np.ndarray) -> np.ndarray:
    """Per cell, return a 0/1 keep-mask zeroing the 2 smallest values.

    Stable ties: among equal values the lowest column index is pruned first.
    """
    cells = values.reshape(-1, 4)
    order = np.argsort(cells, axis=1, kind="stable")
    keep = np.ones_like(cells)
    np.put_along_axis(keep, order[:, :2], 0.0, axis=1)
    return keep.reshape(values.shape)


def wanda_prune(W_star: np.ndarray, H: np.ndarray):
    """Keep the 2 highest-scoring weights per cell at their original values."""
    W_star = np.asarray(W_star, dtype=np.float64)
    if W_star.shape[1] % 4 != 0:
        raise ValueError(f"columns must be divisible by 4, got {W_star.shape[1]}")
    mask = _prune_two_smallest(wanda_scores(W_star, H))
    return W_star * mask, mask


def sparsegpt_prune(W_star: np.ndarray, H: np.ndarray, damp: float = None):
    """OBS-style block pruner.

    Processes 4-column blocks left to right. Within a block, each row prunes
    the 2 columns with the smallest error w_q^2 / [Hinv]_qq, where Hinv is
    the inverse of the (damped) hessian restricted to the not-yet-frozen
    columns, and distributes the removed weights onto those columns.

    Damping defaults to 1e-8 * mean(diag(H)): enough to invert a singular
    hessian, small enough that it never perturbs the selection (a visible
    damp inflates the scores of weak channels and can flip selections even
    on diagonal hessians, where this pruner must match score pruning).
    """
    W = np.array(W_star, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    d = W.shape[1]
    if d % 4 != 0:
        raise ValueError(f"columns must be divisible by 4, got {d}")
    if damp is None:
        damp = 1e-8 * float(np.mean(np.diag(H)))
    Hd = H + damp * np.eye(d)

    for b in range(0, d, 4):
        rest = np.arange(b, d)
        try:
            Hinv = np.linalg.inv(Hd[np.ix_(rest, rest)])
        except np.linalg.LinAlgError as exc:
            raise ValueError("singular damped hessian") from exc
        inv_diag = np.diag(Hinv)[:4]
        block = slice(b, b + 4)
        scores = W[:, block] ** 2 / inv_diag[None, :]
        prune_local = np.argsort(scores, axis=1, kind="stable")[:, :2]
        for r in range(W.shape[0]):
            q = np.sort(prune_local[r])  # local indices in the block
            wq = W[r, b + q]
            # exact compensation for jointly zeroing the pair
            sub = Hinv[np.ix_(q, q)]
            coef = np.linalg.solve(sub, wq)
            W[r, rest] -= Hinv[:, q] @ coef
            W[r, b + q] = 0.0  # exact zeros
    mask = mask_of(W, 0.0)
    return W, mask


def simple_reg_prune(W_star, H, kind, sched=None, cfg=None):
    """Proximal pipeline with the closed-form R0/R1/R2 cell proxes.

    R2 only shrinks, so it always runs out the iteration budget and is
    finished by clamping each cell to its two largest entries.
    """
    if kind not in ("R0", "R1", "R2"):
        raise ValueError(f"unknown kind {kind!r}")
    sched = sched or LambdaSchedule()
    cfg = cfg or PruneConfig()

    def cell_prox(cells, lam):
        return prox_simple_cells(cells, lam, kind)

    return proximal_prune_loop(W_star, H, sched, cfg, cell_prox)


def _masked_least_squares_loss(w_star, H, keep):
    """Exact minimum loss for one row under a fixed support."""
    K = np.flatnonzero(keep)
    target = H[K, :] @ w_star
    HKK = H[np.ix_(K, K)]
    try:
        wk = np.linalg.solve(HKK, target)
    except np.linalg.LinAlgError:
        wk, *_ = np.linalg.lstsq(HKK, target, rcond=None)
    w = np.zeros_like(w_star)
    w[K] = wk
    delta = w - w_star
    return float(delta @ H @ delta), w


def brute_force_mask_search(W_star: np.ndarray, H: np.ndarray):
    """Exhaustive search over all valid 2:4 masks with exact refits.

    Enumerates 6^(cols/4) masks per row, solves the support-restricted least
    squares for each, and returns (best_mask, total_best_loss). Only viable
    for tiny widths, hence the cols/4 <= 8 guard.
    """
    W_star = np.asarray(W_star, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    d = W_star.shape[1]
    if d % 4 != 0:
        raise ValueError(f"columns must be divisible by 4, got {d}")
    n_cells = d // 4
    if n_cells > 8:
        raise ValueError(f"instance too large: {n_cells} cells per row (max 8)")

    cell_patterns = []
    for kept in combinations(range(4), 2):
        pat = np.zeros(4)
        pat[list(kept)] = 1.0
        cell_patterns.append(pat)

    best_mask = np.zeros_like(W_star)
    total = 0.0
    for r in range(W_star.shape[0]):
        best_loss, best_keep = np.inf, None
        for combo in product(cell_patterns, repeat=n_cells):
            keep = np.concatenate(combo)
            loss, _ = _masked_least_squares_loss(W_star[r], H, keep)
            if loss < best_loss:
                best_loss, best_keep = loss, keep
        best_mask[r] = best_keep
        total += best_loss
    return best_mask, total
