"""Dense matrix primitives for layerwise pruning.

Weight matrices are plain float64 ndarrays of shape (d_out, d_in); the
second-moment matrix of the layer inputs ("hessian") is a symmetric PSD
(d_in, d_in) ndarray. Everything here is a pure function of its inputs.
"""

import numpy as np


def hessian_from_data(X: np.ndarray) -> np.ndarray:
    """Input second-moment matrix X @ X.T / n for calibration inputs X (d_in, n)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError("no samples")
    H = X @ X.T / X.shape[1]
    return 0.5 * (H + H.T)


def _check_shapes(W, W_star, H):
    if W.shape != W_star.shape:
        raise ValueError(f"weight shape mismatch: {W.shape} vs {W_star.shape}")
    if H.shape != (W.shape[1], W.shape[1]):
        raise ValueError(f"hessian shape {H.shape} does not match {W.shape[1]} columns")


def layer_loss(W: np.ndarray, W_star: np.ndarray, H: np.ndarray) -> float:
    """Reconstruction loss Tr((W - W*) H (W - W*)^T)."""
    W = np.asarray(W, dtype=np.float64)
    W_star = np.asarray(W_star, dtype=np.float64)
    _check_shapes(W, W_star, H)
    delta = W - W_star
    return float(np.sum((delta @ H) * delta))


def loss_gradient(W: np.ndarray, W_star: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Gradient of layer_loss in W: 2 (W - W*) H."""
    W = np.asarray(W, dtype=np.float64)
    W_star = np.asarray(W_star, dtype=np.float64)
    _check_shapes(W, W_star, H)
    return 2.0 * ((W - W_star) @ H)


def max_eigenvalue(H: np.ndarray, tol: float = 1e-6, max_iter: int = 2000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix.

    Power iteration from the normalized all-ones vector (basis vectors as
    fallback probes if that start lies in the null space), accepted once the
    residual ||Hv - gamma v|| <= tol * gamma certifies the value. A nearly
    degenerate leading pair can make the vector converge arbitrarily slowly,
    so if certification is not reached within max_iter the value comes from
    a dense symmetric eigendecomposition instead. Deterministic either way.
    """
    H = np.asarray(H, dtype=np.float64)
    n = H.shape[0]
    v = np.ones(n) / np.sqrt(n)
    for k in range(n + 1):
        hv = H @ v
        norm = np.linalg.norm(hv)
        if norm > 0.0:
            break
        if k == n:  # H maps every probe to zero
            return 0.0
        v = np.zeros(n)
        v[k] = 1.0
    for _ in range(max_iter):
        v = hv / norm
        hv = H @ v
        gamma = float(v @ hv)
        if np.linalg.norm(hv - gamma * v) <= tol * max(abs(gamma), 1e-300):
            return gamma
        norm = np.linalg.norm(hv)
        if norm == 0.0:
            return 0.0
    return float(np.linalg.eigvalsh(H)[-1])


def is_psd(M: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff the smallest eigenvalue of symmetric M is >= -tol."""
    eigs = np.linalg.eigvalsh(np.asarray(M, dtype=np.float64))
    return bool(eigs[0] >= -tol)


# scale floor for dead input channels: keeps the transform invertible while
# leaving live channels untouched
_SCALE_FLOOR = 1e-8


def precondition(W_star: np.ndarray, H: np.ndarray):
    """Activation-aware rescaling of (W*, H).

    Returns (W_tilde, H_tilde, scales) with W_tilde = W* * diag(H)^{1/2}
    columnwise and H_tilde = D^{-1} H D^{-1}, D = diag(scales). H_tilde has
    unit diagonal for all channels above the dead-channel floor. The
    rescaling preserves the sparsity pattern and the loss value.
    """
    W_star = np.asarray(W_star, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    diag = np.diag(H)
    scales = np.maximum(np.sqrt(np.maximum(diag, 0.0)), _SCALE_FLOOR)
    W_t = W_star * scales[None, :]
    H_t = H / scales[None, :] / scales[:, None]
    return W_t, H_t, scales


def unprecondition(W: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Inverse of the precondition map on weights."""
    return np.asarray(W, dtype=np.float64) / np.asarray(scales)[None, :]
