"""Scalar Kalman CSI enhancement along the antenna axes.

Each column (then each row) of the P x Q CSI matrix at one (subcarrier,
symbol) cell follows a deterministic state transfer: moving one element
along an axis multiplies the per-path response by a unit-modulus transfer
factor. A scalar Kalman filter with that transition, identity observation,
zero process noise and measurement variance sigma_N^2 runs forward along
the axis and then backward with the inverse factor; the per-path filtered
matrices are summed and vectorized into the refined CSI estimate.

Numerical contracts: transfer factors must be unit modulus (validated, then
|A|^2 = 1 is used exactly, so the variance recursion stays real and
A^-1 = conj(A)); with sigma_N^2 = 0 every gain is 1 and the filter is the
identity; sequences exactly of the form c * A^p are fixpoints for any noise
level because the initial variance estimate vanishes.
"""

from __future__ import annotations

import numpy as np

from .array_geometry import ArrayConfig
from .estimation import AoaEstimate, TransferFactors, transfer_factors

_UNIT_MODULUS_TOL = 1e-6


def _check_factor(factor: complex) -> complex:
    factor = complex(factor)
    if abs(abs(factor) - 1.0) > _UNIT_MODULUS_TOL:
        raise ValueError(f"transfer factor must be unit modulus, got |A| = {abs(factor)}")
    return factor


def _check_noise(noise_var: float) -> float:
    noise_var = float(noise_var)
    if noise_var < 0.0:
        raise ValueError(f"noise variance must be >= 0, got {noise_var}")
    return noise_var


def kf_initial_variance(observed, factor) -> np.ndarray | float:
    """Initial state variance: mean squared back-rotated deviation.

    p_w0 = (1/P) sum_p | observed[p] * A^-p - observed[0] |^2

    ``observed`` may be a (P,) sequence or a (P, K) batch of K sequences;
    the result is a scalar or a (K,) vector accordingly.
    """
    factor = _check_factor(factor)
    obs = np.asarray(observed)
    if not np.iscomplexobj(obs):
        obs = obs.astype(np.complex128)
    if obs.ndim not in (1, 2) or obs.shape[0] == 0:
        raise ValueError("observation sequence must be a nonempty 1-D or 2-D array")
    steps = obs.shape[0]
    rot = np.conj(factor) ** np.arange(steps)
    back = obs * (rot[:, None] if obs.ndim == 2 else rot).astype(obs.dtype)
    dev = np.abs(back - back[0]) ** 2
    out = dev.mean(axis=0)
    return out if obs.ndim == 2 else float(out)


def _kf_pass_batch(obs: np.ndarray, factor: complex, noise_var: float) -> np.ndarray:
    """Forward plus backward scalar KF over K parallel sequences.

    Args:
        obs: (P, K) observations; each column is one sequence along the
            filtered axis.
        factor: unit-modulus state transfer factor A.
        noise_var: measurement variance fed to the gain.

    Returns:
        (P, K) filtered sequences.
    """
    steps = obs.shape[0]
    filt = np.empty_like(obs)
    filt[0] = obs[0]
    if steps == 1:
        return filt

    real_dtype = np.float32 if obs.dtype == np.complex64 else np.float64
    nv = real_dtype(noise_var)
    pw = kf_initial_variance(obs, factor).astype(real_dtype)
    ones = np.ones_like(pw)

    def gain(prior_var):
        denom = prior_var + nv
        return np.divide(prior_var, denom, out=ones.copy(), where=denom > 0)

    # Forward sweep; prior variance equals the previous posterior (|A| = 1).
    for p in range(1, steps):
        prior = factor * filt[p - 1]
        kg = gain(pw)
        filt[p] = prior + kg * (obs[p] - prior)
        pw = (1.0 - kg) * pw

    # Backward sweep with the inverse factor, continuing the same variance
    # recursion; innovations still compare against the raw observations.
    inv_factor = np.conj(factor)
    for p in range(steps - 1, 0, -1):
        prior = inv_factor * filt[p]
        kg = gain(pw)
        filt[p - 1] = prior + kg * (obs[p - 1] - prior)
        pw = (1.0 - kg) * pw
    return filt


def kf_forward(observed, factor, noise_var):
    """Forward pass only, exposing gains and posterior variances.

    Kept as a plain scalar recursion so it can be checked term by term
    against a textbook filter.

    Returns:
        (filtered, gains, post_vars): filtered is (P,) complex, gains holds
        K_p for steps p = 1 .. P-1, post_vars holds p_w for p = 0 .. P-1.
    """
    factor = _check_factor(factor)
    noise_var = _check_noise(noise_var)
    obs = np.asarray(observed, dtype=np.complex128).reshape(-1)
    if obs.size == 0:
        raise ValueError("observation sequence must be nonempty")
    steps = obs.size

    filt = np.empty(steps, dtype=np.complex128)
    gains = np.empty(max(steps - 1, 0))
    post_vars = np.empty(steps)
    filt[0] = obs[0]
    pw = float(kf_initial_variance(obs, factor))
    post_vars[0] = pw
    for p in range(1, steps):
        prior = factor * filt[p - 1]
        prior_var = pw  # A * pw * conj(A) with |A| = 1
        denom = prior_var + noise_var
        kg = prior_var / denom if denom > 0 else 1.0
        filt[p] = prior + kg * (obs[p] - prior)
        pw = (1.0 - kg) * prior_var
        gains[p - 1] = kg
        post_vars[p] = pw
    return filt, gains, post_vars


def kf_filter_sequence(observed, factor, noise_var) -> np.ndarray:
    """Filter one observation sequence forward and backward along an axis."""
    factor = _check_factor(factor)
    noise_var = _check_noise(noise_var)
    obs = np.asarray(observed)
    if obs.ndim != 1 or obs.size == 0:
        raise ValueError("observation sequence must be a nonempty 1-D array")
    if not np.iscomplexobj(obs):
        obs = obs.astype(np.complex128)
    return _kf_pass_batch(obs[:, None], factor, noise_var)[:, 0]


def filter_matrix(matrix: np.ndarray, factors: TransferFactors, noise_var: float) -> np.ndarray:
    """Two-stage filtering of one P x Q CSI matrix.

    All Q columns are filtered with a_p first, then all P rows of that
    intermediate result with a_q.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"expected a P x Q matrix, got shape {matrix.shape}")
    return filter_matrices(matrix[None, :, :], factors, noise_var)[0]


def filter_matrices(matrices: np.ndarray, factors: TransferFactors, noise_var: float) -> np.ndarray:
    """Vectorized :func:`filter_matrix` over a (B, P, Q) batch."""
    matrices = np.asarray(matrices)
    if matrices.ndim != 3:
        raise ValueError(f"expected a (B, P, Q) batch, got shape {matrices.shape}")
    if not np.iscomplexobj(matrices):
        matrices = matrices.astype(np.complex128)
    a_p = _check_factor(factors.a_p)
    a_q = _check_factor(factors.a_q)
    noise_var = _check_noise(noise_var)
    b, rows_p, cols_q = matrices.shape

    cols = matrices.transpose(1, 0, 2).reshape(rows_p, b * cols_q)
    stage1 = _kf_pass_batch(cols, a_p, noise_var).reshape(rows_p, b, cols_q).transpose(1, 0, 2)
    rows = stage1.transpose(2, 0, 1).reshape(cols_q, b * rows_p)
    stage2 = _kf_pass_batch(rows, a_q, noise_var).reshape(cols_q, b, rows_p).transpose(1, 2, 0)
    return stage2


def sakf_estimate(matrix: np.ndarray, aoa: AoaEstimate, array: ArrayConfig) -> np.ndarray:
    """Refined CSI vector for one (subcarrier, symbol) cell.

    Runs the two-stage filter once per sensed path on the same observed
    matrix, sums the per-path outputs and vectorizes in (p*Q + q) order.
    """
    matrix = np.asarray(matrix)
    if matrix.shape != (array.rows_p, array.cols_q):
        raise ValueError(f"matrix shape {matrix.shape} does not match {array.rows_p}x{array.cols_q} array")
    return sakf_estimate_grid(matrix.reshape(1, 1, -1), aoa, array)[0, 0]


def sakf_estimate_grid(grid: np.ndarray, aoa: AoaEstimate, array: ArrayConfig) -> np.ndarray:
    """Refined CSI for a whole (N_c, M_s, P*Q) grid of LS estimates."""
    if not aoa.angles:
        raise ValueError("need at least one sensed arrival direction")
    grid = np.asarray(grid)
    n_c, m_s, n_ant = grid.shape
    if n_ant != array.rows_p * array.cols_q:
        raise ValueError(f"grid element count {n_ant} != {array.rows_p}x{array.cols_q}")
    mats = grid.reshape(n_c * m_s, array.rows_p, array.cols_q)
    out = np.zeros_like(mats)
    for angles in aoa.angles:
        out += filter_matrices(mats, transfer_factors(angles, array), aoa.est_noise_var)
    return out.reshape(n_c, m_s, n_ant)


def csi_matrix_view(vector: np.ndarray, array: ArrayConfig) -> np.ndarray:
    """Reshape a length P*Q CSI vector to its P x Q matrix view.

    Entry (p, q) of the view is vector element p*Q + q, consistent with the
    steering-vector stacking.
    """
    vector = np.asarray(vector)
    if vector.shape[-1] != array.rows_p * array.cols_q:
        raise ValueError(f"vector length {vector.shape[-1]} != {array.rows_p * array.cols_q}")
    return vector.reshape(vector.shape[:-1] + (array.rows_p, array.cols_q))
