"""CSI estimation and sensing: LS division, snapshot covariance, MDL source
counting, MUSIC direction finding, per-axis transfer factors and the MMSE
baseline filter.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .array_geometry import AnglePair, ArrayConfig, direction_cosines, steering_matrix


@dataclass
class SubspaceDecomp:
    """Eigenstructure of the snapshot covariance.

    Eigenvalues are real and sorted descending; eigenvector i (column i)
    pairs with eigenvalue i.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass
class AoaEstimate:
    """Sensing output: arrival directions plus model-order and noise power."""

    angles: list[AnglePair]
    est_num_paths: int
    est_noise_var: float
    degraded: bool = False


@dataclass(frozen=True)
class TransferFactors:
    """Unit-modulus per-element phase increments along the two array axes."""

    a_p: complex
    a_q: complex

    def __post_init__(self):
        for name, a in (("a_p", self.a_p), ("a_q", self.a_q)):
            if abs(abs(a) - 1.0) > 1e-9:
                raise ValueError(f"{name} must have unit modulus, got |{name}| = {abs(a)}")


def ls_estimate(y: np.ndarray, d) -> np.ndarray:
    """Least-squares CSI estimate: elementwise division by the preamble.

    ``y`` has the antenna dimension last; ``d`` is a unit-modulus scalar or
    an array matching the leading dimensions of ``y``. Division by a
    unit-modulus symbol leaves the noise statistics unchanged.
    """
    y = np.asarray(y)
    d = np.asarray(d)
    if np.max(np.abs(np.abs(d) - 1.0)) > 1e-6:
        raise ValueError("preamble symbols must have unit modulus")
    if d.ndim == y.ndim - 1:
        d = d[..., None]
    return y / d.astype(y.dtype)


def stack_csi(grid: np.ndarray) -> np.ndarray:
    """Stack per-(n, m) estimates into a (P*Q) x (N_c*M_s) snapshot matrix.

    Column m*N_c + n holds the estimate of subcarrier n, symbol m.
    """
    grid = np.asarray(grid)
    if grid.ndim != 3:
        raise ValueError(f"expected (N_c, M_s, N) grid, got shape {grid.shape}")
    n_c, m_s, n_ant = grid.shape
    return grid.transpose(2, 1, 0).reshape(n_ant, m_s * n_c)


def unstack_csi(stacked: np.ndarray, num_subcarriers: int, num_symbols: int) -> np.ndarray:
    """Inverse of :func:`stack_csi`."""
    stacked = np.asarray(stacked)
    n_ant = stacked.shape[0]
    if stacked.shape[1] != num_subcarriers * num_symbols:
        raise ValueError(f"column count {stacked.shape[1]} != N_c*M_s")
    return stacked.reshape(n_ant, num_symbols, num_subcarriers).transpose(2, 1, 0)


def sample_covariance(stacked: np.ndarray) -> tuple[np.ndarray, SubspaceDecomp]:
    """Snapshot-normalized covariance R = H H^H / K and its eigenstructure.

    Normalizing by the snapshot count K = N_c*M_s makes the noise-floor
    eigenvalues read directly as per-element noise power. The
    decomposition is always carried out in double precision.
    """
    stacked = np.asarray(stacked)
    if stacked.ndim != 2 or stacked.shape[1] == 0:
        raise ValueError("stacked CSI must be a 2-D matrix with at least one column")
    r = (stacked @ stacked.conj().T) / stacked.shape[1]
    r128 = r.astype(np.complex128)
    r128 = 0.5 * (r128 + r128.conj().T)
    eigval, eigvec = np.linalg.eigh(r128)
    decomp = SubspaceDecomp(eigval[::-1].copy(), eigvec[:, ::-1].copy())
    return r, decomp


def mdl_order(eigenvalues: np.ndarray, num_snapshots: int) -> int:
    """Source count by the minimum description length criterion.

    For each candidate k the score is
        -K (N-k) log(gm_k / am_k) + 0.5 k (2N - k) log K
    with gm/am the geometric/arithmetic means of the smallest N-k
    eigenvalues; the minimizer is returned, clamped to [1, N-1].
    """
    if num_snapshots < 1:
        raise ValueError("need at least one snapshot")
    eig = np.asarray(eigenvalues, dtype=float).copy()
    n = eig.size
    if np.any(eig <= 0.0):
        warnings.warn("non-positive eigenvalues clamped before MDL log", RuntimeWarning)
        eig = np.maximum(eig, np.finfo(float).tiny)
    log_eig = np.log(eig)
    scores = np.empty(n)
    for k in range(n):
        tail = n - k
        gm_log = np.mean(log_eig[k:])
        am = np.mean(eig[k:])
        scores[k] = -num_snapshots * tail * (gm_log - np.log(am)) \
            + 0.5 * k * (2 * n - k) * np.log(num_snapshots)
    best = int(np.argmin(scores))
    return min(max(best, 1), n - 1)


def noise_power(eigenvalues: np.ndarray, num_paths: int) -> float:
    """Noise power estimate: mean of the smallest N - L eigenvalues.

    Floored at zero: the covariance is PSD, so negative tail eigenvalues
    can only be floating-point residue.
    """
    eig = np.asarray(eigenvalues, dtype=float)
    if num_paths >= eig.size:
        raise ValueError(f"need num_paths < {eig.size} to leave a noise subspace")
    return max(float(np.mean(eig[num_paths:])), 0.0)


def transfer_factors(angles: AnglePair, array: ArrayConfig) -> TransferFactors:
    """Per-axis phase increments of the steering vector.

    a_p = exp(-j 2 pi d_a / lambda * cos(az) sin(el)) advances one row,
    a_q the analogue for one column; steering entry (p, q) = a_p^p * a_q^q.
    """
    u, v = direction_cosines(angles)
    k = 2.0 * np.pi * array.spacing_m / array.wavelength_m
    return TransferFactors(complex(np.exp(-1j * k * u)), complex(np.exp(-1j * k * v)))


def _music_denominator(e_sig: np.ndarray, array: ArrayConfig, az_grid: np.ndarray, el_grid: np.ndarray) -> np.ndarray:
    """MUSIC spectrum denominator a^H E_n E_n^H a = P*Q - ||E_s^H a||^2.

    Exploits the rank-1 separability of UPA steering: with per-axis phase
    ramps r_p and c_q, the projection onto signal eigenvector i reduces to
    sum_q c_q * (conj(M_i)^T r)_q with M_i the P x Q reshape of the
    eigenvector. Evaluated in single precision (used for peak picking).
    """
    rows_p, cols_q = array.rows_p, array.cols_q
    n_ant = rows_p * cols_q
    sin_el = np.sin(el_grid)[:, None]
    u = (np.cos(az_grid)[None, :] * sin_el).reshape(-1)
    v = (np.sin(az_grid)[None, :] * sin_el).reshape(-1)
    k = 2.0 * np.pi * array.spacing_m / array.wavelength_m

    base_p = np.exp(-1j * k * u).astype(np.complex64)
    base_q = np.exp(-1j * k * v).astype(np.complex64)
    rows = np.empty((rows_p, u.size), dtype=np.complex64)
    rows[0] = 1.0
    for p in range(1, rows_p):
        np.multiply(rows[p - 1], base_p, out=rows[p])
    cols = np.empty((cols_q, v.size), dtype=np.complex64)
    cols[0] = 1.0
    for q in range(1, cols_q):
        np.multiply(cols[q - 1], base_q, out=cols[q])

    acc = np.zeros(u.size, dtype=np.float32)
    for i in range(e_sig.shape[1]):
        m_i = np.conj(e_sig[:, i]).reshape(rows_p, cols_q).astype(np.complex64)
        inner = m_i.T @ rows                      # (Q, n)
        proj = np.sum(cols * inner, axis=0)       # (n,)
        acc += np.abs(proj) ** 2
    return (n_ant - acc).reshape(el_grid.size, az_grid.size).astype(np.float64)


def _refine_parabolic(d_left: float, d_mid: float, d_right: float) -> float:
    """Sub-grid offset (in grid steps) of the parabola minimum through
    three equally spaced denominator samples."""
    denom = d_left - 2.0 * d_mid + d_right
    if denom <= 0.0:
        return 0.0
    offset = 0.5 * (d_left - d_right) / denom
    return float(np.clip(offset, -0.5, 0.5))


def estimate_aoas(
    decomp: SubspaceDecomp,
    num_paths: int,
    array: ArrayConfig,
    grid_step_deg: float = 0.5,
    refine: bool = True,
) -> AoaEstimate:
    """MUSIC direction estimation over an azimuth/elevation grid.

    The pseudo-spectrum 1 / (a^H E_n E_n^H a) is evaluated on a grid of
    ``grid_step_deg`` over azimuth [-90, 90) deg and elevation (0, 90] deg,
    using the signal-subspace complement P*Q - ||E_s^H a||^2 for the
    denominator. The ``num_paths`` largest local maxima are accepted
    greedily with an exclusion zone of 2 grid steps around each accepted
    peak, then each peak is refined per axis by quadratic interpolation of
    the denominator. If fewer separable peaks exist, the result carries
    ``degraded=True`` and only the found peaks.
    """
    if num_paths < 1:
        raise ValueError("need at least one path to search for")
    n_ant = decomp.eigenvectors.shape[0]
    if num_paths >= n_ant:
        raise ValueError("MUSIC needs a nonempty noise subspace (num_paths < P*Q)")

    az_grid = np.deg2rad(np.arange(-90.0, 90.0, grid_step_deg))
    el_grid = np.deg2rad(np.arange(grid_step_deg, 90.0 + 1e-9, grid_step_deg))
    denom = _music_denominator(decomp.eigenvectors[:, :num_paths], array, az_grid, el_grid)
    denom = np.maximum(denom, 1e-12 * n_ant)
    spectrum = 1.0 / denom

    # Local maxima over the 4-neighborhood (edges compare against -inf).
    padded = np.full((spectrum.shape[0] + 2, spectrum.shape[1] + 2), -np.inf)
    padded[1:-1, 1:-1] = spectrum
    is_peak = (
        (spectrum >= padded[:-2, 1:-1])
        & (spectrum >= padded[2:, 1:-1])
        & (spectrum >= padded[1:-1, :-2])
        & (spectrum >= padded[1:-1, 2:])
    )
    peak_idx = np.argwhere(is_peak)
    order = np.argsort(spectrum[is_peak])[::-1]
    candidates = peak_idx[order]

    accepted: list[tuple[int, int]] = []
    for i, j in candidates:
        if any(abs(i - i0) <= 2 and abs(j - j0) <= 2 for i0, j0 in accepted):
            continue
        accepted.append((int(i), int(j)))
        if len(accepted) == num_paths:
            break

    degraded = len(accepted) < num_paths
    if degraded:
        warnings.warn(
            f"MUSIC found {len(accepted)} separable peaks, requested {num_paths}", RuntimeWarning
        )

    step = np.deg2rad(grid_step_deg)
    angles = []
    for i, j in accepted:
        el = el_grid[i]
        az = az_grid[j]
        if refine:
            if 0 < j < az_grid.size - 1:
                az += step * _refine_parabolic(denom[i, j - 1], denom[i, j], denom[i, j + 1])
            if 0 < i < el_grid.size - 1:
                el += step * _refine_parabolic(denom[i - 1, j], denom[i, j], denom[i + 1, j])
        angles.append(AnglePair(float(az), float(min(el, np.pi / 2.0))))

    return AoaEstimate(
        angles=angles,
        est_num_paths=len(angles),
        est_noise_var=noise_power(decomp.eigenvalues, num_paths),
        degraded=degraded,
    )


def estimate_rhh(samples: np.ndarray) -> np.ndarray:
    """Channel covariance from an ensemble of true CSI vectors.

    Args:
        samples: shape (K, N), one channel vector per row.

    Returns:
        Hermitian PSD sample mean of the outer products h h^H.
    """
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError("need a nonempty (K, N) sample matrix")
    return (samples.T @ samples.conj()) / samples.shape[0]


def mmse_estimate(h_ls: np.ndarray, r_hh: np.ndarray, noise_var: float) -> np.ndarray:
    """MMSE refinement R (R + noise_var I)^-1 h applied along the last axis.

    Falls back to a least-squares solve (with a warning) when noise_var = 0
    and R is rank deficient.
    """
    h_ls = np.asarray(h_ls)
    r_hh = np.asarray(r_hh)
    n = r_hh.shape[0]
    if r_hh.shape != (n, n):
        raise ValueError("R_hh must be square")
    if not np.allclose(r_hh, r_hh.conj().T, atol=1e-8 * max(1.0, float(np.abs(r_hh).max()))):
        raise ValueError("R_hh must be Hermitian")
    if noise_var < 0.0:
        raise ValueError("noise variance must be >= 0")
    if h_ls.shape[-1] != n:
        raise ValueError(f"estimate dimension {h_ls.shape[-1]} != covariance size {n}")

    cols = h_ls.reshape(-1, n).T
    a = (r_hh + noise_var * np.eye(n, dtype=r_hh.dtype)).astype(np.complex128)
    try:
        if cols.shape[1] > 4 * n:
            # many vectors: build the filter once, apply with one product
            w = r_hh.astype(np.complex128) @ np.linalg.inv(a)
            filtered = (w.astype(cols.dtype) @ cols).T.reshape(h_ls.shape)
        else:
            x = np.linalg.solve(a, cols.astype(np.complex128))
            filtered = (r_hh.astype(np.complex128) @ x).T.reshape(h_ls.shape)
    except np.linalg.LinAlgError:
        warnings.warn("singular R_hh + noise_var I: solving in least-squares sense", RuntimeWarning)
        x = np.linalg.lstsq(a, cols.astype(np.complex128), rcond=None)[0]
        filtered = (r_hh.astype(np.complex128) @ x).T.reshape(h_ls.shape)
    return filtered.astype(h_ls.dtype) if np.iscomplexobj(h_ls) else filtered
