"""Uplink multipath channel synthesis and preamble observations.

The channel is frequency-domain only: per (subcarrier n, symbol m) the true
CSI vector across the P*Q receive elements is

    h[n, m] = sum_l exp(+j 2 pi m Ts (f_dl + df(m)))
                  * exp(-j 2 pi n delta_f (tau_l + dtau(m)))
                  * b_l * sqrt(Pt) * chi_l * a(aoa_l)

with path 0 the unit-gain line-of-sight component and paths l > 0 reflected
components with complex Gaussian gains. No time-domain waveform, cyclic
prefix or multipath convolution is ever built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_geometry import AnglePair, ArrayConfig, direction_cosines, ls_beamformer, steering_vector


@dataclass(frozen=True)
class PathParams:
    """One propagation path of the uplink channel."""

    gain: complex                 # b_l; exactly 1.0 for the LoS path
    delay_s: float                # tau_l
    doppler_hz: float             # f_dl
    aoa_rx: AnglePair             # arrival direction at the receive array
    aod_tx: AnglePair             # departure direction at the user array
    gain_variance: float = 0.0    # sigma^2_beta used when the gain was drawn

    def __post_init__(self):
        if self.delay_s < 0.0:
            raise ValueError(f"path delay must be >= 0, got {self.delay_s}")


@dataclass
class OffsetProcess:
    """Per-symbol frequency and timing offsets.

    Both arrays are indexed by OFDM symbol m; scalars broadcast.
    """

    freq_offset_hz: np.ndarray
    timing_offset_s: np.ndarray

    @classmethod
    def zero(cls, num_symbols: int) -> "OffsetProcess":
        return cls(np.zeros(num_symbols), np.zeros(num_symbols))

    @classmethod
    def constant(cls, num_symbols: int, freq_offset_hz: float, timing_offset_s: float) -> "OffsetProcess":
        return cls(np.full(num_symbols, float(freq_offset_hz)), np.full(num_symbols, float(timing_offset_s)))


@dataclass(frozen=True)
class SimWaveformConfig:
    """OFDM grid and power parameters for one simulation.

    ``symbol_duration_s`` defaults to 1/subcarrier_spacing + guard_interval.
    """

    carrier_freq_hz: float
    subcarrier_spacing_hz: float
    num_subcarriers: int
    num_symbols: int
    noise_var_w: float
    num_paths: int
    guard_interval_s: float = 0.0
    tx_power_w: float = 1.0
    symbol_duration_s: float = field(default=0.0)

    def __post_init__(self):
        if min(self.carrier_freq_hz, self.subcarrier_spacing_hz, self.noise_var_w, self.tx_power_w) <= 0:
            raise ValueError("carrier, spacing, noise variance and power must be positive")
        if self.num_subcarriers < 1 or self.num_symbols < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.guard_interval_s < 0:
            raise ValueError("guard interval must be >= 0")
        if self.symbol_duration_s == 0.0:
            object.__setattr__(
                self, "symbol_duration_s", 1.0 / self.subcarrier_spacing_hz + self.guard_interval_s
            )
        if self.symbol_duration_s < 1.0 / self.subcarrier_spacing_hz:
            raise ValueError("symbol duration cannot be shorter than 1/subcarrier_spacing")


@dataclass(frozen=True)
class PathGeometryBounds:
    """Draw ranges for random path parameters (all angles in radians)."""

    azimuth_range: tuple[float, float] = (-np.pi / 3.0, np.pi / 3.0)
    elevation_range: tuple[float, float] = (np.deg2rad(20.0), np.deg2rad(80.0))
    delay_range_s: tuple[float, float] = (0.0, 0.0)
    doppler_range_hz: tuple[float, float] = (-1000.0, 1000.0)
    nlos_gain_var: float = 0.1
    # Minimum separation between any two paths in each direction cosine
    # (u and v); keeps drawn paths resolvable by the array.
    min_cosine_sep: float = 0.2


@dataclass
class CsiGrid:
    """True or estimated CSI tensor, shape (N_c, M_s, P*Q)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 3:
            raise ValueError(f"CSI grid must be 3-D (subcarrier, symbol, element), got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("CSI grid contains non-finite entries")

    @property
    def num_subcarriers(self) -> int:
        return self.values.shape[0]

    @property
    def num_symbols(self) -> int:
        return self.values.shape[1]

    @property
    def num_elements(self) -> int:
        return self.values.shape[2]


def _draw_angle(rng, lo: float, hi: float) -> float:
    return float(rng.uniform(lo, hi))


def sample_paths(cfg: SimWaveformConfig, bounds: PathGeometryBounds, rng) -> list[PathParams]:
    """Draw the multipath set: unit-gain LoS plus L-1 Gaussian reflections.

    Arrival directions are drawn uniformly inside the configured sector,
    redrawn (up to a bounded number of tries) until every pair of paths is
    separated by at least ``bounds.min_cosine_sep`` in both direction
    cosines. Deterministic for a given seed.
    """
    if cfg.num_paths < 1:
        raise ValueError("need at least one propagation path")
    rng = np.random.default_rng(rng)
    az_lo, az_hi = bounds.azimuth_range
    el_lo, el_hi = bounds.elevation_range
    d_lo, d_hi = bounds.delay_range_s
    f_lo, f_hi = bounds.doppler_range_hz

    paths: list[PathParams] = []
    taken: list[tuple[float, float]] = []
    for l in range(cfg.num_paths):
        for _ in range(256):
            aoa = AnglePair(_draw_angle(rng, az_lo, az_hi), _draw_angle(rng, el_lo, el_hi))
            u, v = direction_cosines(aoa)
            ok = all(
                abs(u - u0) >= bounds.min_cosine_sep and abs(v - v0) >= bounds.min_cosine_sep
                for u0, v0 in taken
            )
            if ok:
                break
        taken.append((u, v))
        delay = _draw_angle(rng, d_lo, d_hi)
        doppler = _draw_angle(rng, f_lo, f_hi)
        aod = AnglePair(_draw_angle(rng, az_lo, az_hi), _draw_angle(rng, el_lo, el_hi))
        if l == 0:
            gain = 1.0 + 0.0j
            var = 0.0
        else:
            var = bounds.nlos_gain_var
            gain = np.sqrt(var / 2.0) * complex(rng.standard_normal(), rng.standard_normal())
        paths.append(PathParams(gain, delay, doppler, aoa, aod, var))
    return paths


def transmit_bf_gains(paths: list[PathParams], user_array: ArrayConfig) -> np.ndarray:
    """Per-path transmit beamforming gains chi_l = a(aod_l)^T w.

    The LS weights target the LoS departure direction (beam alignment
    complete); with a single-element user array every gain is exactly 1.
    """
    w = ls_beamformer(steering_vector(user_array, paths[0].aod_tx))
    return np.array([steering_vector(user_array, p.aod_tx) @ w for p in paths])


def true_csi(
    paths: list[PathParams],
    offsets: OffsetProcess,
    cfg: SimWaveformConfig,
    array: ArrayConfig,
    tx_bf_gains: np.ndarray,
    dtype=np.complex128,
) -> CsiGrid:
    """Synthesize the true per-(subcarrier, symbol) CSI vectors."""
    if len(tx_bf_gains) != len(paths):
        raise ValueError(f"{len(paths)} paths but {len(tx_bf_gains)} beamforming gains")
    n_c, m_s = cfg.num_subcarriers, cfg.num_symbols
    m_idx = np.arange(m_s)
    n_idx = np.arange(n_c)
    df = np.broadcast_to(np.asarray(offsets.freq_offset_hz, dtype=float), (m_s,))
    dtau = np.broadcast_to(np.asarray(offsets.timing_offset_s, dtype=float), (m_s,))

    grid = np.zeros((n_c, m_s, array.num_elements), dtype=dtype)
    amp = np.sqrt(cfg.tx_power_w)
    for path, chi in zip(paths, tx_bf_gains):
        time_phase = 2.0 * np.pi * m_idx * cfg.symbol_duration_s * (path.doppler_hz + df)
        freq_phase = -2.0 * np.pi * np.outer(n_idx, np.full(m_s, path.delay_s) + dtau) * cfg.subcarrier_spacing_hz
        cell_phase = np.exp(1j * (time_phase[None, :] + freq_phase))       # (N_c, M_s)
        a_rx = steering_vector(array, path.aoa_rx)
        coeff = path.gain * amp * chi
        # cast the small factors first so the big 3-D product runs in dtype
        grid += (coeff * cell_phase).astype(dtype)[:, :, None] * a_rx.astype(dtype)[None, None, :]
    return CsiGrid(grid)


def received_preamble(truth: CsiGrid, preamble: np.ndarray, noise_var: float, rng) -> np.ndarray:
    """Noisy preamble-period observation y = h * d + n.

    Noise is i.i.d. circular complex Gaussian with per-element variance
    ``noise_var``; the draw is deterministic for a given seed. The noise is
    generated in the precision of the truth grid.
    """
    preamble = np.asarray(preamble)
    if preamble.shape != (truth.num_subcarriers, truth.num_symbols):
        raise ValueError(f"preamble shape {preamble.shape} does not match grid")
    if np.max(np.abs(np.abs(preamble) - 1.0)) > 1e-6:
        raise ValueError("preamble symbols must have unit modulus")
    if noise_var < 0.0:
        raise ValueError("noise variance must be >= 0")
    rng = np.random.default_rng(rng)
    y = truth.values * preamble[:, :, None].astype(truth.values.dtype)
    if noise_var > 0.0:
        y = y + complex_noise(rng, y.shape, noise_var, y.dtype)
    return y


def complex_noise(rng, shape, noise_var: float, dtype=np.complex128) -> np.ndarray:
    """Circular complex Gaussian noise with per-entry variance noise_var.

    Real and imaginary parts are drawn interleaved in the matching real
    precision (float32 for complex64) and viewed as complex, which avoids
    an intermediate double-precision array.
    """
    dtype = np.dtype(dtype)
    real_dtype = np.float32 if dtype == np.complex64 else np.float64
    raw = rng.standard_normal(size=tuple(shape) + (2,), dtype=real_dtype)
    raw *= np.sqrt(noise_var / 2.0)
    return raw.view(dtype)[..., 0]


def uplink_snr(paths: list[PathParams], tx_bf_gains: np.ndarray, tx_power_w: float, noise_var: float) -> float:
    """Per-element uplink SNR: Pt * sum_l |b_l chi_l|^2 / noise_var (linear)."""
    if noise_var <= 0.0:
        raise ValueError("noise variance must be positive")
    path_power = sum(abs(p.gain * chi) ** 2 for p, chi in zip(paths, tx_bf_gains))
    return float(tx_power_w * path_power / noise_var)


def power_for_snr(target_snr: float, paths: list[PathParams], tx_bf_gains: np.ndarray, noise_var: float) -> float:
    """Transmit power that realizes the target linear SNR for these paths."""
    if noise_var <= 0.0:
        raise ValueError("noise variance must be positive")
    path_power = sum(abs(p.gain * chi) ** 2 for p, chi in zip(paths, tx_bf_gains))
    if path_power == 0.0:
        raise ValueError("all-zero path gains: SNR target unreachable")
    return float(target_snr * noise_var / path_power)
