"""Uniform planar array geometry: element phase shifts, steering vectors and
least-squares transmit beamforming weights.

Conventions used throughout the package:

* The array is a ``P x Q`` grid of elements with uniform spacing ``d_a``.
* An incident direction is an (azimuth, elevation) pair in radians.
* Steering vectors are stacked so that element ``(p, q)`` lands at linear
  index ``p * Q + q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayConfig:
    """Geometry of a P x Q uniform planar array.

    Attributes:
        rows_p: number of element rows (P >= 1).
        cols_q: number of element columns (Q >= 1).
        spacing_m: uniform inter-element spacing d_a in meters.
        wavelength_m: carrier wavelength lambda = c / f_c in meters.
    """

    rows_p: int
    cols_q: int
    spacing_m: float
    wavelength_m: float

    def __post_init__(self):
        if self.rows_p < 1 or self.cols_q < 1:
            raise ValueError(f"array size must be >= 1x1, got {self.rows_p}x{self.cols_q}")
        if self.spacing_m <= 0.0:
            raise ValueError(f"element spacing must be positive, got {self.spacing_m}")
        if self.wavelength_m <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength_m}")

    @property
    def num_elements(self) -> int:
        return self.rows_p * self.cols_q

    @classmethod
    def half_wavelength(cls, rows_p: int, cols_q: int, carrier_freq_hz: float) -> "ArrayConfig":
        """Array with d_a = lambda/2 for the given carrier frequency."""
        lam = SPEED_OF_LIGHT / carrier_freq_hz
        return cls(rows_p, cols_q, spacing_m=lam / 2.0, wavelength_m=lam)


@dataclass(frozen=True)
class AnglePair:
    """Azimuth/elevation direction in radians.

    Azimuth lies in [-pi, pi), elevation in [0, pi].
    """

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not -np.pi <= self.azimuth < np.pi:
            raise ValueError(f"azimuth {self.azimuth} outside [-pi, pi)")
        if not 0.0 <= self.elevation <= np.pi:
            raise ValueError(f"elevation {self.elevation} outside [0, pi]")

    @classmethod
    def from_degrees(cls, azimuth_deg: float, elevation_deg: float) -> "AnglePair":
        return cls(np.deg2rad(azimuth_deg), np.deg2rad(elevation_deg))

    def to_degrees(self) -> tuple[float, float]:
        return float(np.rad2deg(self.azimuth)), float(np.rad2deg(self.elevation))


def direction_cosines(angles: AnglePair) -> tuple[float, float]:
    """Direction cosines (u, v) = (cos(az) sin(el), sin(az) sin(el)).

    These are the per-axis spatial frequencies of the planar array: the
    phase of element (p, q) is -2*pi*d_a/lambda * (p*u + q*v).
    """
    sin_el = np.sin(angles.elevation)
    return float(np.cos(angles.azimuth) * sin_el), float(np.sin(angles.azimuth) * sin_el)


def phase_shift(p: int, q: int, angles: AnglePair, cfg: ArrayConfig) -> complex:
    """Unit-modulus phase of element (p, q) relative to the (0, 0) reference.

    Returns exp(-j * 2*pi/lambda * d_a * (p cos(az) sin(el) + q sin(az) sin(el))).
    """
    if not 0 <= p < cfg.rows_p:
        raise IndexError(f"row index {p} outside [0, {cfg.rows_p})")
    if not 0 <= q < cfg.cols_q:
        raise IndexError(f"column index {q} outside [0, {cfg.cols_q})")
    u, v = direction_cosines(angles)
    k = 2.0 * np.pi * cfg.spacing_m / cfg.wavelength_m
    return complex(np.exp(-1j * k * (p * u + q * v)))


def steering_vector(cfg: ArrayConfig, angles: AnglePair) -> np.ndarray:
    """Array steering vector of length P*Q, element (p, q) at index p*Q + q.

    The vector is rank-1 separable across the two array axes: with
    per-axis factors a_p = exp(-j*k*u) and a_q = exp(-j*k*v), the entry at
    (p, q) equals a_p**p * a_q**q.
    """
    u, v = direction_cosines(angles)
    k = 2.0 * np.pi * cfg.spacing_m / cfg.wavelength_m
    row_phase = np.exp(-1j * k * u * np.arange(cfg.rows_p))
    col_phase = np.exp(-1j * k * v * np.arange(cfg.cols_q))
    return np.outer(row_phase, col_phase).reshape(-1)


def steering_matrix(cfg: ArrayConfig, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Steering vectors for many directions at once.

    Args:
        cfg: array geometry.
        u, v: direction cosines, both shape (n,).

    Returns:
        Complex matrix of shape (P*Q, n); column i is the steering vector
        for direction (u[i], v[i]).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    k = 2.0 * np.pi * cfg.spacing_m / cfg.wavelength_m
    rows = np.exp(-1j * k * np.outer(np.arange(cfg.rows_p), u))   # (P, n)
    cols = np.exp(-1j * k * np.outer(np.arange(cfg.cols_q), v))   # (Q, n)
    return np.einsum("pn,qn->pqn", rows, cols).reshape(cfg.num_elements, -1)


def ls_beamformer(steering: np.ndarray) -> np.ndarray:
    """Least-squares transmit weights: pseudo-inverse of the 1 x N row a^T.

    For a nonzero steering vector a this is conj(a) / ||a||^2, which gives
    unit beamforming gain a^T w = 1.
    """
    steering = np.asarray(steering)
    if steering.ndim != 1 or steering.size == 0:
        raise ValueError("steering vector must be a nonempty 1-D array")
    energy = np.sum(np.abs(steering) ** 2)
    if energy == 0.0:
        raise ValueError("steering vector must be nonzero")
    return np.conj(steering) / energy
