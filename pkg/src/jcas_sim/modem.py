"""QAM mapping/demapping, preamble generation, ZF detection and BER counting.

Bit conventions (fixed so that error counts are reproducible):

* Square Gray-coded constellations, normalized to unit average symbol energy.
* Bits map per axis, first half of the symbol's bits to I, second half to Q,
  MSB first; per-axis Gray code puts bit pattern 0 at the most positive level,
  so the all-zeros symbol lies in the first quadrant.
* Hard decisions break distance ties toward the smallest index in the fixed
  constellation enumeration (enumeration index = integer value of the bits).
"""

from __future__ import annotations

import numpy as np

# Per-axis amplitude looked up by the integer value of the axis bits.
# 16-QAM axis Gray code: 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3.
_AXIS_LEVELS = {
    4: np.array([1.0, -1.0]),
    16: np.array([3.0, 1.0, -3.0, -1.0]),
}
_SCALE = {4: 1.0 / np.sqrt(2.0), 16: 1.0 / np.sqrt(10.0)}


def constellation(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Constellation points and their bit labels.

    Returns:
        points: complex array of shape (order,), unit average energy; the
            enumeration index of point i is the integer value of its bits.
        bits: int8 array of shape (order, log2(order)), MSB first.
    """
    if order not in _AXIS_LEVELS:
        raise ValueError(f"unsupported QAM order {order}; expected one of {sorted(_AXIS_LEVELS)}")
    bits_per_symbol = int(np.log2(order))
    half = bits_per_symbol // 2
    labels = np.arange(order)
    bits = ((labels[:, None] >> np.arange(bits_per_symbol - 1, -1, -1)) & 1).astype(np.int8)
    i_idx = labels >> half
    q_idx = labels & ((1 << half) - 1)
    levels = _AXIS_LEVELS[order]
    points = _SCALE[order] * (levels[i_idx] + 1j * levels[q_idx])
    return points, bits


def qam_modulate(bits: np.ndarray, order: int) -> np.ndarray:
    """Map a bit sequence to Gray-coded QAM symbols with unit average energy."""
    points, _ = constellation(order)
    bits = np.asarray(bits).astype(np.int8).reshape(-1)
    k = int(np.log2(order))
    if bits.size % k != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {k} bits/symbol")
    groups = bits.reshape(-1, k)
    labels = groups @ (1 << np.arange(k - 1, -1, -1))
    return points[labels]


def qam_demodulate(symbols: np.ndarray, order: int) -> np.ndarray:
    """Hard-decision demapping: nearest constellation point, Gray bits out.

    np.argmin returns the first minimizer, so distance ties resolve to the
    smallest enumeration index.
    """
    points, bits = constellation(order)
    symbols = np.asarray(symbols).reshape(-1)
    dist = np.abs(symbols[:, None] - points[None, :].astype(symbols.dtype)) ** 2
    labels = np.argmin(dist, axis=1)
    return bits[labels].reshape(-1)


def preamble_grid(num_subcarriers: int, num_symbols: int, rng) -> np.ndarray:
    """Unit-modulus preamble symbols, i.i.d. uniform over the four QPSK phases.

    Args:
        rng: integer seed or ``np.random.Generator``.

    Returns:
        Complex array of shape (num_subcarriers, num_symbols) with |d| = 1.
    """
    if num_subcarriers < 1 or num_symbols < 1:
        raise ValueError("preamble grid dimensions must be positive")
    rng = np.random.default_rng(rng)
    quadrant = rng.integers(0, 4, size=(num_subcarriers, num_symbols))
    return np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * quadrant))


def zf_detect(y: np.ndarray, h_hat: np.ndarray) -> np.ndarray:
    """Single-stream zero-forcing combining: (h^H h)^-1 h^H y.

    Both arguments have the antenna dimension last and may carry arbitrary
    leading batch dimensions.
    """
    y = np.asarray(y)
    h_hat = np.asarray(h_hat)
    if y.shape != h_hat.shape:
        raise ValueError(f"shape mismatch: y {y.shape} vs h_hat {h_hat.shape}")
    energy = np.sum(np.abs(h_hat) ** 2, axis=-1)
    if np.any(energy == 0.0):
        raise ValueError("zero channel estimate: ZF combiner is singular")
    return np.sum(np.conj(h_hat) * y, axis=-1) / energy


def bit_error_rate(tx_bits: np.ndarray, rx_bits: np.ndarray) -> tuple[int, int, float]:
    """Count bit errors between two equal-length bit streams.

    Returns:
        (errors, total, errors / total)
    """
    tx_bits = np.asarray(tx_bits).reshape(-1)
    rx_bits = np.asarray(rx_bits).reshape(-1)
    if tx_bits.size != rx_bits.size:
        raise ValueError(f"bit stream length mismatch: {tx_bits.size} vs {rx_bits.size}")
    errors = int(np.count_nonzero(tx_bits != rx_bits))
    return errors, int(tx_bits.size), errors / tx_bits.size
