"""Monte-Carlo experiment harness: seeded BER/MSE sweeps over the CSI
estimation methods, complexity benchmarking and results emission.

Determinism contract: every packet derives its RNG stream from
(master_seed, snr key, stream kind, trial index), so a sweep produces
identical numbers for any worker count and scheduling order. The channel,
noise, preamble and data draws are method independent: at a given trial all
methods see the same realization, which pairs the comparisons.

Timing note: the ``wall_time_s`` column is all zeros unless
``record_timing`` is enabled, keeping default sweep outputs byte-identical
between runs; real complexity numbers come from :func:`complexity_bench`.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .array_geometry import ArrayConfig, steering_vector
from .channel import (
    OffsetProcess,
    complex_noise,
    PathGeometryBounds,
    SimWaveformConfig,
    power_for_snr,
    received_preamble,
    sample_paths,
    transmit_bf_gains,
    true_csi,
)
from .estimation import (
    AoaEstimate,
    TransferFactors,
    estimate_aoas,
    estimate_rhh,
    ls_estimate,
    mdl_order,
    mmse_estimate,
    sample_covariance,
    stack_csi,
)
from .kalman import filter_matrices, sakf_estimate_grid
from .modem import bit_error_rate, preamble_grid, qam_demodulate, qam_modulate, zf_detect

METHODS = ("ls", "mmse", "sakf")
CSV_HEADER = "method,snr_db,num_bits,num_errors,ber,channel_mse,wall_time_s"

# Stream kinds for per-packet seed derivation.
_KIND_TRIAL = 0
_KIND_AOA = 1
_KIND_RHH = 2

_TRIAL_CHUNK = 8  # fixed reduction granularity, independent of worker count


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


@dataclass
class ExperimentConfig:
    """Full experiment description; defaults reproduce the reference setup:
    28 GHz carrier, half-wavelength 8x8 receive array, single-element user,
    two paths, 480 kHz spacing, 256 subcarriers, 64 symbols, noise variance
    4.9177e-12 W, 4-QAM.
    """

    carrier_freq_hz: float = 28e9
    subcarrier_spacing_hz: float = 480e3
    num_subcarriers: int = 256
    num_symbols: int = 64
    guard_interval_s: float = 0.0
    noise_var_w: float = 4.9177e-12
    num_paths: int = 2
    bs_rows: int = 8
    bs_cols: int = 8
    ue_rows: int = 1
    ue_cols: int = 1
    element_spacing_m: float = 0.0          # 0 -> half wavelength
    modulation_order: int = 4
    snr_points_db: tuple = tuple(float(s) for s in range(-4, 11))
    trials_per_point: int = 200
    methods: tuple = METHODS
    master_seed: int = 1
    aoa_reuse: bool = False
    music_step_deg: float = 0.5
    nlos_gain_db: float = -10.0
    azimuth_sector_deg: tuple = (-60.0, 60.0)
    elevation_sector_deg: tuple = (20.0, 80.0)
    min_cosine_sep: float = 0.2
    delay_max_frac: float = 0.2             # delays uniform in [0, frac/spacing]
    doppler_max_hz: float = 1000.0
    offsets_enabled: bool = False
    freq_offset_bound_hz: float = 0.0
    timing_offset_bound_s: float = 0.0
    data_symbols: int = 0                   # 0 -> num_symbols data symbols/packet
    workers: int = 1
    record_timing: bool = False
    rhh_realizations: int = 1000
    rhh_cells: int = 8
    dtype: str = "complex64"

    def validate(self) -> "ExperimentConfig":
        if self.trials_per_point < 1:
            raise ConfigError("trials_per_point must be >= 1")
        if not self.snr_points_db:
            raise ConfigError("snr_points_db must be nonempty")
        if not self.methods:
            raise ConfigError("methods must be nonempty")
        bad = set(m.lower() for m in self.methods) - set(METHODS)
        if bad:
            raise ConfigError(f"unknown methods {sorted(bad)}; choose from {METHODS}")
        if self.modulation_order not in (4, 16):
            raise ConfigError("modulation_order must be 4 or 16")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be >= 0")
        if self.num_paths < 1:
            raise ConfigError("num_paths must be >= 1")
        if self.music_step_deg <= 0:
            raise ConfigError("music_step_deg must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.data_symbols < 0:
            raise ConfigError("data_symbols must be >= 0 (0 means num_symbols)")
        if self.dtype not in ("complex64", "complex128"):
            raise ConfigError("dtype must be complex64 or complex128")
        if min(self.bs_rows, self.bs_cols, self.ue_rows, self.ue_cols) < 1:
            raise ConfigError("array dimensions must be >= 1")
        return self

    # --- derived pieces -------------------------------------------------

    def bs_array(self) -> ArrayConfig:
        return self._array(self.bs_rows, self.bs_cols)

    def ue_array(self) -> ArrayConfig:
        return self._array(self.ue_rows, self.ue_cols)

    def _array(self, rows, cols) -> ArrayConfig:
        if self.element_spacing_m > 0:
            lam = ArrayConfig.half_wavelength(1, 1, self.carrier_freq_hz).wavelength_m
            return ArrayConfig(rows, cols, self.element_spacing_m, lam)
        return ArrayConfig.half_wavelength(rows, cols, self.carrier_freq_hz)

    def waveform(self, tx_power_w: float = 1.0) -> SimWaveformConfig:
        return SimWaveformConfig(
            carrier_freq_hz=self.carrier_freq_hz,
            subcarrier_spacing_hz=self.subcarrier_spacing_hz,
            num_subcarriers=self.num_subcarriers,
            num_symbols=self.num_symbols,
            noise_var_w=self.noise_var_w,
            num_paths=self.num_paths,
            guard_interval_s=self.guard_interval_s,
            tx_power_w=tx_power_w,
        )

    def path_bounds(self) -> PathGeometryBounds:
        return PathGeometryBounds(
            azimuth_range=tuple(np.deg2rad(self.azimuth_sector_deg)),
            elevation_range=tuple(np.deg2rad(self.elevation_sector_deg)),
            delay_range_s=(0.0, self.delay_max_frac / self.subcarrier_spacing_hz),
            doppler_range_hz=(-self.doppler_max_hz, self.doppler_max_hz),
            nlos_gain_var=10.0 ** (self.nlos_gain_db / 10.0),
            min_cosine_sep=self.min_cosine_sep,
        )

    @property
    def num_data_symbols(self) -> int:
        return self.data_symbols if self.data_symbols > 0 else self.num_symbols

    @property
    def complex_dtype(self):
        return np.complex64 if self.dtype == "complex64" else np.complex128


def _snr_key(snr_db: float) -> int:
    return 1_000_000 + int(round(float(snr_db) * 1000.0))


def _packet_rng(config: ExperimentConfig, snr_db: float, kind: int, index: int):
    seq = np.random.SeedSequence([config.master_seed, _snr_key(snr_db), kind, index])
    return np.random.default_rng(seq)


@dataclass
class SharedSensing:
    """Per-SNR state reused across packets when aoa_reuse is on."""

    paths: list
    aoa: AoaEstimate


@dataclass
class TrialResult:
    errors: int
    bits: int
    channel_mse: float
    est_seconds: float


@dataclass
class BerRow:
    method: str
    snr_db: float
    num_bits: int
    num_errors: int
    ber: float
    channel_mse: float
    wall_time_s: float


@dataclass
class BerTable:
    rows: list = field(default_factory=list)

    def methods(self):
        seen = []
        for r in self.rows:
            if r.method not in seen:
                seen.append(r.method)
        return seen

    def for_method(self, method: str) -> list:
        return sorted((r for r in self.rows if r.method == method), key=lambda r: r.snr_db)


# --------------------------------------------------------------------------
# Single-packet simulation
# --------------------------------------------------------------------------


def _sense(config: ExperimentConfig, h_ls_grid: np.ndarray) -> AoaEstimate:
    """MDL + MUSIC + noise-floor estimation from the stacked LS grid."""
    stacked = stack_csi(h_ls_grid)
    _, decomp = sample_covariance(stacked)
    order = mdl_order(decomp.eigenvalues, stacked.shape[1])
    return estimate_aoas(decomp, order, config.bs_array(), config.music_step_deg)


def _run_packet(
    config: ExperimentConfig,
    snr_db: float,
    trial_index: int,
    methods,
    rhh: np.ndarray | None = None,
    shared: SharedSensing | None = None,
) -> dict:
    """Simulate one packet and estimate/demodulate with every method.

    The channel, preamble, noise and data realizations depend only on
    (config, snr_db, trial_index) so all methods see the same packet.
    """
    methods = [m.lower() for m in methods]
    rng = _packet_rng(config, snr_db, _KIND_TRIAL, trial_index)
    dtype = config.complex_dtype
    bs = config.bs_array()
    n_c, m_s = config.num_subcarriers, config.num_symbols
    order = config.modulation_order
    bits_per_symbol = int(np.log2(order))

    # Channel realization and power calibration for the target SNR.
    if shared is not None:
        paths = shared.paths
    else:
        paths = sample_paths(config.waveform(), config.path_bounds(), rng)
    chi = transmit_bf_gains(paths, config.ue_array())
    pt = power_for_snr(10.0 ** (snr_db / 10.0), paths, chi, config.noise_var_w)
    wave = config.waveform(tx_power_w=pt)
    if config.offsets_enabled:
        offsets = OffsetProcess.constant(
            m_s,
            rng.uniform(-config.freq_offset_bound_hz, config.freq_offset_bound_hz),
            rng.uniform(-config.timing_offset_bound_s, config.timing_offset_bound_s),
        )
    else:
        offsets = OffsetProcess.zero(m_s)
    truth = true_csi(paths, offsets, wave, bs, chi, dtype=dtype)

    # Preamble period: observe, LS-estimate, sense.
    d_grid = preamble_grid(n_c, m_s, rng).astype(dtype)
    y = received_preamble(truth, d_grid, config.noise_var_w, rng)
    t0 = time.perf_counter()
    h_ls = ls_estimate(y, d_grid)
    ls_seconds = time.perf_counter() - t0

    aoa = None
    sense_seconds = 0.0
    if "sakf" in methods or "mmse" in methods:
        t0 = time.perf_counter()
        aoa = shared.aoa if shared is not None else _sense(config, h_ls)
        sense_seconds = time.perf_counter() - t0

    # Data period: block fading, the packet's grid columns carry the data
    # symbols (cyclically if more data symbols than preamble symbols).
    num_data = config.num_data_symbols
    used = min(num_data, m_s)
    col_map = np.arange(num_data) % m_s

    estimates: dict[str, np.ndarray] = {}
    est_seconds: dict[str, float] = {}
    for method in methods:
        t0 = time.perf_counter()
        if method == "ls":
            estimates[method] = h_ls[:, :used]
            est_seconds[method] = ls_seconds
        elif method == "mmse":
            if rhh is None:
                rhh = compute_rhh(config, snr_db)
            estimates[method] = mmse_estimate(h_ls[:, :used], rhh, aoa.est_noise_var)
            est_seconds[method] = ls_seconds + sense_seconds + (time.perf_counter() - t0)
        elif method == "sakf":
            estimates[method] = sakf_estimate_grid(h_ls[:, :used], aoa, bs)
            est_seconds[method] = ls_seconds + sense_seconds + (time.perf_counter() - t0)
        else:
            raise ConfigError(f"unknown method {method!r}")

    truth_used = truth.values[:, :used]
    mse = {
        m: float(np.mean(np.sum(np.abs(est - truth_used) ** 2, axis=-1, dtype=np.float64)))
        for m, est in estimates.items()
    }

    # Shared data transmission through the same channel.
    tx_bits = rng.integers(0, 2, size=n_c * num_data * bits_per_symbol, dtype=np.int8)
    symbols = qam_modulate(tx_bits, order).reshape(n_c, num_data).astype(dtype)
    y_data = truth.values[:, col_map, :] * symbols[:, :, None]
    if config.noise_var_w > 0:
        y_data = y_data + complex_noise(rng, y_data.shape, config.noise_var_w, dtype)

    results = {}
    for method in methods:
        h_hat = estimates[method][:, col_map, :]
        detected = zf_detect(y_data, h_hat).reshape(-1)
        rx_bits = qam_demodulate(detected, order)
        errors, total, _ = bit_error_rate(tx_bits, rx_bits)
        results[method] = TrialResult(errors, total, mse[method], est_seconds[method])
    return results


def run_trial(
    config: ExperimentConfig,
    snr_db: float,
    method: str,
    trial_index: int,
    rhh: np.ndarray | None = None,
    shared: SharedSensing | None = None,
) -> TrialResult:
    """One packet, one method: (bit errors, bits, channel MSE, est time).

    The packet realization does not depend on the method, so calling this
    for several methods at the same (snr_db, trial_index) gives paired
    results on the identical channel and noise.
    """
    config.validate()
    return _run_packet(config, snr_db, trial_index, [method], rhh=rhh, shared=shared)[method.lower()]


def compute_rhh(config: ExperimentConfig, snr_db: float) -> np.ndarray:
    """Genie channel covariance for the MMSE baseline.

    Averages outer products of true CSI vectors over ``rhh_realizations``
    independent channel draws with the configured path statistics (each
    power-calibrated to the target SNR), sampling ``rhh_cells`` random grid
    cells per draw. Seeded independently of the trial streams.
    """
    rng = _packet_rng(config, snr_db, _KIND_RHH, 0)
    bounds = config.path_bounds()
    bs = config.bs_array()
    ue = config.ue_array()
    wave_proto = config.waveform()
    target = 10.0 ** (snr_db / 10.0)
    n_c, m_s = config.num_subcarriers, config.num_symbols

    vectors = np.empty((config.rhh_realizations * config.rhh_cells, bs.num_elements), dtype=np.complex128)
    row = 0
    for _ in range(config.rhh_realizations):
        paths = sample_paths(wave_proto, bounds, rng)
        chi = transmit_bf_gains(paths, ue)
        pt = power_for_snr(target, paths, chi, config.noise_var_w)
        n_idx = rng.integers(0, n_c, size=config.rhh_cells)
        m_idx = rng.integers(0, m_s, size=config.rhh_cells)
        cells = np.zeros((config.rhh_cells, bs.num_elements), dtype=np.complex128)
        for path, chi_l in zip(paths, chi):
            phase = (
                2.0 * np.pi * m_idx * wave_proto.symbol_duration_s * path.doppler_hz
                - 2.0 * np.pi * n_idx * config.subcarrier_spacing_hz * path.delay_s
            )
            cells += (path.gain * np.sqrt(pt) * chi_l) * np.exp(1j * phase)[:, None] * steering_vector(bs, path.aoa_rx)[None, :]
        vectors[row : row + config.rhh_cells] = cells
        row += config.rhh_cells
    return estimate_rhh(vectors)


def estimate_shared_sensing(config: ExperimentConfig, snr_db: float) -> SharedSensing:
    """Dedicated sensing packet for aoa_reuse mode: draw one path geometry
    for the SNR point and estimate its AoAs once."""
    rng = _packet_rng(config, snr_db, _KIND_AOA, 0)
    paths = sample_paths(config.waveform(), config.path_bounds(), rng)
    chi = transmit_bf_gains(paths, config.ue_array())
    pt = power_for_snr(10.0 ** (snr_db / 10.0), paths, chi, config.noise_var_w)
    wave = config.waveform(tx_power_w=pt)
    truth = true_csi(paths, OffsetProcess.zero(config.num_symbols), wave, config.bs_array(), chi,
                     dtype=config.complex_dtype)
    d_grid = preamble_grid(config.num_subcarriers, config.num_symbols, rng).astype(config.complex_dtype)
    y = received_preamble(truth, d_grid, config.noise_var_w, rng)
    aoa = _sense(config, ls_estimate(y, d_grid))
    return SharedSensing(paths=paths, aoa=aoa)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------


def _trial_chunk(config, snr_db, methods, start, stop, rhh, shared):
    """Aggregate a contiguous range of trials (worker task)."""
    totals = {m: [0, 0, 0.0, 0.0] for m in methods}
    for trial in range(start, stop):
        packet = _run_packet(config, snr_db, trial, methods, rhh=rhh, shared=shared)
        for m in methods:
            r = packet[m]
            t = totals[m]
            t[0] += r.errors
            t[1] += r.bits
            t[2] += r.channel_mse
            t[3] += r.est_seconds
    return totals


def ber_sweep(config: ExperimentConfig) -> BerTable:
    """Monte-Carlo BER/MSE sweep over methods x SNR points.

    Trials are distributed over ``config.workers`` processes in fixed-size
    chunks and reduced in chunk order, so the emitted numbers do not depend
    on the worker count.
    """
    config.validate()
    methods = [m.lower() for m in config.methods]
    snrs = sorted(float(s) for s in config.snr_points_db)
    trials = config.trials_per_point

    chunks = [(s, min(s + _TRIAL_CHUNK, trials)) for s in range(0, trials, _TRIAL_CHUNK)]
    table = BerTable()
    pool = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for snr_db in snrs:
            shared = estimate_shared_sensing(config, snr_db) if config.aoa_reuse else None
            rhh = compute_rhh(config, snr_db) if "mmse" in methods else None
            if pool is not None:
                futures = [
                    pool.submit(_trial_chunk, config, snr_db, methods, a, b, rhh, shared)
                    for a, b in chunks
                ]
                partials = [f.result() for f in futures]  # fixed chunk order
            else:
                partials = [_trial_chunk(config, snr_db, methods, a, b, rhh, shared) for a, b in chunks]
            for m in methods:
                errors = sum(p[m][0] for p in partials)
                bits = sum(p[m][1] for p in partials)
                mse_total = 0.0
                t_total = 0.0
                for p in partials:
                    mse_total += p[m][2]
                    t_total += p[m][3]
                table.rows.append(
                    BerRow(
                        method=m,
                        snr_db=snr_db,
                        num_bits=bits,
                        num_errors=errors,
                        ber=errors / bits,
                        channel_mse=mse_total / trials,
                        wall_time_s=t_total if config.record_timing else 0.0,
                    )
                )
    finally:
        if pool is not None:
            pool.shutdown()
    return table


def snr_at_ber(table: BerTable, method: str, target_ber: float = 1e-2) -> float:
    """SNR (dB) at which the method's BER curve crosses the target.

    Uses log-linear interpolation between the bracketing sweep points; a
    zero-BER endpoint is floored at half an error over its bit count. The
    highest-SNR crossing is used when noise makes the curve non-monotonic.
    """
    rows = table.for_method(method)
    if len(rows) < 2:
        raise ValueError(f"need at least two sweep points for method {method!r}")
    bracket = None
    for lo, hi in zip(rows, rows[1:]):
        if lo.ber >= target_ber > hi.ber:
            bracket = (lo, hi)
    if bracket is None:
        raise ValueError(f"BER curve for {method!r} does not cross {target_ber}")
    lo, hi = bracket
    ber_hi = hi.ber if hi.ber > 0 else 0.5 / hi.num_bits
    x = (np.log(lo.ber) - np.log(target_ber)) / (np.log(lo.ber) - np.log(ber_hi))
    return float(lo.snr_db + x * (hi.snr_db - lo.snr_db))


# --------------------------------------------------------------------------
# Results emission
# --------------------------------------------------------------------------


def emit_results(table: BerTable, out_path: str, fmt: str = "csv") -> list:
    """Write sweep results; returns the list of files written.

    ``csv`` writes a single file with the fixed header. ``plotdata`` writes
    one two-column (snr_db, ber) series file per method, named by appending
    ``_<method>`` to the output stem.
    """
    if not table.rows:
        raise ValueError("refusing to emit an empty results table")
    if fmt == "csv":
        with open(out_path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in table.rows:
                fh.write(
                    f"{r.method},{r.snr_db!r},{r.num_bits},{r.num_errors},"
                    f"{r.ber!r},{r.channel_mse!r},{r.wall_time_s!r}\n"
                )
        return [out_path]
    if fmt == "plotdata":
        stem, ext = os.path.splitext(out_path)
        ext = ext or ".dat"
        written = []
        for method in table.methods():
            path = f"{stem}_{method}{ext}"
            with open(path, "w") as fh:
                for r in table.for_method(method):
                    fh.write(f"{r.snr_db!r} {r.ber!r}\n")
            written.append(path)
        return written
    raise ValueError(f"unknown output format {fmt!r}")


def parse_results(path: str) -> BerTable:
    """Read back a CSV written by :func:`emit_results`."""
    table = BerTable()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        for rec in reader:
            table.rows.append(
                BerRow(rec[0], float(rec[1]), int(rec[2]), int(rec[3]), float(rec[4]), float(rec[5]), float(rec[6]))
            )
    return table


# --------------------------------------------------------------------------
# Complexity benchmark
# --------------------------------------------------------------------------


@dataclass
class BenchResult:
    rows: list            # (method, size, seconds_per_estimate)
    slopes: dict          # method -> fitted log-log slope

    def times_for(self, method: str) -> list:
        return [(n, t) for m, n, t in self.rows if m == method]


def complexity_bench(sizes, repetitions: int = 5, seed: int = 0) -> BenchResult:
    """Median per-estimate wall time of each method versus array size N.

    The LS op is the elementwise pilot division; the enhancement-filter op
    is the LS division plus the two-axis forward/backward filtering of a
    P x Q = sqrt(N) x sqrt(N) matrix (direction search excluded); the MMSE
    op builds and applies R (R + s I)^-1 per estimate. LS and the filter
    are timed over large batches to amortize interpreter overhead; MMSE is
    timed per estimate since its matrix inverse dominates.
    """
    sizes = sorted(int(n) for n in sizes)
    if sizes != sorted(set(sizes)) or len(sizes) < 2:
        raise ValueError("sizes must be distinct and at least two")
    rng = np.random.default_rng(seed)
    rows = []
    batch_div = 2048
    batch_kf = 2048
    for n in sizes:
        p = int(round(np.sqrt(n)))
        if p * p != n:
            raise ValueError(f"benchmark sizes must be perfect squares, got {n}")
        factors = TransferFactors(np.exp(-1j * 0.7), np.exp(-1j * 1.3))
        y_div = (rng.standard_normal((batch_div, n)) + 1j * rng.standard_normal((batch_div, n)))
        d_div = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(batch_div, 1)))
        div_out = np.empty_like(y_div)
        mats = (rng.standard_normal((batch_kf, p, p)) + 1j * rng.standard_normal((batch_kf, p, p)))
        d_kf = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(batch_kf, 1, 1)))

        # a stack of distinct covariances/estimates: each estimate pays for
        # its own filter build (the O(N^3) inverse) and application
        batch_mmse = max(1, 2048 // n)
        x = rng.standard_normal((batch_mmse, n, n)) + 1j * rng.standard_normal((batch_mmse, n, n))
        rs = x @ np.conj(np.swapaxes(x, 1, 2)) / n + np.eye(n)
        hs = rng.standard_normal((batch_mmse, n, 1)) + 1j * rng.standard_normal((batch_mmse, n, 1))
        eye = np.eye(n)

        ls_t, kf_t, mmse_t = [], [], []
        # one untimed warm-up per op settles allocator and BLAS state
        np.divide(y_div, d_div, out=div_out)
        filter_matrices(mats / d_kf, factors, 1.0)
        (rs @ np.linalg.inv(rs + eye)) @ hs
        for _ in range(repetitions):
            t0 = time.perf_counter()
            np.divide(y_div, d_div, out=div_out)
            ls_t.append((time.perf_counter() - t0) / batch_div)

            t0 = time.perf_counter()
            filter_matrices(mats / d_kf, factors, 1.0)
            kf_t.append((time.perf_counter() - t0) / batch_kf)

            t0 = time.perf_counter()
            (rs @ np.linalg.inv(rs + eye)) @ hs
            mmse_t.append((time.perf_counter() - t0) / batch_mmse)

        rows.append(("ls", n, float(np.median(ls_t))))
        rows.append(("sakf", n, float(np.median(kf_t))))
        rows.append(("mmse", n, float(np.median(mmse_t))))

    slopes = {}
    for method in ("ls", "sakf", "mmse"):
        pts = [(n, t) for m, n, t in rows if m == method]
        log_n = np.log([n for n, _ in pts])
        log_t = np.log([t for _, t in pts])
        slopes[method] = float(np.polyfit(log_n, log_t, 1)[0])
    return BenchResult(rows=rows, slopes=slopes)


# --------------------------------------------------------------------------
# Flat key=value config files
# --------------------------------------------------------------------------

_TUPLE_FIELDS = {"snr_points_db", "methods", "azimuth_sector_deg", "elevation_sector_deg"}
_BOOL_FIELDS = {"aoa_reuse", "offsets_enabled", "record_timing"}


def load_config(path: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read a flat ``key = value`` config file over a base configuration.

    Lines are ``name = value`` with ``#`` comments; names are the
    ExperimentConfig field names. List-valued fields take comma-separated
    values.
    """
    cfg = base if base is not None else ExperimentConfig()
    fields = {f.name: f for f in cfg.__dataclass_fields__.values()}
    overrides = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key not in fields:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            overrides[key] = _parse_value(key, raw)
    return replace(cfg, **overrides).validate()


def _parse_value(key: str, raw: str):
    if key in _TUPLE_FIELDS:
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if key == "methods":
            return tuple(s.lower() for s in items)
        return tuple(float(s) for s in items)
    if key in _BOOL_FIELDS:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean {raw!r} for {key}")
    if key in ("dtype",):
        return raw
    try:
        if any(c in raw for c in ".eE") and key not in ("master_seed",):
            return float(raw)
        return int(raw)
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r} for {key}") from None
