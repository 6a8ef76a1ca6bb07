"""Link-level simulator for uplink joint communication and sensing.

The package covers the whole chain: uniform planar array geometry and
beamforming (:mod:`~jcas_sim.array_geometry`), frequency-domain multipath
CSI synthesis (:mod:`~jcas_sim.channel`), QAM modems and ZF detection
(:mod:`~jcas_sim.modem`), LS / MMSE estimation and MDL+MUSIC sensing
(:mod:`~jcas_sim.estimation`), the sensing-aided scalar Kalman CSI
enhancement (:mod:`~jcas_sim.kalman`) and a reproducible Monte-Carlo
BER/complexity harness with CLI (:mod:`~jcas_sim.harness`,
:mod:`~jcas_sim.cli`).
"""

from .array_geometry import (
    AnglePair,
    ArrayConfig,
    SPEED_OF_LIGHT,
    direction_cosines,
    ls_beamformer,
    phase_shift,
    steering_vector,
)
from .channel import (
    CsiGrid,
    OffsetProcess,
    PathGeometryBounds,
    PathParams,
    SimWaveformConfig,
    power_for_snr,
    received_preamble,
    sample_paths,
    transmit_bf_gains,
    true_csi,
    uplink_snr,
)
from .estimation import (
    AoaEstimate,
    SubspaceDecomp,
    TransferFactors,
    estimate_aoas,
    estimate_rhh,
    ls_estimate,
    mdl_order,
    mmse_estimate,
    noise_power,
    sample_covariance,
    stack_csi,
    transfer_factors,
    unstack_csi,
)
from .kalman import (
    csi_matrix_view,
    filter_matrices,
    filter_matrix,
    kf_filter_sequence,
    kf_forward,
    kf_initial_variance,
    sakf_estimate,
    sakf_estimate_grid,
)
from .modem import (
    bit_error_rate,
    constellation,
    preamble_grid,
    qam_demodulate,
    qam_modulate,
    zf_detect,
)
from .harness import (
    BerRow,
    BerTable,
    BenchResult,
    ConfigError,
    ExperimentConfig,
    ber_sweep,
    complexity_bench,
    compute_rhh,
    emit_results,
    load_config,
    parse_results,
    run_trial,
    snr_at_ber,
)

__version__ = "0.1.0"
