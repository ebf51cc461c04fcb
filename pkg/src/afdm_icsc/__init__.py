"""AFDM integrated channel sounding and communication simulator."""

from .channel import (
    ChannelPath,
    ChannelRealization,
    GainProcess,
    Scenario,
    add_awgn,
    apply_waveform,
    jakes_gains,
    sample_channel,
    time_channel_matrix,
)
from .effective import EffectiveChannel, diagonal_support, effective_channel, single_path_template
from .estimator import EstimatedPath, EstimationReport, estimate_paths, nmse, reconstruct_heff
from .modem import (
    Frame,
    FrameLayout,
    build_frame,
    compute_ber,
    compute_evm,
    demap_qpsk,
    demodulate,
    lmmse_detect,
    map_qpsk,
    modulate,
)
from .paramdesign import (
    ChannelBounds,
    WaveformKind,
    canonical_params,
    check_orthogonality,
    cpp_length,
    default_c2,
    diag_shift,
    guard_count,
    min_c1,
    shift_to_delay_doppler,
)
from .sounding import PhysicalGrid, SoundingReport, accumulate, dps, pdp, rms_delay_spread, rms_doppler_spread
from .transforms import AfdmParams, chirp_diag, daft, daft_matrix, idaft

__version__ = "0.1.0"
