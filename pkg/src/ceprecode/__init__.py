"""Constant-envelope multi-user precoding for frequency-selective massive
MIMO downlinks: channel simulation, the phase-only block coordinate-descent
precoder, an achievable-rate lower bound, a zero-forcing baseline, and an
experiment harness."""

__version__ = "0.1.0"

from .channel import (
    ChannelTensor,
    PowerDelayProfile,
    ReceivedFrame,
    add_awgn,
    generate_channel,
    noise_free_receive,
)
from .frames import PhaseFrame, SymbolFrame, gaussian_symbols, wrap_angle
from .precoder import (
    PrecoderConfig,
    PrecoderReport,
    ResidualState,
    block_bounds,
    evaluate_objective,
    init_residuals,
    optimize_block,
    precode_frame,
    transmit_signal,
    update_angle,
)
from .rate import (
    MuiCovariance,
    MuiFrame,
    RateEstimate,
    compute_mui,
    ergodic_rate,
    estimate_mui_covariance,
    rate_lower_bound,
)
from .baseline import (
    FlatChannelMatrix,
    UnreachableTargetError,
    zf_min_power,
    zf_per_user_rate_flat,
    zf_per_user_rate_selective,
)
from .harness import (
    ExperimentConfig,
    MinPowerResult,
    SweepRow,
    best_symbol_energy,
    ce_min_power,
    read_csv,
    sweep_antennas,
    sweep_tau,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
