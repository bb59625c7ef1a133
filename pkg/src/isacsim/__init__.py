"""Coherent-compensation OFDM sensing for echoes delayed beyond the cyclic prefix."""

from .analytic import (
    CompensationPlan,
    DecisionThresholds,
    SinrBreakdown,
    d0_threshold,
    gamma_threshold,
    optimal_compensation,
    optimal_n_comp,
    sinr_post,
    sinr_pre,
)
from .channel import TargetScenario, anchor_sinr, apply_target_channel, pathloss_db
from .sensing import (
    PeakEstimate,
    RangeDopplerMap,
    VcpConfig,
    compensate,
    demod_divide,
    estimate_offset_then_compensate,
    find_peak,
    make_rdm,
    rdm_sinr_db,
    segment,
    sense,
    vcp_process,
)
from .waveform import (
    SPEED_OF_LIGHT,
    NumerologyConfig,
    TimeFrame,
    generate_payload,
    ofdm_demodulate,
    ofdm_modulate,
    qam_map,
)

__version__ = "0.1.0"
