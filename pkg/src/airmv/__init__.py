"""Non-coherent over-the-air majority-vote aggregation.

Sensors encode sign votes into energy-normalized complementary
sequences, transmit simultaneously, and a receiver recovers each
majority vote from half-energy comparisons without any channel state
information.  The package bundles the encoder, channel models, the
energy detector, seeded Monte-Carlo experiment drivers, and a waypoint
guidance loop closed over the detected votes.
"""

from .sequences import (
    CsParams,
    aacf,
    build_cs,
    gray_coordinate,
    gray_half_masks,
    identity_perm,
    index_of,
    pmepr_db,
    PMEPR_BOUND_DB,
)
from .encoder import EncoderConfig, encode, encode_batch, modulate_votes, normalization_offset
from .channel import (
    ChannelModel,
    ChannelRealization,
    draw_channel,
    snr_to_noise_variance,
    superpose,
)
from .detector import MetricPair, VoteCensus, detect_mv, expected_metrics, half_energies
from .experiments import (
    CerExperimentConfig,
    CerResult,
    Lemma1Report,
    PmeprResult,
    VoteDistribution,
    computation_rate,
    run_cer_experiment,
    run_pmepr_experiment,
    validate_lemma1,
    wilson_interval,
)
from .guidance import GuidanceConfig, TrajectoryLog, run_mission, step_dynamics

__version__ = "0.1.0"

__all__ = [
    "CsParams",
    "aacf",
    "build_cs",
    "gray_coordinate",
    "gray_half_masks",
    "identity_perm",
    "index_of",
    "pmepr_db",
    "PMEPR_BOUND_DB",
    "EncoderConfig",
    "encode",
    "encode_batch",
    "modulate_votes",
    "normalization_offset",
    "ChannelModel",
    "ChannelRealization",
    "draw_channel",
    "snr_to_noise_variance",
    "superpose",
    "MetricPair",
    "VoteCensus",
    "detect_mv",
    "expected_metrics",
    "half_energies",
    "CerExperimentConfig",
    "CerResult",
    "Lemma1Report",
    "PmeprResult",
    "VoteDistribution",
    "computation_rate",
    "run_cer_experiment",
    "run_pmepr_experiment",
    "validate_lemma1",
    "wilson_interval",
    "GuidanceConfig",
    "TrajectoryLog",
    "run_mission",
    "step_dynamics",
    "__version__",
]
