"""Closed-loop waypoint guidance driven by aggregated sensor feedback.

A vehicle that cannot localize itself updates its position from per-axis
feedback supplied by distributed sensors every ``t_update`` seconds:

    position[l] <- position[l] - t_update * velocity[l]
    velocity[l]  = clamp(mu * feedback[l], +-u_limit)

Three feedback strategies are supported: the averaged continuous
estimate error, the exact majority vote of the per-sensor sign votes,
and the majority vote recovered over the air through the full
encode/channel/detect chain.  The x, y, z axes ride on vote slots 1..3;
slots 4..m (when present) carry absentee votes.

Sensor noise and channel randomness come from separate per-round
substreams, so two strategies run with the same seed observe identical
sensor estimates round for round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel, snr_to_noise_variance, transmit_batch
from .detector import detect_mv_batch
from .encoder import EncoderConfig, encode_batch
from . import streams
from .streams import substream

__all__ = [
    "GuidanceConfig",
    "OacLink",
    "TrajectoryLog",
    "axis_votes",
    "feedback",
    "run_mission",
    "sensor_estimates",
    "step_dynamics",
]

STRATEGIES = ("continuous", "ideal_mv", "oac_mv")
AXES = 3


@dataclass(frozen=True)
class GuidanceConfig:
    """Mission parameters; defaults follow the desk-scale indoor scenario."""

    strategy: str = "oac_mv"
    t_update: float = 0.01
    mu: float = 2.0
    u_limit: float = 3.0
    sensor_var: float = 2.0
    n_sensors: int = 50
    snr_db: float = 10.0
    m: int = 6
    channel_kind: str = "selective_rayleigh"
    alpha: float = math.inf
    n_phases: int = 2
    phase_randomization: bool = True
    waypoint_eps: float = 0.25
    max_rounds: int = 20_000

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if not (self.t_update > 0 and self.u_limit > 0 and self.mu > 0):
            raise ValueError("t_update, mu and u_limit must be > 0")
        if not self.waypoint_eps > 0:
            raise ValueError("waypoint_eps must be > 0")
        if self.sensor_var < 0:
            raise ValueError("sensor_var must be >= 0")
        if self.n_sensors < 1:
            raise ValueError("n_sensors must be >= 1")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")
        if self.strategy == "oac_mv" and self.m < AXES:
            raise ValueError("oac_mv requires m >= 3 (one slot per axis)")

    def noise_var(self) -> float:
        return snr_to_noise_variance(self.snr_db)


def sensor_estimates(
    true_pos, sensor_var: float, n_sensors: int, rng: np.random.Generator
) -> np.ndarray:
    """(K, 3) noisy position estimates, i.i.d. Gaussian per sensor and axis."""
    pos = np.asarray(true_pos, dtype=float).reshape(AXES)
    noise = rng.standard_normal((n_sensors, AXES)) * math.sqrt(sensor_var)
    return pos[None, :] + noise


def axis_votes(estimates, target) -> np.ndarray:
    """(K, 3) sign votes; a sensor whose estimate hits the target exactly
    on an axis abstains there (vote 0)."""
    diff = np.asarray(estimates, dtype=float) - np.asarray(target, dtype=float)
    return np.sign(diff).astype(np.int64)


def _majority(votes: np.ndarray) -> np.ndarray:
    """Per-axis majority; a tied sum resolves to +1."""
    return np.where(votes.sum(axis=0) >= 0, 1, -1).astype(np.int64)


class OacLink:
    """One over-the-air aggregation link: encoder + channel + detector."""

    def __init__(self, cfg: GuidanceConfig):
        self.encoder = EncoderConfig(
            m=cfg.m,
            alpha=cfg.alpha,
            n_phases=cfg.n_phases,
            phase_randomization=cfg.phase_randomization,
        )
        self.channel = ChannelModel(cfg.channel_kind, noise_var=cfg.noise_var())

    def detect(self, votes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Detected votes for one simultaneous transmission round."""
        seqs = encode_batch(votes[None, :, :], self.encoder, rng)
        received = transmit_batch(seqs, self.channel, rng)
        return detect_mv_batch(received, self.encoder.perm)[0]


def _round_feedback(strategy, estimates, target, oac_link=None, rng=None):
    """Feedback triple for one round: (f, mv_true, mv_detected).

    For the continuous and ideal strategies the detected column mirrors
    the true majority vote (there is no transmission to corrupt).
    """
    votes = axis_votes(estimates, target)
    mv_true = _majority(votes)
    if strategy == "continuous":
        f = np.asarray(estimates, dtype=float).mean(axis=0) - np.asarray(target, float)
        return f, mv_true, mv_true
    if strategy == "ideal_mv":
        return mv_true.astype(float), mv_true, mv_true
    if strategy == "oac_mv":
        if oac_link is None or rng is None:
            raise ValueError("oac_mv feedback needs an OacLink and an rng")
        full = np.zeros((votes.shape[0], oac_link.encoder.m), dtype=np.int64)
        full[:, :AXES] = votes
        detected = oac_link.detect(full, rng)[:AXES]
        return detected.astype(float), mv_true, detected
    raise ValueError(f"unknown strategy {strategy!r}")


def feedback(strategy, estimates, target, oac_link=None, rng=None) -> np.ndarray:
    """Per-axis feedback for one round under the chosen strategy."""
    return _round_feedback(strategy, estimates, target, oac_link, rng)[0]


def step_dynamics(pos, fb, mu: float, u_limit: float, t_update: float):
    """One position update.  Velocity is mu*feedback clamped per axis to
    +-u_limit; the position moves opposite the feedback sign."""
    fb = np.asarray(fb, dtype=float)
    vel = np.clip(mu * fb, -u_limit, u_limit)
    return np.asarray(pos, dtype=float) - t_update * vel, vel


@dataclass
class TrajectoryLog:
    """Round-by-round mission record.

    Row r holds the state after round r's update: the position reached,
    the velocity applied, the feedback and vote columns that produced
    it, and the index of the waypoint being chased.  Replaying
    ``step_dynamics`` over (initial, feedback) reproduces the positions
    exactly.
    """

    initial: np.ndarray
    waypoints: np.ndarray
    seed: int
    strategy: str
    t_update: float
    completed: bool = False
    truncated: bool = False
    position: np.ndarray = field(default_factory=lambda: np.zeros((0, AXES)))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros((0, AXES)))
    feedback: np.ndarray = field(default_factory=lambda: np.zeros((0, AXES)))
    mv_true: np.ndarray = field(default_factory=lambda: np.zeros((0, AXES), dtype=np.int64))
    mv_detected: np.ndarray = field(default_factory=lambda: np.zeros((0, AXES), dtype=np.int64))
    waypoint_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def rounds(self) -> int:
        return self.position.shape[0]

    @property
    def final_position(self) -> np.ndarray:
        return self.position[-1] if self.rounds else self.initial

    CSV_HEADER = (
        "round,t_seconds,wp_index,pos_x,pos_y,pos_z,vel_x,vel_y,vel_z,"
        "f_x,f_y,f_z,mv_true_x,mv_true_y,mv_true_z,mv_hat_x,mv_hat_y,mv_hat_z"
    )

    def to_rows(self) -> list[tuple]:
        rows = []
        for r in range(self.rounds):
            rows.append(
                (
                    r,
                    (r + 1) * self.t_update,
                    int(self.waypoint_index[r]),
                    *self.position[r],
                    *self.velocity[r],
                    *self.feedback[r],
                    *self.mv_true[r],
                    *self.mv_detected[r],
                )
            )
        return rows


def run_mission(waypoints, initial, cfg: GuidanceConfig, seed: int = 0) -> TrajectoryLog:
    """Fly the waypoint list under ``cfg``; deterministic given ``seed``.

    The active waypoint advances whenever the vehicle is within
    ``waypoint_eps`` (Euclidean) of it, checked before each round.  The
    mission completes when the last waypoint is reached; hitting
    ``max_rounds`` first truncates the log and sets ``truncated``.
    """
    wps = np.asarray(waypoints, dtype=float).reshape(-1, AXES)
    if wps.shape[0] < 1:
        raise ValueError("need at least one waypoint")
    pos = np.asarray(initial, dtype=float).reshape(AXES).copy()
    link = OacLink(cfg) if cfg.strategy == "oac_mv" else None

    pos_log, vel_log, fb_log = [], [], []
    mvt_log, mvd_log, wp_log = [], [], []
    wp = 0
    rnd = 0
    completed = False
    while True:
        while wp < wps.shape[0] and np.linalg.norm(pos - wps[wp]) < cfg.waypoint_eps:
            wp += 1
        if wp == wps.shape[0]:
            completed = True
            break
        if rnd >= cfg.max_rounds:
            break
        target = wps[wp]
        est_rng = substream(seed, streams.UAV_SENSOR_STREAM, rnd)
        est = sensor_estimates(pos, cfg.sensor_var, cfg.n_sensors, est_rng)
        oac_rng = (
            substream(seed, streams.UAV_CHANNEL_STREAM, rnd)
            if cfg.strategy == "oac_mv"
            else None
        )
        fb, mv_true, mv_det = _round_feedback(cfg.strategy, est, target, link, oac_rng)
        pos, vel = step_dynamics(pos, fb, cfg.mu, cfg.u_limit, cfg.t_update)
        pos_log.append(pos.copy())
        vel_log.append(vel)
        fb_log.append(np.asarray(fb, dtype=float))
        mvt_log.append(mv_true)
        mvd_log.append(mv_det)
        wp_log.append(wp)
        rnd += 1

    def stack(rows, dtype=float):
        if rows:
            return np.stack(rows).astype(dtype)
        return np.zeros((0, AXES), dtype=dtype)

    return TrajectoryLog(
        initial=np.asarray(initial, dtype=float).reshape(AXES),
        waypoints=wps,
        seed=seed,
        strategy=cfg.strategy,
        t_update=cfg.t_update,
        completed=completed,
        truncated=not completed,
        position=stack(pos_log),
        velocity=stack(vel_log),
        feedback=stack(fb_log),
        mv_true=stack(mvt_log, np.int64),
        mv_detected=stack(mvd_log, np.int64),
        waypoint_index=np.asarray(wp_log, dtype=np.int64),
    )
