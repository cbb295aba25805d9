"""Seeded Monte-Carlo experiments: vote-error rates, envelope-power
distributions, and closed-form metric validation.

All experiments are deterministic functions of (config, seed): trials
are partitioned into fixed-size blocks, each block draws from its own
counter-based substream, and aggregation reduces the per-block results
in block order.  The worker count only changes wall-clock time.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import binomtest

from .channel import ChannelModel, noise_variance_to_snr_db, transmit_batch
from .detector import VoteCensus, detect_mv_batch, expected_metrics, half_energy_batch
from .encoder import EncoderConfig, encode_batch, _phase_signs
from .sequences import pmepr_db_batch
from . import streams
from .streams import block_sizes, substream

__all__ = [
    "CerExperimentConfig",
    "CerPoint",
    "CerResult",
    "Lemma1Report",
    "PmeprResult",
    "VoteDistribution",
    "computation_rate",
    "draw_votes",
    "run_cer_experiment",
    "run_pmepr_experiment",
    "true_majority_vote",
    "validate_lemma1",
    "wilson_interval",
]

# Keep per-block working arrays around 4M elements; the split is part of
# the substream layout, so it is fixed rather than machine-dependent.
_BLOCK_ELEMENTS = 1 << 22


def _block_trials(n_sensors: int, length: int) -> int:
    return max(1, _BLOCK_ELEMENTS // max(1, n_sensors * length))


@dataclass(frozen=True)
class VoteDistribution:
    """Per-slot vote probabilities: +1 w.p. p, -1 w.p. q, 0 w.p. z."""

    p: float
    q: float
    z: float

    def __post_init__(self):
        if min(self.p, self.q, self.z) < 0:
            raise ValueError("vote probabilities must be >= 0")
        if abs(self.p + self.q + self.z - 1.0) > 1e-12:
            raise ValueError("vote probabilities must sum to 1")

    @classmethod
    def from_p_z(cls, p: float, z: float) -> "VoteDistribution":
        q = 1.0 - p - z
        if q < -1e-12:
            raise ValueError(f"infeasible vote probabilities: p={p}, z={z} gives q={q}")
        return cls(p, max(q, 0.0), z)


def draw_votes(dist: VoteDistribution, shape, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. votes with the given distribution; +1 band first, then -1."""
    u = rng.random(shape)
    return np.where(u < dist.p, 1, np.where(u < dist.p + dist.q, -1, 0)).astype(np.int64)


def true_majority_vote(votes: np.ndarray, axis: int = -2) -> np.ndarray:
    """Sign of the vote sum over sensors; a zero sum counts as +1."""
    total = np.asarray(votes).sum(axis=axis)
    return np.where(total >= 0, 1, -1).astype(np.int64)


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for an error proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ci = binomtest(int(errors), int(trials)).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    return (float(ci.low), float(ci.high))


def computation_rate(m: int) -> Fraction:
    """Aggregations computed per channel use (real dimensions): m / 2**(m+1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return Fraction(m, 2 ** (m + 1))


def _run_blocks(worker, n_blocks: int, workers: int) -> list:
    """Evaluate ``worker(block_index)`` for every block, results in block order."""
    if workers <= 1:
        return [worker(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, range(n_blocks)))


# ---------------------------------------------------------------------------
# Vote-error-rate sweeps


@dataclass(frozen=True)
class CerExperimentConfig:
    """Sweep definition for the vote-error-rate experiment.

    Each (m, p) pair is one sweep point: per trial, every sensor draws
    an i.i.d. vote for each of the m slots from (p, q=1-p-z, z), all
    sensors transmit with fresh random phases, one channel draw is
    superposed, and every slot decision is compared with the true
    majority vote.  Errors are counted per slot.
    """

    n_sensors: int
    m_list: tuple[int, ...]
    p_sweep: tuple[float, ...]
    z: float
    channel: ChannelModel
    alpha: float = math.inf
    trials: int = 10_000
    seed: int = 0
    n_phases: int = 2

    def __post_init__(self):
        if self.n_sensors < 1:
            raise ValueError("n_sensors must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))
        object.__setattr__(self, "p_sweep", tuple(float(p) for p in self.p_sweep))
        for p in self.p_sweep:
            VoteDistribution.from_p_z(p, self.z)  # rejects infeasible pairs


@dataclass(frozen=True)
class CerPoint:
    """One sweep point with its error estimate and 95% Wilson interval."""

    channel: str
    m: int
    n_sensors: int
    p: float
    q: float
    z: float
    alpha: float
    snr_db: float
    trials: int
    errors: int
    cer: float
    ci_low: float
    ci_high: float
    per_slot_cer: tuple[float, ...]


@dataclass(frozen=True)
class CerResult:
    config: CerExperimentConfig
    points: tuple[CerPoint, ...]

    CSV_HEADER = (
        "experiment,channel,m,K,p,q,z,alpha,snr_db,trials,cer,ci_low,ci_high"
    )

    def to_rows(self) -> list[tuple]:
        return [
            (
                "cer",
                pt.channel,
                pt.m,
                pt.n_sensors,
                pt.p,
                pt.q,
                pt.z,
                pt.alpha,
                pt.snr_db,
                pt.trials,
                pt.cer,
                pt.ci_low,
                pt.ci_high,
            )
            for pt in self.points
        ]

    def point(self, m: int, p: float) -> CerPoint:
        for pt in self.points:
            if pt.m == m and pt.p == p:
                return pt
        raise KeyError(f"no sweep point m={m}, p={p}")


def _cer_block(cfg: CerExperimentConfig, enc: EncoderConfig, dist: VoteDistribution,
               point_id: int, block_id: int, trials: int) -> np.ndarray:
    """Slot-wise error counts for one block of trials."""
    rng = substream(cfg.seed, streams.CER_STREAM, point_id, block_id)
    votes = draw_votes(dist, (trials, cfg.n_sensors, enc.m), rng)
    truth = true_majority_vote(votes)
    seqs = encode_batch(votes, enc, rng)
    received = transmit_batch(seqs, cfg.channel, rng)
    decisions = detect_mv_batch(received, enc.perm)
    return (decisions != truth).sum(axis=0, dtype=np.int64)


def run_cer_experiment(cfg: CerExperimentConfig, workers: int = 1) -> CerResult:
    """Run the full (m, p) sweep; deterministic for any worker count."""
    snr_db = noise_variance_to_snr_db(cfg.channel.noise_var, cfg.channel.tx_power)
    points = []
    point_id = 0
    for m in cfg.m_list:
        enc = EncoderConfig(m=m, alpha=cfg.alpha, n_phases=cfg.n_phases)
        blocks = block_sizes(cfg.trials, _block_trials(cfg.n_sensors, enc.length))
        for p in cfg.p_sweep:
            dist = VoteDistribution.from_p_z(p, cfg.z)
            pid = point_id
            worker = lambda b, pid=pid, enc=enc, dist=dist, blocks=blocks: _cer_block(
                cfg, enc, dist, pid, b, blocks[b]
            )
            per_slot = np.sum(_run_blocks(worker, len(blocks), workers), axis=0)
            errors = int(per_slot.sum())
            total = cfg.trials * m
            low, high = wilson_interval(errors, total)
            points.append(
                CerPoint(
                    channel=cfg.channel.kind,
                    m=m,
                    n_sensors=cfg.n_sensors,
                    p=p,
                    q=dist.q,
                    z=dist.z,
                    alpha=cfg.alpha,
                    snr_db=snr_db,
                    trials=cfg.trials,
                    errors=errors,
                    cer=errors / total,
                    ci_low=low,
                    ci_high=high,
                    per_slot_cer=tuple(per_slot / cfg.trials),
                )
            )
            point_id += 1
    return CerResult(config=cfg, points=tuple(points))


# ---------------------------------------------------------------------------
# Envelope-power distribution


@dataclass(frozen=True)
class PmeprResult:
    """Sorted per-sequence envelope-power ratios (dB) plus draw metadata."""

    m: int
    n_sensors: int
    p: float
    q: float
    z: float
    alpha: float
    samples: int
    pmepr_db: np.ndarray

    CSV_HEADER = "pmepr_db,ccdf"

    @property
    def max_db(self) -> float:
        return float(self.pmepr_db[-1])

    def fraction_below(self, threshold_db: float) -> float:
        return float(np.searchsorted(self.pmepr_db, threshold_db) / self.samples)

    def ccdf_table(self) -> list[tuple[float, float]]:
        """(value, P(PMEPR > value)) at every sorted sample point."""
        n = self.samples
        return [
            (float(v), float((n - i - 1) / n)) for i, v in enumerate(self.pmepr_db)
        ]

    def to_rows(self) -> list[tuple]:
        return self.ccdf_table()


def run_pmepr_experiment(
    n_sensors: int,
    m: int,
    p: float,
    z: float,
    alpha: float = math.inf,
    samples: int = 10_000,
    seed: int = 0,
    oversample: int = 16,
    workers: int = 1,
) -> PmeprResult:
    """Sample the envelope-power ratio of encoded sequences.

    Each sample is one sensor's transmission with votes drawn i.i.d.
    from (p, 1-p-z, z); ``n_sensors`` is carried as run metadata since
    the envelope ratio is a per-transmitter property.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    dist = VoteDistribution.from_p_z(p, z)
    enc = EncoderConfig(m=m, alpha=alpha)
    # The oversampled FFT is the widest array here; size blocks to it.
    blocks = block_sizes(samples, _block_trials(oversample, enc.length))

    def worker(block_id: int) -> np.ndarray:
        rng = substream(seed, streams.PMEPR_STREAM, block_id)
        votes = draw_votes(dist, (blocks[block_id], m), rng)
        seqs = encode_batch(votes, enc, rng)
        return pmepr_db_batch(seqs, oversample)

    values = np.concatenate(_run_blocks(worker, len(blocks), workers))
    values.sort(kind="stable")
    return PmeprResult(
        m=m,
        n_sensors=n_sensors,
        p=dist.p,
        q=dist.q,
        z=dist.z,
        alpha=alpha,
        samples=samples,
        pmepr_db=values,
    )


# ---------------------------------------------------------------------------
# Closed-form metric validation


@dataclass(frozen=True)
class Lemma1Report:
    """Empirical vs closed-form half-energy means with z-scores."""

    census: VoteCensus
    alpha: float
    noise_var: float
    m: int
    trials: int
    expected_plus: float
    expected_minus: float
    mean_plus: float
    mean_minus: float
    se_plus: float
    se_minus: float

    @property
    def z_plus(self) -> float:
        return (self.mean_plus - self.expected_plus) / self.se_plus

    @property
    def z_minus(self) -> float:
        return (self.mean_minus - self.expected_minus) / self.se_minus

    @property
    def passed(self) -> bool:
        return abs(self.z_plus) < 4.0 and abs(self.z_minus) < 4.0

    CSV_HEADER = (
        "metric,k_plus,k_minus,k_zero,alpha,noise_var,m,trials,"
        "expected,empirical,std_error,z_score,passed"
    )

    def to_rows(self) -> list[tuple]:
        common = (
            self.census.k_plus,
            self.census.k_minus,
            self.census.k_zero,
            self.alpha,
            self.noise_var,
            self.m,
            self.trials,
        )
        return [
            ("m_plus", *common, self.expected_plus, self.mean_plus,
             self.se_plus, self.z_plus, self.passed),
            ("m_minus", *common, self.expected_minus, self.mean_minus,
             self.se_minus, self.z_minus, self.passed),
        ]


def validate_lemma1(
    census: VoteCensus,
    alpha: float,
    noise_var: float,
    m: int,
    trials: int = 100_000,
    seed: int = 0,
    slot: int = 1,
    workers: int = 1,
    dtype=np.float32,
) -> Lemma1Report:
    """Monte-Carlo check of the closed-form metric means.

    Runs the full chain (encode with fresh phases, independent-per-
    element Rayleigh fading, superpose, half-energy metrics) for a
    fixed vote census on one slot, and compares the empirical means
    against :func:`expected_metrics`.

    Only energy means are estimated, never sign decisions, so the
    default float32 working precision contributes ~1e-6 relative error
    to each metric sample, orders of magnitude below the Monte-Carlo
    standard error at any practical trial count.  Sums are accumulated
    in float64 either way.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n_sensors = census.total
    if n_sensors < 1 and noise_var == 0.0:
        raise ValueError("need at least one sensor or nonzero noise")
    enc = EncoderConfig(m=m, alpha=alpha)
    if not 1 <= slot <= m:
        raise IndexError(f"slot must be in 1..{m}")
    channel = ChannelModel("selective_rayleigh", noise_var=noise_var)

    # Fixed votes: the census on the chosen slot, absences elsewhere.
    votes = np.zeros((max(n_sensors, 1), m), dtype=np.int64)
    votes[: census.k_plus, slot - 1] = 1
    votes[census.k_plus : census.k_plus + census.k_minus, slot - 1] = -1
    if n_sensors == 0:
        votes = votes[:0]

    blocks = block_sizes(trials, _block_trials(max(n_sensors, 1), enc.length))

    # The votes never change, so the per-sensor amplitude rows are fixed;
    # only the phase signs and the channel are redrawn per trial.  The
    # draw layout matches encode_batch exactly (weights then offset),
    # so this shortcut produces bit-identical sequences.
    if n_sensors:
        silent = EncoderConfig(m=m, alpha=alpha, phase_randomization=False)
        amps = np.abs(encode_batch(votes, silent, dtype=dtype))

    def worker(block_id: int):
        rng = substream(seed, streams.LEMMA_STREAM, block_id)
        b = blocks[block_id]
        if n_sensors:
            seqs = amps * _phase_signs(enc, (b, n_sensors), rng, dtype)
            received = transmit_batch(seqs, channel, rng)
        else:
            zeros = np.zeros((b, 1, enc.length), dtype=dtype)
            received = transmit_batch(zeros, channel, rng)
        m_plus, m_minus = half_energy_batch(received, enc.perm)
        mp = m_plus[:, slot - 1].astype(np.float64)
        mm = m_minus[:, slot - 1].astype(np.float64)
        return np.array(
            [mp.sum(), (mp**2).sum(), mm.sum(), (mm**2).sum()], dtype=np.float64
        )

    sums = np.sum(_run_blocks(worker, len(blocks), workers), axis=0)
    mean_p = sums[0] / trials
    mean_m = sums[2] / trials
    var_p = max(sums[1] / trials - mean_p**2, 0.0)
    var_m = max(sums[3] / trials - mean_m**2, 0.0)
    exp_p, exp_m = expected_metrics(census, alpha, noise_var, m)
    return Lemma1Report(
        census=census,
        alpha=alpha,
        noise_var=noise_var,
        m=m,
        trials=trials,
        expected_plus=exp_p,
        expected_minus=exp_m,
        mean_plus=float(mean_p),
        mean_minus=float(mean_m),
        se_plus=float(math.sqrt(var_p / trials)) or 1e-300,
        se_minus=float(math.sqrt(var_m / trials)) or 1e-300,
    )
