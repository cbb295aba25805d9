"""Vote-vector encoding into energy-normalized transmit sequences.

Each sensor holds a vote in {-1, 0, +1} per aggregation slot.  Votes map
to amplitude weights (+alpha, 0, -alpha), an offset renormalizes the
sequence energy to 2**m, and per-sensor random phase coefficients
decorrelate simultaneous transmitters.  ``alpha = inf`` selects the
exact limit: the half of the elements disagreeing with each nonzero
vote is zeroed and the survivors are scaled by sqrt(2) per vote.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sequences import (
    CsParams,
    build_cs,
    gray_half_masks,
    identity_perm,
    phase_roots,
    quad_phase_term,
    _check_perm,
    _permuted_bits,
)

__all__ = [
    "EncoderConfig",
    "encode",
    "encode_batch",
    "modulate_votes",
    "normalization_offset",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class EncoderConfig:
    """Static per-deployment encoder settings.

    ``perm=None`` resolves to the identity ordering.  ``alpha`` may be
    ``math.inf`` (the default), which routes every encode through the
    exact infinite-weight path.
    """

    m: int
    perm: tuple[int, ...] | None = None
    alpha: float = math.inf
    n_phases: int = 2
    phase_randomization: bool = True

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        perm = identity_perm(self.m) if self.perm is None else self.perm
        object.__setattr__(self, "perm", _check_perm(perm, self.m))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive (inf allowed)")
        if self.n_phases < 2:
            raise ValueError("n_phases must be >= 2")
        if self.m >= 2 and self.n_phases % 2 != 0:
            raise ValueError("n_phases must be even when m >= 2")

    @property
    def length(self) -> int:
        return 1 << self.m


def _check_votes(votes, m: int | None = None) -> np.ndarray:
    v = np.asarray(votes, dtype=np.int64)
    if m is not None and v.shape[-1] != m:
        raise ValueError(f"vote vectors must have length {m}")
    if v.size and np.abs(v).max() > 1:
        raise ValueError("votes must be -1, 0 or +1")
    return v


def modulate_votes(votes, alpha: float) -> np.ndarray:
    """Map votes to amplitude weights: +alpha, 0 or -alpha per entry."""
    v = _check_votes(votes)
    return np.where(v > 0, float(alpha), np.where(v < 0, -float(alpha), 0.0))


def normalization_offset(amp_weights) -> float:
    """Amplitude offset that pins the sequence squared 2-norm to 2**m.

    Equals -1/2 * sum(log((1 + exp(2*g)) / 2)) over the weights,
    evaluated overflow-safely.  Only defined for finite weights; the
    infinite path rescales survivors directly instead.
    """
    g = np.asarray(amp_weights, dtype=float)
    if not np.isfinite(g).all():
        raise ValueError("normalization_offset requires finite weights")
    return float(-0.5 * np.sum(np.logaddexp(0.0, 2.0 * g) - _LN2))


@lru_cache(maxsize=None)
def _sign_table(m: int, perm: tuple[int, ...]) -> np.ndarray:
    """All 2**(m+1) sign rows for the binary phase alphabet.

    Row (offset << m) + packed_weights holds the per-element signs for
    that linear-weight/offset draw; packing uses the same MSB-first
    order as :func:`airmv.sequences.bit_matrix`.
    """
    from .sequences import bit_matrix

    quad = quad_phase_term(m, perm).astype(np.int64)
    pbits = _permuted_bits(m, perm).astype(np.int64)
    w_rows = bit_matrix(m).astype(np.int64)  # row index == packed weights
    parity = (quad[None, :] + w_rows @ pbits.T) % 2
    base = 1.0 - 2.0 * parity
    table = np.concatenate([base, -base], axis=0)
    table.setflags(write=False)
    return table


def _draw_phases(rng: np.random.Generator, cfg: EncoderConfig, lead_shape=()):
    """Draw (linear weights, offset) uniformly over the phase alphabet.

    Draw order (weights then offset) is fixed; it is part of the
    reproducibility contract.
    """
    if cfg.phase_randomization:
        if rng is None:
            raise ValueError("phase randomization requires an rng")
        w = rng.integers(0, cfg.n_phases, size=lead_shape + (cfg.m,))
        c = rng.integers(0, cfg.n_phases, size=lead_shape)
        return w, c
    zeros = np.zeros(lead_shape + (cfg.m,), dtype=np.int64)
    return zeros, np.zeros(lead_shape, dtype=np.int64)


def encode(votes, cfg: EncoderConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Encode one vote vector into a length-2**m complex sequence.

    The output squared 2-norm is 2**m for every vote vector; with
    ``phase_randomization`` enabled only the element phases depend on
    the random draw, never the magnitudes.
    """
    v = _check_votes(votes, cfg.m)
    if v.ndim != 1:
        raise ValueError("encode takes a single vote vector")
    pw, pc = _draw_phases(rng, cfg)
    if math.isinf(cfg.alpha):
        params = CsParams(
            m=cfg.m,
            perm=cfg.perm,
            amp_weights=tuple(modulate_votes(v, math.inf)),
            amp_offset=0.0,
            phase_weights=tuple(int(x) for x in pw),
            phase_offset=int(pc),
            n_phases=cfg.n_phases,
            alpha_infinite=True,
        )
    else:
        weights = modulate_votes(v, cfg.alpha)
        params = CsParams(
            m=cfg.m,
            perm=cfg.perm,
            amp_weights=tuple(weights),
            amp_offset=normalization_offset(weights),
            phase_weights=tuple(int(x) for x in pw),
            phase_offset=int(pc),
            n_phases=cfg.n_phases,
        )
    return build_cs(params)


def _phase_signs(cfg: EncoderConfig, lead_shape, rng, dtype=np.float64) -> np.ndarray:
    """Fresh random phase signs, shape (*lead_shape, 2**m).

    Binary-alphabet shortcut for callers whose amplitudes are fixed
    across draws; consumes the generator exactly like
    :func:`encode_batch` so the two routes produce identical sequences.
    """
    if cfg.n_phases != 2 or cfg.m > 10:
        raise ValueError("phase-sign shortcut requires the binary alphabet, m <= 10")
    pw, pc = _draw_phases(rng, cfg, lead_shape=tuple(lead_shape))
    pack = 1 << np.arange(cfg.m - 1, -1, -1, dtype=np.int64)
    codes = pw @ pack + (pc.astype(np.int64) << cfg.m)
    return _sign_table(cfg.m, cfg.perm).astype(np.dtype(dtype), copy=False)[codes]


def encode_batch(
    votes,
    cfg: EncoderConfig,
    rng: np.random.Generator | None = None,
    dtype=np.float64,
) -> np.ndarray:
    """Encode a stack of vote vectors at once.

    ``votes`` has shape (..., m); the result has shape (..., 2**m) and
    row by row equals what :func:`encode` produces for the same votes
    and phase draws.  Fresh phases are drawn per row.  With the binary
    phase alphabet (n_phases == 2) every element is real (+-amplitude)
    and the result is returned as a float array; downstream channel and
    detector code accepts both dtypes.  ``dtype`` selects the working
    precision of the real path; float32 is adequate whenever only
    statistics of the received energies are of interest.
    """
    v = _check_votes(votes, cfg.m)
    lead = v.shape[:-1]
    n = int(np.prod(lead, dtype=np.int64)) if lead else 1
    v2 = np.ascontiguousarray(v).reshape(n, cfg.m)
    dtype = np.dtype(dtype)

    masks = gray_half_masks(cfg.m, cfg.perm).astype(dtype)  # (m, L)
    quad = quad_phase_term(cfg.m, cfg.perm)
    pbits = _permuted_bits(cfg.m, cfg.perm).astype(np.float64)  # (L, m)
    h = cfg.n_phases

    pw, pc = _draw_phases(rng, cfg, lead_shape=(n,))
    if h == 2 and cfg.m <= 10:
        # Binary alphabet: one row gather from the cached sign table.
        pack = 1 << np.arange(cfg.m - 1, -1, -1, dtype=np.int64)
        codes = pw @ pack + (pc.astype(np.int64) << cfg.m)
        phases = _sign_table(cfg.m, cfg.perm).astype(dtype, copy=False)[codes]
    else:
        # Small-integer matmuls are exact in float64 and hit BLAS.
        lin = pw.astype(np.float64) @ pbits.T
        idx = ((h // 2) * quad)[None, :] + lin + pc[:, None].astype(np.float64)
        phases = phase_roots(h)[idx.astype(np.int64) % h]

    if math.isinf(cfg.alpha):
        vp = (v2 > 0).astype(dtype)
        vm = (v2 < 0).astype(dtype)
        mismatch = vp @ (1 - masks) + vm @ masks
        r = (v2 != 0).sum(axis=1)
        scale = (math.sqrt(2.0) ** r).astype(dtype)
        amps = np.where(mismatch == 0, scale[:, None], dtype.type(0))
    else:
        # The exponent is alpha * (signed coordinate count) + offset, so
        # the element amplitudes come from a (2m+1)-entry table instead
        # of a full-size exp.
        vf = v2.astype(dtype)
        n_up = (v2 > 0).sum(axis=1)
        n_down = (v2 < 0).sum(axis=1)
        la_up = np.logaddexp(0.0, 2.0 * cfg.alpha) - _LN2
        la_down = np.logaddexp(0.0, -2.0 * cfg.alpha) - _LN2
        row_scale = np.exp(-0.5 * (n_up * la_up + n_down * la_down)).astype(dtype)
        levels = np.exp(cfg.alpha * np.arange(-cfg.m, cfg.m + 1)).astype(dtype)
        signed = (vf @ masks).astype(np.int64) + cfg.m
        amps = row_scale[:, None] * levels[signed]
    return (amps * phases).reshape(lead + (cfg.length,))
