"""Complementary-sequence synthesis and analysis.

Sequences of length ``L = 2**m`` are built by evaluating an amplitude
exponent and a phase index at every corner of the Boolean m-cube.  The
amplitude exponent is a weighted sum of Gray-mapped coordinates; the
phase index is a quadratic form over a permuted ordering of the inputs,
reduced modulo the phase alphabet size.  Sequences built this way keep
the peak-to-mean envelope power of the corresponding multicarrier
symbol at or below 10*log10(2) ~ 3.01 dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CsParams",
    "aacf",
    "bit_matrix",
    "build_cs",
    "gray_coordinate",
    "gray_half_masks",
    "identity_perm",
    "index_of",
    "phase_index",
    "phase_roots",
    "amp_exponent",
    "pmepr_db",
    "pmepr_db_batch",
]

PMEPR_BOUND_DB = 10.0 * math.log10(2.0)


def identity_perm(m: int) -> tuple[int, ...]:
    """Identity permutation of {1, ..., m}."""
    return tuple(range(1, m + 1))


def _check_perm(perm, m: int) -> tuple[int, ...]:
    perm = tuple(int(v) for v in perm)
    if sorted(perm) != list(range(1, m + 1)):
        raise ValueError(f"perm must be a permutation of 1..{m}, got {perm}")
    return perm


def _check_bits(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size < 1:
        raise ValueError("bit vector must be one-dimensional and non-empty")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("bit vector entries must be 0 or 1")
    return bits


def index_of(bits) -> int:
    """Decimal index of a bit vector, first bit most significant.

    The map is a bijection between {0,1}^m and {0, ..., 2**m - 1}.
    """
    bits = _check_bits(bits)
    m = bits.size
    weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return int(bits @ weights)


@lru_cache(maxsize=None)
def bit_matrix(m: int) -> np.ndarray:
    """(2**m, m) matrix whose row i holds the bits of i, MSB first."""
    if m < 1:
        raise ValueError("m must be >= 1")
    idx = np.arange(1 << m, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(m - 1, -1, -1)) & 1
    bits = bits.astype(np.uint8)
    bits.setflags(write=False)
    return bits


def gray_coordinate(bits, perm, n: int) -> int:
    """Gray-mapped coordinate ``n`` (1-based) of a bit vector under ``perm``.

    For n < m this is the mod-2 sum of the bits at positions perm[n] and
    perm[n+1]; for n = m it is the bit at position perm[m].  Jointly the m
    coordinates form a bijection of the m-cube, so each one splits the
    2**m sequence indices into two equal halves.
    """
    bits = _check_bits(bits)
    m = bits.size
    perm = _check_perm(perm, m)
    if not 1 <= n <= m:
        raise IndexError(f"coordinate index n={n} out of range 1..{m}")
    if n < m:
        return int((bits[perm[n - 1] - 1] + bits[perm[n] - 1]) % 2)
    return int(bits[perm[m - 1] - 1])


@lru_cache(maxsize=None)
def _permuted_bits(m: int, perm: tuple[int, ...]) -> np.ndarray:
    """(L, m) matrix with column n-1 holding bit perm[n] of each index."""
    cols = np.asarray(perm, dtype=np.int64) - 1
    out = bit_matrix(m)[:, cols]
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def gray_half_masks(m: int, perm: tuple[int, ...]) -> np.ndarray:
    """(m, L) mask table; row n-1 holds Gray coordinate n of every index.

    Row n partitions the L = 2**m indices into the two half-sets used for
    per-index energy detection.
    """
    perm = _check_perm(perm, m)
    pb = _permuted_bits(m, perm)
    masks = pb.copy()
    if m > 1:
        masks[:, :-1] = (pb[:, :-1] + pb[:, 1:]) % 2
    masks = masks.T.copy()
    masks.setflags(write=False)
    return masks


@lru_cache(maxsize=None)
def quad_phase_term(m: int, perm: tuple[int, ...]) -> np.ndarray:
    """(L,) vector of the quadratic phase form, one value per index."""
    perm = _check_perm(perm, m)
    pb = _permuted_bits(m, perm).astype(np.int64)
    if m == 1:
        out = np.zeros(2, dtype=np.int64)
    else:
        out = (pb[:, :-1] * pb[:, 1:]).sum(axis=1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def phase_roots(h: int) -> np.ndarray:
    """The h complex units exp(2j*pi*k/h), exact for h in {1, 2, 4}."""
    if h == 1:
        roots = np.ones(1, dtype=complex)
    elif h == 2:
        roots = np.array([1.0, -1.0], dtype=complex)
    elif h == 4:
        roots = np.array([1.0, 1.0j, -1.0, -1.0j], dtype=complex)
    else:
        roots = np.exp(2j * np.pi * np.arange(h) / h)
    roots.setflags(write=False)
    return roots


@dataclass(frozen=True)
class CsParams:
    """Parameter bundle for one synthesized sequence.

    Attributes
    ----------
    m : int
        Length exponent; the sequence has 2**m elements.
    perm : tuple of int
        Permutation of {1, ..., m} fixing the coordinate ordering.
    amp_weights : tuple of float
        Per-coordinate amplitude weights.  Finite values are used
        directly; with ``alpha_infinite`` each entry must be -inf, 0 or
        +inf and selects an exact keep/zero split instead.
    amp_offset : float
        Additive amplitude exponent offset (log domain).
    phase_weights : tuple of int
        Per-coordinate linear phase weights, reduced mod ``n_phases``.
    phase_offset : int
        Constant phase index, reduced mod ``n_phases``.
    n_phases : int
        Phase alphabet size; element phases are 2*pi*k/n_phases.  Must be
        even when m >= 2 so the quadratic term stays integral.
    alpha_infinite : bool
        Select the exact infinite-weight evaluation path.
    """

    m: int
    perm: tuple[int, ...]
    amp_weights: tuple[float, ...]
    amp_offset: float
    phase_weights: tuple[int, ...]
    phase_offset: int
    n_phases: int = 2
    alpha_infinite: bool = False

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        object.__setattr__(self, "perm", _check_perm(self.perm, self.m))
        if self.n_phases < 1:
            raise ValueError("n_phases must be >= 1")
        if self.m >= 2 and self.n_phases % 2 != 0:
            raise ValueError(
                "n_phases must be even when m >= 2 (quadratic phase term)"
            )
        weights = tuple(float(v) for v in self.amp_weights)
        if len(weights) != self.m:
            raise ValueError("amp_weights must have length m")
        if self.alpha_infinite:
            if any(math.isfinite(v) and v != 0.0 for v in weights):
                raise ValueError(
                    "alpha_infinite requires amp_weights in {-inf, 0, +inf}"
                )
            if self.amp_offset != 0.0:
                raise ValueError("amp_offset must be 0 on the infinite path")
        elif not all(math.isfinite(v) for v in weights):
            raise ValueError("finite path requires finite amp_weights")
        object.__setattr__(self, "amp_weights", weights)
        pw = tuple(int(v) % self.n_phases for v in self.phase_weights)
        if len(pw) != self.m:
            raise ValueError("phase_weights must have length m")
        object.__setattr__(self, "phase_weights", pw)
        object.__setattr__(self, "phase_offset", int(self.phase_offset) % self.n_phases)

    @property
    def length(self) -> int:
        return 1 << self.m


def amp_exponent(bits, params: CsParams) -> float:
    """Amplitude exponent (log domain) of the element at ``index_of(bits)``.

    Terms with a zero Gray coordinate contribute nothing, which keeps the
    value well defined for infinite weights.
    """
    bits = _check_bits(bits)
    if bits.size != params.m:
        raise ValueError("bit vector length must equal params.m")
    gamma = np.asarray(params.amp_weights, dtype=float)
    coords = np.array(
        [gray_coordinate(bits, params.perm, n) for n in range(1, params.m + 1)]
    )
    return float(np.where(coords == 1, gamma, 0.0).sum() + params.amp_offset)


def phase_index(bits, params: CsParams) -> int:
    """Phase index (mod ``n_phases``) of the element at ``index_of(bits)``."""
    bits = _check_bits(bits)
    if bits.size != params.m:
        raise ValueError("bit vector length must equal params.m")
    h = params.n_phases
    i = index_of(bits)
    quad = int(quad_phase_term(params.m, params.perm)[i])
    pb = _permuted_bits(params.m, params.perm)[i].astype(np.int64)
    lin = int(pb @ np.asarray(params.phase_weights, dtype=np.int64))
    return ((h // 2) * quad + lin + params.phase_offset) % h


def build_cs(params: CsParams) -> np.ndarray:
    """Synthesize the length-2**m complex sequence for ``params``.

    Element i carries amplitude exp(amp_exponent) and phase
    exp(2j*pi*phase_index/n_phases).  On the infinite-weight path the
    half of the indices whose Gray coordinate disagrees with the sign of
    each nonzero weight is exactly zero, and the survivors are scaled by
    sqrt(2) per nonzero weight so the squared 2-norm stays 2**m.
    """
    m, h = params.m, params.n_phases
    masks = gray_half_masks(m, params.perm).astype(np.int64)
    quad = quad_phase_term(m, params.perm)
    pb = _permuted_bits(m, params.perm).astype(np.int64)
    lin = pb @ np.asarray(params.phase_weights, dtype=np.int64)
    idx = ((h // 2) * quad + lin + params.phase_offset) % h
    phases = phase_roots(h)[idx]

    gamma = np.asarray(params.amp_weights, dtype=float)
    if params.alpha_infinite:
        signs = np.sign(gamma).astype(np.int64)
        active = signs != 0
        r = int(active.sum())
        if r:
            wanted = ((signs[active] + 1) // 2)[:, None]
            survive = (masks[active] == wanted).all(axis=0)
        else:
            survive = np.ones(params.length, dtype=bool)
        amps = np.where(survive, math.sqrt(2.0) ** r, 0.0)
    else:
        amps = np.exp(gamma @ masks + params.amp_offset)
    return amps * phases


def aacf(seq, shift: int) -> complex:
    """Aperiodic autocorrelation of ``seq`` at integer ``shift``.

    Zero outside |shift| <= L-1; at shift 0 it equals the squared
    2-norm; negative shifts are the conjugates of the positive ones.
    """
    a = np.asarray(seq, dtype=complex).reshape(-1)
    length = a.size
    k = int(shift)
    if abs(k) > length - 1:
        return 0j
    if k >= 0:
        return complex(np.conj(a[: length - k]) @ a[k:])
    return complex(a[: length + k] @ np.conj(a[-k:]))


def pmepr_db(seq, oversample: int = 16) -> float:
    """Peak-to-mean envelope power ratio, in dB.

    The continuous-time envelope is approximated by evaluating the
    sequence polynomial at ``oversample * L`` uniformly spaced points on
    the unit circle (a zero-padded DFT).  The grid mean equals the
    squared 2-norm divided by L, so the result is always >= 0.
    """
    a = np.asarray(seq, dtype=complex).reshape(-1)
    return float(pmepr_db_batch(a[None, :], oversample)[0])


def pmepr_db_batch(seqs, oversample: int = 16) -> np.ndarray:
    """Row-wise :func:`pmepr_db` for a (batch, L) array."""
    if oversample < 4:
        raise ValueError("oversample must be >= 4")
    a = np.asarray(seqs, dtype=complex)
    if a.ndim != 2:
        raise ValueError("expected a 2-d (batch, L) array")
    power = np.abs(np.fft.fft(a, n=oversample * a.shape[1], axis=1)) ** 2
    mean = power.mean(axis=1)
    if np.any(mean == 0.0):
        raise ValueError("PMEPR undefined for an all-zero sequence")
    return 10.0 * np.log10(power.max(axis=1) / mean)
