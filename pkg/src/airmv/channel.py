"""Fading, noise, and multi-sensor signal superposition.

Channel kinds follow the usual simulation shorthand: ``awgn`` uses unit
coefficients, ``flat_rayleigh`` draws one CN(0,1) coefficient per sensor
and repeats it across the sequence, ``selective_rayleigh`` draws an
independent CN(0,1) coefficient per sensor and element.  CN(0, s2)
means total variance s2, split equally between real and imaginary
parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CHANNEL_KINDS",
    "ChannelModel",
    "ChannelRealization",
    "complex_normal",
    "draw_channel",
    "snr_to_noise_variance",
    "noise_variance_to_snr_db",
    "superpose",
    "transmit_batch",
]

CHANNEL_KINDS = ("awgn", "flat_rayleigh", "selective_rayleigh")


def snr_to_noise_variance(snr_db: float) -> float:
    """Noise variance giving the requested per-sensor SNR at unit power."""
    return float(10.0 ** (-float(snr_db) / 10.0))


def noise_variance_to_snr_db(noise_var: float, tx_power: float = 1.0) -> float:
    """Inverse of :func:`snr_to_noise_variance`; +inf for zero noise."""
    if noise_var == 0.0:
        return math.inf
    return float(10.0 * math.log10(tx_power / noise_var))


@dataclass(frozen=True)
class ChannelModel:
    """Channel kind plus noise power and (uniform) transmit power."""

    kind: str
    noise_var: float = 0.0
    tx_power: float = 1.0

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"kind must be one of {CHANNEL_KINDS}, got {self.kind!r}")
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        if not self.tx_power > 0:
            raise ValueError("tx_power must be > 0")


@dataclass(frozen=True)
class ChannelRealization:
    """One draw: (n_sensors, L) fading coefficients and (L,) noise."""

    coefficients: np.ndarray
    noise: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        w = np.asarray(self.noise, dtype=complex)
        if c.ndim != 2 or w.ndim != 1 or c.shape[1] != w.size:
            raise ValueError("coefficients must be (K, L) and noise (L,)")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "noise", w)


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Draw CN(0, var): real and imaginary parts each N(0, var/2).

    Both parts come from one generator call (real block first); the
    draw layout is part of the reproducibility contract.
    """
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    z = rng.standard_normal((2,) + shape)
    return (z[0] + 1j * z[1]) * math.sqrt(var / 2.0)


def draw_channel(
    model: ChannelModel, n_sensors: int, length: int, rng: np.random.Generator
) -> ChannelRealization:
    """Draw fading coefficients and additive noise for one transmission.

    Coefficients are drawn before noise; the order is fixed so seeded
    runs reproduce.
    """
    if n_sensors < 1:
        raise ValueError("n_sensors must be >= 1")
    if model.kind == "awgn":
        coeffs = np.ones((n_sensors, length), dtype=complex)
    elif model.kind == "flat_rayleigh":
        per_sensor = complex_normal(rng, (n_sensors, 1))
        coeffs = np.repeat(per_sensor, length, axis=1)
    else:
        coeffs = complex_normal(rng, (n_sensors, length))
    if model.noise_var > 0:
        noise = complex_normal(rng, (length,), model.noise_var)
    else:
        noise = np.zeros(length, dtype=complex)
    return ChannelRealization(coeffs, noise)


def superpose(sequences, realization: ChannelRealization, tx_power: float = 1.0) -> np.ndarray:
    """Received sequence: sum over sensors of coeff * sqrt(P) * element, plus noise."""
    t = np.asarray(sequences, dtype=complex)
    if t.ndim != 2:
        raise ValueError("sequences must be a (K, L) array")
    if t.shape != realization.coefficients.shape:
        raise ValueError(
            f"shape mismatch: sequences {t.shape} vs coefficients "
            f"{realization.coefficients.shape}"
        )
    return (
        math.sqrt(tx_power) * (realization.coefficients * t).sum(axis=0)
        + realization.noise
    )


def transmit_batch(
    sequences, model: ChannelModel, rng: np.random.Generator
) -> np.ndarray:
    """Push a (B, K, L) stack of sequences through fresh channel draws.

    Returns the (B, L) received sequences.  Row b follows the same
    model as :func:`draw_channel` + :func:`superpose`: coefficients are
    drawn first (real block, then imaginary), noise last.  Real-valued
    sequence stacks (binary phase alphabet) stay in real arithmetic
    until the final combine, which roughly halves the work.
    """
    t = np.asarray(sequences)
    if t.ndim != 3:
        raise ValueError("sequences must be a (B, K, L) array")
    batch, n_sensors, length = t.shape
    real_t = not np.iscomplexobj(t)
    # Single-precision inputs keep the channel draws in float32 too.
    f32 = t.dtype in (np.float32, np.complex64)
    draw_dtype = np.float32 if f32 else np.float64

    if model.kind == "awgn":
        received = t.sum(axis=1).astype(complex) * math.sqrt(model.tx_power)
    elif model.kind == "flat_rayleigh":
        z = rng.standard_normal((2, batch, n_sensors), dtype=draw_dtype)
        scale = math.sqrt(model.tx_power / 2.0)
        if real_t:
            re = np.einsum("bk,bkl->bl", z[0], t)
            im = np.einsum("bk,bkl->bl", z[1], t)
            received = (re + 1j * im) * scale
        else:
            coeffs = z[0] + 1j * z[1]
            received = np.einsum("bk,bkl->bl", coeffs, t) * scale
    else:
        z = rng.standard_normal((2, batch, n_sensors, length), dtype=draw_dtype)
        scale = math.sqrt(model.tx_power / 2.0)
        if real_t:
            re = np.einsum("bkl,bkl->bl", z[0], t)
            im = np.einsum("bkl,bkl->bl", z[1], t)
            received = (re + 1j * im) * scale
        else:
            coeffs = z[0] + 1j * z[1]
            received = np.einsum("bkl,bkl->bl", coeffs, t) * scale
    if model.noise_var > 0:
        noise = rng.standard_normal((2, batch, length), dtype=draw_dtype)
        received = received + (noise[0] + 1j * noise[1]) * math.sqrt(
            model.noise_var / 2.0
        )
    return received
