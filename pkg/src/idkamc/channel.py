"""Channel impairments: AWGN, Wiener phase noise and I/Q amplitude imbalance.

Every stage that is at its no-op setting consumes no random numbers, so a
composed pipeline with a single active stage reproduces that stage alone
under the same seed.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .rng import SeedLike, as_generator

NO_PHASE_NOISE_DBC_HZ = -9999.0
PHASE_NOISE_OFFSET = 1e-2  # reference offset as a fraction of the sample rate


@dataclass(frozen=True)
class ChannelCondition:
    """Impairment levels for one signal or one lot.

    ``snr_db >= 100`` stands in for a noiseless channel.
    """

    snr_db: float = 100.0
    phase_noise_dbc_hz: float = NO_PHASE_NOISE_DBC_HZ
    iq_imbalance_db: float = 0.0

    def as_dict(self):
        return asdict(self)


CLEAN = ChannelCondition()


def signal_power(signal) -> float:
    return float(np.mean(np.abs(signal) ** 2))


def apply_awgn(signal, snr_db: float, seed: SeedLike = None) -> np.ndarray:
    """Add circular complex Gaussian noise at ``snr_db`` relative to the
    empirical signal power."""
    signal = np.asarray(signal, dtype=np.complex128)
    rng = as_generator(seed)
    noise_power = signal_power(signal) / 10.0 ** (snr_db / 10.0)
    scale = np.sqrt(noise_power / 2.0)
    noise = rng.standard_normal((2, signal.size))
    return signal + scale * (noise[0] + 1j * noise[1])


def phase_noise_variance(level_dbc_hz: float) -> float:
    """Per-sample variance of the Wiener phase increments for a PSD level."""
    return 2.0 * np.pi * PHASE_NOISE_OFFSET * 10.0 ** (level_dbc_hz / 10.0)


def apply_phase_noise(signal, level_dbc_hz: float, seed: SeedLike = None) -> np.ndarray:
    signal = np.asarray(signal, dtype=np.complex128)
    var = phase_noise_variance(level_dbc_hz)
    if var == 0.0:
        return signal.copy()
    rng = as_generator(seed)
    theta = np.cumsum(np.sqrt(var) * rng.standard_normal(signal.size))
    return signal * np.exp(1j * theta)


def apply_iq_imbalance(signal, imbalance_db: float) -> np.ndarray:
    """Scale I by ``10**(a/40)`` and Q by ``10**(-a/40)``."""
    signal = np.asarray(signal, dtype=np.complex128)
    if imbalance_db == 0.0:
        return signal.copy()
    gain_i = 10.0 ** (imbalance_db / 40.0)
    gain_q = 10.0 ** (-imbalance_db / 40.0)
    return signal.real * gain_i + 1j * (signal.imag * gain_q)


def apply_condition(signal, cond: ChannelCondition, seed: SeedLike = None) -> np.ndarray:
    """Apply imbalance, then phase noise, then AWGN, on one random stream."""
    rng = as_generator(seed)
    out = apply_iq_imbalance(signal, cond.iq_imbalance_db)
    out = apply_phase_noise(out, cond.phase_noise_dbc_hz, rng)
    return apply_awgn(out, cond.snr_db, rng)
