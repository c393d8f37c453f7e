"""System model: PSK constellations, Rayleigh channel draws, the real lifting
of the complex system, one-bit quantized reception, and the true per-class
transition parameters implied by a known channel."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import ModelParams
from .numerics import (
    ConfigurationError,
    RngStream,
    m_ary_expand_all,
    q_tail,
    sign_quantize,
)

DEFAULT_CLASS_CAP = 4096


@dataclass(frozen=True)
class Constellation:
    """m-ary PSK symbol set whose average (and per-point) power equals ``snr``."""

    points: np.ndarray
    snr: float

    @property
    def m(self):
        return len(self.points)


@dataclass(frozen=True)
class BinaryObservation:
    """One quantized receive vector: (N,) entries over {-1, +1}."""

    bits: np.ndarray
    time_slot: int = 0


def build_psk_constellation(m, snr):
    """Equally spaced PSK points, each with power ``snr`` (linear scale).

    BPSK places points on the real axis; QPSK uses the pi/4 offset so every
    real and imaginary component is ±sqrt(snr/2) and never exactly zero.
    """
    if snr <= 0:
        raise ConfigurationError("snr must be positive (linear scale)")
    if m == 2:
        points = np.sqrt(snr) * np.array([1.0, -1.0], dtype=complex)
    elif m == 4:
        base = np.sqrt(snr / 2.0)
        points = base * np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
    else:
        raise ConfigurationError(f"unsupported constellation size m={m}")
    return Constellation(points=points, snr=float(snr))


def modulate(messages, constellation):
    """Map per-user digits to the stacked real signal [Re(x); Im(x)] (length 2K)."""
    w = np.asarray(messages, dtype=np.int64)
    if w.ndim != 1 or w.size < 1:
        raise ValueError("messages must be a non-empty digit vector")
    if w.min() < 0 or w.max() >= constellation.m:
        raise ValueError(f"digits must lie in [0, {constellation.m})")
    symbols = constellation.points[w]
    return np.concatenate([symbols.real, symbols.imag])


def modulate_all_classes(constellation, num_users):
    """Stacked real signals for every joint-message class, shape (2K, m**K).

    Column j is the transmitted vector for class j under the least-significant
    digit-first expansion.
    """
    digits = m_ary_expand_all(constellation.m, num_users)
    symbols = constellation.points[digits]  # (J, K)
    return np.concatenate([symbols.real.T, symbols.imag.T])


def draw_rayleigh_channel(num_users, num_rx, stream):
    """i.i.d. CN(0, 1) channel matrix of shape (num_rx, num_users)."""
    if num_users < 1 or num_rx < 1:
        raise ValueError("need at least one user and one antenna")
    if num_rx <= num_users:
        warnings.warn("expected more receive antennas than users", stacklevel=2)
    n = num_rx * num_users
    z = stream.gaussian(2 * n, std=np.sqrt(0.5))
    return (z[:n] + 1j * z[n:]).reshape(num_rx, num_users)


def realify(channel):
    """Lift a complex (N_r, K) channel to its real (2N_r, 2K) block form
    [[Re, -Im], [Im, Re]]."""
    H = np.asarray(channel)
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def transmit_and_quantize(H, x, noise_std, stream, time_slot=0):
    """One-bit observation of H @ x plus Gaussian noise of the given std."""
    H = np.asarray(H, dtype=float)
    x = np.asarray(x, dtype=float)
    if noise_std <= 0:
        raise ValueError("noise_std must be positive")
    if H.ndim != 2 or x.shape != (H.shape[1],):
        raise ValueError("signal length must match the channel width")
    z = stream.gaussian(H.shape[0], std=noise_std)
    return BinaryObservation(bits=sign_quantize(H @ x + z), time_slot=time_slot)


def transmit_block(H, signals, noise_std, stream):
    """Quantized observations for a block of transmitted columns.

    ``signals`` is (2K, T); returns (T, N) int8 bits. Noise is drawn as one
    contiguous run from the stream, component-major.
    """
    H = np.asarray(H, dtype=float)
    X = np.asarray(signals, dtype=float)
    if noise_std <= 0:
        raise ValueError("noise_std must be positive")
    if X.ndim != 2 or X.shape[0] != H.shape[1]:
        raise ValueError("signal block must be (2K, T) matching the channel")
    n_out, n_slots = H.shape[0], X.shape[1]
    z = stream.gaussian(n_out * n_slots, std=noise_std).reshape(n_out, n_slots)
    return sign_quantize(H @ X + z).T


def true_code_and_epsilons(H, constellation, num_users, noise_std, class_cap=DEFAULT_CLASS_CAP):
    """Ground-truth spatial code and crossover probabilities for a known channel.

    For every class j: c_{j,n} = sign(h_n . x_j) and
    eps_{j,n} = Q(|h_n . x_j| / noise_std), so eps in (0, 0.5] with 0.5
    exactly at a vanishing inner product.
    """
    H = np.asarray(H, dtype=float)
    if noise_std <= 0:
        raise ValueError("noise_std must be positive")
    num_classes = constellation.m**num_users
    if num_classes > class_cap:
        raise ConfigurationError(
            f"{num_classes} classes exceed the configured cap of {class_cap}"
        )
    X = modulate_all_classes(constellation, num_users)  # (2K, J)
    if H.shape[1] != X.shape[0]:
        raise ValueError("channel width must equal 2 * num_users")
    A = H @ X  # (N, J) noiseless receive levels
    return ModelParams(
        codewords=sign_quantize(A),
        epsilons=q_tail(np.abs(A) / noise_std),
        mod_order=constellation.m,
        num_users=num_users,
    )
