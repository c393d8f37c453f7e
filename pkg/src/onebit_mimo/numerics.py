"""Shared numeric kernels: Gaussian tail probability, one-bit quantizer,
m-ary digit codecs, seeded random streams, and log-domain summation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

_SQRT2 = np.sqrt(2.0)
_TINY = np.nextafter(0.0, 1.0)  # smallest positive double
_ALMOST_ONE = np.nextafter(1.0, 0.0)


class ConfigurationError(ValueError):
    """An invalid parameter combination at the configuration level."""


def q_tail(x):
    """Standard Gaussian tail probability P(Z > x), element-wise.

    Evaluated through the complementary error function. Results are clamped
    into the open interval (0, 1): far beyond the double-precision underflow
    point the value saturates at the smallest positive double instead of 0
    (resp. just below 1), so downstream log-likelihoods stay finite.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("q_tail requires finite input")
    q = np.clip(0.5 * erfc(x / _SQRT2), _TINY, _ALMOST_ONE)
    return float(q) if q.ndim == 0 else q


def sign_quantize(x):
    """One-bit quantizer: +1 where x >= 0, else -1 (element-wise)."""
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise ValueError("sign_quantize requires finite input")
    out = np.where(x >= 0, 1, -1).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def m_ary_expand(k, base, width):
    """Digits of ``k`` in the given base, least-significant first.

    Returns an integer array of length ``width`` with each digit in
    [0, base). Raises if ``k`` is outside [0, base**width).
    """
    if base < 2 or width < 1:
        raise ValueError("need base >= 2 and width >= 1")
    k = int(k)
    if not 0 <= k < base**width:
        raise ValueError(f"index {k} out of range for base {base}, width {width}")
    digits = np.empty(width, dtype=np.int64)
    for i in range(width):
        k, digits[i] = divmod(k, base)
    return digits


def m_ary_compress(digits, base):
    """Inverse of :func:`m_ary_expand`: digits (least-significant first) -> index."""
    digits = np.asarray(digits, dtype=np.int64)
    if base < 2:
        raise ValueError("need base >= 2")
    if digits.size == 0 or digits.min() < 0 or digits.max() >= base:
        raise ValueError(f"digits must lie in [0, {base})")
    return int(np.sum(digits * base ** np.arange(digits.size)))


def m_ary_expand_all(base, width):
    """Digit table for all indices 0..base**width-1, shape (base**width, width)."""
    if base < 2 or width < 1:
        raise ValueError("need base >= 2 and width >= 1")
    idx = np.arange(base**width, dtype=np.int64)
    return (idx[:, None] // base ** np.arange(width)[None, :]) % base


@dataclass
class RngStream:
    """Deterministic random stream keyed by (master_seed, stream_index).

    Each coherence block owns one stream. Identical keys replay identical
    sample sequences regardless of scheduling or worker count; distinct
    stream indices give statistically independent streams.
    """

    master_seed: int
    stream_index: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index,)
        )
        self._gen = np.random.default_rng(seq)

    def gaussian(self, count, std=1.0):
        """``count`` i.i.d. zero-mean draws with the given standard deviation."""
        if std <= 0:
            raise ValueError("std must be positive")
        if count < 0:
            raise ValueError("count must be non-negative")
        return self._gen.normal(0.0, std, size=count)

    def integers(self, high, count):
        """``count`` i.i.d. uniform draws from [0, high)."""
        if high < 1:
            raise ValueError("high must be at least 1")
        return self._gen.integers(0, high, size=count)


def sample_gaussian(stream, count, std=1.0):
    """Zero-mean Gaussian draws from a stream (see :meth:`RngStream.gaussian`)."""
    return stream.gaussian(count, std)


def log_sum_exp(values, axis=None):
    """log(sum(exp(values))) computed by max-shift, without overflow.

    -inf entries are permitted (zero probability mass); an all--inf reduction
    returns -inf. NaN or +inf entries are rejected. Exact whenever one value
    dominates the rest by more than ~746 nats.
    """
    v = np.asarray(values, dtype=float)
    if np.any(np.isnan(v)) or np.any(v == np.inf):
        raise ValueError("log_sum_exp requires values in [-inf, inf)")
    if v.size == 0 and (axis is None or v.shape[axis] == 0):
        raise ValueError("log_sum_exp requires at least one value")
    m = np.max(v, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(m), m, 0.0)  # keeps all--inf reductions NaN-free
    with np.errstate(divide="ignore"):
        out = shift + np.log(np.exp(v - shift).sum(axis=axis, keepdims=True))
    out = np.where(np.isfinite(m), out, -np.inf)
    out = out.reshape(()) if axis is None else np.squeeze(out, axis=axis)
    return float(out) if out.ndim == 0 else out
