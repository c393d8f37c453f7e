"""Per-class generative model of one-bit observations.

Each joint-message class j owns a codeword c_j in {-1,+1}^N (its noiseless
quantized receive pattern) and a vector of per-component crossover
probabilities eps_j. An observed vector r then has likelihood
prod_n eps_{j,n}^{[r_n != c_{j,n}]} (1-eps_{j,n})^{[r_n == c_{j,n}]}.
All evaluation here is done in the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Codewords (N, J) over {-1,+1} and crossover probabilities (N, J).

    Column j holds class j's parameters; J = mod_order ** num_users classes.
    Estimated instances keep every epsilon clamped inside (0, 1) so
    log-likelihoods stay finite; true-parameter instances satisfy
    eps in (0, 0.5].
    """

    codewords: np.ndarray
    epsilons: np.ndarray
    mod_order: int
    num_users: int

    def __post_init__(self):
        code = np.asarray(self.codewords)
        eps = np.asarray(self.epsilons)
        if code.shape != eps.shape or code.ndim != 2:
            raise ValueError("codewords and epsilons must share an (N, J) shape")
        if code.shape[1] != self.mod_order**self.num_users:
            raise ValueError("class count must equal mod_order ** num_users")
        if not np.all(np.abs(code) == 1):
            raise ValueError("codeword entries must be -1 or +1")
        if np.any(eps <= 0.0) or np.any(eps >= 1.0):
            raise ValueError("epsilons must lie strictly inside (0, 1)")

    @property
    def num_components(self):
        """N, the number of one-bit outputs per observation."""
        return self.codewords.shape[0]

    @property
    def num_classes(self):
        """J = mod_order ** num_users."""
        return self.codewords.shape[1]


def observation_bits(obs):
    """Extract the (N,) ±1 vector from an observation object or array."""
    bits = np.asarray(getattr(obs, "bits", obs))
    if bits.ndim != 1 or not np.all(np.abs(bits) == 1):
        raise ValueError("observation must be a 1-D vector over {-1, +1}")
    return bits


def log_likelihood_class(obs, params, j):
    """Log-likelihood of one observation under class j."""
    bits = observation_bits(obs)
    if not 0 <= j < params.num_classes:
        raise ValueError(f"class index {j} out of range")
    if bits.size != params.num_components:
        raise ValueError("observation length does not match the model")
    mismatch = bits != params.codewords[:, j]
    eps = params.epsilons[:, j]
    return float(np.sum(np.where(mismatch, np.log(eps), np.log1p(-eps))))


def log_likelihood_matrix(bits, params):
    """Log-likelihoods of a batch of observations under every class.

    ``bits`` is (T, N) over {-1,+1}; returns (T, J). The per-component
    Bernoulli products reduce to one matrix product: with
    d = log(eps) - log(1-eps), the mismatch indicator is (1 - r*c)/2, so
    ll[t, j] = sum_n log(1-eps) + d * (1 - r*c)/2.
    """
    R = np.asarray(bits, dtype=float)
    if R.ndim != 2 or R.shape[1] != params.num_components:
        raise ValueError("bits must be (T, N) matching the model")
    log_eps = np.log(params.epsilons)
    log_1m = np.log1p(-params.epsilons)
    d = log_eps - log_1m
    base = log_1m.sum(axis=0) + 0.5 * d.sum(axis=0)
    return base[None, :] - 0.5 * (R @ (params.codewords * d))
