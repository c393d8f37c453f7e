"""Pilot-trained parameter estimation and maximum-likelihood detection.

The supervised estimator fits one codeword/crossover pair per class from its
labeled pilot slots; detection picks the class maximizing the generative
model's log-likelihood. A genie variant plugs in the exact channel-derived
parameters instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import true_code_and_epsilons
from .model import ModelParams, log_likelihood_class, log_likelihood_matrix, observation_bits
from .numerics import m_ary_expand, sign_quantize

DEFAULT_EPS_MIN = 1e-4

__all__ = [
    "DEFAULT_EPS_MIN",
    "LabeledSet",
    "ModelParams",
    "class_to_messages",
    "log_likelihood_class",
    "log_likelihood_matrix",
    "ml_detect",
    "ml_detect_batch",
    "mld_csir",
    "sl_estimate",
]


@dataclass(frozen=True)
class LabeledSet:
    """Pilot observations with their block-schedule labels.

    ``observations`` is (T_t, N) over {-1,+1} with T_t = T * m**K slots;
    labels must follow the pilot schedule (class index advances every
    ``pilots_per_class`` slots, covering every class exactly once).
    """

    observations: np.ndarray
    labels: np.ndarray
    pilots_per_class: int
    mod_order: int
    num_users: int

    def __post_init__(self):
        obs = np.asarray(self.observations)
        labels = np.asarray(self.labels)
        T = self.pilots_per_class
        num_classes = self.mod_order**self.num_users
        if T < 1:
            raise ValueError("pilots_per_class must be at least 1")
        if obs.ndim != 2 or not np.all(np.abs(obs) == 1):
            raise ValueError("observations must be a (T_t, N) matrix over {-1, +1}")
        if obs.shape[0] != T * num_classes:
            raise ValueError("pilot count must equal pilots_per_class * m**K")
        if labels.shape != (obs.shape[0],) or np.any(
            labels != np.arange(obs.shape[0]) // T
        ):
            raise ValueError("labels must follow the pilot schedule t // T")

    @property
    def num_classes(self):
        return self.mod_order**self.num_users

    @property
    def num_pilots(self):
        """T_t, the total pilot slot count."""
        return self.observations.shape[0]


def pilot_labels(pilots_per_class, num_classes):
    """The fixed pilot schedule: class index t // T for slots t = 0..T*J-1."""
    return np.arange(pilots_per_class * num_classes, dtype=np.int64) // pilots_per_class


def sl_estimate(labeled, eps_min=DEFAULT_EPS_MIN):
    """Per-class ML parameter estimates from labeled pilots.

    The codeword entry is the sign of the class's pilot vote sum (ties to +1);
    the crossover estimate is the fraction of that class's pilots disagreeing
    with it, clamped into [eps_min, 1 - eps_min]. The pre-clamp estimate never
    exceeds 1/2 by the sign choice.
    """
    if not 0 < eps_min < 0.5:
        raise ValueError("eps_min must lie in (0, 0.5)")
    T = labeled.pilots_per_class
    J = labeled.num_classes
    n_out = labeled.observations.shape[1]
    grouped = labeled.observations.reshape(J, T, n_out).astype(float)
    votes = grouped.sum(axis=1).T  # (N, J)
    code = sign_quantize(votes)
    eps = (T - code * votes) / (2.0 * T)
    return ModelParams(
        codewords=code,
        epsilons=np.clip(eps, eps_min, 1.0 - eps_min),
        mod_order=labeled.mod_order,
        num_users=labeled.num_users,
    )


def ml_detect(obs, params):
    """Most likely class for one observation; ties go to the smallest index."""
    bits = observation_bits(obs)
    ll = log_likelihood_matrix(bits[None, :], params)
    return int(np.argmax(ll[0]))


def ml_detect_batch(bits, params):
    """Most likely class per row of a (T, N) observation matrix."""
    ll = log_likelihood_matrix(bits, params)
    return np.argmax(ll, axis=1)


def mld_csir(obs, H, constellation, num_users, noise_std):
    """Genie ML detection using the true channel-derived parameters."""
    params = true_code_and_epsilons(H, constellation, num_users, noise_std)
    return ml_detect(obs, params)


def class_to_messages(j, mod_order, num_users):
    """Per-user message digits of a class index (least-significant first)."""
    return m_ary_expand(j, mod_order, num_users)
