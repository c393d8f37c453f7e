"""Semi-supervised parameter refinement by expectation-maximization.

Starting from the pilot-only estimates, the EM loop alternates between
soft-assigning every unlabeled slot to the classes (responsibilities,
computed from the current generative model) and re-fitting each class's
codeword and crossover probabilities from the responsibility-weighted data.
Labeled slots keep hard indicator responsibilities throughout, so the update
strictly generalizes the supervised estimator. The data log-likelihood is
tracked per iteration and never decreases; iteration stops once its
improvement falls to the configured threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detectors import DEFAULT_EPS_MIN, LabeledSet, sl_estimate
from .model import ModelParams, log_likelihood_matrix
from .numerics import log_sum_exp, sign_quantize


@dataclass(frozen=True)
class ObservedData:
    """Labeled pilots plus the unlabeled window that follows them.

    ``unlabeled`` is (T_u, N) over {-1,+1}; its rows occupy time slots
    T_t .. T_t + T_u - 1, immediately after the pilots.
    """

    labeled: LabeledSet
    unlabeled: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.unlabeled)
        if u.ndim != 2 or u.shape[1] != self.labeled.observations.shape[1]:
            raise ValueError("unlabeled must be (T_u, N) matching the pilots")
        if u.size and not np.all(np.abs(u) == 1):
            raise ValueError("unlabeled entries must be -1 or +1")

    @property
    def num_labeled(self):
        return self.labeled.num_pilots

    @property
    def num_unlabeled(self):
        return self.unlabeled.shape[0]

    @property
    def observations(self):
        """All slots stacked in time order, shape (T_t + T_u, N)."""
        return np.vstack([self.labeled.observations, self.unlabeled])


@dataclass(frozen=True)
class Responsibilities:
    """Posterior class probabilities per slot, shape (T_t + T_u, J).

    Rows below ``num_labeled`` are exact indicator rows and are never touched
    by the iteration; every row sums to one.
    """

    gamma: np.ndarray
    num_labeled: int


@dataclass(frozen=True)
class EmConfig:
    """Stopping rule for the EM loop.

    ``stop_tol`` is the absolute log-likelihood improvement (nats) at or
    below which iteration halts; ``eps_min`` clamps every estimated
    crossover probability away from {0, 1}.
    """

    stop_tol: float = 1e-4
    max_iters: int = 50
    eps_min: float = DEFAULT_EPS_MIN

    def __post_init__(self):
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.eps_min < 0.5:
            raise ValueError("eps_min must lie in (0, 0.5)")


@dataclass
class EmTrace:
    """Per-iteration diagnostics: the log-likelihood sequence is non-decreasing."""

    log_likelihoods: list[float] = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False
    carried_classes: int = 0  # class updates skipped for zero responsibility mass


def e_step(data, params):
    """Posterior responsibilities under the current parameters.

    Labeled rows are indicators of their known class; unlabeled rows are the
    per-class likelihoods normalized across classes (uniform prior cancels),
    computed in the log domain.
    """
    J = params.num_classes
    T_t = data.num_labeled
    gamma_l = np.zeros((T_t, J))
    gamma_l[np.arange(T_t), np.asarray(data.labeled.labels)] = 1.0
    ll = log_likelihood_matrix(data.unlabeled, params)
    gamma_u = np.exp(ll - log_sum_exp(ll, axis=1)[:, None])
    return Responsibilities(gamma=np.vstack([gamma_l, gamma_u]), num_labeled=T_t)


def m_step(data, gamma, eps_min=DEFAULT_EPS_MIN, prev_params=None):
    """Closed-form parameter update from responsibility-weighted observations.

    Codeword entries take the sign of the weighted vote sum (ties to +1);
    crossover estimates are the weighted mismatch fraction, clamped into
    [eps_min, 1 - eps_min]. A class with zero responsibility mass keeps its
    previous parameters rather than dividing by zero.
    """
    if not 0 < eps_min < 0.5:
        raise ValueError("eps_min must lie in (0, 0.5)")
    G = np.asarray(gamma.gamma, dtype=float)
    R = data.observations.astype(float)
    if G.shape[0] != R.shape[0]:
        raise ValueError("responsibilities must cover every slot")
    votes = R.T @ G  # (N, J)
    mass = G.sum(axis=0)  # (J,)
    code = sign_quantize(votes)
    empty = mass == 0.0
    if np.any(empty):
        if prev_params is None:
            raise ValueError("zero-mass class with no previous parameters to keep")
        code[:, empty] = prev_params.codewords[:, empty]
    safe_mass = np.where(empty, 1.0, mass)
    eps = (safe_mass - code * votes) / (2.0 * safe_mass)
    eps = np.clip(eps, eps_min, 1.0 - eps_min)
    if np.any(empty):
        eps[:, empty] = prev_params.epsilons[:, empty]
    return ModelParams(
        codewords=code,
        epsilons=eps,
        mod_order=data.labeled.mod_order,
        num_users=data.labeled.num_users,
    )


def data_log_likelihood(data, params):
    """Joint log-likelihood of pilots and unlabeled slots under the model.

    Labeled slots contribute their own class's likelihood, unlabeled slots the
    class-mixture likelihood; both carry the uniform 1/J class prior.
    """
    J = params.num_classes
    labels = np.asarray(data.labeled.labels)
    ll_l = log_likelihood_matrix(data.labeled.observations, params)
    labeled_term = float(ll_l[np.arange(labels.size), labels].sum())
    if data.num_unlabeled:
        ll_u = log_likelihood_matrix(data.unlabeled, params)
        unlabeled_term = float(log_sum_exp(ll_u, axis=1).sum())
    else:
        unlabeled_term = 0.0
    prior = -(labels.size + data.num_unlabeled) * np.log(J)
    return prior + labeled_term + unlabeled_term


def run_em(data, config=EmConfig()):
    """Full semi-supervised parameter update.

    Initializes from the supervised pilot estimate, then alternates e_step and
    m_step until the data log-likelihood improves by at most ``stop_tol`` or
    ``max_iters`` is reached. Returns the final parameters, responsibilities
    refreshed under those final parameters, and the iteration trace.

    The unlabeled log-likelihood matrix of the current parameters feeds both
    the convergence check and the next responsibilities, so it is computed
    once per iteration and cached; the values match e_step /
    data_log_likelihood exactly.
    """
    params = sl_estimate(data.labeled, config.eps_min)
    labels = np.asarray(data.labeled.labels)
    T_t, J = labels.size, params.num_classes
    indicator = np.zeros((T_t, J))
    indicator[np.arange(T_t), labels] = 1.0
    prior = -(T_t + data.num_unlabeled) * np.log(J)

    def loglik_and_unlabeled_ll(p):
        ll_lab = log_likelihood_matrix(data.labeled.observations, p)
        value = prior + float(ll_lab[np.arange(T_t), labels].sum())
        ll_u = log_likelihood_matrix(data.unlabeled, p)
        if ll_u.size:
            value += float(log_sum_exp(ll_u, axis=1).sum())
        return value, ll_u

    def responsibilities(ll_u):
        if ll_u.size:
            gamma_u = np.exp(ll_u - log_sum_exp(ll_u, axis=1)[:, None])
        else:
            gamma_u = np.zeros((0, J))
        return Responsibilities(gamma=np.vstack([indicator, gamma_u]), num_labeled=T_t)

    trace = EmTrace()
    value, ll_u = loglik_and_unlabeled_ll(params)
    trace.log_likelihoods.append(value)
    for _ in range(config.max_iters):
        gamma = responsibilities(ll_u)
        mass = gamma.gamma.sum(axis=0)
        trace.carried_classes += int(np.count_nonzero(mass == 0.0))
        params = m_step(data, gamma, config.eps_min, prev_params=params)
        value, ll_u = loglik_and_unlabeled_ll(params)
        trace.log_likelihoods.append(value)
        trace.iterations_run += 1
        if trace.log_likelihoods[-1] - trace.log_likelihoods[-2] <= config.stop_tol:
            trace.converged = True
            break
    # The returned responsibilities reflect the returned parameters, so window
    # detection agrees with ML detection under the final model.
    return params, responsibilities(ll_u), trace


def ssl_detect_window(gamma, t):
    """Detected class for an unlabeled slot: argmax of its responsibility row.

    ``t`` is the absolute slot index, valid on [T_t, T_t + T_u); ties resolve
    to the smallest class index.
    """
    if not gamma.num_labeled <= t < gamma.gamma.shape[0]:
        raise ValueError(f"slot {t} is outside the unlabeled window")
    return int(np.argmax(gamma.gamma[t]))
