"""Forward-backward smoothing, log-likelihood and Viterbi restoration for
hidden Markov chain models.

All recursions run on scaled (normalized) probabilities: the filtered
distribution F_t, the one-step-ahead predicted distribution G_t and the
normalizing factors N_t = P(X_t = x_t | X_0^{t-1} = x_0^{t-1}).  A zero
normalizer means the observation is impossible under the model and is a
hard error, never a silent renormalization.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ImpossibleObservationError
from .model import HmmModel, ObservedSequence, emission_matrix, log_emission_matrix
from .numutil import fsum, safe_div

__all__ = ["ChainPosterior", "forward_pass", "backward_smooth", "smooth_chain",
           "viterbi_chain"]


@dataclass
class ChainPosterior:
    """Smoothing tables of a chain.

    forward[t]    P(S_t = . | X_0^t = x_0^t)
    normalizers   N_t = P(X_t = x_t | X_0^{t-1} = x_0^{t-1})
    predicted[t]  P(S_t = . | X_0^{t-1} = x_0^{t-1}), predicted[0] = initial
    smoothed[t]   P(S_t = . | X = x)  (None until backward_smooth has run)
    """

    forward: np.ndarray
    normalizers: np.ndarray
    predicted: np.ndarray
    log_likelihood: float
    smoothed: Optional[np.ndarray] = None

    @property
    def length(self) -> int:
        return self.forward.shape[0]

    @property
    def num_states(self) -> int:
        return self.forward.shape[1]


def forward_pass(model: HmmModel, seq: ObservedSequence) -> ChainPosterior:
    """Scaled forward recursion; returns a posterior without smoothed table."""
    b = emission_matrix(model, seq.values)
    t_len = seq.length
    j = model.num_states
    forward = np.empty((t_len, j))
    predicted = np.empty((t_len, j))
    normalizers = np.empty(t_len)
    predicted[0] = model.initial
    for t in range(t_len):
        if t > 0:
            predicted[t] = forward[t - 1] @ model.transition
        joint = b[t] * predicted[t]
        norm = joint.sum()
        if norm <= 0.0:
            raise ImpossibleObservationError(
                f"observation impossible under model at position {t}"
            )
        normalizers[t] = norm
        forward[t] = joint / norm
    log_likelihood = fsum(np.log(normalizers))
    return ChainPosterior(forward, normalizers, predicted, log_likelihood)


def backward_smooth(model: HmmModel, seq: ObservedSequence,
                    fwd: ChainPosterior) -> ChainPosterior:
    """Backward recursion filling the smoothed table L_t.

    The L_{t+1}(k)/G_{t+1}(k) weights use the 0/0 = 0 convention, which is
    the only way a zero predicted probability can be reached.
    """
    t_len = fwd.length
    smoothed = np.empty_like(fwd.forward)
    smoothed[t_len - 1] = fwd.forward[t_len - 1]
    for t in range(t_len - 2, -1, -1):
        ratio = safe_div(smoothed[t + 1], fwd.predicted[t + 1])
        smoothed[t] = fwd.forward[t] * (model.transition @ ratio)
    return ChainPosterior(fwd.forward, fwd.normalizers, fwd.predicted,
                          fwd.log_likelihood, smoothed)


def smooth_chain(model: HmmModel, seq: ObservedSequence) -> ChainPosterior:
    """Convenience wrapper: forward pass followed by backward smoothing."""
    return backward_smooth(model, seq, forward_pass(model, seq))


def viterbi_chain(model: HmmModel, seq: ObservedSequence):
    """Most likely state sequence and its log joint probability.

    The max-product recursion runs backward and the path is reconstructed
    front-to-back, breaking ties toward the smaller state index at every
    backtracking step.  Among equally likely optima this selects the
    lexicographically smallest path, matching the tree restoration on path
    topologies and the enumeration oracle.
    """
    log_b = log_emission_matrix(model, seq.values)
    t_len = seq.length
    j = model.num_states
    with np.errstate(divide="ignore"):
        log_a = np.log(model.transition)
        log_pi = np.log(model.initial)
    # score[t, i]: best log prob of emissions/transitions from t on, given S_t=i
    nxt = np.empty((t_len, j), dtype=np.int64)
    score = log_b[t_len - 1].copy()
    for t in range(t_len - 2, -1, -1):
        cand = log_a + score[None, :]
        nxt[t] = np.argmax(cand, axis=1)
        score = cand[np.arange(j), nxt[t]] + log_b[t]
    first = log_pi + score
    best_first = int(np.argmax(first))
    log_joint = float(first[best_first])
    if log_joint == -np.inf:
        raise ImpossibleObservationError("all state sequences are impossible")
    path = np.empty(t_len, dtype=np.int64)
    path[0] = best_first
    for t in range(t_len - 1):
        path[t + 1] = nxt[t, path[t]]
    return path, log_joint
