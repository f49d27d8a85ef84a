"""Upward-downward smoothing, log-likelihood and Viterbi restoration for
hidden Markov tree models.

The sum-product pass computes, per vertex u, the state marginal prior
P(S_u = .), the conditional law beta_u given the observed subtree rooted at
u, the edge quantity beta_{parent(u),u} and a normalizing factor N_u whose
product over vertices is the evidence P(X = x).  The downward completion
yields the smoothed probabilities xi_u given the whole tree.

The max-product analogue (upward maxima plus a downward completion) yields
the Viterbi restoration and, per vertex and state, the posterior probability
of the best full configuration constrained to that state value.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ImpossibleObservationError
from .model import HmmModel, ObservedTree, emission_matrix, log_emission_matrix
from .numutil import fsum, safe_div

__all__ = ["TreePosterior", "upward_pass", "downward_pass", "smooth_tree",
           "viterbi_tree", "viterbi_profiles"]


@dataclass
class TreePosterior:
    """Smoothing tables of a tree.

    prior[u]      P(S_u = .)                        (downward marginal law)
    beta[u]       P(S_u = . | observed subtree at u)
    beta_edge[u]  beta_{parent(u),u}, indexed by the parent state; the root
                  row is unused and filled with ones
    normalizers   N_u, with prod_u N_u = P(X = x)
    smoothed[u]   xi_u = P(S_u = . | X = x)  (None until downward_pass)
    """

    prior: np.ndarray
    beta: np.ndarray
    beta_edge: np.ndarray
    normalizers: np.ndarray
    log_likelihood: float
    smoothed: Optional[np.ndarray] = None

    @property
    def num_vertices(self) -> int:
        return self.beta.shape[0]

    @property
    def num_states(self) -> int:
        return self.beta.shape[1]


def _state_priors(model: HmmModel, tree: ObservedTree) -> np.ndarray:
    topo = tree.topology
    prior = np.empty((topo.num_vertices, model.num_states))
    for u in topo.downward_order:
        if u == 0:
            prior[0] = model.initial
        else:
            prior[u] = prior[topo.parent[u]] @ model.transition
    return prior


def upward_pass(model: HmmModel, tree: ObservedTree) -> TreePosterior:
    """Leaf-to-root recursion; returns a posterior without smoothed table."""
    topo = tree.topology
    n, j = topo.num_vertices, model.num_states
    b = emission_matrix(model, tree.values)
    prior = _state_priors(model, tree)
    beta = np.empty((n, j))
    beta_edge = np.ones((n, j))
    normalizers = np.empty(n)
    for u in topo.upward_order():
        joint = b[u] * prior[u]
        for v in topo.children[u]:
            joint = joint * beta_edge[v]
        norm = joint.sum()
        if norm <= 0.0:
            raise ImpossibleObservationError(
                f"observation impossible under model at vertex {u}"
            )
        normalizers[u] = norm
        beta[u] = joint / norm
        if u != 0:
            beta_edge[u] = model.transition @ safe_div(beta[u], prior[u])
    log_likelihood = fsum(np.log(normalizers))
    return TreePosterior(prior, beta, beta_edge, normalizers, log_likelihood)


def downward_pass(model: HmmModel, tree: ObservedTree,
                  up: TreePosterior) -> TreePosterior:
    """Root-to-leaf completion producing the smoothed probabilities."""
    topo = tree.topology
    smoothed = np.empty_like(up.beta)
    for u in topo.downward_order:
        if u == 0:
            smoothed[0] = up.beta[0]
            continue
        ratio = safe_div(smoothed[topo.parent[u]], up.beta_edge[u])
        smoothed[u] = safe_div(up.beta[u], up.prior[u]) * (model.transition.T @ ratio)
    return TreePosterior(up.prior, up.beta, up.beta_edge, up.normalizers,
                         up.log_likelihood, smoothed)


def smooth_tree(model: HmmModel, tree: ObservedTree) -> TreePosterior:
    """Convenience wrapper: upward pass followed by downward completion."""
    return downward_pass(model, tree, upward_pass(model, tree))


def _max_messages(model: HmmModel, tree: ObservedTree):
    """Upward max-product messages in log space.

    m[u, i] is the log probability of the observed subtree at u jointly with
    the best states below u, given S_u = i.  best[v, i] maximizes the edge
    term toward child v from parent state i, and back[v, i] records the
    maximizing child state (smallest index on ties).
    """
    topo = tree.topology
    n, j = topo.num_vertices, model.num_states
    log_b = log_emission_matrix(model, tree.values)
    with np.errstate(divide="ignore"):
        log_a = np.log(model.transition)
    m = np.empty((n, j))
    best = np.zeros((n, j))
    back = np.zeros((n, j), dtype=np.int64)
    for u in topo.upward_order():
        m[u] = log_b[u]
        for v in topo.children[u]:
            cand = log_a + m[v][None, :]
            back[v] = np.argmax(cand, axis=1)
            best[v] = cand[np.arange(j), back[v]]
            m[u] = m[u] + best[v]
    return m, best, back, log_a


def viterbi_tree(model: HmmModel, tree: ObservedTree):
    """Most likely state tree and its log joint probability.

    Ties are broken toward the smaller state index at the root and at every
    downward backtracking step.
    """
    topo = tree.topology
    m, _, back, _ = _max_messages(model, tree)
    with np.errstate(divide="ignore"):
        root_score = np.log(model.initial) + m[0]
    root_state = int(np.argmax(root_score))
    log_joint = float(root_score[root_state])
    if log_joint == -np.inf:
        raise ImpossibleObservationError("all state configurations are impossible")
    states = np.empty(topo.num_vertices, dtype=np.int64)
    for u in topo.downward_order:
        states[u] = root_state if u == 0 else back[u, states[topo.parent[u]]]
    return states, log_joint


def viterbi_profiles(model: HmmModel, tree: ObservedTree) -> np.ndarray:
    """n x J matrix of constrained maxima of the state posterior.

    Entry (u, j) is max over all other vertices' states of
    P((S_v)_{v != u}, S_u = j | X = x): the posterior probability of the best
    full configuration forced through state j at vertex u.  Row maxima equal
    the posterior probability of the Viterbi restoration.
    """
    topo = tree.topology
    n, j = topo.num_vertices, model.num_states
    up = upward_pass(model, tree)  # evidence for the posterior scaling
    m, best, _, log_a = _max_messages(model, tree)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.empty((n, j))
        d[0] = np.log(model.initial)
        for u in topo.downward_order:
            if u == 0:
                continue
            p = topo.parent[u]
            # m[p] already contains best[u]; removing it leaves the outside
            # score.  Where the child subtree is impossible (best -inf) the
            # subtraction is NaN and the whole term must be -inf.
            outside = d[p] + m[p] - best[u]
            outside[best[u] == -np.inf] = -np.inf
            d[u] = np.max(outside[:, None] + log_a, axis=0)
    return np.exp(m + d - up.log_likelihood)
