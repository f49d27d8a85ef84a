"""Model and data representations for hidden Markov chains and trees.

A model couples an initial state law, a row-stochastic transition matrix and
one emission model per state.  Emission models are products of independent
per-variable distributions (categorical over a finite alphabet, or Poisson).
Observed data is either a sequence of time-indexed rows or a rooted tree of
vertex-indexed rows; both carry non-negative integer values.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import ValidationError

PROB_TOL = 1e-9  # tolerance on probability-vector sums


# ---------------------------------------------------------------------------
# per-variable emission distributions
# ---------------------------------------------------------------------------

class Categorical:
    """Distribution over a finite alphabet {0, ..., len(probs)-1}."""

    kind = "categorical"

    def __init__(self, probs):
        self.probs = np.asarray(probs, dtype=float)
        if self.probs.ndim != 1 or self.probs.size == 0:
            raise ValidationError("categorical probabilities must be a non-empty vector")
        self.probs.setflags(write=False)

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    @property
    def dof(self) -> int:
        return self.probs.size - 1

    def signature(self):
        return ("categorical", self.probs.size)

    def check(self, prefix: str):
        issues = []
        s = self.probs.sum()
        if abs(s - 1.0) > PROB_TOL:
            issues.append(f"{prefix}: probabilities sum to {s!r}")
        if np.any(self.probs < 0) or np.any(self.probs > 1):
            issues.append(f"{prefix}: entries outside [0, 1]")
        return issues

    def log_pmf(self, x):
        x = np.asarray(x)
        if np.any(x < 0) or np.any(x >= self.alphabet_size):
            bad = x[(x < 0) | (x >= self.alphabet_size)].flat[0]
            raise ValidationError(
                f"value {int(bad)} outside categorical alphabet of size {self.alphabet_size}"
            )
        with np.errstate(divide="ignore"):
            return np.log(self.probs[x])

    def sample(self, rng: np.random.Generator, size: int):
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
        return np.minimum(idx, self.alphabet_size - 1)

    def __eq__(self, other):
        return isinstance(other, Categorical) and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"Categorical({self.probs.tolist()})"


class Poisson:
    """Poisson distribution with rate >= 0 (rate 0 is the point mass at 0)."""

    kind = "poisson"

    def __init__(self, rate):
        self.rate = float(rate)

    @property
    def dof(self) -> int:
        return 1

    def signature(self):
        return ("poisson",)

    def check(self, prefix: str):
        if not np.isfinite(self.rate) or self.rate < 0:
            return [f"{prefix}: rate {self.rate!r} must be finite and >= 0"]
        return []

    def log_pmf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValidationError("Poisson values must be non-negative integers")
        # xlogy keeps rate == 0 well defined: pmf(0) = 1, pmf(x > 0) = 0
        return xlogy(x, self.rate) - self.rate - gammaln(x + 1.0)

    def sample(self, rng: np.random.Generator, size: int):
        return rng.poisson(self.rate, size=size)

    def __eq__(self, other):
        return isinstance(other, Poisson) and self.rate == other.rate

    def __repr__(self):
        return f"Poisson({self.rate})"


EmissionVar = Union[Categorical, Poisson]


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

class HmmModel:
    """A J-state hidden Markov model shared by chain and tree inference.

    Parameters are stored as given; use :func:`validate_model` to check the
    probabilistic invariants.  Instances are immutable after construction
    and safe to share across threads.
    """

    def __init__(self, initial, transition, emissions: Sequence[Sequence[EmissionVar]]):
        self.initial = np.asarray(initial, dtype=float)
        self.transition = np.asarray(transition, dtype=float)
        self.emissions = tuple(tuple(state_vars) for state_vars in emissions)
        if self.initial.ndim != 1:
            raise ValidationError("initial must be a vector")
        j = self.initial.size
        if self.transition.shape != (j, j):
            raise ValidationError(
                f"transition must be {j}x{j}, got {self.transition.shape}"
            )
        if len(self.emissions) != j:
            raise ValidationError(
                f"need one emission model per state: {len(self.emissions)} != {j}"
            )
        if j == 0:
            raise ValidationError("model needs at least one state")
        self.initial.setflags(write=False)
        self.transition.setflags(write=False)

    @property
    def num_states(self) -> int:
        return self.initial.size

    @property
    def num_variables(self) -> int:
        return len(self.emissions[0])

    def variable_signature(self):
        return tuple(var.signature() for var in self.emissions[0])

    def __eq__(self, other):
        return (
            isinstance(other, HmmModel)
            and np.array_equal(self.initial, other.initial)
            and np.array_equal(self.transition, other.transition)
            and self.emissions == other.emissions
        )

    def __repr__(self):
        return f"HmmModel(J={self.num_states}, V={self.num_variables})"


@dataclass
class ValidationReport:
    ok: bool
    violations: list

    def __bool__(self):
        return self.ok


def validate_model(model: HmmModel) -> ValidationReport:
    """Check every model invariant; violations are data, not exceptions."""
    v = []
    s = model.initial.sum()
    if abs(s - 1.0) > PROB_TOL:
        v.append(f"initial: sums to {s!r}")
    if np.any(model.initial < 0) or np.any(model.initial > 1):
        v.append("initial: entries outside [0, 1]")
    for i, row in enumerate(model.transition):
        rs = row.sum()
        if abs(rs - 1.0) > PROB_TOL:
            v.append(f"transition: row {i} sums to {rs!r}")
        if np.any(row < 0) or np.any(row > 1):
            v.append(f"transition: row {i} has entries outside [0, 1]")
    sig = model.variable_signature()
    for j, state_vars in enumerate(model.emissions):
        if tuple(var.signature() for var in state_vars) != sig:
            v.append(f"emissions: state {j} variable signature differs from state 0")
            continue
        for k, var in enumerate(state_vars):
            v.extend(var.check(f"emissions: state {j}, variable {k}"))
    return ValidationReport(ok=not v, violations=v)


# ---------------------------------------------------------------------------
# observed data
# ---------------------------------------------------------------------------

class ObservedSequence:
    """T x V matrix of non-negative integer observations, T >= 1."""

    def __init__(self, values):
        values = np.asarray(values, dtype=np.int64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValidationError("sequence values must be a non-empty TxV matrix")
        if np.any(values < 0):
            raise ValidationError("observed values must be non-negative integers")
        self.values = values
        self.values.setflags(write=False)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def num_variables(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.length

    def __eq__(self, other):
        return isinstance(other, ObservedSequence) and np.array_equal(
            self.values, other.values
        )

    def __repr__(self):
        return f"ObservedSequence(T={self.length}, V={self.num_variables})"


class TreeTopology:
    """Rooted tree given as a parent array; vertex 0 is the root.

    ``parent[0] == -1`` and every other vertex names its parent.  Children
    lists are derived, ordered by ascending vertex id.
    """

    def __init__(self, parent):
        parent = np.asarray(parent, dtype=np.int64)
        if parent.ndim != 1 or parent.size < 1:
            raise ValidationError("parent array must be a non-empty vector")
        n = parent.size
        roots = np.flatnonzero(parent == -1)
        if roots.size != 1:
            raise ValidationError(f"exactly one root expected, found {roots.size}")
        if roots[0] != 0:
            raise ValidationError("vertex 0 must be the root")
        others = parent[1:]
        if np.any((others < 0) | (others >= n)):
            raise ValidationError("parent ids must lie in [0, n)")
        # depth-resolution walk doubles as the acyclicity check
        depth = np.full(n, -1, dtype=np.int64)
        depth[0] = 0
        for u in range(1, n):
            if depth[u] >= 0:
                continue
            chain = []
            w = u
            while depth[w] < 0:
                chain.append(w)
                w = parent[w]
                if len(chain) > n:
                    raise ValidationError("parent relation contains a cycle")
            base = depth[w]
            for k, x in enumerate(reversed(chain)):
                depth[x] = base + k + 1
        self.parent = parent
        self.parent.setflags(write=False)
        self.depth = depth
        self.depth.setflags(write=False)
        # parents-before-children order (stable, so ids stay ascending per level)
        self.downward_order = np.argsort(depth, kind="stable")
        self.downward_order.setflags(write=False)
        children = [[] for _ in range(n)]
        for u in range(1, n):
            children[parent[u]].append(u)
        self.children = tuple(np.asarray(c, dtype=np.int64) for c in children)

    @property
    def num_vertices(self) -> int:
        return self.parent.size

    @property
    def leaves(self):
        return np.asarray(
            [u for u in range(self.num_vertices) if self.children[u].size == 0],
            dtype=np.int64,
        )

    def upward_order(self):
        """Children-before-parents vertex order."""
        return self.downward_order[::-1]

    def subtree_vertices(self, u: int):
        """Vertices of the complete subtree rooted at u, in downward order."""
        out = [u]
        stack = list(self.children[u])
        while stack:
            w = stack.pop()
            out.append(w)
            stack.extend(self.children[w])
        return np.asarray(sorted(out), dtype=np.int64)

    def is_path(self) -> bool:
        return all(c.size <= 1 for c in self.children)

    def __eq__(self, other):
        return isinstance(other, TreeTopology) and np.array_equal(
            self.parent, other.parent
        )

    def __repr__(self):
        return f"TreeTopology(n={self.num_vertices})"


class ObservedTree:
    """Observations aligned with the vertices of a rooted tree."""

    def __init__(self, topology: TreeTopology, values):
        values = np.asarray(values, dtype=np.int64)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != topology.num_vertices:
            raise ValidationError(
                f"{values.shape[0]} observation rows for {topology.num_vertices} vertices"
            )
        if np.any(values < 0):
            raise ValidationError("observed values must be non-negative integers")
        self.topology = topology
        self.values = values
        self.values.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return self.topology.num_vertices

    @property
    def num_variables(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, ObservedTree)
            and self.topology == other.topology
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"ObservedTree(n={self.num_vertices}, V={self.num_variables})"


def check_compatible(model: HmmModel, values: np.ndarray):
    """Raise unless the observation matrix matches the model's variables."""
    if values.shape[1] != model.num_variables:
        raise ValidationError(
            f"data has {values.shape[1]} variables, model has {model.num_variables}"
        )
    for k, var in enumerate(model.emissions[0]):
        if isinstance(var, Categorical):
            col = values[:, k]
            bad = np.flatnonzero(col >= var.alphabet_size)
            if bad.size:
                raise ValidationError(
                    f"variable {k}: value {int(col[bad[0]])} outside categorical "
                    f"alphabet of size {var.alphabet_size}"
                )


# ---------------------------------------------------------------------------
# emission likelihood evaluation
# ---------------------------------------------------------------------------

def emission_log_prob(model: HmmModel, state: int, observation) -> float:
    """log b_state(observation), a sum of per-variable log pmfs."""
    obs = np.asarray(observation, dtype=np.int64).reshape(-1)
    if obs.size != model.num_variables:
        raise ValidationError(
            f"observation has {obs.size} variables, model has {model.num_variables}"
        )
    total = 0.0
    for k, var in enumerate(model.emissions[state]):
        try:
            total += float(var.log_pmf(obs[k]))
        except ValidationError as exc:
            raise ValidationError(f"variable {k}: {exc}") from None
    return total


def emission_prob(model: HmmModel, state: int, observation) -> float:
    """b_state(observation) = product over variables of per-variable pmfs."""
    return float(np.exp(emission_log_prob(model, state, observation)))


def log_emission_matrix(model: HmmModel, values: np.ndarray) -> np.ndarray:
    """N x J matrix of log b_j(x_row), evaluated per variable then summed."""
    check_compatible(model, values)
    n = values.shape[0]
    out = np.zeros((n, model.num_states))
    for j in range(model.num_states):
        for k, var in enumerate(model.emissions[j]):
            out[:, j] += var.log_pmf(values[:, k])
    return out


def emission_matrix(model: HmmModel, values: np.ndarray) -> np.ndarray:
    """N x J matrix of b_j(x_row); log-space internally, then exponentiated."""
    return np.exp(log_emission_matrix(model, values))


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def _draw_states_chain(model, length, rng):
    cum_pi = np.cumsum(model.initial)
    cum_a = np.cumsum(model.transition, axis=1)
    u = rng.random(length)
    j = model.num_states
    states = np.empty(length, dtype=np.int64)
    states[0] = min(np.searchsorted(cum_pi, u[0] * cum_pi[-1], side="right"), j - 1)
    for t in range(1, length):
        row = cum_a[states[t - 1]]
        states[t] = min(np.searchsorted(row, u[t] * row[-1], side="right"), j - 1)
    return states


def _draw_observations(model, states, rng):
    n = states.size
    values = np.empty((n, model.num_variables), dtype=np.int64)
    for k in range(model.num_variables):
        for j in range(model.num_states):
            idx = np.flatnonzero(states == j)
            if idx.size:
                values[idx, k] = model.emissions[j][k].sample(rng, idx.size)
    return values


def simulate_chain(model: HmmModel, length: int, seed: int):
    """Draw (state sequence, ObservedSequence); deterministic given seed."""
    if length < 1:
        raise ValidationError("length must be >= 1")
    rng = np.random.default_rng(seed)
    states = _draw_states_chain(model, length, rng)
    return states, ObservedSequence(_draw_observations(model, states, rng))


def simulate_tree(model: HmmModel, topology: TreeTopology, seed: int):
    """Draw (state tree, ObservedTree): root from the initial law, children
    from their parent's transition row."""
    rng = np.random.default_rng(seed)
    n = topology.num_vertices
    cum_pi = np.cumsum(model.initial)
    cum_a = np.cumsum(model.transition, axis=1)
    u = rng.random(n)
    j = model.num_states
    states = np.empty(n, dtype=np.int64)
    for idx, vertex in enumerate(topology.downward_order):
        if vertex == 0:
            row = cum_pi
        else:
            row = cum_a[states[topology.parent[vertex]]]
        states[vertex] = min(
            np.searchsorted(row, u[idx] * row[-1], side="right"), j - 1
        )
    values = _draw_observations(model, states, rng)
    return states, ObservedTree(topology, values)
