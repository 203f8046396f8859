"""Contagion centrality built on the Leontief inverse, plus the
comparison measures (degree centrality, leading eigenvalue, DebtRank).

Pair-level centrality is (I - alpha*A)^-1 - I: entry (i, j) is the
cumulative effect on node j when node i is hit by a unit shock.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, StationarityError
from .var import spectral_radius

__all__ = [
    "LeontiefKernel",
    "CentralityReport",
    "leontief_kernel",
    "node_level_kb",
    "system_level_kb",
    "propagate_shock",
    "degree_centrality",
    "degree_threshold_p95",
    "debt_rank",
    "system_debt_rank",
]


@dataclass(frozen=True)
class LeontiefKernel:
    """Cached (I - alpha*A)^-1 and the derived pair-level matrix."""

    a: np.ndarray
    alpha: float
    inv: np.ndarray
    pair_kb: np.ndarray

    def __post_init__(self):
        for name in ("a", "inv", "pair_kb"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self) -> int:
        return self.a.shape[0]


def leontief_kernel(a, alpha: float = 1.0) -> LeontiefKernel:
    """Build the kernel by a dense linear solve against the identity.

    Requires alpha in (0, 1] and spectral radius of alpha*a below one;
    the infinite propagation series is never summed here (it serves as
    the independent oracle in the tests).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericalError("adjacency matrix must be square")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    cert = spectral_radius(alpha * a)
    if not cert.passed:
        raise StationarityError(
            f"spectral radius {cert.spectral_radius:.6f} of alpha*A is not below one"
        )
    m = a.shape[0]
    try:
        inv = np.linalg.solve(np.eye(m) - alpha * a, np.eye(m))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular (I - alpha*A): {exc}") from exc
    return LeontiefKernel(a=a, alpha=alpha, inv=inv, pair_kb=inv - np.eye(m))


def node_level_kb(kernel: LeontiefKernel, w) -> np.ndarray:
    """Weighted row sums of the pair-level matrix: entry i is the total
    weighted impact when node i is shocked."""
    w = np.asarray(w, dtype=float)
    if w.shape != (kernel.n_nodes,):
        raise ValueError(f"weight vector must have length {kernel.n_nodes}")
    return kernel.pair_kb @ w


def system_level_kb(node) -> float:
    """Sum of node-level centralities."""
    return float(np.sum(node))


def propagate_shock(a, eps, t_max: int):
    """Iterate s_t = s_{t-1} A from s_0 = eps.

    Returns (states, cumulative): states has t_max + 1 rows (s_0..s_t_max)
    and cumulative is the sum of s_1..s_t_max.
    """
    a = np.asarray(a, dtype=float)
    s = np.asarray(eps, dtype=float)
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    states = [s]
    cumulative = np.zeros_like(s)
    for _ in range(t_max):
        s = s @ a
        states.append(s)
        cumulative = cumulative + s
    return np.array(states), cumulative


def degree_threshold_p95(a) -> float:
    """Default edge threshold: 95th percentile of |off-diagonal| weights."""
    a = np.asarray(a, dtype=float)
    off = np.abs(a[~np.eye(a.shape[0], dtype=bool)])
    return float(np.percentile(off, 95)) if off.size else 0.0


def degree_centrality(a, threshold: float):
    """Thresholded degree centrality.

    Edges are the off-diagonal entries with |a_ij| > threshold; node
    score is (in-degree + out-degree) / (2 (M - 1)); the system score
    is the mean node score.
    """
    a = np.asarray(a, dtype=float)
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    m = a.shape[0]
    adj = np.abs(a) > threshold
    np.fill_diagonal(adj, False)
    node = (adj.sum(axis=0) + adj.sum(axis=1)) / (2.0 * (m - 1))
    return node, float(node.mean())


def _impact_matrix(a, impact: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if impact == "abs":
        w = np.abs(a)
    elif impact == "relu":
        w = np.clip(a, 0.0, None)
    else:
        raise ValueError(f"unknown impact mode {impact!r}")
    return np.clip(w, 0.0, 1.0)


def debt_rank_trajectory(a, shocked: int, v=None, impact: str = "abs"):
    """Single-shock DebtRank; returns (value, distress history).

    Node states are undistressed / distressed / inactive; a distressed
    node propagates W_ji * h_j to each neighbor once, then goes
    inactive.  The value is the induced system loss sum_j h_j v_j minus
    the initially shocked weight; the history holds h after every
    propagation step (first row is the initial shock).
    """
    w = _impact_matrix(a, impact)
    m = w.shape[0]
    if not 0 <= shocked < m:
        raise IndexError("shocked node index out of range")
    if v is None:
        v = np.full(m, 1.0 / m)
    else:
        v = np.asarray(v, dtype=float)
        if np.any(v < 0) or v.sum() <= 0:
            raise ValueError("economic weights must be nonnegative with positive sum")
        v = v / v.sum()

    h = np.zeros(m)
    h[shocked] = 1.0
    UNDISTRESSED, DISTRESSED, INACTIVE = 0, 1, 2
    state = np.full(m, UNDISTRESSED)
    state[shocked] = DISTRESSED
    history = [h.copy()]

    steps = 0
    while np.any(state == DISTRESSED):
        steps += 1
        if steps > 10 * m:
            warnings.warn("DebtRank iteration cap reached", RuntimeWarning)
            break
        distressed = state == DISTRESSED
        inflow = w[distressed].T @ h[distressed]
        h_new = np.minimum(1.0, h + inflow)
        newly = (state == UNDISTRESSED) & (h_new > h)
        h = h_new
        history.append(h.copy())
        state[distressed] = INACTIVE
        state[newly] = DISTRESSED
    # subtract the initial shock before weighting so the small induced
    # losses are not rounded away against the unit shock
    loss = h.copy()
    loss[shocked] -= 1.0
    return float(loss @ v), np.array(history)


def debt_rank(a, shocked: int, v=None, impact: str = "abs") -> float:
    """DebtRank value of a single-node shock (see debt_rank_trajectory)."""
    value, _ = debt_rank_trajectory(a, shocked, v=v, impact=impact)
    return value


def system_debt_rank(a, v=None, impact: str = "abs") -> float:
    """Mean of debt_rank over every single-node shock scenario."""
    m = np.asarray(a).shape[0]
    return float(np.mean([debt_rank(a, i, v=v, impact=impact) for i in range(m)]))


@dataclass(frozen=True)
class CentralityReport:
    """Pair matrix, node vector and system scalar for one network."""

    labels: tuple
    pair: np.ndarray
    node: np.ndarray
    system: float
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        for name in ("pair", "node", "weights"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_kernel(cls, kernel: LeontiefKernel, w, labels) -> "CentralityReport":
        node = node_level_kb(kernel, w)
        return cls(
            labels=labels,
            pair=kernel.pair_kb,
            node=node,
            system=system_level_kb(node),
            weights=np.asarray(w, dtype=float),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "labels": list(self.labels),
                "pair": self.pair.ravel().tolist(),
                "node": self.node.tolist(),
                "system": self.system,
                "weights": self.weights.tolist(),
            }
        )

    def to_csv(self) -> str:
        lines = ["label,node_kb,system_kb"]
        for lab, val in zip(self.labels, self.node):
            lines.append(f"{lab},{val!r},{self.system!r}")
        return "\n".join(lines) + "\n"
