"""Asymptotic variances, Z-tests, confidence intervals and the
validated (zero-clamped) centralities.

With R = (I - A_hat)^-1, the covariance block between coefficient
columns l and k is Sigma_lk = rho_lk sigma_l sigma_k Q^-1, so the inner
matrix B^(i,j) with entries R_i. Sigma_lk R_j.^T factorizes into
(R Q^-1 R^T)_ij * C where C_lk = rho_lk sigma_l sigma_k.  Everything
below runs on that O(M^2) factorization; the naive O(M^4) quadruple
loop lives in the test suite as the independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .centrality import LeontiefKernel, leontief_kernel
from .errors import DegenerateStatisticError, NumericalError
from .var import EstimatedNetwork

__all__ = [
    "KBVarianceEngine",
    "TestResult",
    "test_nonzero",
    "test_pairwise",
    "validated_node_kb",
    "validated_system_kb",
]

_NEG_TOL = -1e-10


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    reject: bool
    level: float
    sides: str
    estimate: float
    std_error: float
    ci: tuple
    degenerate: bool = False


class KBVarianceEngine:
    """Variance/covariance engine for node- and pair-level centrality.

    Read-only after construction; safe to share across threads.
    """

    def __init__(self, net: EstimatedNetwork, kernel: LeontiefKernel | None = None):
        if kernel is None:
            kernel = leontief_kernel(net.a_hat)
        elif kernel.a.shape != net.a_hat.shape or not np.array_equal(kernel.a, net.a_hat):
            raise NumericalError("kernel was not built from this network's a_hat")
        self.net = net
        self.kernel = kernel
        r = kernel.inv
        # C_lk = rho_lk sigma_l sigma_k (residual covariance, T-1 flavor)
        self._c = net.rho * np.outer(net.sigma, net.sigma)
        # G_ij = R_i. Q^-1 R_j.^T; B^(i,j) = G_ij * C
        self._g = r @ net.q_inv @ r.T

    @property
    def n_nodes(self) -> int:
        return self.net.n_nodes

    @property
    def t_obs(self) -> int:
        return self.net.t_obs

    def inner_matrix(self, i: int, j: int) -> np.ndarray:
        """B^(i,j) with entries R_i. Sigma_lk R_j.^T."""
        return self._g[i, j] * self._c

    def _quad(self, vec: np.ndarray) -> float:
        return float(vec @ self._c @ vec)

    def pair_kb_variance(self, i: int, j: int) -> float:
        """Asymptotic variance of sqrt(T) times the (i, j) pair-level
        deviation."""
        var = self._g[i, i] * self._quad(self.kernel.inv[:, j])
        return self._check_nonneg(var)

    def node_kb_variance(self, i: int, w) -> float:
        """Asymptotic variance of sqrt(T) times the node-i deviation."""
        u = self.kernel.inv @ np.asarray(w, dtype=float)
        var = self._g[i, i] * self._quad(u)
        return self._check_nonneg(var)

    def node_kb_covariance(self, i: int, j: int, w) -> float:
        u = self.kernel.inv @ np.asarray(w, dtype=float)
        return float(self._g[i, j] * self._quad(u))

    @staticmethod
    def _check_nonneg(var: float) -> float:
        if var < _NEG_TOL:
            raise NumericalError(f"negative variance {var:.3e}")
        return max(var, 0.0)


def _node_estimate(engine: KBVarianceEngine, i: int, w) -> float:
    return float(engine.kernel.pair_kb[i] @ np.asarray(w, dtype=float))


def test_nonzero(
    engine: KBVarianceEngine, i: int, w, level: float = 0.05, conf: float = 0.975
) -> TestResult:
    """One-sided Z-test of node-level centrality against zero
    (alternative: greater than zero)."""
    estimate = _node_estimate(engine, i, w)
    var = engine.node_kb_variance(i, w)
    if var == 0.0:
        # no residual noise reaches this statistic; Z is undefined
        return TestResult(
            statistic=float("nan"), p_value=float("nan"), reject=False, level=level,
            sides="one", estimate=estimate, std_error=0.0,
            ci=(estimate, estimate), degenerate=True,
        )
    se = float(np.sqrt(var / engine.t_obs))
    z = estimate / se
    p = float(1.0 - ndtr(z))
    zc = float(ndtri(0.5 + conf / 2.0))
    return TestResult(
        statistic=z, p_value=p, reject=p < level, level=level, sides="one",
        estimate=estimate, std_error=se, ci=(estimate - zc * se, estimate + zc * se),
    )


def test_pairwise(
    engine: KBVarianceEngine,
    i: int,
    j: int,
    w,
    level: float = 0.05,
    cov_mode: str = "standard",
    conf: float = 0.975,
) -> TestResult:
    """Two-sided Z-test of node i's centrality against node j's.

    ``cov_mode`` selects the denominator: ``standard`` subtracts twice
    the covariance (variance of a difference), ``paper`` subtracts it
    once.  Both are provided; see the README for the discrepancy note.
    """
    if cov_mode not in ("standard", "paper"):
        raise ValueError(f"unknown cov_mode {cov_mode!r}")
    if i == j:
        raise DegenerateStatisticError("pairwise test needs two distinct nodes")
    estimate = _node_estimate(engine, i, w) - _node_estimate(engine, j, w)
    var_i = engine.node_kb_variance(i, w)
    var_j = engine.node_kb_variance(j, w)
    cov = engine.node_kb_covariance(i, j, w)
    factor = 2.0 if cov_mode == "standard" else 1.0
    denom = var_i + var_j - factor * cov
    if denom <= 0.0:
        raise DegenerateStatisticError(f"nonpositive denominator {denom:.3e}")
    se = float(np.sqrt(denom / engine.t_obs))
    z = estimate / se
    p = float(2.0 * (1.0 - ndtr(abs(z))))
    zc = float(ndtri(0.5 + conf / 2.0))
    return TestResult(
        statistic=z, p_value=p, reject=p < level, level=level, sides="two",
        estimate=estimate, std_error=se, ci=(estimate - zc * se, estimate + zc * se),
    )


def validated_node_kb(engine: KBVarianceEngine, w, conf: float = 0.975):
    """Zero-clamped node centralities.

    A node keeps its raw value only when the lower edge of its
    confidence band at level ``conf`` stays above zero; when the band
    intersects zero the validated value is zero.  Returns the vector
    and the per-node test results.
    """
    if not 0.0 < conf < 1.0:
        raise ValueError("conf must be in (0, 1)")
    m = engine.n_nodes
    results = [test_nonzero(engine, i, w, conf=conf) for i in range(m)]
    validated = np.zeros(m)
    for i, res in enumerate(results):
        if not res.degenerate and res.ci[0] > 0.0:
            validated[i] = res.estimate
    return validated, results


def validated_system_kb(engine: KBVarianceEngine, w, conf: float = 0.975) -> float:
    """Sum of validated node centralities."""
    validated, _ = validated_node_kb(engine, w, conf=conf)
    return float(validated.sum())
