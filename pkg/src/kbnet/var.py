"""VAR(1) network estimation and the residual covariance structure.

Convention (kept everywhere in the package): the regression is Y = X A,
with X the lagged returns, so row i of A carries node i's outgoing
influence.  Entry (i, j) is the one-step effect of node i's lagged
return on node j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, NumericalError
from .panel import ReturnPanel

__all__ = [
    "EstimatedNetwork",
    "StationarityCertificate",
    "estimate_var1",
    "sigma_block",
    "spectral_radius",
]

CONDITION_CAP = 1e12
STATIONARITY_MARGIN = 1e-6


@dataclass(frozen=True)
class StationarityCertificate:
    spectral_radius: float
    passed: bool
    tolerance_used: float


@dataclass(frozen=True)
class EstimatedNetwork:
    """OLS adjacency matrix plus everything inference needs.

    sigma/rho are residual standard deviations and correlations
    (denominator T-1); q_inv is (X'X / T)^-1; t_obs is the number of
    regression rows T.
    """

    labels: tuple
    a_hat: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    q_inv: np.ndarray
    t_obs: int

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        for name in ("a_hat", "sigma", "rho", "q_inv"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        m = len(self.labels)
        if self.a_hat.shape != (m, m) or self.rho.shape != (m, m) or self.q_inv.shape != (m, m):
            raise NumericalError("matrix shape does not match label count")
        if self.sigma.shape != (m,):
            raise NumericalError("sigma length does not match label count")
        if np.any(self.sigma < 0):
            raise NumericalError("negative residual standard deviation")
        if not np.allclose(self.rho, self.rho.T, atol=1e-10) or np.any(np.abs(self.rho) > 1 + 1e-10):
            raise NumericalError("rho must be a symmetric correlation matrix")
        if not np.allclose(np.diag(self.rho), 1.0, atol=1e-10):
            raise NumericalError("rho diagonal must be one")
        sym = 0.5 * (self.q_inv + self.q_inv.T)
        if np.linalg.eigvalsh(sym).min() < -1e-8:
            raise NumericalError("q_inv is not positive definite")

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    def to_json(self) -> str:
        # json floats use repr (shortest round-trip), so this is bit-exact
        return json.dumps(
            {
                "labels": list(self.labels),
                "a_hat": self.a_hat.ravel().tolist(),
                "sigma": self.sigma.tolist(),
                "rho": self.rho.ravel().tolist(),
                "q_inv": self.q_inv.ravel().tolist(),
                "t_obs": self.t_obs,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "EstimatedNetwork":
        doc = json.loads(text)
        m = len(doc["labels"])
        return cls(
            labels=tuple(doc["labels"]),
            a_hat=np.array(doc["a_hat"], dtype=float).reshape(m, m),
            sigma=np.array(doc["sigma"], dtype=float),
            rho=np.array(doc["rho"], dtype=float).reshape(m, m),
            q_inv=np.array(doc["q_inv"], dtype=float).reshape(m, m),
            t_obs=int(doc["t_obs"]),
        )


def estimate_var1(
    returns: ReturnPanel,
    demean: bool = True,
    condition_cap: float = CONDITION_CAP,
) -> EstimatedNetwork:
    """Estimate the adjacency matrix by per-column least squares.

    X holds rows 0..T_r-2 and Y rows 1..T_r-1 of the return panel;
    a_hat = (X'X)^-1 X'Y.  ``demean`` subtracts column means first
    (the regression itself carries no intercept).
    """
    values = returns.values
    t_r, m = values.shape
    if t_r < m + 2:
        raise EstimationError(f"need at least M+2={m + 2} return rows, got {t_r}")
    if demean:
        values = values - values.mean(axis=0)
    x = values[:-1]
    y = values[1:]
    t = t_r - 1

    xtx = x.T @ x
    cond = np.linalg.cond(xtx)
    if not np.isfinite(cond) or cond > condition_cap:
        raise EstimationError(f"ill-conditioned design matrix (cond {cond:.3e})")
    a_hat = np.linalg.solve(xtx, x.T @ y)
    resid = y - x @ a_hat

    sigma = resid.std(axis=0, ddof=1)
    rho = np.eye(m)
    nz = sigma > 0
    if nz.any():
        sub = resid[:, nz]
        c = (sub - sub.mean(axis=0)).T @ (sub - sub.mean(axis=0))
        d = np.sqrt(np.diag(c))
        with np.errstate(invalid="ignore", divide="ignore"):
            corr = c / np.outer(d, d)
        np.fill_diagonal(corr, 1.0)
        corr = np.clip(corr, -1.0, 1.0)
        idx = np.where(nz)[0]
        rho[np.ix_(idx, idx)] = 0.5 * (corr + corr.T)

    q_inv = np.linalg.inv(xtx / t)
    q_inv = 0.5 * (q_inv + q_inv.T)

    return EstimatedNetwork(
        labels=returns.labels, a_hat=a_hat, sigma=sigma, rho=rho, q_inv=q_inv, t_obs=t
    )


def sigma_block(net: EstimatedNetwork, l: int, k: int) -> np.ndarray:
    """Covariance block between coefficient columns l and k:
    rho_lk * sigma_l * sigma_k * Q^-1 (scaled by sqrt(T) as in the
    asymptotic statements)."""
    m = net.n_nodes
    if not (0 <= l < m and 0 <= k < m):
        raise IndexError("node index out of range")
    return net.rho[l, k] * net.sigma[l] * net.sigma[k] * net.q_inv


def spectral_radius(a, margin: float = STATIONARITY_MARGIN) -> StationarityCertificate:
    """Largest eigenvalue modulus, via LAPACK's Hessenberg + shifted-QR
    eigenvalue solver.  The certificate passes when the radius is below
    1 - margin."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalError("non-finite entry in adjacency matrix")
    radius = float(np.abs(np.linalg.eigvals(a)).max()) if a.size else 0.0
    return StationarityCertificate(
        spectral_radius=radius, passed=radius < 1.0 - margin, tolerance_used=margin
    )
