import numpy as np
import pytest

from kbnet import EstimatedNetwork
from kbnet.var import sigma_block


def series_kb(a, k=None, tol=1e-12):
    """Truncated-series oracle for the pair-level centrality matrix:
    sum of A^t for t = 1..K, with K chosen so the geometric tail of the
    spectral radius is below tol."""
    a = np.asarray(a, dtype=float)
    if k is None:
        rho = np.abs(np.linalg.eigvals(a)).max()
        if rho >= 1:
            raise ValueError("series oracle needs spectral radius below one")
        k = 60 if rho == 0 else max(8, int(np.ceil(np.log(tol) / np.log(max(rho, 1e-16)))))
    total = np.zeros_like(a)
    power = np.eye(a.shape[0])
    for _ in range(k):
        power = power @ a
        total += power
    return total


def random_stable(rng, m=None, radius_cap=0.8, nonnegative=False):
    """Random matrix rescaled to a target spectral radius below the cap."""
    if m is None:
        m = int(rng.integers(2, 7))
    a = rng.uniform(0, 1, size=(m, m)) if nonnegative else rng.normal(size=(m, m))
    rho = np.abs(np.linalg.eigvals(a)).max()
    target = rng.uniform(0.2, radius_cap)
    return a * (target / rho)


def random_network(rng, m=3, t_obs=600):
    """Random EstimatedNetwork-shaped instance with SPD q_inv and a
    proper correlation matrix."""
    a_hat = random_stable(rng, m=m, radius_cap=0.7)
    sigma = rng.uniform(0.5, 2.0, size=m)
    b = rng.normal(size=(m, m))
    cov = b @ b.T + 0.5 * np.eye(m)
    d = np.sqrt(np.diag(cov))
    rho = cov / np.outer(d, d)
    b2 = rng.normal(size=(m, m))
    q_inv = b2 @ b2.T + 0.5 * np.eye(m)
    return EstimatedNetwork(
        labels=tuple(f"n{i}" for i in range(m)),
        a_hat=a_hat, sigma=sigma, rho=0.5 * (rho + rho.T), q_inv=q_inv, t_obs=t_obs,
    )


def naive_node_variance(net, r, i, j, w):
    """O(M^4) oracle for the node-level variance/covariance quadratic
    form, built directly from the per-column covariance blocks."""
    m = net.n_nodes
    u = r @ np.asarray(w, dtype=float)
    b = np.empty((m, m))
    for l in range(m):
        for k in range(m):
            b[l, k] = r[i, :] @ sigma_block(net, l, k) @ r[j, :]
    return float(u @ b @ u)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
