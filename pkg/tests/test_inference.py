import numpy as np
import pytest

from kbnet import (
    DegenerateStatisticError,
    EstimatedNetwork,
    KBVarianceEngine,
    estimate_var1,
    test_nonzero,
    test_pairwise,
    validated_node_kb,
    validated_system_kb,
)
from kbnet.simulate import SimulationConfig, generate_var1

from conftest import naive_node_variance, random_network

# imported library functions, not test cases
test_nonzero.__test__ = False
test_pairwise.__test__ = False


def identity_network(sigma, m=3, t_obs=400):
    return EstimatedNetwork(
        labels=tuple(f"n{i}" for i in range(m)),
        a_hat=np.zeros((m, m)),
        sigma=np.asarray(sigma, dtype=float),
        rho=np.eye(m),
        q_inv=np.eye(m),
        t_obs=t_obs,
    )


class TestVarianceEngine:
    def test_identity_case_pair_variance(self):
        # A_hat = 0, rho = I, Q^-1 = I: pair variance (i, j) is sigma_j^2
        net = identity_network([1.5, 0.5, 2.0])
        engine = KBVarianceEngine(net)
        for i in range(3):
            for j in range(3):
                assert engine.pair_kb_variance(i, j) == pytest.approx(
                    net.sigma[j] ** 2, abs=1e-12
                )

    def test_doubling_sigma_quadruples_variance(self, rng):
        net = random_network(rng)
        doubled = EstimatedNetwork(
            labels=net.labels, a_hat=net.a_hat, sigma=2.0 * net.sigma,
            rho=net.rho, q_inv=net.q_inv, t_obs=net.t_obs,
        )
        e1, e2 = KBVarianceEngine(net), KBVarianceEngine(doubled)
        w = rng.normal(size=3)
        for i in range(3):
            assert e2.node_kb_variance(i, w) == pytest.approx(
                4.0 * e1.node_kb_variance(i, w), rel=1e-12
            )
            assert e2.pair_kb_variance(i, 1) == pytest.approx(
                4.0 * e1.pair_kb_variance(i, 1), rel=1e-12
            )

    def test_basis_weight_reduces_to_pair_variance(self, rng):
        engine = KBVarianceEngine(random_network(rng, m=4))
        for j in range(4):
            w = np.zeros(4)
            w[j] = 1.0
            for i in range(4):
                assert engine.node_kb_variance(i, w) == pytest.approx(
                    engine.pair_kb_variance(i, j), rel=1e-12
                )

    def test_weight_scaling(self, rng):
        engine = KBVarianceEngine(random_network(rng))
        w = rng.normal(size=3)
        assert engine.node_kb_variance(1, 3.0 * w) == pytest.approx(
            9.0 * engine.node_kb_variance(1, w), rel=1e-12
        )

    def test_covariance_diagonal_equals_variance(self, rng):
        engine = KBVarianceEngine(random_network(rng))
        w = rng.normal(size=3)
        for i in range(3):
            assert engine.node_kb_covariance(i, i, w) == pytest.approx(
                engine.node_kb_variance(i, w), rel=1e-12
            )

    def test_cauchy_schwarz(self, rng):
        for _ in range(10):
            engine = KBVarianceEngine(random_network(rng, m=4))
            w = rng.normal(size=4)
            for i in range(4):
                for j in range(4):
                    cov = engine.node_kb_covariance(i, j, w)
                    bound = np.sqrt(
                        engine.node_kb_variance(i, w) * engine.node_kb_variance(j, w)
                    )
                    assert abs(cov) <= bound + 1e-9

    def test_inner_matrix_transpose_symmetry(self, rng):
        engine = KBVarianceEngine(random_network(rng, m=4))
        for i in range(4):
            for j in range(4):
                assert np.allclose(
                    engine.inner_matrix(i, j), engine.inner_matrix(j, i).T, atol=1e-12
                )
        for i in range(4):
            b = engine.inner_matrix(i, i)
            assert np.linalg.eigvalsh(0.5 * (b + b.T)).min() > -1e-10

    def test_fast_path_matches_naive_quadruple_loop(self, rng):
        for _ in range(10):
            m = int(rng.integers(2, 6))
            net = random_network(rng, m=m)
            engine = KBVarianceEngine(net)
            w = rng.normal(size=m)
            r = engine.kernel.inv
            for i in range(m):
                for j in range(m):
                    naive = naive_node_variance(net, r, i, j, w)
                    fast = engine.node_kb_covariance(i, j, w)
                    assert fast == pytest.approx(naive, abs=1e-10 * max(1, abs(naive)))

    def test_rebuild_from_json_is_bit_identical(self, rng):
        net = random_network(rng)
        rebuilt = EstimatedNetwork.from_json(net.to_json())
        e1, e2 = KBVarianceEngine(net), KBVarianceEngine(rebuilt)
        w = np.ones(3)
        for i in range(3):
            assert e1.node_kb_variance(i, w) == e2.node_kb_variance(i, w)
            for j in range(3):
                assert e1.pair_kb_variance(i, j) == e2.pair_kb_variance(i, j)

    def test_kernel_mismatch_rejected(self, rng):
        from kbnet import leontief_kernel

        net = random_network(rng)
        other = leontief_kernel(np.zeros((3, 3)))
        with pytest.raises(Exception):
            KBVarianceEngine(net, other)

    def test_pair_variance_matches_monte_carlo(self):
        # empirical variance of sqrt(T) * (entry deviation) vs the formula
        config = SimulationConfig(n_reps=2000, seed=314)
        a_true = np.asarray(config.a_true)
        r_true = np.linalg.inv(np.eye(3) - a_true)
        devs, theos = [], []
        for rep in range(config.n_reps):
            net = estimate_var1(generate_var1(config, rep))
            engine = KBVarianceEngine(net)
            r_hat = engine.kernel.inv
            devs.append(np.sqrt(net.t_obs) * (r_hat - r_true))
            theos.append([[engine.pair_kb_variance(i, j) for j in range(3)] for i in range(3)])
        emp = np.var(np.array(devs), axis=0, ddof=1)
        theo = np.mean(np.array(theos), axis=0)
        assert np.all(np.abs(emp / theo - 1.0) < 0.15)


class TestNonzeroTest:
    def test_empty_network_is_uninformative(self):
        engine = KBVarianceEngine(identity_network([1.0, 1.0, 1.0]))
        res = test_nonzero(engine, 0, np.ones(3))
        assert res.estimate == 0.0
        assert res.statistic == 0.0
        assert res.p_value == pytest.approx(0.5)
        assert not res.reject

    def test_reject_consistency(self, rng):
        engine = KBVarianceEngine(random_network(rng))
        for i in range(3):
            res = test_nonzero(engine, i, np.ones(3), level=0.05)
            assert res.reject == (res.p_value < 0.05)
            lo, hi = res.ci
            assert lo <= res.estimate <= hi

    def test_degenerate_sigma(self):
        engine = KBVarianceEngine(identity_network([0.0, 0.0, 0.0]))
        res = test_nonzero(engine, 0, np.ones(3))
        assert res.degenerate
        assert not res.reject


class TestPairwiseTest:
    def test_symmetric_network_is_exact_zero(self):
        a = np.array([[0.0, 0.5], [0.5, 0.0]])
        net = EstimatedNetwork(
            labels=("a", "b"), a_hat=a, sigma=np.ones(2), rho=np.eye(2),
            q_inv=np.eye(2), t_obs=500,
        )
        res = test_pairwise(KBVarianceEngine(net), 0, 1, np.ones(2))
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_same_node_rejected(self, rng):
        engine = KBVarianceEngine(random_network(rng))
        with pytest.raises(DegenerateStatisticError):
            test_pairwise(engine, 1, 1, np.ones(3))

    def test_cov_modes_differ(self, rng):
        engine = KBVarianceEngine(random_network(rng))
        w = np.ones(3)
        std = test_pairwise(engine, 0, 1, w, cov_mode="standard")
        pap = test_pairwise(engine, 0, 1, w, cov_mode="paper")
        cov = engine.node_kb_covariance(0, 1, w)
        assert std.std_error != pap.std_error or cov == 0.0
        assert std.estimate == pap.estimate


class TestValidated:
    def test_zero_network_all_clamped(self):
        engine = KBVarianceEngine(identity_network([1.0, 1.0, 1.0]))
        validated, _ = validated_node_kb(engine, np.ones(3))
        assert np.all(validated == 0.0)
        assert validated_system_kb(engine, np.ones(3)) == 0.0

    def test_tiny_variance_keeps_raw_values(self, rng):
        a = np.array([[0.0, 0.5], [0.3, 0.0]])
        net = EstimatedNetwork(
            labels=("a", "b"), a_hat=a, sigma=np.full(2, 1e-8), rho=np.eye(2),
            q_inv=np.eye(2), t_obs=10**6,
        )
        engine = KBVarianceEngine(net)
        validated, results = validated_node_kb(engine, np.ones(2))
        raw = engine.kernel.pair_kb @ np.ones(2)
        assert np.allclose(validated, raw, rtol=1e-12)
        assert all(r.ci[0] > 0 for r in results)

    def test_validated_never_exceeds_raw(self, rng):
        for _ in range(10):
            net = random_network(rng)
            engine = KBVarianceEngine(net)
            raw = engine.kernel.pair_kb @ np.ones(3)
            validated, _ = validated_node_kb(engine, np.ones(3))
            keep = validated != 0.0
            assert np.all(validated[keep] == raw[keep])
            assert np.all((validated == 0.0) | (validated == raw))

    def test_conf_bounds_validated(self):
        with pytest.raises(ValueError):
            engine = KBVarianceEngine(identity_network([1.0, 1.0, 1.0]))
            validated_node_kb(engine, np.ones(3), conf=1.0)
