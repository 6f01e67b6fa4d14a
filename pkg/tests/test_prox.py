import numpy as np
import pytest

from tvadmm import prox


def random_spd(rng, n, shift=1.0):
    m = rng.normal(size=(n, n))
    return m.T @ m + shift * np.eye(n)


class TestProxGaussian:
    def test_scalar_example(self):
        cache = prox.gaussian_prox_cache(np.array([[1.0]]), np.array([[2.0]]), 1.0)
        x = prox.prox_gaussian(cache, 0, np.array([0.0]))
        assert np.allclose(x, [1.0], atol=1e-14)

    def test_fixed_point_at_sample(self):
        rng = np.random.default_rng(0)
        sigma = random_spd(rng, 3)
        y = rng.normal(size=(1, 3))
        cache = prox.gaussian_prox_cache(sigma, y, 2.5)
        x = prox.prox_gaussian(cache, 0, y[0])
        assert np.abs(x - y[0]).max() < 1e-12

    def test_identity_sigma_example(self):
        cache = prox.gaussian_prox_cache(np.eye(2), np.array([[4.0, 0.0]]), 3.0)
        x = prox.prox_gaussian(cache, 0, np.array([0.0, 4.0]))
        assert np.allclose(x, [1.0, 3.0], atol=1e-14)

    def test_dimension_mismatch(self):
        cache = prox.gaussian_prox_cache(np.eye(2), np.zeros((1, 2)), 1.0)
        with pytest.raises(ValueError):
            prox.prox_gaussian(cache, 0, np.zeros(3))

    def test_rejects_nonpositive_rho(self):
        with pytest.raises(ValueError):
            prox.gaussian_prox_cache(np.eye(2), np.zeros((1, 2)), 0.0)

    def test_matches_dense_solve_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            n = int(rng.integers(1, 7))
            sigma = random_spd(rng, n)
            rho = float(rng.uniform(0.1, 5.0))
            y = rng.normal(size=(3, n))
            target = rng.normal(size=n)
            cache = prox.gaussian_prox_cache(sigma, y, rho)
            x = prox.prox_gaussian(cache, 1, target)
            sigma_inv = np.linalg.inv(sigma)
            ref = np.linalg.solve(sigma_inv + rho * np.eye(n),
                                  sigma_inv @ y[1] + rho * target)
            assert np.abs(x - ref).max() < 1e-9

    def test_batch_matches_per_index(self):
        rng = np.random.default_rng(22)
        sigma = random_spd(rng, 4)
        y = rng.normal(size=(9, 4))
        cache = prox.gaussian_prox_cache(sigma, y, 1.3)
        targets = rng.normal(size=(9, 4))
        batch = prox.prox_gaussian_batch(cache, targets)
        for i in range(9):
            assert np.array_equal(batch[i], prox.prox_gaussian(cache, i, targets[i]))


class TestSoftThresholdGroup:
    def test_shrink_example(self):
        out = prox.soft_threshold_group(np.array([3.0, 4.0]), 1.0)
        assert np.allclose(out, [2.4, 3.2], atol=1e-14)

    def test_zero_input(self):
        out = prox.soft_threshold_group(np.zeros(3), 2.0)
        assert np.array_equal(out, np.zeros(3))

    def test_kill_example(self):
        out = prox.soft_threshold_group(np.array([1.0, 0.0]), 2.0)
        assert np.array_equal(out, np.zeros(2))

    def test_negative_kappa(self):
        with pytest.raises(ValueError):
            prox.soft_threshold_group(np.ones(2), -0.5)

    def test_norm_identity(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            a = rng.normal(size=int(rng.integers(1, 6)))
            kappa = float(rng.uniform(0.0, 2.0))
            out_norm = np.linalg.norm(prox.soft_threshold_group(a, kappa))
            expect = max(np.linalg.norm(a) - kappa, 0.0)
            assert abs(out_norm - expect) <= 1e-12 * max(1.0, expect)

    def test_nonexpansive(self):
        rng = np.random.default_rng(32)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            a, b = rng.normal(size=d), rng.normal(size=d)
            kappa = float(rng.uniform(0.0, 2.0))
            lhs = np.linalg.norm(
                prox.soft_threshold_group(a, kappa) - prox.soft_threshold_group(b, kappa)
            )
            assert lhs <= np.linalg.norm(a - b) + 1e-12

    def test_subgradient_optimality(self):
        rng = np.random.default_rng(33)
        for _ in range(200):
            a = rng.normal(size=int(rng.integers(1, 6))) * rng.uniform(0.1, 3.0)
            kappa = float(rng.uniform(0.0, 2.0))
            r = prox.soft_threshold_group(a, kappa)
            if np.linalg.norm(r) > 0.0:
                assert np.abs((a - r) - kappa * r / np.linalg.norm(r)).max() < 1e-10
            else:
                assert np.linalg.norm(a) <= kappa + 1e-12

    def test_rows_matches_vector(self):
        rng = np.random.default_rng(34)
        a = rng.normal(size=(7, 3))
        out = prox.soft_threshold_group_rows(a, 0.9)
        for i in range(7):
            assert np.allclose(out[i], prox.soft_threshold_group(a[i], 0.9),
                               atol=1e-15)


class TestSoftThresholdScalar:
    def test_componentwise_example(self):
        out = prox.soft_threshold_scalar(np.array([2.0, -0.5, 0.0]), 1.0)
        assert np.array_equal(out, [1.0, 0.0, 0.0])

    def test_zero_kappa(self):
        a = np.array([1.5, -2.5])
        assert np.array_equal(prox.soft_threshold_scalar(a, 0.0), a)

    def test_negative_entry(self):
        assert np.array_equal(prox.soft_threshold_scalar(np.array([-3.0]), 1.0),
                              [-2.0])

    def test_negative_kappa(self):
        with pytest.raises(ValueError):
            prox.soft_threshold_scalar(np.ones(2), -1.0)


class TestProxNegLogdet:
    def test_scalar_zero_target(self):
        x = prox.prox_neg_logdet(np.array([[0.0]]), np.array([0.0]), 1.0)
        assert np.allclose(x, [[1.0]], atol=1e-14)

    def test_scalar_example(self):
        x = prox.prox_neg_logdet(np.array([[2.0]]), np.array([0.0]), 1.0)
        assert np.allclose(x, [[(2.0 + np.sqrt(8.0)) / 2.0]], atol=1e-12)

    def test_identity_target(self):
        x = prox.prox_neg_logdet(np.eye(2), np.zeros(2), 1.0)
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        assert np.allclose(x, golden * np.eye(2), atol=1e-12)

    def test_rejects_nonpositive_rho(self):
        with pytest.raises(ValueError):
            prox.prox_neg_logdet(np.eye(2), np.zeros(2), 0.0)

    def test_stationarity_and_spd(self):
        rng = np.random.default_rng(41)
        for _ in range(120):
            n = int(rng.integers(1, 6))
            v = rng.normal(size=(n, n)) * rng.uniform(0.2, 3.0)
            v = 0.5 * (v + v.T)
            y = rng.normal(size=n)
            rho = float(rng.uniform(0.1, 5.0))
            x = prox.prox_neg_logdet(v, y, rho)
            evals = np.linalg.eigvalsh(x)
            assert evals.min() > 0.0
            resid = np.outer(y, y) - np.linalg.inv(x) + rho * (x - v)
            bound = 1e-7 * (1.0 + rho * np.linalg.norm(v))
            assert np.linalg.norm(resid) <= bound

    def test_eigenvalue_lower_bound(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(1, 6))
            rho = float(rng.uniform(0.1, 5.0))
            lam = rng.normal(size=n) * 10.0
            mu = prox._mu_from_eigenvalues(lam, rho)
            lower = (-np.abs(lam) + np.sqrt(lam * lam + 4.0 * rho)) / (2.0 * rho)
            assert (mu >= lower - 1e-15).all()
            assert (mu > 0.0).all()

    def test_gram_generalizes_outer_product(self):
        rng = np.random.default_rng(43)
        v = np.array([[1.0, 0.2], [0.2, 2.0]])
        y = rng.normal(size=2)
        a = prox.prox_neg_logdet(v, y, 0.7)
        b = prox.prox_neg_logdet_gram(v, np.outer(y, y), 0.7)
        assert np.array_equal(a, b)

    def test_gram_stationarity(self):
        rng = np.random.default_rng(44)
        for _ in range(30):
            n = int(rng.integers(1, 5))
            v = rng.normal(size=(n, n))
            v = 0.5 * (v + v.T)
            ys = rng.normal(size=(4, n))
            gram = (ys[:, :, None] * ys[:, None, :]).mean(axis=0)
            rho = float(rng.uniform(0.2, 3.0))
            x = prox.prox_neg_logdet_gram(v, gram, rho)
            resid = gram - np.linalg.inv(x) + rho * (x - v)
            assert np.linalg.norm(resid) <= 1e-7 * (1.0 + rho * np.linalg.norm(v))
