import numpy as np
import pytest

from fods_ident import BasisSpec, ExperimentBatch, NoiseSpec, assemble_blocks, estimate_from_repeated, \
    generate_batch, generate_repeated, identify_known, identify_unknown, logistic_cosexp
from fods_ident.errors import DesignError
from fods_ident.experiment import design_matrix, sample_inits
from fods_ident.identify import solve_least_squares
from fods_ident.simulate import zero_dynamics

F2, G7 = BasisSpec("trig", 2), BasisSpec("cheb_gap", 7)


def planted_batch(d, p=100, seed=0, H=2, L=7):
    """Noiseless data generated exactly by the basis model."""
    r = np.random.default_rng(seed)
    x0, u0 = sample_inits(r, p, d)
    alpha = r.uniform(0.2, 1.0, d)
    gamma, beta = r.normal(size=d * H), r.normal(size=d * L)
    shell = ExperimentBatch(x0, u0, np.zeros_like(x0))
    blk = assemble_blocks(shell, BasisSpec("trig", H), BasisSpec("cheb_gap", L))
    X = blk.pi @ gamma + blk.phi @ beta + blk.omega @ alpha
    return ExperimentBatch(x0, u0, X.reshape(p, d)), gamma, beta, alpha


class TestKnown:
    def test_exact_recovery(self):
        dyn = logistic_cosexp()
        x0, u0 = sample_inits(np.random.default_rng(3), 5)
        res = identify_known(generate_batch(dyn, 0.8, (x0, u0)), dyn)
        assert res.alpha_hat[0] == pytest.approx(0.8, abs=1e-10)

    def test_scalar_hand_solution(self):
        b = ExperimentBatch(np.array([[2.0]]), np.array([[0.0]]), np.array([[1.7]]))
        assert identify_known(b, zero_dynamics()).alpha_hat[0] == pytest.approx(0.85, abs=1e-15)

    def test_noisy_band(self):
        dyn = logistic_cosexp()
        est = []
        for s in range(100):
            x0, u0 = sample_inits(np.random.default_rng([s, 0]), 100)
            b = generate_batch(dyn, 0.8, (x0, u0), NoiseSpec.isotropic(0.05, 1, s))
            est.append(identify_known(b, dyn).alpha_hat[0])
        assert abs(np.mean(est) - 0.8) < 0.01

    def test_unbiased(self):
        dyn = logistic_cosexp(d=2)
        x0, u0 = sample_inits(np.random.default_rng(77), 30, 2)
        alpha = np.array([0.45, 0.85])
        err = np.array([
            identify_known(generate_batch(dyn, alpha, (x0, u0), NoiseSpec.isotropic(0.05, 2, s)), dyn).alpha_hat - alpha
            for s in range(600)
        ])
        se = err.std(axis=0, ddof=1) / np.sqrt(len(err))
        assert np.all(np.abs(err.mean(axis=0)) < 4 * se)

    def test_rank_deficient_names_coordinate(self):
        b = ExperimentBatch(np.array([[1.0, 0.0], [2.0, 0.0]]), np.zeros((2, 1)), np.ones((2, 2)))
        with pytest.raises(DesignError, match=r"\[2\]"):
            identify_known(b, zero_dynamics(d=2))

    def test_residual_invariants(self):
        dyn = logistic_cosexp()
        x0, u0 = sample_inits(np.random.default_rng(5), 50)
        b = generate_batch(dyn, 0.6, (x0, u0), NoiseSpec.isotropic(0.05, 1, 5))
        res = identify_known(b, dyn)
        C = design_matrix(b.x0)
        y = (b.x1 - np.array([dyn.drift(x, u) for x, u in zip(b.x0, b.u0)])).ravel()
        r = y - C @ res.alpha_hat
        assert np.linalg.norm(r) == pytest.approx(res.residual_norm, abs=1e-10)
        assert np.linalg.norm(C.T @ r) <= 1e-8 * np.linalg.norm(C.T @ y)


class TestUnknown:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_planted_recovery(self, d):
        b, gamma, beta, alpha = planted_batch(d)
        res = identify_unknown(b, F2, G7, ridge=0.0)
        np.testing.assert_allclose(res.alpha_hat, alpha, atol=1e-8)
        np.testing.assert_allclose(res.gamma_hat, gamma, atol=1e-8)
        np.testing.assert_allclose(res.beta_hat, beta, atol=1e-8)

    def test_normal_equations_and_residual(self):
        b, *_ = planted_batch(1, seed=4)
        noisy = ExperimentBatch(b.x0, b.u0, b.x1 + 0.05 * np.random.default_rng(1).normal(size=b.x1.shape))
        res = identify_unknown(noisy, F2, G7, ridge=0.0)
        xi = assemble_blocks(noisy, F2, G7).xi
        X = noisy.x1.ravel()
        r = X - xi @ res.theta
        assert np.linalg.norm(r) == pytest.approx(res.residual_norm, abs=1e-10)
        assert np.linalg.norm(xi.T @ r) <= 1e-8 * np.linalg.norm(xi.T @ X)

    def test_ridge_limit(self):
        b, *_ = planted_batch(1, seed=2)
        res = identify_unknown(b, F2, G7, ridge=1e14)
        assert np.abs(res.theta).max() < 1e-6
        assert res.residual_norm == pytest.approx(np.linalg.norm(b.x1), rel=1e-6)

    def test_ridge_residual_monotone(self):
        dyn = logistic_cosexp()
        x0, u0 = sample_inits(np.random.default_rng(8), 100)
        b = generate_batch(dyn, 0.8, (x0, u0), NoiseSpec.isotropic(0.05, 1, 8))
        res = [identify_unknown(b, F2, G7, ridge=lam).residual_norm
               for lam in [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 100.0]]
        assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(res, res[1:]))

    def test_ridge_can_exempt_order(self):
        b, *_ = planted_batch(1, seed=3)
        free = identify_unknown(b, F2, G7, ridge=1e6, penalize_alpha=False)
        full = identify_unknown(b, F2, G7, ridge=1e6)
        assert abs(full.alpha_hat[0]) < abs(free.alpha_hat[0])

    def test_misfit_bias_does_not_depend_on_order(self):
        # with the order column unpenalised, changing alpha shifts the data by alpha * x0,
        # which lies in the design span: the estimate moves by exactly that amount
        dyn = logistic_cosexp()
        x0, u0 = sample_inits(np.random.default_rng(12), 100)
        bias = []
        for a in (0.4, 0.6, 0.8):
            b = generate_batch(dyn, a, (x0, u0), NoiseSpec.isotropic(0.05, 1, 12))
            bias.append(identify_unknown(b, F2, G7, ridge=1e-6, penalize_alpha=False).alpha_hat[0] - a)
        assert np.ptp(bias) < 1e-9

    def test_singular_design_is_an_error(self):
        x = np.linspace(0.1, 0.9, 20).reshape(-1, 1)
        b = ExperimentBatch(x, np.ones((20, 1)), x * 0.5)
        with pytest.raises(DesignError):
            identify_unknown(b, F2, BasisSpec("chebyshev", 3), ridge=0.0)


class TestRepeatedEstimate:
    def test_single_sample_equals_known(self):
        x0 = np.array([[0.3, 0.6], [0.8, 0.1], [0.5, 0.9]])
        obs = generate_repeated([0.4, 0.7], x0, 1, NoiseSpec.isotropic(0.05, 2, 4))
        batch = ExperimentBatch(x0, np.zeros((3, 1)), obs.samples[0].reshape(3, 2))
        np.testing.assert_array_equal(estimate_from_repeated(obs).alpha_hat,
                                      identify_known(batch, zero_dynamics(d=2)).alpha_hat)

    def test_noiseless_exact(self):
        obs = generate_repeated([0.4, 0.7], [[0.3, 0.6], [0.8, 0.1]], 17, None)
        np.testing.assert_allclose(estimate_from_repeated(obs).alpha_hat, [0.4, 0.7], atol=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_stacked_solve(self, seed):
        r = np.random.default_rng(seed)
        d, p, N = r.integers(1, 4), r.integers(1, 5), r.integers(1, 30)
        x0 = r.uniform(0.1, 1.0, (p, d))
        obs = generate_repeated(r.uniform(0.1, 1, d), x0, N, NoiseSpec.isotropic(0.1, d, seed))
        stacked = np.linalg.lstsq(np.tile(obs.design, (N, 1)), obs.samples.ravel(), rcond=None)[0]
        np.testing.assert_allclose(estimate_from_repeated(obs).alpha_hat, stacked, atol=1e-12)

    def test_error_covariance_closed_form(self):
        x0 = np.array([[0.3, 0.6, 0.9], [0.8, 0.1, 0.4], [0.5, 0.9, 0.2], [0.2, 0.4, 0.7]])
        K = np.diag(np.linspace(0.002, 0.02, 12))
        N, beta = 5, np.array([0.3, 0.6, 0.9])
        errs = np.array([estimate_from_repeated(generate_repeated(beta, x0, N, NoiseSpec(K, s))).alpha_hat - beta
                         for s in range(10_000)])
        C = design_matrix(x0)
        P = np.linalg.solve(C.T @ C, C.T)
        ref = P @ K @ P.T / N
        emp = np.cov(errs.T, bias=True)
        scale = np.sqrt(np.outer(np.diag(ref), np.diag(ref)))
        np.testing.assert_allclose(np.diag(emp), np.diag(ref), rtol=0.10)
        assert np.all(np.abs(emp - ref) <= 0.10 * scale)


def test_solver_rejects_underdetermined():
    with pytest.raises(DesignError):
        solve_least_squares(np.ones((1, 2)), np.ones(1))


def test_result_json_keys():
    b, *_ = planted_batch(1)
    js = identify_unknown(b, F2, G7).to_json()
    assert set(js) == {"alpha_hat", "gamma_hat", "beta_hat", "residual_norm", "condition", "lambda"}
    assert js["lambda"] == 1e-6
