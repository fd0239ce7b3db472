import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fods_ident import BoundInputs, chi2_tail_bound, error_covariance, exact_expected_error, \
    expectation_bound, laurent_massart_tail_bound, subexp_tail_bound
from fods_ident.bounds import bound_table, parse_grid
from fods_ident.errors import DesignError


def random_inputs(r, d_max=5, p_max=10):
    d = int(r.integers(1, d_max + 1))
    p = int(r.integers(1, p_max + 1))
    C = r.normal(size=(d * p, d))
    K = r.uniform(0.001, 0.1, d * p)
    return BoundInputs(C, K, int(r.integers(1, 1000)))


def mc_errors(C, K, N, trials, seed):
    """Estimator errors simulated without the library estimator: stacked draws + lstsq."""
    r = np.random.default_rng(seed)
    P = np.linalg.pinv(C)
    out = np.empty((trials, C.shape[1]))
    for lo in range(0, trials, 5000):
        n = min(5000, trials - lo)
        w = r.standard_normal((n, N, C.shape[0])) * np.sqrt(K)
        out[lo:lo + n] = w.mean(axis=1) @ P.T
    return out


class TestExpectation:
    def test_scalar(self):
        assert expectation_bound(BoundInputs([[1.0]], [0.01], 100)) == pytest.approx(1e-4, rel=1e-14)

    @pytest.mark.parametrize("d,N", [(1, 7), (3, 50), (5, 1000)])
    def test_identity_design_is_tight(self, d, N):
        inp = BoundInputs(np.eye(d), np.full(d, 0.04), N)
        assert expectation_bound(inp) == pytest.approx(d * 0.04 / N, rel=1e-12)
        assert exact_expected_error(inp) == pytest.approx(d * 0.04 / N, rel=1e-12)

    def test_general_eigensolver_oracle(self):
        r = np.random.default_rng(2)
        C = r.normal(size=(6, 2))
        K = r.uniform(0.01, 0.2, 6)
        ev = np.sort(np.linalg.eigvals(C.T @ C).real)
        ref = 2 / 40 * ev[-1] * K.max() / ev[0] ** 2
        assert expectation_bound(BoundInputs(C, K, 40)) == pytest.approx(ref, rel=1e-10)

    def test_exact_below_bound(self):
        r = np.random.default_rng(0)
        for _ in range(1000):
            inp = random_inputs(r)
            assert exact_expected_error(inp) <= expectation_bound(inp) * (1 + 1e-12)

    def test_exact_matches_monte_carlo(self):
        C = np.array([[0.9, 0], [0, 0.2], [0.4, 0], [0, 0.7], [0.1, 0], [0, 0.3]])
        K = np.array([0.02, 0.01, 0.05, 0.03, 0.01, 0.04])
        err = mc_errors(C, K, 4, 100_000, 3)
        emp = np.mean(np.sum(err**2, axis=1))
        assert emp == pytest.approx(exact_expected_error(BoundInputs(C, K, 4)), rel=0.02)

    def test_singular_design(self):
        with pytest.raises(DesignError):
            BoundInputs([[1.0, 0.0], [2.0, 0.0]], [0.1, 0.1], 10)


class TestSigma:
    def test_symmetric_psd(self):
        r = np.random.default_rng(5)
        for _ in range(50):
            s = error_covariance(random_inputs(r))
            assert np.abs(s.matrix - s.matrix.T).max() <= 1e-12 * max(np.abs(s.matrix).max(), 1e-300)
            assert s.eigenvalues.min() >= -1e-12
            assert s.lambda_max == pytest.approx(s.eigenvalues[-1])

    def test_whitening(self):
        C = np.array([[0.9, 0], [0, 0.2], [0.4, 0], [0, 0.7], [0.1, 0.5], [0.3, 0.3]])
        K = np.array([0.02, 0.01, 0.05, 0.03, 0.01, 0.04])
        sig = error_covariance(BoundInputs(C, K, 3)).matrix
        vals, vecs = np.linalg.eigh(sig)
        inv_sqrt = vecs @ np.diag(vals**-0.5) @ vecs.T
        v = mc_errors(C, K, 3, 100_000, 9) @ inv_sqrt.T
        emp = v.T @ v / len(v)
        assert np.linalg.norm(emp - np.eye(2)) < 0.05 * np.linalg.norm(np.eye(2))


@settings(max_examples=200, deadline=None)
@given(d=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_trace_inequality(d, seed):
    r = np.random.default_rng(seed)
    a, b = r.normal(size=(d, d)), r.normal(size=(d, int(r.integers(1, d + 1))))
    A, B = a @ a.T, b @ b.T
    tr = np.trace(A @ B)
    assert tr >= -1e-10
    assert tr <= np.trace(A) * np.linalg.eigvalsh(B)[-1] * (1 + 1e-10) + 1e-10


class TestChi2:
    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_at_lambda_d(self, d):
        p = chi2_tail_bound(0.01, d, 0.01 * d)
        assert p.valid and p.probability == pytest.approx(math.exp(-d), rel=1e-12)

    def test_hand_value(self):
        assert chi2_tail_bound(0.01, 1, 0.02).probability == pytest.approx(math.exp(-(2 + math.sqrt(3)) / 2), rel=1e-12)

    def test_decreasing_to_zero(self):
        ps = [chi2_tail_bound(0.01, 2, t).probability for t in np.geomspace(0.011, 10, 50)]
        assert all(b < a for a, b in zip(ps, ps[1:])) and ps[-1] < 1e-100

    def test_outside_region(self):
        assert chi2_tail_bound(0.01, 2, 0.01) == (1.0, False)
        with pytest.raises(ValueError):
            chi2_tail_bound(0.01, 2, 0.0)


class TestSubexp:
    @pytest.mark.parametrize("d", [1, 3, 8])
    def test_continuous_at_switch(self, d):
        lam = 0.02
        left = math.exp(-d * (2 - 1) ** 2 / 8)
        assert subexp_tail_bound(lam, d, 2 * lam * d).probability == pytest.approx(left, rel=1e-12)
        assert subexp_tail_bound(lam, d, 2 * lam * d * (1 + 1e-12)).probability == pytest.approx(math.exp(-d / 8), rel=1e-9)

    def test_boundary(self):
        assert subexp_tail_bound(0.01, 3, 0.03) == (1.0, True)
        assert subexp_tail_bound(0.01, 3, 0.029).valid is False

    def test_hand_value(self):
        assert subexp_tail_bound(0.01, 4, 0.12).probability == pytest.approx(math.exp(-1), rel=1e-12)


def test_laurent_massart_bound_holds_by_monte_carlo():
    C = np.array([[0.9], [0.4], [0.7]])
    K = np.array([0.02, 0.01, 0.05])
    inp = BoundInputs(C, K, 2)
    lam = error_covariance(inp).lambda_max
    sq = np.sum(mc_errors(C, K, 2, 100_000, 17) ** 2, axis=1)
    for t in lam * np.linspace(1, 10, 19):
        freq = np.mean(sq >= t)
        se = math.sqrt(max(freq * (1 - freq), 1e-12) / sq.size)
        assert freq <= laurent_massart_tail_bound(lam, 1, t).probability + 3 * se


def test_bound_table_and_grid():
    grid = parse_grid("0.001:0.1:20")
    assert grid.size == 20 and grid[0] == 0.001 and grid[-1] == 0.1
    tab = bound_table(BoundInputs([[1.0], [0.5]], 0.01, 10), grid)
    assert {"exact", "expectation_bound", "chi2", "subexp"} <= set(tab)
    assert len(tab["chi2"]) == 20
    with pytest.raises(ValueError):
        parse_grid("1:2")
