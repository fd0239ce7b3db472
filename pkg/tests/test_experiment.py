import json

import numpy as np
import pytest

from fods_ident import ExperimentBatch, NoiseSpec, RepeatedObservations, gl_coefficients, generate_batch, \
    generate_repeated, identify_known, logistic_cosexp, step
from fods_ident.errors import DesignError
from fods_ident.experiment import design_matrix, sample_inits
from fods_ident.simulate import zero_dynamics


def test_noiseless_zero_dynamics():
    b = generate_batch(zero_dynamics(), 0.8, [([1.0], [0.0])], NoiseSpec([0.0]))
    assert b.x1[0, 0] == pytest.approx(0.8, abs=1e-15)


def test_one_step_matches_simulator_step():
    dyn = logistic_cosexp(1.0, -1.0, 4.0, 0.7)
    rng = np.random.default_rng(4)
    x0, u0 = sample_inits(rng, 20)
    b = generate_batch(dyn, 0.6, (x0, u0))
    c = gl_coefficients(0.6, 1)
    for i in range(20):
        assert b.x1[i].tobytes() == step(dyn, c, x0[i:i + 1], u0[i]).tobytes()


def test_same_seed_same_batch():
    dyn = logistic_cosexp()
    x0, u0 = sample_inits(np.random.default_rng(0), 50)
    a = generate_batch(dyn, 0.4, (x0, u0), NoiseSpec.isotropic(0.05, 1, 11))
    b = generate_batch(dyn, 0.4, (x0, u0), NoiseSpec.isotropic(0.05, 1, 11))
    assert a.x1.tobytes() == b.x1.tobytes()


def test_record_noise_independent_of_batch_size():
    # record i draws from stream (seed, i): prefixes of a batch are stable
    dyn = logistic_cosexp()
    x0, u0 = sample_inits(np.random.default_rng(0), 30)
    noise = NoiseSpec.isotropic(0.05, 1, 2)
    full = generate_batch(dyn, 0.7, (x0, u0), noise)
    part = generate_batch(dyn, 0.7, (x0[:10], u0[:10]), noise)
    np.testing.assert_array_equal(full.x1[:10], part.x1)


@pytest.mark.parametrize("alpha", [[0.8], [0.3, 0.9], [0.5, 0.6, 1.0]])
def test_round_trip_recovers_alpha(alpha):
    d = len(alpha)
    x0, u0 = sample_inits(np.random.default_rng(d), 40, d)
    dyn = logistic_cosexp(d=d)
    b = generate_batch(dyn, alpha, (x0, u0))
    np.testing.assert_allclose(identify_known(b, dyn).alpha_hat, alpha, atol=1e-10)


def test_batch_csv_round_trip(tmp_path):
    dyn = logistic_cosexp(d=2)
    x0, u0 = sample_inits(np.random.default_rng(9), 7, 2)
    b = generate_batch(dyn, [0.4, 0.8], (x0, u0), NoiseSpec.isotropic(0.05, 2, 5))
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "b.csv").read_text().splitlines()[0] == "i,x0_1,x0_2,u0_1,x1_1,x1_2"
    meta = json.loads((tmp_path / "b.meta.json").read_text())
    assert meta == {"seed": 5, "sigma": 0.05, "d": 2, "m": 1, "p": 7}
    back = ExperimentBatch.from_csv(tmp_path / "b.csv")
    for name in ("x0", "u0", "x1"):
        assert getattr(back, name).tobytes() == getattr(b, name).tobytes()


class TestRepeated:
    def test_noiseless(self):
        obs = generate_repeated(0.8, [[1.0]], 3, NoiseSpec([0.0]))
        np.testing.assert_allclose(obs.samples.ravel(), [0.8, 0.8, 0.8], atol=1e-15)

    def test_rank_check(self):
        with pytest.raises(DesignError, match=r"coordinate\(s\) \[2\]"):
            generate_repeated([0.5, 0.5], [[1.0, 0.0]], 5, None)

    def test_design_matrix(self):
        np.testing.assert_array_equal(design_matrix([[1.0, 2.0], [3.0, 4.0]]),
                                      [[1, 0], [0, 2], [3, 0], [0, 4]])

    def test_sample_mean_clt(self):
        sigma, N = 0.1, 100_000
        x0 = [[0.3, 0.7], [0.9, 0.2], [0.5, 0.5]]
        obs = generate_repeated([0.4, 0.8], x0, N, NoiseSpec.isotropic(sigma, 2, 21))
        dev = np.abs(obs.mean() - design_matrix(x0) @ [0.4, 0.8])
        assert dev.max() < 4 * sigma / np.sqrt(N)

    def test_empirical_covariance(self):
        N = 100_000
        K = np.diag([0.01, 0.04, 0.02, 0.005])
        x0 = [[0.3, 0.7], [0.9, 0.2]]
        obs = generate_repeated([0.4, 0.8], x0, N, NoiseSpec(K, 8))
        resid = obs.samples - design_matrix(x0) @ [0.4, 0.8]
        emp = resid.T @ resid / N
        assert np.linalg.norm(emp - K) < 5 * np.sqrt(2 / N) * np.linalg.norm(K)

    def test_csv_round_trip(self, tmp_path):
        obs = generate_repeated([0.6], [[0.2], [0.8]], 4, NoiseSpec.isotropic(0.05, 1, 1))
        obs.to_csv(tmp_path / "y.csv")
        back = RepeatedObservations.from_csv(tmp_path / "y.csv")
        assert back.samples.tobytes() == obs.samples.tobytes()
        assert back.design.tobytes() == obs.design.tobytes()
