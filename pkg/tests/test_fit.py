import numpy as np
import pytest

from fairirt import kernels
from fairirt.errors import FitError, InputError
from fairirt.fit import (
    FitConfig,
    fit_beta_irt,
    from_surrogates,
    negative_loss,
    predicted_matrix,
    surrogate_gradient,
    to_surrogates,
)
from fairirt.irt import FitParameters, ResponseMatrix, beta_log_density, beta_shapes
from fairirt.simulate import SimulationSpec, simulate

SHORT = FitConfig(epochs=200)


@pytest.fixture(scope="module")
def small_problem():
    return simulate(SimulationSpec(n_models=8, n_individuals=12, seed=3))


class TestConfig:
    @pytest.mark.parametrize("kw", [{"epochs": 0}, {"learning_rate": 0.0}, {"init_jitter": -1.0},
                                    {"convergence_window": 0}, {"epochs": 2.5}])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(InputError):
            FitConfig(**kw)


class TestLoss:
    def test_uniform_cells_give_zero(self):
        m = ResponseMatrix.from_values(np.full((2, 3), 0.7))
        p = FitParameters.from_arrays([0.4, 0.4], [0.4, 0.4, 0.4], [1.0, -2.0, 0.3])
        assert negative_loss(m, p) == 0.0

    def test_mean_of_cell_log_densities(self):
        rng = np.random.default_rng(0)
        m = ResponseMatrix.from_values(rng.uniform(0.05, 0.95, (3, 4)))
        p = FitParameters.from_arrays(rng.uniform(0.1, 0.9, 3), rng.uniform(0.1, 0.9, 4), rng.uniform(-2, 2, 4))
        cells = [beta_log_density(m.values[i, j], beta_shapes(p.abilities[i], p.item(j)))
                 for i in range(3) for j in range(4)]
        assert negative_loss(m, p) == pytest.approx(-np.mean(cells), rel=1e-12)

    def test_dimension_mismatch(self):
        m = ResponseMatrix.from_values(np.full((2, 3), 0.7))
        p = FitParameters.from_arrays([0.4, 0.4], [0.4, 0.4], [1.0, 1.0])
        with pytest.raises(InputError):
            negative_loss(m, p)


class TestPredictedMatrix:
    def test_midpoint_and_identity(self):
        p = FitParameters.from_arrays([0.3, 0.8], [0.3, 0.5], [1.0, 1.0], rasch_constrained=True)
        pm = predicted_matrix(p, 2, 2)
        assert pm[0, 0] == pytest.approx(0.5)
        np.testing.assert_allclose(pm[:, 1], [0.3, 0.8], rtol=1e-14)

    def test_matches_shape_ratio(self):
        rng = np.random.default_rng(1)
        p = FitParameters.from_arrays(rng.uniform(0.05, 0.95, 5), rng.uniform(0.05, 0.95, 6), rng.uniform(-3, 3, 6))
        pm = predicted_matrix(p)
        for i in range(5):
            for j in range(6):
                s = beta_shapes(p.abilities[i], p.item(j))
                assert pm[i, j] == pytest.approx(s.alpha / (s.alpha + s.beta), abs=1e-12)

    def test_dimension_check(self):
        p = FitParameters.from_arrays([0.3, 0.8], [0.3], [1.0])
        with pytest.raises(InputError):
            predicted_matrix(p, 3, 1)


class TestSurrogates:
    def test_round_trip(self):
        p = FitParameters.from_arrays([0.2, 0.7], [0.1, 0.6, 0.9], [1.0, -0.4, 2.0])
        q = from_surrogates(*to_surrogates(p))
        np.testing.assert_allclose(q.abilities, p.abilities, rtol=1e-14)
        np.testing.assert_allclose(q.difficulties, p.difficulties, rtol=1e-14)
        np.testing.assert_array_equal(q.discriminations, p.discriminations)

    def test_saturated_surrogate_is_a_fit_error(self):
        with pytest.raises(FitError):
            from_surrogates(np.array([800.0, 0.0]), np.zeros(2), np.ones(2))

    def test_gradient_wrapper_matches_kernel(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(0.1, 0.9, (3, 4))
        u, v, a = rng.normal(size=3), rng.normal(size=4), rng.normal(size=4)
        loss, gu, gv, ga = surrogate_gradient(x, u, v, a)
        assert loss == pytest.approx(kernels.loss_only(x, u, v, a))
        assert gu.shape == (3,) and gv.shape == (4,) and ga.shape == (4,)


class TestFit:
    def test_constant_half_matrix(self):
        m = ResponseMatrix.from_values(np.full((2, 2), 0.5))
        rep = fit_beta_irt(m, FitConfig(epochs=500))
        assert np.all(np.abs(predicted_matrix(rep.parameters) - 0.5) < 0.05)

    def test_rasch_pins_discrimination(self, small_problem):
        _, m = small_problem
        rep = fit_beta_irt(m, FitConfig(epochs=100, rasch=True))
        assert rep.parameters.rasch_constrained
        assert np.all(rep.parameters.discriminations == 1.0)

    def test_deterministic(self, small_problem):
        _, m = small_problem
        r1 = fit_beta_irt(m, SHORT)
        r2 = fit_beta_irt(m, SHORT)
        assert r1.final_loss == r2.final_loss
        np.testing.assert_array_equal(r1.loss_trace, r2.loss_trace)
        for attr in ("abilities", "difficulties", "discriminations"):
            np.testing.assert_array_equal(getattr(r1.parameters, attr), getattr(r2.parameters, attr))

    def test_seed_changes_initialisation(self, small_problem):
        _, m = small_problem
        r1 = fit_beta_irt(m, FitConfig(epochs=5, seed=0))
        r2 = fit_beta_irt(m, FitConfig(epochs=5, seed=1))
        assert r1.loss_trace[0] != r2.loss_trace[0]

    def test_report_bookkeeping(self, small_problem):
        _, m = small_problem
        rep = fit_beta_irt(m, SHORT)
        assert len(rep.loss_trace) == rep.epochs_run == 200
        assert rep.clamp_count == m.clamp_count
        assert rep.model_ids == m.model_ids
        assert (rep.parameters.n_models, rep.parameters.n_individuals) == m.shape
        assert np.all(np.isfinite(rep.loss_trace))

    def test_loss_decreases_after_transient(self, small_problem):
        _, m = small_problem
        rep = fit_beta_irt(m, FitConfig(epochs=600))
        assert np.all(np.diff(rep.loss_trace[10:]) <= 1e-12)
        assert rep.final_loss < rep.loss_trace[0]

    def test_convergence_flag(self, small_problem):
        _, m = small_problem
        rep = fit_beta_irt(m, FitConfig(epochs=5000, convergence_tol=1e-2))
        assert rep.converged and rep.epochs_run < 5000
        assert rep.loss_trace[-1 - rep.config.convergence_window] - rep.loss_trace[-1] < 1e-2

    def test_orientation_follows_row_means(self, small_problem):
        _, m = small_problem
        rep = fit_beta_irt(m, FitConfig(epochs=300))
        th = rep.parameters.abilities
        rm = m.values.mean(axis=1)
        assert np.dot(th - th.mean(), rm - rm.mean()) >= 0.0

    def test_orientation_on_mirrored_data(self, small_problem):
        _, m = small_problem
        mirrored = ResponseMatrix.from_values(1.0 - m.values)
        rep = fit_beta_irt(mirrored, FitConfig(epochs=300))
        th = rep.parameters.abilities
        rm = mirrored.values.mean(axis=1)
        assert np.dot(th - th.mean(), rm - rm.mean()) >= 0.0

    def test_divergence_names_epoch_and_cell(self):
        m = ResponseMatrix.from_values([[1e-6, 1 - 1e-6], [1 - 1e-6, 1e-6]])
        with pytest.raises(FitError, match="epoch"):
            fit_beta_irt(m, FitConfig(epochs=3000, learning_rate=1e6))
