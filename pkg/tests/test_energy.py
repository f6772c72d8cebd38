"""Hamiltonian, second-order energy, splitting identity, truncation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulombgas import energy as en
from coulombgas import fieldgrid
from coulombgas import potential as pot
from coulombgas.errors import CoincidentPointsError, UnderResolvedError, ValidationError
from coulombgas.grids import Grid, Window
from coulombgas.points import PointConfiguration


def cfgm(pts):
    return PointConfiguration(np.asarray(pts, dtype=float))


def cfgb(pts):
    return PointConfiguration(np.asarray(pts, dtype=float), frame="blown_up")


class TestHamiltonian:
    def test_unit_separation(self, quad):
        assert en.hamiltonian(cfgm([[0, 0], [1, 0]]), quad) == pytest.approx(2.0)

    def test_half_separation(self, quad):
        value = en.hamiltonian(cfgm([[0, 0], [0.5, 0]]), quad)
        assert value == pytest.approx(2.0 * np.log(2.0) + 0.5, abs=1e-12)

    def test_single_point_at_origin(self, quad):
        assert en.hamiltonian(cfgm([[0, 0]]), quad) == 0.0

    def test_coincident_points_raise(self, quad):
        with pytest.raises(CoincidentPointsError):
            en.hamiltonian(cfgm([[0.3, 0.3], [0.3, 0.3]]), quad)

    def test_permutation_invariance(self, quad):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(7, 2))
        h1 = en.hamiltonian(cfgm(pts), quad)
        h2 = en.hamiltonian(cfgm(pts[::-1]), quad)
        assert h1 == pytest.approx(h2, rel=1e-12)


class TestSecondOrderEnergy:
    def test_single_point_structure(self, eq_fast):
        mu1 = pot.blowup_density(eq_fast, 1)
        p = np.array([[0.2, -0.1]])
        w = en.w_n_pairwise(cfgb(p), mu1)
        expected = -2.0 * mu1.log_potential_at(p)[0] + mu1.log_self_energy()
        assert w == pytest.approx(expected, abs=1e-12)

    def test_translation_covariance(self, eq_fast):
        # translating points and measure together leaves w unchanged
        n = 8
        mu_p = pot.blowup_density(eq_fast, n)
        rng = np.random.default_rng(3)
        pts = eq_fast.sample(rng, n) * np.sqrt(n)
        shift = np.array([0.37, -1.21])
        w0 = en.w_n_pairwise(cfgb(pts), mu_p)
        shifted = pot.EquilibriumMeasure(
            grid=Grid((mu_p.grid.origin[0] + shift[0],
                       mu_p.grid.origin[1] + shift[1]),
                      mu_p.grid.spacing, mu_p.grid.nx, mu_p.grid.ny),
            density=mu_p.density,
            support_mask=mu_p.support_mask,
            total_mass=mu_p.total_mass,
        )
        w1 = en.w_n_pairwise(cfgb(pts + shift), shifted)
        assert w1 == pytest.approx(w0, rel=1e-9, abs=1e-9)

    def test_requires_blownup_frame(self, eq_fast):
        with pytest.raises(ValidationError):
            en.w_n_pairwise(cfgm([[0, 0]]), pot.blowup_density(eq_fast, 1))


class TestSplitting:
    def test_residual_small_for_random_configs(self, quad, eq_fast):
        rng = np.random.default_rng(11)
        for n in (2, 8, 32):
            for _ in range(3):
                config = PointConfiguration(eq_fast.sample(rng, n))
                report = en.splitting_check(config, quad, eq_fast)
                denom = max(abs(report.hamiltonian), 1.0)
                assert abs(report.splitting_residual) / denom < 2e-4

    def test_single_point_case(self, quad, eq_fast):
        report = en.splitting_check(cfgm([[0.1, 0.3]]), quad, eq_fast)
        # residual reduces to the quadrature/EL defect of I and zeta alone
        assert abs(report.splitting_residual) < 1e-3

    def test_permutation_invariant_residual(self, quad, eq_fast):
        rng = np.random.default_rng(12)
        pts = eq_fast.sample(rng, 6)
        r1 = en.splitting_check(cfgm(pts), quad, eq_fast).splitting_residual
        r2 = en.splitting_check(cfgm(pts[::-1]), quad, eq_fast).splitting_residual
        assert r1 == pytest.approx(r2, abs=1e-9)

    def test_i_mu_value(self, quad, eq_fast):
        report = en.splitting_check(cfgm([[0.0, 0.1]]), quad, eq_fast)
        # I(mu_eq) = 3/4 for the quadratic potential
        assert report.i_mu == pytest.approx(0.75, abs=2e-4)

    def test_report_json(self, quad, eq_fast):
        report = en.splitting_check(cfgm([[0.0, 0.1], [0.4, -0.2]]), quad, eq_fast)
        import json

        payload = json.loads(report.to_json(beta=2.0, eta_list=[0.1]))
        for key in ("n", "hamiltonian", "w_n", "zeta_sum", "i_mu",
                    "splitting_residual", "metadata"):
            assert key in payload
        assert payload["metadata"]["beta"] == 2.0


class TestTruncationKernel:
    def test_boundary_and_interior_values(self):
        assert en.truncation_kernel(0.1, [[0.1, 0.0]]) == pytest.approx(0.0)
        assert en.truncation_kernel(0.1, [[0.05, 0.0]]) == pytest.approx(np.log(2.0))
        assert en.truncation_kernel(0.1, [[0.5, 0.0]]) == 0.0

    def test_origin_is_infinite(self):
        assert en.truncation_kernel(0.1, [[0.0, 0.0]]) == np.inf

    @given(st.floats(0.01, 0.99), st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=200, deadline=None)
    def test_kernel_properties(self, eta, x, y):
        r = np.hypot(x, y)
        value = en.truncation_kernel(eta, [[x, y]])
        if r >= eta:
            assert value == 0.0
        elif r > 0:
            assert value == pytest.approx(np.log(eta / r))
            assert value >= 0.0

    @given(st.floats(0.01, 0.99), st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=100, deadline=None)
    def test_gradient_support(self, eta, x, y):
        r = np.hypot(x, y)
        g = en.truncation_gradient(eta, [[x, y]])[0]
        if r >= eta:
            assert np.all(g == 0.0)
        elif r > 1e-6:
            expected = -np.array([x, y]) / (r * r)
            assert np.allclose(g, expected)

    def test_param_validation(self):
        with pytest.raises(ValidationError):
            en.TruncationParam(1.0)
        with pytest.raises(ValidationError):
            en.TruncationParam(0.0)


class TestRenormalizedEnergy:
    def test_empty_window_zero_background(self):
        value = en.renormalized_energy(
            cfgb(np.empty((0, 2))), None, Window((0, 0), 1.0), 0.1
        )
        assert value == 0.0

    def test_under_resolved_eta_raises(self, eq_fast):
        mu1 = pot.blowup_density(eq_fast, 1)
        with pytest.raises(UnderResolvedError):
            en.renormalized_energy(cfgb([[0.0, 0.0]]), mu1, Window((0, 0), 1.0),
                                   0.05, grid_spacing=0.05)

    def test_agrees_with_pairwise(self, eq_fast):
        n = 16
        mu_p = pot.blowup_density(eq_fast, n)
        rng = np.random.default_rng(4)
        config = cfgb(eq_fast.sample(rng, n) * np.sqrt(n))
        w = en.w_n_pairwise(config, mu_p)
        window = Window((0.0, 0.0), 7.0)
        value = en.renormalized_energy(config, mu_p, window, 0.01)
        value += en.exterior_field_energy(config, mu_p, window)
        assert value / (2.0 * np.pi) == pytest.approx(w, rel=0.02)


@pytest.fixture(scope="module")
def minimality_setup(eq_fast):
    n = 16
    mu_p = pot.blowup_density(eq_fast, n)
    rng = np.random.default_rng(5)
    config = cfgb(eq_fast.sample(rng, n) * np.sqrt(n))
    grid = Grid.square((0.0, 0.0), 6.0, 0.05)
    X, Y = grid.centers()
    psi = np.exp(-((X - 0.4) ** 2 + (Y + 0.2) ** 2) / 0.5)
    psi[:2, :] = psi[-2:, :] = 0.0
    psi[:, :2] = psi[:, -2:] = 0.0
    return config, mu_p, grid, psi


class TestMinimality:

    def test_zero_stream_equal(self, minimality_setup):
        config, mu_p, grid, _ = minimality_setup
        zero = fieldgrid.ScalarGrid(grid, np.zeros(grid.shape))
        local, perturbed = en.minimality_probe(config, mu_p, zero, 0.15)
        assert local == perturbed

    def test_perturbation_never_wins(self, minimality_setup):
        config, mu_p, grid, psi = minimality_setup
        rng = np.random.default_rng(6)
        for _ in range(10):
            amp = rng.uniform(0.2, 3.0)
            stream = fieldgrid.ScalarGrid(grid, amp * psi)
            local, perturbed = en.minimality_probe(config, mu_p, stream, 0.15)
            assert perturbed >= local - 1e-8 * abs(local)

    def test_quadratic_growth(self, minimality_setup):
        config, mu_p, grid, psi = minimality_setup
        ts = np.array([0.05, 0.15, 0.5, 1.5])
        zero = fieldgrid.ScalarGrid(grid, np.zeros(grid.shape))
        local, _ = en.minimality_probe(config, mu_p, zero, 0.15)
        gaps = []
        for t in ts:
            _, perturbed = en.minimality_probe(
                config, mu_p, fieldgrid.ScalarGrid(grid, t * psi), 0.15
            )
            gaps.append(perturbed - local)
        slope = np.polyfit(np.log(ts), np.log(gaps), 1)[0]
        assert abs(slope - 2.0) < 0.1

    def test_support_on_border_rejected(self, minimality_setup):
        config, mu_p, grid, psi = minimality_setup
        bad = np.ones(grid.shape)
        with pytest.raises(ValidationError):
            en.minimality_probe(config, mu_p, fieldgrid.ScalarGrid(grid, bad), 0.15)
