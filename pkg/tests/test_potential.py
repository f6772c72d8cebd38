"""Equilibrium measures and effective potentials for the reference cases."""

import numpy as np
import pytest

from coulombgas import potential as pot
from coulombgas import storage
from coulombgas.errors import ValidationError
from coulombgas.grids import Grid


def test_quadratic_gives_circular_law(eq_fast):
    X, Y = eq_fast.grid.centers()
    r = np.hypot(X, Y)
    inside = r < 0.95
    assert abs(eq_fast.density[inside].mean() - 1.0 / np.pi) < 1e-3
    assert np.abs(eq_fast.density[inside] - 1.0 / np.pi).max() < 5e-3
    assert eq_fast.density[r > 1.05].max() == 0.0
    assert abs(eq_fast.total_mass - 1.0) < 1e-8


def test_support_radius_scales_with_coefficient():
    eq2 = pot.equilibrium_measure(pot.quadratic(2.0), grid=0.02,
                                  tol=1e-4, max_iter=600)
    X, Y = eq2.grid.centers()
    r = np.hypot(X, Y)
    inside = r < 0.65
    assert abs(eq2.density[inside].mean() - 2.0 / np.pi) < 2e-3
    assert abs(r[eq2.support_mask].max() - 1.0 / np.sqrt(2.0)) < 0.02


def test_euler_lagrange_residual_across_potentials():
    # contract: converged solves report a sup-norm residual at/below 1e-4
    for potential in (pot.quadratic(), pot.quadratic(2.0), pot.quartic()):
        eq = pot.equilibrium_measure(potential, grid=0.015, tol=1e-4,
                                     max_iter=1200)
        assert eq.el_residual <= 1e-4


def test_quartic_density_profile():
    eq = pot.equilibrium_measure(pot.quartic(), grid=0.01, tol=1e-4,
                                 max_iter=1200)
    X, Y = eq.grid.centers()
    r2 = X * X + Y * Y
    inside = r2 < 0.6 ** 2
    expected = 4.0 * r2 / np.pi
    dev = np.abs(eq.density - expected)[inside]
    assert dev.max() < 5e-3
    # support radius 2^{-1/4}
    assert abs(np.sqrt(r2[eq.support_mask].max()) - 2.0 ** -0.25) < 0.02


def test_invariance_under_constant_shift(quad):
    base = pot.equilibrium_measure(quad, grid=0.04, tol=2e-4, max_iter=500)
    shifted = pot.Potential(
        evaluate=lambda p: quad.evaluate(p) + 7.5,
        gradient=quad.gradient,
        name="quadratic+const",
        bounding_box=quad.bounding_box,
    )
    other = pot.equilibrium_measure(shifted, grid=0.04, tol=2e-4, max_iter=500)
    assert np.abs(base.density - other.density).max() < 1e-10


def test_no_equilibrium_for_concave_potential():
    concave = pot.Potential(
        evaluate=lambda p: -(np.asarray(p)[..., 0] ** 2 + np.asarray(p)[..., 1] ** 2),
        gradient=lambda p: -2.0 * np.asarray(p, dtype=float),
        name="concave",
        bounding_box=1.0,
    )
    with pytest.raises(ValidationError):
        pot.equilibrium_measure(concave, grid=0.05)


def test_effective_potential_values(quad, eq_fast):
    zeta = pot.effective_potential(quad, eq_fast)
    # zero on the support: paper-level property
    region = eq_fast.interior_mask()
    assert np.abs(zeta.values[region]).max() < 1e-3
    # non-negative everywhere, exactly by construction of the level
    assert zeta.values.min() >= -1e-6
    zeta.validate()
    # closed-form value outside the support
    z = zeta.evaluate_at(np.array([[2.0, 0.0]]))[0]
    assert abs(z - (-np.log(2.0) + 2.0 - 0.5)) < 1e-3
    # strictly positive off the support
    X, Y = eq_fast.grid.centers()
    r = np.hypot(X, Y)
    off = (~eq_fast.support_mask) & (r < 2.0)
    h = eq_fast.grid.spacing
    strictly_outside = off & (r > r[eq_fast.support_mask].max() + 2 * h)
    assert zeta.values[strictly_outside].min() > 0.0


def test_blowup_density(eq_fast):
    blown = pot.blowup_density(eq_fast, 4)
    assert blown.grid.spacing == pytest.approx(2.0 * eq_fast.grid.spacing)
    assert np.array_equal(blown.density, eq_fast.density)
    assert blown.total_mass == pytest.approx(4.0, rel=1e-6)
    X, Y = blown.grid.centers()
    r = np.hypot(X, Y)
    assert abs(r[blown.support_mask].max() - 2.0) < 0.05
    # n = 1 is the identity
    same = pot.blowup_density(eq_fast, 1)
    assert same.grid == eq_fast.grid
    assert same.total_mass == pytest.approx(1.0)


def test_blowup_mass_scaling(eq_fast):
    for n in (2, 16, 100):
        blown = pot.blowup_density(eq_fast, n)
        mass = blown.density.sum() * blown.grid.cell_area
        assert abs(mass - n * eq_fast.total_mass) < 1e-6 * n


def test_mass_in_rect_is_exact_and_additive(eq_fast):
    whole = eq_fast.mass_in_rect(-2.5, 2.5, -2.5, 2.5)
    assert whole == pytest.approx(1.0, abs=1e-12)
    left = eq_fast.mass_in_rect(-2.5, 0.123, -2.5, 2.5)
    right = eq_fast.mass_in_rect(0.123, 2.5, -2.5, 2.5)
    assert left + right == pytest.approx(whole, abs=1e-10)


def test_growth_check_and_validation(quad):
    quad.validate()
    flat = pot.Potential(
        evaluate=lambda p: np.zeros(len(np.atleast_2d(p))),
        gradient=lambda p: np.zeros_like(np.atleast_2d(p)),
        name="flat",
        bounding_box=2.0,
    )
    with pytest.raises(ValidationError):
        flat.validate()


def test_measure_serialization_roundtrip(tmp_path, eq_fast):
    path = tmp_path / "eq.bin"
    storage.write_measure_binary(path, eq_fast)
    back = storage.read_measure_binary(path)
    assert back.grid == eq_fast.grid
    assert np.array_equal(back.density, eq_fast.density)
    text_path = tmp_path / "eq.csv"
    sub = pot.EquilibriumMeasure(
        grid=Grid((0.0, 0.0), 0.5, 2, 2),
        density=np.array([[1.0, 0.0], [2.0, 1.0]]),
        support_mask=np.array([[True, False], [True, True]]),
        total_mass=1.0,
    )
    storage.write_measure_csv(text_path, sub)
    lines = text_path.read_text().strip().splitlines()
    assert lines[0] == "x,y,density,in_support"
    assert len(lines) == 5
