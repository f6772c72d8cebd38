"""Acceptance suite: one test per criterion, printing a PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live.
The heavy inputs (fine equilibrium measure, Markov chains up to N = 4096)
are session fixtures shared across criteria.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from coulombgas import energy as en
from coulombgas import fieldgrid as fg
from coulombgas import potential as pot
from coulombgas import sampler as smp
from coulombgas import screening as scr
from coulombgas import stats
from coulombgas.calibrated import (
    MONOTONICITY_SLACK_C,
    SCREENING_ENERGY_C,
)
from coulombgas.grids import Grid, Window
from coulombgas.points import PointConfiguration


@contextmanager
def criterion(num, label):
    try:
        yield
    except BaseException:
        print(f"[criterion {num:2d}] FAIL: {label}")
        raise
    print(f"[criterion {num:2d}] PASS: {label}")


def blown(points, n):
    return PointConfiguration(np.asarray(points) * np.sqrt(n), frame="blown_up")


def mu_prime(eq, n):
    key = ("blowup", n)
    if key not in eq._cache:
        eq._cache[key] = pot.blowup_density(eq, n)
    return eq._cache[key]


def test_criterion_01_splitting_identity(quad, eq_fine):
    with criterion(1, "exact splitting identity, 100 configs, N in {2,8,32,64}"):
        rng = np.random.default_rng(101)
        started = time.monotonic()
        worst = 0.0
        for n in (2, 8, 32, 64):
            for _ in range(25):
                config = PointConfiguration(eq_fine.sample(rng, n))
                report = en.splitting_check(config, quad, eq_fine)
                rel = abs(report.splitting_residual) / abs(report.hamiltonian)
                worst = max(worst, rel)
                assert rel <= 1e-4, (n, rel)
        elapsed = time.monotonic() - started
        assert elapsed < 300.0
        print(f"    worst |residual|/|H| = {worst:.2e}, {elapsed:.0f}s", end="  ")


def test_criterion_02_renormalized_energy_equivalence(quad, eq_fine):
    with criterion(2, "grid-field energy matches pairwise w_N (2% at eta=1e-2, "
                      "0.5% extrapolated)"):
        n = 32
        mu_p = mu_prime(eq_fine, n)
        rng = np.random.default_rng(2024)
        window = Window((0.0, 0.0), 9.0)
        started = time.monotonic()
        worst_direct = worst_extrap = 0.0
        for _ in range(20):
            config = blown(eq_fine.sample(rng, n), n)
            w = en.w_n_pairwise(config, mu_p)
            exterior = en.exterior_field_energy(config, mu_p, window)
            profile = en.renormalized_energy_profile(
                config, mu_p, window, [0.02, 0.013, 0.01, 0.008]
            )
            direct = ((profile[0.01] + exterior) / (2 * np.pi) - w) / abs(w)
            etas = np.array([0.02, 0.013, 0.008])
            values = np.array([profile[e] + exterior for e in etas]) / (2 * np.pi)
            intercept = np.polyfit(etas, values, 1)[1]
            extrap = (intercept - w) / abs(w)
            worst_direct = max(worst_direct, abs(direct))
            worst_extrap = max(worst_extrap, abs(extrap))
            assert abs(direct) <= 0.02
            assert abs(extrap) <= 0.005
        elapsed = time.monotonic() - started
        assert elapsed < 600.0
        print(f"    worst direct {worst_direct:.2%}, extrapolated "
              f"{worst_extrap:.2%}, {elapsed:.0f}s", end="  ")


def _clear_window(points, half, clearance, candidates=np.linspace(-1.2, 1.2, 9)):
    for cx in candidates:
        for cy in candidates:
            linf = np.maximum(np.abs(points[:, 0] - cx), np.abs(points[:, 1] - cy))
            if np.all(np.abs(linf - half) > clearance):
                return Window((cx, cy), half)
    return None


def test_criterion_03_eta_monotonicity(quad, eq_fast):
    with criterion(3, "counterterm-corrected energy monotone in eta up to "
                      f"{MONOTONICITY_SLACK_C} N mu eta slack, zero violations"):
        n = 32
        mu_p = mu_prime(eq_fast, n)
        cfg = smp.SamplerConfig(n=n, beta=2.0, n_sweeps=1060, burn_in_sweeps=60,
                                thin=20, seed=331)
        chain = smp.sample_gibbs(cfg, quad, eq=eq_fast)
        pairs = ((0.02, 0.05), (0.05, 0.1), (0.02, 0.1))
        mu_max = eq_fast.max_density
        checked = violations = 0
        worst = 0.0
        for sample in chain.samples:
            config = blown(sample.points, 1.0)  # already macroscopic; scale below
            config = PointConfiguration(sample.points * np.sqrt(n), frame="blown_up")
            window = _clear_window(config.points, 4.0, 0.13)
            if window is None:
                continue
            values = en.renormalized_energy_profile(
                config, mu_p, window, [0.02, 0.05, 0.1]
            )
            n_w = max(int(window.contains_points(config.points).sum()), 1)
            for eta_small, eta_big in pairs:
                drop = values[eta_small] - values[eta_big]
                slack = MONOTONICITY_SLACK_C * n_w * mu_max * eta_big
                checked += 1
                worst = max(worst, -drop / slack if drop < 0 else 0.0)
                if drop < -slack:
                    violations += 1
            if checked >= 150:
                break
        assert checked >= 150, "not enough clear windows"
        assert violations == 0
        print(f"    {checked} pairs, worst slack use {worst:.2f}", end="  ")


def test_criterion_04_local_field_minimality(quad, eq_fast):
    with criterion(4, "local field beats divergence-free rivals; quadratic "
                      "growth slope 2 +- 0.1"):
        n = 16
        mu_p = mu_prime(eq_fast, n)
        rng = np.random.default_rng(44)
        config = blown(eq_fast.sample(rng, n), n)
        grid = Grid.square((0.0, 0.0), 6.0, 0.05)
        X, Y = grid.centers()
        zero = fg.ScalarGrid(grid, np.zeros(grid.shape))
        local, _ = en.minimality_probe(config, mu_p, zero, 0.15)
        for _ in range(50):
            center = rng.uniform(-1.5, 1.5, size=2)
            width = rng.uniform(0.4, 1.2)
            amp = rng.uniform(0.2, 3.0)
            psi = amp * np.exp(-((X - center[0]) ** 2 + (Y - center[1]) ** 2)
                               / (2 * width ** 2))
            psi[:2, :] = psi[-2:, :] = 0.0
            psi[:, :2] = psi[:, -2:] = 0.0
            stream = fg.ScalarGrid(grid, psi)
            loc, per = en.minimality_probe(config, mu_p, stream, 0.15)
            assert per >= loc - 1e-8 * abs(loc)
        # quadratic growth of the excess in the perturbation amplitude
        psi = np.exp(-(X ** 2 + (Y - 0.3) ** 2) / 0.8)
        psi[:2, :] = psi[-2:, :] = 0.0
        psi[:, :2] = psi[:, -2:] = 0.0
        ts = np.array([0.05, 0.15, 0.5, 1.5])
        gaps = []
        for t in ts:
            _, per = en.minimality_probe(config, mu_p,
                                         fg.ScalarGrid(grid, t * psi), 0.15)
            gaps.append(per - local)
        slope = np.polyfit(np.log(ts), np.log(gaps), 1)[0]
        assert abs(slope - 2.0) < 0.1
        print(f"    50 rivals lost; growth slope {slope:.3f}", end="  ")


def test_criterion_05_sampler_correctness(quad, chain256):
    with criterion(5, "N=1 Gaussian moments (3 sigma) and N=256 radial KS vs "
                      "Kostlan oracle (<= 0.05, >= 200 effective samples)"):
        started = time.monotonic()
        beta = 3.0
        cfg = smp.SamplerConfig(n=1, beta=beta, n_sweeps=22000,
                                burn_in_sweeps=500, thin=4, seed=11,
                                proposal_sigma=0.6)
        single = smp.sample_gibbs(cfg, quad)
        pts = single.pooled_points()
        for axis in (0, 1):
            var = pts[:, axis].var()
            se = (1.0 / beta) * np.sqrt(2.0 / len(pts) * 8.0)
            assert abs(var - 1.0 / beta) < 3.0 * se

        diag = smp.diagnose_chain(chain256)
        effective = (len(chain256.energy_trace)
                     - chain256.config.burn_in_sweeps) / diag.autocorr_time
        assert effective >= 200.0
        radii = np.sort(np.hypot(*chain256.pooled_points().T))
        cdf = smp.ginibre_radial_cdf(radii, 256)
        hi = np.arange(1, len(radii) + 1) / len(radii)
        lo = np.arange(0, len(radii)) / len(radii)
        ks = max(np.abs(cdf - hi).max(), np.abs(cdf - lo).max())
        assert ks <= 0.05
        elapsed = time.monotonic() - started + chain256.metadata.get("build_seconds", 0.0)
        assert elapsed < 1800.0
        print(f"    KS = {ks:.4f}, effective samples ~ {effective:.0f}, "
              f"{elapsed:.0f}s", end="  ")


def test_criterion_06_first_order_convergence(chain256):
    with criterion(6, "mass fractions at radii {0.3, 0.6, 0.9} match r^2 "
                      "within 3 sigma at N=256"):
        diag = smp.diagnose_chain(chain256)
        n_eff = len(chain256.samples) * min(
            1.0, chain256.config.thin / diag.autocorr_time
        )
        for r in (0.3, 0.6, 0.9):
            counts = np.array([
                (np.hypot(*s.points.T) <= r).sum() for s in chain256.samples
            ])
            se = counts.std(ddof=1) / np.sqrt(n_eff)
            gap = abs(counts.mean() - 256 * r * r)
            assert gap <= 3.0 * se, (r, gap, 3 * se)
        print(f"    n_eff ~ {n_eff:.0f}", end="  ")


def test_criterion_07_discrepancy_scaling(eq_fast, chain256, chain1024, chain4096):
    with criterion(7, "median |D| at R = n^0.45 grows with exponent <= "
                      "4 delta / 3 + 0.15"):
        started = time.monotonic()
        delta1 = 0.45
        medians = []
        sizes = (256, 1024, 4096)
        build = 0.0
        for n, chain in zip(sizes, (chain256, chain1024, chain4096)):
            build += chain.metadata.get("build_seconds", 0.0)
            mu_p = mu_prime(eq_fast, n)
            side = float(n) ** delta1
            # window centers in the bulk: |center| + side/2 well inside sqrt(n)
            reach = (np.sqrt(n) - side / 2.0 - 2.0) / np.sqrt(n)
            centers = [(cx, cy)
                       for cx in np.linspace(-reach * 0.6, reach * 0.6, 3)
                       for cy in np.linspace(-reach * 0.6, reach * 0.6, 3)]
            values = []
            for sample in chain.samples:
                config = PointConfiguration(sample.points * np.sqrt(n),
                                            frame="blown_up")
                for c in centers:
                    z0 = (c[0] * np.sqrt(n), c[1] * np.sqrt(n))
                    values.append(abs(stats.discrepancy(
                        config, mu_p, Window.of_side(z0, side)
                    )))
            medians.append(np.median(values))
        slope = np.polyfit(np.log(sizes), np.log(medians), 1)[0]
        delta = delta1 / 0.9
        bound = 4.0 * delta / 3.0 + 0.15
        assert slope <= bound, (slope, bound)
        elapsed = time.monotonic() - started + build
        assert elapsed < 7200.0
        print(f"    medians {['%.2f' % m for m in medians]}, exponent "
              f"{slope:.3f} <= {bound:.3f}, {elapsed:.0f}s", end="  ")


def test_criterion_08_local_law_trend(eq_fast, chain64, chain256, chain1024):
    with criterion(8, "rescaled bump statistic strictly decreasing in median "
                      "over n in {64, 256, 1024} at delta = 0.4"):
        delta = 0.4
        medians = []
        for n, chain in zip((64, 256, 1024), (chain64, chain256, chain1024)):
            mu_p = mu_prime(eq_fast, n)
            values = []
            for sample in chain.samples[:120]:
                config = PointConfiguration(sample.points * np.sqrt(n),
                                            frame="blown_up")
                report = stats.local_law_statistic(
                    config, mu_p, (0.0, 0.0), delta, n
                )
                values.append(report.statistic)
            medians.append(np.median(values))
        assert medians[0] > medians[1] > medians[2]
        print(f"    medians {['%.4f' % m for m in medians]}", end="  ")


def _screening_problem(el, amp):
    r1, r2 = 8.0 * el, 8.0 * el + 2.5 * el

    def mu(p):
        p = np.atleast_2d(p)
        return 1.0 + 0.1 * np.sin(p[:, 0] / 5.0) * np.cos(p[:, 1] / 7.0)

    def flux(p, a=amp, r2=r2):
        p = np.atleast_2d(p)
        return a * np.sin(2.0 * np.pi * (p[:, 0] + 0.3 * p[:, 1]) / r2)

    return scr.ScreeningProblem(
        center=(0.0, 0.0), r1=r1, r2=r2, tile_scale=el,
        mu=mu, m_low=0.9, m_high=1.1, boundary_flux=flux, eta1=1e-20,
        c_mu=0.1 * np.sqrt(1.0 / 25.0 + 1.0 / 49.0), kappa=1.0,
    )


def test_criterion_09_screening_construction():
    with criterion(9, "screening: exact discrete flux, count within 1, energy "
                      f"bound with frozen C = {SCREENING_ENERGY_C}, gluing "
                      "conserves points"):
        worst_ratio = 0.0
        for el in (4.0, 8.0, 16.0):
            for amp_scale in (0.01, 0.1, 1.0):
                amp = amp_scale * 0.05 * min(1.0, el / 8.0) ** 1.5
                problem = _screening_problem(el, amp)
                result = scr.build_transition(problem)
                # flux conditions hold exactly in discrete form
                for tile, sol in zip(result.tiles, result.tile_solutions):
                    south, east, north, west = sol.meta["flux"]
                    x0, x1, y0, y1 = tile.rect
                    for name, arr, pts in (
                        ("south", south, np.column_stack([sol.x(), np.full(sol.nx, y0)])),
                        ("north", north, np.column_stack([sol.x(), np.full(sol.nx, y1)])),
                        ("east", east, np.column_stack([np.full(sol.ny, x1), sol.y()])),
                        ("west", west, np.column_stack([np.full(sol.ny, x0), sol.y()])),
                    ):
                        if name in tile.outer_edges:
                            expected = np.asarray(problem.boundary_flux(pts))
                            assert np.array_equal(arr, expected)
                        else:
                            assert np.all(arr == 0.0)
                # point count matches the flux/mass budget within one
                predicted = scr.predicted_transition_count(problem)
                assert abs(result.n_tran - predicted) <= 1.0
                # energy bound with the single frozen constant
                m_energy = problem.flux_energy()
                budget = (
                    el * m_energy
                    + len(result.tiles) * el ** 4
                    * (problem.c_mu * (2 * np.sqrt(2) * el) ** problem.kappa) ** 2
                    + result.n_tran * np.log(1.0 / problem.eta1)
                )
                ratio = result.energy / budget
                worst_ratio = max(worst_ratio, ratio)
                assert ratio <= SCREENING_ENERGY_C, (el, amp, ratio)
        # gluing: interior points + transition points + exterior points = N
        from test_screening import glue_around_screening

        n_total, n_gen, n_tran, n_out, _ = glue_around_screening(4.0, seed=9)
        assert n_gen + n_tran + n_out == n_total
        print(f"    worst energy ratio {worst_ratio:.2f}, glued "
              f"{n_gen}+{n_tran}+{n_out} = {n_total}", end="  ")


def test_criterion_10_neumann_poisson():
    with criterion(10, "manufactured-solution order 2 +- 0.2; compatibility "
                       "defect handled on every solve"):
        errors = []
        sizes = (32, 64, 128, 256)
        for m in sizes:
            grid = Grid.from_box(0, 2.0, 0, 1.0, 2.0 / m)
            X, _ = grid.centers()
            exact = np.cos(np.pi * X / 2.0)
            rhs = (np.pi / 2.0) ** 2 * np.cos(np.pi * X / 2.0) / (2 * np.pi)
            sol = fg.neumann_poisson(fg.ScalarGrid(grid, rhs))
            assert "defect" in sol.meta and abs(sol.meta["defect"]) < 1e-10
            assert sol.meta["residual"] < 1e-8 * np.abs(rhs).max()
            errors.append(np.abs(sol.values - (exact - exact.mean())).max())
        order = -np.polyfit(np.log(sizes), np.log(errors), 1)[0]
        assert abs(order - 2.0) < 0.2
        # defect absorption is recorded for slightly incompatible data
        grid = Grid.from_box(0, 1, 0, 1, 1 / 64)
        rhs = fg.ScalarGrid(grid, np.full(grid.shape, 1e-3))
        sol = fg.neumann_poisson(rhs, defect_tol=1.1)
        assert sol.meta["defect"] == pytest.approx(2e-3 * np.pi, rel=1e-9)
        print(f"    observed order {order:.3f}", end="  ")


def test_criterion_11_delta_schedule():
    with criterion(11, "delta schedule: inequalities on a 20x20 grid, golden "
                       "values to 1e-6, iterated bound reaches < 0.01"):
        for delta in np.linspace(0.025, 0.5, 20):
            for kappa in np.linspace(0.05, 1.0, 20):
                stats.choose_deltas(float(delta), float(kappa)).validate()
        s = stats.choose_deltas(0.5, 1.0, 0.5)
        golden = dict(
            gamma=1.0606601717798212,
            alpha=0.0938363213560542,
            delta3=0.1767766952966369,
            delta1=0.4785533905932738,
            delta2=0.4758961697760733,
        )
        for name, value in golden.items():
            assert abs(getattr(s, name) - value) < 1e-6, name
        assert abs(stats.delta1_lower_bound(0.5, 1.0) - 0.4571067811865475) < 1e-6
        d, steps = 0.5, 0
        while d >= 0.01:
            d = stats.delta1_lower_bound(d, 1.0)
            steps += 1
            assert steps < 1000
        print(f"    lower bound iteration reached {d:.4f} in {steps} steps",
              end="  ")


def test_criterion_12_reproducibility(tmp_path):
    with criterion(12, "identical spec + seed produce byte-identical data"):
        from coulombgas.cli import main

        spec = dict(command="sample", potential="quadratic", n=8, beta=2.0,
                    n_sweeps=60, burn_in_sweeps=20, thin=10, seed=77,
                    eq_spacing=0.05)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(spec))
        for name in ("run_a", "run_b"):
            rc = main(["--config", str(cfg), "--out", str(tmp_path / name)])
            assert rc == 0
        names = sorted(p.name for p in (tmp_path / "run_a").iterdir()
                       if p.name != "metadata.json")
        assert names, "no data files produced"
        for name in names:
            a = (tmp_path / "run_a" / name).read_bytes()
            b = (tmp_path / "run_b" / name).read_bytes()
            assert a == b, name
        spec["command"] = "oracle"
        spec["n_samples"] = 20
        cfg.write_text(json.dumps(spec))
        for name in ("or_a", "or_b"):
            assert main(["--config", str(cfg), "--out", str(tmp_path / name)]) == 0
        assert ((tmp_path / "or_a" / "oracle_radii.csv").read_bytes()
                == (tmp_path / "or_b" / "oracle_radii.csv").read_bytes())
        print(f"    {len(names)} chain files + oracle radii byte-identical",
              end="  ")
