"""Experiment runner: one JSON config in, reproducible artifacts out.

A run is described by a flat JSON file whose ``command`` selects the
pipeline; every other key configures it.  The same seed and config always
produce byte-identical data files (metadata carries the wall-clock and is
exempt).  Exit codes: 0 success, 2 validation failure, 3 numerical failure.

Example config::

    {"command": "deltas", "delta": 0.5, "kappa": 1.0, "delta1_position": 0.5}

Commands: ``deltas``, ``oracle``, ``sample``, ``energy``, ``locallaw``,
``screen_demo``.  See the README for each command's keys.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__, sampler, screening, stats, storage
from .energy import splitting_check
from .errors import NumericalError, ValidationError
from .points import MACROSCOPIC
from .potential import equilibrium_measure, make_potential

COMMANDS = ("sample", "energy", "locallaw", "screen_demo", "deltas", "oracle")


def ingest_points(path, frame):
    """Parse a CSV or binary point file into a configuration."""
    if frame not in (MACROSCOPIC, "blown_up"):
        raise ValidationError(f"unknown frame '{frame}'")
    if not os.path.exists(path):
        raise ValidationError(f"point file not found: {path}")
    return storage.read_points(path, frame)


class Run:
    """Collects outputs so a failed run can remove its partial files."""

    def __init__(self, out_dir, fmt):
        self.out_dir = out_dir
        self.fmt = fmt
        self.written = []

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def emit_json(self, name, payload):
        storage.write_json(self.path(name), payload)
        self.written.append(self.path(name))

    def emit_text(self, name, text):
        storage.atomic_write_text(self.path(name), text)
        self.written.append(self.path(name))

    def emit_points(self, name, points):
        suffix = ".csv" if self.fmt == "csv" else ".bin"
        storage.write_points(self.path(name + suffix), points, fmt=self.fmt)
        self.written.append(self.path(name + suffix))

    def cleanup(self):
        for path in self.written:
            try:
                os.unlink(path)
            except OSError:
                pass


def _parse_potential(spec):
    name = spec.get("potential", "quadratic")
    params = spec.get("potential_params", {})
    return make_potential(name, **params)


def _sampler_config(spec, n_default=64):
    return sampler.SamplerConfig(
        n=int(spec.get("n", n_default)),
        beta=float(spec.get("beta", 2.0)),
        n_sweeps=int(spec.get("n_sweeps", 500)),
        burn_in_sweeps=int(spec.get("burn_in_sweeps", 100)),
        thin=int(spec.get("thin", 10)),
        proposal_sigma=spec.get("proposal_sigma"),
        seed=int(spec["seed"]),
        move_kind=spec.get("move_kind", "metropolis"),
    )


def cmd_deltas(spec, run):
    schedule = stats.choose_deltas(
        float(spec.get("delta", 0.5)),
        float(spec.get("kappa", 1.0)),
        float(spec.get("delta1_position", 0.5)),
    )
    payload = dataclasses.asdict(schedule)
    run.emit_json("deltas.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return payload


def cmd_oracle(spec, run):
    n = int(spec.get("n", 64))
    n_samples = int(spec.get("n_samples", 100))
    radii = sampler.ginibre_radial_oracle(n, n_samples, seed=int(spec["seed"]))
    lines = [",".join(repr(float(v)) for v in row) for row in radii]
    run.emit_text("oracle_radii.csv", "\n".join(lines) + "\n")
    summary = dict(n=n, n_samples=n_samples,
                   mean_radius=float(radii.mean()),
                   max_radius=float(radii.max()))
    run.emit_json("oracle_summary.json", summary)
    print(f"wrote {n_samples} radius multisets for n={n}")
    return summary


def cmd_sample(spec, run):
    potential = _parse_potential(spec)
    cfg = _sampler_config(spec)
    eq = equilibrium_measure(potential, grid=float(spec.get("eq_spacing", 0.02)))
    chain = sampler.sample_gibbs(cfg, potential, eq=eq)
    for k, sample in enumerate(chain.samples):
        run.emit_points(f"sample_{k:05d}", sample.points)
    run.emit_text(
        "energy_trace.csv",
        "sweep,hamiltonian\n" + "\n".join(
            f"{i},{float(v)!r}" for i, v in enumerate(chain.energy_trace)
        ) + "\n",
    )
    diag = sampler.diagnose_chain(chain)
    summary = dict(
        config=dataclasses.asdict(cfg),
        potential=potential.name,
        acceptance_rate=chain.acceptance_rate,
        autocorr_time=diag.autocorr_time,
        effective_samples=diag.effective_samples,
        n_samples=len(chain.samples),
        rng=chain.rng_name,
    )
    run.emit_json("chain.json", summary)
    print(f"chain of {len(chain.samples)} samples, acceptance "
          f"{chain.acceptance_rate:.3f}, autocorrelation {diag.autocorr_time:.1f}")
    return summary


def cmd_energy(spec, run):
    potential = _parse_potential(spec)
    if "points_file" not in spec:
        raise ValidationError("energy command needs a 'points_file'")
    config = ingest_points(spec["points_file"], spec.get("frame", MACROSCOPIC))
    eq = equilibrium_measure(potential, grid=float(spec.get("eq_spacing", 0.02)))
    report = splitting_check(config, potential, eq)
    run.emit_text("energy_report.json", report.to_json(
        eta_list=spec.get("eta_list", []),
        beta=spec.get("beta"),
    ) + "\n")
    print(f"H = {report.hamiltonian:.6f}, residual = {report.splitting_residual:.3e}")
    return report


def cmd_locallaw(spec, run):
    potential = _parse_potential(spec)
    cfg = _sampler_config(spec, n_default=256)
    eq = equilibrium_measure(potential, grid=float(spec.get("eq_spacing", 0.02)))
    chain = sampler.sample_gibbs(cfg, potential, eq=eq)
    delta = float(spec.get("delta", 0.4))
    centers = spec.get("centers", [[0.0, 0.0]])
    from .potential import blowup_density

    mu_prime = blowup_density(eq, cfg.n)
    rows = ["sample,center_x,center_y,statistic,discrepancy"]
    stats_list = []
    for k, sample in enumerate(chain.samples):
        blown = stats.blow_up(sample, cfg.n)
        for cx, cy in centers:
            z0 = (cx * np.sqrt(cfg.n), cy * np.sqrt(cfg.n))
            report = stats.local_law_statistic(
                blown, mu_prime, z0, delta, cfg.n,
                test_function=spec.get("test_function", "radial_cosine"),
            )
            rows.append(f"{k},{float(cx)!r},{float(cy)!r},"
                        f"{float(report.statistic)!r},{float(report.discrepancy)!r}")
            stats_list.append(report.statistic)
    run.emit_text("locallaw.csv", "\n".join(rows) + "\n")
    summary = dict(
        n=cfg.n, delta=delta, median_statistic=float(np.median(stats_list)),
        samples=len(chain.samples), centers=centers,
    )
    run.emit_json("locallaw_summary.json", summary)
    print(f"median local-law statistic at n={cfg.n}: {summary['median_statistic']:.4g}")
    return summary


def cmd_screen_demo(spec, run):
    el = float(spec.get("tile_scale", 8.0))
    r1 = float(spec.get("r1", 4.0 * el))
    r2 = float(spec.get("r2", r1 + 2.0 * el))
    amp = float(spec.get("flux_amplitude", 0.02))
    eta1 = float(spec.get("eta1", 1e-20))
    seed = int(spec["seed"])

    def mu(p):
        p = np.atleast_2d(p)
        return 1.0 + 0.1 * np.sin(p[:, 0] / 5.0) * np.cos(p[:, 1] / 7.0)

    def flux(p):
        p = np.atleast_2d(p)
        return amp * np.sin(2.0 * np.pi * (p[:, 0] + 0.3 * p[:, 1]) / r2)

    problem = screening.ScreeningProblem(
        center=(0.0, 0.0), r1=r1, r2=r2, tile_scale=el,
        mu=mu, m_low=0.9, m_high=1.1, boundary_flux=flux, eta1=eta1,
        c_mu=0.1 * np.sqrt(1.0 / 25.0 + 1.0 / 49.0), kappa=1.0,
    )
    tiles = screening.tile_annulus(problem)
    result = screening.build_transition(problem, tiles)
    if float(spec.get("jitter_fraction", 0.0)) > 0:
        result = screening.jitter_family(
            result, float(spec["jitter_fraction"]), seed=seed
        )
    run.emit_json("tiles.json", [
        dict(rect=t.rect, m_bar=t.m_bar, m_i=t.m_i, charge=t.charge,
             outer_edges=list(t.outer_edges))
        for t in result.tiles
    ])
    run.emit_points("transition_points", result.points.points)
    grid_path = run.path("transition_field.bin")
    storage.write_grid_binary(grid_path, result.field.grid, result.field.values)
    run.written.append(grid_path)
    summary = dict(
        n_tran=result.n_tran,
        predicted=screening.predicted_transition_count(problem),
        energy=result.energy,
        flux_energy=problem.flux_energy(),
        min_separation=result.min_separation(),
        boundary_clearance=result.boundary_clearance(),
        tile_scale=el, r1=r1, r2=r2, eta1=eta1,
    )
    run.emit_json("screening_summary.json", summary)
    print(f"screened annulus: {result.n_tran} transition points, "
          f"energy {result.energy:.1f}")
    return summary


def run_spec(spec, out_dir, fmt):
    command = spec.get("command")
    if command not in COMMANDS:
        raise ValidationError(
            f"config must set 'command' to one of {COMMANDS}, got {command!r}"
        )
    if "seed" not in spec:
        spec["seed"] = 0
    os.makedirs(out_dir, exist_ok=True)
    run = Run(out_dir, fmt)
    started = time.time()
    try:
        handler = globals()[f"cmd_{command}"]
        handler(spec, run)
    except BaseException:
        run.cleanup()
        raise
    meta = dict(
        spec=spec,
        command=command,
        version=__version__,
        rng="numpy.random.PCG64 (numpy " + np.__version__ + ")",
        wall_time_seconds=time.time() - started,
        threads=os.environ.get("COULOMBGAS_THREADS", ""),
        outputs=[os.path.basename(p) for p in run.written],
    )
    storage.write_json(os.path.join(out_dir, "metadata.json"), meta)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="coulombgas",
        description="Coulomb gas experiments: sampling, energies, local laws.",
    )
    parser.add_argument("--config", required=True, help="JSON experiment file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--format", choices=("csv", "bin"), default="csv",
                        help="point/data file format")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
        if not isinstance(spec, dict):
            raise ValidationError("config must be a JSON object")
        if args.seed is not None:
            spec["seed"] = args.seed
        return run_spec(spec, args.out, args.format)
    except (ValidationError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
