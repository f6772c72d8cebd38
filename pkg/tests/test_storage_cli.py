"""On-disk formats, ingestion errors, CLI contract and reproducibility."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from coulombgas import storage
from coulombgas.cli import ingest_points, main
from coulombgas.errors import ValidationError
from coulombgas.grids import Grid


class TestPointFormats:
    def test_binary_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(37, 2))
        path = tmp_path / "pts.bin"
        storage.write_points_binary(path, pts)
        back = storage.read_points_binary(path)
        assert np.array_equal(back, pts)

    def test_csv_round_trip_and_precision(self, tmp_path):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(11, 2)) * 1e3
        path = tmp_path / "pts.csv"
        storage.write_points_csv(path, pts)
        back = storage.read_points_csv(path)
        assert np.abs(back - pts).max() < 1e-12 * np.abs(pts).max()

    def test_two_line_csv(self, tmp_path):
        path = tmp_path / "two.csv"
        path.write_text("0,0\n1,0\n")
        config = ingest_points(str(path), "macroscopic")
        assert config.n == 2
        assert np.array_equal(config.points, [[0.0, 0.0], [1.0, 0.0]])

    def test_empty_file_accepted(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        config = ingest_points(str(path), "macroscopic")
        assert config.n == 0

    def test_malformed_line_reports_lineno(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n")
        with pytest.raises(ValidationError, match=":1:"):
            ingest_points(str(path), "macroscopic")

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "inf.csv"
        path.write_text("x,y\n1.0,inf\n")
        with pytest.raises(ValidationError, match=":2:"):
            ingest_points(str(path), "macroscopic")

    def test_frame_attached(self, tmp_path):
        path = tmp_path / "pts.csv"
        storage.write_points_csv(path, np.zeros((1, 2)))
        assert ingest_points(str(path), "blown_up").frame == "blown_up"


class TestGridFormat:
    def test_scalar_round_trip(self, tmp_path):
        grid = Grid((0.1, -0.2), 0.05, 13, 7)
        values = np.random.default_rng(2).normal(size=(13, 7))
        path = tmp_path / "g.bin"
        storage.write_grid_binary(path, grid, values)
        g2, v2 = storage.read_grid_binary(path)
        assert g2 == grid
        assert np.array_equal(v2, values)

    def test_vector_round_trip(self, tmp_path):
        grid = Grid((0.0, 0.0), 0.1, 5, 6)
        values = np.random.default_rng(3).normal(size=(5, 6, 2))
        path = tmp_path / "f.bin"
        storage.write_grid_binary(path, grid, values)
        g2, v2 = storage.read_grid_binary(path)
        assert v2.shape == (5, 6, 2)
        assert np.array_equal(v2, values)

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"not a grid at all")
        with pytest.raises(ValidationError):
            storage.read_grid_binary(path)


def run_cli(args):
    return main(args)


class TestCLI:
    def write_config(self, tmp_path, payload, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    def test_deltas_command(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path, {"command": "deltas", "delta": 0.5,
                                           "kappa": 1.0})
        rc = run_cli(["--config", cfg, "--out", str(tmp_path / "out")])
        assert rc == 0
        payload = json.loads((tmp_path / "out" / "deltas.json").read_text())
        assert payload["delta1"] == pytest.approx(0.4785533905932738)
        meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
        assert meta["command"] == "deltas"
        assert "PCG64" in meta["rng"]

    def test_invalid_command_exits_2(self, tmp_path):
        cfg = self.write_config(tmp_path, {"command": "bogus"})
        assert run_cli(["--config", cfg, "--out", str(tmp_path / "out")]) == 2

    def test_invalid_sampler_spec_exits_2(self, tmp_path):
        cfg = self.write_config(tmp_path, {
            "command": "sample", "n": 4, "beta": 2.0,
            "n_sweeps": 5, "burn_in_sweeps": 10,
        })
        assert run_cli(["--config", cfg, "--out", str(tmp_path / "out")]) == 2

    def test_numerical_failure_exits_3(self, tmp_path):
        cfg = self.write_config(tmp_path, {
            "command": "screen_demo", "flux_amplitude": 50.0, "seed": 1,
        })
        assert run_cli(["--config", cfg, "--out", str(tmp_path / "out")]) == 3
        # partial outputs removed
        out = tmp_path / "out"
        assert not out.exists() or list(out.iterdir()) == []

    def test_oracle_reproducibility_byte_identical(self, tmp_path):
        cfg = self.write_config(tmp_path, {"command": "oracle", "n": 16,
                                           "n_samples": 10, "seed": 7})
        for name in ("a", "b"):
            assert run_cli(["--config", cfg, "--out", str(tmp_path / name)]) == 0
        a = (tmp_path / "a" / "oracle_radii.csv").read_bytes()
        b = (tmp_path / "b" / "oracle_radii.csv").read_bytes()
        assert a == b

    def test_seed_override_changes_data(self, tmp_path):
        cfg = self.write_config(tmp_path, {"command": "oracle", "n": 16,
                                           "n_samples": 10, "seed": 7})
        run_cli(["--config", cfg, "--out", str(tmp_path / "a")])
        run_cli(["--config", cfg, "--seed", "8", "--out", str(tmp_path / "b")])
        a = (tmp_path / "a" / "oracle_radii.csv").read_bytes()
        b = (tmp_path / "b" / "oracle_radii.csv").read_bytes()
        assert a != b

    def test_energy_command_round_trip(self, tmp_path):
        pts = tmp_path / "config.csv"
        storage.write_points_csv(pts, np.array([[0.1, 0.0], [-0.2, 0.3],
                                                [0.4, -0.1], [0.0, 0.55]]))
        cfg = self.write_config(tmp_path, {
            "command": "energy", "points_file": str(pts),
            "eq_spacing": 0.04, "seed": 0,
        })
        assert run_cli(["--config", cfg, "--out", str(tmp_path / "out")]) == 0
        report = json.loads((tmp_path / "out" / "energy_report.json").read_text())
        assert abs(report["splitting_residual"]) < 1e-2

    def test_console_entry_point(self, tmp_path):
        cfg = self.write_config(tmp_path, {"command": "deltas", "delta": 0.4,
                                           "kappa": 0.5})
        proc = subprocess.run(
            [sys.executable, "-m", "coulombgas.cli", "--config", cfg,
             "--out", str(tmp_path / "out")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "delta1" in proc.stdout
