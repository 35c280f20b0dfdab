import json
import os
import subprocess
import sys

import numpy as np
import pytest

from gravodiff.cli import main
from gravodiff.config import ConfigError, parse_config, parse_sweep
from gravodiff.diagnostics import csv_header


def minimal_doc(**over):
    doc = {
        "dimension": 3,
        "radius": 1.0,
        "cells": 48,
        "eos": {"kind": "maxwell_boltzmann"},
        "mode": {"kind": "isothermal", "theta": 1.0},
        "initial": {"profile": "gaussian", "amplitude": 1.0, "width": 0.2},
        "time": {"t_end": 0.1},
    }
    doc.update(over)
    return doc


class TestParseConfig:
    def test_minimal_document(self):
        cfg = parse_config(minimal_doc())
        assert cfg.d == 3
        assert cfg.output.cadence_steps == 10  # default

    def test_unknown_key_is_path_qualified(self):
        doc = minimal_doc()
        doc["eos"]["fugacity"] = 2.0
        with pytest.raises(ConfigError, match="eos.fugacity"):
            parse_config(doc)

    def test_missing_required_key(self):
        doc = minimal_doc()
        del doc["time"]
        with pytest.raises(ConfigError, match="time"):
            parse_config(doc)

    def test_microcanonical_polytropic_rejected(self):
        doc = minimal_doc(
            eos={"kind": "polytropic"},
            mode={"kind": "microcanonical", "E_target": 1.0},
        )
        with pytest.raises(ConfigError, match="degenerate"):
            parse_config(doc)

    def test_mass_normalization_exact(self):
        doc = minimal_doc()
        doc["initial"]["mass"] = 0.01
        cfg = parse_config(doc)
        grid = cfg.make_grid()
        assert grid.integrate(cfg.initial_density(grid)) == pytest.approx(
            0.01, rel=1e-14
        )

    def test_theta_schedule_clamped(self):
        doc = minimal_doc(
            mode={
                "kind": "isothermal",
                "theta": [[0.0, 0.5], [1.0, 5000.0]],
                "theta_bounds": [1e-3, 1e3],
            }
        )
        sched = parse_config(doc).theta_schedule()
        assert sched(0.0) == 0.5
        assert sched(1.0) == 1e3
        assert sched(0.5) == pytest.approx(
            min(0.5 + 0.5 * (5000.0 - 0.5), 1e3)
        )

    def test_invalid_json_text(self):
        with pytest.raises(ConfigError, match="invalid JSON"):
            parse_config("{not json")

    def test_blowup_threshold_default_tracks_mean(self):
        doc = minimal_doc()
        doc["initial"]["mass"] = 0.01
        cfg = parse_config(doc)
        grid = cfg.make_grid()
        tc = cfg.time_control(grid)
        mean = 0.01 / float(np.sum(grid.cell_volume))
        assert tc.blowup_threshold == pytest.approx(1e6 * mean, rel=1e-12)

    def test_geometric_refinement(self):
        doc = minimal_doc(refinement={"kind": "geometric", "ratio": 1.05})
        grid = parse_config(doc).make_grid()
        assert np.all(np.diff(np.diff(grid.r_faces)) > 0.0)


class TestParseSweep:
    def test_valid_plan(self):
        plan = parse_sweep(
            {
                "base": minimal_doc(),
                "axes": [{"path": "initial.amplitude", "values": [0.5, 1.0]}],
            }
        )
        assert plan.axes == [("initial.amplitude", [0.5, 1.0])]

    def test_empty_axes_rejected(self):
        with pytest.raises(ConfigError, match="axes"):
            parse_sweep({"base": minimal_doc(), "axes": []})

    def test_invalid_base_rejected(self):
        doc = minimal_doc()
        del doc["time"]
        with pytest.raises(ConfigError):
            parse_sweep({"base": doc, "axes": [{"path": "radius", "values": [1.0]}]})


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write_config(path, **over):
    doc = minimal_doc(**over)
    doc["initial"]["mass"] = 0.01
    doc["time"] = {"t_end": 1e9, "max_steps": 150}
    doc.setdefault("output", {"cadence_steps": 10, "path": "out"})
    path.write_text(json.dumps(doc))
    return doc


class TestCli:
    def test_run_writes_outputs(self, workdir):
        write_config(workdir / "cfg.json")
        assert main(["run", str(workdir / "cfg.json")]) == 0
        csv = (workdir / "out.csv").read_bytes()
        lines = csv.split(b"\n")
        assert lines[0].decode() == csv_header()
        assert b"\r" not in csv
        snap = json.loads((workdir / "out.json").read_text())
        assert snap["outcome"] == "completed"

    def test_blowup_exit_code(self, workdir):
        doc = write_config(workdir / "cfg.json")
        doc["time"]["blowup_threshold"] = 1e-9
        (workdir / "cfg.json").write_text(json.dumps(doc))
        assert main(["run", str(workdir / "cfg.json")]) == 2

    def test_bracket_exit_code(self, workdir):
        doc = write_config(
            workdir / "cfg.json",
            eos={"kind": "fermi_dirac"},
            mode={"kind": "microcanonical", "E_target": 1e9},
        )
        assert main(["run", str(workdir / "cfg.json")]) == 3

    def test_missing_file_exits_one(self, workdir):
        assert main(["run", "no-such-config.json"]) == 1

    def test_bad_config_exits_one(self, workdir):
        (workdir / "bad.json").write_text('{"dimension": 7}')
        assert main(["run", str(workdir / "bad.json")]) == 1

    def test_fermi_eval(self, capsys):
        import math

        assert main(["fermi-eval", "0", "0"]) == 0
        out = capsys.readouterr().out.strip()
        assert float(out) == pytest.approx(math.log(2.0), rel=1e-12)
        assert out == "%.17g" % float(out)  # full-precision round trip

    def test_sweep_single_point_matches_run(self, workdir, monkeypatch):
        doc = write_config(workdir / "cfg.json")
        plan = {
            "base": doc,
            "axes": [{"path": "initial.mass", "values": [0.01]}],
            "parallelism": 1,
        }
        (workdir / "plan.json").write_text(json.dumps(plan))
        monkeypatch.setenv("GRAVODIFF_THREADS", "1")
        assert main(["sweep", str(workdir / "plan.json")]) == 0
        lines = (workdir / "out.jsonl").read_text().splitlines()
        assert len(lines) == 1
        rec = json.loads(lines[0])
        assert rec["outcome"] == "completed"

        assert main(["run", str(workdir / "cfg.json")]) == 0
        snap = json.loads((workdir / "out.json").read_text())
        assert rec["final"]["mass"] == pytest.approx(
            snap["final_record"]["mass"], rel=1e-15
        )

    def test_sweep_parallel_workers(self, workdir, monkeypatch):
        doc = write_config(workdir / "cfg.json")
        plan = {
            "base": doc,
            "axes": [{"path": "initial.mass", "values": [0.005, 0.01, 0.02]}],
            "parallelism": 2,
        }
        (workdir / "plan.json").write_text(json.dumps(plan))
        monkeypatch.setenv("GRAVODIFF_THREADS", "2")
        assert main(["sweep", str(workdir / "plan.json")]) == 0
        lines = (workdir / "out.jsonl").read_text().splitlines()
        assert len(lines) == 3
        masses = [json.loads(x)["final"]["mass"] for x in lines]
        assert masses == sorted(masses)

    def test_figures_flag(self, workdir):
        write_config(workdir / "cfg.json")
        assert main(["run", str(workdir / "cfg.json"), "--figures"]) == 0
        assert (workdir / "out_density.png").exists()
        assert (workdir / "out_diagnostics.png").exists()

    def test_determinism_bytes(self, workdir):
        write_config(workdir / "cfg.json")
        outputs = []
        for _ in range(2):
            proc = subprocess.run(
                [sys.executable, "-m", "gravodiff.cli", "run", "cfg.json"],
                capture_output=True,
                cwd=workdir,
            )
            assert proc.returncode == 0
            outputs.append((workdir / "out.csv").read_bytes())
        assert outputs[0] == outputs[1]
