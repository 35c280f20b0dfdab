"""Acceptance suite: every verification criterion as a callable check.

Each criterion returns a CriterionResult; `run_all` executes them in
order and prints a pass/fail table.  The same functions back the
`gravodiff verify` subcommand and the pytest acceptance tests, so the
CLI and CI agree by construction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import eos, evolve, fermi
from .config import parse_config
from .grid import RadialGrid
from .microcanonical import potential_energy, solve_temperature, thermal_energy

__all__ = ["CriterionResult", "CRITERIA", "run_all"]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _scenario(**overrides):
    doc = {
        "dimension": 3,
        "radius": 1.0,
        "cells": 100,
        "eos": {"kind": "maxwell_boltzmann"},
        "mode": {"kind": "isothermal", "theta": 1.0},
        "initial": {"profile": "gaussian", "amplitude": 1.0, "width": 0.2, "mass": 0.01},
        "time": {"t_end": 1e9, "max_steps": 1000},
        "output": {"cadence_steps": 10},
    }
    for key, value in overrides.items():
        node = doc
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return parse_config(doc)


def fermi_closed_form() -> tuple:
    """f_0 agrees with ln(1+e^z) to 1e-10 on 200 points in [-10, 30]."""
    worst = 0.0
    for z in np.linspace(-10.0, 30.0, 200):
        exact = float(np.logaddexp(0.0, z))
        got = fermi.fermi_integral(0.0, float(z))
        worst = max(worst, abs(got - exact) / max(1.0, exact))
    return worst <= 1e-10, f"worst scaled gap {worst:.3e} (limit 1e-10)"


def derivative_recursion() -> tuple:
    """fermi_derivative matches centered differences to 1e-6 relative."""
    h = 1e-4
    worst = 0.0
    for alpha in (0.5, 1.0, 1.5, 2.0):
        for z in np.linspace(-5.0, 20.0, 50):
            z = float(z)
            fd = (
                fermi.fermi_integral(alpha, z + h)
                - fermi.fermi_integral(alpha, z - h)
            ) / (2.0 * h)
            got = fermi.fermi_derivative(alpha, z)
            worst = max(worst, abs(got - fd) / abs(fd))
    return worst <= 1e-6, f"worst relative deviation {worst:.3e} (limit 1e-6)"


def sommerfeld_limit() -> tuple:
    """The degenerate-limit bracket sits within 2% of -pi^2/3 at z = 200."""
    target = -math.pi**2 / 3.0
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0):
        r = fermi.sommerfeld_limit_residual(alpha, 200.0)
        worst = max(worst, abs(r - target) / abs(target))
    return worst <= 0.02, f"worst relative distance {worst:.3e} (limit 0.02)"


def fd_pressure_asymptotics() -> tuple:
    """P' approaches the polytropic slope at large z and 1 at small z."""
    details = []
    ok = True
    for d in (2, 3, 4):
        model = eos.EosModel(kind=eos.EosKind.FERMI_DIRAC, d=d, mu=1.0)
        hi = eos.big_p_prime(model, 1e6) / ((2.0 / d) * (d * 1e6) ** (2.0 / d))
        lo = eos.big_p_prime(model, 1e-6)
        ok &= 0.99 <= hi <= 1.01 and abs(lo - 1.0) <= 1e-3
        details.append(f"d={d}: hi-ratio {hi:.6f}, P'(1e-6) {lo:.6f}")
    return ok, "; ".join(details)


def diffusion_identity() -> tuple:
    """P' equals the kinetic diffusion coefficient to 1e-8 (d = 3).

    The reference route inverts the Fermi function and evaluates the
    slope by direct quadrature of the derivative integrand, sharing no
    code path with the recursion used inside big_p_prime.
    """
    model = eos.EosModel(kind=eos.EosKind.FERMI_DIRAC, d=3, mu=1.0)
    alpha = eos._fd_alpha(model)
    worst = 0.0
    for z in np.geomspace(1e-4, 1e4, 100):
        z = float(z)
        x = eos._fd_x_of_z(model, z)
        direct = (2.0 * z / model.mu) / fermi.fermi_slope(alpha, x, eos._CFG)
        worst = max(worst, abs(eos.big_p_prime(model, z) - direct) / direct)
    return worst <= 1e-8, f"worst relative gap {worst:.3e} (limit 1e-8)"


def structural_audit_all() -> tuple:
    """All structural pressure inequalities hold for d in {2, 3, 4}."""
    details = []
    for d in (2, 3, 4):
        model = eos.EosModel(kind=eos.EosKind.FERMI_DIRAC, d=d, mu=1.0)
        try:
            bounds = eos.structural_audit(model, eos.geometric_samples())
        except eos.StructuralViolationError as exc:
            return False, f"d={d}: {exc}"
        p1_exact = (2.0 / (d + 2.0)) * d ** (2.0 / d)
        if abs(model.p1 - p1_exact) > 1e-10 * p1_exact:
            return False, f"d={d}: p1 {model.p1} != {p1_exact}"
        details.append(f"d={d}: C={bounds.growth_constant_C:.4g}")
    return True, "; ".join(details)


def poisson_oracle() -> tuple:
    """Constant-density potential matches the analytic solution, order 2."""
    details = []
    ok = True
    for d, n0 in ((2, 4.0), (3, 3.0)):
        errs = []
        for N in (200, 400):
            g = RadialGrid.uniform(d, 1.0, N)
            phi, _ = g.poisson_solve(np.full(N, n0))
            exact = n0 * (g.r_centers**2 - 1.0) / (2.0 * d)
            errs.append(float(np.max(np.abs(phi - exact))))
        ratio = errs[0] / errs[1]
        ok &= errs[0] <= 1e-3 and 3.2 <= ratio <= 4.8
        details.append(f"d={d}: err {errs[0]:.2e}, ratio {ratio:.2f}")
    return ok, "; ".join(details)


def mass_conservation() -> tuple:
    """Relative mass drift stays below 1e-12 over 1e4 steps in each mode."""
    details = []
    ok = True
    modes = [
        ("isothermal", {"eos.kind": "fermi_dirac"}),
        (
            "microcanonical",
            {
                "eos.kind": "fermi_dirac",
                "mode": {
                    "kind": "microcanonical",
                    "E_target": 0.0148,
                    "bracket": [1e-3, 1e3],
                    "tol": 1e-10,
                },
            },
        ),
        ("relaxed", {"mode": {"kind": "relaxed", "k": 100.0, "theta": 1.0}}),
    ]
    for label, over in modes:
        cfg = _scenario(
            **{"time.max_steps": 10000, "output.cadence_steps": 1000, **over}
        )
        res = evolve.run(cfg)
        drift = abs(res.records[-1].mass - res.records[0].mass) / res.records[0].mass
        ok &= drift <= 1e-12 and res.outcome is evolve.Outcome.COMPLETED
        details.append(f"{label}: drift {drift:.2e}")
    return ok, "; ".join(details)


def _max_w_increase(records):
    worst = -math.inf
    for prev, cur in zip(records, records[1:]):
        worst = max(worst, cur.W - prev.W - 1e-10 * (1.0 + abs(prev.W)))
    return worst


def lyapunov_monotonicity() -> tuple:
    """W never increases along isothermal runs (MB and FD, d = 3)."""
    details = []
    ok = True
    for kind in ("maxwell_boltzmann", "fermi_dirac"):
        cfg = _scenario(**{"eos.kind": kind, "time.max_steps": 1200})
        res = evolve.run(cfg)
        worst = _max_w_increase(res.records)
        ok &= worst <= 0.0 and res.outcome is evolve.Outcome.COMPLETED
        details.append(f"{kind}: slack {worst:.2e}")
    return ok, "; ".join(details)


def polytropic_dissipation() -> tuple:
    """The energy is nonincreasing for the polytropic isothermal run."""
    cfg = _scenario(**{"eos.kind": "polytropic", "time.max_steps": 1200})
    res = evolve.run(cfg)
    worst = -math.inf
    for prev, cur in zip(res.records, res.records[1:]):
        worst = max(worst, cur.E - prev.E - 1e-10 * (1.0 + abs(prev.E)))
    return worst <= 0.0, f"max tolerated E increase slack {worst:.2e}"


def growth_inequality() -> tuple:
    """No growth-bound violations over a 1e4-step isothermal run (d = 3)."""
    cfg = _scenario(
        **{
            "eos.kind": "fermi_dirac",
            "time.max_steps": 10000,
            "output.cadence_steps": 1,
        }
    )
    res = evolve.run(cfg)
    ok = res.growth_violations == 0 and res.outcome is evolve.Outcome.COMPLETED
    return ok, f"violations {res.growth_violations} over {len(res.records) - 1} steps"


def microcanonical_constraint() -> tuple:
    """Energy pinned to the target and round-trip temperature recovery."""
    E_target = 0.0148
    tol = 1e-10
    cfg = _scenario(
        **{
            "eos.kind": "fermi_dirac",
            "time.max_steps": 3000,
            "mode": {
                "kind": "microcanonical",
                "E_target": E_target,
                "bracket": [1e-3, 1e3],
                "tol": tol,
            },
        }
    )
    res = evolve.run(cfg)
    worst_e = max(
        abs(rec.E - E_target) / max(1.0, abs(E_target)) for rec in res.records
    )
    theta_in = all(1e-3 <= rec.theta <= 1e3 for rec in res.records)

    model = eos.EosModel(kind=eos.EosKind.FERMI_DIRAC, d=3, mu=1.0)
    grid = RadialGrid.uniform(3, 1.0, 64)
    rng = np.random.default_rng(20240817)
    worst_rt = 0.0
    for _ in range(50):
        n = rng.uniform(0.1, 2.0, grid.N)
        n *= 1.0 / grid.integrate(n)
        phi, _ = grid.poisson_solve(n)
        theta_star = float(rng.uniform(0.5, 2.0))
        E_star = thermal_energy(grid, model, n, theta_star) + potential_energy(
            grid, n, phi
        )
        got = solve_temperature(grid, model, n, phi, E_star, (1e-3, 1e3), tol)
        worst_rt = max(worst_rt, abs(got - theta_star) / theta_star)
    ok = (
        worst_e <= 1e-6
        and theta_in
        and worst_rt <= 10.0 * tol
        and res.outcome is evolve.Outcome.COMPLETED
    )
    return ok, f"max |E-E_target| {worst_e:.2e}; round-trip {worst_rt:.2e}"


def closed_form_temperature() -> tuple:
    """solve_temperature reproduces (E - U) / ((d/2) M) exactly for MB."""
    model = eos.EosModel(kind=eos.EosKind.MAXWELL_BOLTZMANN, d=3)
    grid = RadialGrid.uniform(3, 1.0, 64)
    rng = np.random.default_rng(20240818)
    worst = 0.0
    for _ in range(20):
        n = rng.uniform(0.1, 2.0, grid.N)
        phi, _ = grid.poisson_solve(n)
        M = grid.integrate(n)
        U = potential_energy(grid, n, phi)
        E = float(rng.uniform(0.5, 3.0))
        exact = (E - U) / (1.5 * M)
        got = solve_temperature(grid, model, n, phi, E, (1e-3, 1e3))
        worst = max(worst, abs(got - exact) / exact)
    return worst <= 1e-12, f"worst relative gap {worst:.3e} (limit 1e-12)"


def elliptic_limit() -> tuple:
    """The relaxed potential approaches the elliptic one as k grows."""
    t_end = 0.02
    base = {"time.t_end": t_end, "time.max_steps": 10**7}
    res_ell = evolve.run(_scenario(**base))
    grid = _scenario(**base).make_grid()
    gaps = []
    for k in (1e2, 1e3, 1e4):
        res_k = evolve.run(
            _scenario(**{**base, "mode": {"kind": "relaxed", "k": k, "theta": 1.0}})
        )
        gaps.append(grid.lp_norm(res_k.state.phi - res_ell.state.phi, 2.0))
    ok = gaps[0] > gaps[1] > gaps[2]
    return ok, "gaps " + ", ".join(f"{g:.3e}" for g in gaps)


def determinism() -> tuple:
    """Two identical CLI runs produce bit-identical CSV output."""
    import json as _json
    import subprocess
    import sys as _sys
    import tempfile
    from pathlib import Path

    doc = {
        "dimension": 3,
        "radius": 1.0,
        "cells": 64,
        "eos": {"kind": "fermi_dirac"},
        "mode": {"kind": "isothermal", "theta": 1.0},
        "initial": {"profile": "gaussian", "amplitude": 1.0, "width": 0.2, "mass": 0.01},
        "time": {"t_end": 1e9, "max_steps": 500},
        "output": {"cadence_steps": 10},
    }
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for tag in ("a", "b"):
            d = dict(doc)
            d["output"] = {"cadence_steps": 10, "path": str(Path(tmp) / tag)}
            cfg_path = Path(tmp) / f"{tag}.json"
            cfg_path.write_text(_json.dumps(d))
            proc = subprocess.run(
                [_sys.executable, "-m", "gravodiff.cli", "run", str(cfg_path)],
                capture_output=True,
                text=True,
            )
            if proc.returncode != 0:
                return False, f"run exited {proc.returncode}: {proc.stderr.strip()}"
            outputs.append((Path(tmp) / f"{tag}.csv").read_bytes())
    same = outputs[0] == outputs[1]
    return same, f"CSV bytes identical: {same} ({len(outputs[0])} bytes)"


CRITERIA = [
    ("fermi-closed-form", fermi_closed_form),
    ("derivative-recursion", derivative_recursion),
    ("sommerfeld-limit", sommerfeld_limit),
    ("fd-pressure-asymptotics", fd_pressure_asymptotics),
    ("diffusion-identity", diffusion_identity),
    ("structural-audit", structural_audit_all),
    ("poisson-oracle", poisson_oracle),
    ("mass-conservation", mass_conservation),
    ("lyapunov-monotonicity", lyapunov_monotonicity),
    ("polytropic-dissipation", polytropic_dissipation),
    ("growth-inequality", growth_inequality),
    ("microcanonical-constraint", microcanonical_constraint),
    ("closed-form-temperature", closed_form_temperature),
    ("elliptic-limit", elliptic_limit),
    ("determinism", determinism),
]


def run_criterion(name: str) -> CriterionResult:
    func = dict(CRITERIA)[name]
    start = time.perf_counter()
    try:
        passed, detail = func()
    except Exception as exc:
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(name, bool(passed), detail, time.perf_counter() - start)


def run_all(verbose: bool = False) -> list:
    results = []
    for name, _func in CRITERIA:
        res = run_criterion(name)
        results.append(res)
        if verbose:
            mark = "PASS" if res.passed else "FAIL"
            print(f"{mark}  {res.name:<28} {res.seconds:7.2f}s  {res.detail}")
    if verbose:
        passed = sum(r.passed for r in results)
        print(f"{passed}/{len(results)} criteria passed")
    return results
