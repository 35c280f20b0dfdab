"""Monitored functionals and inequality residuals.

Every output time produces one DiagnosticsRecord: mass, the energy and
its thermal/potential split, the asymptotic energy E^a, the neg-entropy
W, the V functional, norms, the step size, and the residuals of the
growth inequality and of W monotonicity.  The record serializes to one
CSV row; the column order is fixed by the field order of the dataclass.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .eos import EosModel
from .microcanonical import potential_energy, thermal_energy
from .tables import tables_for

__all__ = [
    "DiagnosticsRecord",
    "asymptotic_energy",
    "neg_entropy",
    "v_functional",
    "growth_check",
    "make_record",
    "csv_header",
    "csv_row",
]

_DENSITY_FLOOR = 1e-30


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    theta: float
    mass: float
    E: float
    E_thermal: float
    E_potential: float
    E_asymptotic: float
    W: float
    V: float
    n_max: float
    norm_L2_n: float
    norm_L1p2d_n: float
    norm_L2_grad_phi: float
    dt_used: float
    growth_residual: float
    lyapunov_delta: float


def asymptotic_energy(grid, model: EosModel, n, dphi) -> float:
    """E^a = (d/2) p1 * integral of n^(1+2/d) - (1/2) integral of |grad phi|^2."""
    n = np.asarray(n, dtype=float)
    kinetic = (grid.d / 2.0) * model.p1 * grid.integrate(n**model.gamma_exp)
    return kinetic - 0.5 * grid.grad_l2_sq(dphi)


def neg_entropy(grid, model: EosModel, n, theta: float) -> float:
    """W = integral of (n H(z) - (d/2+1) P(z) theta^(d/2)), z = n theta^(-d/2).

    H is the primitive of P'(z)/z based at z = 1, so W carries an
    arbitrary additive multiple of the mass; only differences of W are
    meaningful.  The n H term is dropped on cells with n below 1e-30
    (the n log n -> 0 limit).
    """
    if not theta > 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    n = np.asarray(n, dtype=float)
    half_d = grid.d / 2.0
    tab = tables_for(model)
    z = n * theta**-half_d
    nh = np.zeros_like(n)
    mask = n > _DENSITY_FLOOR
    if np.any(mask):
        nh[mask] = n[mask] * tab.h(z[mask])
    integrand = nh - (half_d + 1.0) * tab.p(z) * theta**half_d
    return float(np.dot(integrand, grid.cell_volume))


def v_functional(grid, model: EosModel, n, phi, dphi) -> float:
    """V = (d/2) p1 * integral of n^(1+2/d) + integral of n phi
    + (1/2) integral of |grad phi|^2.

    Coincides with E^a up to the discrete Green-identity defect, which
    serves as a quadrature-quality metric.
    """
    n = np.asarray(n, dtype=float)
    kinetic = (grid.d / 2.0) * model.p1 * grid.integrate(n**model.gamma_exp)
    return kinetic + grid.integrate(n * np.asarray(phi)) + 0.5 * grid.grad_l2_sq(dphi)


def growth_check(
    prev: DiagnosticsRecord,
    cur: DiagnosticsRecord,
    model: EosModel,
    growth_constant: float | None = None,
    relaxed: bool = False,
) -> float:
    """Residual of the discrete growth inequality between two records.

    Returns (dQ/dt) - C theta^(d/2) ||grad phi||_2^2 with Q the V
    functional in the relaxed coupling and E^a in the elliptic one; a
    positive residual beyond the scheme tolerance marks a violation.
    C defaults to the certified constant d B^2 / (4 (d+2) p1).
    """
    dt = cur.t - prev.t
    if not dt > 0.0:
        raise ValueError("records must be adjacent in time with cur.t > prev.t")
    if growth_constant is None:
        from .eos import audited_bounds

        growth_constant = audited_bounds(model).growth_constant_C
    q_prev = prev.V if relaxed else prev.E_asymptotic
    q_cur = cur.V if relaxed else cur.E_asymptotic
    rhs = growth_constant * prev.theta ** (model.d / 2.0) * prev.norm_L2_grad_phi**2
    return (q_cur - q_prev) / dt - rhs


def make_record(
    grid,
    model: EosModel,
    state,
    dt_used: float,
    prev: DiagnosticsRecord | None = None,
    relaxed: bool = False,
    growth_constant: float = 0.0,
) -> DiagnosticsRecord:
    n = state.n
    e_th = thermal_energy(grid, model, n, state.theta)
    e_pot = potential_energy(grid, n, state.phi)
    rec = DiagnosticsRecord(
        t=state.t,
        theta=state.theta,
        mass=grid.integrate(n),
        E=e_th + e_pot,
        E_thermal=e_th,
        E_potential=e_pot,
        E_asymptotic=asymptotic_energy(grid, model, n, state.dphi),
        W=neg_entropy(grid, model, n, state.theta),
        V=v_functional(grid, model, n, state.phi, state.dphi),
        n_max=float(np.max(n)),
        norm_L2_n=grid.lp_norm(n, 2.0),
        norm_L1p2d_n=grid.lp_norm(n, model.gamma_exp),
        norm_L2_grad_phi=float(np.sqrt(grid.grad_l2_sq(state.dphi))),
        dt_used=dt_used,
        growth_residual=0.0,
        lyapunov_delta=0.0,
    )
    if prev is not None:
        object.__setattr__(
            rec,
            "growth_residual",
            growth_check(prev, rec, model, growth_constant, relaxed=relaxed),
        )
        object.__setattr__(rec, "lyapunov_delta", rec.W - prev.W)
    return rec


def csv_header() -> str:
    return ",".join(f.name for f in fields(DiagnosticsRecord))


def csv_row(rec: DiagnosticsRecord) -> str:
    return ",".join(
        "%.17g" % getattr(rec, f.name) for f in fields(DiagnosticsRecord)
    )
