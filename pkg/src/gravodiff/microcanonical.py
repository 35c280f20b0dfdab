"""Energy bookkeeping and the fixed-energy temperature solve.

The total energy splits as E = E_thermal(theta) + E_potential, with

    E_thermal = (d/2) * integral of theta^(d/2+1) P(n theta^(-d/2))
    E_potential = (1/2) * integral of n phi  (nonpositive).

For models with dp/dtheta > 0 the thermal term is strictly increasing in
theta, so the energy relation pins the temperature uniquely; the solver
brackets it by bisection and polishes with Newton steps using
(d/2) * integral of dp/dtheta.  The polytropic model has dp/dtheta
identically zero and admits no temperature solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eos import EosKind, EosModel
from .tables import tables_for

__all__ = [
    "EnergyBudget",
    "DegenerateEosError",
    "BracketExitError",
    "thermal_energy",
    "potential_energy",
    "solve_temperature",
    "admissibility_report",
    "AdmissibilityCheck",
]


class DegenerateEosError(ValueError):
    """The EOS has dp/dtheta = 0, so no temperature is defined by E."""


class BracketExitError(RuntimeError):
    """Target energy outside the range attainable over the bracket."""

    def __init__(self, E_target: float, attainable: tuple):
        super().__init__(
            f"energy target {E_target} outside attainable range {attainable}"
        )
        self.E_target = E_target
        self.attainable = attainable


@dataclass(frozen=True)
class EnergyBudget:
    """Energy split at one instant plus the admissible temperature window."""

    E_target: float
    thermal: float
    potential: float
    bracket: tuple

    def __post_init__(self):
        a, b = self.bracket
        if not (0.0 < a < b):
            raise ValueError(f"bracket must satisfy 0 < a < b, got {self.bracket}")
        if self.thermal < 0.0:
            raise ValueError(f"thermal energy must be nonnegative, got {self.thermal}")
        if self.potential > 0.0:
            raise ValueError(f"potential energy must be nonpositive, got {self.potential}")


def thermal_energy(grid, model: EosModel, n, theta: float) -> float:
    """(d/2) * integral of theta^(d/2+1) P(n theta^(-d/2))."""
    if not theta > 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    half_d = grid.d / 2.0
    tab = tables_for(model)
    z = np.asarray(n, dtype=float) * theta**-half_d
    return half_d * theta ** (half_d + 1.0) * float(
        np.dot(tab.p(z), grid.cell_volume)
    )


def potential_energy(grid, n, phi) -> float:
    """(1/2) * integral of n phi; nonpositive for n >= 0, phi <= 0."""
    return 0.5 * grid.integrate(np.asarray(n) * np.asarray(phi))


def _d_thermal(grid, model: EosModel, n, theta: float) -> float:
    """d/dtheta of thermal_energy, via the dp/dtheta formula."""
    half_d = grid.d / 2.0
    tab = tables_for(model)
    z = np.asarray(n, dtype=float) * theta**-half_d
    bracket = tab.p_prime(z) * z - model.gamma_exp * tab.p(z)
    return -(half_d**2) * theta**half_d * float(np.dot(bracket, grid.cell_volume))


def solve_temperature(
    grid,
    model: EosModel,
    n,
    phi,
    E_target: float,
    bracket,
    tol: float = 1e-10,
    seed: float | None = None,
) -> float:
    """Solve E_thermal(theta) + E_potential = E_target for theta in [a, b]."""
    if model.kind is EosKind.POLYTROPIC:
        raise DegenerateEosError(
            "polytropic pressure has dp/dtheta = 0; the energy relation "
            "does not determine a temperature"
        )
    a, b = float(bracket[0]), float(bracket[1])
    if not (0.0 < a < b):
        raise ValueError(f"bracket must satisfy 0 < a < b, got {bracket}")
    n = np.asarray(n, dtype=float)
    U = potential_energy(grid, n, phi)
    target = E_target - U
    scale = tol * max(1.0, abs(E_target))

    if model.kind is EosKind.MAXWELL_BOLTZMANN:
        # E_thermal = (d/2) theta M exactly.
        M = grid.integrate(n)
        if M <= 0.0:
            raise DegenerateEosError("zero mass leaves the temperature undefined")
        theta = target / ((grid.d / 2.0) * M)
        if theta < a or theta > b:
            lo = (grid.d / 2.0) * M * a + U
            hi = (grid.d / 2.0) * M * b + U
            raise BracketExitError(E_target, (lo, hi))
        return theta

    lo_E = thermal_energy(grid, model, n, a)
    hi_E = thermal_energy(grid, model, n, b)
    if target < lo_E - scale or target > hi_E + scale:
        raise BracketExitError(E_target, (lo_E + U, hi_E + U))
    if hi_E <= lo_E:
        raise DegenerateEosError("thermal energy not increasing on the bracket")

    lo, hi = a, b
    theta = seed if seed is not None and a <= seed <= b else math.sqrt(a * b)
    for _ in range(200):
        g = thermal_energy(grid, model, n, theta) - target
        if abs(g) <= scale:
            return min(max(theta, a), b)
        if g > 0.0:
            hi = theta
        else:
            lo = theta
        slope = _d_thermal(grid, model, n, theta)
        step_ok = False
        if slope > 0.0:
            cand = theta - g / slope
            if lo < cand < hi:
                theta = cand
                step_ok = True
        if not step_ok:
            theta = 0.5 * (lo + hi)
    raise BracketExitError(E_target, (lo_E + U, hi_E + U))


@dataclass(frozen=True)
class AdmissibilityCheck:
    """One evaluated inequality; passed is None when not applicable."""

    name: str
    lhs: float
    rhs: float
    passed: bool | None


def admissibility_report(
    grid,
    model: EosModel,
    n,
    phi,
    theta: float,
    E: float,
    M: float,
    epsilon: float | None = None,
    C: float = 1.0,
    B: float = 1.0,
) -> list:
    """Evaluate the a-priori energy inequalities as diagnostics.

    With nu = 4/(d(4-d)) (d < 4) the checks are
      - E + C M^(1+nu) >= epsilon * integral of n^(1+2/d)
      - E + C M^(1+nu) >= |phi|_2^2
      - E >= epsilon * thermal integrand + |integral of n phi| - C M^(1+nu)
      - E < B M^(1+2/d) - C M^(1+nu)  (admissible-energy window).
    At d = 4 the exponent nu is undefined and every check is reported as
    not-applicable.  The constants are caller-supplied; the default
    epsilon is p1 d / 4.
    """
    n = np.asarray(n, dtype=float)
    if epsilon is None:
        epsilon = model.p1 * grid.d / 4.0
    d = grid.d
    if d >= 4:
        return [
            AdmissibilityCheck(name, math.nan, math.nan, None)
            for name in (
                "energy-bounds-density",
                "energy-bounds-potential",
                "energy-lower-bound",
                "admissible-window",
            )
        ]
    nu = 4.0 / (d * (4.0 - d))
    lift = E + C * M ** (1.0 + nu)
    dens = epsilon * grid.integrate(n**model.gamma_exp)
    pot2 = grid.lp_norm(phi, 2.0) ** 2
    therm = thermal_energy(grid, model, n, theta) / (d / 2.0)
    nphi = abs(grid.integrate(n * np.asarray(phi)))
    window = B * M ** (1.0 + 2.0 / d) - C * M ** (1.0 + nu)
    return [
        AdmissibilityCheck("energy-bounds-density", lift, dens, lift >= dens),
        AdmissibilityCheck("energy-bounds-potential", lift, pot2, lift >= pot2),
        AdmissibilityCheck(
            "energy-lower-bound",
            E,
            epsilon * therm + nphi - C * M ** (1.0 + nu),
            E >= epsilon * therm + nphi - C * M ** (1.0 + nu),
        ),
        AdmissibilityCheck("admissible-window", E, window, E < window),
    ]
