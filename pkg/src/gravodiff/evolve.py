"""Conservative time integration of the density equation.

Two couplings of the potential are supported: elliptic, where phi solves
the Poisson problem after every density update, and relaxed, where phi
obeys the damped parabolic equation phi_t = k (Laplacian(phi) - n) and
the elliptic coupling is recovered as k grows.

The density update is an explicit conservative finite-volume step: at
each interior face the flux is

    F = theta P'(z_f)^2 (n_out - n_in) / dr + n_donor P'(z_f) phi'_f

with z_f the arithmetic mean of the adjacent cell values of
z = n theta^(-d/2) and the donor cell picked by the sign of the drift.
Boundary faces carry zero flux, so the telescoping update conserves mass
to roundoff.  The step size combines the diffusive/advective face CFL
limits with a per-cell positivity bound (dt times the total outflow
coefficient of a cell never exceeds its volume), so densities stay
nonnegative without limiters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .eos import EosModel, audited_bounds
from .grid import RadialGrid
from .tables import tables_for

__all__ = [
    "State",
    "TimeControl",
    "RelaxationParams",
    "Outcome",
    "RunResult",
    "StepFailureError",
    "UndefinedResidualError",
    "step_elliptic",
    "step_relaxed",
    "steady_state_residual",
    "run",
]


class StepFailureError(RuntimeError):
    """Time step underflow or linear-solve failure."""


class UndefinedResidualError(RuntimeError):
    """Steady-state residual requested on an (almost) empty density."""


class Outcome(enum.Enum):
    COMPLETED = "completed"
    BLOWUP_DETECTED = "blowup-detected"
    TEMPERATURE_BRACKET_EXIT = "temperature-bracket-exit"
    STEP_FAILURE = "step-failure"


@dataclass
class State:
    """Simulation state: time, cell density, cell potential, face gradient
    of the potential, and the current temperature."""

    t: float
    n: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    theta: float


@dataclass(frozen=True)
class TimeControl:
    t_end: float
    cfl_safety: float = 0.5
    dt_max: float = np.inf
    max_steps: int = 10**7
    blowup_threshold: float = np.inf

    def __post_init__(self):
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if not self.dt_max > 0.0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class RelaxationParams:
    k: float

    def __post_init__(self):
        if not self.k > 0.0:
            raise ValueError(f"relaxation rate k must be positive, got {self.k}")


def _density_update(grid, model, state, tc, include_drift):
    """One explicit density step; returns (n_new, dt)."""
    n = state.n
    theta = state.theta
    half_d = grid.d / 2.0
    tab = tables_for(model)

    zc = n * theta**-half_d
    z_f = 0.5 * (zc[:-1] + zc[1:])
    pp = tab.p_prime(z_f)
    diff = theta * pp**2
    dr = np.diff(grid.r_centers)
    if include_drift:
        u = pp * state.dphi[1:-1]
    else:
        u = np.zeros_like(pp)

    # Interior face flux; positive flux transports mass inward (toward the
    # cell with the smaller radius), so the donor for u > 0 is the outer cell.
    flux = diff * (n[1:] - n[:-1]) / dr + np.where(u > 0.0, u * n[1:], u * n[:-1])

    area = grid.face_area[1:-1]
    vol = grid.cell_volume
    rate_out = area * (diff / dr + np.maximum(-u, 0.0))
    rate_in = area * (diff / dr + np.maximum(u, 0.0))
    # out[j]: total coefficient draining cell j through both of its faces.
    out = np.zeros_like(n)
    out[:-1] += rate_out
    out[1:] += rate_in
    with np.errstate(divide="ignore"):
        dt_pos = float(np.min(np.where(out > 0.0, vol / out, np.inf)))
        dt_face = float(
            np.min(
                np.minimum(
                    dr**2 / (2.0 * diff),
                    np.where(u != 0.0, dr / np.abs(u), np.inf),
                )
            )
        ) if flux.size else np.inf
    dt = tc.cfl_safety * min(dt_pos, dt_face)
    dt = min(dt, tc.dt_max)
    if not dt > 0.0 or dt < 1e-15 * max(abs(state.t), 1.0):
        raise StepFailureError(f"time step underflow: dt={dt} at t={state.t}")
    # The clamp to the remaining time may legitimately be tiny on the final
    # step, so it is applied only after the underflow check above.
    remaining = tc.t_end - state.t
    if not remaining > 0.0:
        raise StepFailureError(f"no time remaining at t={state.t}")
    dt = min(dt, remaining)

    af = grid.face_area * np.concatenate(([0.0], flux, [0.0]))
    n_new = n + dt * (af[1:] - af[:-1]) / vol
    lo = float(n_new.min())
    if lo < 0.0:
        if lo < -1e-14 * max(float(n_new.max()), 1e-300):
            raise StepFailureError(f"negative density {lo} at t={state.t}")
        np.clip(n_new, 0.0, None, out=n_new)
    return n_new, dt


def step_elliptic(grid, model, state, theta_of_t, tc, include_drift=True):
    """One explicit step of the elliptically coupled system.

    `include_drift=False` zeroes the gravitational drift (pure-diffusion
    test hook).  Returns the new state; phi is re-solved from the updated
    density and theta follows the schedule at the new time.
    """
    n_new, dt = _density_update(grid, model, state, tc, include_drift)
    phi, dphi = grid.poisson_solve(n_new)
    t_new = state.t + dt
    return State(t=t_new, n=n_new, phi=phi, dphi=dphi, theta=float(theta_of_t(t_new)))


def _relaxed_phi_step(grid, phi, n, k, dt):
    """Backward-Euler step of phi_t = k (Laplacian(phi) - n), phi(R) = 0."""
    N = grid.N
    area = grid.face_area
    vol = grid.cell_volume
    dc = np.diff(grid.r_centers)
    # Face conductances; the outer face couples to the Dirichlet value 0
    # at r = R through the half-cell distance.
    cond = np.zeros(N + 1)
    cond[1:N] = area[1:N] / dc
    cond[N] = area[N] / (grid.R - grid.r_centers[-1])

    w = k * dt / vol
    lower = np.zeros(N)
    upper = np.zeros(N)
    diag = 1.0 + w * (cond[:-1] + cond[1:])
    upper[1:] = -w[:-1] * cond[1:N]
    lower[:-1] = -w[1:] * cond[1:N]
    rhs = phi - k * dt * n

    from scipy.linalg import solve_banded

    ab = np.vstack([upper, diag, lower])
    try:
        phi_new = solve_banded((1, 1), ab, rhs)
    except Exception as exc:
        raise StepFailureError(f"potential solve failed: {exc}") from exc
    if not np.all(np.isfinite(phi_new)):
        raise StepFailureError("potential solve produced non-finite values")

    dphi = np.zeros(N + 1)
    dphi[1:N] = (phi_new[1:] - phi_new[:-1]) / dc
    dphi[N] = (0.0 - phi_new[-1]) / (grid.R - grid.r_centers[-1])
    return phi_new, dphi


def step_relaxed(grid, model, state, rp, theta_of_t, tc):
    """One step of the relaxed system: explicit density update with the
    lagged potential, then an implicit potential update."""
    n_new, dt = _density_update(grid, model, state, tc, include_drift=True)
    phi, dphi = _relaxed_phi_step(grid, state.phi, n_new, rp.k, dt)
    t_new = state.t + dt
    return State(t=t_new, n=n_new, phi=phi, dphi=dphi, theta=float(theta_of_t(t_new)))


def steady_state_residual(grid, model, state) -> float:
    """Spatial standard deviation of theta*H(n theta^(-d/2)) + phi over the
    cells carrying density; zero for an exact steady state."""
    n = state.n
    mask = n > 1e-12 * float(n.max(initial=0.0))
    if not np.any(mask):
        raise UndefinedResidualError("all cells below the density threshold")
    tab = tables_for(model)
    z = n[mask] * state.theta ** -(grid.d / 2.0)
    vals = state.theta * tab.h(z) + state.phi[mask]
    return float(np.std(vals))


@dataclass
class RunResult:
    outcome: Outcome
    state: State
    records: list = field(default_factory=list)
    growth_violations: int = 0


def run(config) -> RunResult:
    """Integrate a configured scenario and collect diagnostics records."""
    from . import diagnostics
    from .config import Mode
    from .microcanonical import BracketExitError, solve_temperature

    grid = config.make_grid()
    model = config.eos_model()
    tc = config.time_control(grid)
    n = config.initial_density(grid)
    phi, dphi = grid.poisson_solve(n)
    mode = config.mode.kind

    if mode is Mode.MICROCANONICAL:
        try:
            theta = solve_temperature(
                grid,
                model,
                n,
                phi,
                config.mode.E_target,
                config.mode.bracket,
                config.mode.tol,
            )
        except BracketExitError:
            state = State(t=0.0, n=n, phi=phi, dphi=dphi, theta=float("nan"))
            return RunResult(
                outcome=Outcome.TEMPERATURE_BRACKET_EXIT, state=state, records=[]
            )
        theta_of_t = None
    else:
        theta_of_t = config.theta_schedule()
        theta = float(theta_of_t(0.0))
    state = State(t=0.0, n=n, phi=phi, dphi=dphi, theta=theta)

    relaxed = mode is Mode.RELAXED
    if relaxed:
        # The relaxed system starts from zero potential.
        state.phi = np.zeros(grid.N)
        state.dphi = np.zeros(grid.N + 1)
        rp = RelaxationParams(k=config.mode.k)

    growth_c = audited_bounds(model).growth_constant_C
    dr_min = float(np.min(np.diff(grid.r_faces)))
    cadence = config.output.cadence_steps

    records = [diagnostics.make_record(grid, model, state, dt_used=0.0)]
    violations = 0
    outcome = Outcome.COMPLETED
    steps = 0

    def emit():
        nonlocal violations
        rec = diagnostics.make_record(
            grid,
            model,
            state,
            dt_used=dt,
            prev=records[-1],
            relaxed=relaxed,
            growth_constant=growth_c,
        )
        d_t = rec.t - records[-1].t
        if rec.growth_residual > 10.0 * (d_t + dr_min**2):
            violations += 1
        records.append(rec)

    while state.t < tc.t_end and steps < tc.max_steps:
        t_prev = state.t
        try:
            if relaxed:
                state = step_relaxed(grid, model, state, rp, theta_of_t, tc)
            elif mode is Mode.MICROCANONICAL:
                state = step_elliptic(
                    grid, model, state, lambda _t: state.theta, tc
                )
                state.theta = solve_temperature(
                    grid,
                    model,
                    state.n,
                    state.phi,
                    config.mode.E_target,
                    config.mode.bracket,
                    config.mode.tol,
                    seed=state.theta,
                )
            else:
                state = step_elliptic(grid, model, state, theta_of_t, tc)
        except StepFailureError:
            outcome = Outcome.STEP_FAILURE
            break
        except BracketExitError:
            outcome = Outcome.TEMPERATURE_BRACKET_EXIT
            break
        dt = state.t - t_prev
        steps += 1
        if float(state.n.max()) > tc.blowup_threshold:
            outcome = Outcome.BLOWUP_DETECTED
            emit()
            break
        if steps % cadence == 0:
            emit()

    if outcome is Outcome.COMPLETED and steps and steps % cadence != 0:
        emit()
    return RunResult(
        outcome=outcome,
        state=state,
        records=records,
        growth_violations=violations,
    )
