"""Run and sweep configuration: JSON parsing, validation, defaults.

A run configuration is a single JSON document.  Parsing is strict:
unknown keys, missing required fields and invariant violations are all
rejected with a path-qualified message, so a typo never silently falls
back to a default.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .eos import EosKind, EosModel
from .evolve import TimeControl
from .grid import RadialGrid

__all__ = [
    "ConfigError",
    "Mode",
    "ModeSpec",
    "InitialSpec",
    "OutputSpec",
    "ConstantsSpec",
    "RunConfig",
    "SweepPlan",
    "parse_config",
    "parse_sweep",
]

import enum


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class Mode(enum.Enum):
    ISOTHERMAL = "isothermal"
    MICROCANONICAL = "microcanonical"
    RELAXED = "relaxed"


@dataclass(frozen=True)
class ModeSpec:
    kind: Mode
    theta: object = 1.0  # constant or [[t, theta], ...] table
    theta_bounds: tuple = (1e-3, 1e3)
    E_target: float = 0.0
    bracket: tuple = (1e-3, 1e3)
    tol: float = 1e-10
    k: float = 1.0


@dataclass(frozen=True)
class InitialSpec:
    profile: str = "gaussian"
    amplitude: float = 1.0
    width: float = 0.2
    center: float = 0.5
    mass: float | None = None


@dataclass(frozen=True)
class OutputSpec:
    cadence_steps: int = 10
    path: str = "gravodiff_out"


@dataclass(frozen=True)
class ConstantsSpec:
    epsilon: float | None = None
    C_lemma41: float = 1.0
    B_thm45: float = 1.0
    ratio_ceiling: float = 1e3


@dataclass(frozen=True)
class RunConfig:
    d: int
    R: float
    N: int
    refinement: tuple  # ("uniform",) or ("geometric", ratio)
    eos_kind: EosKind
    mu: float
    delta: float
    p1: float | None
    mode: ModeSpec
    initial: InitialSpec
    t_end: float
    cfl_safety: float
    dt_max: float
    max_steps: int
    blowup_threshold: float | None
    output: OutputSpec
    constants: ConstantsSpec

    def make_grid(self) -> RadialGrid:
        if self.refinement[0] == "geometric":
            return RadialGrid.geometric(self.d, self.R, self.N, self.refinement[1])
        return RadialGrid.uniform(self.d, self.R, self.N)

    def eos_model(self) -> EosModel:
        return EosModel(
            kind=self.eos_kind, d=self.d, mu=self.mu, p1=self.p1, delta=self.delta
        )

    def initial_density(self, grid: RadialGrid) -> np.ndarray:
        r = grid.r_centers
        ini = self.initial
        if ini.profile == "constant":
            n = np.full(grid.N, ini.amplitude)
        elif ini.profile == "gaussian":
            n = ini.amplitude * np.exp(-(r**2) / ini.width**2)
        else:  # annulus
            n = ini.amplitude * np.exp(-((r - ini.center) ** 2) / ini.width**2)
        if ini.mass is not None:
            total = grid.integrate(n)
            if total <= 0.0:
                raise ConfigError("initial.mass", "cannot normalize a zero profile")
            n = n * (ini.mass / total)
        return n

    def theta_schedule(self):
        """Temperature schedule theta(t), clamped to theta_bounds."""
        a, b = self.mode.theta_bounds
        spec = self.mode.theta
        if isinstance(spec, (int, float)):
            value = min(max(float(spec), a), b)
            return lambda t: value
        pts = np.asarray(spec, dtype=float)
        ts, vals = pts[:, 0], pts[:, 1]

        def schedule(t):
            return float(min(max(np.interp(t, ts, vals), a), b))

        return schedule

    def time_control(self, grid: RadialGrid) -> TimeControl:
        threshold = self.blowup_threshold
        if threshold is None:
            # Default: a millionfold increase over the initial mean density.
            n0 = self.initial_density(grid)
            mean = grid.integrate(n0) / float(np.sum(grid.cell_volume))
            threshold = 1e6 * mean if mean > 0.0 else math.inf
        return TimeControl(
            t_end=self.t_end,
            cfl_safety=self.cfl_safety,
            dt_max=self.dt_max,
            max_steps=self.max_steps,
            blowup_threshold=threshold,
        )


@dataclass(frozen=True)
class SweepPlan:
    base: dict
    axes: list  # list of (dotted parameter path, value list)
    parallelism: int


def _take(obj: dict, path: str, known: set) -> None:
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
    return obj[key]


def _number(v, path: str, positive=False) -> float:
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(path, f"expected a number, got {v!r}")
    v = float(v)
    if positive and not v > 0.0:
        raise ConfigError(path, f"must be positive, got {v}")
    return v


def parse_config(doc) -> RunConfig:
    """Validate a parsed JSON document (or JSON text) into a RunConfig."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be an object")
    _take(
        doc,
        "<document>",
        {
            "dimension",
            "radius",
            "cells",
            "refinement",
            "eos",
            "mode",
            "initial",
            "time",
            "output",
            "constants",
        },
    )

    d = _require(doc, "dimension", "")
    if d not in (2, 3, 4):
        raise ConfigError("dimension", f"must be 2, 3 or 4, got {d}")
    R = _number(_require(doc, "radius", ""), "radius", positive=True)
    N = _require(doc, "cells", "")
    if not isinstance(N, int) or N < 8:
        raise ConfigError("cells", f"must be an integer >= 8, got {N}")

    ref = doc.get("refinement", {"kind": "uniform"})
    _take(ref, "refinement", {"kind", "ratio"})
    if ref.get("kind", "uniform") == "geometric":
        refinement = ("geometric", _number(_require(ref, "ratio", "refinement"), "refinement.ratio", positive=True))
    elif ref.get("kind", "uniform") == "uniform":
        refinement = ("uniform",)
    else:
        raise ConfigError("refinement.kind", f"unknown refinement {ref.get('kind')!r}")

    e = _require(doc, "eos", "")
    _take(e, "eos", {"kind", "mu", "delta", "p1"})
    try:
        eos_kind = EosKind(_require(e, "kind", "eos"))
    except ValueError:
        raise ConfigError("eos.kind", f"unknown EOS {e.get('kind')!r}") from None
    mu = _number(e.get("mu", 1.0), "eos.mu", positive=True)
    delta = _number(e.get("delta", 1e-3), "eos.delta")
    p1 = None if "p1" not in e else _number(e["p1"], "eos.p1", positive=True)

    m = _require(doc, "mode", "")
    _take(m, "mode", {"kind", "theta", "theta_bounds", "E_target", "bracket", "tol", "k"})
    try:
        kind = Mode(_require(m, "kind", "mode"))
    except ValueError:
        raise ConfigError("mode.kind", f"unknown mode {m.get('kind')!r}") from None
    if kind is Mode.MICROCANONICAL and eos_kind is EosKind.POLYTROPIC:
        raise ConfigError(
            "mode.kind",
            "microcanonical mode needs dp/dtheta > 0; the polytropic "
            "pressure is degenerate (dp/dtheta = 0)",
        )
    theta = m.get("theta", 1.0)
    if not isinstance(theta, (int, float)):
        pts = theta
        if not (
            isinstance(pts, list)
            and pts
            and all(isinstance(p, list) and len(p) == 2 for p in pts)
        ):
            raise ConfigError("mode.theta", "expected a number or [[t, theta], ...]")
        ts = [p[0] for p in pts]
        if sorted(ts) != ts:
            raise ConfigError("mode.theta", "schedule times must be increasing")
    bounds = tuple(m.get("theta_bounds", (1e-3, 1e3)))
    if len(bounds) != 2 or not (0.0 < bounds[0] < bounds[1]):
        raise ConfigError("mode.theta_bounds", f"need 0 < a < b, got {bounds}")
    bracket = tuple(m.get("bracket", (1e-3, 1e3)))
    if len(bracket) != 2 or not (0.0 < bracket[0] < bracket[1]):
        raise ConfigError("mode.bracket", f"need 0 < a < b, got {bracket}")
    if kind is Mode.MICROCANONICAL:
        _require(m, "E_target", "mode")
    if kind is Mode.RELAXED:
        _require(m, "k", "mode")
    mode = ModeSpec(
        kind=kind,
        theta=theta,
        theta_bounds=bounds,
        E_target=_number(m.get("E_target", 0.0), "mode.E_target"),
        bracket=bracket,
        tol=_number(m.get("tol", 1e-10), "mode.tol", positive=True),
        k=_number(m.get("k", 1.0), "mode.k", positive=True),
    )

    ini = _require(doc, "initial", "")
    _take(ini, "initial", {"profile", "amplitude", "width", "center", "mass"})
    profile = ini.get("profile", "gaussian")
    if profile not in ("constant", "gaussian", "annulus"):
        raise ConfigError("initial.profile", f"unknown profile {profile!r}")
    initial = InitialSpec(
        profile=profile,
        amplitude=_number(ini.get("amplitude", 1.0), "initial.amplitude"),
        width=_number(ini.get("width", 0.2), "initial.width", positive=True),
        center=_number(ini.get("center", 0.5), "initial.center"),
        mass=None
        if ini.get("mass") is None
        else _number(ini["mass"], "initial.mass", positive=True),
    )
    if initial.amplitude < 0.0:
        raise ConfigError("initial.amplitude", "must be nonnegative")

    tdoc = _require(doc, "time", "")
    _take(
        tdoc,
        "time",
        {"t_end", "cfl_safety", "dt_max", "max_steps", "blowup_threshold"},
    )
    t_end = _number(_require(tdoc, "t_end", "time"), "time.t_end", positive=True)
    cfl = _number(tdoc.get("cfl_safety", 0.5), "time.cfl_safety", positive=True)
    if cfl > 1.0:
        raise ConfigError("time.cfl_safety", f"must be <= 1, got {cfl}")
    max_steps = tdoc.get("max_steps", 10**7)
    if not isinstance(max_steps, int) or max_steps < 1:
        raise ConfigError("time.max_steps", f"must be a positive integer, got {max_steps}")

    out = doc.get("output", {})
    _take(out, "output", {"cadence_steps", "path"})
    cadence = out.get("cadence_steps", 10)
    if not isinstance(cadence, int) or cadence < 1:
        raise ConfigError("output.cadence_steps", f"must be a positive integer, got {cadence}")
    output = OutputSpec(cadence_steps=cadence, path=str(out.get("path", "gravodiff_out")))

    cdoc = doc.get("constants", {})
    _take(cdoc, "constants", {"epsilon", "C_lemma41", "B_thm45", "ratio_ceiling"})
    constants = ConstantsSpec(
        epsilon=None
        if cdoc.get("epsilon") is None
        else _number(cdoc["epsilon"], "constants.epsilon", positive=True),
        C_lemma41=_number(cdoc.get("C_lemma41", 1.0), "constants.C_lemma41"),
        B_thm45=_number(cdoc.get("B_thm45", 1.0), "constants.B_thm45"),
        ratio_ceiling=_number(cdoc.get("ratio_ceiling", 1e3), "constants.ratio_ceiling"),
    )

    return RunConfig(
        d=d,
        R=R,
        N=N,
        refinement=refinement,
        eos_kind=eos_kind,
        mu=mu,
        delta=delta,
        p1=p1,
        mode=mode,
        initial=initial,
        t_end=t_end,
        cfl_safety=cfl,
        dt_max=_number(tdoc.get("dt_max", math.inf), "time.dt_max", positive=True),
        max_steps=max_steps,
        blowup_threshold=None
        if tdoc.get("blowup_threshold") is None
        else _number(tdoc["blowup_threshold"], "time.blowup_threshold", positive=True),
        output=output,
        constants=constants,
    )


def set_by_path(doc: dict, dotted: str, value) -> None:
    """Assign into a nested JSON document by a dotted key path."""
    keys = dotted.split(".")
    node = doc
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def parse_sweep(doc) -> SweepPlan:
    """Validate a sweep plan: a base config plus axes of parameter values."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be an object")
    _take(doc, "<document>", {"base", "axes", "parallelism"})
    base = _require(doc, "base", "")
    if not isinstance(base, dict):
        raise ConfigError("base", "must be a configuration object")
    parse_config(copy.deepcopy(base))  # validate eagerly
    axes_doc = _require(doc, "axes", "")
    if not isinstance(axes_doc, list) or not axes_doc:
        raise ConfigError("axes", "must be a non-empty list")
    axes = []
    for i, ax in enumerate(axes_doc):
        if not isinstance(ax, dict):
            raise ConfigError(f"axes[{i}]", "must be an object")
        _take(ax, f"axes[{i}]", {"path", "values"})
        path = _require(ax, "path", f"axes[{i}]")
        values = _require(ax, "values", f"axes[{i}]")
        if not isinstance(values, list) or not values:
            raise ConfigError(f"axes[{i}].values", "must be a non-empty list")
        axes.append((str(path), list(values)))
    par = doc.get("parallelism", 0)
    if not isinstance(par, int) or par < 0:
        raise ConfigError("parallelism", f"must be a nonnegative integer, got {par}")
    return SweepPlan(base=base, axes=axes, parallelism=par)
