"""Equation-of-state layer: P(z), its derivatives, the self-similar
pressure p(n, theta) = theta^(d/2+1) P(n theta^(-d/2)), temperature
derivatives, and empirically certified structural constants.

Three built-in models:
  - maxwell_boltzmann: P(z) = z
  - polytropic:        P(z) = p1 * z^(1+2/d)
  - fermi_dirac:       P(z) = (mu/d) * f_{d/2}(f_{d/2-1}^{-1}(2 z / mu))
The Fermi-Dirac pressure interpolates between the linear law at z -> 0
and the polytropic law with p1 = (2/(d+2)) (d/mu)^(2/d) at z -> inf.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit, gammaln

from . import fermi
from .fermi import FermiEvalConfig, fermi_integral, fermi_inverse, fermi_slope

__all__ = [
    "EosKind",
    "EosModel",
    "StructuralBounds",
    "EosDomainError",
    "StructuralViolationError",
    "big_p",
    "big_p_prime",
    "big_p_double_prime",
    "pressure",
    "dp_dtheta",
    "d2p_dtheta2",
    "h_primitive",
    "structural_audit",
    "geometric_samples",
    "audited_bounds",
]

# Exact-path evaluation config; the simulation fast path lives in tables.py.
# The lowered switch_z keeps large-argument audits cheap; the three-term
# degenerate expansion is accurate to ~1e-11 there.
_CFG = FermiEvalConfig(rel_tol=1e-10, switch_z=60.0, max_subdivisions=40000)


class EosDomainError(ValueError):
    """Argument outside the (extended) domain of the pressure profile."""


class StructuralViolationError(RuntimeError):
    """A structural pressure inequality failed at a sample point."""

    def __init__(self, inequality: str, z: float):
        super().__init__(f"structural inequality violated: {inequality} at z={z}")
        self.inequality = inequality
        self.z = z


class EosKind(enum.Enum):
    MAXWELL_BOLTZMANN = "maxwell_boltzmann"
    POLYTROPIC = "polytropic"
    FERMI_DIRAC = "fermi_dirac"


@dataclass(frozen=True)
class EosModel:
    """Immutable EOS selection.

    mu is the single free constant eta0 * G * sigma_d * 2^(d/2); the
    individual physical constants never appear separately.  p1 is the
    polytropic coefficient; for fermi_dirac it is forced to the exact
    value (2/(d+2)) * (d/mu)^(2/d).
    """

    kind: EosKind
    d: int = 3
    mu: float = 1.0
    p1: float | None = None
    delta: float = 1e-3

    def __post_init__(self):
        if self.d not in (2, 3, 4):
            raise ValueError(f"dimension must be 2, 3 or 4, got {self.d}")
        if not self.mu > 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.delta >= 0.0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if self.kind is EosKind.FERMI_DIRAC:
            p1 = (2.0 / (self.d + 2.0)) * (self.d / self.mu) ** (2.0 / self.d)
        elif self.p1 is None:
            p1 = 1.0
        else:
            p1 = float(self.p1)
        if not p1 > 0.0:
            raise ValueError(f"p1 must be positive, got {p1}")
        object.__setattr__(self, "p1", p1)

    @property
    def gamma_exp(self) -> float:
        """Polytropic exponent 1 + 2/d."""
        return 1.0 + 2.0 / self.d


@dataclass(frozen=True)
class StructuralBounds:
    """Empirically certified constants of the pressure inequalities."""

    p0: float
    p2: float
    p3: float
    B: float
    growth_constant_C: float


# --- Fermi-Dirac internals ------------------------------------------------

def _fd_alpha(model: EosModel) -> float:
    return model.d / 2.0 - 1.0


def _fd_x_of_z(model: EosModel, z: float, x0: float | None = None) -> float:
    """Solve f_{d/2-1}(x) = 2 z / mu for the Fermi argument x."""
    y = 2.0 * z / model.mu
    if model.d == 2:
        # f_0(x) = ln(1 + e^x) inverts in closed form.
        if y > 40.0:
            return y + math.log1p(-math.exp(-y))
        return math.log(math.expm1(y))
    alpha = _fd_alpha(model)
    if x0 is None:
        # Asymptotic seed; f_alpha is increasing and convex (its slope
        # alpha*f_{alpha-1} is increasing), so Newton converges globally.
        gamma = math.exp(gammaln(alpha + 1.0))
        if y < gamma:
            x0 = math.log(y / gamma)
        else:
            x0 = ((alpha + 1.0) * y) ** (1.0 / (alpha + 1.0))
    x = x0
    for _ in range(50):
        r = fermi_integral(alpha, x, _CFG) - y
        if abs(r) <= 4.0 * _CFG.rel_tol * y:
            return x
        step = r / (alpha * fermi_integral(alpha - 1.0, x, _CFG))
        x -= step
        if abs(step) <= 1e-13 * (1.0 + abs(x)):
            return x
    return fermi_inverse(alpha, y, _CFG)


def _fd_slope_alpha(model: EosModel, x: float) -> float:
    """f'_{d/2-1}(x); the recursion needs alpha > 0, d = 2 uses expit."""
    alpha = _fd_alpha(model)
    if alpha > 0.0:
        return alpha * fermi_integral(alpha - 1.0, x, _CFG)
    return float(expit(x))


def _fd_curvature_alpha(model: EosModel, x: float) -> float:
    """f''_{d/2-1}(x)."""
    alpha = _fd_alpha(model)
    if alpha == 0.0:
        s = float(expit(x))
        return s * (1.0 - s)
    if alpha - 1.0 > 0.0:
        return alpha * (alpha - 1.0) * fermi_integral(alpha - 2.0, x, _CFG)
    return alpha * fermi_slope(alpha - 1.0, x, _CFG)


def _fd_big_p_at_x(model: EosModel, x: float) -> float:
    return (model.mu / model.d) * fermi_integral(model.d / 2.0, x, _CFG)


def _fd_prime_at_x(model: EosModel, z: float, x: float) -> float:
    # P' = f_{d/2-1}(x) / f'_{d/2-1}(x); the numerator is 2z/mu by definition.
    return (2.0 * z / model.mu) / _fd_slope_alpha(model, x)


def _fd_second_at_x(model: EosModel, z: float, x: float) -> float:
    fa = 2.0 * z / model.mu
    fp = _fd_slope_alpha(model, x)
    fpp = _fd_curvature_alpha(model, x)
    return (1.0 - fa * fpp / fp**2) * (2.0 / model.mu) / fp


@lru_cache(maxsize=None)
def _ext_coeffs(model: EosModel) -> tuple[float, float]:
    """(P'(0+), P''(0+)) for the quadratic extension to [-delta, 0)."""
    if model.kind is EosKind.MAXWELL_BOLTZMANN:
        return 1.0, 0.0
    if model.kind is EosKind.POLYTROPIC:
        return 0.0, 0.0
    z0 = 1e-9
    x = _fd_x_of_z(model, z0)
    return 1.0, _fd_second_at_x(model, z0, x)


def _check_domain(model: EosModel, z: float) -> None:
    if z < -model.delta:
        raise EosDomainError(
            f"z={z} below the extended domain [-{model.delta}, inf)"
        )


# --- Pressure profile and derivatives --------------------------------------

def big_p(model: EosModel, z: float) -> float:
    """Dimensionless pressure P(z)."""
    z = float(z)
    _check_domain(model, z)
    if z < 0.0:
        c1, c2 = _ext_coeffs(model)
        return c1 * z + 0.5 * c2 * z * z
    if z == 0.0:
        return 0.0
    if model.kind is EosKind.MAXWELL_BOLTZMANN:
        return z
    if model.kind is EosKind.POLYTROPIC:
        return model.p1 * z**model.gamma_exp
    return _fd_big_p_at_x(model, _fd_x_of_z(model, z))


def big_p_prime(model: EosModel, z: float) -> float:
    """P'(z); for fermi_dirac this equals the kinetic diffusion coefficient."""
    z = float(z)
    _check_domain(model, z)
    if z < 0.0:
        c1, c2 = _ext_coeffs(model)
        return c1 + c2 * z
    if model.kind is EosKind.MAXWELL_BOLTZMANN:
        return 1.0
    if model.kind is EosKind.POLYTROPIC:
        return model.p1 * model.gamma_exp * z ** (2.0 / model.d)
    if z == 0.0:
        return 1.0
    return _fd_prime_at_x(model, z, _fd_x_of_z(model, z))


def big_p_double_prime(model: EosModel, z: float) -> float:
    """P''(z)."""
    z = float(z)
    _check_domain(model, z)
    if z < 0.0:
        return _ext_coeffs(model)[1]
    if model.kind is EosKind.MAXWELL_BOLTZMANN:
        return 0.0
    if model.kind is EosKind.POLYTROPIC:
        e = 2.0 / model.d
        if z == 0.0:
            return 0.0 if e >= 1.0 else math.inf
        return model.p1 * model.gamma_exp * e * z ** (e - 1.0)
    if z == 0.0:
        return _ext_coeffs(model)[1]
    return _fd_second_at_x(model, z, _fd_x_of_z(model, z))


def pressure(model: EosModel, n: float, theta: float) -> float:
    """Physical pressure p(n, theta) = theta^(d/2+1) P(n theta^(-d/2))."""
    if not theta > 0.0:
        raise EosDomainError(f"theta must be positive, got {theta}")
    if n < 0.0:
        raise EosDomainError(f"density must be nonnegative, got {n}")
    half_d = model.d / 2.0
    return theta ** (half_d + 1.0) * big_p(model, n * theta**-half_d)


def dp_dtheta(model: EosModel, n: float, theta: float) -> float:
    """d/dtheta of the physical pressure.

    Equals -(d/2) theta^(d/2) (P'(z) z - (1+2/d) P(z)) with z = n theta^(-d/2);
    identically zero in the polytropic case where P' z = (1+2/d) P exactly.
    """
    if not theta > 0.0:
        raise EosDomainError(f"theta must be positive, got {theta}")
    if n < 0.0:
        raise EosDomainError(f"density must be nonnegative, got {n}")
    if model.kind is EosKind.POLYTROPIC:
        return 0.0
    half_d = model.d / 2.0
    z = n * theta**-half_d
    return -half_d * theta**half_d * (
        big_p_prime(model, z) * z - model.gamma_exp * big_p(model, z)
    )


def d2p_dtheta2(model: EosModel, n: float, theta: float) -> float:
    """Second theta-derivative of the physical pressure."""
    if not theta > 0.0:
        raise EosDomainError(f"theta must be positive, got {theta}")
    if n < 0.0:
        raise EosDomainError(f"density must be nonnegative, got {n}")
    if model.kind is EosKind.POLYTROPIC:
        return 0.0
    half_d = model.d / 2.0
    z = n * theta**-half_d
    bracket = (
        big_p_double_prime(model, z) * z * z
        - model.gamma_exp * big_p_prime(model, z) * z
        + model.gamma_exp * big_p(model, z)
    )
    return half_d**2 * theta ** (half_d - 1.0) * bracket


@lru_cache(maxsize=None)
def _h_base_x(model: EosModel) -> float:
    return _fd_x_of_z(model, 1.0)


def h_primitive(model: EosModel, z: float) -> float:
    """H(z) = integral from 1 to z of P'(s)/s ds.

    maxwell_boltzmann: ln z.  polytropic: closed power form.  fermi_dirac:
    because dz = (mu/2) f'_{d/2-1}(x) dx and P'(z)/z = 2/(mu f'_{d/2-1}(x)),
    the primitive is exactly the Fermi argument shift x(z) - x(1).
    """
    z = float(z)
    if not z > 0.0:
        raise EosDomainError(f"h_primitive needs z > 0, got {z}")
    if model.kind is EosKind.MAXWELL_BOLTZMANN:
        return math.log(z)
    if model.kind is EosKind.POLYTROPIC:
        e = 2.0 / model.d
        return model.p1 * model.gamma_exp / e * (z**e - 1.0)
    return _fd_x_of_z(model, z) - _h_base_x(model)


# --- Structural audit -------------------------------------------------------

def geometric_samples(lo: float = 1e-6, hi: float = 1e6, count: int = 400) -> np.ndarray:
    return np.geomspace(lo, hi, count)


def structural_audit(model: EosModel, z_samples) -> StructuralBounds:
    """Certify the structural constants over a geometric sample set.

    Checks, where they are claimed for the model family:
      - P' > 0 everywhere (p0 = sampled minimum);
      - P(z) z^(-1-2/d) nonincreasing (uniqueness of the temperature);
      - lower sandwich p1 z^(2/d) <= P' and p1 z^(1+2/d) <= P
        (polytropic and fermi_dirac; maxwell_boltzmann has no polytropic
        lower limb);
      - strict P'(z) z < (1+2/d) P(z) (fermi_dirac).
    p2, p3 and B are sampled suprema; the growth constant is
    d B^2 / (4 (d+2) p1).
    """
    z = np.sort(np.asarray(z_samples, dtype=float))
    if z.size < 8 or z[0] > 1e-6 * (1 + 1e-12) or z[-1] < 1e6 * (1 - 1e-12):
        raise ValueError("z_samples must cover [1e-6, 1e6] geometrically")
    if np.any(z <= 0.0):
        raise ValueError("z_samples must be positive")

    n = z.size
    P = np.empty(n)
    Pp = np.empty(n)
    Ppp = np.empty(n)
    if model.kind is EosKind.FERMI_DIRAC:
        x = None
        for i, zi in enumerate(z):
            x = _fd_x_of_z(model, zi, x0=x)
            P[i] = _fd_big_p_at_x(model, x)
            Pp[i] = _fd_prime_at_x(model, zi, x)
            Ppp[i] = _fd_second_at_x(model, zi, x)
    else:
        for i, zi in enumerate(z):
            P[i] = big_p(model, zi)
            Pp[i] = big_p_prime(model, zi)
            Ppp[i] = big_p_double_prime(model, zi)

    if np.any(Pp <= 0.0):
        raise StructuralViolationError("P'(z) > 0", z[int(np.argmin(Pp))])
    p0 = float(Pp.min())

    ratio = P * z ** (-model.gamma_exp)
    bad = np.nonzero(ratio[1:] > ratio[:-1] * (1.0 + 1e-9))[0]
    if bad.size:
        raise StructuralViolationError(
            "P(z) z^(-1-2/d) nonincreasing", z[int(bad[0]) + 1]
        )

    e = 2.0 / model.d
    if model.kind is not EosKind.MAXWELL_BOLTZMANN:
        low_pp = model.p1 * z**e
        bad = np.nonzero(low_pp > Pp * (1.0 + 1e-9))[0]
        if bad.size:
            raise StructuralViolationError("p1 z^(2/d) <= P'(z)", z[int(bad[0])])
        low_p = model.p1 * z**model.gamma_exp
        bad = np.nonzero(low_p > P * (1.0 + 1e-9))[0]
        if bad.size:
            raise StructuralViolationError("p1 z^(1+2/d) <= P(z)", z[int(bad[0])])

    if model.kind is EosKind.FERMI_DIRAC:
        bad = np.nonzero(Pp * z >= model.gamma_exp * P)[0]
        if bad.size:
            raise StructuralViolationError(
                "P'(z) z < (1+2/d) P(z)", z[int(bad[0])]
            )

    p2 = float(max((Pp / (1.0 + z**e)).max(), (P / (1.0 + z**model.gamma_exp)).max()))
    p3 = float(max((z * Ppp / (1.0 + z**e)).max(), 0.0))
    r_prime = Pp - model.p1 * model.gamma_exp * z**e
    B = float(np.abs(r_prime * z ** (0.5 - 1.0 / model.d)).max())
    growth_c = model.d * B * B / (4.0 * (model.d + 2.0) * model.p1)
    return StructuralBounds(p0=p0, p2=p2, p3=p3, B=B, growth_constant_C=growth_c)


@lru_cache(maxsize=None)
def audited_bounds(model: EosModel) -> StructuralBounds:
    """Structural constants over the default sample grid, cached per model."""
    return structural_audit(model, geometric_samples())
