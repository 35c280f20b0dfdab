"""Evaluation of Fermi functions f_alpha, their inverses and derivatives.

f_alpha(z) = integral over x in (0, inf) of x^alpha / (1 + exp(x - z)),
defined for alpha > -1.  Evaluation strategy: adaptive Gauss-Legendre
quadrature with the integration range split at the sigmoid transition,
a power substitution absorbing the x^alpha endpoint singularity, and
geometrically graded panels on the exponentially decaying tail.  Far in
the degenerate regime (large z) a Sommerfeld form is used instead to avoid the
catastrophic cancellation a direct quadrature would suffer in
asymptotic checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

__all__ = [
    "FermiOrder",
    "FermiEvalConfig",
    "DEFAULT_CONFIG",
    "FermiEvaluationError",
    "FermiRangeError",
    "UnsupportedOrderError",
    "fermi_integral",
    "fermi_inverse",
    "fermi_derivative",
    "sommerfeld_limit_residual",
]

_PI2_6 = math.pi**2 / 6.0
_7PI4_360 = 7.0 * math.pi**4 / 360.0

# 24-point Gauss-Legendre rule on [-1, 1]; panels are bisected adaptively.
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(24)


class UnsupportedOrderError(ValueError):
    """Order outside the domain of definition (or of the recursion)."""


class FermiEvaluationError(RuntimeError):
    """Quadrature failed to converge within the subdivision budget."""

    def __init__(self, alpha: float, z: float, message: str):
        super().__init__(f"{message} (alpha={alpha}, z={z})")
        self.alpha = alpha
        self.z = z


class FermiRangeError(RuntimeError):
    """Bracket expansion for the inverse exceeded its limits."""


@dataclass(frozen=True)
class FermiOrder:
    """Order alpha of a Fermi function; must satisfy alpha > -1."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > -1.0:
            raise UnsupportedOrderError(
                f"Fermi order must satisfy alpha > -1, got {self.alpha}"
            )


@dataclass(frozen=True)
class FermiEvalConfig:
    """Accuracy/branching knobs for Fermi function evaluation.

    rel_tol: target relative accuracy of the quadrature.
    switch_z: argument above which the two-term degenerate expansion
        z^(a+1)/(a+1) + a*(pi^2/6)*z^(a-1) replaces the quadrature.
    max_subdivisions: budget of adaptive panel bisections.
    """

    rel_tol: float = 1e-10
    switch_z: float = 200.0
    max_subdivisions: int = 4000

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-6):
            raise ValueError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if self.switch_z < 20.0:
            raise ValueError(f"switch_z must be >= 20, got {self.switch_z}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


DEFAULT_CONFIG = FermiEvalConfig()


def _alpha_of(order) -> float:
    if isinstance(order, FermiOrder):
        return order.alpha
    return FermiOrder(float(order)).alpha


def _panel(f, a: float, b: float) -> float:
    h = 0.5 * (b - a)
    return h * float(np.dot(_WEIGHTS, f(0.5 * (a + b) + h * _NODES)))


def _adaptive(f, edges, abs_tol, budget, alpha, z) -> float:
    total = 0.0
    pairs = list(zip(edges[:-1], edges[1:]))
    tol0 = abs_tol / len(pairs)
    stack = [(a, b, _panel(f, a, b), tol0) for a, b in pairs]
    while stack:
        lo, hi, coarse, tol = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        if abs(left + right - coarse) <= tol or (hi - lo) <= 1e-14 * (abs(lo) + abs(hi) + 1.0):
            total += left + right
        else:
            budget[0] -= 1
            if budget[0] < 0:
                raise FermiEvaluationError(alpha, z, "quadrature did not converge")
            stack.append((lo, mid, left, 0.5 * tol))
            stack.append((mid, hi, right, 0.5 * tol))
    return total


def _sommerfeld(alpha: float, z: float, deriv: bool = False) -> float:
    # Degenerate expansion; the third term keeps the truncation error at
    # O(z^(alpha-5)), well below rel_tol at any admissible switch_z.
    a = alpha
    if deriv:
        return (
            z**a
            + a * (a - 1.0) * _PI2_6 * z ** (a - 2.0)
            + a * (a - 1.0) * (a - 2.0) * (a - 3.0) * _7PI4_360 * z ** (a - 4.0)
        )
    return (
        z ** (a + 1.0) / (a + 1.0)
        + a * _PI2_6 * z ** (a - 1.0)
        + a * (a - 1.0) * (a - 2.0) * _7PI4_360 * z ** (a - 3.0)
    )


def _quadrature(alpha: float, z: float, cfg: FermiEvalConfig, deriv: bool) -> float:
    """Quadrature of x^alpha * s(x) with s = expit(z-x) (or its z-derivative)."""
    # Interior [0, split] takes the algebraic endpoint; the tail picks up
    # the exponential decay.  With alpha < 0 the split must stay away from
    # x = 0 so the log-mapped tail sees no endpoint singularity.
    split = max(z, 0.0)
    if alpha < 0.0:
        split = max(split, 1.0)
    budget = [cfg.max_subdivisions]
    total = 0.0

    if split > 0.0:
        m = 1 if alpha >= 0.0 else math.ceil(1.0 / (alpha + 1.0))
        q = m * (alpha + 1.0) - 1.0
        c = m * split ** (alpha + 1.0)

        if deriv:
            def f_int(u):
                w = z - split * u**m
                return c * u**q * expit(w) * expit(-w)
        else:
            def f_int(u):
                return c * u**q * expit(z - split * u**m)

        # Seed an extra edge at the sigmoid transition (u near 1 when the
        # split sits at z) so the adaptive pass needs few bisections.
        if m == 1 and split > 8.0:
            edges = [0.0, 1.0 - 4.0 / split, 1.0]
        else:
            edges = [0.0, 0.5, 1.0]
        rough = sum(abs(_panel(f_int, a, b)) for a, b in zip(edges[:-1], edges[1:]))
        total += _adaptive(
            f_int, edges, 0.5 * cfg.rel_tol * (rough + 1e-300), budget, alpha, z
        )

    # Tail x = split + t: the occupation factor decays like exp(-t), so
    # truncating at t = T leaves a relative remainder below exp(-T) times an
    # algebraic factor.  Panel edges grow geometrically to match that scale.
    T = 48.0 + 3.0 * max(alpha, 0.0) * math.log(split + 50.0)
    if deriv:
        def f_tail(t):
            x = split + t
            s = expit(z - x)
            return x**alpha * s * expit(x - z)
    else:
        def f_tail(t):
            x = split + t
            return x**alpha * expit(z - x)

    edges = [0.0, 2.0, 5.0, 12.0, 26.0, T]
    rough = sum(abs(_panel(f_tail, a, b)) for a, b in zip(edges[:-1], edges[1:]))
    total += _adaptive(
        f_tail, edges, 0.5 * cfg.rel_tol * (rough + 1e-300), budget, alpha, z
    )

    return total


def fermi_integral(order, z: float, cfg: FermiEvalConfig = DEFAULT_CONFIG) -> float:
    """Fermi function f_alpha(z), strictly positive and increasing in z."""
    alpha = _alpha_of(order)
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"argument must be finite, got {z}")
    if z > cfg.switch_z:
        return _sommerfeld(alpha, z)
    return _quadrature(alpha, z, cfg, deriv=False)


def fermi_derivative(order, z: float, cfg: FermiEvalConfig = DEFAULT_CONFIG) -> float:
    """d/dz f_alpha(z) = alpha * f_{alpha-1}(z); requires alpha > 0."""
    alpha = _alpha_of(order)
    if alpha <= 0.0:
        raise UnsupportedOrderError(
            f"derivative recursion needs alpha > 0, got {alpha}"
        )
    return alpha * fermi_integral(alpha - 1.0, z, cfg)


def fermi_slope(order, z: float, cfg: FermiEvalConfig = DEFAULT_CONFIG) -> float:
    """d/dz f_alpha(z) for any alpha > -1, by direct quadrature.

    Unlike :func:`fermi_derivative` this does not use the recursion and
    therefore covers orders in (-1, 0] as well.
    """
    alpha = _alpha_of(order)
    z = float(z)
    if z > cfg.switch_z:
        return _sommerfeld(alpha, z, deriv=True)
    return _quadrature(alpha, z, cfg, deriv=True)


def fermi_inverse(order, y: float, cfg: FermiEvalConfig = DEFAULT_CONFIG) -> float:
    """Solve f_alpha(z) = y for z; y must be positive.

    Bracketed bisection on the strictly increasing f_alpha, followed by a
    short Newton polish with the derivative recursion where available.
    """
    alpha = _alpha_of(order)
    y = float(y)
    if not y > 0.0:
        raise ValueError(f"fermi_inverse needs y > 0, got {y}")

    gamma = math.exp(gammaln(alpha + 1.0))
    if y < gamma:
        z0 = math.log(y / gamma)  # non-degenerate: f ~ Gamma(a+1) e^z
    else:
        z0 = ((alpha + 1.0) * y) ** (1.0 / (alpha + 1.0))  # degenerate limb
    lo, hi = z0 - 2.0, z0 + 2.0
    width = 2.0
    for _ in range(300):
        if fermi_integral(alpha, lo, cfg) <= y:
            break
        width *= 2.0
        lo -= width
    else:
        raise FermiRangeError(f"no lower bracket for alpha={alpha}, y={y}")
    for _ in range(300):
        if fermi_integral(alpha, hi, cfg) >= y:
            break
        width *= 2.0
        hi += width
    else:
        raise FermiRangeError(f"no upper bracket for alpha={alpha}, y={y}")

    z = 0.5 * (lo + hi)
    for _ in range(60):
        fz = fermi_integral(alpha, z, cfg)
        if abs(fz - y) <= cfg.rel_tol * y:
            return z
        if fz < y:
            lo = z
        else:
            hi = z
        z = 0.5 * (lo + hi)

    for _ in range(2):
        if alpha > 0.0:
            slope = alpha * fermi_integral(alpha - 1.0, z, cfg)
        elif alpha == 0.0:
            slope = expit(z)
        else:
            break
        step = (fermi_integral(alpha, z, cfg) - y) / slope
        z_new = z - step
        if lo < z_new < hi:
            z = z_new
    return z


def sommerfeld_limit_residual(order, z: float) -> float:
    """z^(-a) * (f_a(z) z - (a+2)/(a+1) f_{a+1}(z)); tends to -pi^2/3.

    Evaluated by quadrature with an internally tightened tolerance and the
    degenerate branch pushed past z, so the limit is actually checked
    rather than reproduced from the expansion itself.
    """
    alpha = _alpha_of(order)
    z = float(z)
    if not z > 0.0:
        raise ValueError(f"sommerfeld_limit_residual needs z > 0, got {z}")
    cfg = FermiEvalConfig(
        rel_tol=1e-12,
        switch_z=max(DEFAULT_CONFIG.switch_z, z + 1.0),
        max_subdivisions=40000,
    )
    fa = fermi_integral(alpha, z, cfg)
    fa1 = fermi_integral(alpha + 1.0, z, cfg)
    return z ** (-alpha) * (fa * z - (alpha + 2.0) / (alpha + 1.0) * fa1)
