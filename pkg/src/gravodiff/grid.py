"""Radially symmetric geometry on a ball in R^d.

Cell-centered finite-volume mesh with faces at r_0 = 0 < ... < r_N = R,
quadrature, L^p norms, and the radial Poisson solver for the attractive
potential: Laplacian(phi) = n with phi = 0 on the boundary, so phi <= 0
and phi' >= 0 whenever n >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RadialGrid",
    "GridShapeError",
    "sphere_surface_measure",
]


class GridShapeError(ValueError):
    """Field length does not match the grid."""


def sphere_surface_measure(d: int) -> float:
    """Surface measure sigma_d of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Immutable radial mesh; construct via `uniform` or `geometric`."""

    d: int
    R: float
    r_faces: np.ndarray
    r_centers: np.ndarray = field(init=False)
    face_area: np.ndarray = field(init=False)
    cell_volume: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.d not in (2, 3, 4):
            raise ValueError(f"dimension must be 2, 3 or 4, got {self.d}")
        if not self.R > 0.0:
            raise ValueError(f"radius must be positive, got {self.R}")
        rf = np.asarray(self.r_faces, dtype=float)
        if rf.ndim != 1 or rf.size < 9:
            raise ValueError("need at least 8 cells")
        if rf[0] != 0.0 or not np.isclose(rf[-1], self.R):
            raise ValueError("faces must run from 0 to R")
        if np.any(np.diff(rf) <= 0.0):
            raise ValueError("faces must be strictly increasing")
        sigma = sphere_surface_measure(self.d)
        object.__setattr__(self, "r_faces", rf)
        object.__setattr__(self, "r_centers", 0.5 * (rf[:-1] + rf[1:]))
        object.__setattr__(self, "face_area", sigma * rf ** (self.d - 1))
        object.__setattr__(
            self, "cell_volume", sigma * np.diff(rf**self.d) / self.d
        )

    @classmethod
    def uniform(cls, d: int, R: float, N: int) -> "RadialGrid":
        return cls(d=d, R=R, r_faces=np.linspace(0.0, R, N + 1))

    @classmethod
    def geometric(cls, d: int, R: float, N: int, ratio: float) -> "RadialGrid":
        """Cell widths growing by `ratio` per cell away from the origin."""
        if not ratio > 0.0:
            raise ValueError(f"ratio must be positive, got {ratio}")
        if ratio == 1.0:
            return cls.uniform(d, R, N)
        w = ratio ** np.arange(N)
        faces = np.concatenate(([0.0], np.cumsum(w)))
        faces *= R / faces[-1]
        faces[-1] = R
        return cls(d=d, R=R, r_faces=faces)

    @property
    def N(self) -> int:
        return self.r_centers.size

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.N,):
            raise GridShapeError(
                f"field of shape {f.shape} on a grid of {self.N} cells"
            )
        return f

    def integrate(self, f) -> float:
        """Integral over the ball by cell quadrature."""
        return float(np.dot(self._check(f), self.cell_volume))

    def lp_norm(self, f, p: float) -> float:
        """L^p norm by cell quadrature, p >= 1."""
        if p < 1.0:
            raise ValueError(f"p must be >= 1, got {p}")
        return float(np.dot(np.abs(self._check(f)) ** p, self.cell_volume)) ** (
            1.0 / p
        )

    def poisson_solve(self, n) -> tuple[np.ndarray, np.ndarray]:
        """Solve Laplacian(phi) = n radially with phi(R) = 0.

        Returns (phi at cells, phi' at faces).  phi'(r_i) is the enclosed
        mass over the face area; phi is recovered by trapezoid integration
        inward from the boundary and averaged onto cells.
        """
        n = self._check(n)
        enclosed = np.concatenate(([0.0], np.cumsum(n * self.cell_volume)))
        dphi = np.zeros(self.N + 1)
        dphi[1:] = enclosed[1:] / self.face_area[1:]
        phi_faces = np.zeros(self.N + 1)
        seg = 0.5 * (dphi[:-1] + dphi[1:]) * np.diff(self.r_faces)
        phi_faces[:-1] = -(np.cumsum(seg[::-1])[::-1])
        phi = 0.5 * (phi_faces[:-1] + phi_faces[1:])
        return phi, dphi

    def grad_l2_sq(self, dphi) -> float:
        """Integral of |grad phi|^2 from face gradient values.

        Trapezoid in r against the surface measure, matching the face
        placement of the Poisson gradient.
        """
        dphi = np.asarray(dphi, dtype=float)
        if dphi.shape != (self.N + 1,):
            raise GridShapeError(
                f"face field of shape {dphi.shape} on a grid of {self.N} cells"
            )
        g = dphi**2 * self.face_area
        return float(np.sum(0.5 * (g[:-1] + g[1:]) * np.diff(self.r_faces)))
