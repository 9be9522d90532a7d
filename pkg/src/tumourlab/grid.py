"""Uniform cell-centred grid on (-L, L) with homogeneous Neumann calculus."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridError


@dataclass(frozen=True)
class Grid:
    half_width: float
    cell_count: int

    def __post_init__(self):
        if not (self.half_width > 0 and np.isfinite(self.half_width)):
            raise GridError(f"half_width must be positive, got {self.half_width}")
        if int(self.cell_count) != self.cell_count or self.cell_count < 1:
            raise GridError(f"cell_count must be a positive integer, got {self.cell_count}")

    @property
    def L(self) -> float:
        return self.half_width

    @property
    def N(self) -> int:
        return self.cell_count

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.cell_count

    @cached_property
    def centers(self) -> np.ndarray:
        # symmetric construction: x_j = -x_{N-1-j} exactly
        j = np.arange(self.cell_count)
        x = (2.0 * j + 1.0 - self.cell_count) * (self.half_width / self.cell_count)
        x.flags.writeable = False
        return x

    @cached_property
    def faces(self) -> np.ndarray:
        j = np.arange(self.cell_count + 1)
        xf = (2.0 * j - self.cell_count) * (self.half_width / self.cell_count)
        xf.flags.writeable = False
        return xf


def gradient_at_faces(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Difference quotient on the N+1 faces; the two boundary faces are 0."""
    field = np.asarray(field, dtype=float)
    out = np.zeros(field.size + 1)
    out[1:-1] = (field[1:] - field[:-1]) / grid.dx
    return out


def second_difference(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Three-point Laplacian with mirrored ghost cells at both ends."""
    field = np.asarray(field, dtype=float)
    if field.size < 2:
        raise GridError("second_difference needs at least 2 cells")
    out = np.empty_like(field)
    out[1:-1] = field[2:] - 2.0 * field[1:-1] + field[:-2]
    out[0] = field[1] - field[0]
    out[-1] = field[-2] - field[-1]
    return out / grid.dx**2


def divergence(face_flux: np.ndarray, grid: Grid) -> np.ndarray:
    """Cell divergence of a face flux, (flux_{j+1/2} - flux_{j-1/2}) / dx."""
    face_flux = np.asarray(face_flux, dtype=float)
    return (face_flux[1:] - face_flux[:-1]) / grid.dx


def integrate(field, grid: Grid) -> float:
    """Midpoint rule: dx times the sum of the cell values."""
    return float(grid.dx * np.sum(field))
