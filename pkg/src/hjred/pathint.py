"""Time-sliced Euclidean kernels for H0 = (e/2)(p^2 + m^2) in one dimension."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .quantize import Grid, momentum_squared


@dataclass(frozen=True)
class Kernel:
    """Propagator matrix already weighted by the grid spacing.

    ``matrix[i, j] = K(x_i, x_j) * h`` so that composition is a plain
    matrix product.
    """

    grid: Grid
    matrix: np.ndarray
    beta: float
    slices: int

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["x", *(repr(float(x)) for x in self.grid.points)])
            for x, row in zip(self.grid.points, self.matrix):
                out.writerow([repr(float(x)), *(repr(float(v)) for v in row)])


def slice_kernel(m: float, e: float, dbeta: float, grid: Grid) -> Kernel:
    """One Euclidean slice with the momentum integral done in closed form."""
    if not dbeta > 0:
        raise ValueError("dbeta must be positive")
    if not e > 0:
        raise ValueError("e must be positive")
    x = grid.points
    width = e * dbeta
    sep = x[:, None] - x[None, :]
    k = np.exp(-sep**2 / (2.0 * width) - e * m**2 * dbeta / 2.0) / math.sqrt(2.0 * math.pi * width)
    return Kernel(grid, k * grid.spacing, dbeta, 1)


def identity_kernel(grid: Grid) -> Kernel:
    return Kernel(grid, np.eye(grid.n), 0.0, 0)


def compose(k: Kernel, times: int) -> Kernel:
    """``times`` successive slices."""
    if times < 1:
        raise ValueError("times must be at least 1")
    return Kernel(k.grid, np.linalg.matrix_power(k.matrix, times), k.beta * times,
                  k.slices * times)


def sliced_kernel(m: float, e: float, beta: float, slices: int, grid: Grid) -> Kernel:
    """Composition of ``slices`` equal slices spanning ``beta``; identity at beta 0."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if slices < 1:
        raise ValueError("slices must be at least 1")
    if beta == 0:
        return identity_kernel(grid)
    return compose(slice_kernel(m, e, beta / slices, grid), slices)


def operator_exponential(m: float, e: float, beta: float, grid: Grid,
                         stencil: str = "fd3") -> np.ndarray:
    """``exp(-beta * (e/2)(p^2 + m^2))`` from the grid eigen-decomposition."""
    h0 = 0.5 * e * (momentum_squared(grid, stencil).matrix + m**2 * np.eye(grid.n))
    vals, vecs = np.linalg.eigh(h0)
    return (vecs * np.exp(-beta * vals)) @ vecs.T


def compare_to_operator(k: Kernel, m: float, e: float, beta: float, grid: Grid,
                        stencil: str = "fd3") -> float:
    """Largest entrywise gap between a sliced kernel and the operator exponential."""
    if k.grid != grid:
        raise ValueError("kernel and comparison grid differ")
    return float(np.max(np.abs(k.matrix - operator_exponential(m, e, beta, grid, stencil))))


def undersampled(e: float, beta: float, slices: int, grid: Grid) -> bool:
    """True when a slice Gaussian is narrower than the grid spacing."""
    if beta == 0:
        return False
    return math.sqrt(e * beta / slices) < grid.spacing
