"""Sampled 1-D fields shared by the reactor and packing models."""

from dataclasses import dataclass

import numpy as np

QUANTITY_UNITS = {
    "concentration": "mol/m^3",
    "temperature": "K",
    "intensity": "m^3/(m^2 s)",
}


@dataclass(frozen=True)
class ScalarField1D:
    """
    A quantity sampled on a strictly increasing 1-D grid.

    Parameters
    ----------
    grid : array_like
        Node coordinates [m], at least two, strictly increasing.
    values : array_like
        One value per node.
    quantity_kind : str
        One of ``"concentration"``, ``"temperature"``, ``"intensity"``.
    """

    grid: np.ndarray
    values: np.ndarray
    quantity_kind: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must be 1-D with at least two nodes")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid shape {grid.shape}")
        if self.quantity_kind not in QUANTITY_UNITS:
            raise ValueError(f"unknown quantity kind {self.quantity_kind!r}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def units(self):
        return QUANTITY_UNITS[self.quantity_kind]

    def integral(self):
        """Trapezoid integral over the grid."""
        return float(np.trapezoid(self.values, self.grid))

    def __len__(self):
        return self.grid.size
