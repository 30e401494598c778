"""Sampled functions over relative distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CurveSeries"]


@dataclass(frozen=True, eq=False)
class CurveSeries:
    """A function of relative distance sampled on a strictly increasing grid."""

    taus: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=np.float64).copy()
        values = np.asarray(self.values, dtype=np.float64).copy()
        if taus.ndim != 1 or values.ndim != 1:
            raise ValueError("taus and values must be 1-d")
        if taus.size == 0:
            raise ValueError("series must contain at least one sample")
        if taus.size != values.size:
            raise ValueError(f"length mismatch: {taus.size} taus vs {values.size} values")
        if np.any(np.diff(taus) <= 0.0):
            raise ValueError("taus must be strictly increasing")
        taus.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.taus.size
