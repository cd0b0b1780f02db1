"""Exponential scaling fits of the form mean_gap(N) = prefactor · 2^{−kN}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ScalingFit:
    """Least-squares exponent of 2^{−kN} scaling with per-size statistics."""

    k: float
    prefactor_log2: float
    residual: float
    sizes: np.ndarray
    mean_values: np.ndarray
    stderrs: np.ndarray | None

    def predict(self, n_spins) -> np.ndarray:
        return 2.0 ** (self.prefactor_log2 - self.k * np.asarray(n_spins, dtype=np.float64))


def fit_scaling(sizes, mean_values, stderrs=None) -> ScalingFit:
    """Fit log₂(mean) = prefactor_log2 − k·N by (weighted) least squares.

    Weights follow the delta method: var(log₂ mean) = (SE / (mean · ln 2))².
    Unweighted when standard errors are absent or any of them is zero.
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    mean_values = np.asarray(mean_values, dtype=np.float64)
    if len(sizes) < 3:
        raise ValueError("scaling fits need at least three distinct sizes")
    if len(np.unique(sizes)) != len(sizes):
        raise ValueError("sizes must be distinct")
    if np.any(mean_values <= 0):
        raise ValueError("mean gaps must be positive for a log-scale fit")

    y = np.log2(mean_values)
    if stderrs is not None:
        stderrs = np.asarray(stderrs, dtype=np.float64)
        if np.any(stderrs <= 0):
            weights = np.ones_like(y)
        else:
            weights = (mean_values * np.log(2.0) / stderrs) ** 2
    else:
        weights = np.ones_like(y)

    design = np.column_stack([-sizes, np.ones_like(sizes)])
    wsqrt = np.sqrt(weights)
    coeffs, *_ = np.linalg.lstsq(design * wsqrt[:, None], y * wsqrt, rcond=None)
    k, prefactor_log2 = float(coeffs[0]), float(coeffs[1])
    residual = float(np.sqrt(np.mean((design @ coeffs - y) ** 2)))
    return ScalingFit(
        k=k,
        prefactor_log2=prefactor_log2,
        residual=residual,
        sizes=sizes,
        mean_values=mean_values,
        stderrs=stderrs,
    )
