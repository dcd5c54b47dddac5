"""Predictive least-squares solve for the reference samples of fixed tones.

With the frequency parameters held fixed, the model is linear in the 2M
reference samples, so the best-fitting samples solve the normal equations

    (J^T J) alpha = J^T w

where row k of the K x 2M design matrix J is
``(b_{1,k}, a_{1,k}, ..., b_{M,k}, a_{M,k})`` and ``alpha`` stacks the
reference samples ``(y_{1,1}, y_{1,2}, ..., y_{M,1}, y_{M,2})``.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg

from .exceptions import SingularSystemError
from .recurrence import NONUNIFORM, UNIFORM, coeffs_nonuniform, coeffs_uniform_sequence
from .series import TimeGrid, TimeSeries

__all__ = ["build_design_matrix", "solve_initial_samples", "InitialSolve", "COND_FALLBACK"]

# Condition-number estimate above which the symmetric factorization is
# abandoned for a least-norm solve; beyond COND_SINGULAR the system is
# reported as singular instead.
COND_FALLBACK = 1e12
COND_SINGULAR = 1e15


class InitialSolve(NamedTuple):
    """Result of a reference-sample solve."""

    alpha: np.ndarray
    sse: float
    condition: float
    used_fallback: bool


def build_design_matrix(freq_params: Sequence[float], grid: TimeGrid,
                        mode: str = NONUNIFORM) -> np.ndarray:
    """K x 2M matrix of prediction coefficients, columns (b_m, a_m) per tone.

    ``freq_params`` are radian frequencies in nonuniform mode or the
    surrogate ``x`` values in uniform mode (which requires an equidistant
    grid).
    """
    if mode not in (NONUNIFORM, UNIFORM):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == UNIFORM and not grid.is_uniform:
        raise ValueError("uniform mode requires an equidistant grid")
    k = grid.size
    design = np.empty((k, 2 * len(freq_params)))
    for m, p in enumerate(freq_params):
        if mode == UNIFORM:
            a, b = coeffs_uniform_sequence(p, k)
        else:
            a, b = coeffs_nonuniform(p, grid.timestamps, grid.t1, grid.t2)
        design[:, 2 * m] = b
        design[:, 2 * m + 1] = a
    return design


def solve_normal_equations(gram: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """Solve ``gram @ alpha = rhs`` symmetrically, with a least-norm fallback.

    Returns ``(alpha, condition, used_fallback)``.  Raises
    :class:`SingularSystemError` when the condition estimate marks the
    system as numerically rank-deficient.
    """
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition > COND_SINGULAR:
        raise SingularSystemError(condition)
    if condition > COND_FALLBACK:
        alpha = linalg.lstsq(gram, rhs)[0]
        return alpha, condition, True
    try:
        alpha = linalg.cho_solve(linalg.cho_factor(gram), rhs)
    except linalg.LinAlgError:
        alpha = linalg.lstsq(gram, rhs)[0]
        return alpha, condition, True
    return alpha, condition, False


def solve_initial_samples(series: TimeSeries, freq_params: Sequence[float],
                          mode: str = NONUNIFORM) -> InitialSolve:
    """Best reference samples for the given frequencies, plus the residual sse.

    The returned ``sse`` is the sum of squared prediction errors at the
    optimum, computed directly from the residual.  Near-duplicate or
    guard-degenerate frequencies make the normal equations rank-deficient;
    those raise :class:`SingularSystemError` carrying the condition estimate.
    """
    m = len(freq_params)
    if m < 1:
        raise ValueError("at least one frequency parameter is required")
    if series.size < 2 * m:
        raise ValueError(
            f"need at least {2 * m} samples to solve for {m} tones, got {series.size}"
        )
    design = build_design_matrix(freq_params, series.grid, mode)
    gram = design.T @ design
    rhs = design.T @ series.values
    alpha, condition, used_fallback = solve_normal_equations(gram, rhs)
    residual = series.values - design @ alpha
    return InitialSolve(alpha, float(residual @ residual), condition, used_fallback)
