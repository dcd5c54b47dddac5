"""Levenberg-Marquardt refinement of tone parameters.

All 3M parameters (one frequency parameter plus two reference samples per
tone) are refined jointly by solving the damped normal equations

    [J^T J + gamma * diag(J^T J)] delta = J^T (w - P(beta))

where J is the K x 3M Jacobian of the model prediction with respect to the
flattened parameter vector ``beta = (p_1, y_{1,1}, y_{1,2}, ..., p_M,
y_{M,1}, y_{M,2})``.  Cross-tone partial derivatives vanish, so J is block
structured with three columns per tone.

The step-control policy is classic Marquardt: a trial step is accepted only
if it lowers the sum of squared prediction errors, the damping factor is
divided by ``damping_factor`` on acceptance and multiplied by it on
rejection, and frequency parameters are projected onto their box after every
accepted step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from .exceptions import SingularSystemError
from .recurrence import (
    UNIFORM,
    SineComponent,
    coeffs_nonuniform,
    coeffs_uniform_sequence,
    jacobian_nonuniform,
    jacobian_uniform_sequence,
)
from .series import TimeSeries

__all__ = [
    "LmConfig",
    "pack_components",
    "unpack_components",
    "lm_jacobian",
    "lm_step",
    "refine",
]


@dataclass(frozen=True)
class LmConfig:
    """Settings for the refinement loop.

    ``max_steps`` caps the number of *accepted* steps; the total number of
    linear solves (including rejected trials) is capped at three times that.
    ``freq_bounds`` is the box for the frequency parameters; uniform-mode
    refinement always additionally stays inside [-2, 2].
    """

    max_steps: int = 30
    damping_factor: float = 1.5
    initial_damping: float = 1e-3
    freq_bounds: tuple[float, float] | None = None
    min_relative_improvement: float = 1e-12

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.damping_factor <= 1.0:
            raise ValueError("damping_factor must exceed 1")
        if self.initial_damping <= 0.0:
            raise ValueError("initial_damping must be positive")
        if self.min_relative_improvement < 0.0:
            raise ValueError("min_relative_improvement must be >= 0")
        if self.freq_bounds is not None and self.freq_bounds[0] >= self.freq_bounds[1]:
            raise ValueError("freq_bounds must be ordered (low, high)")


def pack_components(components: Sequence[SineComponent]) -> np.ndarray:
    """Flatten components into the parameter vector (p, y1, y2 per tone)."""
    beta = np.empty(3 * len(components))
    for m, comp in enumerate(components):
        beta[3 * m : 3 * m + 3] = (comp.freq_param, comp.y1, comp.y2)
    return beta


def unpack_components(beta: np.ndarray, mode: str) -> tuple[SineComponent, ...]:
    """Inverse of :func:`pack_components`."""
    if len(beta) % 3 != 0:
        raise ValueError("parameter vector length must be a multiple of 3")
    return tuple(
        SineComponent(beta[3 * m], beta[3 * m + 1], beta[3 * m + 2], mode)
        for m in range(len(beta) // 3)
    )


def _component_mode(components: Sequence[SineComponent]) -> str:
    modes = {c.mode for c in components}
    if len(modes) != 1:
        raise ValueError("all components must share one sampling mode")
    return modes.pop()


def _prediction(beta: np.ndarray, series: TimeSeries, mode: str) -> np.ndarray:
    """Model prediction for a raw parameter vector (no range validation)."""
    grid = series.grid
    total = np.zeros(series.size)
    for m in range(len(beta) // 3):
        p, y1, y2 = beta[3 * m : 3 * m + 3]
        if mode == UNIFORM:
            a, b = coeffs_uniform_sequence(p, grid.size)
        else:
            a, b = coeffs_nonuniform(p, grid.timestamps, grid.t1, grid.t2)
        total += a * y2 + b * y1
    return total


def _sse(beta: np.ndarray, series: TimeSeries, mode: str) -> float:
    r = series.values - _prediction(beta, series, mode)
    return float(r @ r)


def _jacobian(beta: np.ndarray, series: TimeSeries, mode: str) -> np.ndarray:
    grid = series.grid
    jac = np.zeros((series.size, len(beta)))
    for m in range(len(beta) // 3):
        p, y1, y2 = beta[3 * m : 3 * m + 3]
        if mode == UNIFORM:
            a, b, da, db = jacobian_uniform_sequence(p, grid.size)
            d_p = da * y2 + db * y1
            d_y1, d_y2 = b, a
        else:
            tau = grid.timestamps
            d_p, d_y1, d_y2 = jacobian_nonuniform(
                SineComponent(p, y1, y2), tau, grid.t1, grid.t2
            )
        jac[:, 3 * m] = d_p
        jac[:, 3 * m + 1] = d_y1
        jac[:, 3 * m + 2] = d_y2
    return jac


def lm_jacobian(series: TimeSeries, components: Sequence[SineComponent]) -> np.ndarray:
    """K x 3M Jacobian of the model prediction with respect to all parameters."""
    mode = _component_mode(components)
    if mode == UNIFORM and not series.grid.is_uniform:
        raise ValueError("uniform-mode components require an equidistant grid")
    return _jacobian(pack_components(components), series, mode)


def _solve_damped(gram: np.ndarray, rhs: np.ndarray, gamma: float) -> np.ndarray:
    """Solve the damped system, skipping parameters with an all-zero column.

    A zero diagonal entry of ``J^T J`` means the prediction does not depend
    on that parameter at all (e.g. the frequency of a zero-amplitude tone or
    of a trend line); its increment is fixed at zero and the system is solved
    on the remaining coordinates.
    """
    diag = np.diag(gram)
    active = np.flatnonzero(diag != 0.0)
    delta = np.zeros(len(rhs))
    if active.size == 0:
        return delta
    sub = gram[np.ix_(active, active)].copy()
    sub[np.diag_indices(active.size)] *= 1.0 + gamma
    try:
        delta[active] = linalg.cho_solve(linalg.cho_factor(sub), rhs[active])
    except linalg.LinAlgError:
        raise SingularSystemError(float(np.linalg.cond(sub))) from None
    return delta


def lm_step(series: TimeSeries, components: Sequence[SineComponent],
            gamma: float) -> tuple[np.ndarray, float]:
    """One damped step: returns the increment and the sse at ``beta + delta``.

    Raises :class:`SingularSystemError` when the damped system cannot be
    factorized; the caller is expected to increase ``gamma`` and retry.
    """
    if gamma < 0:
        raise ValueError("damping gamma must be >= 0")
    mode = _component_mode(components)
    beta = pack_components(components)
    jac = _jacobian(beta, series, mode)
    residual = series.values - _prediction(beta, series, mode)
    delta = _solve_damped(jac.T @ jac, jac.T @ residual, gamma)
    return delta, _sse(beta + delta, series, mode)


def _project(beta: np.ndarray, mode: str, bounds: tuple[float, float] | None) -> np.ndarray:
    lo, hi = (-np.inf, np.inf) if bounds is None else bounds
    if mode == UNIFORM:
        lo, hi = max(lo, -2.0), min(hi, 2.0)
    out = beta.copy()
    out[0::3] = np.clip(out[0::3], lo, hi)
    return out


def refine(series: TimeSeries, components: Sequence[SineComponent],
           cfg: LmConfig = LmConfig()) -> tuple[tuple[SineComponent, ...], float, int]:
    """Refine all tone parameters; returns ``(components, sse, accepted_steps)``.

    The returned sse never exceeds the input's.  Refinement stops after
    ``cfg.max_steps`` accepted steps, when an accepted step improves the sse
    by less than ``cfg.min_relative_improvement`` relatively, or when the
    solve budget (three times ``max_steps``) is exhausted; a wholly
    unsuccessful refinement returns the input parameters unchanged.
    """
    if not components:
        return tuple(), series.energy, 0
    mode = _component_mode(components)
    if series.size < 2 * len(components):
        raise ValueError("series too short for the number of tones")

    beta = _project(pack_components(components), mode, cfg.freq_bounds)
    best_sse = _sse(beta, series, mode)
    gamma = cfg.initial_damping
    accepted = 0
    solves = 0
    max_solves = 3 * cfg.max_steps
    while accepted < cfg.max_steps and solves < max_solves and best_sse > 0.0:
        jac = _jacobian(beta, series, mode)
        residual = series.values - _prediction(beta, series, mode)
        try:
            delta = _solve_damped(jac.T @ jac, jac.T @ residual, gamma)
            solves += 1
        except SingularSystemError:
            solves += 1
            gamma *= cfg.damping_factor
            continue
        candidate = _project(beta + delta, mode, cfg.freq_bounds)
        trial_sse = _sse(candidate, series, mode)
        if trial_sse < best_sse:
            relative = (best_sse - trial_sse) / best_sse
            beta, best_sse = candidate, trial_sse
            accepted += 1
            gamma /= cfg.damping_factor
            if relative < cfg.min_relative_improvement:
                break
        else:
            gamma *= cfg.damping_factor
            if np.max(np.abs(delta)) <= 1e-15 * (1.0 + np.max(np.abs(beta))):
                break
    return unpack_components(beta, mode), best_sse, accepted
