"""Two-reference-sample recurrence for sinusoids and straight lines.

A sinusoid ``y(t) = A sin(w t + phi)`` is fully determined by its radian
frequency ``w`` and any two samples ``y1 = y(t1)``, ``y2 = y(t2)``.  Every
other sample is a fixed linear combination of the two:

    y(t_k) = a_k * y2 + b_k * y1
    a_k =  sin(w * (t_k - t1)) / sin(w * (t2 - t1))
    b_k = -sin(w * (t_k - t2)) / sin(w * (t2 - t1))

As ``w -> 0`` the combination degenerates into the straight line through
``(t1, y1)`` and ``(t2, y2)``, so a linear trend is just the zero-frequency
member of the same family.

On an equidistant grid with period ``T`` the coefficients admit a
multiply-add-only recursion in the surrogate parameter ``x = 2 cos(w T)``
(a Chebyshev multiple-angle identity), which this module also provides
together with the analytic partial derivatives needed by the
Levenberg-Marquardt refinement step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NearZeroFrequencyError, NumericGuardError
from .series import TimeGrid

__all__ = [
    "NONUNIFORM",
    "UNIFORM",
    "SIN_DENOM_GUARD",
    "NEAR_ZERO_PHASE",
    "SineComponent",
    "SinusoidParams",
    "TrendLine",
    "coeffs_nonuniform",
    "coeffs_uniform_sequence",
    "uniform_closed_form",
    "x_from_omega",
    "omega_from_x",
    "effective_omega",
    "predict",
    "evaluate_at",
    "jacobian_nonuniform",
    "jacobian_uniform_sequence",
    "jacobian_uniform_step",
    "amplitude_phase",
    "trend_line",
]

NONUNIFORM = "nonuniform"
UNIFORM = "uniform"

# Clamp for the shared sine denominator sin(w*(t2-t1)): below this magnitude
# it is replaced by +/- SIN_DENOM_GUARD, keeping its sign (sign 0 -> +).
SIN_DENOM_GUARD = 1e-12

# Below this phase advance between the two reference samples the component is
# evaluated as a straight line; the analytic limit is better conditioned than
# clamped sine ratios.
NEAR_ZERO_PHASE = 1e-8

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SineComponent:
    """One sinusoid, stored as a frequency parameter plus two reference samples.

    ``freq_param`` is the radian frequency in rad/s in nonuniform mode, or the
    dimensionless surrogate ``x = 2 cos(w T)`` in uniform mode.  ``y1`` and
    ``y2`` are the component's values at the first two timestamps of the
    series it belongs to.
    """

    freq_param: float
    y1: float
    y2: float
    mode: str = NONUNIFORM

    def __post_init__(self):
        if self.mode not in (NONUNIFORM, UNIFORM):
            raise ValueError(f"unknown mode {self.mode!r}")
        for name in ("freq_param", "y1", "y2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.mode == UNIFORM and abs(self.freq_param) > 2.0:
            raise ValueError("uniform-mode parameter x must lie in [-2, 2]")


@dataclass(frozen=True)
class SinusoidParams:
    """Conventional amplitude / frequency / phase view of a sinusoid."""

    amplitude: float
    frequency_hz: float
    phase: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if not (-math.pi < self.phase <= math.pi):
            raise ValueError("phase must lie in (-pi, pi]")

    @property
    def omega(self) -> float:
        """Radian frequency in rad/s."""
        return _TWO_PI * self.frequency_hz


@dataclass(frozen=True)
class TrendLine:
    """A straight line ``y = slope * t + intercept``."""

    slope: float
    intercept: float


def _check_finite(**kwargs):
    for name, value in kwargs.items():
        arr = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} must be finite")


def _clamped_sin(phase: float, guard: float) -> float:
    s = math.sin(phase)
    if abs(s) < guard:
        return guard if s >= 0.0 else -guard
    return s


def coeffs_nonuniform(omega, t_k, t1, t2, guard=SIN_DENOM_GUARD):
    """Prediction coefficients (a, b) for sample times ``t_k``.

    ``t_k`` may be a scalar or an array.  For ``|omega * (t2 - t1)|`` below
    ``NEAR_ZERO_PHASE`` the straight-line limit is used; otherwise the sine
    denominator is clamped to ``+/- guard`` when it falls below ``guard`` in
    magnitude.
    """
    _check_finite(omega=omega, t_k=t_k, t1=t1, t2=t2)
    if guard <= 0:
        raise ValueError("guard must be positive")
    if t1 == t2:
        raise ValueError("reference times t1 and t2 must differ")
    tau_21 = t2 - t1
    tau_k1 = np.asarray(t_k, dtype=float) - t1
    tau_k2 = np.asarray(t_k, dtype=float) - t2
    if abs(omega * tau_21) < NEAR_ZERO_PHASE:
        return tau_k1 / tau_21, -tau_k2 / tau_21
    s21 = _clamped_sin(omega * tau_21, guard)
    return np.sin(omega * tau_k1) / s21, -np.sin(omega * tau_k2) / s21


def coeffs_uniform_sequence(x: float, count: int):
    """Coefficient sequences a[k], b[k] for k = 1..count on a uniform grid.

    Multiply-add recursion seeded with a[1] = 0, b[1] = 1:

        a[k] = x * a[k-1] + b[k-1]
        b[k] = -a[k-1]

    Returns 0-based arrays of length ``count``.
    """
    _check_finite(x=x)
    if count < 1:
        raise ValueError("count must be >= 1")
    a = np.empty(count)
    b = np.empty(count)
    a[0], b[0] = 0.0, 1.0
    for k in range(1, count):
        a[k] = x * a[k - 1] + b[k - 1]
        b[k] = -a[k - 1]
    return a, b


def uniform_closed_form(x: float, count: int):
    """Closed-form sine-ratio equivalents of :func:`coeffs_uniform_sequence`.

    Valid away from ``x = +/-2``; mainly useful as an independent check of
    the recursion.
    """
    omega_t = math.acos(x / 2.0)
    s = math.sin(omega_t)
    k = np.arange(1, count + 1, dtype=float)
    return np.sin((k - 1) * omega_t) / s, -np.sin((k - 2) * omega_t) / s


def x_from_omega(omega: float, period: float) -> float:
    """Map radian frequency to the uniform-sampling surrogate ``x = 2 cos(w T)``."""
    _check_finite(omega=omega, period=period)
    if period <= 0:
        raise ValueError("period must be positive")
    return 2.0 * math.cos(omega * period)


def omega_from_x(x: float, period: float) -> float:
    """Inverse of :func:`x_from_omega` on the principal branch ``w*T in [0, pi]``."""
    _check_finite(x=x, period=period)
    if period <= 0:
        raise ValueError("period must be positive")
    if abs(x) > 2.0:
        raise ValueError("x must lie in [-2, 2]")
    return math.acos(x / 2.0) / period


def effective_omega(component: SineComponent, ref_interval: float) -> float:
    """Radian frequency of a component, converting uniform-mode ``x`` if needed.

    ``ref_interval`` is the spacing between the two reference samples (the
    sampling period in uniform mode); it is ignored in nonuniform mode.
    """
    if component.mode == UNIFORM:
        return omega_from_x(component.freq_param, ref_interval)
    return component.freq_param


def predict(component: SineComponent, grid: TimeGrid, guard=SIN_DENOM_GUARD) -> np.ndarray:
    """Evaluate a component at every grid point.

    The grid's first two timestamps act as the reference times, so the first
    two output values are exactly ``y1`` and ``y2``.  Uniform-mode components
    require an equidistant grid.
    """
    if component.mode == UNIFORM:
        if not grid.is_uniform:
            raise ValueError("uniform-mode component requires an equidistant grid")
        a, b = coeffs_uniform_sequence(component.freq_param, grid.size)
    else:
        a, b = coeffs_nonuniform(
            component.freq_param, grid.timestamps, grid.t1, grid.t2, guard
        )
    return a * component.y2 + b * component.y1


def evaluate_at(component: SineComponent, times, t1: float, t2: float,
                guard=SIN_DENOM_GUARD) -> np.ndarray:
    """Evaluate a component at arbitrary times given explicit reference times.

    Uniform-mode components are converted to radian frequency first, so the
    requested times need not fall on the original sampling grid.
    """
    times = np.asarray(times, dtype=float)
    omega = effective_omega(component, t2 - t1)
    a, b = coeffs_nonuniform(omega, times, t1, t2, guard)
    return a * component.y2 + b * component.y1


def jacobian_nonuniform(component: SineComponent, t_k, t1, t2, guard=SIN_DENOM_GUARD):
    """Partial derivatives (dy/dw, dy/dy1, dy/dy2) at sample times ``t_k``.

    Uses the same denominator clamp and straight-line dispatch as
    :func:`coeffs_nonuniform`, so prediction and Jacobian stay mutually
    consistent.  ``t_k`` may be scalar or array; three arrays are returned.
    """
    if component.mode != NONUNIFORM:
        raise ValueError("jacobian_nonuniform requires a nonuniform-mode component")
    _check_finite(t_k=t_k, t1=t1, t2=t2)
    omega, y1, y2 = component.freq_param, component.y1, component.y2
    tau_21 = t2 - t1
    t_k = np.asarray(t_k, dtype=float)
    tau_k1 = t_k - t1
    tau_k2 = t_k - t2
    if abs(omega * tau_21) < NEAR_ZERO_PHASE:
        # Straight-line limit: prediction is frequency-independent.
        zeros = np.zeros_like(tau_k1)
        return zeros, -tau_k2 / tau_21, tau_k1 / tau_21
    s21 = _clamped_sin(omega * tau_21, guard)
    c21 = math.cos(omega * tau_21)
    sk1 = np.sin(omega * tau_k1)
    ck1 = np.cos(omega * tau_k1)
    sk2 = np.sin(omega * tau_k2)
    ck2 = np.cos(omega * tau_k2)
    d_y1 = -sk2 / s21
    d_y2 = sk1 / s21
    d_omega = (
        y2 * (tau_k1 * ck1 * s21 - tau_21 * sk1 * c21)
        - y1 * (tau_k2 * ck2 * s21 - tau_21 * sk2 * c21)
    ) / (s21 * s21)
    return d_omega, d_y1, d_y2


def jacobian_uniform_sequence(x: float, count: int):
    """Coefficients and their x-derivatives for k = 1..count, uniform sampling.

    Returns ``(a, b, da, db)`` where ``da``/``db`` are the derivatives of the
    coefficients with respect to ``x``, advanced by the multiply-add
    recursion seeded with ``da[1] = db[1] = 0``.
    """
    _check_finite(x=x)
    if count < 1:
        raise ValueError("count must be >= 1")
    a = np.empty(count)
    b = np.empty(count)
    da = np.empty(count)
    db = np.empty(count)
    a[0], b[0], da[0], db[0] = 0.0, 1.0, 0.0, 0.0
    for k in range(1, count):
        a[k] = x * a[k - 1] + b[k - 1]
        b[k] = -a[k - 1]
        da[k] = a[k - 1] + x * da[k - 1] + db[k - 1]
        db[k] = -da[k - 1]
    return a, b, da, db


def jacobian_uniform_step(component: SineComponent, a_prev, b_prev, da_prev, db_prev):
    """Advance the uniform-mode derivative recursion by one sample.

    Given the coefficient/derivative state at sample k-1, returns
    ``(dy_dx, dy_dy1, dy_dy2, da, db)`` at sample k.  Note that
    ``dy_dy1`` and ``dy_dy2`` are the new coefficients ``b`` and ``a``, so the
    returned tuple also carries the full state for the next step.
    """
    if component.mode != UNIFORM:
        raise ValueError("jacobian_uniform_step requires a uniform-mode component")
    x = component.freq_param
    a = x * a_prev + b_prev
    b = -a_prev
    da = a_prev + x * da_prev + db_prev
    db = -da_prev
    dy_dx = da * component.y2 + db * component.y1
    return dy_dx, b, a, da, db


def amplitude_phase(component: SineComponent, t1: float, t2: float,
                    guard=SIN_DENOM_GUARD) -> SinusoidParams:
    """Recover conventional (amplitude, frequency, phase) from a component.

    Decomposes the sinusoid into sine and cosine parts ``B sin(w t) +
    C cos(w t)`` through the two reference samples and reads off
    ``A = sqrt(B^2 + C^2)``, ``phi = atan2(C, B)`` (full four-quadrant
    recovery, wrapped to ``(-pi, pi]``).  Uniform-mode components are
    converted to radian frequency first.

    Raises
    ------
    NearZeroFrequencyError
        If the phase advance between the reference samples is below
        ``NEAR_ZERO_PHASE``; such a component is a trend line and has no
        meaningful amplitude/phase.
    NumericGuardError
        If ``sin(w * (t2 - t1))`` is within ``guard`` of zero (the reference
        samples sit half a period apart and the decomposition is singular).
    """
    _check_finite(t1=t1, t2=t2)
    if t1 == t2:
        raise ValueError("reference times t1 and t2 must differ")
    omega = effective_omega(component, t2 - t1)
    if abs(omega * (t2 - t1)) < NEAR_ZERO_PHASE:
        raise NearZeroFrequencyError(
            "near-zero frequency: report this component as a trend line"
        )
    denom = math.sin(omega * (t2 - t1))
    if abs(denom) < guard:
        raise NumericGuardError(
            "reference samples are an integer number of half-periods apart; "
            "sine/cosine decomposition is singular"
        )
    s1, c1 = math.sin(omega * t1), math.cos(omega * t1)
    s2, c2 = math.sin(omega * t2), math.cos(omega * t2)
    cos_part = (component.y1 * s2 - component.y2 * s1) / denom
    sin_part = (component.y2 * c1 - component.y1 * c2) / denom
    amplitude = math.hypot(sin_part, cos_part)
    phase = math.atan2(cos_part, sin_part) if amplitude > 0 else 0.0
    if phase <= -math.pi:
        phase += _TWO_PI
    return SinusoidParams(amplitude, omega / _TWO_PI, phase)


def trend_line(component: SineComponent, t1: float, t2: float) -> TrendLine:
    """Straight line through the two reference samples of a component."""
    if t1 == t2:
        raise ValueError("reference times t1 and t2 must differ")
    slope = (component.y2 - component.y1) / (t2 - t1)
    return TrendLine(slope, component.y1 - slope * t1)
