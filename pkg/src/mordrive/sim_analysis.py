"""Time- and frequency-domain evaluation of transfer functions.

Step responses integrate a controllable-canonical state-space
realization with the classical fourth-order fixed-step scheme; Bode
traces evaluate the rational function directly on a log grid.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    GridMismatch,
    NotSettled,
    SimulationDiverged,
    StiffnessWarning,
    ValidationError,
)
from .poly_tf import TransferFunction, poly_roots

# Propagation happens in chunks of precomputed one-step matrix powers.
_CHUNK = 256

DEFAULT_DT_DIVISOR = 20.0
DEFAULT_HORIZON_FACTOR = 5.0


@dataclass(frozen=True, eq=False)
class StepTrace:
    """Uniformly sampled step response."""

    t: np.ndarray
    y: np.ndarray
    dt: float
    input_amplitude: float


@dataclass(frozen=True, eq=False)
class BodeTrace:
    """Magnitude (dB) and unwrapped phase (deg) on an ascending log grid."""

    omega: np.ndarray
    mag_db: np.ndarray
    phase_deg: np.ndarray
    contains_nonfinite: bool


class ResponseMetrics(NamedTuple):
    overshoot_pct: float
    settling_2pct_s: float
    rise_10_90_s: float
    final_value: float


def characteristic_times(g: TransferFunction) -> tuple[float, float]:
    """(smallest, largest) time constants from the denominator poles.

    The smallest constant is 1/max|pole| (resolution limit), the
    largest 1/min|Re pole| (decay limit).  Raises ``ValidationError``
    when no finite decay time exists (static gain, pole at or right of
    the imaginary axis), in which case callers must supply explicit
    horizons.
    """
    if g.den.degree < 1:
        raise ValidationError("static system has no time constants")
    poles = poly_roots(g.den)
    fastest = max(abs(p) for p in poles)
    slowest_decay = min(-p.real for p in poles)
    if fastest <= 0.0 or slowest_decay <= 0.0:
        raise ValidationError(
            "no finite decay time: system has a pole at or right of the "
            "imaginary axis; pass t_final and dt explicitly"
        )
    return 1.0 / fastest, 1.0 / slowest_decay


def _ccf_realization(g: TransferFunction):
    """Controllable canonical (A, B, C, D) for a proper SISO function."""
    n = g.den.degree
    lead = g.den.coeffs[-1]
    alpha = np.array([c / lead for c in g.den.coeffs[:-1]], dtype=float)
    beta = np.array([g.num.coeff(i) / lead for i in range(n + 1)], dtype=float)
    d = beta[n]
    if n == 0:
        return np.zeros((0, 0)), np.zeros(0), np.zeros(0), d
    a = np.zeros((n, n))
    for i in range(n - 1):
        a[i, i + 1] = 1.0
    a[n - 1, :] = -alpha
    b = np.zeros(n)
    b[n - 1] = 1.0
    c = beta[:n] - d * alpha
    return a, b, c, d


def _rk4_step_matrices(a: np.ndarray, b: np.ndarray, dt: float, u: float):
    """One-step update x+ = M x + v of classical RK4 for constant input."""
    n = a.shape[0]
    eye = np.eye(n)
    ah = a * dt
    ah2 = ah @ ah
    ah3 = ah2 @ ah
    ah4 = ah3 @ ah
    m = eye + ah + ah2 / 2.0 + ah3 / 6.0 + ah4 / 24.0
    s = eye * dt + a * dt**2 / 2.0 + (a @ a) * dt**3 / 6.0 + (a @ a @ a) * dt**4 / 24.0
    return m, (s @ b) * u


def _propagate(m: np.ndarray, v: np.ndarray, n_steps: int) -> np.ndarray:
    """States after 1..n_steps updates of x+ = M x + v starting from 0."""
    dim = v.shape[0]
    out = np.empty((n_steps, dim))
    block = min(_CHUNK, n_steps)
    mp = np.empty((block, dim, dim))
    w = np.empty((block, dim))
    mp[0] = m
    w[0] = v
    for j in range(1, block):
        mp[j] = m @ mp[j - 1]
        w[j] = m @ w[j - 1] + v
    x = np.zeros(dim)
    pos = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while pos < n_steps:
            c = min(block, n_steps - pos)
            out[pos:pos + c] = mp[:c] @ x + w[:c]
            x = out[pos + c - 1]
            pos += c
    return out


def step_response(g: TransferFunction, t_final: float | None = None,
                  dt: float | None = None,
                  amplitude: float = 1.0) -> StepTrace:
    """Step response on a uniform grid starting at t = 0.

    Defaults: ``dt`` = smallest time constant / 20 and ``t_final`` =
    5 x largest time constant, both derived from the denominator
    poles.  A ``StiffnessWarning`` fires when the chosen dt is coarser
    than a tenth of the fastest time constant.
    """
    tc_small = None
    if g.den.degree >= 1:
        try:
            tc_small, tc_large = characteristic_times(g)
        except ValidationError:
            if t_final is None or dt is None:
                raise
            tc_small = None
    elif t_final is None or dt is None:
        raise ValidationError("static system needs explicit t_final and dt")

    if dt is None:
        dt = tc_small / DEFAULT_DT_DIVISOR
    if t_final is None:
        t_final = DEFAULT_HORIZON_FACTOR * tc_large
    if dt <= 0.0:
        raise ValidationError("dt must be positive")
    if t_final < 10.0 * dt:
        raise ValidationError("t_final must cover at least 10 steps")
    if tc_small is not None and dt > tc_small / 10.0:
        warnings.warn(
            f"dt = {dt:g} is coarse next to the fastest time constant "
            f"{tc_small:g}", StiffnessWarning, stacklevel=2)

    a, b, c, d = _ccf_realization(g)
    n_steps = int(round(t_final / dt))
    t = np.arange(n_steps + 1) * dt
    y = np.empty(n_steps + 1)
    y[0] = d * amplitude
    if a.shape[0] > 0:
        m, v = _rk4_step_matrices(a, b, dt, amplitude)
        states = _propagate(m, v, n_steps)
        y[1:] = states @ c + d * amplitude
    else:
        y[1:] = d * amplitude
    if not np.all(np.isfinite(y)):
        raise SimulationDiverged("step response produced non-finite samples")
    return StepTrace(t=t, y=y, dt=dt, input_amplitude=amplitude)


def _eval_response(g: TransferFunction, omega: np.ndarray) -> np.ndarray:
    s = 1j * omega
    num = np.zeros_like(s)
    for cf in g.num.coeffs[::-1]:
        num = num * s + cf
    den = np.zeros_like(s)
    for cf in g.den.coeffs[::-1]:
        den = den * s + cf
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den


def bode(g: TransferFunction, omega_min: float, omega_max: float,
         points_per_decade: int = 60) -> BodeTrace:
    """Magnitude/phase of g(jw) on a log grid.

    The grid has ``round(ppd * decades) + 1`` points (at least 2).
    Poles on the imaginary axis yield infinities that are passed
    through and flagged via ``contains_nonfinite``.
    """
    if not (0.0 < omega_min < omega_max):
        raise ValidationError("need 0 < omega_min < omega_max")
    if points_per_decade < 1:
        raise ValidationError("points_per_decade must be >= 1")
    decades = math.log10(omega_max / omega_min)
    n = max(2, int(round(points_per_decade * decades)) + 1)
    omega = np.logspace(math.log10(omega_min), math.log10(omega_max), n)
    resp = _eval_response(g, omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        mag_db = 20.0 * np.log10(np.abs(resp))
    phase = np.degrees(np.unwrap(np.angle(resp)))
    flag = not (np.all(np.isfinite(mag_db)) and np.all(np.isfinite(phase)))
    return BodeTrace(omega=omega, mag_db=mag_db, phase_deg=phase,
                     contains_nonfinite=bool(flag))


def ise(a: StepTrace, b: StepTrace) -> float:
    """Trapezoidal integral of the squared sample difference."""
    if a.t.shape != b.t.shape or not np.array_equal(a.t, b.t):
        raise GridMismatch("traces do not share a time grid")
    diff = a.y - b.y
    return float(np.trapezoid(diff * diff, a.t))


def response_metrics(tr: StepTrace) -> ResponseMetrics:
    """Overshoot, 2% settling time, 10-90% rise time and final value.

    The final value is the mean of the last 5% of samples; the trace
    counts as settled only if that whole tail stays within 2% of it.
    """
    y = tr.y
    t = tr.t
    k = max(1, int(round(0.05 * len(y))))
    final = float(np.mean(y[-k:]))
    if final <= 0.0:
        raise NotSettled("final value is not positive; metrics undefined")
    band = 0.02 * abs(final)
    if np.any(np.abs(y[-k:] - final) > band):
        raise NotSettled("trace has not settled within its horizon")

    peak = float(np.max(y))
    overshoot = max(0.0, (peak - final) / final * 100.0)

    outside = np.flatnonzero(np.abs(y - final) > band)
    settling = float(t[outside[-1] + 1]) if outside.size else 0.0

    def crossing(level: float) -> float:
        idx = int(np.argmax(y >= level))
        if y[0] >= level:
            return 0.0
        y0, y1 = y[idx - 1], y[idx]
        frac = (level - y0) / (y1 - y0)
        return float(t[idx - 1] + frac * tr.dt)

    rise = crossing(0.9 * final) - crossing(0.1 * final)
    return ResponseMetrics(overshoot_pct=overshoot, settling_2pct_s=settling,
                           rise_10_90_s=rise, final_value=final)


def constant_trace(like: StepTrace, value: float) -> StepTrace:
    """Trace holding a constant value on the same grid as ``like``."""
    return StepTrace(t=like.t, y=np.full_like(like.y, value), dt=like.dt,
                     input_amplitude=like.input_amplitude)
