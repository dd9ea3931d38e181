"""Level-set tracing: curves s(tau) along which H(s(tau), tau) stays at a
fixed value z.

Differentiating H(s, tau) = p(s) - k(delta) with delta = s/(tau*s + 1)
and setting the total derivative to zero gives the tracing ODE

    ds/dtau = -k'(delta) * s**2 / ((tau*s + 1)**2 * p'(s) - k'(delta)).

The s**2 factor in the numerator comes from d(delta)/d(tau) = -s**2 /
(tau*s + 1)**2 and is essential: dropping it (the ``paper_literal``
diagnostic form, kept for negative testing) visibly drifts off the level
set.  Vanishing of the denominator marks a stationary point of H in s,
where locus branches meet; the tracer stops there and reports rather
than guessing a branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .closedloop import DirtyClosedLoop, delta_eval, eval_H
from .errors import (
    BifurcationSingularityError,
    InvalidInputError,
    SingularityError,
)
from .poly import poly_derivative, poly_eval

__all__ = [
    "LocusTrace",
    "LocusField",
    "locus_rhs",
    "trace_locus",
    "locus_field_scan",
]

STATUS_COMPLETED = "completed"
STATUS_BIFURCATION = "bifurcation"
STATUS_STEP_FAILURE = "step-failure"

# |denominator| below 1e-8*(1 + |p'(s)|*|tau*s+1|^2) counts as singular.
_SINGULARITY_RTOL = 1e-8

# Step-doubling controller: relative local-error target, growth clamp,
# and the minimum step as a fraction of the whole span.
_STEP_RTOL = 1e-8
_MIN_STEP_FRACTION = 1e-14

# Corrector: Newton on s -> H(s, tau) - z after every accepted step.
_LEVEL_TOL = 1e-10
_NEWTON_TOL = 1e-12
_NEWTON_MAX_ITER = 25


@dataclass(frozen=True)
class LocusTrace:
    """An accepted-point record of one level-set trace.

    ``residuals`` are |H - z| after correction (bounded by the corrector
    tolerance on every accepted point); ``drifts`` are the same quantity
    before correction, which is the honest error of the predictor alone.
    ``denominators`` records |ODE denominator| per point.
    """

    level: complex
    taus: tuple[float, ...]
    values: tuple[complex, ...]
    residuals: tuple[float, ...]
    drifts: tuple[float, ...]
    denominators: tuple[float, ...]
    status: str
    stop_info: str
    final_denominator: float

    @property
    def points(self) -> tuple[tuple[float, complex], ...]:
        return tuple(zip(self.taus, self.values))


@dataclass(frozen=True)
class LocusField:
    """Direction-field samples on a rectangle; singular cells flagged."""

    re_axis: tuple[float, ...]
    im_axis: tuple[float, ...]
    values: tuple[tuple[complex, ...], ...]  # values[i][j] at re_axis[i] + 1j*im_axis[j]
    singular: tuple[tuple[bool, ...], ...]


def _denominator(cl: DirtyClosedLoop, s: complex, tau: float) -> tuple[complex, complex, complex]:
    """(denominator, k'(delta), p'(s)) of the tracing ODE at (s, tau)."""
    s = complex(s)
    kp = poly_eval(poly_derivative(cl.feedback.k), delta_eval(s, tau))
    pp = poly_eval(poly_derivative(cl.plant.p), s)
    w = (tau * s + 1.0) ** 2
    return w * pp - kp, kp, pp


def locus_rhs(cl: DirtyClosedLoop, s: complex, tau: float, *, paper_literal: bool = False) -> complex:
    """ds/dtau of the level-set ODE at (s, tau).

    ``paper_literal=True`` drops the s**2 numerator factor; this form is
    wrong (it does not keep H constant) and exists only as a negative
    control.  Raises BifurcationSingularityError when the denominator is
    below the scale-aware threshold.
    """
    s = complex(s)
    denom, kp, pp = _denominator(cl, s, tau)
    threshold = _SINGULARITY_RTOL * (1.0 + abs(pp) * abs(tau * s + 1.0) ** 2)
    if abs(denom) <= threshold:
        raise BifurcationSingularityError(
            f"stationary point of H: ODE denominator {denom} at s = {s}, tau = {tau}",
            s=s,
            tau=tau,
            denominator=denom,
        )
    num = -kp if paper_literal else -kp * s * s
    return num / denom


def _dH_ds(cl: DirtyClosedLoop, s: complex, tau: float) -> complex:
    """dH/ds = p'(s) - k'(delta) / (tau*s + 1)**2."""
    s = complex(s)
    kp = poly_eval(poly_derivative(cl.feedback.k), delta_eval(s, tau))
    pp = poly_eval(poly_derivative(cl.plant.p), s)
    return pp - kp / (tau * s + 1.0) ** 2


def _rk4(f: Callable[[complex, float], complex], s: complex, t: float, h: float) -> complex:
    k1 = f(s, t)
    k2 = f(s + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(s + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(s + h * k3, t + h)
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _newton_correct(cl: DirtyClosedLoop, s: complex, tau: float, z: complex) -> complex | None:
    """Pull s back onto the level set; None signals divergence."""
    tol = _NEWTON_TOL * (1.0 + abs(z))
    for _ in range(_NEWTON_MAX_ITER):
        r = eval_H(cl, s, tau) - z
        if abs(r) <= tol:
            return s
        dh = _dH_ds(cl, s, tau)
        if dh == 0.0:
            return None
        step = r / dh
        if abs(step) > 0.5 * (1.0 + abs(s)):
            return None
        s = s - step
    return s if abs(eval_H(cl, s, tau) - z) <= tol else None


def trace_locus(
    cl: DirtyClosedLoop,
    s0: complex,
    tau0: float,
    tau1: float,
    z: complex = 0j,
    *,
    paper_literal: bool = False,
    correct: bool = True,
) -> LocusTrace:
    """Integrate the level-set ODE from (s0, tau0) to tau1.

    Predictor: classical 4-stage Runge-Kutta with step-doubling error
    control.  Corrector: Newton restoration of H(s, tau) = z after every
    accepted step (``correct=False`` integrates the bare predictor, which
    is what the negative test of the literal ODE form needs).

    The start must lie on the level set within the corrector tolerance.
    Stops with status "bifurcation" when the ODE denominator vanishes and
    "step-failure" when the controller underflows the minimum step.
    """
    s0 = complex(s0)
    z = complex(z)
    tau0 = float(tau0)
    tau1 = float(tau1)
    if tau0 == tau1:
        raise InvalidInputError("tau0 and tau1 must differ")
    level_tol = _LEVEL_TOL * (1.0 + abs(z))
    r0 = abs(eval_H(cl, s0, tau0) - z)
    if r0 > level_tol:
        raise InvalidInputError(
            f"initial point is off the level set: |H(s0, tau0) - z| = {r0:.3e}"
        )

    def rhs(s: complex, t: float) -> complex:
        return locus_rhs(cl, s, t, paper_literal=paper_literal)

    def denom_mag(s: complex, t: float) -> float:
        try:
            d, _, _ = _denominator(cl, s, t)
            return abs(d)
        except SingularityError:
            return math.nan

    taus = [tau0]
    values = [s0]
    residuals = [r0]
    drifts = [r0]
    denominators = [denom_mag(s0, tau0)]
    status = STATUS_COMPLETED
    stop_info = ""

    span = tau1 - tau0
    h = span / 100.0
    h_min = _MIN_STEP_FRACTION * abs(span)
    t, s = tau0, s0

    while True:
        remaining = tau1 - t
        if remaining == 0.0 or abs(remaining) < h_min:
            stop_info = f"reached tau = {t}"
            break
        if abs(h) > abs(remaining):
            h = remaining
        try:
            s_full = _rk4(rhs, s, t, h)
            s_half = _rk4(rhs, s, t, 0.5 * h)
            s_fine = _rk4(rhs, s_half, t + 0.5 * h, 0.5 * h)
        except BifurcationSingularityError as exc:
            status = STATUS_BIFURCATION
            stop_info = (
                f"denominator {abs(exc.denominator):.3e} at s = {exc.s}, tau = {exc.tau}"
            )
            denominators[-1] = abs(exc.denominator)
            break
        err = abs(s_fine - s_full) / 15.0
        step_tol = _STEP_RTOL * (1.0 + abs(s_fine))
        if err <= step_tol:
            t_new = t + h
            if t_new == tau1 or abs(tau1 - t_new) < h_min:
                t_new = tau1
            s_new = s_fine
            drift = abs(eval_H(cl, s_new, t_new) - z)
            if correct:
                corrected = _newton_correct(cl, s_new, t_new, z)
                if corrected is None:
                    h *= 0.5
                    if abs(h) < h_min:
                        status = STATUS_STEP_FAILURE
                        stop_info = f"corrector divergence at tau = {t_new}"
                        break
                    continue
                s_new = corrected
            res = abs(eval_H(cl, s_new, t_new) - z)
            taus.append(t_new)
            values.append(s_new)
            residuals.append(res)
            drifts.append(drift)
            denominators.append(denom_mag(s_new, t_new))
            t, s = t_new, s_new
            grow = 0.9 * (step_tol / err) ** 0.2 if err > 0.0 else 2.0
            h *= min(2.0, max(0.2, grow))
        else:
            h *= max(0.1, 0.9 * (step_tol / err) ** 0.2)
            if abs(h) < h_min:
                status = STATUS_STEP_FAILURE
                stop_info = f"step size underflow at tau = {t}"
                break

    if status == STATUS_COMPLETED and not stop_info:
        stop_info = f"reached tau = {t}"
    return LocusTrace(
        level=z,
        taus=tuple(taus),
        values=tuple(values),
        residuals=tuple(residuals),
        drifts=tuple(drifts),
        denominators=tuple(denominators),
        status=status,
        stop_info=stop_info,
        final_denominator=denominators[-1],
    )


def locus_field_scan(
    cl: DirtyClosedLoop,
    region: tuple[float, float, float, float],
    tau: float,
    grid: tuple[int, int],
) -> LocusField:
    """Sample the tracing ODE on a rectangle (re_min, re_max, im_min, im_max).

    Singular cells (stationary points, filter pole) are flagged and hold
    nan values instead of raising.
    """
    re_min, re_max, im_min, im_max = (float(x) for x in region)
    n_re, n_im = grid
    if n_re < 2 or n_im < 2:
        raise InvalidInputError("field scan grid must be at least 2x2")
    if re_max <= re_min or im_max <= im_min:
        raise InvalidInputError("field scan region must have positive extent")
    re_axis = [re_min + (re_max - re_min) * i / (n_re - 1) for i in range(n_re)]
    im_axis = [im_min + (im_max - im_min) * j / (n_im - 1) for j in range(n_im)]
    values: list[tuple[complex, ...]] = []
    singular: list[tuple[bool, ...]] = []
    for re in re_axis:
        row_v: list[complex] = []
        row_s: list[bool] = []
        for im in im_axis:
            try:
                row_v.append(locus_rhs(cl, complex(re, im), tau))
                row_s.append(False)
            except (BifurcationSingularityError, SingularityError):
                row_v.append(complex(math.nan, math.nan))
                row_s.append(True)
        values.append(tuple(row_v))
        singular.append(tuple(row_s))
    return LocusField(tuple(re_axis), tuple(im_axis), tuple(values), tuple(singular))
