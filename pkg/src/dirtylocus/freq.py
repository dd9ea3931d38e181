"""Frequency-domain view: Nyquist sampling, winding-number stability via
the argument principle, and the tau-sensitivity of H.

H(s, tau) = p(s) - k(delta) is differentiable in tau with

    dH/dtau = k'(delta(s, tau)) * s**2 / (tau*s + 1)**2,

so the frequency response deforms smoothly as the filter slows down.  The
log-magnitude sensitivity d/dtau log ||H||**2 = 2 Re(conj(H) dH/dtau) /
||H||**2 is real by construction.  Stability is read off the winding
number of the numerator polynomial N(., tau) around 0 along the closed
right-half-plane contour: N is entire, so the winding equals its RHP zero
count exactly.

Limits of dH/dtau for tau > 0: near s = 0 it behaves as k'(0) * s**2; as
|s| grows, delta tends to 1/tau and s**2/(tau*s+1)**2 tends to 1/tau**2,
so dH/dtau tends to k'(1/tau) / tau**2 (a tau-dependent plateau).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .closedloop import DirtyClosedLoop, delta_eval, eval_H
from .errors import (
    ContourDegeneracyError,
    InvalidInputError,
    NumericalFailureError,
    PoleError,
)
from .poly import bipoly_at_tau, cauchy_root_bound, poly_derivative, poly_eval

__all__ = [
    "FreqSample",
    "NyquistResult",
    "dH_dtau",
    "log_mag_sensitivity",
    "nyquist_samples",
    "winding_number",
    "asymptotic_limits",
]

# A contour sample with |N| below 1e-9 times the coefficient scale means
# a zero (nearly) on the contour; the winding would be meaningless.
_CONTOUR_DEGENERACY_RTOL = 1e-9

# Consecutive contour samples may differ in phase by at most this many
# radians; larger jumps are resolved by recursive midpoint refinement.
_MAX_PHASE_STEP = 1.0
_MAX_REFINE_DEPTH = 40

_WINDING_INTEGER_TOL = 0.01


@dataclass(frozen=True)
class FreqSample:
    """One frequency-response sample of H and its tau-sensitivity."""

    omega: float
    H: complex
    dH_dtau: complex
    log_mag_sensitivity: float


@dataclass(frozen=True)
class NyquistResult:
    """Winding of the numerator around 0 along the closed RHP contour."""

    tau: float
    contour_radius: float
    samples: tuple[tuple[complex, complex], ...]  # (contour point, N value)
    winding_number: int


def dH_dtau(cl: DirtyClosedLoop, s: complex, tau: float) -> complex:
    """dH/dtau = k'(delta(s, tau)) * s**2 / (tau*s + 1)**2."""
    s = complex(s)
    kp = poly_eval(poly_derivative(cl.feedback.k), delta_eval(s, tau))
    return kp * s * s / (tau * s + 1.0) ** 2


def log_mag_sensitivity(cl: DirtyClosedLoop, s: complex, tau: float) -> float:
    """d/dtau of log ||H||**2, i.e. 2 Re(conj(H) dH/dtau) / ||H||**2."""
    h = eval_H(cl, s, tau)
    if h == 0.0:
        raise PoleError(f"H(s, tau) = 0 at s = {s}, tau = {tau}")
    d = dH_dtau(cl, s, tau)
    return 2.0 * (h.conjugate() * d).real / (abs(h) ** 2)


def nyquist_samples(
    cl: DirtyClosedLoop, tau: float, omega_grid: Sequence[float]
) -> list[FreqSample]:
    """Sample H(j*omega, tau), dH/dtau, and the log-magnitude sensitivity."""
    out = []
    for omega in omega_grid:
        w = float(omega)
        if not math.isfinite(w):
            raise InvalidInputError(f"omega grid must be finite, got {omega!r}")
        s = 1j * w
        try:
            sens = log_mag_sensitivity(cl, s, tau)
        except PoleError as exc:
            raise PoleError(f"singular grid point omega = {w!r}: {exc}") from exc
        out.append(FreqSample(w, eval_H(cl, s, tau), dH_dtau(cl, s, tau), sens))
    return out


def _wrapped_arg_change(
    f: Callable[[float], complex],
    t_a: float,
    v_a: complex,
    t_b: float,
    v_b: complex,
    check: Callable[[float, complex], None],
    depth: int = 0,
) -> float:
    dphi = cmath.phase(v_b / v_a)
    if abs(dphi) <= _MAX_PHASE_STEP:
        return dphi
    if depth >= _MAX_REFINE_DEPTH:
        raise NumericalFailureError(
            f"contour phase change cannot be resolved near parameter {t_a}"
        )
    t_m = 0.5 * (t_a + t_b)
    v_m = f(t_m)
    check(t_m, v_m)
    return _wrapped_arg_change(f, t_a, v_a, t_m, v_m, check, depth + 1) + (
        _wrapped_arg_change(f, t_m, v_m, t_b, v_b, check, depth + 1)
    )


def _arg_change_along(
    f: Callable[[float], complex],
    params: np.ndarray,
    check: Callable[[float, complex], None],
) -> tuple[float, list[tuple[float, complex]]]:
    sampled = []
    for t in params:
        v = f(float(t))
        check(float(t), v)
        sampled.append((float(t), v))
    total = 0.0
    for (t_a, v_a), (t_b, v_b) in zip(sampled, sampled[1:]):
        total += _wrapped_arg_change(f, t_a, v_a, t_b, v_b, check)
    return total, sampled


def winding_number(
    cl: DirtyClosedLoop,
    tau: float,
    radius: float | None = None,
    samples_per_unit: int = 64,
) -> NyquistResult:
    """Winding of N(., tau) around 0 along the closed RHP contour.

    The contour runs down the imaginary axis from +jR to -jR (so the
    right half-plane lies to its left) and closes with the right
    semicircle; the result equals the RHP zero count of N.  The
    semicircle's contribution is the analytic leading-term change d*pi
    plus the sampled change of N normalized by the leading term.
    """
    a = bipoly_at_tau(cl.numerator, tau)
    if a.degree < 1:
        raise InvalidInputError("winding needs a numerator of degree >= 1")
    bound = cauchy_root_bound(a)
    if radius is None:
        radius = 2.5 * (1.0 + bound)
    elif radius <= 2.0 * (1.0 + bound):
        raise InvalidInputError(
            f"contour radius {radius} must exceed 2*(1 + root bound) = {2.0 * (1.0 + bound)}"
        )
    deg = a.degree
    lead = a.coeffs[-1]
    coeffs = np.array(a.coeffs, dtype=complex)
    abs_coeffs = np.abs(coeffs)

    def value(s: complex) -> complex:
        acc = complex(coeffs[-1])
        for c in coeffs[-2::-1]:
            acc = acc * s + c
        return acc

    def scale(s: complex) -> float:
        mag = abs(s)
        acc = float(abs_coeffs[-1])
        for c in abs_coeffs[-2::-1]:
            acc = acc * mag + float(c)
        return acc

    def check_axis(omega: float, v: complex) -> None:
        if abs(v) < _CONTOUR_DEGENERACY_RTOL * scale(1j * omega):
            raise ContourDegeneracyError(
                f"|N| = {abs(v):.3e} at omega = {omega}: a zero (nearly) sits on "
                "the contour; change the radius"
            )

    # Imaginary axis, traversed from +jR down to -jR.
    n_axis = max(257, int(2.0 * radius * samples_per_unit) + 1)
    axis_params = np.linspace(radius, -radius, n_axis)
    axis_change, axis_samples = _arg_change_along(
        lambda om: value(1j * om), axis_params, check_axis
    )

    # Right semicircle, theta from -pi/2 to +pi/2, normalized by the
    # leading term so the sampled part stays O(1/R) from 1.
    def semi_value(theta: float) -> complex:
        s = radius * cmath.exp(1j * theta)
        return value(s) / (lead * radius**deg * cmath.exp(1j * deg * theta))

    def check_semi(theta: float, v: complex) -> None:
        s = radius * cmath.exp(1j * theta)
        if abs(v) * abs(lead) * radius**deg < _CONTOUR_DEGENERACY_RTOL * scale(s):
            raise ContourDegeneracyError(
                f"|N| nearly vanishes on the semicircle at theta = {theta}"
            )

    semi_params = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 1025)
    semi_change, semi_samples = _arg_change_along(semi_value, semi_params, check_semi)

    total = axis_change + deg * math.pi + semi_change
    w = total / (2.0 * math.pi)
    nearest = round(w)
    if abs(w - nearest) > _WINDING_INTEGER_TOL:
        raise NumericalFailureError(
            f"accumulated winding {w} is not within {_WINDING_INTEGER_TOL} of an integer"
        )
    samples = [(1j * om, v) for om, v in axis_samples]
    samples += [
        (radius * cmath.exp(1j * th), v * lead * radius**deg * cmath.exp(1j * deg * th))
        for th, v in semi_samples
    ]
    return NyquistResult(
        tau=float(tau),
        contour_radius=float(radius),
        samples=tuple(samples),
        winding_number=int(nearest),
    )


def asymptotic_limits(cl: DirtyClosedLoop, tau: float) -> tuple[complex, complex]:
    """(small-s, large-s) limits of dH/dtau for tau > 0.

    small-s: the coefficient k'(0) of the s**2 behavior near the origin.
    large-s: k'(1/tau) / tau**2, since delta tends to 1/tau and
    s**2/(tau*s+1)**2 tends to 1/tau**2.
    """
    tau = float(tau)
    if not tau > 0.0:
        raise InvalidInputError(f"asymptotic limits need tau > 0, got {tau}")
    kprime = poly_derivative(cl.feedback.k)
    small = complex(poly_eval(kprime, 0.0))
    large = complex(poly_eval(kprime, 1.0 / tau)) / tau**2
    return small, large
