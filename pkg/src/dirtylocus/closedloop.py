"""Validated feedback problems and the filtered-derivative closed loop.

A problem is a monic plant polynomial p (degree n) and a feedback
polynomial k (degree m <= n-1).  Replacing each differentiator in the
feedback path with the first-order-filtered version s/(tau*s + 1) turns
the exact characteristic polynomial p - k into the rational function

    H(s, tau) = p(s) - k(s / (tau*s + 1)) = N(s, tau) / (tau*s + 1)**m,

whose zeros are the closed-loop poles.  This module validates (p, k),
assembles the numerator N, and evaluates H and G = 1/H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidInputError, PoleError, SingularityError
from .poly import (
    BiPoly,
    RealPoly,
    bipoly_add,
    bipoly_eval,
    bipoly_from_real,
    bipoly_mul,
    linear_power,
)

__all__ = [
    "PlantSpec",
    "FeedbackSpec",
    "DirtyClosedLoop",
    "build_problem",
    "delta_eval",
    "assemble_numerator",
    "eval_H",
    "eval_G",
]

# |tau*s + 1| below this relative threshold counts as the filter pole.
_FILTER_POLE_RTOL = 1e-12


@dataclass(frozen=True)
class PlantSpec:
    """Monic open-loop characteristic polynomial and its degree n."""

    p: RealPoly
    n: int


@dataclass(frozen=True)
class FeedbackSpec:
    """Feedback polynomial acting on output derivatives; m = deg k.

    The zero polynomial is allowed and carries m = 0 (pure static
    feedback of zero, i.e. open loop).
    """

    k: RealPoly
    m: int


@dataclass(frozen=True)
class DirtyClosedLoop:
    """A validated (p, k) pair with the assembled numerator of H.

    ``numerator`` is N(s, tau) such that H = N / (tau*s + 1)**m; its
    tau=0 slice equals p - k coefficient for coefficient.
    """

    plant: PlantSpec
    feedback: FeedbackSpec
    numerator: BiPoly
    m: int


def build_problem(p_coeffs: Sequence[float], k_coeffs: Sequence[float]) -> DirtyClosedLoop:
    """Validate coefficient lists (ascending degree) and assemble N.

    Raises InvalidInputError naming the violated requirement: empty
    coefficient lists, non-monic or constant p, or deg k > deg p - 1.
    """
    if p_coeffs is None or len(list(p_coeffs)) == 0:
        raise InvalidInputError("empty coefficient list for p")
    if k_coeffs is None or len(list(k_coeffs)) == 0:
        raise InvalidInputError("empty coefficient list for k")
    p = RealPoly.from_coeffs(p_coeffs)
    k = RealPoly.from_coeffs(k_coeffs)
    if p.is_zero() or p.degree < 1:
        raise InvalidInputError("p must have degree >= 1")
    if p.coeffs[-1] != 1.0:
        raise InvalidInputError(
            f"p must be monic (leading coefficient exactly 1, got {p.coeffs[-1]!r})"
        )
    n = p.degree
    m = 0 if k.is_zero() else k.degree
    if m > n - 1:
        raise InvalidInputError(
            f"deg k must be <= deg p - 1 (got deg k = {m}, deg p = {n})"
        )
    plant = PlantSpec(p, n)
    feedback = FeedbackSpec(k, m)
    return DirtyClosedLoop(plant, feedback, assemble_numerator(plant, feedback), m)


def delta_eval(s: complex, tau: float) -> complex:
    """The filtered differentiator s/(tau*s + 1); tau=0 returns s exactly."""
    tau = float(tau)
    if not math.isfinite(tau) or tau < 0.0:
        raise InvalidInputError(f"tau must be finite and >= 0, got {tau}")
    s = complex(s)
    if tau == 0.0:
        return s
    w = tau * s
    den = w + 1.0
    if abs(den) <= _FILTER_POLE_RTOL * (1.0 + abs(w)):
        raise SingularityError(
            f"filter pole: tau*s + 1 = {den} at s = {s}, tau = {tau}"
        )
    return s / den


def assemble_numerator(plant: PlantSpec, feedback: FeedbackSpec) -> BiPoly:
    """N(s,tau) = (tau*s+1)**m * p(s) - sum_i k_i * s**i * (tau*s+1)**(m-i).

    Clearing the filter denominators this way keeps every coefficient an
    integer combination of the inputs, so integer problems assemble
    exactly.  Column j=0 is p - k.
    """
    m = feedback.m
    acc = bipoly_mul(linear_power(1.0, 1.0, m), bipoly_from_real(plant.p))
    for i, ki in enumerate(feedback.k.coeffs):
        if ki == 0.0:
            continue
        s_term = BiPoly.from_rows([[0.0]] * i + [[-ki]])
        acc = bipoly_add(acc, bipoly_mul(s_term, linear_power(1.0, 1.0, m - i)))
    return acc


def eval_H(cl: DirtyClosedLoop, s: complex, tau: float) -> complex:
    """H(s, tau) = N(s, tau) / (tau*s + 1)**m; at tau=0 this is (p - k)(s)."""
    tau = float(tau)
    if not math.isfinite(tau) or tau < 0.0:
        raise InvalidInputError(f"tau must be finite and >= 0, got {tau}")
    s = complex(s)
    num = bipoly_eval(cl.numerator, s, tau)
    if tau == 0.0 or cl.m == 0:
        return num
    w = tau * s
    den = w + 1.0
    if abs(den) <= _FILTER_POLE_RTOL * (1.0 + abs(w)):
        raise SingularityError(
            f"filter pole: tau*s + 1 = {den} at s = {s}, tau = {tau}"
        )
    return num / den**cl.m


def eval_G(cl: DirtyClosedLoop, s: complex, tau: float) -> complex:
    """G = 1/H; raises PoleError at zeros of H (closed-loop poles)."""
    h = eval_H(cl, s, tau)
    if h == 0.0:
        raise PoleError(f"closed-loop pole: H(s, tau) = 0 at s = {s}, tau = {tau}")
    return 1.0 / h
