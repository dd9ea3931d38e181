"""Root trajectories over the filter time constant and stability decisions.

As tau grows from 0 the closed loop keeps n roots that continue the
exact-design poles (the tracked family) and gains m roots that enter
from infinity near -1/tau (the parasitic family).  This module computes
both families on a tau grid with continuity-preserving matching, decides
Hurwitz stability three ways, brackets the critical time constant, and
produces sampled closeness certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .closedloop import DirtyClosedLoop
from .errors import InconclusiveRouthError, InvalidInputError, NumericalFailureError
from .poly import RealPoly, bipoly_at_tau, poly_roots

__all__ = [
    "RootSweep",
    "StabilityReport",
    "CriticalTau",
    "roots_at_tau",
    "match_roots",
    "classify_parasitic",
    "sweep",
    "is_hurwitz",
    "routh_hurwitz",
    "critical_tau",
    "certify_epsilon",
]

# Matched per-step movement above 0.25*(1+|root|) triggers step bisection.
_CONTINUITY_BUDGET = 0.25
_MAX_BISECT_DEPTH = 20

# "Stable" means max real part < -1e-9*(1 + max|root|); boundary cases
# report unstable (conservative under float jitter at Routh boundaries).
_STABILITY_MARGIN = 1e-9

_ROUTH_ZERO_RTOL = 1e-12

# Floor for geometric tau grids that conceptually start at 0.
TAU_FLOOR = 1e-12


@dataclass(frozen=True)
class RootSweep:
    """Matched root trajectories over a tau grid.

    ``tracked`` holds n paths defined on every grid point (index aligned
    with ``taus``); ``parasitic`` holds m paths defined only for tau > 0
    (index aligned with ``taus[1:]`` when the grid starts at 0, else with
    the whole grid).  ``refined`` flags grid points inserted by adaptive
    bisection.  ``step_displacements`` is the max matched movement per
    consecutive grid pair.
    """

    taus: tuple[float, ...]
    tracked: tuple[tuple[complex, ...], ...]
    parasitic: tuple[tuple[complex, ...], ...]
    refined: tuple[bool, ...]
    step_displacements: tuple[float, ...]


@dataclass(frozen=True)
class StabilityReport:
    tau: float | None
    roots: tuple[complex, ...]
    max_real_part: float
    stable: bool
    method: str  # "root-based" | "routh-hurwitz" | "winding"


@dataclass(frozen=True)
class CriticalTau:
    """Bracketed stable-to-unstable transition, if one was found.

    When ``tau_crit`` is set, the loop is stable at
    tau_crit*(1 - bracket_width) and unstable at
    tau_crit*(1 + bracket_width) on the sampled grid.
    """

    tau_crit: float | None
    sigma_crit: float | None
    bracket_width: float
    tau_max_searched: float


def roots_at_tau(cl: DirtyClosedLoop, tau: float, tol: float = 1e-10) -> list[complex]:
    """Zeros of H(., tau): n roots at tau=0, n+m roots for tau > 0."""
    return poly_roots(bipoly_at_tau(cl.numerator, tau), tol)


def match_roots(prev: Sequence[complex], nxt: Sequence[complex]) -> tuple[int, ...]:
    """Bijection minimizing total pairwise distance (exact assignment).

    Returns indices sigma with nxt[sigma[i]] matched to prev[i].
    """
    if len(prev) != len(nxt):
        raise InvalidInputError(
            f"match_roots needs equal lengths, got {len(prev)} and {len(nxt)}"
        )
    pa = np.asarray(prev, dtype=complex)
    na = np.asarray(nxt, dtype=complex)
    cost = np.abs(pa[:, None] - na[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = [0] * len(prev)
    for r, c in zip(rows, cols):
        out[r] = int(c)
    return tuple(out)


def classify_parasitic(
    paths: Sequence[Sequence[complex]], baseline: Sequence[complex]
) -> tuple[tuple[tuple[complex, ...], ...], tuple[tuple[complex, ...], ...]]:
    """Split matched paths into tracked and parasitic families.

    ``paths`` are the n+m root trajectories over the positive-tau grid,
    index 0 at the smallest positive tau; ``baseline`` are the n roots at
    tau=0.  The n paths whose smallest-tau endpoints the minimum-cost
    assignment pairs with the baseline are tracked (returned with their
    tau=0 ancestor prepended); the rest are parasitic.
    """
    base = [complex(b) for b in baseline]
    if not paths:
        return tuple((b,) for b in base), ()
    starts = np.array([p[0] for p in paths], dtype=complex)
    if len(base) > len(paths):
        raise InvalidInputError("more baseline roots than paths to classify")
    cost = np.abs(np.array(base)[:, None] - starts[None, :])
    rows, cols = linear_sum_assignment(cost)
    col_of_row = dict(zip(rows.tolist(), cols.tolist()))
    tracked = tuple(
        (base[i],) + tuple(paths[col_of_row[i]]) for i in range(len(base))
    )
    taken = set(col_of_row.values())
    leftovers = [tuple(p) for j, p in enumerate(paths) if j not in taken]
    leftovers.sort(key=lambda p: (p[0].real, p[0].imag))
    return tracked, tuple(leftovers)


def _matched_displacements(
    prev: Sequence[complex], nxt: Sequence[complex]
) -> list[tuple[float, float]]:
    """(movement, 1+|root|) per matched pair; rectangular prev matches a subset."""
    pa = np.asarray(prev, dtype=complex)
    na = np.asarray(nxt, dtype=complex)
    cost = np.abs(pa[:, None] - na[None, :])
    rows, cols = linear_sum_assignment(cost)
    return [(float(cost[r, c]), 1.0 + abs(pa[r])) for r, c in zip(rows, cols)]


def sweep(
    cl: DirtyClosedLoop,
    tau_grid: Sequence[float],
    *,
    budget_factor: float = _CONTINUITY_BUDGET,
    max_depth: int = _MAX_BISECT_DEPTH,
    tol: float = 1e-10,
) -> RootSweep:
    """Track all root families over an ascending tau grid starting at 0.

    Consecutive root sets are matched by minimum-cost assignment; any
    matched step moving farther than budget_factor*(1+|root|) is bisected
    recursively (inserted points are flagged refined) up to max_depth,
    beyond which NumericalFailureError carries the partial grid.
    """
    grid = [float(t) for t in tau_grid]
    if not grid:
        raise InvalidInputError("tau grid must be nonempty")
    if grid[0] != 0.0:
        raise InvalidInputError("tau grid must start at 0")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInputError("tau grid must be strictly ascending")

    entries: list[tuple[float, list[complex], bool]] = [
        (0.0, roots_at_tau(cl, 0.0, tol), False)
    ]

    def over_budget(prev_roots, next_roots):
        return any(
            move > budget_factor * scale
            for move, scale in _matched_displacements(prev_roots, next_roots)
        )

    def refine(ta, ra, tb, rb, depth, refined_flag):
        if not over_budget(ra, rb):
            entries.append((tb, rb, refined_flag))
            return
        if depth >= max_depth:
            raise NumericalFailureError(
                f"continuity budget still violated at bisection depth {max_depth} "
                f"between tau = {ta} and tau = {tb}",
                partial=entries,
            )
        tm = 0.5 * (ta + tb)
        rm = roots_at_tau(cl, tm, tol)
        refine(ta, ra, tm, rm, depth + 1, True)
        refine(tm, rm, tb, rb, depth + 1, refined_flag)

    for tb in grid[1:]:
        ta, ra, _ = entries[-1]
        refine(ta, ra, tb, roots_at_tau(cl, tb, tol), 0, False)

    taus = tuple(t for t, _, _ in entries)
    refined = tuple(flag for _, _, flag in entries)

    n = cl.plant.n
    if len(entries) == 1:
        tracked = tuple((r,) for r in entries[0][1])
        return RootSweep(taus, tracked, (), refined, ())

    # Thread paths through the positive-tau grid, then sort out families.
    paths = [[r] for r in entries[1][1]]
    for _, roots, _ in entries[2:]:
        heads = [p[-1] for p in paths]
        sigma = match_roots(heads, roots)
        for path, j in zip(paths, sigma):
            path.append(roots[j])
    tracked, parasitic = classify_parasitic(paths, entries[0][1])

    displacements = []
    for i in range(len(entries) - 1):
        pairs = _matched_displacements(entries[i][1], entries[i + 1][1])
        displacements.append(max(move for move, _ in pairs) if pairs else 0.0)
    return RootSweep(taus, tracked, parasitic, refined, tuple(displacements))


def is_hurwitz(a: RealPoly, tol: float = _STABILITY_MARGIN, tau: float | None = None) -> StabilityReport:
    """Root-based stability: stable iff max Re(root) < -tol*(1 + max|root|)."""
    if a.is_zero() or a.degree < 1:
        raise InvalidInputError("stability needs a polynomial of degree >= 1")
    roots = poly_roots(a)
    max_re = max(r.real for r in roots)
    margin = tol * (1.0 + max(abs(r) for r in roots))
    return StabilityReport(
        tau=tau,
        roots=tuple(roots),
        max_real_part=max_re,
        stable=bool(max_re < -margin),
        method="root-based",
    )


def routh_hurwitz(a: RealPoly) -> tuple[bool, int]:
    """Routh array: (stable, count of right-half-plane roots).

    Raises InconclusiveRouthError when a first-column entry is zero to
    working precision (relative to the row scale); callers fall back to
    the root-based test.
    """
    if a.is_zero() or a.degree < 1:
        raise InvalidInputError("Routh test needs a polynomial of degree >= 1")
    desc = list(reversed(a.coeffs))
    row0 = desc[0::2]
    row1 = desc[1::2]
    width = len(row0)
    row1 += [0.0] * (width - len(row1))
    table = [row0, row1]
    for _ in range(a.degree - 1):
        prev2, prev1 = table[-2], table[-1]
        pivot = prev1[0]
        scale = max(max(abs(x) for x in prev1), max(abs(x) for x in prev2))
        if scale == 0.0 or abs(pivot) <= _ROUTH_ZERO_RTOL * scale:
            raise InconclusiveRouthError(
                "(near-)zero first-column entry in the Routh array"
            )
        new = [
            (pivot * prev2[j + 1] - prev2[0] * prev1[j + 1]) / pivot
            if j + 1 < width
            else 0.0
            for j in range(width)
        ]
        table.append(new)
    first = []
    for row in table[: a.degree + 1]:
        scale = max(abs(x) for x in row)
        if scale == 0.0 or abs(row[0]) <= _ROUTH_ZERO_RTOL * scale:
            raise InconclusiveRouthError(
                "(near-)zero first-column entry in the Routh array"
            )
        first.append(row[0])
    changes = sum(1 for x, y in zip(first, first[1:]) if (x < 0) != (y < 0))
    return changes == 0, changes


def critical_tau(cl: DirtyClosedLoop, tau_max: float, tol: float) -> CriticalTau:
    """First stable-to-unstable transition in tau, bisected to width <= tol.

    A coarse 64-point geometric sweep over (tau_max*1e-6, tau_max] locates
    the transition; bisection then shrinks the bracket until
    (hi - lo) <= tol * midpoint.  Returns tau_crit = None when every
    sampled tau is stable.
    """
    if not math.isfinite(tau_max) or tau_max <= 0.0:
        raise InvalidInputError(f"tau_max must be positive, got {tau_max}")
    if not math.isfinite(tol) or tol <= 0.0:
        raise InvalidInputError(f"tolerance must be positive, got {tol}")
    if not is_hurwitz(bipoly_at_tau(cl.numerator, 0.0)).stable:
        raise InvalidInputError("baseline p - k must be Hurwitz")

    def stable_at(t: float) -> bool:
        return is_hurwitz(bipoly_at_tau(cl.numerator, t), tau=t).stable

    lo = 0.0
    hi = None
    for t in np.geomspace(tau_max * 1e-6, tau_max, 64):
        if stable_at(float(t)):
            lo = float(t)
        else:
            hi = float(t)
            break
    if hi is None:
        return CriticalTau(None, None, 0.0, tau_max)
    while hi - lo > tol * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        if stable_at(mid):
            lo = mid
        else:
            hi = mid
    tau_crit = 0.5 * (lo + hi)
    return CriticalTau(tau_crit, 1.0 / tau_crit, (hi - lo) / (2.0 * tau_crit), tau_max)


def certify_epsilon(
    cl: DirtyClosedLoop, epsilon: float, tau_max: float, grid_density: int = 16
) -> float:
    """Largest sampled tau* with every tracked root within epsilon of its
    tau=0 ancestor at every sampled tau <= tau*.

    Sampling is geometric with grid_density points per decade over
    [TAU_FLOOR, tau_max] plus the exact tau=0 point.  This is a sampled
    certificate only: nothing is proven between grid points.
    """
    if not math.isfinite(epsilon) or epsilon <= 0.0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    if not math.isfinite(tau_max) or tau_max <= TAU_FLOOR:
        raise InvalidInputError(f"tau_max must exceed {TAU_FLOOR}, got {tau_max}")
    if grid_density < 1:
        raise InvalidInputError(f"grid_density must be >= 1, got {grid_density}")
    if not is_hurwitz(bipoly_at_tau(cl.numerator, 0.0)).stable:
        raise InvalidInputError("baseline p - k must be Hurwitz")
    decades = math.log10(tau_max / TAU_FLOOR)
    npts = max(2, math.ceil(decades * grid_density) + 1)
    grid = [0.0] + [float(t) for t in np.geomspace(TAU_FLOOR, tau_max, npts)]
    sw = sweep(cl, grid)
    tau_star = 0.0
    for idx in range(1, len(sw.taus)):
        worst = max(abs(path[idx] - path[0]) for path in sw.tracked)
        if worst <= epsilon:
            tau_star = sw.taus[idx]
        else:
            break
    return tau_star
