"""Polynomial arithmetic in s and in (s, tau), plus complex root finding.

Coefficients are stored ascending as plain floats.  All arithmetic is
double precision; operations that are exact over the integers (addition,
convolution, binomial expansion) stay exact as long as every intermediate
fits in 53 bits, which covers the problem sizes handled here.

The root finder is a simultaneous-iteration (Aberth-Ehrlich) solver.  It
must cope with badly scaled inputs: the closed-loop numerator at small
filter time constants has a leading coefficient of order tau**m while the
low-order coefficients stay O(1), so root magnitudes split into an O(1)
cluster and a parasitic cluster near 1/tau.  Initial guesses therefore
come from the Newton polygon of the coefficients (one circle of starting
points per hull edge) instead of a single enclosing circle; a single
circle of radius 1 + max|c_i/c_lead| can exceed 1/tau**m and the
iteration budget by orders of magnitude.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, NumericalFailureError

__all__ = [
    "RealPoly",
    "BiPoly",
    "poly_add",
    "poly_mul",
    "poly_derivative",
    "poly_eval",
    "linear_power",
    "bipoly_from_real",
    "bipoly_add",
    "bipoly_mul",
    "bipoly_at_tau",
    "bipoly_eval",
    "poly_roots",
    "cauchy_root_bound",
]

# Relative step size below which the simultaneous iteration is converged.
_ABERTH_STEP_TOL = 1e-13
_ABERTH_MAX_ITER = 200

# bipoly_at_tau drops trailing coefficients below this relative magnitude
# (catches exact zeros and denormal dust, nothing more).
_DEGREE_TRIM_RTOL = 1e-300


@dataclass(frozen=True)
class RealPoly:
    """Univariate real polynomial; ``coeffs[i]`` multiplies ``s**i``.

    Canonical form: the highest-index coefficient is nonzero, except for
    the zero polynomial which is the single coefficient ``(0.0,)``.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        cs = tuple(float(c) for c in self.coeffs)
        if not cs:
            raise InvalidInputError("RealPoly needs at least one coefficient")
        if any(not math.isfinite(c) for c in cs):
            raise InvalidInputError("RealPoly coefficients must be finite")
        if len(cs) > 1 and cs[-1] == 0.0:
            raise InvalidInputError(
                "RealPoly is not canonical: highest-index coefficient is zero"
            )
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[float]) -> "RealPoly":
        """Build a canonical polynomial, trimming exactly-zero leading terms."""
        cs = [float(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0.0:
            cs.pop()
        if not cs:
            cs = [0.0]
        return cls(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)


@dataclass(frozen=True)
class BiPoly:
    """Real polynomial in (s, tau); ``coeffs[i][j]`` multiplies ``s**i * tau**j``.

    Trimmed form: the last row and the last column each contain a nonzero
    entry (zero polynomial excepted).  Column j=0 is the tau=0 slice.
    """

    coeffs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(c) for c in row) for row in self.coeffs)
        if not rows or not rows[0]:
            raise InvalidInputError("BiPoly needs at least one coefficient")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise InvalidInputError("BiPoly coefficient rows must be rectangular")
        if any(not math.isfinite(c) for row in rows for c in row):
            raise InvalidInputError("BiPoly coefficients must be finite")
        nonzero = any(c != 0.0 for row in rows for c in row)
        if nonzero:
            if all(c == 0.0 for c in rows[-1]):
                raise InvalidInputError("BiPoly is not trimmed: zero last row")
            if all(row[-1] == 0.0 for row in rows):
                raise InvalidInputError("BiPoly is not trimmed: zero last column")
        elif len(rows) > 1 or width > 1:
            raise InvalidInputError("zero BiPoly must be the single coefficient 0")
        object.__setattr__(self, "coeffs", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "BiPoly":
        """Build a trimmed BiPoly from a (possibly padded) coefficient grid."""
        grid = [[float(c) for c in row] for row in rows]
        if not grid or not grid[0]:
            return cls(((0.0,),))
        while len(grid) > 1 and all(c == 0.0 for c in grid[-1]):
            grid.pop()
        width = max(len(row) for row in grid)
        for row in grid:
            row.extend(0.0 for _ in range(width - len(row)))
        while width > 1 and all(row[-1] == 0.0 for row in grid):
            for row in grid:
                row.pop()
            width -= 1
        if len(grid) == 1 and width == 1 and grid[0][0] == 0.0:
            return cls(((0.0,),))
        return cls(tuple(tuple(row) for row in grid))

    @property
    def degree_s(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree_tau(self) -> int:
        return len(self.coeffs[0]) - 1


def poly_add(a: RealPoly, b: RealPoly) -> RealPoly:
    """Coefficient-wise sum, returned canonical."""
    la, lb = len(a.coeffs), len(b.coeffs)
    out = [0.0] * max(la, lb)
    for i, c in enumerate(a.coeffs):
        out[i] += c
    for i, c in enumerate(b.coeffs):
        out[i] += c
    return RealPoly.from_coeffs(out)


def poly_mul(a: RealPoly, b: RealPoly) -> RealPoly:
    """Exact coefficient convolution."""
    if a.is_zero() or b.is_zero():
        return RealPoly((0.0,))
    out = [0.0] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, ca in enumerate(a.coeffs):
        if ca == 0.0:
            continue
        for j, cb in enumerate(b.coeffs):
            out[i + j] += ca * cb
    return RealPoly.from_coeffs(out)


def poly_derivative(a: RealPoly) -> RealPoly:
    """d/ds: the power rule ``c'[i] = (i+1) c[i+1]``."""
    if a.degree == 0:
        return RealPoly((0.0,))
    return RealPoly.from_coeffs(
        (i + 1) * c for i, c in enumerate(a.coeffs[1:])
    )


def poly_eval(a: RealPoly, s: complex) -> complex:
    """Horner evaluation at a complex point."""
    s = complex(s)
    acc = complex(a.coeffs[-1])
    for c in reversed(a.coeffs[:-1]):
        acc = acc * s + c
    return acc


def linear_power(a: float, b: float, m: int) -> BiPoly:
    """Binomial expansion of ``(a*tau*s + b)**m`` as a BiPoly.

    Exact for integer inputs (binomial coefficients are integers).
    """
    if m < 0:
        raise InvalidInputError(f"linear_power exponent must be >= 0, got {m}")
    grid = [[0.0] * (m + 1) for _ in range(m + 1)]
    for j in range(m + 1):
        grid[j][j] = math.comb(m, j) * float(a) ** j * float(b) ** (m - j)
    return BiPoly.from_rows(grid)


def bipoly_from_real(p: RealPoly) -> BiPoly:
    """Embed a polynomial in s as a tau-independent BiPoly."""
    return BiPoly.from_rows([[c] for c in p.coeffs])


def bipoly_add(a: BiPoly, b: BiPoly) -> BiPoly:
    rows = max(len(a.coeffs), len(b.coeffs))
    cols = max(len(a.coeffs[0]), len(b.coeffs[0]))
    grid = [[0.0] * cols for _ in range(rows)]
    for src in (a, b):
        for i, row in enumerate(src.coeffs):
            for j, c in enumerate(row):
                grid[i][j] += c
    return BiPoly.from_rows(grid)


def bipoly_mul(a: BiPoly, b: BiPoly) -> BiPoly:
    """2-D coefficient convolution (exact for integer inputs)."""
    ra, ca = len(a.coeffs), len(a.coeffs[0])
    rb, cb = len(b.coeffs), len(b.coeffs[0])
    grid = [[0.0] * (ca + cb - 1) for _ in range(ra + rb - 1)]
    for i, row_a in enumerate(a.coeffs):
        for j, va in enumerate(row_a):
            if va == 0.0:
                continue
            for k, row_b in enumerate(b.coeffs):
                for l, vb in enumerate(row_b):
                    if vb != 0.0:
                        grid[i + k][j + l] += va * vb
    return BiPoly.from_rows(grid)


def bipoly_at_tau(n: BiPoly, tau: float) -> RealPoly:
    """Freeze tau, returning the polynomial in s in canonical form.

    The degree in s may drop at tau=0 (and only through coefficients that
    vanish outright); trailing coefficients smaller than 1e-300 times the
    largest are treated as zero so denormal dust cannot fake a degree.
    """
    tau = float(tau)
    if not math.isfinite(tau) or tau < 0.0:
        raise InvalidInputError(f"tau must be finite and >= 0, got {tau}")
    vals = []
    for row in n.coeffs:
        acc = row[-1]
        for c in reversed(row[:-1]):
            acc = acc * tau + c
        vals.append(acc)
    scale = max(abs(v) for v in vals)
    if scale == 0.0:
        return RealPoly((0.0,))
    while len(vals) > 1 and abs(vals[-1]) <= _DEGREE_TRIM_RTOL * scale:
        vals.pop()
    if len(vals) == 1 and abs(vals[0]) <= _DEGREE_TRIM_RTOL * scale:
        vals = [0.0]
    return RealPoly(tuple(vals))


def bipoly_eval(n: BiPoly, s: complex, tau: float) -> complex:
    """Evaluate N(s, tau): Horner in tau per row, then Horner in s."""
    s = complex(s)
    tau = float(tau)
    acc = 0.0 + 0.0j
    for row in reversed(n.coeffs):
        rv = row[-1]
        for c in reversed(row[:-1]):
            rv = rv * tau + c
        acc = acc * s + rv
    return acc


def cauchy_root_bound(a: RealPoly) -> float:
    """Cauchy bound: every root has magnitude below 1 + max|c_i / c_lead|."""
    if a.degree < 1 or a.is_zero():
        raise InvalidInputError("root bound needs degree >= 1")
    lead = abs(a.coeffs[-1])
    return 1.0 + max(abs(c) for c in a.coeffs[:-1]) / lead


def _horner_many(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.full_like(z, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _newton_polygon_guesses(coeffs: np.ndarray) -> np.ndarray:
    """Starting points on one circle per upper-hull edge of (i, log|c_i|).

    Each edge (i1, i2) contributes i2 - i1 points on the circle of radius
    |c_i1 / c_i2| ** (1 / (i2 - i1)), which estimates that cluster's root
    magnitude.  Requires c[0] != 0 and c[-1] != 0.
    """
    pts = [(i, math.log(abs(c))) for i, c in enumerate(coeffs) if c != 0.0]
    hull: list[tuple[int, float]] = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # pop the middle point unless it lies strictly above the chord
            if (x2 - x1) * (pt[1] - y1) - (y2 - y1) * (pt[0] - x1) < 0.0:
                break
            hull.pop()
        hull.append(pt)
    guesses: list[complex] = []
    for (i1, y1), (i2, y2) in zip(hull, hull[1:]):
        g = i2 - i1
        radius = math.exp((y1 - y2) / g)
        for j in range(g):
            theta = (2 * j + 1) * math.pi / g + 0.401 * i1
            guesses.append(radius * cmath.exp(1j * theta))
    return np.array(guesses, dtype=complex)


def _residual_scale(abs_coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Backward-stable residual scale: sum_i |c_i| |z|**i."""
    return _horner_many(abs_coeffs, np.abs(z).astype(complex)).real


def _aberth(coeffs: np.ndarray) -> np.ndarray:
    """Aberth-Ehrlich simultaneous iteration plus one Newton polish."""
    deg = len(coeffs) - 1
    if deg == 1:
        return np.array([-coeffs[0] / coeffs[1]])
    z = _newton_polygon_guesses(coeffs)
    dcoeffs = coeffs[1:] * np.arange(1, deg + 1)
    for _ in range(_ABERTH_MAX_ITER):
        pz = _horner_many(coeffs, z)
        dpz = _horner_many(dcoeffs, z)
        dpz = np.where(dpz == 0.0, np.finfo(float).tiny, dpz)
        w = pz / dpz
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        collided = np.abs(diff) == 0.0
        if collided.any():
            # nudge exact collisions apart deterministically
            rows = np.unique(np.nonzero(collided)[0])
            z[rows] *= 1.0 + 1e-9 * (1.0 + np.arange(len(rows)))
            continue
        corr = 1.0 - w * (1.0 / diff).sum(axis=1)
        corr = np.where(corr == 0.0, 1.0, corr)
        step = w / corr
        z = z - step
        if np.all(np.abs(step) <= _ABERTH_STEP_TOL * (1.0 + np.abs(z))):
            break
    pz = _horner_many(coeffs, z)
    dpz = _horner_many(dcoeffs, z)
    safe = dpz != 0.0
    z = np.where(safe, z - pz / np.where(safe, dpz, 1.0), z)
    return z


def poly_roots(a: RealPoly, tol: float = 1e-10) -> list[complex]:
    """All deg(a) roots (with multiplicity), sorted by (re, im).

    Every returned root satisfies |a(root)| <= tol * sum_i |c_i| |root|**i;
    otherwise the call raises NumericalFailureError carrying the best
    iterates and their residuals.  Root clusters stand in for multiple
    roots (no deflation is attempted).
    """
    if a.is_zero() or a.degree < 1:
        raise InvalidInputError("poly_roots needs a polynomial of degree >= 1")
    coeffs = list(a.coeffs)
    at_origin = 0
    while coeffs[0] == 0.0 and len(coeffs) > 1:
        coeffs.pop(0)
        at_origin += 1
    roots: list[complex] = [0.0 + 0.0j] * at_origin
    if len(coeffs) > 1:
        found = _aberth(np.array(coeffs, dtype=complex))
        for r in found:
            r = complex(r)
            # snap imaginary dust onto the axis (real coefficients only
            # produce real roots or conjugate pairs)
            if abs(r.imag) <= 1e-14 * (1.0 + abs(r.real)):
                r = complex(r.real, 0.0)
            roots.append(r)
    roots.sort(key=lambda r: (r.real, r.imag))
    abs_coeffs = np.abs(np.array(a.coeffs, dtype=float))
    zs = np.array(roots, dtype=complex)
    residuals = np.abs(_horner_many(np.array(a.coeffs, dtype=complex), zs))
    scales = _residual_scale(abs_coeffs, zs)
    if np.any(residuals > tol * scales):
        worst = int(np.argmax(residuals / scales))
        raise NumericalFailureError(
            "root finder did not reach the residual tolerance "
            f"(worst |p(z)| = {residuals[worst]:.3e} at z = {roots[worst]})",
            best=roots,
            residual=residuals.tolist(),
        )
    return roots
