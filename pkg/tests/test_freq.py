import numpy as np
import pytest

from dirtylocus.closedloop import build_problem, eval_H
from dirtylocus.errors import (
    ContourDegeneracyError,
    InvalidInputError,
    PoleError,
)
from dirtylocus.freq import (
    asymptotic_limits,
    dH_dtau,
    log_mag_sensitivity,
    nyquist_samples,
    winding_number,
)
from dirtylocus.poly import bipoly_at_tau
from dirtylocus.roots import is_hurwitz, roots_at_tau
from oracles import fd_dH_dtau, fd_log_mag_sensitivity

WORKED = {
    "stable": ([0, 0, 1], [-2, -3]),
    "destabilizing": ([0, -3, 1], [-1, -5]),
}


def random_axis_points(seed, count=20):
    rng = np.random.default_rng(seed)
    return [
        (10 ** rng.uniform(-2, 2), 10 ** rng.uniform(-3, 0)) for _ in range(count)
    ]


def test_dH_dtau_examples(stable_loop, constant_feedback_loop):
    assert dH_dtau(stable_loop, 1.0, 0.0) == pytest.approx(-3.0)
    for s, tau in [(2j, 0.0), (1 + 1j, 0.4), (-0.5, 1.0)]:
        assert dH_dtau(constant_feedback_loop, s, tau) == 0.0


@pytest.mark.parametrize("name", sorted(WORKED))
def test_dH_dtau_matches_finite_differences(name):
    p, k = WORKED[name]
    cl = build_problem(p, k)
    for omega, tau in random_axis_points(seed=hash(name) % 2**32):
        s = 1j * omega
        exact = dH_dtau(cl, s, tau)
        fd = fd_dH_dtau(p, k, s, tau)
        assert abs(fd - exact) <= 1e-6 * abs(exact)


@pytest.mark.parametrize("name", sorted(WORKED))
def test_sensitivity_matches_finite_differences(name):
    p, k = WORKED[name]
    cl = build_problem(p, k)
    for omega, tau in random_axis_points(seed=(hash(name) + 1) % 2**32):
        s = 1j * omega
        exact = log_mag_sensitivity(cl, s, tau)
        fd = fd_log_mag_sensitivity(p, k, s, tau)
        assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1e-12)


def test_sensitivity_zero_cases(constant_feedback_loop):
    for s, tau in [(1j, 0.0), (3j, 0.7)]:
        assert log_mag_sensitivity(constant_feedback_loop, s, tau) == 0.0


def test_sensitivity_pole_error(stable_loop):
    with pytest.raises(PoleError):
        log_mag_sensitivity(stable_loop, -1.0, 0.0)


def test_sensitivity_is_real_and_finite(stable_loop):
    rng = np.random.default_rng(5)
    for _ in range(50):
        omega = 10 ** rng.uniform(-2, 2)
        tau = 10 ** rng.uniform(-3, 0)
        value = log_mag_sensitivity(stable_loop, 1j * omega, tau)
        assert isinstance(value, float) and np.isfinite(value)


def test_nyquist_samples_dc_and_conjugate_symmetry(stable_loop):
    dc = nyquist_samples(stable_loop, 0.0, [0.0])[0]
    assert dc.H == 2.0  # constant coefficient of p - k

    pos = nyquist_samples(stable_loop, 0.1, [0.5, 1.0, 2.0])
    neg = nyquist_samples(stable_loop, 0.1, [-0.5, -1.0, -2.0])
    for a, b in zip(pos, neg):
        assert b.H == pytest.approx(a.H.conjugate(), rel=1e-13)
        assert b.dH_dtau == pytest.approx(a.dH_dtau.conjugate(), rel=1e-13)
        assert b.log_mag_sensitivity == pytest.approx(a.log_mag_sensitivity, rel=1e-13)


def test_nyquist_samples_names_singular_omega():
    marginal = build_problem([0, 0, 1], [-1])  # p - k = s^2 + 1, zeros at +/-j
    with pytest.raises(PoleError, match="omega = 1.0"):
        nyquist_samples(marginal, 0.0, [0.5, 1.0, 2.0])


def test_nyquist_tau_continuity_bound(stable_loop):
    # mean-value bound |H(tau2) - H(tau1)| <= 2 max|dH/dtau| * dtau at
    # fixed omega = 1 across tau in {0, 0.01, 0.02}
    s = 1j
    taus = [0.0, 0.01, 0.02]
    for a, b in zip(taus, taus[1:]):
        ha, hb = eval_H(stable_loop, s, a), eval_H(stable_loop, s, b)
        bound = 2 * max(abs(dH_dtau(stable_loop, s, t)) for t in (a, b)) * (b - a)
        assert abs(hb - ha) <= bound


def test_nyquist_curve_deformation_shrinks_with_dtau(stable_loop):
    omegas = [10 ** e for e in np.linspace(-2, 2, 41)]
    base = [s.H for s in nyquist_samples(stable_loop, 0.1, omegas)]
    sups = []
    for dtau in (0.04, 0.02, 0.01):
        moved = [s.H for s in nyquist_samples(stable_loop, 0.1 + dtau, omegas)]
        sups.append(max(abs(a - b) for a, b in zip(base, moved)))
    assert sups[0] > sups[1] > sups[2]


def test_winding_number_worked_examples(stable_loop, destabilizing_loop):
    assert winding_number(stable_loop, 0.1).winding_number == 0
    assert winding_number(stable_loop, 0.0).winding_number == 0
    assert winding_number(destabilizing_loop, 0.1).winding_number == 0
    assert winding_number(destabilizing_loop, 0.5).winding_number == 2


def test_winding_equals_rhp_count(stable_loop, destabilizing_loop):
    for cl in (stable_loop, destabilizing_loop):
        for tau in (0.0, 0.1, 0.35, 0.5, 1.0):
            rhp = sum(1 for r in roots_at_tau(cl, tau) if r.real > 0)
            assert winding_number(cl, tau).winding_number == rhp


def test_winding_agrees_with_other_stability_methods(destabilizing_loop):
    for tau in (0.05, 0.2, 0.5, 1.0):
        frozen = bipoly_at_tau(destabilizing_loop.numerator, tau)
        root_view = is_hurwitz(frozen).stable
        winding_view = winding_number(destabilizing_loop, tau).winding_number == 0
        assert root_view == winding_view


def test_winding_radius_validation(stable_loop):
    with pytest.raises(InvalidInputError):
        winding_number(stable_loop, 0.1, radius=1.0)


def test_winding_contour_degeneracy():
    marginal = build_problem([0, 0, 1], [-1])  # N = s^2 + 1 has zeros on the axis
    with pytest.raises(ContourDegeneracyError):
        winding_number(marginal, 0.0)


def test_asymptotic_limits(stable_loop, constant_feedback_loop):
    for tau in (0.1, 0.5, 2.0):
        small, large = asymptotic_limits(stable_loop, tau)
        assert small == -3.0
        assert large == pytest.approx(-3.0 / tau**2)
    assert asymptotic_limits(constant_feedback_loop, 0.5) == (0.0, 0.0)
    with pytest.raises(InvalidInputError):
        asymptotic_limits(stable_loop, 0.0)


def test_asymptotic_large_s_matches_direct_evaluation(stable_loop, destabilizing_loop):
    for cl in (stable_loop, destabilizing_loop):
        for tau in (0.2, 1.0):
            _, large = asymptotic_limits(cl, tau)
            direct = dH_dtau(cl, 1e6, tau)
            assert abs(direct - large) <= 1e-3 * abs(large)
