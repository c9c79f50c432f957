import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cscoherent.classical import explicit_trajectory, periodic_envelope
from cscoherent.exceptions import DomainError, QuasiPeriodicityError, UnsupportedClosedForm
from cscoherent.integration import QuadratureSpec, node_quantities
from cscoherent.models import ModelSpec, SpectrumLabel, energy_eigenvalue
from cscoherent.phase import (closed_form_chi, default_probes, dynamical_phase, envelope_integrals,
                              eq22_rhs, eq36_defect, geometric_phase_closed, measure_global_phase,
                              phase_report, simpson)
from cscoherent.schedule import ParameterSchedule
from cscoherent.wavefunctions import CoherentState, SymmetricPolynomial

A2 = ModelSpec("A", 2, 1.0)
A3 = ModelSpec("A", 3, 2.0)
W3 = ModelSpec("W", 3, 1.0, 1.0)
B2 = ModelSpec("B", 2, 1.0, 1.0)
P3 = SymmetricPolynomial.centered_power_sum(3, 3)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_simpson_exact_for_cubics(a, b, c, d):
    t = np.linspace(0, 2, 9)
    y = a + b * t + c * t**2 + d * t**3
    exact = 2 * a + 2 * b + 8 * c / 3 + 4 * d
    assert simpson(y, 0.25) == pytest.approx(exact, abs=1e-11)


def test_simpson_needs_odd_samples():
    with pytest.raises(ValueError):
        simpson(np.ones(4), 0.1)


def test_envelope_integrals_squeezed(squeezed):
    rate, sq, disp = envelope_integrals(squeezed)
    assert rate == pytest.approx(math.pi, rel=1e-10)
    assert sq == pytest.approx(math.pi / 4, rel=1e-10)
    assert disp == 0.0


def test_anchor_closed_forms(squeezed):
    lab = SpectrumLabel()
    assert closed_form_chi(A3, lab, squeezed) == pytest.approx(-7.5 * math.pi, rel=1e-6)
    assert geometric_phase_closed(A3, lab, squeezed) == pytest.approx(7.5 * math.pi / 4, rel=1e-6)


def test_closed_chi_only_for_a(squeezed):
    with pytest.raises(UnsupportedClosedForm):
        closed_form_chi(W3, SpectrumLabel(), squeezed)


def test_mass_enters_the_rate():
    # M = 2, u = cos t, v = sin t: Omega = 2, rho = 1, so Omega/(M rho^2) = 1
    heavy = explicit_trajectory(ParameterSchedule.constant(M=2.0, w2=1.0, tau=math.pi), 1, 0, 0, 1)
    assert heavy.omega == pytest.approx(2.0)
    E = energy_eigenvalue(A2, SpectrumLabel())
    assert closed_form_chi(A2, SpectrumLabel(), heavy) == pytest.approx(-E * math.pi, rel=1e-10)


def test_stationary_phases(stationary, unit_2pi):
    lab = SpectrumLabel(1, 1)
    st_ = CoherentState(A2, lab, stationary)
    E = st_.energy
    chi, defect = measure_global_phase(st_)
    assert chi == pytest.approx(-2 * math.pi * E, rel=1e-10)
    assert defect < 1e-8
    assert geometric_phase_closed(A2, lab, stationary) == 0.0


def test_global_phase_squeezed(squeezed):
    chi, _ = measure_global_phase(CoherentState(A3, SpectrumLabel(), squeezed))
    assert chi == pytest.approx(-7.5 * math.pi, rel=1e-8)


def test_dressed_chi_shift(squeezed):
    plain, _ = measure_global_phase(CoherentState(A3, SpectrumLabel(m=1), squeezed))
    dressed, _ = measure_global_phase(CoherentState(A3, SpectrumLabel(m=1, k=3), squeezed, poly=P3))
    assert dressed - plain == pytest.approx(-3 * envelope_integrals(squeezed)[0], rel=1e-8)
    assert closed_form_chi(A3, SpectrumLabel(m=1, k=3), squeezed) == pytest.approx(dressed, rel=1e-8)


def test_gauge_robustness(squeezed):
    st_ = CoherentState(A2, SpectrumLabel(1, 0), squeezed)
    a, _ = measure_global_phase(st_)
    b, _ = measure_global_phase(st_.scaled(-2.5 + 0.7j))
    assert b == pytest.approx(a, abs=1e-12)


def test_quasi_periodicity_violation():
    schedule = ParameterSchedule.constant(tau=2 * math.pi)
    # squeezed envelope with irrational frequency ratio over the requested period
    traj = explicit_trajectory(ParameterSchedule.constant(w2=2.0, tau=2 * math.pi), 1, 0, 0, 1)
    assert not traj.rho_periodic
    with pytest.raises(QuasiPeriodicityError):
        measure_global_phase(CoherentState(A2, SpectrumLabel(), traj))
    with pytest.raises(DomainError):
        geometric_phase_closed(A2, SpectrumLabel(), traj)
    assert schedule.tau == traj.tau_prime


def test_energy_proportionality(squeezed):
    ratios = [geometric_phase_closed(A2, lab, squeezed) / energy_eigenvalue(A2, lab)
              for lab in (SpectrumLabel(m, n) for m in range(3) for n in range(3))]
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-6)


def test_dressing_rules(squeezed):
    lab = SpectrumLabel(m=1, k=3)
    inv = geometric_phase_closed(A3, lab, squeezed, "invariant")
    full = geometric_phase_closed(A3, lab, squeezed, "energy")
    assert inv == pytest.approx(geometric_phase_closed(A3, SpectrumLabel(m=1), squeezed))
    assert full - inv == pytest.approx(3 * math.pi / 4, rel=1e-8)
    with pytest.raises(DomainError):
        geometric_phase_closed(A3, lab, squeezed, "other")


def test_eq22_stationary(stationary):
    for lab in (SpectrumLabel(), SpectrumLabel(2, 1)):
        assert eq22_rhs(A2, lab, stationary, 0.7) == pytest.approx(-energy_eigenvalue(A2, lab), abs=1e-10)


def test_eq22_squeezed_example(squeezed, unit_pi, quad):
    lab = SpectrumLabel(1, 0)
    q = node_quantities(CoherentState(A2, lab, squeezed), unit_pi, 0.4, quad)
    lhs = q.dt_overlap / 1j
    rhs = eq22_rhs(A2, lab, squeezed, 0.4)
    assert rhs.real == pytest.approx(lhs.real, abs=1e-5)
    # printed imaginary part -(b + 3/2) rho'/rho; the exact left side is real
    pt = squeezed.at(0.4)
    assert abs(lhs.imag) < 1e-6
    assert rhs.imag == pytest.approx(-(A2.b + 1.5) * pt.rho_dot / pt.rho, rel=1e-10)


def test_eq22_imaginary_part_integrates_to_zero(squeezed):
    k = int(round(squeezed.tau_prime / squeezed.step))
    t = squeezed.grid[squeezed.i0: squeezed.i0 + k + 1: 16]
    im = [eq22_rhs(A3, SpectrumLabel(1, 1), squeezed, s).imag for s in t]
    assert abs(simpson(im, 16 * squeezed.step)) < 1e-10


def test_eq22_displacement_term_is_a_total_derivative(unit_2pi, quad):
    traj = explicit_trajectory(unit_2pi, 1, 0, 0, 1, uf0=0.3)
    lab = SpectrumLabel()
    for t in (0.4, 1.3):
        q = node_quantities(CoherentState(A2, lab, traj), unit_2pi, t, quad)
        pt = traj.at(t)
        total = 0.5 * A2.N * pt.M * (pt.u_f_dot**2 - pt.w2 * pt.u_f**2)  # (N/2) d/dt(M u_f u_f')
        assert eq22_rhs(A2, lab, traj, t).real - total == pytest.approx((q.dt_overlap / 1j).real, abs=1e-6)


def test_eq36_defects(squeezed, stationary):
    probes = default_probes(W3, squeezed)
    assert eq36_defect(W3, stationary, 0.9, default_probes(W3, stationary)) < 1e-8
    printed = max(eq36_defect(W3, squeezed, t, probes) for t in (0.4, 1.3))
    corrected = max(eq36_defect(W3, squeezed, t, probes, corrected=True) for t in (0.4, 1.3))
    assert corrected < 1e-5
    assert printed > 1e-2


def test_dynamical_phase_stationary(stationary, unit_2pi):
    st_ = CoherentState(A2, SpectrumLabel(1, 0), stationary)
    dyn, berry, _ = dynamical_phase(st_, unit_2pi, QuadratureSpec(points_per_dim=32), n_nodes=64)
    assert dyn == pytest.approx(st_.energy * 2 * math.pi, rel=1e-8)
    assert berry == pytest.approx(dyn, rel=1e-8)


def test_dynamical_phase_rejects_odd_nodes(stationary, unit_2pi):
    with pytest.raises(ValueError):
        dynamical_phase(CoherentState(A2, SpectrumLabel(), stationary), unit_2pi, QuadratureSpec(), n_nodes=63)


def test_phase_report_squeezed_a2(squeezed, unit_pi, quad):
    rep = phase_report(CoherentState(A2, SpectrumLabel(1, 1), squeezed), unit_pi, quad)
    assert rep.disc_routes < 1e-5
    assert rep.disc_gamma < 1e-4
    assert rep.gamma_closed == pytest.approx(5 * math.pi / 4, rel=1e-8)
    assert set(rep.to_dict()) == {"chi", "chi_closed", "dyn", "berry", "gamma_numeric", "gamma_closed",
                                  "disc_gamma", "disc_routes"}


def test_time_node_refinement(squeezed, unit_pi):
    st_ = CoherentState(B2, SpectrumLabel(n=1), squeezed)
    q = QuadratureSpec(points_per_dim=48)
    d64, _, _ = dynamical_phase(st_, unit_pi, q, n_nodes=64)
    d128, _, _ = dynamical_phase(st_, unit_pi, q, n_nodes=128, threads=4)
    assert abs(d64 - d128) < 1e-6


def test_threads_do_not_change_results(squeezed, unit_pi):
    st_ = CoherentState(A2, SpectrumLabel(), squeezed)
    q = QuadratureSpec(points_per_dim=32)
    a = dynamical_phase(st_, unit_pi, q, threads=1)[:2]
    b = dynamical_phase(st_, unit_pi, q, threads=3)[:2]
    assert a == b


def test_displacement_gamma(unit_2pi, quad):
    eps = 0.3
    traj = explicit_trajectory(unit_2pi, 1, 0, 0, 1, uf0=eps)
    rep = phase_report(CoherentState(A2, SpectrumLabel(), traj), unit_2pi, quad)
    assert rep.gamma_closed == pytest.approx(A2.N * eps**2 * math.pi, rel=1e-8)
    assert rep.gamma_numeric == pytest.approx(A2.N * eps**2 * math.pi, rel=1e-4)


def test_floquet_trajectory_phase():
    s = ParameterSchedule("1", "1.5 + 0.1*cos(2*t)", "pi")
    traj = periodic_envelope(s)
    rep = phase_report(CoherentState(A2, SpectrumLabel(), traj), s, QuadratureSpec(points_per_dim=48))
    assert rep.disc_gamma < 1e-4 and rep.disc_routes < 1e-5
    assert rep.chi_closed == pytest.approx(rep.chi, rel=1e-8)
