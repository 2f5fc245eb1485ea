import math

import numpy as np
import pytest

from vorwave import heightfield as hfm, stream
from vorwave.errors import DomainError
from vorwave.vorticity import affine, constant

SQ3 = math.sqrt(3.0)

# frozen high-precision values (mpmath closed forms, 40 digits)
SC_NEG1 = 0.60608453852743568
RC_NEG1 = 2.1162004589427479
SPLUS_R0_NEG1 = 1.2450552653193567
IRROT_ROOTS = {2.0: (0.53918887281088912, 1.6751308705666461),
               3.0: (0.33987688662318255, 2.2618022452599717),
               5.0: (0.2008097564731062, 3.0570872565563285)}


def test_irrotational_profile():
    sol = stream.stream_profile(constant(0.0), 2.0)
    np.testing.assert_allclose(sol.H, sol.p / 2, atol=1e-15)
    assert sol.d == pytest.approx(0.5, abs=1e-15)
    assert sol.R == pytest.approx(2.5, abs=1e-15)


def test_constant_vorticity_profile():
    om = constant(-1.0)
    sol = stream.stream_profile(om, 1.0)
    np.testing.assert_allclose(sol.H, np.sqrt(1 + 2 * sol.p) - 1, atol=1e-14)
    assert sol.d == pytest.approx(SQ3 - 1, abs=1e-14)
    assert sol.R == pytest.approx(SQ3 + 0.5, abs=1e-14)
    # U(y) = y + y^2/2 inverts H
    U = sol.H + sol.H**2 / 2
    np.testing.assert_allclose(U, sol.p, atol=1e-14)
    assert sol.ode_mismatch < 1e-10


@pytest.mark.parametrize("b", [0.5, 1.0, 10.0, 100.0])
def test_depth_closed_form(b):
    om = constant(-b)
    for s in (0.05, 0.5, 2.0):
        assert stream.depth(om, s) == pytest.approx((math.sqrt(s * s + 2 * b) - s) / b, abs=1e-12)


def test_limits_negative_one():
    cc = stream.critical_constants(constant(-1.0))
    assert cc.s0 == 0.0
    assert cc.d0 == pytest.approx(math.sqrt(2), abs=1e-12)
    assert cc.R0 == pytest.approx(1 + math.sqrt(2), abs=1e-12)
    assert cc.sc == pytest.approx(SC_NEG1, abs=1e-13)
    assert cc.Rc == pytest.approx(RC_NEG1, abs=1e-13)


def test_irrotational_constants():
    cc = stream.critical_constants(constant(0.0))
    assert cc.sc == pytest.approx(1.0, abs=1e-12)
    assert cc.Rc == pytest.approx(1.5, abs=1e-12)
    assert math.isinf(cc.d0) and math.isinf(cc.R0)


def test_bernoulli_irrotational():
    assert stream.bernoulli_R(constant(0.0), 1.0) == pytest.approx(1.5, abs=1e-15)
    assert stream.depth(constant(0.0), 2.0) == pytest.approx(0.5, abs=1e-15)


def test_conjugate_at_criticality():
    cs = stream.conjugate_states(constant(0.0), 1.5)
    assert cs.s_plus == pytest.approx(1.0, abs=1e-7)
    assert cs.s_minus == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("r", sorted(IRROT_ROOTS))
def test_conjugate_irrotational_roots(r):
    om = constant(0.0)
    cs = stream.conjugate_states(om, r)
    lo, hi = IRROT_ROOTS[r]
    assert cs.s_minus == pytest.approx(lo, rel=1e-12)
    assert cs.s_plus == pytest.approx(hi, rel=1e-12)
    for s in (cs.s_minus, cs.s_plus):
        assert abs(stream.bernoulli_R(om, s) - r) < 1e-10


def test_conjugate_above_R0_has_no_subcritical_state():
    cs = stream.conjugate_states(constant(-1.0), 3.0)
    assert cs.s_minus is None and cs.d_minus is None
    assert cs.s_plus > SC_NEG1


def test_conjugate_below_Rc_raises():
    with pytest.raises(DomainError):
        stream.conjugate_states(constant(0.0), 1.4)


def test_froude_at_unit_speed_irrotational():
    assert stream.froude(constant(0.0), 1.0) == pytest.approx(1.0, abs=1e-14)


def test_froude_strong_vorticity_near_sqrt2():
    om = constant(-1000.0)
    F = stream.froude(om, stream.supercritical_speed_R0(om))
    assert 1.0 < F < 2.0
    assert F == pytest.approx(1.4142293740265422, abs=1e-10)


def test_supercritical_R0_matches_generic_root():
    om = constant(-1.0)
    generic = stream.supercritical_speed(om, stream.critical_constants(om).R0)
    assert stream.supercritical_speed_R0(om) == pytest.approx(generic, abs=1e-13)
    assert stream.supercritical_speed_R0(om) == pytest.approx(SPLUS_R0_NEG1, abs=1e-13)


def test_sigma_irrotational_closed_form():
    om = constant(0.0)
    for s, r in [(1.0, 1.5), (0.7, 2.0), (2.0, 3.0)]:
        assert stream.sigma(om, s, r) == pytest.approx(s / 2 + r / s - 1 / (2 * s * s), abs=1e-13)


def test_sigma_at_conjugates_equals_S():
    om = constant(0.0)
    cs = stream.conjugate_states(om, 3.0)
    assert stream.sigma(om, cs.s_plus, 3.0) == pytest.approx(cs.S_plus, abs=1e-14)
    assert stream.sigma(om, cs.s_minus, 3.0) == pytest.approx(cs.S_minus, abs=1e-14)


def test_sigma_equals_laminar_flow_force():
    om = constant(-1.0)
    flow = stream.stream_profile(om, 1.0)
    hf = hfm.laminar_field(flow, 10.0, 33, 65)
    assert hfm.flow_force(hf).mean == pytest.approx(stream.sigma(om, 1.0, flow.R), abs=1e-10)


def test_kappa_arithmetic():
    assert stream.kappa(constant(0.0), 1.0, 1.5, 1.6) == pytest.approx(0.2, abs=1e-14)
    om = constant(-1.0)
    sp = stream.supercritical_speed(om, 3.0)
    assert stream.kappa(om, sp, 3.0, stream.sigma(om, sp, 3.0)) == pytest.approx(0.0, abs=1e-13)


def test_sensitivities_vanish_at_s_plus():
    om = constant(0.0)
    sp = stream.supercritical_speed(om, 3.0)
    sens = stream.sensitivities(om, sp, 3.0)
    assert abs(sens.sigma_s) < 1e-12 and abs(sens.kappa_s) < 1e-12
    assert stream.sensitivities(om, 2.0, 3.0).d_s == pytest.approx(-0.25, abs=1e-14)


def test_sensitivities_finite_differences():
    om, s, r, h = constant(-1.0), 1.0, 2.5, 1e-5
    sens = stream.sensitivities(om, s, r)
    pairs = [(sens.d_s, lambda x: stream.depth(om, x)),
             (sens.R_s, lambda x: stream.bernoulli_R(om, x)),
             (sens.sigma_s, lambda x: stream.sigma(om, x, r)),
             (sens.kappa_s, lambda x: stream.kappa(om, x, r, 0.0))]
    for exact, f in pairs:
        fd = (f(s + h) - f(s - h)) / (2 * h)
        assert abs(fd - exact) <= 1e-6 * abs(exact)


def test_general_vorticity_profile_crosscheck():
    sol = stream.stream_profile(affine(-1.0, -1.0), 1.2)
    assert sol.ode_mismatch < 1e-10


def test_unclassifiable_limit_depth():
    # omega = p - 1/2: Omega = (p^2 - p)/2 peaks at both ends
    om = affine(-0.5, 1.0)
    d0, _ = stream.limit_constants(om)
    assert d0 == pytest.approx(math.pi, abs=1e-8)
