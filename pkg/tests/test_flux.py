import numpy as np
import pytest
from scipy.integrate import quad

from vorwave import flux, heightfield as hfm, stream
from vorwave.errors import DomainError
from vorwave.vorticity import constant


@pytest.fixture(scope="module")
def lam():
    om = constant(-1.0)
    return hfm.laminar_field(stream.stream_profile(om, 1.0), 10.0, 17, 65)


def closed_form_top(omega, s_field, s_ref):
    def f(p):
        a = stream.height_derivative(omega, s_field, p)
        b = stream.height_derivative(omega, s_ref, p)
        return (a - b) ** 2 / (a * b * b)

    return quad(f, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)[0]


def test_same_speed_flux_vanishes(lam):
    fx = flux.flux_function(lam, 1.0)
    assert np.all(fx.phi == 0.0)


@pytest.mark.parametrize("s_ref", [0.8, 1.3])
def test_laminar_flux_closed_form(lam, s_ref):
    fx = flux.flux_function(lam, s_ref)
    expected = closed_form_top(lam.omega, 1.0, s_ref)
    np.testing.assert_allclose(fx.top, expected, atol=1e-14)
    assert expected > 0
    rep = flux.identity_checks(lam, s_ref)
    assert max(rep.dq, rep.dp, rep.top) < 1e-10
    assert rep.max_principle_ok


def test_laminar_infimum_inapplicable(lam):
    rep = flux.infimum_kappa_test(lam, 0.8)
    assert not rep.applicable and rep.mismatch is None


def test_laminar_has_no_sstar(lam):
    with pytest.raises(flux.NoSignChange):
        flux.sstar_bracket(lam)


def test_reference_speed_below_s0(lam):
    with pytest.raises(DomainError):
        flux.flux_function(lam, 0.0)


def test_crest_flux_positive(scan_wave):
    sp = stream.supercritical_speed(scan_wave.omega, scan_wave.r)
    for s in np.linspace(0.05, sp, 25, endpoint=False):
        assert flux.flux_function(scan_wave, s).top[scan_wave.crest_index] > 0


def test_identities_on_wave(scan_wave):
    sp = stream.supercritical_speed(scan_wave.omega, scan_wave.r)
    rep = flux.identity_checks(scan_wave, sp)
    assert max(rep.dq, rep.dp, rep.top) < 1e-5
    assert rep.max_principle_ok


def test_top_trace_at_s_plus_is_w_squared_plus_kappa(scan_wave):
    om, r = scan_wave.omega, scan_wave.r
    sp = stream.supercritical_speed(om, r)
    F = hfm.flow_force(scan_wave).mean
    fx = flux.flux_function(scan_wave, sp, F)
    w1 = scan_wave.eta - stream.depth(om, sp)
    offset = fx.top - w1**2
    tol = flux.identity_checks(scan_wave, sp, F).grid_tolerance
    assert np.ptp(offset) < tol
    assert np.mean(offset) == pytest.approx(fx.kappa, abs=tol)
    assert fx.kappa > 0


def test_infimum_equals_kappa_when_nonpositive(scan_wave):
    rep = flux.infimum_kappa_test(scan_wave, scan_wave.s_base)
    assert rep.applicable
    assert rep.mismatch < 1e-8


def test_sstar(scan_wave):
    F = hfm.flow_force(scan_wave).mean
    bracket = flux.sstar_bracket(scan_wave, F)
    res = flux.find_sstar(scan_wave, F, bracket)
    assert abs(res.inf_top) < 1e-8
    assert abs(res.kappa) < flux.identity_checks(scan_wave, res.s_star, F).grid_tolerance


def test_sstar_positive_bracket_errors(scan_wave):
    sp = stream.supercritical_speed(scan_wave.omega, scan_wave.r)
    with pytest.raises(flux.NoSignChange) as info:
        flux.find_sstar(scan_wave, None, (0.6, sp))
    assert min(info.value.infima) > 0


@pytest.mark.parametrize("s, level", [(0.476, 0.0), (0.4814, 0.0), (0.4814, 0.002)])
def test_field_sign_along_level_curves(scan_wave, s, level):
    rep = flux.field_sign_check(scan_wave, s, level)
    assert rep.crossings > 0
    assert rep.ok
    assert rep.max_formula_gap < 1e-9


def test_laminar_find_sstar_errors(lam):
    with pytest.raises(flux.NoSignChange):
        flux.find_sstar(lam, None, (0.5, 1.5))
