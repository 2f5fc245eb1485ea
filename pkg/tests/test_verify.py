import math

import pytest

from vorwave import stream, verify
from vorwave import heightfield as hfm
from vorwave.errors import DomainError
from vorwave.vorticity import affine, constant


@pytest.mark.parametrize("omega, r", [(constant(-1.0), None), (constant(-1.0), 3.0), (affine(-1.0, -1.0), None)])
def test_lemma_scan_passes(omega, r):
    r = stream.critical_constants(omega).R0 if r is None else r
    rep = verify.lemma_monotonicity_scan(omega, r, n=120)
    assert rep.passed, rep.verdict
    sp = stream.supercritical_speed(omega, r)
    assert rep.grid["s_plus"] == pytest.approx(sp, rel=1e-12)


def test_lemma_scan_refuses_outside_hypothesis():
    om = constant(-1.0)
    with pytest.raises(DomainError):
        verify.lemma_monotonicity_scan(om, 2.3)  # R_c < r < R0
    with pytest.raises(DomainError):
        verify.lemma_monotonicity_scan(constant(0.0), 3.0)  # R0 infinite


def test_lemma_verdict_detects_broken_monotonicity():
    om = constant(-1.0)
    rep = verify.lemma_monotonicity_scan(om, 3.0, n=40)
    rep.records[5]["sigma"] += 1.0
    assert not verify.recompute_verdict(rep)["sigma_monotone"]


def test_froude_scan():
    rep = verify.froude_limit_scan([1.0, 10.0, 100.0, 1000.0], report_only=[1e-3])
    assert rep.passed
    by_b = {r["b"]: r for r in rep.records}
    assert by_b[1.0]["F"] == pytest.approx(1.9158478158423606, abs=1e-12)
    assert by_b[10.0]["F"] == pytest.approx(1.4302717190052321, abs=1e-12)
    assert by_b[100.0]["F"] == pytest.approx(1.4147138269447504, abs=1e-11)
    assert by_b[1e-3]["report_only"] and by_b[1e-3]["F"] > 2
    assert verify.recompute_verdict(rep) == rep.verdict


def test_froude_scan_rejects_nonpositive_b():
    with pytest.raises(DomainError):
        verify.froude_limit_scan([0.0, 1.0])


def test_nonexistence_requires_class_two_or_three():
    with pytest.raises(DomainError):
        verify.nonexistence_scan(constant(0.0), [10.0])
    with pytest.raises(DomainError):
        verify.nonexistence_scan(affine(0.5, -1.0), [10.0])


def test_nonexistence_class_three_uses_R0():
    rep = verify.nonexistence_scan(constant(1.0), [2.0, 10.0], a_start=0.02, growth=1.6, n_q=65, n_p=33)
    assert rep.grid["class"] == "III"
    assert rep.grid["bound"] == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert rep.passed and rep.verdict["statement"] == "no counterexample found"
    assert rep.verdict["waves"] > 0
    assert verify.recompute_verdict(rep) == rep.verdict


def test_nonexistence_verdict_flags_counterexample():
    rep = verify.nonexistence_scan(constant(-1.0), [10.0], a_start=0.05, growth=2.0, n_q=65, n_p=33)
    assert rep.grid["bound"] == pytest.approx(2 + math.sqrt(2), abs=1e-12)
    wave = next(r for r in rep.records if r["type"] == "wave")
    wave["r"] = 3.5
    assert verify.recompute_verdict(rep)["statement"] == "counterexample candidate found"


def test_diagnostics_small_wave(small_wave):
    rep = verify.theorem_diagnostics(small_wave, n=20)
    assert rep.passed, rep.verdict
    assert rep.grid["eta_crest"] < small_wave.r


def test_solitary_residual_decreases_with_period():
    om = constant(-1.0)
    vals = [verify.theorem_diagnostics(hfm.solve_stokes(om, L, amplitude=0.1, n_q=129, n_p=65), n=4)
            .grid["solitary_residual"] for L in (10.0, 20.0, 40.0)]
    assert vals[0] > vals[1] > vals[2]


def test_order_study_rejects_unnested_grids():
    with pytest.raises(DomainError):
        verify.order_study(constant(-1.0), 10.0, 0.01, grids=[(33, 17), (60, 33)])


def test_nested_grids():
    assert verify.nested_grids(65, 33, 3) == [(65, 33), (129, 65), (257, 129)]


CORPUS = [constant(-1.0), constant(-10.0), constant(1.0), affine(-1.0, -1.0)]


@pytest.mark.parametrize("omega", CORPUS, ids=lambda om: om.label())
@pytest.mark.parametrize("dr", [0.0, 1.0, 10.0])
def test_lemma_regression_corpus(omega, dr):
    rep = verify.lemma_monotonicity_scan(omega, stream.critical_constants(omega).R0 + dr)
    assert rep.passed, rep.verdict
