import json
import math

import numpy as np
import pytest

from vorwave.vorticity import (VorticityError, affine, classify, constant, from_dict, make_vorticity,
                               parse_inline)


def test_constant_minus_one():
    om = constant(-1.0)
    assert om(0.3) == -1.0
    assert om.omega_at_1 == -1.0
    assert om.primitive(0.0) == 0.0


def test_zero_vorticity_primitive_vanishes():
    om = constant(0.0)
    assert om.primitive(0.7) == 0.0
    assert np.all(om.primitive(np.linspace(0, 1, 11)) == 0.0)


def test_affine_primitive_exact():
    om = affine(-1.0, -1.0)
    p = np.linspace(0, 1, 9)
    np.testing.assert_allclose(om.primitive(p), -p - p**2 / 2, rtol=0, atol=1e-15)
    assert om.omega_at_1 == -1.5


@pytest.mark.parametrize("value, tag", [(-1.0, "II"), (0.0, "I"), (1.0, "III")])
def test_classify_constants(value, tag):
    assert classify(constant(value)).tag == tag


def test_classify_interior_maximum():
    # Omega = p/2 - p^2/2 peaks at p = 1/2
    vc = classify(affine(0.5, -1.0))
    assert vc.tag == "I"
    assert vc.argmax == pytest.approx(0.5, abs=1e-3)


def test_classify_endpoint_max_with_zero_vorticity():
    # omega = -p: Omega = -p^2/2 < 0 on (0, 1], max at p = 0 where omega = 0
    assert classify(affine(0.0, -1.0)).tag == "I"


def test_classify_unclassifiable():
    # omega = p - 1/2: Omega(0) = Omega(1) = 0 = max, omega nonzero at both ends
    assert classify(affine(-0.5, 1.0)).tag == "unclassifiable"


def test_table_primitive_and_roundtrip():
    om = make_vorticity("table", samples=[[0, -1], [0.5, -2], [1, -1]])
    assert om.primitive(0.0) == 0.0
    assert -2.0 < om.omega_at_1 < -1.0
    again = from_dict(json.loads(json.dumps(om.to_dict())))
    assert again.primitive(0.8) == om.primitive(0.8)


def test_poly_matches_affine():
    a, b = parse_inline("poly:-1,-1"), parse_inline("affine:-1,-1")
    p = np.linspace(0, 1, 5)
    np.testing.assert_array_equal(a.primitive(p), b.primitive(p))


@pytest.mark.parametrize("spec", ["", "const", "foo:1", "const:1,2", "affine:1", "const:nan", "poly:"])
def test_bad_inline_specs(spec):
    with pytest.raises(VorticityError):
        parse_inline(spec)


def test_table_validation():
    with pytest.raises(VorticityError):
        make_vorticity("table", samples=[[0, 1], [0.9, 1]])
    with pytest.raises(VorticityError):
        make_vorticity("table", samples=[[0, 1], [0.5, 1], [0.4, 1], [1, 1]])
    with pytest.raises(VorticityError):
        from_dict({"kind": "constant", "coeffs": [1], "extra": 1})


def test_domain_outside_unit_interval():
    with pytest.raises(VorticityError):
        constant(1.0)(1.5)
    with pytest.raises(VorticityError):
        constant(1.0).primitive(-0.1)


def test_gap_small_offsets_accurate():
    om = constant(-1.0)
    delta = np.array([1e-12, 1e-8, 1e-4, 0.5])
    np.testing.assert_allclose(om.gap_at_offset(delta), delta, rtol=1e-14)


def test_file_spec(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"kind": "affine", "coeffs": [-1, -1]}))
    om = parse_inline(f"file:{path}")
    assert om.omega_at_1 == -1.5
    assert math.isclose(om(1.0), -2.0)
