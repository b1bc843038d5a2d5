import json
import math

import numpy as np
import pytest

from steinerfn import convex1d as c1
from steinerfn import funcbank

ONE_DIM = funcbank.ids(1)


def test_catalog_size_and_contents():
    ids = funcbank.ids()
    assert len(ids) >= 10
    assert len(set(ids)) == len(ids)
    for required in ("gaussian", "abs", "plateau", "two_slope", "two_slope_shifted",
                     "wall_ramp", "wall_vee", "example31", "gauss2d", "aniso_quad"):
        assert required in ids


@pytest.mark.parametrize("fid", ONE_DIM)
def test_one_dim_entries_validate(fid):
    assert c1.validate(funcbank.get(fid).pl) == []


@pytest.mark.parametrize("fid", ONE_DIM)
def test_every_fact_holds(fid):
    fn = funcbank.get(fid)
    for name, (ok, residual) in fn.check_facts().items():
        assert ok, f"{fid}.{name}: residual {residual:.3g}"


def test_facts_carry_source_and_tolerance():
    for fn in funcbank.catalog():
        for fact in fn.facts:
            assert fact.source in ("analytic", "computed", "identity")
            assert fact.tol >= 0


@pytest.mark.parametrize("fid", funcbank.ids(2))
def test_two_dim_entries_are_convex_on_grid_lines(fid):
    from steinerfn import gridnd as gd
    F = funcbank.get(fid).grid()
    assert gd.convexity_defect(F) <= 1e-9
    # the cap sits below every value on the box boundary
    v = F.values
    rim = np.concatenate([v[0], v[-1], v[:, 0], v[:, -1]])
    assert rim.min() > F.cap


def test_example31_values():
    ex = funcbank.get("example31")
    S = c1.symmetrize_new(ex.pl)
    A = c1.symmetrize_amk(ex.pl)
    assert float(S(1.0)) == pytest.approx(1.0, abs=1e-9)
    assert funcbank.ex31_g(1.0) == 1.0
    assert funcbank.ex31_amk(0.0) == pytest.approx(0.0, abs=1e-15)
    assert funcbank.ex31_amk(1.0) == pytest.approx(0.96769, abs=1e-5)
    assert float(A(1.0)) == pytest.approx(0.96769, abs=1e-5)
    assert float(A(1.0)) < float(S(1.0))


def test_example31_amk_closed_form_against_brute_force():
    from steinerfn import oracle
    xs = np.array([0.25, 0.5, 1.0, 1.5])
    ts = np.linspace(-6, 6, 240001)
    ref = oracle.inf_split_amk(funcbank.ex31_f, xs, ts)
    np.testing.assert_allclose(funcbank.ex31_amk(xs), ref, atol=1e-7)


def test_wall_ramp_mirrored_boundary_formula():
    ramp = funcbank.get("wall_ramp").pl
    S = c1.symmetrize_new(ramp)
    x = np.linspace(0.3, 0.5, 9)
    # x is increasing on [0, 1]: the exhausted branch is the left one
    np.testing.assert_allclose(S(x), ramp(2 * x), atol=1e-12)


def test_unknown_id():
    with pytest.raises(KeyError):
        funcbank.get("nope")


def test_grid_of_one_dim_entry_is_an_error():
    with pytest.raises(ValueError):
        funcbank.get("abs").grid()
    with pytest.raises(AttributeError):
        funcbank.get("gauss2d").pl


def test_dump_json_round_trips_specs(tmp_path):
    text = funcbank.dump_json(tmp_path / "cat.json")
    data = json.loads(text)
    assert json.loads((tmp_path / "cat.json").read_text()) == data
    by_id = {d["id"]: d for d in data}
    f = c1.PLConvex1D.from_dict(by_id["three_slope"]["spec"])
    xs = np.linspace(-5, 5, 41)
    np.testing.assert_array_equal(f(xs), funcbank.get("three_slope").pl(xs))
    assert by_id["wall_vee"]["spec"]["left"] == "wall"
    assert by_id["gauss2d"]["cap"] == 30.0


def test_gaussian_fit_tolerance():
    g = funcbank.get("gaussian").pl
    x = np.linspace(-12, 12, 100001)
    assert np.max(np.abs(g(x) - 0.5 * x * x)) <= 1e-7
    assert c1.exp_integral(g) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-6)
