import math

import numpy as np
import pytest

from steinerfn import convex1d as c1
from steinerfn import funcbank
from steinerfn import gridnd as gd
from steinerfn import oracle
from steinerfn.gridnd import Direction, GridFn, NonConvexSectionError

B8 = ((-8.0, 8.0), (-8.0, 8.0))


def gauss(n=129, cap=30.0):
    return GridFn.from_function(lambda x, y: 0.5 * (x * x + y * y), B8, (n, n), cap)


def finite(F, below=None):
    v = gd.effective_values(F)
    ok = np.isfinite(v)
    return ok if below is None else ok & (v <= below)


# types


def test_direction_must_be_unit():
    with pytest.raises(ValueError):
        Direction((1.0, 1.0))
    d = Direction.of(1, 1)
    assert d.components == pytest.approx((math.sqrt(0.5), math.sqrt(0.5)))
    assert Direction.axis(1).axis_index == 1
    assert d.axis_index is None
    assert float(d.vector @ d.perp) == pytest.approx(0.0, abs=1e-15)


def test_save_load_round_trip(tmp_path):
    F = gauss(17)
    vals = F.values.copy()
    vals[0, 0] = np.inf
    F = F.with_values(vals)
    side = F.save(tmp_path / "f.bin")
    assert side.name == "f.bin.json"
    G = GridFn.load(tmp_path / "f.bin")
    np.testing.assert_array_equal(G.values, F.values)
    assert G.origin == F.origin and G.spacing == F.spacing and G.cap == F.cap


def test_slice_csv(tmp_path):
    F = gauss(17)
    F.slice_csv(tmp_path / "s.csv")
    data = np.loadtxt(tmp_path / "s.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 1], 0.5 * data[:, 0] ** 2)


# sections


def test_extract_line_examples():
    F = gauss(65, None)
    t = np.linspace(-3, 3, 61)
    sec = gd.extract_line(F, Direction.of(1, 0), (0.0, 1.0), t)
    np.testing.assert_allclose(sec.values, 0.5 * t * t + 0.5, atol=1e-9)
    sec = gd.extract_line(F, Direction.of(0, 1), (2.0, 0.0), t)
    np.testing.assert_allclose(sec.values, 0.5 * t * t + 2, atol=1e-9)
    masked = F.with_values(np.where(F.mesh()[1] > 0, np.inf, F.values))
    sec = gd.extract_line(masked, Direction.of(1, 0), (0.0, 3.0), t)
    assert np.all(np.isinf(sec.values))


def test_extract_line_rejects_offset_off_hyperplane():
    with pytest.raises(ValueError):
        gd.extract_line(gauss(17), Direction.of(1, 0), (1.0, 1.0), [0.0, 1.0])


def test_nonconvex_section_aborts():
    F = GridFn.from_function(lambda x, y: np.cos(x) + y * y, ((-4, 4), (-4, 4)), (33, 33))
    with pytest.raises(NonConvexSectionError) as exc:
        gd.steiner_symmetrize(F, (1.0, 0.0))
    assert exc.value.defect > exc.value.tol


# symmetrization


def test_translation_case():
    F = GridFn.from_function(lambda x, y: 0.5 * ((x - 1) ** 2 + y * y), B8, (129, 129), 22.0)
    G = gd.steiner_symmetrize(F, (1.0, 0.0))
    X, Y = G.mesh()
    ok = finite(G)
    h = F.spacing[0]
    assert np.max(np.abs(G.values[ok] - 0.5 * (X[ok] ** 2 + Y[ok] ** 2))) <= 5 * h * h


def test_symmetric_input_is_fixed_point():
    F = gauss()
    for u in ((1.0, 0.0), (0.0, 1.0), (math.cos(0.4), math.sin(0.4))):
        G = gd.steiner_symmetrize(F, u)
        ok = finite(F, 25.0)
        assert np.max(np.abs(G.values[ok] - F.values[ok])) <= 1e-2


def test_example31_sections():
    F = funcbank.get("ex31_plus_y2").grid()
    G = gd.steiner_symmetrize(F, (1.0, 0.0))
    X, Y = G.mesh()
    ok = finite(G) & (np.abs(X) <= 2) & (np.abs(Y) <= 2)
    ref = funcbank.ex31_sym(X[ok]) + Y[ok] ** 2
    assert np.max(np.abs(G.values[ok] - ref)) <= 5e-3


def test_reflection_symmetry_about_hyperplane():
    F = funcbank.get("aniso_quad").grid()
    u = Direction.from_angle(0.9)
    G = gd.steiner_symmetrize(F, u)
    rng = np.random.default_rng(3)
    xp = rng.uniform(-2, 2, 40)
    t = rng.uniform(0.2, 1.5, 40)
    plus = gd.interp2d(G, xp * u.perp[0] + t * u.vector[0], xp * u.perp[1] + t * u.vector[1])
    minus = gd.interp2d(G, xp * u.perp[0] - t * u.vector[0], xp * u.perp[1] - t * u.vector[1])
    assert np.max(np.abs(plus - minus)) <= 1e-2


def test_two_orthogonal_directions_and_unconditionality():
    F = funcbank.get("ex31_plus_y2").grid()
    G = gd.steiner_symmetrize(gd.steiner_symmetrize(F, (1.0, 0.0)), (0.0, 1.0))
    v = gd.effective_values(G)
    ok = np.isfinite(v) & np.isfinite(v[::-1, :]) & np.isfinite(v[:, ::-1])
    assert np.max(np.abs(v[ok] - v[::-1, :][ok])) <= 1e-9
    assert np.max(np.abs(v[ok] - v[:, ::-1][ok])) <= 1e-9


def test_oblique_orthogonal_pair():
    F = funcbank.get("aniso_quad").grid()
    u1 = Direction.from_angle(0.5)
    u2 = Direction.from_angle(0.5 + math.pi / 2)
    G = gd.steiner_symmetrize(gd.steiner_symmetrize(F, u1), u2)
    rng = np.random.default_rng(5)
    p = rng.uniform(-1.5, 1.5, (60, 2))
    q1 = p - 2 * np.outer(p @ u1.vector, u1.vector)
    q2 = p - 2 * np.outer(p @ u2.vector, u2.vector)
    a = gd.interp2d(G, p[:, 0], p[:, 1])
    assert np.isfinite(a).all()
    assert np.max(np.abs(a - gd.interp2d(G, q1[:, 0], q1[:, 1]))) <= 2e-2
    assert np.max(np.abs(a - gd.interp2d(G, q2[:, 0], q2[:, 1]))) <= 2e-2


def test_one_dimensional_grid_matches_exact_route():
    f = funcbank.get("two_slope").pl
    F = GridFn.from_function(f, ((-6.0, 6.0),), (241,), 5.0)
    G = gd.steiner_symmetrize(F, (1.0,))
    x = F.axes[0]
    ok = finite(G)
    np.testing.assert_allclose(G.values[ok], c1.symmetrize_new(f)(x[ok]), atol=1e-9)


@pytest.mark.parametrize("angle", [0.3, 1.1, 2.5])
def test_level_set_equivalence_2d(angle):
    F = funcbank.get("shifted_quad2d").grid()
    u = Direction.from_angle(angle)
    G = gd.steiner_symmetrize(F, u)
    E = oracle.SampledFn2D(F.origin, F.spacing, np.exp(-gd.effective_values(F)))
    ref = oracle.levelset_symmetrize(E, u.components, levels=512)
    assert np.max(np.abs(np.exp(-gd.effective_values(G)) - ref.values)) <= 3 * F.spacing[0]


# conjugates


def test_llt_gaussian():
    F = gauss()
    L = gd.llt_legendre(F)
    P, Q = L.mesh()
    inner = (np.abs(P) <= 5) & (np.abs(Q) <= 5)
    err = np.max(np.abs(L.values - 0.5 * (P * P + Q * Q))[inner])
    assert err <= 0.05 * F.spacing[0]


def test_llt_l1():
    F = funcbank.get("l1_2d").grid()
    L = gd.llt_legendre(F)
    P, Q = L.mesh()
    inner = (np.abs(P) <= 0.95) & (np.abs(Q) <= 0.95)
    assert np.max(np.abs(L.values[inner])) <= F.spacing[0]


def test_llt_matches_direct_oracle_within_one_cell():
    F = GridFn.from_function(lambda x, y: x * x + 4 * y * y, ((-4, 4), (-4, 4)), (65, 65))
    ps = np.linspace(-6, 6, 25)
    L = gd.llt_legendre(F, [ps, ps], refine=1)
    ref = oracle.legendre_direct_2d(F, ps, ps)
    np.testing.assert_allclose(L.values, ref.values, atol=1e-9)
    Lr = gd.llt_legendre(F, [ps, ps])
    # refinement only raises the discrete maximum, by less than one cell of slope
    assert np.all(Lr.values >= ref.values - 1e-9)
    assert np.max(Lr.values - ref.values) <= F.spacing[0] * 12


def test_llt_one_dimensional_matches_exact_conjugate():
    f = funcbank.get("three_slope").pl
    F = GridFn.from_function(f, ((-8.0, 8.0),), (321,))
    ps = np.linspace(-0.9, 1.9, 29)
    L = gd.llt_legendre(F, [ps])
    assert np.max(np.abs(L.values - c1.legendre(f)(ps))) <= F.spacing[0]


def test_llt_twice_recovers_function():
    F = gauss(65, None)
    ps = np.linspace(-8, 8, 65)
    LL = gd.llt_legendre(gd.llt_legendre(F, [ps, ps]), list(F.axes))
    inner = (np.abs(F.mesh()[0]) <= 6) & (np.abs(F.mesh()[1]) <= 6)
    assert np.max(np.abs(LL.values - F.values)[inner]) <= F.spacing[0]


# integrals and diagnostics


def test_exp_integral_examples():
    assert gd.exp_integral(gauss()) == pytest.approx(2 * math.pi, rel=1e-3)
    assert gd.exp_integral(funcbank.get("l1_2d").grid()) == pytest.approx(4.0, rel=1e-3)
    sh = funcbank.get("shifted_quad2d").grid()
    assert gd.exp_integral(sh) == pytest.approx(2 * math.pi, rel=1e-3)


def test_exp_integral_warns_on_truncation():
    F = GridFn.from_function(lambda x, y: 0.5 * (x * x + y * y), ((-2, 2), (-2, 2)), (33, 33))
    with pytest.warns(RuntimeWarning):
        gd.exp_integral(F)


def test_radial_deviation():
    F = funcbank.get("aniso_quad").grid()
    d0 = gd.radial_deviation(F)
    assert d0 > 0.1
    # a radial function sits at the interpolation noise floor
    assert gd.radial_deviation(gauss()) <= 0.01 * d0
    G = gd.steiner_symmetrize(F, Direction.of(1, 1))
    assert gd.radial_deviation(G) < d0


@pytest.mark.parametrize("fid", ["gauss2d", "aniso_quad", "l1_2d", "shifted_quad2d",
                                 "ex31_plus_y2"])
def test_integral_invariance_per_step(fid):
    F = funcbank.get(fid).grid()
    a = gd.exp_integral(F)
    for theta in (0.0, 0.6, math.pi / 2, 2.2):
        G = gd.steiner_symmetrize(F, Direction.from_angle(theta))
        assert abs(gd.exp_integral(G) / a - 1) <= 1e-3
