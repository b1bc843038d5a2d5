"""Acceptance criteria, one test per criterion.

Each test logs a PASS/FAIL line through the ``criterion`` fixture; the lines
are repeated in a summary section at the end of the pytest run.
"""
import math

import numpy as np

from conftest import random_family, random_pl
from steinerfn import convex1d as c1
from steinerfn import funcbank, oracle, santalo
from steinerfn import gridnd as gd
from steinerfn.gridnd import Direction

ONE_D = [fn for fn in funcbank.catalog() if fn.dim == 1]
TWO_D = [fn for fn in funcbank.catalog() if fn.dim == 2]


def pl_inputs():
    """Every 1-D catalog entry plus the 50 seeded random functions."""
    named = [(fn.id, fn.pl) for fn in ONE_D]
    return named + [(f"random{i}", f) for i, f in enumerate(random_family(2024, 50))]


# ---------------------------------------------------------------------------
# point-evaluation helpers, independent of the width machinery


def sublevel_ends(f, levels):
    """Ends of ``{f <= s}`` for each level, by bisection on point values."""
    s = np.asarray(levels, float)
    xm = float(f.breakpoints[int(np.argmin(f.values))])
    ends = []
    for sign, bound in ((-1, f.domain[0]), (1, f.domain[1])):
        if math.isfinite(bound):
            far = bound
        else:
            far = xm + sign
            while f(far) <= s.max():
                far = xm + 2 * (far - xm)
        out = np.full(s.shape, far, float)
        todo = f(far) > s
        a, b = np.full(s.shape, far, float), np.full(s.shape, xm)
        for _ in range(200):
            mid = 0.5 * (a + b)
            above = f(mid) > s
            a, b = np.where(above, mid, a), np.where(above, b, mid)
        out[todo] = 0.5 * (a + b)[todo]
        ends.append(out)
    return ends


def test_criterion_1_example31(criterion):
    xs = np.array([0.0, 0.25, 0.5, 1.0, 2.0])
    with criterion(1, "worked example symmetrals", budget=1.0):
        f = funcbank.example31().pl
        S, A = c1.symmetrize_new(f), c1.symmetrize_amk(f)
        err_s = np.max(np.abs(S(xs) - funcbank.ex31_sym(xs)))
        err_a = np.max(np.abs(A(xs) - funcbank.ex31_amk(xs)))
        assert err_s <= 1e-5, f"Sf off g^-1(|x|) by {err_s:.2e}"
        assert err_a <= 1e-5, f"amk off the closed form by {err_a:.2e}"
        assert abs(float(S(1.0)) - 1.0) <= 1e-9, f"Sf(1) = {float(S(1.0))!r}"
        grid = np.linspace(-3, 3, 1201)
        gap = np.min(S(grid) - A(grid))
        assert gap >= -1e-12, f"Sf < amk by {-gap:.2e}"


def test_criterion_2_width_preservation(criterion):
    with criterion(2, "sublevel widths preserved", budget=5.0):
        worst, where = 0.0, None
        for name, f in pl_inputs():
            S = c1.symmetrize_new(f)
            prof = c1.width_profile(S)
            levels = f.minimum + 10.0 * np.arange(1, 101) / 100
            a, b = sublevel_ends(f, levels)
            p, q = sublevel_ends(S, levels)
            w = b - a
            err = np.maximum.reduce([np.abs(q - p - w), np.abs(prof.width(levels) - w),
                                     np.abs(p + q)]) / w
            k = int(np.argmax(err))
            if err[k] > worst:
                worst, where = float(err[k]), (name, float(levels[k]))
        assert worst <= 1e-9, f"relative width error {worst:.2e} at {where}"


def test_criterion_3_integral_invariance(criterion):
    with criterion(3, "integral invariance", budget=30.0):
        worst1 = max(abs(c1.exp_integral(c1.symmetrize_new(f)) / c1.exp_integral(f) - 1)
                     for _, f in pl_inputs())
        assert worst1 <= 1e-9, f"1-D drift {worst1:.2e}"
        thetas = np.random.default_rng(3).uniform(0.0, math.pi, 20)
        worst2, where = 0.0, None
        for fn in TWO_D:
            F = fn.grid()
            base = gd.exp_integral(F)
            for th in thetas:
                G = gd.steiner_symmetrize(F, Direction.from_angle(float(th)))
                drift = abs(gd.exp_integral(G) / base - 1)
                if drift > worst2:
                    worst2, where = drift, (fn.id, float(th))
        assert worst2 <= 1e-3, f"2-D drift {worst2:.2e} at {where}"


def test_criterion_4_definition_equivalence(criterion):
    with criterion(4, "level-set route matches exp(-Sf)", budget=30.0):
        worst, where = 0.0, None
        for fn in ONE_D:
            half = max(abs(fn.window[0]), abs(fn.window[1]))
            xs = np.linspace(-half, half, 4096)
            f = fn.pl
            F = oracle.SampledFn1D(xs, np.exp(-f(xs)))
            G = oracle.levelset_symmetrize(F, levels=512)
            gap = float(np.max(np.abs(G.vals - np.exp(-c1.symmetrize_new(f)(xs)))))
            if gap > worst:
                worst, where = gap, fn.id
        assert worst <= 5e-3, f"sup gap {worst:.2e} on {where}"


def test_criterion_5_supinf_consistency(criterion):
    with criterion(5, "sup-inf oracle agrees", budget=60.0):
        worst, where = 0.0, None
        t_grid = 2001
        for i, f in enumerate(random_family(2024, 50)):
            S = c1.symmetrize_new(f)
            mins = f.breakpoints[f.values == f.values.min()]
            for x in np.linspace(-3.0, 3.0, 25):
                span = 0.6 * (mins[-1] - mins[0] + 2 * abs(x)) + 0.5
                step = span / (t_grid - 1)
                got = c1.supinf_oracle(f, float(x), t_grid=t_grid, t_span=span)
                ratio = abs(got - float(S(x))) / step
                if ratio > worst:
                    worst, where = ratio, (i, float(x))
        assert worst <= 3.0, f"error {worst:.2f} t-steps at {where}"


def test_criterion_6_monotonicity_and_evenness(criterion):
    rng = np.random.default_rng(6)
    xs = np.linspace(-6.0, 6.0, 241)
    with criterion(6, "monotone and even", budget=None):
        violations = []
        for i in range(100):
            f1 = random_pl(rng, 2 + i % 2)
            g = random_pl(rng, 2 + (i // 2) % 2)
            f2 = c1.add(f1, c1.translate(g, 0.0, -g.minimum))
            pts = np.concatenate([xs, c1.symmetrize_new(f1).breakpoints,
                                  c1.symmetrize_new(f2).breakpoints])
            d = np.max(c1.symmetrize_new(f1)(pts) - c1.symmetrize_new(f2)(pts))
            if d > 1e-9:
                violations.append(("pair", i, float(d)))
        for i in range(100):
            f = random_pl(rng, 2 + i % 2)
            shifted = c1.translate(f, float(rng.uniform(-3, 3)))
            S, T = c1.symmetrize_new(f), c1.symmetrize_new(shifted)
            odd = np.max(np.abs(T(xs) - T(-xs)))
            moved = np.max(np.abs(T(xs) - S(xs)))
            if max(odd, moved) > 1e-9:
                violations.append(("shift", i, float(max(odd, moved))))
        assert not violations, f"{len(violations)} violations, first {violations[0]}"


def test_criterion_7_legendre(criterion):
    with criterion(7, "Legendre transforms", budget=None):
        worst, where = 0.0, None
        for name, f in pl_inputs():
            LL = c1.legendre(c1.legendre(f))
            pts = np.concatenate([f.breakpoints, f.breakpoints[[0, -1]] + [-1.0, 1.0]])
            a, b = f(pts), LL(pts)
            fin = np.isfinite(a)
            assert np.array_equal(fin, np.isfinite(b)), f"domains differ on {name}"
            err = np.max(np.abs(a[fin] - b[fin]) / np.maximum(1.0, np.abs(a[fin])))
            if err > worst:
                worst, where = err, name
        assert worst <= 1e-12, f"biconjugation error {worst:.2e} on {where}"

        quads = [gd.GridFn.from_function(lambda x, y: x * x + 4 * y * y,
                                         ((-4, 4), (-4, 4)), (65, 65)),
                 funcbank.get("gauss2d").grid(), funcbank.get("aniso_quad").grid()]
        for F in quads:
            ps = np.linspace(-5.0, 5.0, 21)
            ref = oracle.legendre_direct_2d(F, ps, ps).values
            exact = gd.llt_legendre(F, [ps, ps], refine=1).values
            assert np.max(np.abs(exact - ref)) <= 1e-9
            P, Q = np.meshgrid(ps, ps, indexing="ij")
            cell = np.abs(P) * F.spacing[0] + np.abs(Q) * F.spacing[1]
            excess = np.max(np.abs(gd.llt_legendre(F, [ps, ps]).values - ref) - cell)
            assert excess <= 0, f"LLT exceeds one cell by {excess:.2e}"


def test_criterion_8_santalo(criterion):
    with criterion(8, "Blaschke-Santalo bound", budget=120.0):
        for fn in ONE_D:
            if fn.even:
                rep = santalo.santalo_product(fn.pl, fn.id)
                assert rep.product <= rep.bound * (1 + 1e-12), f"{fn.id}: {rep.product}"
        g1 = santalo.santalo_product(funcbank.get("gaussian").pl)
        assert 0 <= g1.slack <= 1e-3, f"1-D Gaussian slack {g1.slack:.2e}"
        for fn in TWO_D:
            if fn.even:
                rep = santalo.santalo_product(fn.grid(), fn.id)
                assert rep.product <= rep.bound * (1 + 1e-2), f"{fn.id}: {rep.product}"
                if fn.id == "gauss2d":
                    assert abs(rep.relative_slack) <= 2e-2, f"2-D Gaussian {rep.relative_slack}"
        dirs = [(1.0, 0.0), (1.0, 1.0), Direction.from_angle(0.3), Direction.from_angle(2.0)]
        failed = []
        for fn in TWO_D:
            if fn.even:
                F = fn.grid()
                for u in dirs:
                    r = santalo.dual_monotonicity_check(F, u)
                    if not r.passed:
                        failed.append((fn.id, r.direction, r.relative_increase))
        r = santalo.dual_monotonicity_check(funcbank.get("ex31_plus_y2").grid(), (1.0, 0.0),
                                            require_even=False)
        if not r.passed:
            failed.append(("ex31_plus_y2", r.direction, r.relative_increase))
        assert not failed, f"dual integral dropped: {failed}"


def test_criterion_9_radial(criterion):
    with criterion(9, "radial bound", budget=5.0):
        for n in (1, 2):
            rep = santalo.radial_bound_check(lambda t: 0.5 * t * t, n)
            assert abs(rep.ratio - 1) <= 1e-4, f"Gaussian n={n}: ratio {rep.ratio}"
            for name, h in (("t", lambda t: t), ("t^4", lambda t: t ** 4)):
                rep = santalo.radial_bound_check(h, n)
                assert rep.ratio < 1 - 1e-3, f"h={name} n={n}: ratio {rep.ratio}"
                assert rep.scalar_lhs < rep.scalar_rhs


def test_criterion_10_convergence(criterion):
    with criterion(10, "iterated symmetrization becomes radial", budget=None):
        F = funcbank.get("aniso_quad").grid()
        rep = santalo.convergence_experiment(F, 50, seed=7, function_id="aniso_quad")
        first, last = rep.trace[0], rep.trace[-1]
        ratio = last["radial_deviation"] / first["radial_deviation"]
        drift = abs(last["integral"] / first["integral"] - 1)
        assert ratio < 0.05, f"radial deviation ratio {ratio:.3f}"
        assert drift < 1e-2, f"integral drift {drift:.2e}"
