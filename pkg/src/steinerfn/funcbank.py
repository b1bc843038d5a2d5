"""Named test functions with known symmetrals, integrals and conjugates.

Every entry carries a list of :class:`Fact` objects.  A fact knows how to
recompute its own residual with the main pipeline, so the test suite can
check the whole catalog in one loop.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import convex1d as c1
from .convex1d import WALL, PLConvex1D


@dataclass(frozen=True)
class Fact:
    """A known property of a catalog entry.

    ``residual(fn)`` recomputes the property with the library and returns a
    nonnegative error, which must not exceed ``tol``.  ``source`` says where
    the expected value comes from: ``"analytic"`` (closed form),
    ``"computed"`` (an independent numerical route) or ``"identity"``
    (a structural property such as evenness).
    """

    name: str
    description: str
    source: str
    tol: float
    residual: Callable[["NamedFunction"], float] = field(repr=False, compare=False)

    def check(self, fn: "NamedFunction") -> tuple[bool, float]:
        r = float(self.residual(fn))
        return r <= self.tol, r


@dataclass(frozen=True, eq=False)
class NamedFunction:
    """A documented convex function.

    ``evaluator`` takes one array per coordinate.  One-dimensional entries
    build an exact PL representation through ``build_pl`` (exact for PL
    inputs, a fit for smooth ones); two-dimensional entries are sampled on
    ``window`` with ``grid_shape`` points and capped at ``cap``.
    """

    id: str
    dim: int
    description: str
    evaluator: Callable
    window: tuple
    facts: tuple = ()
    even: bool = False
    build_pl: Callable[[], PLConvex1D] | None = field(default=None, repr=False)
    grid_shape: tuple | None = None
    cap: float | None = None

    @cached_property
    def pl(self) -> PLConvex1D:
        if self.build_pl is None:
            raise AttributeError(f"{self.id} has no 1-D representation")
        return self.build_pl()

    def grid(self, shape=None):
        """Sample a 2-D entry as a :class:`gridnd.GridFn`."""
        from .gridnd import GridFn
        if self.dim != 2:
            raise ValueError(f"{self.id} is one-dimensional")
        return GridFn.from_function(self.evaluator, self.window,
                                    shape or self.grid_shape, cap=self.cap)

    def __call__(self, *x):
        return self.evaluator(*x)

    def check_facts(self) -> dict[str, tuple[bool, float]]:
        return {f.name: f.check(self) for f in self.facts}

    def to_dict(self) -> dict:
        d = {"id": self.id, "dim": self.dim, "description": self.description,
             "window": [list(map(float, w)) for w in self.window]
             if self.dim == 2 else list(map(float, self.window)),
             "even": self.even,
             "facts": [{"name": f.name, "description": f.description,
                        "source": f.source, "tol": f.tol} for f in self.facts]}
        if self.dim == 1:
            d["spec"] = self.pl.to_dict()
        else:
            d["grid_shape"] = list(self.grid_shape)
            d["cap"] = self.cap
        return d


# ---------------------------------------------------------------------------
# helpers for facts


def _sample_points(fn: NamedFunction, n: int = 201) -> np.ndarray:
    lo, hi = fn.window
    return np.linspace(lo, hi, n)


def _sup_gap(f: PLConvex1D, target: Callable, xs) -> float:
    a = c1.evaluate(f, xs)
    b = np.asarray(target(xs), dtype=float)
    same_inf = np.isinf(a) & np.isinf(b)
    if np.any(np.isinf(a) ^ np.isinf(b)):
        return math.inf
    with np.errstate(invalid="ignore"):
        return float(np.max(np.where(same_inf, 0.0, np.abs(a - b))))


def sym_is(target: Callable, tol: float = 1e-9, source: str = "analytic",
           where: Callable[[np.ndarray], np.ndarray] | None = None,
           name: str = "symmetral") -> Fact:
    def res(fn):
        xs = _sample_points(fn)
        if where is not None:
            xs = xs[where(xs)]
        return _sup_gap(c1.symmetrize_new(fn.pl), target, xs)
    return Fact(name, "new symmetrization equals the closed form", source, tol, res)


def amk_is(target: Callable, tol: float = 1e-9, source: str = "computed") -> Fact:
    def res(fn):
        return _sup_gap(c1.symmetrize_amk(fn.pl), target, _sample_points(fn))
    return Fact("amk_symmetral", "half-sum infimal symmetrization equals the closed form",
                source, tol, res)


def integral_is(value: float, tol: float, source: str = "analytic") -> Fact:
    def res(fn):
        return abs(c1.exp_integral(fn.pl) - value) / value
    return Fact("exp_integral", f"integral of exp(-f) is {value:.12g} (relative error)",
                source, tol, res)


def conjugate_is(target: PLConvex1D, tol: float = 1e-12) -> Fact:
    def res(fn):
        lf = c1.legendre(fn.pl)
        lo = min(target.breakpoints[0], lf.breakpoints[0]) - 2
        hi = max(target.breakpoints[-1], lf.breakpoints[-1]) + 2
        return _sup_gap(lf, target, np.linspace(lo, hi, 401))
    return Fact("conjugate", "Legendre transform equals the closed form", "analytic", tol, res)


def product_is(value: float, tol: float) -> Fact:
    def res(fn):
        from .santalo import santalo_product
        return abs(santalo_product(fn.pl, fn.id).product - value) / value
    return Fact("santalo_product", f"volume product is {value:.12g} (relative error)",
                "analytic", tol, res)


def fixed_point(tol: float = 1e-9) -> Fact:
    def res(fn):
        return _sup_gap(c1.symmetrize_new(fn.pl), fn.pl, _sample_points(fn))
    return Fact("fixed_point", "even function is left unchanged", "identity", tol, res)


def width_is(target: Callable[[np.ndarray], np.ndarray], tol: float = 1e-9) -> Fact:
    def res(fn):
        wp = c1.width_profile(fn.pl)
        s = np.linspace(wp.levels[0], wp.levels[0] + 5, 101)
        return float(np.max(np.abs(wp.width(s) - target(s))))
    return Fact("widths", "sublevel widths follow the closed form", "analytic", tol, res)


# ---------------------------------------------------------------------------
# the worked cubic/quadratic example


def ex31_f(x):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, x ** 3, x ** 2)


def ex31_g(s):
    """``½(s^{1/3} + s^{1/2})``: half the width of ``{f <= s}``."""
    s = np.asarray(s, dtype=float)
    return 0.5 * (np.cbrt(s) + np.sqrt(s))


def ex31_sym(x):
    """``g⁻¹(|x|)`` through ``v³ + v² = 2|x|`` with ``s = v⁶``."""
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    out = np.empty_like(x)
    for i, a in enumerate(x):
        if a == 0:
            out[i] = 0.0
            continue
        hi = max(1.0, 2 * a)
        v = brentq(lambda v: v ** 3 + v ** 2 - 2 * a, 0.0, hi, xtol=1e-15, rtol=1e-15)
        out[i] = v ** 6
    return out


def ex31_amk(x):
    """Closed form of ``½ inf_y [f(y) + f(y - 2x)]`` for the cubic/quadratic example."""
    a = np.abs(np.asarray(x, dtype=float))
    r = np.sqrt(1 + 12 * a)
    return ((-12 * a - 1) * r + 18 * a + 1) / 27 + 2 * a ** 2


def _ex31_pl() -> PLConvex1D:
    return c1.fit_convex(ex31_f, (-4.0, 3.0), tol=1e-6, anchors=(-1.0, 1.0))


def example31() -> NamedFunction:
    """``x³`` for ``x >= 0`` and ``x²`` for ``x <= 0``.

    Its symmetral is ``g⁻¹(|x|)`` with ``g(s) = ½(∛s + √s)``, the half-sum
    infimal variant has a closed form with a square root, and the first is
    strictly larger away from 0.
    """
    def gap_positive(fn):
        xs = np.array([-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0])
        d = c1.evaluate(c1.symmetrize_new(fn.pl), xs) - c1.evaluate(c1.symmetrize_amk(fn.pl), xs)
        return 0.0 if d.min() > 0 else 1.0

    facts = (
        sym_is(ex31_sym, tol=1e-5, where=lambda x: np.abs(x) <= 2),
        Fact("amk_symmetral", "half-sum infimal symmetrization equals the closed form",
             "analytic", 1e-5,
             lambda fn: _sup_gap(c1.symmetrize_amk(fn.pl), ex31_amk,
                                 np.linspace(-2, 2, 201))),
        Fact("domination", "new symmetral strictly exceeds the infimal one off 0",
             "analytic", 0.0, gap_positive),
        Fact("sym_at_one", "symmetral equals 1 at x = 1", "analytic", 1e-9,
             lambda fn: abs(float(c1.evaluate(c1.symmetrize_new(fn.pl), 1.0)) - 1.0)),
        integral_is(math.gamma(4 / 3) + math.sqrt(math.pi) / 2, 1e-5),
    )
    return NamedFunction("example31", 1, "x^3 for x >= 0, x^2 for x <= 0", ex31_f,
                         (-3.0, 3.0), facts, False, _ex31_pl)


# ---------------------------------------------------------------------------
# catalog


def _pl_entry(id_, description, f: PLConvex1D, window, facts, even=False):
    return NamedFunction(id_, 1, description, f.__call__, window, tuple(facts), even,
                         lambda: f)


def _one_dim() -> list[NamedFunction]:
    absf = c1.abs_function()
    plateau = c1.max_affine([-1, 0, 1], [-1, 0, -1])
    two = c1.max_affine([-2, 1], [0, 0])
    two_shift = c1.translate(two, 1.0)
    abs_shift = c1.abs_function(3.0)
    three = c1.max_affine([-1, 0, 2], [-1, 0, -4])
    ramp = PLConvex1D([0.0, 1.0], [0.0, 1.0])
    vee = PLConvex1D([0.0, 0.5, 1.0], [2.0, 0.0, 1.0])
    box = c1.indicator(-1.0, 1.0)
    walls = lambda lo, hi: (lambda x: (np.abs(x) >= lo) & (np.abs(x) <= hi))  # noqa: E731

    gauss = NamedFunction(
        "gaussian", 1, "x^2 / 2, equality case of the product bound",
        lambda x: 0.5 * np.asarray(x, float) ** 2, (-12.0, 12.0),
        (fixed_point(1e-9),
         integral_is(math.sqrt(2 * math.pi), 1e-5),
         product_is(2 * math.pi, 1e-3)),
        True, lambda: c1.fit_convex(lambda x: 0.5 * x * x, (-12.0, 12.0), tol=1e-7,
                                    anchors=(0.0,)))
    return [
        gauss,
        _pl_entry("abs", "|x|", absf, (-10.0, 10.0), [
            fixed_point(), integral_is(2.0, 1e-12),
            conjugate_is(c1.indicator(-1, 1)), product_is(4.0, 1e-12)], even=True),
        _pl_entry("plateau", "max(0, |x| - 1)", plateau, (-10.0, 10.0), [
            fixed_point(), integral_is(4.0, 1e-12),
            width_is(lambda s: 2 + 2 * s)], even=True),
        _pl_entry("two_slope", "max(-2x, x)", two, (-10.0, 10.0), [
            sym_is(lambda x: 4 / 3 * np.abs(x)),
            amk_is(lambda x: np.abs(x)),
            width_is(lambda s: 1.5 * s), integral_is(1.5, 1e-12)]),
        _pl_entry("two_slope_shifted", "max(-2(x-1), x-1)", two_shift, (-10.0, 10.0), [
            sym_is(lambda x: 4 / 3 * np.abs(x)),
            amk_is(lambda x: np.abs(x))]),
        _pl_entry("abs_shifted", "|x - 3|", abs_shift, (-10.0, 10.0), [
            sym_is(lambda x: np.abs(x)), integral_is(2.0, 1e-12)]),
        _pl_entry("three_slope", "max(-x - 1, 0, 2x - 4)", three, (-10.0, 10.0), [
            sym_is(lambda x: np.maximum(0.0, (2 * np.abs(x) - 3) / 1.5)),
            conjugate_is(PLConvex1D([-1.0, 0.0, 2.0], [1.0, 0.0, 4.0])),
            integral_is(3 + 1 + 0.5, 1e-12)]),
        _pl_entry("wall_ramp", "x on [0, 1], +inf elsewhere", ramp, (-1.0, 1.0), [
            sym_is(lambda x: np.where(np.abs(x) <= 0.5, 2 * np.abs(x), np.inf)),
            integral_is(1 - math.exp(-1), 1e-12)]),
        _pl_entry("wall_vee", "max(2 - 4x, 2x - 1) on [0, 1], +inf elsewhere", vee,
                  (-1.0, 1.0), [
            sym_is(lambda x: vee(1 - 2 * np.abs(x)), where=walls(0.375, 0.5),
                   name="boundary_formula"),
            sym_is(lambda x: np.where(np.abs(x) <= 0.375, 8 * np.abs(x) / 3,
                                      np.where(np.abs(x) <= 0.5, 8 * np.abs(x) - 2, np.inf)))]),
        _pl_entry("box", "0 on [-1, 1], +inf elsewhere", box, (-2.0, 2.0), [
            fixed_point(), integral_is(2.0, 1e-12),
            conjugate_is(c1.abs_function()), product_is(4.0, 1e-12)], even=True),
        example31(),
    ]


def _two_dim() -> list[NamedFunction]:
    def ex31_plus_y2(x, y):
        return ex31_f(x) + np.asarray(y, float) ** 2

    return [
        NamedFunction("gauss2d", 2, "(x^2 + y^2) / 2", lambda x, y: 0.5 * (x * x + y * y),
                      ((-8.0, 8.0), (-8.0, 8.0)), (), True, None, (129, 129), 30.0),
        NamedFunction("aniso_quad", 2, "x^2 + 4 y^2", lambda x, y: x * x + 4 * y * y,
                      ((-6.0, 6.0), (-6.0, 6.0)), (), True, None, (129, 129), 34.0),
        NamedFunction("l1_2d", 2, "|x| + |y|", lambda x, y: np.abs(x) + np.abs(y),
                      ((-12.0, 12.0), (-12.0, 12.0)), (), True, None, (257, 257), 11.0),
        NamedFunction("shifted_quad2d", 2, "((x - 1)^2 + y^2) / 2",
                      lambda x, y: 0.5 * ((x - 1) ** 2 + y * y),
                      ((-8.0, 8.0), (-8.0, 8.0)), (), False, None, (129, 129), 22.0),
        NamedFunction("ex31_plus_y2", 2, "cubic/quadratic example in x plus y^2",
                      ex31_plus_y2, ((-5.0, 5.0), (-5.0, 5.0)), (), False, None,
                      (129, 129), 22.0),
    ]


_CATALOG: list[NamedFunction] | None = None


def catalog() -> list[NamedFunction]:
    """All named functions, one-dimensional first."""
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _one_dim() + _two_dim()
    return list(_CATALOG)


def get(function_id: str) -> NamedFunction:
    for fn in catalog():
        if fn.id == function_id:
            return fn
    known = ", ".join(fn.id for fn in catalog())
    raise KeyError(f"unknown function {function_id!r}; known: {known}")


def ids(dim: int | None = None) -> list[str]:
    return [fn.id for fn in catalog() if dim is None or fn.dim == dim]


def dump_json(path=None) -> str:
    text = json.dumps([fn.to_dict() for fn in catalog()], indent=2)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


__all__ = ["Fact", "NamedFunction", "catalog", "get", "ids", "dump_json", "example31",
           "ex31_f", "ex31_g", "ex31_sym", "ex31_amk", "WALL"]
