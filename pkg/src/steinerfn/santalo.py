"""Functional Santaló experiments.

The volume product ``∫ exp(-f) ∫ exp(-Lf)`` of an even convex function is
at most ``(2π)^n``, with equality for ``|x|^2 / 2``.  Steiner symmetrization
keeps the first factor and does not decrease the second, which is what the
runners here measure.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from . import convex1d as c1
from . import gridnd as gd
from .convex1d import PLConvex1D
from .gridnd import Direction, GridFn
from .report import dumps, write_csv, write_json


class NotEvenError(ValueError):
    """The function is not even, so the product bound does not apply."""

    def __init__(self, asymmetry: float, tol: float):
        self.asymmetry = asymmetry
        self.tol = tol
        super().__init__(f"function is not even: max |f(x) - f(-x)| = {asymmetry:.3g} "
                         f"exceeds {tol:.3g}")


def santalo_bound(n: int) -> float:
    return (2 * math.pi) ** n


@dataclass
class SantaloReport:
    """Both integrals, their product and the distance to ``(2π)^n``.

    ``slack`` is ``bound - product``; ``relative_slack`` divides it by the
    bound.  ``trace`` holds one row per step of an iterated run.
    """

    function_id: str
    dimension: int
    integral: float
    dual_integral: float
    product: float
    bound: float
    seed: int | None = None
    trace: list = field(default_factory=list)
    final: GridFn | None = field(default=None, repr=False, compare=False)

    @property
    def slack(self) -> float:
        return self.bound - self.product

    @property
    def relative_slack(self) -> float:
        return self.slack / self.bound

    def within_bound(self, rel_tol: float = 0.0) -> bool:
        return self.product <= self.bound * (1 + rel_tol)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("function_id", "dimension", "integral",
                                           "dual_integral", "product", "bound", "seed")}
        d["trace"] = [dict(r) for r in self.trace]
        d["slack"] = self.slack
        d["relative_slack"] = self.relative_slack
        return d

    def to_json(self, path=None) -> str:
        return dumps(self.to_dict()) if path is None else write_json(path, self.to_dict())

    def trace_csv(self, path) -> None:
        write_trace_csv(self.trace, path)


TRACE_FIELDS = ("step", "angle", "integral", "dual_integral", "product", "radial_deviation")


def write_trace_csv(rows, path) -> None:
    write_csv(path, TRACE_FIELDS, ([r[k] for k in TRACE_FIELDS] for r in rows))


# ---------------------------------------------------------------------------
# products


def santalo_product(f, function_id: str = "", even_tol: float = 1e-6,
                    dual_axes=None) -> SantaloReport:
    """Volume product of an even convex function.

    Parameters
    ----------
    f : PLConvex1D or GridFn
        Exact 1-D functions use the closed-form integral of the exact
        conjugate.  Grid functions use :func:`gridnd.llt_legendre` and
        :func:`gridnd.exp_integral`; the grid must be symmetric about 0.
    even_tol : float
        Largest tolerated ``|f(x) - f(-x)|``.

    Raises
    ------
    NotEvenError
        With the measured asymmetry.
    """
    if isinstance(f, PLConvex1D):
        asym = c1.asymmetry(f)
        if not asym <= even_tol:
            raise NotEvenError(asym, even_tol)
        a = c1.exp_integral(f)
        lf = c1.legendre(f)
        b = c1.exp_integral(lf)
        n = 1
    elif isinstance(f, GridFn):
        asym = gd.asymmetry(f.with_values(gd.effective_values(f)))
        if not asym <= even_tol:
            raise NotEvenError(asym, even_tol)
        a = gd.exp_integral(f)
        # the dual box ends at the largest slope, so LF need not grow toward its rim
        b = gd.exp_integral(gd.llt_legendre(f, dual_axes), warn_tol=None)
        n = f.ndim
    else:
        raise TypeError(f"unsupported function type {type(f).__name__}")
    if not (0 < a < math.inf):
        raise ValueError("integral of exp(-f) must be positive and finite")
    return SantaloReport(function_id, n, a, b, a * b, santalo_bound(n))


@dataclass
class DualMonotonicityReport:
    direction: tuple
    dual_before: float
    dual_after: float
    integral_before: float
    integral_after: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.dual_before <= self.dual_after * (1 + self.tol)

    @property
    def relative_increase(self) -> float:
        return self.dual_after / self.dual_before - 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        d["relative_increase"] = self.relative_increase
        return d


def _shared_dual_axes(*fs: GridFn):
    axes = [gd.default_dual_axes(f) for f in fs]
    pmax = max(float(a[-1]) for ax in axes for a in ax)
    return [np.linspace(-pmax, pmax, n) for n in fs[0].shape]


def dual_monotonicity_check(F: GridFn, u, tol: float = 1e-3, require_even: bool = True,
                            even_tol: float = 1e-6, **symmetrize_kw) -> DualMonotonicityReport:
    """Compare ``∫ exp(-LF)`` before and after symmetrizing along ``u``.

    Both conjugates live on the same square dual grid, wide enough for the
    slopes of either function.  Passes iff the dual integral does not drop
    by more than ``tol`` (relative).
    """
    d = u if isinstance(u, Direction) else Direction.of(*u)
    if require_even:
        asym = gd.asymmetry(F.with_values(gd.effective_values(F)))
        if not asym <= even_tol:
            raise NotEvenError(asym, even_tol)
    G = gd.steiner_symmetrize(F, d, **symmetrize_kw)
    dual = _shared_dual_axes(F, G)
    return DualMonotonicityReport(
        d.components,
        gd.exp_integral(gd.llt_legendre(F, dual), warn_tol=None),
        gd.exp_integral(gd.llt_legendre(G, dual), warn_tol=None),
        gd.exp_integral(F), gd.exp_integral(G), tol)


# ---------------------------------------------------------------------------
# radial case


def sphere_area(n: int) -> float:
    """``n π^{n/2} / Γ(1 + n/2)``: 2 for the line, 2π for the plane."""
    return n * math.pi ** (n / 2) / math.gamma(1 + n / 2)


def radial_conjugate(h: Callable[[float], float], r: float, t_cap: float = 1e8) -> float:
    """``sup_{t >= 0} (r t - h(t))`` for increasing convex ``h``.

    The maximizer is bracketed by doubling and then located by bounded
    scalar minimization.  Returns ``inf`` when no bracket exists below
    ``t_cap`` (``h`` grows too slowly).
    """
    if r <= 0:
        return -h(0.0)
    g = lambda t: h(t) - r * t  # noqa: E731
    hi = 1.0
    while g(2 * hi) < g(hi):
        hi *= 2
        if hi > t_cap:
            return math.inf
    res = optimize.minimize_scalar(g, bounds=(0.0, 2 * hi), method="bounded",
                                   options={"xatol": 1e-12 * max(1.0, hi)})
    best = min(res.fun, g(0.0))
    return -float(best)


@dataclass
class RadialBoundReport:
    n: int
    integral: float
    dual_integral: float
    product: float
    bound: float
    scalar_lhs: float
    scalar_rhs: float

    @property
    def ratio(self) -> float:
        return self.product / self.bound

    @property
    def holds(self) -> bool:
        return self.product <= self.bound * (1 + 1e-9)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ratio"] = self.ratio
        return d


def _radial_moment(fn: Callable[[float], float], n: int, upper: float) -> float:
    val, _ = integrate.quad(lambda r: math.exp(-fn(r)) * r ** (n - 1), 0.0, upper,
                            limit=400, epsabs=0, epsrel=1e-12)
    return val


def _support_edge(fn: Callable[[float], float], level: float = 745.0) -> float:
    """Smallest ``r`` with ``fn(r) > level``, by doubling then bisection."""
    hi = 1.0
    while fn(hi) <= level:
        hi *= 2
        if hi > 1e12:
            raise ValueError("exp(-h) does not decay; the integral diverges")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if fn(mid) > level:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def radial_bound_check(h: Callable[[float], float], n: int,
                       h_conj: Callable[[float], float] | None = None) -> RadialBoundReport:
    """Product bound for the radial function ``f(x) = h(|x|)`` in dimension ``n``.

    Computes ``ω_n ∫ exp(-h(r)) r^{n-1} dr`` and the same integral for the
    radial conjugate ``h*(r) = sup_t (r t - h(t))`` and compares the product
    with ``(2π)^n``.  The scalar form of the same inequality,
    ``∫ e^{-h} r^{n-1} · ∫ e^{-h*} r^{n-1} <= (∫ e^{-r²/2} r^{n-1})^2``, is
    reported too.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    conj = h_conj if h_conj is not None else (lambda r: radial_conjugate(h, r))
    i1 = _radial_moment(h, n, _support_edge(h))
    i2 = _radial_moment(conj, n, _support_edge(conj))
    w = sphere_area(n)
    gauss = 2 ** (n / 2 - 1) * special.gamma(n / 2)
    return RadialBoundReport(n, w * i1, w * i2, w * w * i1 * i2, santalo_bound(n),
                             i1 * i2, float(gauss) ** 2)


# ---------------------------------------------------------------------------
# iterated symmetrization


def convergence_experiment(F: GridFn, steps: int, seed: int, function_id: str = "",
                           with_dual: bool = True, **symmetrize_kw) -> SantaloReport:
    """Symmetrize ``steps`` times along seeded random directions.

    Directions are uniform angles in ``[0, π)`` drawn from
    ``numpy.random.default_rng(seed)``.  Each row of the returned trace holds
    the step, the angle, ``∫ exp(-F)``, ``∫ exp(-LF)``, their product and
    :func:`gridnd.radial_deviation`.  The dual grid is fixed up front from
    the slopes of the starting function so all rows are comparable.
    """
    if F.ndim != 2:
        raise ValueError("the convergence experiment runs on 2-D grids")
    rng = np.random.default_rng(seed)
    axes = gd.default_dual_axes(F)
    pmax = max(float(a[-1]) for a in axes)
    dual = [np.linspace(-pmax, pmax, n) for n in F.shape]

    def row(step, angle, G):
        a = gd.exp_integral(G)
        b = gd.exp_integral(gd.llt_legendre(G, dual), warn_tol=None) if with_dual else None
        return {"step": step, "angle": angle, "integral": a, "dual_integral": b,
                "product": None if b is None else a * b,
                "radial_deviation": gd.radial_deviation(G)}

    trace = [row(0, None, F)]
    G = F
    for k in range(1, steps + 1):
        theta = float(rng.uniform(0.0, math.pi))
        G = gd.steiner_symmetrize(G, Direction.from_angle(theta), **symmetrize_kw)
        trace.append(row(k, theta, G))
    last = trace[-1]
    return SantaloReport(function_id, 2, last["integral"],
                         last["dual_integral"] if with_dual else math.nan,
                         last["product"] if with_dual else math.nan,
                         santalo_bound(2), seed=seed, trace=trace, final=G)
