"""Slow, independent reference computations used to cross-check the exact layer.

Nothing in here calls the symmetrization or conjugation code it is meant to
check.  Everything works on sampled values and is written for clarity, not
speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .convex1d import supinf_oracle  # noqa: F401  (re-exported for tests)

__all__ = [
    "SampledFn1D", "SampledFn2D", "QuadratureError",
    "levelset_symmetrize", "superlevel_measure",
    "legendre_direct", "legendre_direct_2d", "inf_convolve_direct",
    "inf_split_amk", "quad_exp_integral", "supinf_oracle",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature hit its refinement limit."""


def _is_uniform(xs: np.ndarray) -> bool:
    d = np.diff(xs)
    return bool(d.size and np.all(d > 0) and np.ptp(d) <= 1e-9 * d.mean())


@dataclass(frozen=True, eq=False)
class SampledFn1D:
    """Values on a uniform grid; ``inf`` marks points outside the domain."""

    xs: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vals = np.asarray(self.vals, dtype=float)
        if xs.ndim != 1 or xs.shape != vals.shape:
            raise ValueError("xs and vals must be 1-D arrays of equal length")
        if not _is_uniform(xs):
            raise ValueError("grid must be uniform and increasing")
        if np.count_nonzero(np.isfinite(vals)) < 2:
            raise ValueError("need at least two finite values")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vals", vals)

    @property
    def step(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @classmethod
    def sample(cls, func: Callable, lo: float, hi: float, n: int = 4096) -> "SampledFn1D":
        xs = np.linspace(lo, hi, n)
        return cls(xs, np.asarray(func(xs), dtype=float))


@dataclass(frozen=True, eq=False)
class SampledFn2D:
    """Values on a tensor grid with ``ij`` indexing."""

    origin: tuple[float, float]
    spacing: tuple[float, float]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("values must be a 2-D array")
        if min(self.spacing) <= 0:
            raise ValueError("spacings must be positive")
        if not np.isfinite(vals).any():
            raise ValueError("finite-value region is empty")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", tuple(map(float, self.origin)))
        object.__setattr__(self, "spacing", tuple(map(float, self.spacing)))

    @property
    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(o + h * np.arange(n) for o, h, n
                     in zip(self.origin, self.spacing, self.values.shape))

    @classmethod
    def sample(cls, func: Callable, bounds, shape) -> "SampledFn2D":
        (x0, x1), (y0, y1) = bounds
        xs = np.linspace(x0, x1, shape[0])
        ys = np.linspace(y0, y1, shape[1])
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return cls((x0, y0), (xs[1] - xs[0], ys[1] - ys[0]),
                   np.asarray(func(X, Y), dtype=float))


# ---------------------------------------------------------------------------
# layer-cake symmetrization


def _thresholds(top: float, levels: int, spacing: str) -> tuple[np.ndarray, np.ndarray]:
    """Threshold values and the layer thickness attached to each."""
    if spacing == "linear":
        step = top / levels
        return (np.arange(levels) + 0.5) * step, np.full(levels, step)
    if spacing == "log":
        # geometric layers down to top * 1e-12, the first layer absorbs the rest
        edges = top * np.logspace(-12, 0, levels + 1)
        edges[0] = 0.0
        return 0.5 * (edges[:-1] + edges[1:]), np.diff(edges)
    raise ValueError(f"unknown threshold spacing {spacing!r}")


def superlevel_measure(xs: np.ndarray, vals: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Length of ``{F > t}`` for the piecewise-linear interpolant of ``vals``.

    Cells with a zero endpoint are treated as lying outside the support.
    """
    a, b = vals[:-1], vals[1:]
    h = np.diff(xs)
    live = (a > 0) & (b > 0)
    a, b, h = a[live], b[live], h[live]
    hi, lo = np.maximum(a, b), np.minimum(a, b)
    t = np.asarray(t, dtype=float)[:, None]
    span = hi - lo
    with np.errstate(divide="ignore", invalid="ignore"):
        part = np.where(span > 0, (hi - t) / span, 0.0)
    frac = np.where(t < lo, 1.0, np.where(t >= hi, 0.0, np.clip(part, 0.0, 1.0)))
    return (frac * h).sum(axis=1)


def _levelset_1d(F: SampledFn1D, levels: int, spacing: str) -> SampledFn1D:
    vals = F.vals
    if np.any(vals < 0):
        raise ValueError("layer-cake symmetrization needs nonnegative values")
    top = float(vals.max())
    if top == 0:
        return F
    ts, dt = _thresholds(top, levels, spacing)
    m = superlevel_measure(F.xs, vals, ts)
    # closed-interval convention: the point at the edge belongs to the set,
    # but an empty superlevel set stays empty
    inside = (np.abs(F.xs)[None, :] <= 0.5 * m[:, None] + 1e-12) & (m[:, None] > 0)
    return SampledFn1D(F.xs, (dt[:, None] * inside).sum(axis=0))


def _levelset_2d(F, u, levels: int, spacing: str):
    vals = np.asarray(F.values, dtype=float)
    if np.any(vals < 0):
        raise ValueError("layer-cake symmetrization needs nonnegative values")
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    perp = np.array([-u[1], u[0]])
    hx, hy = F.spacing
    xs, ys = (o + h * np.arange(n) for o, h, n in zip(F.origin, F.spacing, vals.shape))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    t = X * u[0] + Y * u[1]
    rho = X * perp[0] + Y * perp[1]
    top = float(vals.max())
    ts, dt = _thresholds(top, levels, spacing)
    out = np.zeros_like(vals)
    if abs(u[0]) == 1.0 or abs(u[1]) == 1.0:
        # grid lines along u: exact PL measure on each line
        axis = 0 if abs(u[0]) == 1.0 else 1
        v = np.moveaxis(vals, axis, 0)
        tt = np.moveaxis(t, axis, 0)
        o = np.moveaxis(out, axis, 0)
        line = (xs if axis == 0 else ys) * u[axis]
        order = np.argsort(line)
        for j in range(v.shape[1]):
            col = v[order, j]
            m = superlevel_measure(line[order], col, ts)
            inside = (np.abs(tt[:, j])[None, :] <= 0.5 * m[:, None] + 1e-12) & (m[:, None] > 0)
            o[:, j] = (dt[:, None] * inside).sum(axis=0)
        return type(F)(F.origin, F.spacing, out)
    # oblique lines: bin grid points into slabs of constant rho
    width = min(hx, hy)
    cell = hx * hy
    bins = np.round(rho / width).astype(int)
    flat_b, flat_v, flat_t = bins.ravel(), vals.ravel(), t.ravel()
    res = np.zeros(flat_v.size)
    for b in np.unique(flat_b):
        idx = np.flatnonzero(flat_b == b)
        sv = np.sort(flat_v[idx])
        # measure along u of {F > t} in this slab
        count = sv.size - np.searchsorted(sv, ts, side="right")
        m = count * cell / width
        inside = (np.abs(flat_t[idx])[None, :] <= 0.5 * m[:, None] + 1e-12) & (m[:, None] > 0)
        res[idx] = (dt[:, None] * inside).sum(axis=0)
    return type(F)(F.origin, F.spacing, res.reshape(vals.shape))


def levelset_symmetrize(F, u=(1.0,), levels: int = 512, spacing: str = "linear"):
    """Rebuild ``F >= 0`` from the Steiner symmetrals of its superlevel sets.

    Parameters
    ----------
    F : SampledFn1D or SampledFn2D
        Nonnegative samples.  Zero means "outside the support".
    u : sequence of float
        Direction of symmetrization (ignored in 1-D).  Lines are centered
        on the hyperplane through the origin orthogonal to ``u``.
    levels : int
        Number of thresholds in ``(0, max F]``.
    spacing : {"linear", "log"}
        Uniform thresholds, or geometric ones for heavy tails.

    Returns
    -------
    Same type as ``F``.
    """
    if levels < 2:
        raise ValueError("need at least two levels")
    if isinstance(F, SampledFn1D):
        return _levelset_1d(F, levels, spacing)
    return _levelset_2d(F, u, levels, spacing)


# ---------------------------------------------------------------------------
# brute-force conjugates and convolutions


def legendre_direct(F: SampledFn1D, ps, chunk: int = 256) -> SampledFn1D:
    """``max_x (p x - f(x))`` over the finite samples, for every ``p``."""
    ps = np.asarray(ps, dtype=float)
    fin = np.isfinite(F.vals)
    x, v = F.xs[fin], F.vals[fin]
    out = np.empty(ps.size)
    for s in range(0, ps.size, chunk):
        p = ps[s:s + chunk, None]
        out[s:s + chunk] = (p * x[None, :] - v[None, :]).max(axis=1)
    return SampledFn1D(ps, out)


def legendre_direct_2d(F, ps, qs, chunk: int = 64) -> SampledFn2D:
    """``max_{x,y} (p x + q y - f(x, y))`` by exhaustive search."""
    vals = np.asarray(F.values, dtype=float)
    xs, ys = (o + h * np.arange(n) for o, h, n in zip(F.origin, F.spacing, vals.shape))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    fin = np.isfinite(vals)
    x, y, v = X[fin], Y[fin], vals[fin]
    ps = np.asarray(ps, dtype=float)
    qs = np.asarray(qs, dtype=float)
    out = np.empty((ps.size, qs.size))
    for i in range(ps.size):
        px_minus_v = ps[i] * x - v
        for s in range(0, qs.size, chunk):
            q = qs[s:s + chunk, None]
            out[i, s:s + chunk] = (px_minus_v[None, :] + q * y[None, :]).max(axis=1)
    return SampledFn2D((ps[0], qs[0]), (ps[1] - ps[0], qs[1] - qs[0]), out)


def inf_convolve_direct(f: Callable, g: Callable, xs, ys) -> np.ndarray:
    """``min_y f(y) + g(x - y)`` with ``y`` restricted to the grid ``ys``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    fy = np.asarray(f(ys), dtype=float)
    out = np.empty(xs.size)
    for i, x in enumerate(xs):
        out[i] = np.min(fy + np.asarray(g(x - ys), dtype=float))
    return out


def inf_split_amk(f: Callable, xs, ts) -> np.ndarray:
    """``½ min_t [f(t) + f(t - 2x)]`` over the grid ``ts``: the AMK value at ``x``."""
    ts = np.asarray(ts, dtype=float)
    ft = np.asarray(f(ts), dtype=float)
    return np.array([0.5 * np.min(ft + np.asarray(f(-(2 * x - ts)), dtype=float))
                     for x in np.atleast_1d(xs)])


# ---------------------------------------------------------------------------
# quadrature


def quad_exp_integral(f: Callable, window: tuple[float, float], tol: float = 1e-10,
                      n_init: int = 64, max_depth: int = 48) -> float:
    """Adaptive Simpson integral of ``exp(-f)`` over ``window``.

    ``f`` must accept arrays.  Values of ``+inf`` contribute zero, so walled
    functions only need the window to cover their domain.

    Raises
    ------
    QuadratureError
        If some panel still fails the error test after ``max_depth`` halvings.
    """
    lo, hi = map(float, window)

    def g(x):
        with np.errstate(over="ignore"):
            return np.exp(-np.asarray(f(x), dtype=float))

    a = np.linspace(lo, hi, n_init + 1)
    b = a[1:]
    a = a[:-1]
    fa, fb, fm = g(a), g(b), g(0.5 * (a + b))
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    eps = tol * (b - a) / (hi - lo)
    total = []
    for _ in range(max_depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        err = left + right - whole
        ok = np.abs(err) <= 15 * eps
        total.append(left[ok] + right[ok] + err[ok] / 15)
        if ok.all():
            return math.fsum(np.concatenate(total))
        bad = ~ok
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        fa_new = np.concatenate([fa[bad], fm[bad]])
        fb_new = np.concatenate([fm[bad], fb[bad]])
        fm = np.concatenate([flm[bad], frm[bad]])
        whole = np.concatenate([left[bad], right[bad]])
        eps = np.concatenate([eps[bad], eps[bad]]) / 2
        fa, fb = fa_new, fb_new
    raise QuadratureError(f"no convergence on {a.size} panels after {max_depth} halvings")
