"""Exact calculus of piecewise-linear convex functions on the real line.

A :class:`PLConvex1D` is stored by its breakpoints, the values there and a
description of what happens outside the outermost breakpoints: either an
affine tail with a given slope or a wall (the function is ``+inf`` beyond
the breakpoint).  Every operation here is exact up to floating point
rounding; nothing is sampled except in :func:`supinf_oracle` and
:func:`fit_convex`, which exist to connect the exact world with analytic
inputs and brute-force checks.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

WALL = "wall"
Tail = Union[float, str]

#: relative tolerance for equality checks throughout the 1-D layer
REL_TOL = 1e-9
# slopes closer than this (relative) are treated as one slope when merging
_MERGE_TOL = 1e-12


class InvalidFunctionError(ValueError):
    """Raised when an operation receives a function that is not a valid
    coercive convex PL function."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid function: " + "; ".join(self.violations))


def _coerce_tail(tail) -> Tail:
    if isinstance(tail, str):
        if tail.lower() != WALL:
            raise ValueError(f"unknown tail {tail!r}")
        return WALL
    if isinstance(tail, dict) and "slope" in tail:
        tail = tail["slope"]
    slope = float(tail)
    if not math.isfinite(slope):
        raise ValueError("tail slope must be finite; use WALL for +inf")
    return slope


@dataclass(frozen=True, eq=False)
class PLConvex1D:
    """Piecewise-linear function on the line with affine or walled tails.

    Parameters
    ----------
    breakpoints : array_like
        Strictly increasing abscissae ``x_0 < ... < x_k``.
    values : array_like
        Finite values ``f(x_i)``.
    left, right : float or ``WALL``
        Slope of the affine continuation beyond ``x_0`` / ``x_k``, or
        ``WALL`` if the function is ``+inf`` there.

    Construction only checks the shape of the data.  Convexity and
    coercivity are reported by :func:`validate` and enforced by the
    operations that need them.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    left: Tail = WALL
    right: Tail = WALL

    def __post_init__(self):
        xs = np.array(self.breakpoints, dtype=float).ravel()
        vs = np.array(self.values, dtype=float).ravel()
        if xs.size == 0:
            raise ValueError("at least one breakpoint is required")
        if xs.shape != vs.shape:
            raise ValueError("breakpoints and values differ in length")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(vs))):
            raise ValueError("breakpoints and values must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        xs.flags.writeable = False
        vs.flags.writeable = False
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "values", vs)
        object.__setattr__(self, "left", _coerce_tail(self.left))
        object.__setattr__(self, "right", _coerce_tail(self.right))

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        return (f"PLConvex1D(n={self.breakpoints.size}, "
                f"domain={self.domain}, left={self.left!r}, right={self.right!r})")

    @property
    def chord_slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    @property
    def domain(self) -> tuple[float, float]:
        lo = self.breakpoints[0] if self.left == WALL else -math.inf
        hi = self.breakpoints[-1] if self.right == WALL else math.inf
        return (float(lo), float(hi))

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    def to_dict(self) -> dict:
        def tail(t):
            return WALL if t == WALL else {"slope": t}
        return {
            "breakpoints": [float(x) for x in self.breakpoints],
            "values": [float(v) for v in self.values],
            "left": tail(self.left),
            "right": tail(self.right),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PLConvex1D":
        try:
            return cls(data["breakpoints"], data["values"],
                       data.get("left", WALL), data.get("right", WALL))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed function spec: {exc}") from exc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "PLConvex1D":
        return cls.from_dict(json.loads(text))


def from_pieces(xs, vs, left=WALL, right=WALL) -> PLConvex1D:
    return PLConvex1D(xs, vs, left, right)


def abs_function(center: float = 0.0, scale: float = 1.0) -> PLConvex1D:
    """``scale * |x - center|``."""
    return PLConvex1D([center], [0.0], -scale, scale)


def max_affine(slopes: Sequence[float], intercepts: Sequence[float]) -> PLConvex1D:
    """Exact PL form of ``max_i (slopes[i] * x + intercepts[i])``.

    Lines that never attain the maximum are dropped.
    """
    order = np.lexsort((np.asarray(intercepts, float), np.asarray(slopes, float)))
    m = np.asarray(slopes, float)[order]
    b = np.asarray(intercepts, float)[order]
    # keep the highest intercept for repeated slopes
    keep = np.ones(m.size, bool)
    keep[:-1] = m[1:] != m[:-1]
    m, b = m[keep], b[keep]
    hull: list[int] = []
    for i in range(m.size):
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            # line k is useless if line i overtakes j before k does
            if (b[j] - b[i]) * (m[k] - m[j]) <= (b[j] - b[k]) * (m[i] - m[j]):
                hull.pop()
            else:
                break
        hull.append(i)
    m, b = m[hull], b[hull]
    if m.size == 1:
        raise ValueError("a single affine piece has no breakpoint")
    xs = (b[:-1] - b[1:]) / (m[1:] - m[:-1])
    vs = m[:-1] * xs + b[:-1]
    return PLConvex1D(xs, vs, float(m[0]), float(m[-1]))


def indicator(lo: float, hi: float) -> PLConvex1D:
    """0 on ``[lo, hi]``, ``+inf`` elsewhere."""
    if lo == hi:
        return PLConvex1D([lo], [0.0])
    return PLConvex1D([lo, hi], [0.0, 0.0])


# ---------------------------------------------------------------------------
# evaluation and diagnostics


def evaluate(f: PLConvex1D, x):
    """Value of ``f`` at ``x`` (scalar or array), ``+inf`` beyond a wall."""
    arr = np.asarray(x, dtype=float)
    xs, vs = f.breakpoints, f.values
    out = np.interp(arr, xs, vs)
    out = np.array(out, dtype=float, ndmin=1) if arr.ndim == 0 else out
    flat_x = np.atleast_1d(arr)
    left = flat_x < xs[0]
    right = flat_x > xs[-1]
    if np.any(left):
        out[left] = (math.inf if f.left == WALL
                     else vs[0] + f.left * (flat_x[left] - xs[0]))
    if np.any(right):
        out[right] = (math.inf if f.right == WALL
                      else vs[-1] + f.right * (flat_x[right] - xs[-1]))
    return float(out[0]) if arr.ndim == 0 else out


def validate(f: PLConvex1D, coercive: bool = True) -> list[str]:
    """List every violated invariant; empty iff ``f`` is valid.

    With ``coercive=False`` only convexity of the data is checked, which is
    what conjugation needs.
    """
    problems = []
    c = f.chord_slopes
    if c.size > 1:
        drop = c[:-1] - c[1:]
        scale = np.maximum(1.0, np.maximum(np.abs(c[:-1]), np.abs(c[1:])))
        for i in np.flatnonzero(drop > REL_TOL * scale):
            problems.append(
                f"convexity violated at i={i + 1}: chord slope {c[i]:.6g} "
                f"followed by {c[i + 1]:.6g}")
    first = c[0] if c.size else (f.right if f.right != WALL else math.inf)
    last = c[-1] if c.size else (f.left if f.left != WALL else -math.inf)
    if f.left != WALL:
        if f.left > first + REL_TOL * max(1.0, abs(first) if math.isfinite(first) else 1.0):
            problems.append(f"convexity violated at left tail: slope {f.left:.6g} "
                            f"exceeds first slope {first:.6g}")
        if coercive and not f.left < 0:
            problems.append(f"coercivity violated at left tail: slope {f.left:.6g} is not negative")
    if f.right != WALL:
        if f.right < last - REL_TOL * max(1.0, abs(last) if math.isfinite(last) else 1.0):
            problems.append(f"convexity violated at right tail: slope {f.right:.6g} "
                            f"below last slope {last:.6g}")
        if coercive and not f.right > 0:
            problems.append(f"coercivity violated at right tail: slope {f.right:.6g} is not positive")
    return problems


def _require_valid(f: PLConvex1D, coercive: bool = True) -> None:
    if not isinstance(f, PLConvex1D):
        raise TypeError(f"expected PLConvex1D, got {type(f).__name__}")
    problems = validate(f, coercive=coercive)
    if problems:
        raise InvalidFunctionError(problems)


@dataclass(frozen=True)
class ArgminInterval:
    mu: float
    nu: float

    @property
    def length(self) -> float:
        return self.nu - self.mu


def _argmin_indices(f: PLConvex1D) -> tuple[int, int]:
    vs = f.values
    hits = np.flatnonzero(vs == vs.min())
    return int(hits[0]), int(hits[-1])


def argmin_interval(f: PLConvex1D) -> ArgminInterval:
    """The closed interval on which a valid ``f`` attains its minimum."""
    _require_valid(f)
    lo, hi = _argmin_indices(f)
    return ArgminInterval(float(f.breakpoints[lo]), float(f.breakpoints[hi]))


def asymmetry(f: PLConvex1D) -> float:
    """``sup_x |f(x) - f(-x)|`` (``inf`` if the domains differ)."""
    pts = np.union1d(f.breakpoints, -f.breakpoints)
    a, b = evaluate(f, pts), evaluate(f, -pts)
    both_inf = np.isinf(a) & np.isinf(b)
    gap = np.where(both_inf, 0.0, np.abs(a - b))
    worst = float(np.nanmax(np.where(np.isnan(gap), math.inf, gap)))
    # tails must mirror as well
    lt, rt = f.left, f.right
    if (lt == WALL) != (rt == WALL):
        return math.inf
    if lt != WALL and abs(lt + rt) > REL_TOL * max(1.0, abs(rt)):
        return math.inf
    return worst


# ---------------------------------------------------------------------------
# widths and symmetrizations


@dataclass(frozen=True, eq=False)
class WidthProfile:
    """The piecewise-linear map ``s -> Vol_1([f <= s])``.

    ``levels`` starts at ``min f``; beyond the last level the width grows
    with slope ``tail_rate`` (zero once both branches have hit walls).
    """

    levels: np.ndarray
    widths: np.ndarray
    tail_rate: float

    @property
    def slopes(self) -> np.ndarray:
        """dw/ds on each segment, followed by the tail rate."""
        seg = np.diff(self.widths) / np.diff(self.levels)
        return np.append(seg, self.tail_rate)

    def width(self, s):
        s_arr = np.asarray(s, dtype=float)
        lv, wd = self.levels, self.widths
        out = np.interp(s_arr, lv, wd)
        out = np.where(s_arr < lv[0], 0.0, out)
        out = np.where(s_arr > lv[-1], wd[-1] + self.tail_rate * (s_arr - lv[-1]), out)
        return float(out) if out.ndim == 0 else out

    def inverse(self, tau):
        """``inf{s : w(s) >= tau}``; ``+inf`` beyond a bounded domain."""
        tau_arr = np.asarray(tau, dtype=float)
        lv, wd = self.levels, self.widths
        out = np.interp(tau_arr, wd, lv)
        beyond = tau_arr > wd[-1]
        if self.tail_rate > 0:
            ext = lv[-1] + (tau_arr - wd[-1]) / self.tail_rate
        else:
            ext = np.full_like(tau_arr, math.inf)
        out = np.where(beyond, ext, out)
        out = np.where(tau_arr <= wd[0], lv[0], out)
        return float(out) if out.ndim == 0 else out


def _branch_inverse(xs, vs, tail, s):
    """Abscissa on one monotone branch where the branch reaches level ``s``.

    ``vs`` increases along the branch; ``xs`` moves away from the minimum.
    """
    out = np.interp(s, vs, xs)
    if tail != WALL:
        past = s > vs[-1]
        out = np.where(past, xs[-1] + (s - vs[-1]) / tail, out)
    return out


def width_profile(f: PLConvex1D) -> WidthProfile:
    """Exact sublevel-set widths of a valid ``f``.

    The width is the distance between the two branch inverses; a branch
    that runs into a wall stays pinned at the wall.  Levels are the values
    at the breakpoints, which is where either inverse can bend.
    """
    _require_valid(f)
    xs, vs = f.breakpoints, f.values
    lo, hi = _argmin_indices(f)
    levels = np.unique(vs)
    right = _branch_inverse(xs[hi:], vs[hi:], f.right, levels)
    left = _branch_inverse(xs[:lo + 1][::-1], vs[:lo + 1][::-1], f.left, levels)
    rate = 0.0
    if f.right != WALL:
        rate += 1.0 / f.right
    if f.left != WALL:
        rate += -1.0 / f.left
    return WidthProfile(levels, right - left, rate)


def symmetrize_new(f: PLConvex1D) -> PLConvex1D:
    """Steiner symmetrization that preserves every sublevel width.

    The result is ``Sf(x) = inf{s : w(s) >= 2|x|}`` for the width profile
    ``w`` of ``f``: even, convex, with ``Sf(0) = min f``.  Its breakpoints
    sit at half the widths of the level breakpoints of ``f``.
    """
    wp = width_profile(f)
    # levels that differ only by rounding can share a width; the generalized
    # inverse takes the lowest of them
    first = np.ones(wp.widths.size, bool)
    first[1:] = np.diff(wp.widths) > 0
    half = 0.5 * wp.widths[first]
    lv = wp.levels[first]
    if half[0] == 0.0:
        xs = np.concatenate([-half[:0:-1], half])
        vs = np.concatenate([lv[:0:-1], lv])
    else:
        xs = np.concatenate([-half[::-1], half])
        vs = np.concatenate([lv[::-1], lv])
    if wp.tail_rate > 0:
        m = 2.0 / wp.tail_rate
        return PLConvex1D(xs, vs, -m, m)
    return PLConvex1D(xs, vs, WALL, WALL)


def _pieces_from_argmin(f: PLConvex1D):
    xs, vs = f.breakpoints, f.values
    lo, _ = _argmin_indices(f)
    lengths = np.diff(xs)
    slopes = np.diff(vs) / lengths
    right = (lengths[lo:], slopes[lo:])
    left = (lengths[:lo][::-1], slopes[:lo][::-1])
    return float(xs[lo]), float(vs[lo]), left, right


def _merge_equal(lengths, slopes):
    if slopes.size == 0:
        return lengths, slopes
    scale = np.maximum(1.0, np.abs(slopes))
    new_group = np.ones(slopes.size, bool)
    new_group[1:] = np.abs(np.diff(slopes)) > _MERGE_TOL * scale[1:]
    gid = np.cumsum(new_group) - 1
    merged_len = np.bincount(gid, weights=lengths)
    first = np.flatnonzero(new_group)
    return merged_len, slopes[first]


def inf_convolve(f: PLConvex1D, g: PLConvex1D) -> PLConvex1D:
    """Exact infimal convolution ``(f □ g)(x) = inf_y f(y) + g(x - y)``.

    The epigraph of the result is the Minkowski sum of the epigraphs, so
    the result starts at the sum of the left argmin points and then walks
    through the pieces of both functions in order of slope.  Pieces steeper
    than the other function's tail never become active and are dropped.
    """
    _require_valid(f)
    _require_valid(g)
    xf, af, lf, rf = _pieces_from_argmin(f)
    xg, ag, lg, rg = _pieces_from_argmin(g)
    start_x, start_v = xf + xg, af + ag

    def tail_val(t, sign):
        return sign * math.inf if t == WALL else t

    t_right = min(tail_val(f.right, 1), tail_val(g.right, 1))
    t_left = max(tail_val(f.left, -1), tail_val(g.left, -1))

    r_len = np.concatenate([rf[0], rg[0]])
    r_slope = np.concatenate([rf[1], rg[1]])
    keep = r_slope < t_right
    r_len, r_slope = r_len[keep], r_slope[keep]
    order = np.argsort(r_slope, kind="stable")
    r_len, r_slope = _merge_equal(r_len[order], r_slope[order])

    l_len = np.concatenate([lf[0], lg[0]])
    l_slope = np.concatenate([lf[1], lg[1]])
    keep = l_slope > t_left
    l_len, l_slope = l_len[keep], l_slope[keep]
    order = np.argsort(-l_slope, kind="stable")
    l_len, l_slope = _merge_equal(l_len[order], l_slope[order])

    rx = start_x + np.cumsum(r_len)
    rv = start_v + np.cumsum(r_len * r_slope)
    lx = start_x - np.cumsum(l_len)
    lv = start_v - np.cumsum(l_len * l_slope)
    xs = np.concatenate([lx[::-1], [start_x], rx])
    vs = np.concatenate([lv[::-1], [start_v], rv])
    left = WALL if math.isinf(t_left) else float(t_left)
    right = WALL if math.isinf(t_right) else float(t_right)
    return PLConvex1D(xs, vs, left, right)


def symmetrize_amk(f: PLConvex1D) -> PLConvex1D:
    """The half-and-half symmetrization ``½ (f □ f̌)(2x)``, ``f̌(y) = f(-y)``.

    Always even and convex but, unlike :func:`symmetrize_new`, it does not
    preserve ``∫ exp(-f)`` in general.
    """
    h = inf_convolve(f, reflect(f))
    return PLConvex1D(h.breakpoints / 2.0, h.values / 2.0, h.left, h.right)


def supinf_oracle(f: PLConvex1D, x: float, lambda_grid: int = 2001,
                  t_grid: int = 2001, t_span: float | None = None) -> float:
    """Brute-force evaluation of the sup-inf definition at one point.

    Evaluates ``max_λ min_t1 [λ f(2 t1) + (1 - λ) f(2 t1 - 2x)]`` with λ on a
    uniform grid of ``lambda_grid`` points in ``[0, 1]`` and ``t1`` on a
    uniform grid of ``t_grid`` points.  ``t_span`` is the length of the
    ``t1`` window; by default it covers the hull of the two shifted argmin
    sets inflated by 10%.  The grid always contains ``t1 = mu / 2`` so that
    ``x = 0`` returns ``min f`` exactly.  Uses nothing but point evaluation.

    The step of the ``t1`` grid is ``t_span / (t_grid - 1)``.
    """
    if lambda_grid < 2 or t_grid < 2:
        raise ValueError("grids need at least two points")
    xs, vs = f.breakpoints, f.values
    hits = np.flatnonzero(vs == vs.min())
    mu, nu = float(xs[hits[0]]), float(xs[hits[-1]])
    lo_y, hi_y = min(mu, mu + 2 * x), max(nu, nu + 2 * x)
    if t_span is None:
        t_span = max(0.55 * (hi_y - lo_y), 0.5)
    step = t_span / (t_grid - 1)
    start = 0.25 * (lo_y + hi_y) - 0.5 * t_span
    j0 = math.ceil((start - 0.5 * mu) / step)
    t1 = 0.5 * mu + step * np.arange(j0, j0 + t_grid)
    y = 2.0 * t1
    a = evaluate(f, y)
    b = evaluate(f, y - 2.0 * x)
    both = np.isfinite(a) & np.isfinite(b)
    best = max(float(a.min()), float(b.min()))  # λ = 1 and λ = 0
    if not both.any():
        return best
    a, b = a[both], b[both]
    lam = np.linspace(0.0, 1.0, lambda_grid)[1:-1]
    inner = (b[None, :] + lam[:, None] * (a - b)[None, :]).min(axis=1)
    return max(best, float(inner.max()))


# ---------------------------------------------------------------------------
# conjugation and integrals


def legendre(f: PLConvex1D) -> PLConvex1D:
    """Exact conjugate ``Lf(p) = sup_x (p x - f(x))``.

    Breakpoints of the conjugate are the slopes of ``f`` and its slopes are
    the breakpoints of ``f``; affine tails become walls and vice versa.
    Only convexity is required, so conjugates of conjugates work even when
    the intermediate function is not coercive.
    """
    _require_valid(f, coercive=False)
    xs, vs = f.breakpoints, f.values
    c = f.chord_slopes
    p_list = [c]
    x_list = [xs[:-1]]
    if f.left != WALL:
        p_list.insert(0, np.array([f.left]))
        x_list.insert(0, xs[:1])
    if f.right != WALL:
        p_list.append(np.array([f.right]))
        x_list.append(xs[-1:])
    p = np.concatenate(p_list)
    at = np.concatenate(x_list)
    if p.size == 0:
        return PLConvex1D([0.0], [-vs[0]], float(xs[0]), float(xs[0]))
    p = np.maximum.accumulate(p)
    keep = np.ones(p.size, bool)
    keep[1:] = np.diff(p) > _MERGE_TOL * np.maximum(1.0, np.abs(p[1:]))
    p, at = p[keep], at[keep]
    vals = p * at - evaluate(f, at) + 0.0
    left = float(xs[0]) if f.left == WALL else WALL
    right = float(xs[-1]) if f.right == WALL else WALL
    return PLConvex1D(p, vals, left, right)


def _segment_exp_integral(lengths, dv, v_lo):
    z = np.abs(dv)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(z > 1e-12, -np.expm1(-z) / z, 1.0 - 0.5 * z)
    return np.exp(-v_lo) * lengths * phi


def sampled_exp_integral(xs, vs) -> float:
    """``∫ exp(-g)`` for the linear interpolant ``g`` of samples, no tails.

    Cells touching an infinite value contribute nothing.  Convexity is not
    required, which makes this the integrator for raw grid lines.
    """
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    a, b = vs[:-1], vs[1:]
    live = np.isfinite(a) & np.isfinite(b)
    a, b = a[live], b[live]
    parts = _segment_exp_integral(np.diff(xs)[live], b - a, np.minimum(a, b))
    return math.fsum(parts)


def exp_integral(f: PLConvex1D) -> float:
    """Exact ``∫ exp(-f(x)) dx`` summed piece by piece."""
    _require_valid(f)
    xs, vs = f.breakpoints, f.values
    parts = list(_segment_exp_integral(np.diff(xs), np.diff(vs),
                                       np.minimum(vs[:-1], vs[1:])))
    if f.left != WALL:
        parts.append(math.exp(-vs[0]) / -f.left)
    if f.right != WALL:
        parts.append(math.exp(-vs[-1]) / f.right)
    return math.fsum(parts)


# ---------------------------------------------------------------------------
# reparameterizations and arithmetic


def translate(f: PLConvex1D, dx: float, dy: float = 0.0) -> PLConvex1D:
    """``x -> f(x - dx) + dy``."""
    return PLConvex1D(f.breakpoints + dx, f.values + dy, f.left, f.right)


def scale_x(f: PLConvex1D, c: float) -> PLConvex1D:
    """``x -> f(x / c)`` for ``c > 0``."""
    if not c > 0:
        raise ValueError("scale factor must be positive")
    left = f.left if f.left == WALL else f.left / c
    right = f.right if f.right == WALL else f.right / c
    return PLConvex1D(f.breakpoints * c, f.values, left, right)


def reflect(f: PLConvex1D) -> PLConvex1D:
    """``x -> f(-x)``."""
    left = f.right if f.right == WALL else -f.right
    right = f.left if f.left == WALL else -f.left
    return PLConvex1D(-f.breakpoints[::-1], f.values[::-1], left, right)


def add(f: PLConvex1D, g: PLConvex1D) -> PLConvex1D:
    """Pointwise sum; the domain is the intersection of the domains."""
    lo = max(f.domain[0], g.domain[0])
    hi = min(f.domain[1], g.domain[1])
    if lo > hi:
        raise ValueError("domains do not intersect")
    pts = np.union1d(f.breakpoints, g.breakpoints)
    pts = pts[(pts >= lo) & (pts <= hi)]
    if math.isfinite(lo):
        pts = np.union1d(pts, [lo])
    if math.isfinite(hi):
        pts = np.union1d(pts, [hi])
    vals = evaluate(f, pts) + evaluate(g, pts)

    def tail(a, b, sign):
        if a == WALL or b == WALL:
            return WALL
        return a + b
    return PLConvex1D(pts, vals, tail(f.left, g.left, -1), tail(f.right, g.right, 1))


def simplify(f: PLConvex1D, tol: float = _MERGE_TOL) -> PLConvex1D:
    """Drop breakpoints where the slope does not change (within ``tol``)."""
    xs, vs = f.breakpoints, f.values
    if xs.size == 1:
        return f
    c = f.chord_slopes
    before = np.concatenate([[f.left if f.left != WALL else math.nan], c])
    after = np.concatenate([c, [f.right if f.right != WALL else math.nan]])
    scale = np.maximum(1.0, np.maximum(np.abs(before), np.abs(after)))
    redundant = np.abs(after - before) <= tol * scale
    redundant &= ~(np.isnan(before) | np.isnan(after))
    if redundant.all():
        redundant[0] = False
    return PLConvex1D(xs[~redundant], vs[~redundant], f.left, f.right)


def fit_convex(func: Callable[[np.ndarray], np.ndarray], window: tuple[float, float],
               tol: float = 1e-6, anchors: Iterable[float] = (), n_init: int = 64,
               left: Tail | None = None, right: Tail | None = None,
               max_points: int = 2_000_000) -> PLConvex1D:
    """PL interpolant of a convex function, refined until the sup gap is below ``tol``.

    Intervals whose interpolation gap at their quarter points exceeds
    ``tol`` are bisected.  ``anchors`` are always kept as breakpoints.
    Tails default to the outermost chord slopes; pass ``WALL`` to cut the
    function off at the window instead.
    """
    lo, hi = map(float, window)
    extra = np.array([a for a in anchors if lo <= a <= hi], dtype=float)
    xs = np.union1d(np.linspace(lo, hi, n_init + 1), extra)
    qs = np.array([0.25, 0.5, 0.75])
    while True:
        ys = np.asarray(func(xs), dtype=float)
        h = np.diff(xs)
        probe = xs[:-1, None] + h[:, None] * qs[None, :]
        chord = ys[:-1, None] + (ys[1:] - ys[:-1])[:, None] * qs[None, :]
        gap = np.abs(chord - np.asarray(func(probe), dtype=float)).max(axis=1)
        bad = gap > tol
        if not bad.any():
            break
        xs = np.union1d(xs, xs[:-1][bad] + 0.5 * h[bad])
        if xs.size > max_points:
            raise RuntimeError("PL fit did not reach the requested tolerance")
    c = np.diff(ys) / np.diff(xs)
    lt = float(c[0]) if left is None else left
    rt = float(c[-1]) if right is None else right
    return PLConvex1D(xs, ys, lt, rt)
