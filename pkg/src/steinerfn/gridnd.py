"""Grid-backed convex functions in one and two dimensions.

Each grid line along a direction ``u`` is turned into an exact
piecewise-linear section, symmetrized by the 1-D engine and put back on
the grid.  Interpolation inside the grid uses the Keys cubic kernel, which
reproduces quadratics; plain linear interpolation of convex data is biased
upward by about ``h**2 f''/8`` and that bias accumulates over repeated
symmetrizations.  Points whose stencil touches ``+inf`` fall back to linear
interpolation and then to ``+inf``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from . import convex1d as c1
from .convex1d import PLConvex1D

INF = math.inf


class NonConvexSectionError(ValueError):
    """A grid line is further from convex than the repair tolerance allows."""

    def __init__(self, offset, defect: float, tol: float):
        self.offset = offset
        self.defect = defect
        self.tol = tol
        super().__init__(f"section at offset {offset} deviates from its convex "
                         f"envelope by {defect:.3g} (tolerance {tol:.3g})")


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class GridFn:
    """Samples of an extended-real function on a regular grid.

    ``values[i, j]`` is the value at ``origin + (i * hx, j * hy)``.  ``+inf``
    marks points outside the effective domain.

    ``cap`` optionally declares that only the sublevel set ``{F <= cap}`` is
    meaningful.  A function sampled on a box is really ``F`` plus the
    indicator of the box; when ``cap`` is below every value on the box
    boundary, symmetrization works on ``{F <= cap}``, which lies inside the
    box, and the box stops mattering.
    """

    origin: tuple
    spacing: tuple
    values: np.ndarray
    cap: float | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        spacing = tuple(float(h) for h in np.atleast_1d(self.spacing))
        if vals.ndim not in (1, 2):
            raise ValueError("only 1-D and 2-D grids are supported")
        if len(origin) != vals.ndim or len(spacing) != vals.ndim:
            raise ValueError("origin and spacing must match the grid dimension")
        if min(spacing) <= 0:
            raise ValueError("spacing must be positive")
        if np.isnan(vals).any() or np.isneginf(vals).any():
            raise ValueError("values must be finite or +inf")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def axes(self) -> tuple:
        return tuple(o + h * np.arange(n)
                     for o, h, n in zip(self.origin, self.spacing, self.shape))

    @property
    def bounds(self) -> tuple:
        return tuple((ax[0], ax[-1]) for ax in self.axes)

    def mesh(self) -> tuple:
        return np.meshgrid(*self.axes, indexing="ij")

    def with_values(self, values) -> "GridFn":
        return GridFn(self.origin, self.spacing, values, self.cap)

    @classmethod
    def from_function(cls, func: Callable, bounds: Sequence, shape,
                      cap: float | None = None) -> "GridFn":
        """Sample ``func`` (called with one array per axis) on a closed box."""
        shape = tuple(np.atleast_1d(shape))
        axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(bounds, shape)]
        pts = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(func(*pts), dtype=float)
        spacing = [ax[1] - ax[0] for ax in axes]
        return cls(tuple(ax[0] for ax in axes), tuple(spacing), vals, cap)

    # serialization --------------------------------------------------------

    def save(self, path) -> Path:
        """Write ``path`` (raw little-endian float64) plus ``path.json``."""
        path = Path(path)
        self.values.astype("<f8").tofile(path)
        meta = {"origin": list(self.origin), "spacing": list(self.spacing),
                "shape": list(self.shape), "dtype": "<f8", "sentinel": "inf",
                "cap": self.cap}
        side = path.with_name(path.name + ".json")
        side.write_text(json.dumps(meta, indent=2, sort_keys=True))
        return side

    @classmethod
    def load(cls, path) -> "GridFn":
        path = Path(path)
        meta = json.loads(path.with_name(path.name + ".json").read_text())
        vals = np.fromfile(path, dtype=meta.get("dtype", "<f8")).reshape(meta["shape"])
        if meta.get("sentinel", "inf") != "inf":
            vals = np.where(vals == float(meta["sentinel"]), INF, vals)
        return cls(tuple(meta["origin"]), tuple(meta["spacing"]), vals, meta.get("cap"))

    def slice_csv(self, path, axis: int = 0, index: int | None = None) -> None:
        """Write the line along ``axis`` through ``index`` of the other axis."""
        coords = self.axes[axis]
        if self.ndim == 1:
            vals = self.values
        else:
            other = 1 - axis
            if index is None:
                index = int(np.argmin(np.abs(self.axes[other])))
            vals = np.take(self.values, index, axis=other)
        np.savetxt(path, np.column_stack([coords, vals]), delimiter=",",
                   header="t,value", comments="", fmt="%.17g")


@dataclass(frozen=True)
class Direction:
    """A unit vector."""

    components: tuple

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if abs(math.hypot(*comps) - 1.0) > 1e-12:
            raise ValueError(f"direction {comps} is not a unit vector")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, *comps) -> "Direction":
        v = np.asarray(comps if len(comps) > 1 else np.atleast_1d(comps[0]), float)
        n = np.linalg.norm(v)
        if n == 0 or not np.isfinite(n):
            raise ValueError("direction must be a nonzero finite vector")
        return cls(tuple(v / n))

    @classmethod
    def from_angle(cls, theta: float) -> "Direction":
        return cls((math.cos(theta), math.sin(theta)))

    @classmethod
    def axis(cls, k: int, n: int = 2) -> "Direction":
        comps = [0.0] * n
        comps[k] = 1.0
        return cls(tuple(comps))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.components)

    @property
    def perp(self) -> np.ndarray:
        ux, uy = self.components
        return np.array([-uy, ux])

    @property
    def axis_index(self) -> int | None:
        """Index of the coordinate axis parallel to this direction, if any."""
        for k, c in enumerate(self.components):
            if abs(c) == 1.0:
                return k
        return None


@dataclass(frozen=True, eq=False)
class LineSection:
    """Values of a function on ``offset + t * u`` for a uniform ``t`` grid."""

    offset: np.ndarray
    t: np.ndarray
    values: np.ndarray
    inside: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.t, float)
        if t.size > 2 and np.ptp(np.diff(t)) > 1e-9 * abs(t[1] - t[0]):
            raise ValueError("section parameter grid must be uniform")
        if self.inside is None:
            object.__setattr__(self, "inside", np.ones(t.size, bool))


# ---------------------------------------------------------------------------
# interpolation


def _linear_weights(d: np.ndarray) -> np.ndarray:
    """Linear weights for stencil offsets -1, 0, 1, 2 at fractional position ``d``."""
    z = np.zeros_like(d)
    return np.stack([z, 1.0 - d, d, z])


def _combine(vals: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weighted sum over axis 0 ignoring zero weights; flag infinite support."""
    used = w != 0
    bad = (used & ~np.isfinite(vals)).any(axis=0)
    total = np.where(used, w * np.where(np.isfinite(vals), vals, 0.0), 0.0).sum(axis=0)
    return total, bad


def _bracketed_cubic(st: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Keys cubic on a finite 4-point stencil, clamped into the convex bracket.

    Any convex function through the samples lies below the chord of the
    middle cell and above the extensions of the two neighbouring chords.
    Clamping into that bracket leaves smooth data alone and keeps kinks
    sharp, where the bare cubic would undershoot.
    """
    v0, v1, v2, v3 = st
    a, b, c = v1 - v0, v2 - v1, v3 - v2
    # Keys cubic relative to v1, in Horner form on the three differences
    rise = d * (0.5 * (a + b) + d * (0.5 * (3 * b - 2 * a - c) + d * 0.5 * (a - 2 * b + c)))
    lower = np.maximum(d * a, b - (1 - d) * c)
    return v1 + np.minimum(np.maximum(rise, lower), d * b)


def _stencil_interp(st: np.ndarray, d: np.ndarray, order: str) -> np.ndarray:
    """Interpolate 4-point stencils: cubic if finite, else linear, else ``+inf``."""
    full = np.isfinite(st).all(axis=0) if order == "cubic" else np.zeros(d.shape, bool)
    out = np.empty(d.shape)
    if full.any():
        out[full] = _bracketed_cubic(st[:, full], d[full])
    rest = ~full
    if rest.any():
        lin, bad = _combine(st[:, rest], _linear_weights(d[rest]))
        out[rest] = np.where(bad, INF, lin)
    return out


def interp1d(values: np.ndarray, s: np.ndarray, order: str = "cubic") -> np.ndarray:
    """Interpolate samples ``values[i]`` at fractional indices ``s``.

    Cubic where the whole stencil is finite, else linear, else ``+inf``.
    Cubic values are kept between the chord of the cell and the extensions
    of its neighbours, which is exact at kinks of convex data.  Positions
    outside ``[0, n - 1]`` give ``+inf``.  Extra axes of ``values`` after
    the first are interpolated independently and appended to the result.
    """
    v = np.asarray(values, float)
    s = np.asarray(s, float)
    n, extra = v.shape[0], v.shape[1:]
    out = np.full(s.shape + extra, INF)
    ok = (s >= 0) & (s <= n - 1)
    ss = s[ok]
    i = np.minimum(np.floor(ss).astype(int), n - 2) if n > 1 else np.zeros(ss.size, int)
    d = ss - i
    idx = i[None, :] + np.arange(-1, 3)[:, None]
    padded = np.concatenate([np.full((1,) + extra, INF), v, np.full((2,) + extra, INF)])
    d = np.broadcast_to(d.reshape(d.shape + (1,) * len(extra)), d.shape + extra)
    out[ok] = _stencil_interp(padded[idx + 1], d, order)
    return out


def interp2d(F: GridFn, px: np.ndarray, py: np.ndarray, order: str = "cubic") -> np.ndarray:
    """Tensor-product interpolation of a 2-D grid at points ``(px, py)``.

    Separable passes of :func:`interp1d`'s kernel, first along x on the four
    stencil rows, then along y.  Falls back to bilinear when the 4x4
    stencil is not finite.
    """
    v = F.values
    nx, ny = v.shape
    sx = (np.asarray(px, float) - F.origin[0]) / F.spacing[0]
    sy = (np.asarray(py, float) - F.origin[1]) / F.spacing[1]
    shape = sx.shape
    sx, sy = sx.ravel(), sy.ravel()
    eps = 1e-9
    ok = (sx >= -eps) & (sx <= nx - 1 + eps) & (sy >= -eps) & (sy <= ny - 1 + eps)
    out = np.full(sx.shape, INF)
    sx, sy = np.clip(sx[ok], 0, nx - 1), np.clip(sy[ok], 0, ny - 1)
    i = np.minimum(np.floor(sx).astype(int), nx - 2)
    j = np.minimum(np.floor(sy).astype(int), ny - 2)
    dx, dy = sx - i, sy - j
    padded = np.pad(v, ((1, 2), (1, 2)), constant_values=INF)
    offs = np.arange(4)
    step = padded.shape[1]
    flat = (offs[:, None] * step + offs[None, :]).reshape(16, 1) + (i * step + j)[None, :]
    stencil = padded.ravel().take(flat).reshape(4, 4, -1)  # (x-offset, y-offset, m)
    full = np.isfinite(stencil).all(axis=(0, 1))
    if order != "cubic":
        full[:] = False
    res = np.empty(dx.shape)
    if full.any():
        st, fx = stencil[:, :, full], dx[full]
        rows = np.stack([_bracketed_cubic(st[:, k], fx) for k in range(4)])
        res[full] = _bracketed_cubic(rows, dy[full])
    rest = ~full
    if rest.any():
        # bilinear fallback; a zero weight never pulls in +inf
        w = _linear_weights(dx[rest])[:, None, :] * _linear_weights(dy[rest])[None, :, :]
        lin, bad = _combine(stencil[:, :, rest].reshape(16, -1), w.reshape(16, -1))
        res[rest] = np.where(bad, INF, lin)
    out[ok] = res
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# sections


def lower_envelope(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Indices of the vertices of the lower convex envelope of ``(t, v)``.

    Reflex vertices lie strictly above the chord of their neighbours and so
    never belong to the envelope; removing all of them at once and repeating
    converges to the envelope.
    """
    keep = np.arange(t.size)
    while keep.size > 2:
        tt, vv = t[keep], v[keep]
        s = np.diff(vv) / np.diff(tt)
        reflex = s[1:] < s[:-1]
        if not reflex.any():
            break
        mask = np.ones(keep.size, bool)
        mask[1:-1] = ~reflex
        keep = keep[mask]
    return keep


def extract_line(F: GridFn, u: Direction, x_prime, t_grid, order: str = "cubic") -> LineSection:
    """Sample ``F`` along ``x_prime + t u``.

    ``x_prime`` must be orthogonal to ``u``.  Points outside the grid box or
    whose interpolation stencil meets ``+inf`` are ``+inf``.
    """
    uv = u.vector
    xp = np.asarray(x_prime, float)
    if abs(float(xp @ uv)) > 1e-9 * max(1.0, float(np.linalg.norm(xp))):
        raise ValueError("x_prime must lie in the hyperplane orthogonal to u")
    t = np.asarray(t_grid, float)
    if F.ndim == 1:
        pts = xp[0] + t * uv[0]
        s = (pts - F.origin[0]) / F.spacing[0]
        vals = interp1d(F.values, s, order)
        inside = (s >= -1e-9) & (s <= F.shape[0] - 1 + 1e-9)
    else:
        px, py = xp[0] + t * uv[0], xp[1] + t * uv[1]
        vals = interp2d(F, px, py, order)
        (x0, x1), (y0, y1) = F.bounds
        tol = 1e-9 * max(F.spacing)
        inside = (px >= x0 - tol) & (px <= x1 + tol) & (py >= y0 - tol) & (py <= y1 + tol)
    return LineSection(xp, t, vals, inside)


def fit_section(sec: LineSection, repair_tol: float = 1e-6, cap: float | None = None,
                reach: float = 0.0) -> PLConvex1D | None:
    """Exact PL function through a sampled section.

    The run of finite samples containing the minimum is kept and walled at
    both ends.  Its lower convex envelope becomes the function; the run must
    lie within ``repair_tol`` of that envelope.

    With a ``cap`` only samples up to that level are kept and the walls are
    moved to where the section crosses the cap: interpolated against the
    next sample when it is finite, or extrapolated along the outer chord by
    at most ``reach`` when the next sample is ``+inf``.  Returns ``None``
    when nothing is left.
    """
    v, t = sec.values, sec.t
    ok = np.isfinite(v)
    if cap is not None:
        ok &= v <= cap
    if not ok.any():
        return None
    k = int(np.argmin(np.where(ok, v, INF)))
    lo = k
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = k
    while hi < v.size - 1 and ok[hi + 1]:
        hi += 1
    tt, vv = t[lo:hi + 1], v[lo:hi + 1]
    if cap is not None:
        left = _cap_crossing(t, v, lo, -1, cap, reach)
        right = _cap_crossing(t, v, hi, 1, cap, reach)
        if left is not None:
            tt, vv = np.r_[left[0], tt], np.r_[left[1], vv]
        if right is not None:
            tt, vv = np.r_[tt, right[0]], np.r_[vv, right[1]]
    if tt.size == 1:
        return PLConvex1D(tt, vv)
    keep = lower_envelope(tt, vv)
    env = np.interp(tt, tt[keep], vv[keep])
    defect = float(np.max(vv - env))
    if defect > repair_tol:
        raise NonConvexSectionError(tuple(np.round(sec.offset, 12)), defect, repair_tol)
    return PLConvex1D(tt[keep], vv[keep])


def _cap_crossing(t, v, end, step, cap, reach):
    """Point beyond sample ``end`` (direction ``step``) where the section hits ``cap``."""
    nxt = end + step
    if nxt < 0 or nxt >= v.size or v[end] >= cap:
        return None
    if math.isfinite(v[nxt]):
        frac = (cap - v[end]) / (v[nxt] - v[end])
        if not 0 < frac <= 1:
            return None
        return (t[end] + frac * (t[nxt] - t[end]), cap)
    prev = end - step
    if reach <= 0 or prev < 0 or prev >= v.size or not math.isfinite(v[prev]):
        return None
    rise = (v[end] - v[prev]) / abs(t[end] - t[prev])
    if rise <= 0:
        return None
    dist = min((cap - v[end]) / rise, reach)
    return (t[end] + step * dist, v[end] + rise * dist)


def effective_values(F: GridFn) -> np.ndarray:
    """Values with everything above ``F.cap`` replaced by ``+inf``."""
    if F.cap is None:
        return F.values
    return np.where(F.values <= F.cap, F.values, INF)


def convexity_defect(F: GridFn) -> float:
    """Largest negative second difference along grid lines (0 if convex)."""
    worst = 0.0
    for ax in range(F.ndim):
        with np.errstate(invalid="ignore"):
            d2 = np.diff(F.values, 2, axis=ax)
            neg = -d2[np.isfinite(d2)]
        if neg.size:
            worst = max(worst, float(neg.max()))
    return worst


def curvature_scale(F: GridFn) -> float:
    """Largest absolute second difference along grid lines."""
    worst = 0.0
    for ax in range(F.ndim):
        with np.errstate(invalid="ignore"):
            d2 = np.diff(F.values, 2, axis=ax)
            fin = np.abs(d2[np.isfinite(d2)])
        if fin.size:
            worst = max(worst, float(fin.max()))
    return worst


# ---------------------------------------------------------------------------
# symmetrization


def _as_direction(u, ndim: int) -> Direction:
    if isinstance(u, Direction):
        d = u
    else:
        d = Direction.of(*np.atleast_1d(np.asarray(u, float)))
    if len(d.components) != ndim:
        raise ValueError(f"direction has {len(d.components)} components, grid has {ndim}")
    return d


def steiner_symmetrize(F: GridFn, u, refine: int = 8, order: str = "cubic",
                       repair_tol: float | None = None) -> GridFn:
    """Steiner symmetrization of a grid function about the hyperplane ``u⊥``.

    Parameters
    ----------
    F : GridFn
        Convex samples (``+inf`` outside the domain).
    u : Direction or sequence of float
        Direction of symmetrization.
    refine : int
        Each section is sampled ``refine`` times finer than the grid.
    order : {"cubic", "linear"}
        Interpolation kernel used both for sampling sections and, for
        oblique directions, for blending neighbouring lines.
    repair_tol : float, optional
        Allowed distance between a sampled section and its convex envelope.
        Defaults to ``1e-6`` plus the largest second difference of ``F``,
        which covers interpolation overshoot on convex data.

    Returns
    -------
    GridFn
        Values of the symmetral at the same grid nodes.

    Raises
    ------
    NonConvexSectionError
        If some section is further from convex than ``repair_tol``.
    """
    d = _as_direction(u, F.ndim)
    if repair_tol is None:
        repair_tol = 1e-6 + curvature_scale(F)
    fit = {"repair_tol": repair_tol, "cap": F.cap, "reach": math.hypot(*F.spacing)}
    if F.ndim == 1:
        return _symmetrize_rows(F, 0, d, refine, order, fit)
    ax = d.axis_index
    if ax is not None:
        return _symmetrize_rows(F, ax, d, refine, order, fit)
    return _symmetrize_oblique(F, d, refine, order, fit)


def _symmetrize_rows(F, axis, d, refine, order, fit):
    vals = np.moveaxis(np.array(F.values), axis, 0)
    coord = F.axes[axis]
    n = coord.size
    s = np.arange((n - 1) * refine + 1) / refine
    sign = d.components[axis]
    t_fine = sign * (coord[0] + s * F.spacing[axis])
    t_nodes = sign * coord
    flat = vals.reshape(n, -1)
    out = np.empty_like(flat)
    for j in range(flat.shape[1]):
        fine = interp1d(flat[:, j], s, order)
        sec = LineSection(np.array([j]), t_fine if sign > 0 else t_fine[::-1],
                          fine if sign > 0 else fine[::-1])
        f = fit_section(sec, **fit)
        out[:, j] = INF if f is None else c1.evaluate(c1.symmetrize_new(f), t_nodes)
    res = np.moveaxis(out.reshape(vals.shape), 0, axis)
    return F.with_values(res)


def _symmetrize_oblique(F, d, refine, order, fit):
    uv, perp = d.vector, d.perp
    h = min(F.spacing)
    X, Y = F.mesh()
    corners = np.array([[x, y] for x in F.bounds[0] for y in F.bounds[1]])
    rho_c, t_c = corners @ perp, corners @ uv
    kmax = int(math.ceil(np.abs(rho_c).max() / h)) + 2
    ks = np.arange(-kmax, kmax + 1)
    tmax = float(np.abs(t_c).max()) + 2 * h
    nt = int(math.ceil(tmax / h * refine))
    t_fine = np.arange(-nt, nt + 1) * (h / refine)

    # a sample only matters if its stencil holds a node at or below the cap;
    # such nodes lie within 3h of it, so each line keeps the t-range of the
    # live nodes at most three lines away, widened by 3h
    live = np.isfinite(effective_values(F)).ravel()
    rho_live = (X * perp[0] + Y * perp[1]).ravel()[live] / h
    t_live = (X * uv[0] + Y * uv[1]).ravel()[live]
    t_lo, t_hi = np.full(ks.size, INF), np.full(ks.size, -INF)
    near = np.floor(rho_live).astype(int) + kmax
    for o in range(-2, 4):
        row = np.clip(near + o, 0, ks.size - 1)
        np.minimum.at(t_lo, row, t_live)
        np.maximum.at(t_hi, row, t_live)
    t_lo, t_hi = t_lo - 3 * h, t_hi + 3 * h

    sym = {}
    (x0, x1), (y0, y1) = F.bounds
    tol = 1e-9 * h
    for chunk in np.array_split(ks, max(1, ks.size // 32)):
        # sample a batch of lines with one interpolation call
        px = (chunk * h * perp[0])[:, None] + t_fine[None, :] * uv[0]
        py = (chunk * h * perp[1])[:, None] + t_fine[None, :] * uv[1]
        need = ((t_fine[None, :] >= t_lo[chunk + kmax, None])
                & (t_fine[None, :] <= t_hi[chunk + kmax, None]))
        vals = np.full(px.shape, INF)
        vals[need] = interp2d(F, px[need], py[need], order)
        inside = (px >= x0 - tol) & (px <= x1 + tol) & (py >= y0 - tol) & (py <= y1 + tol)
        for r, k in enumerate(chunk):
            sec = LineSection(k * h * perp, t_fine, vals[r], inside[r])
            f = fit_section(sec, **fit)
            sym[int(k)] = None if f is None else c1.symmetrize_new(f)

    rho = (X * perp[0] + Y * perp[1]).ravel()
    tp = (X * uv[0] + Y * uv[1]).ravel()
    pos = rho / h
    base = np.floor(pos).astype(int)
    frac = pos - base
    # exact evaluation on the four neighbouring lines, nodes grouped by line
    line_vals = np.full((4, rho.size), INF)
    order_k = np.argsort(base, kind="stable")
    lines, starts = np.unique(base[order_k], return_index=True)
    groups = np.split(order_k, starts[1:])
    for k0, sel in zip(lines, groups):
        for o in range(4):
            g = sym.get(int(k0) + o - 1)
            if g is not None:
                line_vals[o, sel] = c1.evaluate(g, tp[sel])
    # the symmetral is convex across lines too, so the bracketed cubic applies
    res = _stencil_interp(line_vals, frac, order)
    # at the edge of the domain extend the chord of the two inner lines, or
    # take the nearer line when there is no chord
    v0, v1, v2, v3 = line_vals
    fin = np.isfinite(line_vals)
    with np.errstate(invalid="ignore"):
        edge = np.where(fin[0] & fin[1] & ~fin[2], v1 + frac * (v1 - v0),
                        np.where(fin[3] & fin[2] & ~fin[1], v2 + (1 - frac) * (v2 - v3),
                                 np.where(frac < 0.5, v1, v2)))
    todo = ~np.isfinite(res)
    res[todo] = edge[todo]
    return F.with_values(res.reshape(F.shape))


# ---------------------------------------------------------------------------
# Legendre transform


def conjugate_1d(xs: np.ndarray, vals: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """Exact ``max_i (p x_i - v_i)`` for every ``p`` via the lower hull.

    Returns ``-inf`` everywhere if no value is finite.
    """
    fin = np.isfinite(vals)
    if not fin.any():
        return np.full(np.shape(ps), -INF)
    x, v = xs[fin], vals[fin]
    keep = lower_envelope(x, v)
    x, v = x[keep], v[keep]
    if x.size == 1:
        return ps * x[0] - v[0]
    slopes = np.diff(v) / np.diff(x)
    i = np.searchsorted(slopes, ps, side="left")
    return ps * x[i] - v[i]


def default_dual_axes(F: GridFn) -> list[np.ndarray]:
    """Symmetric dual axes ``[-P, P]`` where ``P`` bounds the grid slopes.

    Only values up to ``F.cap`` count when a cap is set.
    """
    vals = effective_values(F)
    axes = []
    for ax in range(F.ndim):
        with np.errstate(invalid="ignore"):
            d = np.diff(vals, axis=ax) / F.spacing[ax]
            fin = np.abs(d[np.isfinite(d)])
        pmax = float(fin.max()) if fin.size else 1.0
        axes.append(np.linspace(-pmax, pmax, F.shape[ax]))
    return axes


def llt_legendre(F: GridFn, dual_axes: Sequence[np.ndarray] | None = None,
                 refine: int = 8, order: str = "cubic") -> GridFn:
    """Discrete conjugate ``LF(p) = max_x (<p, x> - F(x))`` on a dual grid.

    The maximum over a product grid factorizes, so the conjugate is taken
    one axis at a time, each pass exact via the lower hull of the samples.
    Before each pass the line is interpolated ``refine`` times finer, which
    removes most of the downward bias of a maximum over coarse samples;
    ``refine=1`` gives the plain discrete conjugate.  Values above ``F.cap``
    count as ``+inf``.

    Parameters
    ----------
    dual_axes : sequence of uniform arrays, optional
        One slope axis per dimension.  Defaults to :func:`default_dual_axes`.
    """
    if dual_axes is None:
        dual_axes = default_dual_axes(F)
    dual_axes = [np.asarray(a, float) for a in dual_axes]
    if len(dual_axes) != F.ndim:
        raise ValueError("need one dual axis per dimension")
    vals = effective_values(F)
    if not np.isfinite(vals).any():
        raise ValueError("function is +inf everywhere")

    def fine(n, ax):
        s = np.arange((n - 1) * refine + 1) / refine
        return s, F.origin[ax] + s * F.spacing[ax]

    if F.ndim == 1:
        s, x = fine(F.shape[0], 0)
        out = conjugate_1d(x, interp1d(vals, s, order), dual_axes[0])
    else:
        ps, qs = dual_axes
        sx, x = fine(F.shape[0], 0)
        sy, y = fine(F.shape[1], 1)
        # G[p, y] = max_x (p x - F(x, y))
        G = np.empty((ps.size, F.shape[1]))
        for j in range(F.shape[1]):
            G[:, j] = conjugate_1d(x, interp1d(vals[:, j], sx, order), ps)
        out = np.empty((ps.size, qs.size))
        for i in range(ps.size):
            out[i] = conjugate_1d(y, interp1d(-G[i], sy, order), qs)
    spacing = [a[1] - a[0] if a.size > 1 else 1.0 for a in dual_axes]
    return GridFn(tuple(a[0] for a in dual_axes), tuple(spacing), out)


# ---------------------------------------------------------------------------
# integrals and diagnostics


def _line_integrals(F: GridFn, refine: int, order: str) -> np.ndarray:
    vals = effective_values(F)
    vals = vals if F.ndim == 2 else vals[:, None]
    n = vals.shape[0]
    s = np.arange((n - 1) * refine + 1) / refine
    x = F.origin[0] + s * F.spacing[0]
    fine = interp1d(vals, s, order)
    return np.array([c1.sampled_exp_integral(x, fine[:, j]) for j in range(vals.shape[1])])


def exp_integral(F: GridFn, refine: int = 8, order: str = "cubic",
                 warn_tol: float | None = 1e-6) -> float:
    """``∫ exp(-F)`` over the grid box.

    Each grid line along the first axis is refined and integrated exactly as
    a PL function; the line integrals are combined with composite Simpson.
    A ``RuntimeWarning`` is issued when ``exp(-F)`` on the boundary of the
    box exceeds ``warn_tol`` times its peak, since the box then cuts off
    part of the integral.  ``warn_tol=None`` disables the check.
    """
    rows = _line_integrals(F, refine, order)
    total = float(rows[0]) if F.ndim == 1 else float(simpson(rows, dx=F.spacing[1]))
    if not total > 0:
        raise ValueError("exp(-F) has no mass on the grid")
    if warn_tol is None:
        return total
    v = effective_values(F)
    rim = v[[0, -1]].ravel()
    if F.ndim == 2:
        rim = np.concatenate([rim, v[:, [0, -1]].ravel()])
    gap = float(rim.min() - v.min())
    if gap < -math.log(warn_tol):
        warnings.warn(f"exp(-F) is not negligible on the grid boundary "
                      f"(boundary minus minimum is {gap:.3g}); integral truncated",
                      RuntimeWarning, stacklevel=2)
    return total


def radial_deviation(F: GridFn) -> float:
    """Normalized L2 distance of a 2-D grid function from its ring averages.

    Rings are centred at the origin with width equal to the coarser grid
    spacing; averages are interpolated linearly in the radius.  Only finite
    points inside the disc inscribed in the grid box take part.  The result
    is 0 for radial functions and scale-free.
    """
    if F.ndim != 2:
        raise ValueError("radial deviation needs a 2-D grid")
    X, Y = F.mesh()
    r = np.hypot(X, Y).ravel()
    v = effective_values(F).ravel()
    rmax = min(min(abs(lo), abs(hi)) for lo, hi in F.bounds)
    sel = np.isfinite(v) & (r <= rmax)
    r, v = r[sel], v[sel]
    w = max(F.spacing)
    ring = np.floor(r / w).astype(int)
    counts = np.bincount(ring)
    nz = counts > 0
    mean_v = np.bincount(ring, weights=v)[nz] / counts[nz]
    mean_r = np.bincount(ring, weights=r)[nz] / counts[nz]
    approx = np.interp(r, mean_r, mean_v)
    spread = float(np.sum((v - v.mean()) ** 2))
    if spread == 0:
        return 0.0
    return math.sqrt(float(np.sum((v - approx) ** 2)) / spread)


def asymmetry(F: GridFn) -> float:
    """``max |F(x) - F(-x)|`` on a grid symmetric about the origin."""
    for lo, hi in F.bounds:
        if abs(lo + hi) > 1e-9 * max(1.0, abs(hi)):
            raise ValueError("evenness needs a grid symmetric about the origin")
    a = F.values
    b = a[::-1] if F.ndim == 1 else a[::-1, ::-1]
    both_inf = np.isinf(a) & np.isinf(b)
    one_inf = np.isinf(a) ^ np.isinf(b)
    if one_inf.any():
        return INF
    with np.errstate(invalid="ignore"):
        gap = np.where(both_inf, 0.0, np.abs(a - b))
    return float(gap.max())
