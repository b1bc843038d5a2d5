"""Command-line front end.

Every subcommand prints a JSON summary on stdout.  With ``--out PATH`` the
sampled data go to ``PATH`` as CSV and the summary to ``PATH`` with a
``.json`` suffix.

Exit codes: 0 success, 2 bad input, 3 convexity validation failure,
4 hypothesis violation (a non-even function given to ``santalo``).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import convex1d as c1
from . import funcbank
from . import gridnd as gd
from . import santalo
from .convex1d import InvalidFunctionError, PLConvex1D
from .gridnd import Direction, NonConvexSectionError
from .report import dumps, write_csv, write_json

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VALIDATION = 3
EXIT_HYPOTHESIS = 4


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    fn: str | None = None
    file: Path | None = None
    u: tuple | None = None
    grid: int | None = None
    steps: int = 50
    seed: int = 7
    out: Path | None = None
    tol: float = 1e-6

    def __post_init__(self):
        if self.grid is not None and self.grid < 3:
            raise InputError("--grid must be at least 3")
        if self.steps < 0:
            raise InputError("--steps must be nonnegative")
        if self.out is not None:
            parent = Path(self.out).resolve().parent
            if not parent.is_dir():
                raise InputError(f"output directory {parent} does not exist")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        u = None
        if getattr(ns, "u", None):
            try:
                u = tuple(float(c) for c in ns.u.split(","))
            except ValueError:
                raise InputError(f"cannot parse direction {ns.u!r}") from None
        return cls(ns.command, getattr(ns, "fn", None),
                   Path(ns.file) if getattr(ns, "file", None) else None, u,
                   getattr(ns, "grid", None), getattr(ns, "steps", 50),
                   getattr(ns, "seed", 7),
                   Path(ns.out) if getattr(ns, "out", None) else None,
                   getattr(ns, "tol", 1e-6))

    def summary_path(self) -> Path | None:
        return None if self.out is None else self.out.with_suffix(".json")


# ---------------------------------------------------------------------------
# input resolution


@dataclass
class Resolved:
    id: str
    dim: int
    pl: PLConvex1D | None = None
    window: tuple | None = None
    named: funcbank.NamedFunction | None = None


def resolve(cfg: RunConfig) -> Resolved:
    if (cfg.fn is None) == (cfg.file is None):
        raise InputError("give exactly one of --fn or --file")
    if cfg.file is not None:
        try:
            f = PLConvex1D.from_json(cfg.file.read_text())
        except OSError as exc:
            raise InputError(f"cannot read {cfg.file}: {exc}") from None
        except (ValueError, TypeError) as exc:
            raise InputError(f"bad function spec in {cfg.file}: {exc}") from None
        problems = c1.validate(f)
        if problems:
            raise InvalidFunctionError(problems)
        lo, hi = _auto_window(f)
        return Resolved(cfg.file.stem, 1, f, (lo, hi))
    try:
        named = funcbank.get(cfg.fn)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    if named.dim == 1:
        return Resolved(named.id, 1, named.pl, tuple(named.window), named)
    return Resolved(named.id, 2, None, named.window, named)


def _auto_window(f: PLConvex1D) -> tuple[float, float]:
    xs = f.breakpoints
    span = max(1.0, float(xs[-1] - xs[0]))
    return float(xs[0] - span), float(xs[-1] + span)


def _grid_of(res: Resolved, cfg: RunConfig):
    n = cfg.grid
    return res.named.grid(None if n is None else (n, n))


def _direction(cfg: RunConfig) -> Direction:
    try:
        return Direction.of(*(cfg.u or (1.0, 0.0)))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _samples(res: Resolved, cfg: RunConfig) -> np.ndarray:
    lo, hi = res.window
    return np.linspace(lo, hi, cfg.grid or 401)


def _width_residual(f: PLConvex1D, g: PLConvex1D) -> float:
    wf, wg = c1.width_profile(f), c1.width_profile(g)
    top = wf.levels[-1] + 1.0
    s = np.linspace(wf.levels[0], top, 1001)
    a, b = wf.width(s), wg.width(s)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))


def _emit(cfg: RunConfig, summary: dict, header=None, rows=None) -> None:
    if cfg.out is not None:
        if header is not None:
            write_csv(cfg.out, header, rows)
        write_json(cfg.summary_path(), summary)
    print(dumps(summary))


# ---------------------------------------------------------------------------
# commands


def cmd_symmetrize(cfg: RunConfig) -> int:
    res = resolve(cfg)
    if res.dim == 2:
        F = _grid_of(res, cfg)
        u = _direction(cfg)
        G = gd.steiner_symmetrize(F, u)
        before, after = gd.exp_integral(F), gd.exp_integral(G)
        X, Y = F.mesh()
        rows = zip(X.ravel(), Y.ravel(), F.values.ravel(), G.values.ravel())
        summary = {"function": res.id, "dimension": 2, "direction": list(u.components),
                   "grid": list(F.shape), "integral_before": before,
                   "integral_after": after, "integral_drift": abs(after / before - 1)}
        _emit(cfg, summary, ("x", "y", "f", "Sf"), rows)
        return EXIT_OK
    f = res.pl
    S, A = c1.symmetrize_new(f), c1.symmetrize_amk(f)
    xs = _samples(res, cfg)
    rows = zip(xs, c1.evaluate(f, xs), c1.evaluate(S, xs), c1.evaluate(A, xs))
    before = c1.exp_integral(f)
    summary = {"function": res.id, "dimension": 1,
               "integral_before": before,
               "integral_after": c1.exp_integral(S),
               "integral_after_amk": c1.exp_integral(A),
               "width_residual": _width_residual(f, S),
               "min_f": f.minimum, "sf_at_zero": float(S(0.0)),
               "breakpoints": int(S.breakpoints.size)}
    _emit(cfg, summary, ("x", "f", "Sf", "amk"), rows)
    return EXIT_OK


def cmd_compare_defs(cfg: RunConfig) -> int:
    res = resolve(cfg)
    if res.dim != 1:
        raise InputError("compare-defs works on one-dimensional functions")
    f = res.pl
    S, A = c1.symmetrize_new(f), c1.symmetrize_amk(f)
    xs = _samples(res, cfg)
    s_vals, a_vals = c1.evaluate(S, xs), c1.evaluate(A, xs)
    fin = np.isfinite(s_vals) & np.isfinite(a_vals)
    gap = np.where(fin, s_vals - np.where(fin, a_vals, 0.0), np.nan)
    base = c1.exp_integral(f)
    summary = {"function": res.id,
               "max_gap": float(np.nanmax(gap)) if fin.any() else math.nan,
               "min_gap": float(np.nanmin(gap)) if fin.any() else math.nan,
               "integral": base,
               "drift_new": abs(c1.exp_integral(S) / base - 1),
               "drift_amk": abs(c1.exp_integral(A) / base - 1)}
    _emit(cfg, summary, ("x", "Sf", "amk", "gap"),
          zip(xs, s_vals, a_vals, gap))
    return EXIT_OK


def cmd_santalo(cfg: RunConfig) -> int:
    res = resolve(cfg)
    target = res.pl if res.dim == 1 else _grid_of(res, cfg)
    rep = santalo.santalo_product(target, res.id, even_tol=cfg.tol)
    summary = rep.to_dict()
    summary.pop("trace")
    header = ("function", "dimension", "integral", "dual_integral", "product", "bound", "slack")
    row = (res.id, rep.dimension, rep.integral, rep.dual_integral, rep.product,
           rep.bound, rep.slack)
    _emit(cfg, summary, header, [row])
    return EXIT_OK


def cmd_converge(cfg: RunConfig) -> int:
    res = resolve(cfg)
    if res.dim != 2:
        raise InputError("converge works on two-dimensional functions")
    F = _grid_of(res, cfg)
    asym = gd.asymmetry(F.with_values(gd.effective_values(F)))
    if not asym <= cfg.tol:
        raise santalo.NotEvenError(asym, cfg.tol)
    rep = santalo.convergence_experiment(F, cfg.steps, cfg.seed, res.id)
    trace = rep.trace
    first, last = trace[0], trace[-1]
    summary = rep.to_dict()
    summary.pop("trace")
    summary.update({
        "steps": cfg.steps,
        "initial_radial_deviation": first["radial_deviation"],
        "final_radial_deviation": last["radial_deviation"],
        "deviation_ratio": last["radial_deviation"] / first["radial_deviation"]
        if first["radial_deviation"] else 0.0,
        "integral_drift": abs(last["integral"] / first["integral"] - 1),
    })
    if cfg.out is not None:
        santalo.write_trace_csv(trace, cfg.out)
        write_json(cfg.summary_path(), dict(summary, trace=trace))
    print(dumps(summary))
    return EXIT_OK


def cmd_catalog(cfg: RunConfig) -> int:
    listing = [{"id": fn.id, "dim": fn.dim, "description": fn.description,
                "even": fn.even, "facts": [f.name for f in fn.facts]}
               for fn in funcbank.catalog()]
    if cfg.out is not None:
        funcbank.dump_json(cfg.out)
    print(json.dumps(listing, indent=2))
    return EXIT_OK


COMMANDS = {
    "symmetrize": cmd_symmetrize,
    "compare-defs": cmd_compare_defs,
    "santalo": cmd_santalo,
    "converge": cmd_converge,
    "catalog": cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="steinerfn",
                                description="Steiner symmetrization of convex functions")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid_help="sample points (1-D) or points per axis (2-D)"):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--fn", help="catalog function id")
        src.add_argument("--file", help="JSON function spec")
        sp.add_argument("--grid", type=int, help=grid_help)
        sp.add_argument("--out", help="CSV output path (summary goes next to it as .json)")
        sp.add_argument("--tol", type=float, default=1e-6, help="tolerance (default 1e-6)")

    sp = sub.add_parser("symmetrize", help="symmetrize a function")
    common(sp)
    sp.add_argument("--u", help='direction for 2-D functions, e.g. "1,1"')
    common(sub.add_parser("compare-defs", help="compare the two symmetrizations"))
    common(sub.add_parser("santalo", help="volume product of an even function"))
    sp = sub.add_parser("converge", help="iterated random symmetrizations")
    common(sp)
    sp.add_argument("--steps", type=int, default=50)
    sp.add_argument("--seed", type=int, default=7)
    sp = sub.add_parser("catalog", help="list the named functions")
    sp.add_argument("--out", help="write the catalog as JSON function specs")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = RunConfig.from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidFunctionError, NonConvexSectionError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except santalo.NotEvenError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
