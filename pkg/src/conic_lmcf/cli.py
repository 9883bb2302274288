"""Command-line driver for the conic-lmcf toolkit.

Every subcommand writes its artifacts into ``--outdir`` together with a
``report.json`` capturing the resolved inputs, the headline outputs, library
versions and wall time.  Artifacts are deterministic for fixed inputs and
seed: JSON is dumped with sorted keys, CSV floats use repr-faithful ``%.17g``
formatting, and all text files are UTF-8 with ``\\n`` line endings.  The one
intentionally non-reproducible field is ``wall_time_s`` inside report.json.

Exit codes: 0 on success, 2 for invalid inputs (bad flags, malformed config,
out-of-contract parameters), 1 for runtime numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import extract_asymptotics
from .cones import SLCone, catalog_cone, cone_from_json, stability_index
from .errors import NumericalError, ValidationError
from .exponents import ExponentTable, fredholm_index
from .flow import (
    catalog_initial_conditions,
    grid_coordinates,
    linearization_defect,
    run_flow,
)
from .links import FlatTorus, MeshLink, RoundSphere
from .radial import LaplaceTypeSpec, RadialGrid, solve_mode

THREADS_ENV = "CONIC_LMCF_THREADS"


def thread_count() -> int:
    """Worker count for multi-mode solves, honouring CONIC_LMCF_THREADS."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ValidationError(f"{THREADS_ENV} must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


# ----------------------------------------------------------------------
# artifact writers


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    """UTF-8 CSV with \\n line endings and full-precision floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=_jsonable)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serialisable: {type(value)!r}")


def write_columns(path: Path, *columns) -> None:
    """Whitespace-separated numeric columns (gnuplot-ready)."""
    arrays = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in zip(*arrays):
            fh.write("  ".join(format(v, ".17g") for v in row) + "\n")


def _report_schema() -> dict:
    text = resources.files("conic_lmcf").joinpath("schemas/report.schema.json").read_text("utf-8")
    return json.loads(text)


def write_report(outdir: Path, command: str, inputs: dict, outputs: dict, t0: float) -> None:
    import jsonschema

    report = {
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
        "versions": {
            "python": ".".join(str(v) for v in sys.version_info[:3]),
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
            "conic-lmcf": __version__,
        },
        "wall_time_s": time.perf_counter() - t0,
    }
    # round-trip through the serialiser so the validated object is exactly
    # what lands on disk
    canonical = json.loads(json.dumps(report, sort_keys=True, default=_jsonable))
    jsonschema.validate(canonical, _report_schema())
    write_json(outdir / "report.json", canonical)


# ----------------------------------------------------------------------
# shared argument plumbing


def _preload_config(argv) -> dict:
    """Extract --config from raw argv before the real parse."""
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object of flag defaults")
    return cfg


class _Arg:
    """add_argument wrapper that lets a config file supply defaults.

    Explicit command-line flags always win over config values, which win
    over built-in defaults.
    """

    def __init__(self, parser, config: dict):
        self.parser = parser
        self.config = config

    def add(self, name: str, **kwargs):
        dest = name.lstrip("-").replace("-", "_")
        if dest in self.config:
            value = self.config[dest]
            try:
                if kwargs.get("action") in ("store_true", "store_false"):
                    default = bool(value)
                elif kwargs.get("nargs") in ("+", "*"):
                    typ = kwargs.get("type", str)
                    seq = value if isinstance(value, (list, tuple)) else [value]
                    default = [typ(v) for v in seq]
                else:
                    typ = kwargs.get("type", str)
                    if isinstance(value, (list, tuple)) and len(value) == 1:
                        value = value[0]
                    default = None if value is None else typ(value)
            except (TypeError, ValueError):
                # the key targets a different subcommand's flag of the same
                # name; leave this parser's built-in default in place
                return self.parser.add_argument(name, **kwargs)
            kwargs["default"] = default
            kwargs.pop("required", None)
        return self.parser.add_argument(name, **kwargs)


def _add_common(arg: _Arg) -> None:
    arg.add("--outdir", type=str, default="out", help="directory for artifacts (created if missing)")
    arg.add("--seed", type=int, default=0, help="seed for any randomised sampling")
    arg.parser.add_argument("--config", type=str, default=None,
                            help="JSON file of flag defaults (explicit flags take precedence)")


def _add_link_flags(arg: _Arg) -> None:
    arg.add("--link", type=str, default="hl-torus",
            choices=["hl-torus", "torus", "sphere", "mesh"],
            help="which cone link to use")
    arg.add("--dim", type=int, default=2, help="link dimension (sphere/torus)")
    arg.add("--metric", type=str, default=None,
            help="flat-torus metric, rows separated by ';' e.g. '0.667,0.333;0.333,0.667'")
    arg.add("--mesh-file", type=str, default=None, help="OFF file for --link mesh")


def _parse_metric(text: str) -> np.ndarray:
    try:
        rows = [[float(x) for x in row.split(",")] for row in text.split(";")]
        return np.asarray(rows, dtype=float)
    except ValueError as exc:
        raise ValidationError(f"malformed --metric {text!r}") from exc


def build_link(args):
    if args.link == "hl-torus":
        from .cones import harvey_lawson_torus

        return harvey_lawson_torus().link
    if args.link == "sphere":
        return RoundSphere(args.dim)
    if args.link == "torus":
        if args.metric is None:
            return FlatTorus(np.eye(args.dim))
        return FlatTorus(_parse_metric(args.metric))
    if args.link == "mesh":
        if args.mesh_file is None:
            raise ValidationError("--link mesh requires --mesh-file")
        return MeshLink.from_off(args.mesh_file)
    raise ValidationError(f"unknown link {args.link!r}")


def _build_cone(args) -> SLCone:
    if getattr(args, "cone_json", None):
        return cone_from_json(args.cone_json)
    return catalog_cone(args.cone)


def _outdir(args) -> Path:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _inputs_dict(args, *names) -> dict:
    return {name: getattr(args, name) for name in names}


# ----------------------------------------------------------------------
# forcing / initial-condition parsing


_POWER = r"([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)"


def parse_forcing(expr: str | None, csv_path: str | None):
    """Build f(t, r) from 'r^a' / 't*r^a' shorthand or a (t, r, f) CSV table."""
    if expr and csv_path:
        raise ValidationError("give either --forcing or --forcing-csv, not both")
    if csv_path:
        return _forcing_from_csv(csv_path)
    if not expr or expr.strip() in ("0", "none"):
        return None
    m = re.fullmatch(rf"\s*r\^{_POWER}\s*", expr)
    if m:
        a = float(m.group(1))
        return lambda t, r: r**a
    m = re.fullmatch(rf"\s*t\s*\*\s*r\^{_POWER}\s*", expr)
    if m:
        a = float(m.group(1))
        return lambda t, r: t * r**a
    m = re.fullmatch(rf"\s*t\^2\s*\*\s*r\^{_POWER}\s*", expr)
    if m:
        a = float(m.group(1))
        return lambda t, r: t * t * r**a
    raise ValidationError(
        f"cannot parse forcing {expr!r}; use 'r^a', 't*r^a', 't^2*r^a' or --forcing-csv"
    )


def _forcing_from_csv(path: str):
    from scipy.interpolate import RegularGridInterpolator

    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ValidationError(f"cannot read forcing table {path}: {exc}") from exc
    if data.shape[1] != 3:
        raise ValidationError("forcing CSV needs exactly three columns: t,r,f")
    ts = np.unique(data[:, 0])
    rs = np.unique(data[:, 1])
    if ts.size * rs.size != data.shape[0]:
        raise ValidationError("forcing CSV must tabulate a full (t, r) product grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    grid_f = data[order, 2].reshape(ts.size, rs.size)
    if ts.size == 1:
        def f_const(t, r, _rs=rs, _row=grid_f[0]):
            return np.interp(np.clip(r, _rs[0], _rs[-1]), _rs, _row)

        return f_const
    interp = RegularGridInterpolator((ts, rs), grid_f, bounds_error=False, fill_value=None)

    def f(t, r):
        rr = np.clip(np.asarray(r, dtype=float), rs[0], rs[-1])
        tt = np.full_like(rr, np.clip(t, ts[0], ts[-1]))
        return interp(np.stack([tt, rr], axis=-1))

    return f


_IC_TOKEN = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def parse_initial_condition(expr: str, m: int, n: int) -> np.ndarray:
    """Catalog name or a closed-form expression in sin/cos/x1..xm/pi."""
    catalog = catalog_initial_conditions(m, n)
    if expr in catalog:
        return catalog[expr]
    allowed = {"sin", "cos", "pi"} | {f"x{i + 1}" for i in range(m)}
    for token in _IC_TOKEN.findall(expr):
        if token not in allowed:
            raise ValidationError(
                f"unknown name {token!r} in initial condition; allowed: "
                + ", ".join(sorted(allowed)) + ", or one of " + ", ".join(sorted(catalog))
            )
    xs = grid_coordinates(m, n)
    names = {"sin": np.sin, "cos": np.cos, "pi": math.pi}
    names.update({f"x{i + 1}": xs[i] for i in range(m)})
    try:
        values = eval(expr, {"__builtins__": {}}, names)  # noqa: S307 - whitelisted names only
    except Exception as exc:
        raise ValidationError(f"cannot evaluate initial condition {expr!r}: {exc}") from exc
    arr = np.broadcast_to(np.asarray(values, dtype=float), xs[0].shape).copy()
    return arr


# ----------------------------------------------------------------------
# subcommand handlers


def cmd_spectrum(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args)
    link = build_link(args)
    if isinstance(link, MeshLink):
        entries = link.spectrum(count=args.count)
    else:
        entries = link.spectrum(args.lmax)
    rows = [(e.lam, e.multiplicity, e.basis_tag) for e in entries]
    write_csv(out / "spectrum.csv", ["lambda", "multiplicity", "basis_tag"], rows)
    for e in entries:
        print(f"lambda={e.lam:.12g}  multiplicity={e.multiplicity}  {e.basis_tag}")
    outputs = {
        "files": ["spectrum.csv"],
        "n_eigenvalues": len(entries),
        "total_multiplicity": int(sum(e.multiplicity for e in entries)),
    }
    write_report(out, "spectrum",
                 _inputs_dict(args, "link", "dim", "metric", "mesh_file", "lmax", "count", "seed"),
                 outputs, t0)
    return 0


def cmd_exponents(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args)
    link = build_link(args)
    table = ExponentTable.for_link(link, m=args.m, alpha_max=args.alpha_max)
    rows = []
    for entry in table.entries:
        if entry.alpha >= 0:
            lo = 2.0 - args.m - entry.alpha
            rows.append((entry.lambda_source, entry.multiplicity, entry.alpha, lo))
    write_csv(out / "exponents.csv",
              ["lambda", "multiplicity", "alpha_plus", "alpha_minus"], rows)
    for lam, mult, hi, lo in rows:
        print(f"lambda={lam:.12g}  mult={mult}  alpha+={hi:.12g}  alpha-={lo:.12g}")
    outputs = {
        "files": ["exponents.csv"],
        "window": [table.alpha_lo, table.alpha_hi],
        "n_exponents": len(table.entries),
    }
    write_report(out, "exponents",
                 _inputs_dict(args, "link", "dim", "metric", "mesh_file", "m", "alpha_max", "seed"),
                 outputs, t0)
    return 0


def cmd_stability(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args)
    cone = _build_cone(args)
    table = ExponentTable.for_link(cone.link, m=cone.m, alpha_max=args.alpha_max)
    report = stability_index(cone, table, n=args.samples, seed=args.seed)
    counts = report.harmonic_counts
    print(f"stability index: {report.index}")
    print(f"harmonic counts (orders 0/1/2): {counts[0]}/{counts[1]}/{counts[2]}")
    print(f"moment-map span: translations {report.rank_translations}/"
          f"{report.expected_rank_translations}, "
          f"su({cone.m}) {report.rank_su}/{report.expected_rank_su}")
    if report.degenerate:
        print("WARNING: moment-map images are degenerate (linearly dependent)")
    for note in report.warnings:
        print(f"note: {note}")
    payload = report.to_dict()
    write_json(out / "stability.json", payload)
    outputs = {"files": ["stability.json"], **payload}
    write_report(out, "stability",
                 _inputs_dict(args, "cone", "cone_json", "alpha_max", "samples", "seed"),
                 outputs, t0)
    return 0


def cmd_fredholm(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args)
    cone = _build_cone(args)
    gammas = list(args.gamma)
    alpha_max = max([args.alpha_max] + [abs(g) + 1.0 for g in gammas])
    table = ExponentTable.for_link(cone.link, m=cone.m, alpha_max=alpha_max)
    index = fredholm_index([table] * len(gammas), gammas,
                           with_asymptotics=args.with_asymptotics)
    print(f"fredholm index: {index}")
    payload = {
        "index": index,
        "gammas": gammas,
        "with_asymptotics": bool(args.with_asymptotics),
        "counts": [table.count_M(g) for g in gammas],
    }
    write_json(out / "fredholm.json", payload)
    outputs = {"files": ["fredholm.json"], **payload}
    write_report(out, "fredholm",
                 _inputs_dict(args, "cone", "cone_json", "with_asymptotics", "alpha_max", "seed"),
                 outputs | {"gammas": gammas}, t0)
    return 0


def _solve_one_mode(lam, args, forcing):
    grid = RadialGrid(R=args.radius, n_cells=args.n, q=args.q)
    spec = LaplaceTypeSpec(lam=lam, m=args.m)
    outer = None
    if args.outer is not None:
        value = float(args.outer)
        outer = lambda t: value  # noqa: E731
    dt = args.dt if args.dt is not None else args.T / 400.0
    return solve_mode(spec, grid, T=args.T, dt=dt, forcing=forcing,
                      outer_bc=outer, inner_bc=args.inner,
                      store_every=args.store_every)


def cmd_heat(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args)
    forcing = parse_forcing(args.forcing, args.forcing_csv)
    lams = list(args.lam)
    if not lams:
        raise ValidationError("at least one --lam is required")
    workers = min(thread_count(), len(lams))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(lambda lam: _solve_one_mode(lam, args, forcing), lams))
    else:
        sols = [_solve_one_mode(lam, args, forcing) for lam in lams]
    files = []
    sups = {}
    for lam, sol in zip(lams, sols):
        name = f"mode_{_fmt(float(lam))}.csv"
        rows = []
        for ti, t in enumerate(sol.times):
            for rj, r in enumerate(sol.grid.nodes):
                rows.append((t, r, sol.values[ti, rj]))
        write_csv(out / name, ["t", "r", "u"], rows)
        files.append(name)
        sups[_fmt(float(lam))] = float(np.max(np.abs(sol.final())))
        write_columns(out / f"profile_{_fmt(float(lam))}.dat", sol.grid.nodes, sol.final())
        files.append(f"profile_{_fmt(float(lam))}.dat")
    for lam in lams:
        print(f"lambda={lam:g}: sup|u(T)| = {sups[_fmt(float(lam))]:.6e}")
    outputs = {"files": files, "sup_final": sups, "workers": workers}
    write_report(out, "heat",
                 _inputs_dict(args, "lam", "m", "radius", "n", "q", "T", "dt",
                              "forcing", "forcing_csv", "outer", "inner",
                              "store_every", "seed"),
                 outputs, t0)
    return 0


def cmd_asymptotics(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args)
    forcing = parse_forcing(args.forcing, args.forcing_csv)
    lams = list(args.lam)
    if len(lams) != 1:
        raise ValidationError("asymptotics extraction works on a single --lam mode")
    sol = _solve_one_mode(lams[0], args, forcing)
    link = FlatTorus(_parse_metric(args.metric)) if args.metric else None
    if link is None:
        from .cones import harvey_lawson_torus

        link = harvey_lawson_torus().link
    table = ExponentTable.for_link(link, m=args.m, alpha_max=max(args.gamma + 1.0, 3.0))
    expansion = extract_asymptotics(sol, table, gamma=args.gamma)
    for alpha, k, coeff in expansion.terms:
        print(f"term r^{alpha + 2 * k:g} (harmonic order {alpha:g}, lift {k}): "
              f"coefficient {coeff:.8e}")
    print(f"remainder decay rate: {expansion.remainder_rate:.4f} (target >= {args.gamma:g})")
    payload = {
        "terms": [[a, k, c] for a, k, c in expansion.terms],
        "remainder_rate": expansion.remainder_rate,
        "remainder_sup": expansion.remainder_sup,
        "gamma": expansion.gamma,
        "time": expansion.time,
    }
    write_json(out / "asymptotics.json", payload)
    from .asymptotics import synthesize

    remainder = sol.final() - synthesize(expansion.terms, sol.grid.nodes)
    write_columns(out / "remainder.dat", sol.grid.nodes, np.abs(remainder))
    outputs = {"files": ["asymptotics.json", "remainder.dat"], **payload}
    write_report(out, "asymptotics",
                 _inputs_dict(args, "lam", "m", "radius", "n", "q", "T", "dt",
                              "forcing", "forcing_csv", "outer", "inner", "metric",
                              "gamma", "seed"),
                 outputs, t0)
    return 0


def cmd_flow(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args)
    u0 = args.amplitude * parse_initial_condition(args.ic, args.m, args.n)
    final, series, states = run_flow(u0, T=args.T, dt=args.dt, record=True)
    n_snap = min(args.snapshots, len(states))
    pick = np.linspace(0, len(states) - 1, n_snap).round().astype(int)
    rows = []
    for si in pick:
        st = states[si]
        flat_u = st.u.ravel()
        flat_th = st.theta.ravel()
        for node in range(flat_u.size):
            rows.append((st.t, node, flat_u[node], flat_th[node]))
    write_csv(out / "flow_snapshots.csv", ["t", "node", "u", "theta"], rows)
    write_columns(out / "sup_theta.dat", series["t"], series["sup_theta"])
    summary = {
        "t": list(series["t"]),
        "sup_theta": list(series["sup_theta"]),
        "amplitude": list(series["amplitude"]),
    }
    write_json(out / "flow_summary.json", summary)
    print(f"final time {final.t:g}: sup|u| = {np.max(np.abs(final.u)):.6e}, "
          f"sup|theta| = {np.max(np.abs(final.theta)):.6e}")
    outputs = {
        "files": ["flow_snapshots.csv", "sup_theta.dat", "flow_summary.json"],
        "sup_u_final": float(np.max(np.abs(final.u))),
        "sup_theta_final": float(np.max(np.abs(final.theta))),
        "n_steps": len(series["t"]) - 1,
    }
    write_report(out, "flow",
                 _inputs_dict(args, "m", "n", "T", "dt", "ic", "amplitude",
                              "snapshots", "seed"),
                 outputs, t0)
    return 0


def cmd_defect(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args)
    u0 = parse_initial_condition(args.ic, args.m, args.n)
    report = linearization_defect(u0, epsilons=list(args.eps), T=args.T, dt=args.dt)
    for eps, d, dn in zip(report.epsilons, report.defects, report.defects_per_amplitude):
        print(f"eps={eps:g}: defect {d:.6e}, per-amplitude {dn:.6e}")
    for i, (raw, norm) in enumerate(zip(report.ratios, report.ratios_per_amplitude)):
        print(f"halving {i}: raw ratio {raw:.4f}, per-amplitude ratio {norm:.4f}")
    payload = {
        "epsilons": list(report.epsilons),
        "defects": list(report.defects),
        "defects_per_amplitude": list(report.defects_per_amplitude),
        "ratios": list(report.ratios),
        "ratios_per_amplitude": list(report.ratios_per_amplitude),
    }
    write_json(out / "defect.json", payload)
    write_columns(out / "defect.dat", report.epsilons, report.defects)
    outputs = {"files": ["defect.json", "defect.dat"], **payload}
    write_report(out, "defect",
                 _inputs_dict(args, "m", "n", "T", "dt", "ic", "seed") | {"eps": list(args.eps)},
                 outputs, t0)
    return 0


# ----------------------------------------------------------------------
# parser assembly


def build_parser(config: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conic-lmcf",
        description="numerics for Lagrangian mean curvature flow out of conical singularities",
    )
    parser.add_argument("--version", action="version", version=f"conic-lmcf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="link Laplacian spectrum with multiplicities")
    a = _Arg(p, config)
    _add_common(a)
    _add_link_flags(a)
    a.add("--lmax", type=float, default=10.0, help="largest eigenvalue to report")
    a.add("--count", type=int, default=10, help="eigenvalue count for mesh links")
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("exponents", help="homogeneity exponents of a cone Laplacian")
    a = _Arg(p, config)
    _add_common(a)
    _add_link_flags(a)
    a.add("--m", type=int, default=3, help="cone dimension")
    a.add("--alpha-max", type=float, default=5.0, help="upper edge of the exponent window")
    p.set_defaults(handler=cmd_exponents)

    p = sub.add_parser("stability", help="stability index of a special Lagrangian cone")
    a = _Arg(p, config)
    _add_common(a)
    a.add("--cone", type=str, default="hl-torus-3", help="catalog cone name")
    a.add("--cone-json", type=str, default=None, help="cone description file (overrides --cone)")
    a.add("--alpha-max", type=float, default=3.0, help="exponent window upper edge (must exceed 2)")
    a.add("--samples", type=int, default=24, help="link sample resolution for rank checks")
    p.set_defaults(handler=cmd_stability)

    p = sub.add_parser("fredholm", help="Fredholm index of the weighted Laplacian")
    a = _Arg(p, config)
    _add_common(a)
    a.add("--cone", type=str, default="hl-torus-3", help="catalog cone name")
    a.add("--cone-json", type=str, default=None, help="cone description file (overrides --cone)")
    a.add("--gamma", type=float, nargs="+", required=True, help="weight, one per cone end")
    a.add("--with-asymptotics", action="store_true",
          help="index of the extended operator with polyhomogeneous unknowns")
    a.add("--alpha-max", type=float, default=3.0, help="minimum exponent window upper edge")
    p.set_defaults(handler=cmd_fredholm)

    def add_heat_flags(a: _Arg) -> None:
        a.add("--lam", type=float, nargs="+", default=[0.0],
              help="link eigenvalue(s); several run concurrently")
        a.add("--m", type=int, default=3, help="cone dimension")
        a.add("--radius", type=float, default=1.0, help="outer radius of the annulus")
        a.add("--n", type=int, default=400, help="number of grid cells")
        a.add("--q", type=float, default=2.0, help="grid grading power")
        a.add("--T", type=float, default=0.1, help="final time")
        a.add("--dt", type=float, default=None, help="time step (default T/400)")
        a.add("--forcing", type=str, default=None, help="'r^a', 't*r^a' or 't^2*r^a'")
        a.add("--forcing-csv", type=str, default=None, help="CSV table t,r,f")
        a.add("--outer", type=float, default=None, help="constant outer Dirichlet value")
        a.add("--inner", type=str, default="extrapolation",
              choices=["extrapolation", "dirichlet0"], help="inner boundary treatment")

    p = sub.add_parser("heat", help="radial mode solves of the cone heat equation")
    a = _Arg(p, config)
    _add_common(a)
    add_heat_flags(a)
    a.add("--store-every", type=int, default=0, help="keep every k-th frame (0: first/last)")
    p.set_defaults(handler=cmd_heat)

    p = sub.add_parser("asymptotics", help="extract the conical expansion of a heat solution")
    a = _Arg(p, config)
    _add_common(a)
    add_heat_flags(a)
    a.add("--metric", type=str, default=None, help="flat-torus link metric (default hl-torus-3)")
    a.add("--gamma", type=float, default=2.4, help="expansion is resolved below this rate")
    a.add("--store-every", type=int, default=0, help="keep every k-th frame (0: first/last)")
    p.set_defaults(handler=cmd_asymptotics)

    p = sub.add_parser("flow", help="periodic graphical Lagrangian mean curvature flow")
    a = _Arg(p, config)
    _add_common(a)
    a.add("--m", type=int, default=2, help="number of dimensions")
    a.add("--n", type=int, default=64, help="grid points per axis")
    a.add("--T", type=float, default=0.5, help="final time")
    a.add("--dt", type=float, default=None, help="time step (default from grid)")
    a.add("--ic", type=str, default="sine",
          help="catalog name or expression in sin, cos, x1..xm, pi")
    a.add("--amplitude", type=float, default=1.0, help="scale factor on the initial potential")
    a.add("--snapshots", type=int, default=5, help="number of recorded field snapshots")
    p.set_defaults(handler=cmd_flow)

    p = sub.add_parser("defect", help="defect of the heat-flow linearisation, halved amplitudes")
    a = _Arg(p, config)
    _add_common(a)
    a.add("--m", type=int, default=2, help="number of dimensions")
    a.add("--n", type=int, default=64, help="grid points per axis")
    a.add("--T", type=float, default=0.5, help="final time")
    a.add("--dt", type=float, default=None, help="time step (default from grid)")
    a.add("--ic", type=str, default="mixed",
          help="catalog name or expression in sin, cos, x1..xm, pi")
    a.add("--eps", type=float, nargs="+", default=[0.1, 0.05, 0.025],
          help="decreasing amplitude ladder")
    p.set_defaults(handler=cmd_defect)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        config = _preload_config(argv)
        parser = build_parser(config)
        args = parser.parse_args(argv)
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
