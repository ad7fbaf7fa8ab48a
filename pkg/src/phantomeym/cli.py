"""Command-line front end.

Every subcommand writes plain whitespace-separated data files plus a JSON
manifest ``<subcommand>.manifest.json`` listing each file with its SHA-256,
and prints the manifest summary on stdout. Exit codes: 0 success, 1 failed
checks or missing results, 2 inadmissible input, 3 bracket or build
failure, 4 unconverged asymptotics, 5 integration failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from phantomeym import __version__
from phantomeym._jit import BACKEND
from phantomeym.asym import CurveFamily, default_grid, find_asym_pairs, u0_curve
from phantomeym.classifier import ClassifyPolicy, classify
from phantomeym.errors import PhantomEYMError
from phantomeym.integrator import IntegrationControls, integrate
from phantomeym.model import InitialData, initial_state
from phantomeym.shooting import DEFAULT_TOL, Axis, find_sequence
from phantomeym.wormhole import SQRT2, build

TRAJECTORY_COLUMNS = "rho r N w U kappa zeta"
SOLUTION_COLUMNS = "rho r N w U kappa zeta tau phi m"
FMT17 = "%.16e"  # 17 significant digits
FMT12 = "%.12f"


class MissingResults(PhantomEYMError):
    """Nothing to export."""


# manifests -----------------------------------------------------------------


def render_manifest(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, indent=2, allow_nan=False) + "\n"


def parse_manifest(text: str) -> dict:
    return json.loads(text)


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Run:
    """Collects output files for one subcommand; writes nothing until :meth:`commit`."""

    def __init__(self, name, args, out):
        self.name = name
        self.out = Path(out)
        self.params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "command")}
        self.files: dict[str, bytes] = {}
        self.results = None
        self.t0 = time.perf_counter()

    def add_table(self, fname, array, header, fmt=FMT17):
        buf = io.StringIO()
        np.savetxt(buf, np.asarray(array), fmt=fmt, header=header, comments="# ")
        self.files[fname] = buf.getvalue().encode()

    def add_json(self, fname, obj):
        self.files[fname] = (json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n").encode()

    def manifest(self) -> dict:
        return {
            "subcommand": self.name,
            "parameters": _jsonable(self.params),
            "tool_version": __version__,
            "backend": BACKEND,
            "wall_time": round(time.perf_counter() - self.t0, 6),
            "results": _jsonable(self.results),
            "files": [{"path": k, "sha256": sha256(v), "bytes": len(v)} for k, v in sorted(self.files.items())],
        }

    def commit(self) -> dict:
        self.out.mkdir(parents=True, exist_ok=True)
        for fname, data in sorted(self.files.items()):
            (self.out / fname).write_bytes(data)
        m = self.manifest()
        text = render_manifest(m)
        (self.out / f"{self.name}.manifest.json").write_text(text)
        sys.stdout.write(text)
        return m


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if obj is None or isinstance(obj, (str, int, bool)):
        return obj
    return str(obj)


# helpers -------------------------------------------------------------------


def _controls(args) -> IntegrationControls:
    return IntegrationControls(
        rtol=args.rtol,
        atol=args.atol,
        rho_max=args.rho_max,
        escape_latch=not getattr(args, "no_escape_latch", False),
    )


def _data(args) -> InitialData:
    return InitialData(args.r0, args.w0, args.u0).validate()


def _add_controls(p):
    p.add_argument("--rtol", type=float, default=1e-12)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--rho-max", type=float, default=50.0)


def _add_data(p):
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--w0", type=float, required=True)
    p.add_argument("--u0", type=float, required=True)


def _pair_list(text):
    pairs = []
    for tok in text.replace(";", " ").split():
        n, m = tok.split(",")
        pairs.append((int(n), int(m)))
    return pairs


# subcommands ---------------------------------------------------------------


def cmd_integrate(args):
    run = Run("integrate", args, args.out)
    traj = integrate(initial_state(_data(args)), _controls(args))
    if args.step:
        rho = np.arange(0.0, traj.rho_end, args.step)
        if rho[-1] != traj.rho_end:
            rho = np.append(rho, traj.rho_end)
        rows = np.column_stack([rho, traj.sample_many(rho)])
    else:
        rows = np.column_stack([traj.rho, traj.states])
    run.add_table("trajectory.dat", rows, TRAJECTORY_COLUMNS)
    run.results = {
        "termination": traj.termination.value,
        "rho_end": traj.rho_end,
        "nodes": len(traj.rho),
        "events": [{"rho": e.rho, "kind": e.kind.name, "direction": e.direction} for e in traj.events],
        "max_constraint_residual": float(np.max(np.abs(traj.constraint_residuals()))),
    }
    run.commit()
    return 0


def cmd_classify(args):
    run = Run("classify", args, args.out)
    c = classify(_data(args), _controls(args), ClassifyPolicy())
    record = c.to_dict()
    record["zeros"] = c.diagnostics.zero_count if c.diagnostics else None
    run.add_json("classify.json", record)
    run.results = record
    run.commit()
    return 0


def cmd_shoot(args):
    run = Run("shoot", args, args.out)
    axis = Axis(args.parity)
    seq = find_sequence(args.r0, axis, args.n_max, args.tol, _controls(args))
    rows = [(s.n, s.value, s.lo, s.hi) for s in seq]
    buf = io.StringIO()
    buf.write("# n value lo hi\n")
    for n, v, lo, hi in rows:
        buf.write(f"{n:d} {v:.12f} {lo:.12f} {hi:.12f}\n")
    run.files[f"shoot_{axis.value}.dat"] = buf.getvalue().encode()
    run.results = [s.to_dict() for s in seq]
    run.commit()
    return 0


def cmd_asym(args):
    run = Run("asym", args, args.out)
    diag = []
    grid = default_grid(args.r0, args.grid)
    pairs = find_asym_pairs(
        args.r0, args.n, args.m, args.tol, grid=grid, controls=_controls(args), workers=args.workers, diagnostics=diag
    )
    buf = io.StringIO()
    buf.write("# n m w0 U0\n")
    for p in pairs:
        buf.write(f"{p.n:d} {p.m:d} {p.w0:.12f} {p.U0:.12f}\n")
    run.files["asym_pairs.dat"] = buf.getvalue().encode()
    run.results = {"pairs": [p.to_dict() for p in pairs], "diagnostics": diag}
    run.commit()
    return 0


def cmd_build(args):
    run = Run("build", args, args.out)
    sol = build(
        _data(args),
        _controls(args),
        h=args.h,
        route=args.route,
        normalize_end=args.normalize_end,
        phantom_factor=args.phantom_factor,
    )
    run.add_table("solution.dat", sol.table(), SOLUTION_COLUMNS)
    run.results = sol.summary()
    run.commit()
    return 0


def cmd_verify(args):
    from phantomeym.verify import run_checks

    run = Run("verify", args, args.out)
    checks = run_checks(solution_file=args.solution)
    passed = sum(1 for c in checks if c["passed"])
    run.results = {"passed": passed, "failed": len(checks) - passed, "checks": checks}
    run.add_json("verify.json", run.results)
    run.commit()
    return 0 if passed == len(checks) else 1


def _clip(sol, window):
    keep = np.abs(sol.rho) <= window
    return sol.rho[keep], keep


def _read_pairs(path):
    out = []
    for line in Path(path).read_text().splitlines():
        tok = line.split("#", 1)[0].split()
        if len(tok) >= 4:
            out.append((int(tok[0]), int(tok[1]), float(tok[2]), float(tok[3])))
    return out


def cmd_export_figure(args):
    run = Run("export-figure", args, args.out)
    controls = _controls(args)
    results = {"solutions": [], "curves": []}
    if args.pairs_file:
        found = _read_pairs(args.pairs_file)
    else:
        found = []
        for n, m in _pair_list(args.pairs):
            family = CurveFamily(args.r0, controls=controls)
            ps = find_asym_pairs(args.r0, n, m, grid=default_grid(args.r0, args.grid), controls=controls,
                                 family=family, workers=args.workers)
            found.extend((p.n, p.m, p.w0, p.U0) for p in ps[:1])
    for n, m, w0, u0 in found:
        sol = build(InitialData(args.r0, w0, u0), controls, h=args.h)
        rho, keep = _clip(sol, args.window)
        run.add_table(f"N_n={n}_m={m}.dat", np.column_stack([rho, sol.column("N")[keep]]), "rho N")
        run.add_table(f"w_n={n}_m={m}.dat", np.column_stack([rho, sol.column("w")[keep]]), "rho w")
        results["solutions"].append({"n": n, "m": m, "w0": w0, "U0": u0,
                                     "zeros": [sol.n_forward, sol.n_backward]})
    if args.mu:
        family = CurveFamily(args.r0, controls=controls)
        grid = default_grid(args.r0, args.grid)
        for n in (int(t) for t in args.mu.replace(",", " ").split()):
            samples = [s for s in u0_curve(args.r0, n, grid, family=family, workers=args.workers)
                       if s.value is not None]
            if not samples:
                continue
            run.add_table(f"mu_{n}.dat", [(s.w0, s.value) for s in samples], "w0 U0")
            results["curves"].append({"n": n, "points": len(samples)})
    if not run.files:
        raise MissingResults("nothing to export: no pairs found and no curves requested")
    run.results = results
    run.commit()
    return 0


# entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phantomeym", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", default=".", help="output directory")
        p.set_defaults(func=func)
        return p

    p = add("integrate", cmd_integrate, "integrate one orbit")
    _add_data(p)
    _add_controls(p)
    p.add_argument("--step", type=float, default=0.0, help="resample on a uniform grid (default: nodes)")
    p.add_argument("--no-escape-latch", action="store_true")

    p = add("classify", cmd_classify, "classify one orbit")
    _add_data(p)
    _add_controls(p)

    p = add("shoot", cmd_shoot, "symmetric regular-orbit sequence")
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--parity", choices=["even", "odd"], required=True)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_controls(p)

    p = add("asym", cmd_asym, "asymmetric wormhole data")
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--grid", type=int, default=65)
    p.add_argument("--workers", type=int, default=None)
    _add_controls(p)

    p = add("build", cmd_build, "assemble a two-ended solution")
    _add_data(p)
    _add_controls(p)
    p.add_argument("--h", type=float, default=0.01, help="output grid step")
    p.add_argument("--route", choices=["auto", "reflect", "transform"], default="auto")
    p.add_argument("--normalize-end", choices=["+", "-"], default="+")
    p.add_argument("--phantom-factor", type=float, default=SQRT2)

    p = add("verify", cmd_verify, "run the oracle and invariant checks")
    p.add_argument("--solution", default=None, help="also check a solution.dat written by build")

    p = add("export-figure", cmd_export_figure, "plot data for solutions and curves")
    p.add_argument("--r0", type=float, default=0.75)
    p.add_argument("--pairs", default="0,2 1,3", help="(n,m) pairs, e.g. '0,2 1,3'")
    p.add_argument("--pairs-file", default=None, help="asym_pairs.dat to use instead of searching")
    p.add_argument("--mu", default="0 1 2", help="curve indices n for mu_<n>.dat ('' for none)")
    p.add_argument("--grid", type=int, default=65)
    p.add_argument("--window", type=float, default=25.0)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=None)
    _add_controls(p)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PhantomEYMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
