"""Command-line front end: ``hyperbn {solve,scan,branch,verify,eig,sobolev}``.

Every run writes JSON summaries, CSV tables and a ``manifest.json`` into
``--out`` (default ``$HYPERBN_OUT`` or ``./hyperbn_out``).  Exit codes:
0 success, 1 invalid arguments, 2 empty result, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .continuation import compactness_check, subcritical_sequence
from .diagnostics import (
    FamilyControls,
    annulus_gradient_scaling,
    fit_tail_decay,
    minimize_quotient,
    pohozaev_check,
    uniform_bound_ratios,
)
from .geometry import critical_exponent, gauge_transform, make_params
from .linear_ode import radial_dirichlet_eigenvalues
from .radial_ode import HYPERBOLIC, Controls, RadialProfile
from .shooting import bracket_scan, default_grid, find_knode, nonexistence_scan

log = logging.getLogger("hyperbn")

EXIT_OK, EXIT_ARGS, EXIT_EMPTY, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _Help(argparse.ArgumentDefaultsHelpFormatter):
    # required flags and optional ones without a value have nothing to show
    def _get_help_string(self, action):
        if action.default is None:
            return action.help
        return super()._get_help_string(action)


# ---------------------------------------------------------------- output


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class RunWriter:
    """Collects output files for the manifest."""

    def __init__(self, out: Path):
        self.out = out
        self.files: list[dict] = []

    def json(self, name: str, obj) -> dict:
        text = dumps(obj)
        _atomic_write(self.out / name, text)
        self.files.append({"path": name, "kind": "json"})
        return obj

    def csv(self, name: str, header, rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        n = 0
        for row in rows:
            w.writerow([f"{x:.17g}" if isinstance(x, (float, np.floating)) else x for x in row])
            n += 1
        _atomic_write(self.out / name, buf.getvalue())
        self.files.append({"path": name, "kind": "csv", "rows": n, "columns": len(header)})

    def manifest(self, command: str, params: dict, config_digest: str, summary: dict) -> None:
        man = {
            "command": command,
            "parameters": params,
            "version": __version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "config_digest": config_digest,
            "outputs": self.files,
            "summary": summary,
        }
        _atomic_write(self.out / "manifest.json", dumps(man))


# ---------------------------------------------------------------- parsing


def _p_value(text: str):
    t = text.strip().lower()
    if t in ("critical", "crit", "2*"):
        return "critical"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or 'critical': {text!r}")


def _float_list(text: str):
    return [_p_value(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default=None,
                        help="output directory (default: $HYPERBN_OUT or ./hyperbn_out)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized starts")
    common.add_argument("--config", default=None,
                        help="flat key=value file; flags given on the command line win")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    def shot(grid_hi=1e3, grid_n=60):
        # built per command: parent actions are shared objects
        sp = _Parser(add_help=False)
        sp.add_argument("--tol", type=float, default=1e-10, help="integrator tolerance")
        sp.add_argument("--rmax", type=float, default=60.0, help="largest geodesic radius")
        sp.add_argument("--grid-lo", type=float, default=1e-3, help="smallest amplitude")
        sp.add_argument("--grid-hi", type=float, default=grid_hi, help="largest amplitude")
        sp.add_argument("--grid-n", type=int, default=grid_n, help="amplitudes in the scan")
        return sp

    fmt = _Help
    parser = _Parser(prog="hyperbn", description="Radial shooting solver for critical semilinear equations on hyperbolic space")
    parser.add_argument("--version", action="version", version=f"hyperbn {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common, shot()], formatter_class=fmt,
                       help="find a k-node radial solution")
    s.add_argument("--dim", type=int, default=None, help="dimension N >= 3 (required)")
    s.add_argument("--lambda", dest="lam", type=float, default=None, help="lambda (required)")
    s.add_argument("--p", type=_p_value, default="critical", help="exponent or 'critical'")
    s.add_argument("--nodes", type=int, default=0, help="number of nodes k (0..4)")
    s.add_argument("--tol-a", type=float, default=1e-12, help="relative amplitude tolerance")

    s = sub.add_parser("scan", parents=[common, shot()], formatter_class=fmt,
                       help="classify shots below the existence threshold")
    s.add_argument("--dim", type=int, default=None, help="dimension N >= 3 (required)")
    s.add_argument("--lambda", dest="lam", type=float, default=None, help="lambda (required)")
    s.add_argument("--p", type=_p_value, default="critical", help="exponent or 'critical'")

    s = sub.add_parser("branch", parents=[common, shot(1e12, 150)], formatter_class=fmt,
                       help="continue a k-node solution in p")
    s.add_argument("--dim", type=int, default=None, help="dimension N >= 3 (required)")
    s.add_argument("--lambda", dest="lam", type=float, default=None, help="lambda (required)")
    s.add_argument("--nodes", type=int, default=0, help="number of nodes k (0..4)")
    s.add_argument("--p-list", type=_float_list, default=None,
                   help="comma-separated exponents; default 2*-1/n for n=2..10")
    s.add_argument("--tol-a", type=float, default=1e-12, help="relative amplitude tolerance")

    s = sub.add_parser("verify", parents=[common], formatter_class=fmt,
                       help="re-check a stored solve run")
    s.add_argument("--in", dest="inp", default=None, help="directory written by 'solve' (required)")
    s.add_argument("--radii", type=_float_list, default=[0.3, 0.6, 0.9],
                   help="Euclidean radii for the local Pohozaev balance")
    s.add_argument("--eps", type=_float_list, default=[1e-3, 3e-4, 1e-4, 3e-5, 1e-5],
                   help="annulus widths for the gradient scaling fit")

    s = sub.add_parser("eig", parents=[common], formatter_class=fmt,
                       help="radial Dirichlet eigenvalues of the unit ball")
    s.add_argument("--dim", type=int, default=None, help="dimension N >= 3 (required)")
    s.add_argument("--count", type=int, default=5, help="how many eigenvalues")

    s = sub.add_parser("sobolev", parents=[common], formatter_class=fmt,
                       help="minimize the shifted Sobolev quotient")
    s.add_argument("--dim", type=int, default=None, help="dimension N >= 3 (required)")
    s.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="lambda; default (N-1)^2/4")
    s.add_argument("--p", type=_p_value, default="critical", help="exponent or 'critical'")
    s.add_argument("--grid", type=int, default=400, help="finite-element nodes")
    s.add_argument("--grading", type=float, default=3.0, help="grid grading exponent")
    s.add_argument("--starts", type=int, default=6, help="random bubble starts")
    s.add_argument("--maxiter", type=int, default=3000, help="L-BFGS iterations per start")
    return parser


def _read_config(path: str) -> tuple[dict, str]:
    raw = Path(path).read_bytes()
    cfg = {}
    for n, line in enumerate(raw.decode().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = (x.strip() for x in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg, hashlib.sha256(raw).hexdigest()


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required")
    digest = ""
    if args.config:
        try:
            cfg, digest = _read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        aliases = {"lambda": "lam", "in": "inp"}
        given = {a.dest for a in sub._actions
                 if any(t == o or t.startswith(o + "=") for o in a.option_strings for t in argv)}
        for key, val in cfg.items():
            dest = aliases.get(key, key)
            if dest not in actions or dest in ("config", "help"):
                raise UsageError(f"unknown config key {key!r}")
            if dest in given:
                continue
            act = actions[dest]
            try:
                setattr(args, dest, act.type(val) if act.type else val)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"bad config value for {key}: {exc}")
    else:
        digest = hashlib.sha256(b"").hexdigest()
    return args, digest


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            flag = {"lam": "--lambda", "inp": "--in"}.get(n, "--" + n)
            raise UsageError(f"{flag} is required")


def _params(args):
    try:
        return make_params(args.dim, args.lam, args.p)
    except ValueError as exc:
        raise UsageError(str(exc))


def _controls(args) -> Controls:
    try:
        return Controls(r_max=args.rmax, tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc))


def _grid(args):
    if args.grid_n < 0 or not (0 < args.grid_lo < args.grid_hi):
        raise UsageError("amplitude grid needs 0 < grid-lo < grid-hi and grid-n >= 0")
    if args.grid_n == 0:
        return np.empty(0)
    return default_grid(args.grid_lo, args.grid_hi, args.grid_n)


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get("HYPERBN_OUT") or "hyperbn_out")


def _public_args(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose",)}


def _profile_rows(profile, params):
    v = gauge_transform(profile, "to_euclidean", params).values
    s = np.tanh(0.5 * profile.radii)
    return zip(profile.radii, s, profile.values, profile.derivs, v)


# ---------------------------------------------------------------- commands


def cmd_solve(args, digest) -> int:
    _need(args, "dim", "lam")
    params = _params(args)
    controls = _controls(args)
    if not 0 <= args.nodes <= 4:
        raise UsageError("--nodes must lie in 0..4")
    grid = _grid(args)
    out = RunWriter(_out_dir(args))
    if grid.size == 0:
        log.error("empty amplitude grid")
        return EXIT_EMPTY
    k = args.nodes
    brackets = bracket_scan(params, grid, controls)
    chosen = next((b for b in brackets if b.key_lo <= k < b.key_hi), None)
    if chosen is None:
        log.error("no bracket for %d nodes on the amplitude grid", k)
        summary = {"status": "no-bracket", "nodes": k, "brackets": [list(b.as_tuple()) for b in brackets]}
        out.json("solution.json", summary)
        out.manifest("solve", _public_args(args), digest, summary)
        return EXIT_EMPTY
    try:
        rec = find_knode(params, k, (chosen.a_lo, chosen.a_hi), tol_a=args.tol_a, controls=controls)
    except (RuntimeError, FloatingPointError) as exc:
        log.error("solve failed: %s", exc)
        return EXIT_NUMERIC
    summary = rec.summary()
    summary["status"] = "ok"
    summary["profile_meta"] = {"decay_tail": rec.profile.decaying, "gauge": rec.profile.gauge}
    out.csv("profile.csv", ["r", "s", "u", "u_prime", "v"], _profile_rows(rec.profile, params))
    out.json("solution.json", summary)
    out.manifest("solve", _public_args(args), digest, {
        "amplitude": rec.amplitude, "nodes": rec.nodes, "energy_J": rec.energy_J,
        "nehari_residual": rec.nehari_residual, "fitted_decay": rec.fitted_decay,
        "pohozaev_max_relative": max(abs(x[1]) for x in rec.pohozaev_residuals)})
    print(f"amplitude {rec.amplitude:.17g} nodes {rec.nodes} energy {rec.energy_J:.17g}")
    return EXIT_OK


def cmd_scan(args, digest) -> int:
    _need(args, "dim", "lam")
    params = _params(args)
    controls = _controls(args)
    grid = _grid(args)
    try:
        rep = nonexistence_scan(params, grid, controls)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = RunWriter(_out_dir(args))
    d = rep.to_dict()
    out.json("scan.json", d)
    out.csv("shots.csv", ["amplitude", "class", "nodes", "key"],
            zip(rep.amplitudes, rep.classes, rep.nodes, rep.keys))
    out.manifest("scan", _public_args(args), digest,
                 {"verdict": rep.verdict, "n_decay": d["n_decay"], "n_shots": len(rep.amplitudes)})
    print(rep.verdict)
    return EXIT_EMPTY if not rep.amplitudes else EXIT_OK


def cmd_branch(args, digest) -> int:
    _need(args, "dim", "lam")
    if not 0 <= args.nodes <= 4:
        raise UsageError("--nodes must lie in 0..4")
    if args.dim is None or args.dim < 3:
        raise UsageError("--dim must be >= 3")
    pc = critical_exponent(args.dim)
    plist = args.p_list or [pc - 1.0 / n for n in range(2, 11)]
    plist = [pc if p == "critical" else float(p) for p in plist]
    try:
        base = make_params(args.dim, args.lam, plist[0])
    except ValueError as exc:
        raise UsageError(str(exc))
    controls = _controls(args)
    grid = _grid(args)
    try:
        br = subcritical_sequence(base, args.nodes, plist, controls, a_grid=grid, tol_a=args.tol_a)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = RunWriter(_out_dir(args))
    d = br.to_dict()
    try:
        d["compactness"] = compactness_check(br)
    except ValueError as exc:
        d["compactness"] = None
        d["notes"].append(f"compactness check skipped: {exc}")
    diffs = [math.nan] + br.sup_diffs
    out.csv("branch.csv", ["p", "amplitude", "energy_J", "bound_ratio_52", "sup_diff"],
            zip(br.p_sequence, br.amplitudes, br.energies, br.ratios_52, diffs))
    out.json("branch.json", d)
    out.manifest("branch", _public_args(args), digest,
                 {"verdict": br.verdict, "records": len(br.records), "failed_p": br.failed_p})
    print(br.verdict)
    return EXIT_OK if br.records else EXIT_EMPTY


def _load_run(inp: Path):
    sol = json.loads((inp / "solution.json").read_text())
    if sol.get("status") != "ok":
        raise UsageError(f"{inp} holds no solution")
    pd = sol["params"]
    params = make_params(pd["N"], pd["lambda"], pd["p"])
    with open(inp / "profile.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    r = np.array([float(x["r"]) for x in rows])
    u = np.array([float(x["u"]) for x in rows])
    up = np.array([float(x["u_prime"]) for x in rows])
    meta = {"decay_tail": bool(sol.get("profile_meta", {}).get("decay_tail", False)),
            "shot_class": "Decay"}
    return RadialProfile(r, u, up, HYPERBOLIC, params, meta), params, sol


def cmd_verify(args, digest) -> int:
    _need(args, "inp")
    inp = Path(args.inp)
    try:
        prof, params, sol = _load_run(inp)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read run directory: {exc}")
    vprof = gauge_transform(prof, "to_euclidean", params)
    report = {"source": str(inp), "params": params.to_dict()}
    try:
        poh = pohozaev_check(vprof, params, [float(x) for x in args.radii])
        report["pohozaev"] = poh.to_dict()
        report["fitted_decay"] = fit_tail_decay(prof)
        r51, r52 = uniform_bound_ratios(prof)
        report["bound_ratio_51"], report["bound_ratio_52"] = r51, r52
        try:
            report["annulus_alpha"] = annulus_gradient_scaling(vprof, [float(x) for x in args.eps])
        except ValueError as exc:
            report["annulus_alpha"] = None
            report["annulus_error"] = str(exc)
    except (ValueError, FloatingPointError) as exc:
        log.error("verification failed: %s", exc)
        return EXIT_NUMERIC
    out = RunWriter(Path(args.out) if args.out else inp)
    out.json("verify.json", report)
    out.manifest("verify", _public_args(args), digest, {
        "pohozaev_relative": poh.relative_residual, "flagged": poh.flagged,
        "fitted_decay": report["fitted_decay"]})
    for R, rel in zip(poh.radii_R, poh.relative_residual):
        print(f"R={R:.6f} relative_residual={rel:.3e}")
    return EXIT_OK


def cmd_eig(args, digest) -> int:
    _need(args, "dim")
    if args.dim < 3 or args.count < 1:
        raise UsageError("need --dim >= 3 and --count >= 1")
    vals = radial_dirichlet_eigenvalues(args.dim, args.count)
    out = RunWriter(_out_dir(args))
    out.json("eig.json", {"N": args.dim, "count": args.count, "eigenvalues": vals})
    out.csv("eig.csv", ["k", "eigenvalue"], zip(range(1, len(vals) + 1), vals))
    out.manifest("eig", _public_args(args), digest, {"eigenvalues": vals})
    for v in vals:
        print(f"{v:.10f}")
    return EXIT_OK


def cmd_sobolev(args, digest) -> int:
    _need(args, "dim")
    if args.dim < 3:
        raise UsageError("--dim must be >= 3")
    lam = args.lam if args.lam is not None else (args.dim - 1) ** 2 / 4.0
    try:
        params = make_params(args.dim, lam, args.p)
        fc = FamilyControls(n_nodes=args.grid, grading=args.grading, n_starts=args.starts,
                            maxiter=args.maxiter, seed=args.seed)
        est = minimize_quotient(params, controls=fc)
    except ValueError as exc:
        raise UsageError(str(exc))
    except FloatingPointError as exc:
        log.error("minimization failed: %s", exc)
        return EXIT_NUMERIC
    out = RunWriter(_out_dir(args))
    d = est.to_dict()
    d["params"] = params.to_dict()
    out.json("sobolev.json", d)
    out.csv("minimizer.csv", ["s", "v"], zip(est.s, est.v))
    out.manifest("sobolev", _public_args(args), digest, {"estimate": est.estimate})
    print(f"{est.estimate:.12g}")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "scan": cmd_scan,
    "branch": cmd_branch,
    "verify": cmd_verify,
    "eig": cmd_eig,
    "sobolev": cmd_sobolev,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, digest = _parse(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        return COMMANDS[args.command](args, digest)
    except UsageError as exc:
        print(f"hyperbn: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
