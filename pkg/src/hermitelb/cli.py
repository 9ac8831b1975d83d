"""Command-line entry point. Every subcommand writes CSV (default) or JSON.

Exit codes: 0 success, 1 I/O failure, 2 invalid model or domain error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Iterable

import numpy as np

from .analysis import cdf, ccdf, exp_ccdf, tail_report
from .elb_reference import compare_table
from .equilibrium import FlowState, default_order, edf, max_speed
from .lattice_model import LatticeSet, ModelParams, theta_validity_range, weights
from .lbgk_solver import ShockTube, SolverConfig, run, tau_for_viscosity
from .moments import admissible_reference_thetas, coefficient_report, reference_theta

EXIT_OK, EXIT_IO, EXIT_DOMAIN = 0, 1, 2


class DomainError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


class Table:
    def __init__(self, columns: list, rows: Iterable, meta: dict | None = None):
        self.columns = columns
        self.rows = [list(r) for r in rows]
        self.meta = meta or {}

    def to_csv(self) -> str:
        lines = [f"# {k}={fmt(v)}" for k, v in self.meta.items()]
        lines.append(",".join(self.columns))
        lines.extend(",".join(fmt(v) for v in r) for r in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "meta": {k: jsonable(v) for k, v in self.meta.items()},
            "columns": self.columns,
            "rows": [{c: jsonable(v) for c, v in zip(self.columns, r)} for r in self.rows],
        }
        return json.dumps(doc, indent=1) + "\n"


def parse_lattice(text: str) -> LatticeSet:
    try:
        lat = LatticeSet.parse(text)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    if not lat.on_cartesian:
        print(f"warning: lattice {lat.speeds} is off-Cartesian", file=sys.stderr)
    return lat


def resolve_theta(lat: LatticeSet, mu: float, theta: str, root_index: int = 0) -> float:
    if theta != "auto":
        try:
            return float(theta)
        except ValueError as exc:
            raise DomainError(f"bad theta {theta!r}") from exc
    roots = admissible_reference_thetas(lat, mu)
    if not roots:
        raise DomainError("no real reference temperature with positive weights")
    if not 0 <= root_index < len(roots):
        raise DomainError(f"root index {root_index} out of range (found {len(roots)})")
    return roots[root_index]


def _model(args) -> ModelParams:
    lat = parse_lattice(args.lattice)
    th = resolve_theta(lat, args.mu, args.theta, args.root_index)
    return ModelParams(lat, args.mu, th)


def cmd_weights(args) -> Table:
    m = _model(args)
    w = weights(m)
    meta = {"lattice": " ".join(fmt(c) for c in m.lattice.speeds), "mu": m.mu, "theta": m.theta, "positive": w.positive}
    return Table(["velocity", "weight"], zip(w.velocities.tolist(), w.values.tolist()), meta)


def cmd_theta0(args) -> Table:
    lat = parse_lattice(args.lattice)
    rows = []
    for i, r in enumerate(reference_theta(lat, args.mu)):
        rows.append([i, r.value.real, r.value.imag, "real" if r.is_real else "complex", r.positive_weights])
    return Table(["index", "real", "imag", "kind", "positive_weights"], rows, {"mu": args.mu})


def cmd_range(args) -> Table:
    lat = parse_lattice(args.lattice)
    ivs = theta_validity_range(lat, args.mu)
    return Table(["theta_min", "theta_max", "largest"], [[lo, hi, i == 0] for i, (lo, hi) in enumerate(ivs)], {"mu": args.mu})


def cmd_report(args) -> Table | str:
    m = _model(args)
    rep = coefficient_report(m, args.order)
    if args.text:
        return rep.as_text() + "\n"
    cols = ["name", "M", "u_power", "theta_power", "computed", "target", "matched", "condition"]
    rows = [[r.name, r.M, r.u_power, r.theta_power, r.computed, r.target, r.matched, r.condition] for r in rep.rows]
    return Table(cols, rows, {"mu": m.mu, "theta": m.theta, "order": rep.order_n, "theta_ref": rep.theta_ref})


def cmd_umax(args) -> Table:
    m = _model(args)
    N = args.order or default_order(m.lattice.n_q)
    u = max_speed(m, N, args.rho, args.tol)
    return Table(["u_max"], [[u]], {"mu": m.mu, "theta": m.theta, "order": N, "tol": args.tol})


def cmd_ccdf(args) -> Table:
    if (args.lattice is None) == (args.z is None):
        raise DomainError("give exactly one of --lattice or --z")
    lat = parse_lattice(args.lattice) if args.lattice else LatticeSet.consecutive(args.z)
    m = ModelParams(lat, args.mu, resolve_theta(lat, args.mu, args.theta, args.root_index))
    w = weights(m)
    rows = [[c, wt, cdf(w, c), ccdf(w, c), exp_ccdf(args.s, c)] for c, wt in zip(w.velocities.tolist(), w.values.tolist())]
    rep = tail_report(m)
    meta = {"n_q": lat.n_q, "mu": m.mu, "theta": m.theta, "s": args.s, "kurtosis": rep.kurtosis, "positive": w.positive}
    return Table(["velocity", "weight", "cdf", "ccdf", "exp_ccdf"], rows, meta)


def cmd_edf(args) -> Table:
    m = _model(args)
    N = args.order or default_order(m.lattice.n_q)
    rows = []
    for u in args.u:
        f = edf(m, FlowState(args.rho, u), N)
        rows.extend([u, c, v] for c, v in zip(f.velocities.tolist(), f.values.tolist()))
    return Table(["u", "velocity", "value"], rows, {"mu": m.mu, "theta": m.theta, "rho": args.rho, "order": N})


def cmd_elb_compare(args) -> Table:
    cols = ["row", "rho", "u", "theta", "mu", "j", "P", "Q", "res_j", "res_P_mb", "res_P_mu", "res_Q_mb"]
    rows = []
    for r in compare_table(args.rho, args.u, args.theta, args.c1):
        rows.append([getattr(r, c if c not in ("j", "P", "Q") else c) for c in cols])
    return Table(cols, rows, {"c1": args.c1})


SHOCK_DEFAULTS = {
    "lattice": None, "mu": 0.0, "theta": None, "theta0": False, "root_index": 0, "nu": 1 / 30,
    "nodes": 8000, "steps": 3000, "snapshot_every": 0, "order": None, "threads": 1,
    "rho_left": 1.0, "rho_right": 0.5,
}


def cmd_shocktube(args) -> Table:
    opts = dict(SHOCK_DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(SHOCK_DEFAULTS)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        opts.update(cfg)
    for k in SHOCK_DEFAULTS:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            opts[k] = v
    if opts["lattice"] is None:
        raise DomainError("--lattice is required")
    if (opts["theta"] is None) == (not opts["theta0"]):
        raise DomainError("give exactly one of --theta or --theta0")
    lat = parse_lattice(str(opts["lattice"]))
    mu = float(opts["mu"])
    th = resolve_theta(lat, mu, "auto" if opts["theta0"] else str(opts["theta"]), int(opts["root_index"]))
    model = ModelParams(lat, mu, th)
    config = SolverConfig(
        model, int(opts["nodes"]), int(opts["steps"]), tau_for_viscosity(model, float(opts["nu"])),
        order_n=opts["order"], init=ShockTube(float(opts["rho_left"]), float(opts["rho_right"])),
        snapshot_every=int(opts["snapshot_every"]), threads=int(opts["threads"]),
    )
    res = run(config)
    rows = []
    for snap in res.snapshots:
        for x, (r, u) in enumerate(zip(snap.rho.tolist(), snap.u.tolist()), start=1):
            rows.append([snap.step, x, r, u])
    meta = {"mu": mu, "theta": th, "tau": config.tau, "order": config.order_n, "mass_drift": res.last.mass / res.initial_mass - 1, "momentum": res.last.momentum}
    return Table(["step", "node", "rho", "u"], rows, meta)


def _float_list(text: str) -> list:
    return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hermitelb", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True, theta=True):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", help="output file (default stdout)")
        if model:
            sp.add_argument("--lattice", required=True, help='positive speeds, e.g. "1,3", "1 2 3", "0,±1,±2" or "1..5"')
            sp.add_argument("--mu", type=float, default=0.0)
        if theta:
            sp.add_argument("--theta", default="auto", help='temperature, or "auto" for the reference root')
            sp.add_argument("--root-index", type=int, default=0, help="which admissible reference root (ascending) auto picks")

    sp = sub.add_parser("weights", help="quadrature weights; columns velocity,weight")
    common(sp)
    sp.set_defaults(func=cmd_weights)

    sp = sub.add_parser("theta0", help="reference temperatures; columns index,real,imag,kind,positive_weights")
    common(sp, theta=False)
    sp.set_defaults(func=cmd_theta0)

    sp = sub.add_parser("range", help="temperature intervals with positive weights; columns theta_min,theta_max,largest")
    common(sp, theta=False)
    sp.set_defaults(func=cmd_range)

    sp = sub.add_parser("report", help="moment coefficient table; columns name,M,u_power,theta_power,computed,target,matched,condition")
    common(sp)
    sp.add_argument("--order", type=int, help="Hermite order N (default by lattice size)")
    sp.add_argument("--text", action="store_true", help="aligned text table instead of CSV/JSON")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("umax", help="largest speed with non-negative populations; column u_max")
    common(sp)
    sp.add_argument("--order", type=int)
    sp.add_argument("--rho", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.set_defaults(func=cmd_umax)

    sp = sub.add_parser("ccdf", help="weight CDF/CCDF; columns velocity,weight,cdf,ccdf,exp_ccdf")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out")
    sp.add_argument("--lattice")
    sp.add_argument("--z", type=int, help="consecutive integer lattice 1..z")
    sp.add_argument("--mu", type=float, default=0.0)
    sp.add_argument("--theta", required=True)
    sp.add_argument("--root-index", type=int, default=0)
    sp.add_argument("--s", type=float, default=1.0, help="rate of the exponential comparison")
    sp.set_defaults(func=cmd_ccdf)

    sp = sub.add_parser("edf", help="equilibrium populations; columns u,velocity,value")
    common(sp)
    sp.add_argument("--u", type=_float_list, default=[0.0], help="comma-separated flow speeds")
    sp.add_argument("--rho", type=float, default=1.0)
    sp.add_argument("--order", type=int)
    sp.set_defaults(func=cmd_edf)

    sp = sub.add_parser("elb-compare", help="three-velocity moment residuals per equilibrium row")
    common(sp, model=False, theta=False)
    sp.add_argument("--rho", type=float, default=1.0)
    sp.add_argument("--u", type=float, default=0.1)
    sp.add_argument("--theta", type=float, default=1 / 3)
    sp.add_argument("--c1", type=float, default=1.0)
    sp.set_defaults(func=cmd_elb_compare)

    sp = sub.add_parser("shocktube", help="periodic shock tube; columns step,node,rho,u")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out")
    sp.add_argument("--config", help="JSON file whose keys mirror the flags below")
    sp.add_argument("--lattice")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--theta0", action="store_true", help="use the reference temperature")
    sp.add_argument("--root-index", type=int)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--nodes", type=int)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--snapshot-every", type=int)
    sp.add_argument("--order", type=int)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--rho-left", type=float)
    sp.add_argument("--rho-right", type=float)
    sp.set_defaults(func=cmd_shocktube)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (DomainError, ValueError, ArithmeticError, KeyError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if isinstance(result, str):
        text = result
    else:
        text = result.to_json() if args.format == "json" else result.to_csv()
    try:
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
