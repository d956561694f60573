"""Command-line front end.

Numbers are printed with 12 significant digits; JSON output carries them as
decimal strings so that golden files do not depend on float printing.
Exit codes: 0 success, 2 domain or usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .demand import (demand_bb, demand_deviation_dictator, demand_deviation_threshold,
                     demand_mc, deviation_demand_mc)
from .distributions import PiecewiseLinearCdf, TiltedExponential, Uniform
from .equilibrium import (dictator_range, threshold_range, verify_symmetric_equilibrium)
from .errors import DomainError, NumericalError, UnsupportedError
from .mechanisms import Mechanism, parse_mechanism
from .montecarlo import default_workers
from .search import MarketConfig, compute_cbar
from .welfare import format_number, rows_to_csv, surplus_curve

EXIT_DOMAIN = 2
EXIT_NUMERIC = 3


class UsageError(DomainError):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, (bool, np.bool_, str)):
        return bool(obj) if isinstance(obj, np.bool_) else obj
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return format_number(obj)


def _grid(text: str, name: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"{name} must look like lo:hi:n") from None
    if n < 1:
        raise UsageError(f"{name} is empty")
    return np.linspace(lo, hi, n)


def _dist(args):
    spec = args.dist
    if spec == "uniform":
        return Uniform(V=args.V)
    if spec == "tiltedexp":
        return TiltedExponential(k=args.k, V=args.V)
    if spec.startswith("pwl:"):
        path = Path(spec[4:])
        if not path.is_file():
            raise UsageError(f"prior file {path} not found")
        return PiecewiseLinearCdf.from_json(path)
    raise UsageError(f"unknown --dist {spec!r}")


def _costs(args) -> list[float]:
    if (args.c is None) == (args.c_grid is None):
        raise UsageError("give exactly one of --c and --c-grid")
    if args.c is not None:
        return [args.c]
    return [float(c) for c in _grid(args.c_grid, "--c-grid")]


def _single_cost(args) -> float:
    if args.c is None or args.c_grid is not None:
        raise UsageError("this command needs --c (not --c-grid)")
    return args.c


def _need_seed(args):
    if args.seed is None:
        raise UsageError("--seed is required whenever simulation is involved")
    return args.seed


def _announce(configs: list[MarketConfig]):
    regime = "main" if all(c.regime == "main" for c in configs) else "degenerate"
    print(f"regime={regime}", file=sys.stderr)
    if regime != "main":
        print("warning: inspection cost outside the main regime 0 < c < cbar", file=sys.stderr)
    return regime


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, doc):
    _emit(args, json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n")


def _emit_table(args, header, rows, key="rows", extra=None):
    if args.format == "json":
        doc = dict(extra or {})
        doc[key] = [dict(zip(header, r)) for r in rows]
        _emit_json(args, doc)
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([format_number(v) if not isinstance(v, str) else v for v in r])
    _emit(args, buf.getvalue())


def cmd_theta(args):
    dist = _dist(args)
    cfg = MarketConfig(args.m, _single_cost(args), dist)
    regime = _announce([cfg])
    doc = {"c": cfg.c, "theta0": cfg.theta0, "cbar": compute_cbar(dist), "regime": regime}
    doc.update(cfg.flags())
    _emit_json(args, doc)


def cmd_demand(args):
    cfg = MarketConfig(args.m, _single_cost(args), _dist(args))
    regime = _announce([cfg])
    cfg.require_main()
    if args.x_grid is None:
        raise UsageError("demand needs --x-grid lo:hi:n")
    xs = _grid(args.x_grid, "--x-grid")
    seed = _need_seed(args)
    rows = []
    for j, x in enumerate(xs):
        x = float(x)
        d_mc, se = deviation_demand_mc(cfg, x, "dictator", n=args.n, seed=seed + j,
                                       workers=args.workers)
        rows.append((x, demand_deviation_dictator(cfg, x), demand_deviation_threshold(cfg, x),
                     demand_bb(cfg, x), d_mc, se))
    header = ("x", "D_c", "D_tilde", "D_bb", "D_mc", "D_mc_stderr")
    _emit_table(args, header, rows, extra={"regime": regime, "c": cfg.c, "m": cfg.m})


def _range_kind(spec: str) -> str:
    kind = spec.split(":")[0].lower()
    if kind not in ("dictator", "threshold"):
        raise UsageError("range supports --mech dictator or threshold")
    return kind


def cmd_range(args):
    dist = _dist(args)
    kind = _range_kind(args.mech or "dictator")
    cfgs = [MarketConfig(args.m, c, dist) for c in _costs(args)]
    regime = _announce(cfgs)
    results = []
    for cfg in cfgs:
        cfg.require_main()
        rng = dictator_range(cfg) if kind == "dictator" else threshold_range(cfg)
        results.append({"mechanism": kind, "c": cfg.c, "t_star": rng.lo, "upper": rng.hi,
                        "empty": rng.empty})
    if args.format == "csv":
        rows = [(r["mechanism"], r["c"], r["t_star"], r["upper"], format_number(r["empty"]))
                for r in results]
        _emit_table(args, ("mechanism", "c", "t_star", "upper", "empty"), rows)
        return
    doc = dict(results[0]) if len(results) == 1 else {"rows": results}
    doc["regime"] = regime
    _emit_json(args, doc)


def _mechanism(args) -> Mechanism:
    if not args.mech:
        raise UsageError("--mech is required")
    spec = args.mech
    if ":" not in spec and spec in ("dictator", "threshold"):
        if args.t is None:
            raise UsageError(f"{spec} needs a target price (--mech {spec}:<t> or --t)")
        spec = f"{spec}:{args.t}"
    return parse_mechanism(spec)


def cmd_verify(args):
    cfg = MarketConfig(args.m, _single_cost(args), _dist(args))
    regime = _announce([cfg])
    cfg.require_main()
    mech = _mechanism(args)
    t = mech.t if args.t is None else args.t
    if t is None:
        raise UsageError("verify needs a symmetric price --t")
    ok, witness = verify_symmetric_equilibrium(cfg, mech, t)
    _emit_json(args, {"mechanism": str(mech), "c": cfg.c, "t": t, "equilibrium": ok,
                      "witness": witness.to_dict() if witness else None, "regime": regime})


def cmd_sweep(args):
    dist = _dist(args)
    if args.c_grid is None:
        raise UsageError("sweep needs --c-grid lo:hi:n")
    costs = _costs(args)
    cfgs = [MarketConfig(args.m, c, dist) for c in costs]
    _announce(cfgs)
    seed = None if args.m == 2 else _need_seed(args)
    rows = surplus_curve(dist, args.m, costs, n=args.n, seed=seed, workers=args.workers)
    if args.format == "json":
        _emit_json(args, {"rows": [r.__dict__ for r in rows]})
    else:
        _emit(args, rows_to_csv(rows))


def cmd_simulate(args):
    cfg = MarketConfig(args.m, _single_cost(args), _dist(args))
    regime = _announce([cfg])
    seed = _need_seed(args)
    if args.prices:
        try:
            prices = np.array([float(p) for p in args.prices.split(",")])
        except ValueError:
            raise UsageError("--prices must be a comma-separated list") from None
    else:
        if args.t is None:
            raise UsageError("simulate needs --t (symmetric price) or --prices")
        prices = np.full(cfg.m, args.t)
    if len(prices) != cfg.m:
        raise UsageError(f"--prices needs {cfg.m} entries")
    mech = parse_mechanism(args.mech) if args.mech else Mechanism("plain")
    est = demand_mc(cfg, prices, mech.allocate(prices), n=args.n, seed=seed, workers=args.workers)
    doc = {"mechanism": str(mech), "c": cfg.c, "prices": prices.tolist(), "regime": regime}
    doc.update(est.to_dict())
    _emit_json(args, doc)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", default="uniform", help="uniform | tiltedexp | pwl:<file>")
    common.add_argument("--V", type=float, default=2.0, help="support lower bound")
    common.add_argument("--k", type=float, default=1.0, help="tilt of the tilted-exponential prior")
    common.add_argument("--m", type=int, default=2, help="number of sellers")
    common.add_argument("--c", type=float, help="inspection cost")
    common.add_argument("--c-grid", help="cost grid lo:hi:n")
    common.add_argument("--mech", help="plain | lpf | dictator:<t> | threshold:<t>")
    common.add_argument("--t", type=float, help="symmetric price")
    common.add_argument("--x-grid", help="deviation grid lo:hi:n")
    common.add_argument("--n", type=int, default=100_000, help="Monte Carlo sample count")
    common.add_argument("--seed", type=int, help="master seed for simulation")
    common.add_argument("--workers", type=int, default=None, help="simulation threads")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="prominence", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("theta", parents=[common], help="reservation value and cost threshold")
    sub.add_parser("demand", parents=[common], help="deviation demand on an x-grid")
    sub.add_parser("range", parents=[common], help="implementable equilibrium price interval")
    sub.add_parser("verify", parents=[common], help="check a symmetric equilibrium")
    sub.add_parser("sweep", parents=[common], help="welfare and surplus frontier over costs")
    simulate = sub.add_parser("simulate", parents=[common], help="simulated demand for a profile")
    simulate.add_argument("--prices", help="comma-separated price profile")
    return parser


COMMANDS = {
    "theta": cmd_theta,
    "demand": cmd_demand,
    "range": cmd_range,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
}


GRID_FLAGS = ("--c-grid", "--x-grid")


def _attach_grid_values(argv: list[str]) -> list[str]:
    # grid values such as -1:0:5 start with a dash; bind them to their flag
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in GRID_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_grid_values(argv))
    if args.workers is None:
        args.workers = default_workers()
    if args.format is None:
        args.format = "csv" if args.command in ("demand", "sweep") else "json"
    try:
        COMMANDS[args.command](args)
    except (DomainError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
