"""Command-line front end.

Exit codes: 0 on success, 1 on usage or config errors, 2 when a computed
equilibrium fails its KKT check. Parameter flags override values from the
config file, which override built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import metadata
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config_io import (ConfigError, canonical_text, config_from_dict, digest, load_document,
                        solver_settings)
from .equilibrium_solver import SolverOptions, solve_equilibrium
from .exceptions import SpecShareError
from .experiments import (DerivedAxis, SweepSpec, auction_compare, figure_jobs, run_figure,
                          run_sweep, write_outputs)
from .welfare import welfare_report

EXIT_OK, EXIT_USAGE, EXIT_KKT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse reports usage errors with exit code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _add_overrides(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("overrides (flags > config file > defaults)")
    g.add_argument("--alpha", type=float, help="availability of the shared band")
    g.add_argument("--beta", type=float, help="open-access fraction of the shared band W; "
                   "the licensed rest is split equally among SPs")
    g.add_argument("--W", type=float, help="total shared bandwidth")
    g.add_argument("--B", type=_floats, help="proprietary bandwidths, comma list (one value "
                   "applies to every SP)")
    g.add_argument("--N", type=int, help="number of SPs; replicates SP 1's endowment")
    g.add_argument("--d", type=float, help="degradation of the open-access band")
    g.add_argument("--seed", type=int, help="solver seed")
    g.add_argument("--tol", type=float, help="best-response tolerance")


def apply_overrides(doc: dict, args) -> tuple:
    """Merge flag values into a parsed config document.

    Returns:
        ``(config, solver_settings)``.
    """
    doc = json.loads(json.dumps(doc))
    market = doc.setdefault("market", {})
    sps = doc.setdefault("sp", {})
    if args.N is not None:
        if args.N < 1:
            raise ConfigError(f"--N: must be >= 1, got {args.N}")
        first = sps.get("1", {"proprietary_bw": 1.0})
        doc["sp"] = sps = {str(k): dict(first) for k in range(1, args.N + 1)}
    if args.B is not None:
        n = len(sps) or len(args.B)
        vals = args.B * n if len(args.B) == 1 else args.B
        if len(vals) != n:
            raise ConfigError(f"--B: expected 1 or {n} values, got {len(args.B)}")
        if not sps:
            sps.update({str(k): {} for k in range(1, n + 1)})
        for k, v in zip(sorted(sps, key=int), vals):
            sps[k]["proprietary_bw"] = v
    if args.alpha is not None:
        market["availability"] = args.alpha
    if args.d is not None:
        market["degradation"] = args.d
    if args.W is not None or args.beta is not None:
        lic_total = sum(sum(e.get("licensed_shared_bws", [])) for e in sps.values())
        W = args.W if args.W is not None else market.get(
            "total_shared_bw", lic_total + market.get("open_access_bw", 0.0))
        if args.beta is not None:
            beta = args.beta
        else:
            beta = market.get("open_access_bw", 0.0) / W if W > 0 and lic_total + market.get(
                "open_access_bw", 0.0) > 0 else 1.0
        if not 0.0 <= beta <= 1.0:
            raise ConfigError(f"--beta: must lie in [0, 1], got {beta}")
        if W < 0:
            raise ConfigError(f"--W: must be >= 0, got {W}")
        market["open_access_bw"] = beta * W
        market["total_shared_bw"] = W
        share = (1.0 - beta) * W / len(sps)
        for e in sps.values():
            e["licensed_shared_bws"] = [share] if share > 0 else []
    solver = solver_settings(doc)
    if args.seed is not None:
        solver["seed"] = args.seed
    if args.tol is not None:
        solver["tolerance"] = args.tol
    return config_from_dict(doc), solver


def _options(solver: dict) -> SolverOptions:
    kw = {}
    if "seed" in solver:
        kw["seed"] = int(solver["seed"])
    if "tolerance" in solver:
        kw["tolerance"] = float(solver["tolerance"])
    if "restarts" in solver:
        kw["restarts"] = int(solver["restarts"])
    if "max_iterations" in solver:
        kw["max_iterations"] = int(solver["max_iterations"])
    return SolverOptions(**kw)


def _manifest(argv, config_digest, seed, started, outputs) -> dict:
    return {"command_line": list(argv), "config_digest": config_digest, "seed": seed,
            "tool_version": _version(), "wall_time_s": round(time.perf_counter() - started, 6),
            "output_paths": [str(p) for p in outputs]}


def cmd_solve(args, argv) -> int:
    doc = load_document(args.config)
    config, solver = apply_overrides(doc, args)
    text = canonical_text(config, solver)
    if args.dump_config:
        Path(args.dump_config).write_text(text)
    result = solve_equilibrium(config, _options(solver))
    rep = welfare_report(config, result)
    alloc = result.allocation
    kkt = result.kkt
    out = {
        "config_digest": digest(text),
        "x": alloc.licensed_qty.tolist(),
        "w": alloc.open_qty.tolist(),
        "p": result.prices.licensed_prices.tolist(),
        "p_w": result.prices.open_prices.tolist(),
        "delivered_price": result.prices.delivered_price,
        "revenues": result.revenues.tolist(),
        "cs": rep.consumer_surplus,
        "sw": rep.social_welfare,
        "welfare": rep.as_dict(),
        "kkt": {
            "passed": kkt.passed,
            "max_stationarity_violation": kkt.max_stationarity_violation,
            "max_complementarity_violation": kkt.max_complementarity_violation,
            "prices_nonnegative": kkt.prices_nonnegative,
            "congestion_ordering": kkt.congestion_ordering,
            "active_set": [list(a) for a in kkt.active_set],
            "tolerance": kkt.tolerance,
        },
        "vacating_sps": sorted(i + 1 for i in result.vacating_sps),
        "iterations": result.iterations,
        "residual": result.residual,
        "restart_spread": result.restart_spread,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK if kkt.passed else EXIT_KKT


def cmd_figure(args, argv) -> int:
    jobs = figure_jobs()
    if args.job not in jobs:
        raise UsageError(f"unknown job {args.job!r}; available jobs: {', '.join(sorted(jobs))}")
    started = time.perf_counter()
    seed = args.seed or 0
    paths = run_figure(args.job, args.out_dir, seed=seed)
    print(json.dumps(_manifest(argv, digest(args.job), seed, started, paths), indent=2))
    return EXIT_OK


def _spec_from_doc(doc: dict) -> SweepSpec:
    sweep = doc.get("sweep")
    if not isinstance(sweep, dict):
        raise ConfigError("sweep: a [sweep] table is required")
    if "axis" not in sweep:
        raise ConfigError("sweep.axis: missing")
    if "grid" in sweep:
        grid = sweep["grid"]
    elif {"start", "stop", "num"} <= set(sweep):
        grid = np.linspace(sweep["start"], sweep["stop"], int(sweep["num"])).tolist()
    else:
        raise ConfigError("sweep.grid: give a list or start/stop/num")
    derived = tuple(DerivedAxis(d["param"], d.get("scale", 1.0), d.get("power", 1.0))
                    for d in sweep.get("derived", []))
    base = config_from_dict(doc)
    return SweepSpec(base, sweep["axis"], tuple(grid), derived,
                     tuple(sweep.get("outputs", ("cs", "sw"))), int(sweep.get("seed", 0)),
                     sweep.get("name", "sweep"))


def cmd_sweep(args, argv) -> int:
    doc = load_document(args.spec)
    spec = _spec_from_doc(doc)
    if args.seed is not None:
        spec = SweepSpec(spec.base_config, spec.axis, spec.grid, spec.derived_axes,
                         spec.outputs, args.seed, spec.name)
    started = time.perf_counter()
    table = run_sweep(spec)
    params = {"axis": spec.axis, "grid": list(spec.grid), "outputs": list(spec.outputs),
              "derived": [vars(d) for d in spec.derived_axes]}
    paths = write_outputs(table, args.out_dir, spec.name, params, spec.seed)
    text = canonical_text(spec.base_config)
    print(json.dumps(_manifest(argv, digest(text), spec.seed, started, paths), indent=2))
    return EXIT_OK


def cmd_auction(args, argv) -> int:
    for name in ("B1", "B2", "W"):
        if getattr(args, name) <= 0:
            raise UsageError(f"--{name}: must be > 0")
    for a in args.alpha:
        if not 0 <= a <= 1:
            raise UsageError(f"--alpha: availability out of range: {a}")
    scenario = auction_compare(args.B1, args.B2, args.W, tuple(args.alpha))
    table = scenario.table()
    if args.out_dir:
        write_outputs(table, args.out_dir, "auction",
                      {"B1": args.B1, "B2": args.B2, "W": args.W, "alpha": list(args.alpha)}, 0)
    sys.stdout.write(table.to_csv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specshare",
                description="Equilibria of the Cournot spectrum-sharing game.")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one config and print JSON")
    s.add_argument("config", help="TOML config file")
    s.add_argument("--dump-config", metavar="PATH",
                   help="write the canonical config (after overrides) to PATH")
    _add_overrides(s)
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("figure", help="run a named figure job")
    f.add_argument("job", help="job name; see `specshare figure --list`", nargs="?")
    f.add_argument("--out-dir", default=".", help="output directory")
    f.add_argument("--seed", type=int)
    f.add_argument("--list", action="store_true", help="list jobs and exit")
    f.set_defaults(func=cmd_figure)

    w = sub.add_parser("sweep", help="run a sweep described by a TOML file")
    w.add_argument("spec", help="sweep spec file")
    w.add_argument("--out-dir", default=".", help="output directory")
    w.add_argument("--seed", type=int)
    w.set_defaults(func=cmd_sweep)

    a = sub.add_parser("auction", help="auction vs open access comparison (CSV)")
    a.add_argument("--alpha", type=_floats, default=[0.1, 0.5, 0.9],
                   help="availabilities, comma list")
    a.add_argument("--B1", type=float, default=1.0)
    a.add_argument("--B2", type=float, default=1.0)
    a.add_argument("--W", type=float, default=1.0)
    a.add_argument("--out-dir", help="also write auction.csv and a manifest here")
    a.set_defaults(func=cmd_auction)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "figure" and (args.list or not args.job):
        if not args.list:
            print(f"specshare figure: error: missing job; available jobs: "
                  f"{', '.join(sorted(figure_jobs()))}", file=sys.stderr)
            return EXIT_USAGE
        print(json.dumps(sorted(figure_jobs())))
        return EXIT_OK
    try:
        return args.func(args, ["specshare"] + argv)
    except FileNotFoundError as exc:
        print(f"specshare: error: file not found: {exc}", file=sys.stderr)
    except (ConfigError, UsageError) as exc:
        print(f"specshare: error: {exc}", file=sys.stderr)
    except SpecShareError as exc:
        print(f"specshare: error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
