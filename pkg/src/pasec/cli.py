"""Command-line entry point: ``pasec {sweep,cdf,solve,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import oracles
from .experiments import (SCHEMES, ExperimentConfig, ScenarioSample, load_config, run_cdf,
                          run_sweep, solve_scheme, write_cdf, write_sweep)
from .model import Position, make_params

log = logging.getLogger("pasec")


def _point(text: str) -> Position:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return Position(x, y)


def _complex_matrix(M) -> dict:
    M = np.asarray(M)
    return {"re": np.real(M).tolist(), "im": np.imag(M).tolist()}


def _experiment_config(args) -> ExperimentConfig:
    overrides = {"rng_seed": args.seed, "num_drops": args.drops, "output_path": args.out,
                 "workers": args.workers}
    if args.config:
        return load_config(args.config, overrides)
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_sweep(args) -> int:
    cfg = _experiment_config(args)
    result = run_sweep(cfg)
    for path in write_sweep(result, cfg, cfg.output_path):
        print(path)
    return 0


def cmd_cdf(args) -> int:
    cfg = _experiment_config(args)
    result = run_cdf(cfg, args.power_dbm)
    for path in write_cdf(result, cfg.output_path):
        print(path)
    for s, n in cfg.combos:
        print(f"# P(SR = 0) {s} N={n}: {result.zero_mass(s, n):.4f}")
    return 0


def cmd_solve(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        params, solver = cfg.params(args.n), cfg.solver
    else:
        params, solver = make_params(N=args.n), None
    sample = ScenarioSample(args.bob, args.eve, 0, (0, 0))
    rec, res = solve_scheme(args.scheme, sample, params, args.power_dbm, solver)
    out = {"scheme": args.scheme, "N": args.n, "power_dbm": args.power_dbm,
           "secrecy_rate": rec.secrecy_rate, "converged": rec.converged, "iterations": rec.iterations}
    out.update(rate_bob=res.rates.rate_bob, rate_eve=res.rates.rate_eve,
               pa_x=np.atleast_1d(res.state.pa_x).tolist(), W=_complex_matrix(res.state.W),
               R_m=_complex_matrix(res.state.R_m))
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


def cmd_oracle(args) -> int:
    fn = oracles.SUITES[args.suite]
    kw = {"count": args.count} if args.count else {}
    report = fn(args.seed, **kw)
    json.dump(report, sys.stdout, indent=2)
    print()
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pasec", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def experiment_flags(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, help="override rng_seed")
        p.add_argument("--drops", type=int, help="override num_drops")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, help="parallel worker processes")

    p = sub.add_parser("sweep", help="mean secrecy rate versus transmit power")
    experiment_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cdf", help="secrecy-rate CDF at one power")
    experiment_flags(p)
    p.add_argument("--power-dbm", type=float, help="defaults to fixed_power from the config")
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("solve", help="solve one scenario and print the state as JSON")
    p.add_argument("--bob", type=_point, required=True, metavar="X,Y")
    p.add_argument("--eve", type=_point, required=True, metavar="X,Y")
    p.add_argument("--n", type=int, default=1, help="number of waveguides")
    p.add_argument("--power-dbm", type=float, default=10.0)
    p.add_argument("--scheme", choices=SCHEMES, default="pas-an")
    p.add_argument("--config", help="take system and solver settings from this file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="run a brute-force cross-check")
    p.add_argument("--suite", choices=sorted(oracles.SUITES), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"pasec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
