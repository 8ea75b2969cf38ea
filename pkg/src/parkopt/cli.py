"""Command line entry point: ``plan``.

Example::

    plan --scenario parallel --formulation all --guess all --kf 20 --out results/
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import DEFAULT_GUESSES, RunSpec, emit_outputs, run_matrix
from .formulations import ALL_KINDS, FormulationKind
from .guess import GuessKind
from .scenarios import SCENARIO_NAMES, get_scenario
from .solver import SolverOptions

log = logging.getLogger("parkopt")


def _scenarios(value: str):
    if value == "all":
        return [get_scenario(n) for n in SCENARIO_NAMES]
    return [get_scenario(v) for v in value.split(",")]


def _formulations(value: str):
    if value == "all":
        return ALL_KINDS
    return tuple(FormulationKind.parse(v) for v in value.split(","))


def _guesses(value: str):
    if value == "all":
        return DEFAULT_GUESSES
    return tuple(GuessKind.parse(v) for v in value.split(","))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plan", description="Solve parking scenarios and write results.")
    ap.add_argument("--scenario", required=True,
                    help=f"built-in name ({', '.join(SCENARIO_NAMES)}, thin-wall), 'all', a JSON file, "
                         "or a comma list")
    ap.add_argument("--formulation", default="all", help="collision formulation tag, comma list or 'all'")
    ap.add_argument("--guess", default="all",
                    help="linear, simplified, collision-free, hybrid-astar, comma list or 'all'")
    ap.add_argument("--kf", type=int, default=20, help="number of finite elements")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--refine", type=int, default=10, help="sub-steps per interval for verification")
    ap.add_argument("--solver-opts", help="TOML or JSON file with solver options")
    ap.add_argument("--workers", type=int, default=1, help="worker processes")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        scenarios = _scenarios(args.scenario)
        opts = SolverOptions.from_file(args.solver_opts) if args.solver_opts else SolverOptions()
        spec = RunSpec(scenarios=tuple(scenarios), formulations=_formulations(args.formulation),
                       guesses=_guesses(args.guess), kf=args.kf, solver=opts, out_dir=args.out,
                       refine=args.refine, workers=args.workers)
    except (ValueError, KeyError, OSError) as exc:
        print(f"plan: error: {exc}", file=sys.stderr)
        return 2
    cells = run_matrix(spec)
    emit_outputs(cells, scenarios, args.out)
    ok = True
    for c in cells:
        r = c.record
        log.info("%s %s %s %s J=%.4f verified=%s", r.scenario, r.formulation, r.guess, r.status, r.J, r.verified)
        ok &= r.verified
    print(f"{sum(c.record.verified for c in cells)}/{len(cells)} cells optimal and verified; "
          f"results in {args.out}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
