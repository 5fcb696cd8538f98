#!/usr/bin/env python3
"""
Command-line front end.

    python -m catengine [global flags] scq --n 10 --parity even --beta 2
    python -m catengine simulate config.json
    python -m catengine optimize config.json
    python -m catengine sweep config.json --beta-range 1 3 0.25
    python -m catengine reproduce table1 table3 --xlsx

Exit codes: 0 success, 2 usage or schema error, 3 zero success probability,
4 reproduction or oracle-verification failure, 1 any other engine error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

load_dotenv()

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from pydantic import ValidationError  # noqa: E402

from catengine import settings  # noqa: E402
from catengine.cat_states import CatSpec, Parity, polynomial_roots, scq_polynomial, scq_upper_bound  # noqa: E402
from catengine.config_schema import SchemeConfigModel, load_config  # noqa: E402
from catengine.errors import AllStartsInfeasible, CatEngineError, DegenerateBS, UnsupportedInput, ZeroProbability  # noqa: E402
from catengine.fock_core import fidelity_pure  # noqa: E402
from catengine.optimizer import OptimizerBudget, beta_grid, optimize, sweep_beta  # noqa: E402
from catengine.polynomial_oracle import MAX_ORACLE_MODES, polynomial_oracle  # noqa: E402
from catengine.recipes import RECIPES, run_recipe  # noqa: E402
from catengine.report import ReportWriter  # noqa: E402
from catengine.scheme_sim import InputKind, SchemeConfig, analytic_conditional, run_scheme  # noqa: E402

logger = logging.getLogger("catengine")

EXIT_OK = 0
EXIT_ENGINE = 1
EXIT_USAGE = 2
EXIT_ZERO_PROBABILITY = 3
EXIT_FAILED = 4

EXIT_CODES_HELP = """exit codes:
  0  success
  1  engine error (cutoff too small, root finder did not converge, ...)
  2  usage error, malformed JSON, schema violation, missing file
  3  zero success probability, or no feasible optimizer start
  4  reproduction below the tabulated fidelity, or oracle mismatch
"""

ORACLE_FIDELITY_TOLERANCE = 1e-9
ORACLE_PROBABILITY_TOLERANCE = 1e-8

GNUPLOT_COLUMNS = {
    "fig2": ("alpha0", ("fidelity",)),
    "fig3": ("beta", ("fidelity", "scq_bound_alpha0", "scq_bound_maximized")),
    "fig4": ("beta", ("probability",)),
    "fig5": ("beta", ("fidelity", "probability")),
    "fig6": ("beta", ("fidelity", "probability")),
    "fig7": ("beta", ("fidelity", "kitten_fidelity")),
    "fig8": ("beta", ("fidelity", "kitten_fidelity")),
}


class UsageError(Exception):
    """Bad command-line input detected after argument parsing."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catengine",
        description="Conditional cat-state synthesis toolkit",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--seed", type=int, default=None, help="start-sequence seed (default CATENGINE_SEED)")
    parser.add_argument("--cutoff", type=int, default=None, help="Fock cutoff override")
    parser.add_argument("--out", type=Path, default=None, help="output directory (default CATENGINE_OUTPUT_DIR)")
    parser.add_argument("--threads", type=int, default=None, help="concurrent optimizer restarts")
    parser.add_argument("--restarts", type=int, default=None, help="optimizer restarts per optimization")
    parser.add_argument("--max-evaluations", type=int, default=None, help="objective evaluations per restart")
    parser.add_argument("--verify-oracle", action="store_true", help="cross-check simulate against the oracles")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    scq = commands.add_parser("scq", help="genuine cat-qudit fidelities")
    scq.add_argument("--n", type=int, required=True, help="qudit order (photon number)")
    scq.add_argument("--parity", choices=[p.value for p in Parity], required=True)
    beta = scq.add_mutually_exclusive_group(required=True)
    beta.add_argument("--beta", type=float)
    beta.add_argument("--beta-range", type=float, nargs=3, metavar=("LO", "HI", "STEP"))
    scq.add_argument("--alpha-mode", choices=["fixed", "maximized"], default="maximized")
    scq.add_argument("--alpha", type=float, default=0.0, help="representation displacement for --alpha-mode fixed")
    scq.add_argument("--emit-roots", action="store_true", help="also write the qudit polynomial roots")

    simulate = commands.add_parser("simulate", help="heralded state of a fixed configuration")
    simulate.add_argument("config", type=Path)

    optimize_cmd = commands.add_parser("optimize", help="maximize the fidelity with the config target")
    optimize_cmd.add_argument("config", type=Path)

    sweep = commands.add_parser("sweep", help="optimize over a range of target amplitudes")
    sweep.add_argument("config", type=Path)
    sweep.add_argument("--beta-range", type=float, nargs=3, metavar=("LO", "HI", "STEP"), required=True)
    sweep.add_argument("--parity", choices=[p.value for p in Parity], default=None,
                       help="target parity (default: the config target)")
    sweep.add_argument("--gnuplot", action="store_true")

    reproduce = commands.add_parser("reproduce", help="run named table and figure recipes")
    reproduce.add_argument("recipes", nargs="+", choices=sorted(RECIPES) + ["all"])
    reproduce.add_argument("--xlsx", action="store_true", help="also write a workbook of all tables")
    reproduce.add_argument("--gnuplot", action="store_true", help="write gnuplot scripts for figure recipes")
    reproduce.add_argument("--beta-range", type=float, nargs=3, metavar=("LO", "HI", "STEP"), default=None,
                           help="override the beta grid of figure recipes")
    return parser


def _budget(args: argparse.Namespace, model: Optional[SchemeConfigModel] = None) -> OptimizerBudget:
    overrides = dict(
        seed=args.seed, threads=args.threads, restarts=args.restarts, max_evaluations=args.max_evaluations,
    )
    if model is not None:
        return model.to_budget(**overrides)
    return OptimizerBudget(**{k: v for k, v in overrides.items() if v is not None})


def _writer(args: argparse.Namespace, config: Any, seed: int) -> ReportWriter:
    command = " ".join(["catengine"] + list(args.argv))
    if args.out is None:
        return ReportWriter(command=command, config=config, seed=seed)
    return ReportWriter(command=command, config=config, seed=seed, output_dir=args.out)


def _load(path: Path) -> SchemeConfigModel:
    model = load_config(path)
    logger.info("Loaded %s (%d auxiliary modes)", path, len(model.aux_photons))
    return model


def _with_cutoff(config: SchemeConfig, cutoff: Optional[int]) -> SchemeConfig:
    return config if cutoff is None else replace(config, cutoff=cutoff)


def cmd_scq(args: argparse.Namespace) -> int:
    if args.n < 0:
        raise UsageError(f"--n must be non-negative, got {args.n}")
    if args.beta is not None:
        if not args.beta > 0.0:
            raise UsageError(f"--beta must be positive, got {args.beta}")
        betas = np.array([args.beta])
    else:
        betas = beta_grid(args.beta_range)

    rows: List[Dict[str, Any]] = []
    root_rows: List[Dict[str, Any]] = []
    for beta in betas:
        fidelity, alpha_used = scq_upper_bound(args.n, float(beta), args.parity, args.alpha_mode, args.alpha)
        rows.append({"beta": float(beta), "fidelity_upper_bound": fidelity, "alpha_used": alpha_used})
        if not args.emit_roots or args.n == 0:
            continue
        spec = CatSpec(float(beta), args.parity, alpha_used)
        try:
            roots = polynomial_roots(scq_polynomial(args.n, spec))
        except CatEngineError as exc:
            logger.warning("beta=%.4g: no roots (%s)", beta, exc)
            continue
        for index, root in enumerate(sorted(roots.roots, key=lambda z: (round(z.real, 12), z.imag))):
            root_rows.append({"beta": float(beta), "alpha": alpha_used, "index": index,
                              "re": float(root.real), "im": float(root.imag)})

    config = {"n": args.n, "parity": args.parity, "alpha_mode": args.alpha_mode, "alpha": args.alpha,
              "betas": [float(b) for b in betas]}
    writer = _writer(args, config, seed=args.seed if args.seed is not None else settings.DEFAULT_SEED)
    stem = f"scq_n{args.n}_{args.parity}"
    writer.write_table(pd.DataFrame(rows, columns=["beta", "fidelity_upper_bound", "alpha_used"]), stem)
    if args.emit_roots:
        writer.write_table(pd.DataFrame(root_rows, columns=["beta", "alpha", "index", "re", "im"]), f"{stem}_roots")
    return EXIT_OK


def _state_and_probability(analytic):
    state, _, probability = analytic
    return state, probability


def _verify_oracles(config: SchemeConfig, state, probability: float) -> Dict[str, Any]:
    checks: Dict[str, Any] = {}
    references = []
    if config.m <= MAX_ORACLE_MODES:
        references.append(("polynomial_oracle", lambda: polynomial_oracle(config)))
    if config.input.kind is not InputKind.KITTEN:
        references.append(("analytic", lambda: _state_and_probability(analytic_conditional(config))))
    for name, build in references:
        try:
            reference_state, reference_probability = build()
        except (UnsupportedInput, DegenerateBS) as exc:
            logger.info("Skipping %s check: %s", name, exc)
            continue
        fidelity = fidelity_pure(state, reference_state)
        relative = abs(probability - reference_probability) / max(reference_probability, 1e-300)
        passed = fidelity >= 1.0 - ORACLE_FIDELITY_TOLERANCE and relative <= ORACLE_PROBABILITY_TOLERANCE
        checks[name] = {"fidelity": fidelity, "probability_relative_error": relative, "pass": passed}
        log = logger.info if passed else logger.error
        log("%s check: fidelity %.12f, probability relative error %.2e", name, fidelity, relative)
    return checks


def cmd_simulate(args: argparse.Namespace) -> int:
    model = _load(args.config)
    try:
        config = _with_cutoff(model.to_scheme_config(require_fixed=True), args.cutoff)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    target = model.target_spec()
    result = run_scheme(config, target)

    payload: Dict[str, Any] = {
        "config": config.to_dict(),
        "target": target.to_dict() if target else None,
        "result": result.to_dict(),
        "mean_photon_number": result.state.mean_photon_number(),
    }
    status = EXIT_OK
    if args.verify_oracle:
        checks = _verify_oracles(config, result.state, result.success_probability)
        payload["oracle_checks"] = checks
        if not all(check["pass"] for check in checks.values()):
            status = EXIT_FAILED
    writer = _writer(args, model.model_dump(mode="json"), seed=args.seed if args.seed is not None else 0)
    writer.write_json(payload, "simulate")
    return status


def _search_space(model: SchemeConfigModel, cutoff: Optional[int]):
    space = model.to_search_space()
    return replace(space, template=_with_cutoff(space.template, cutoff))


def cmd_optimize(args: argparse.Namespace) -> int:
    model = _load(args.config)
    target = model.target_spec()
    if target is None:
        raise UsageError("optimize needs a target in the config")
    space = _search_space(model, args.cutoff)
    budget = _budget(args, model)
    outcome = optimize(space, target, budget)
    payload = outcome.to_dict()
    payload["target"] = target.to_dict()
    payload["parameters"] = [[name, float(v)] for name, v in zip(space.names(), outcome.best_params)]
    writer = _writer(args, model.model_dump(mode="json"), seed=budget.seed)
    writer.write_json(payload, "optimize")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        beta_grid(args.beta_range)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    model = _load(args.config)
    parity = args.parity or (model.target.parity if model.target else None)
    if parity is None:
        raise UsageError("sweep needs --parity or a target in the config")
    space = _search_space(model, args.cutoff)
    budget = _budget(args, model)
    points = sweep_beta(space, parity, tuple(args.beta_range), budget)
    frame = pd.DataFrame([p.to_row() for p in points])
    frame.insert(0, "parity", parity)

    config = {"scheme": model.model_dump(mode="json"), "beta_range": list(args.beta_range), "parity": parity}
    writer = _writer(args, config, seed=budget.seed)
    name = f"sweep_{parity}"
    csv_path = writer.write_table(frame, name)
    if args.gnuplot:
        writer.write_gnuplot(frame, csv_path, name, "beta", ("fidelity", "scq_bound_alpha0", "scq_bound_maximized"))
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    names = sorted(RECIPES) if "all" in args.recipes else list(dict.fromkeys(args.recipes))
    if args.beta_range is not None:
        try:
            beta_grid(args.beta_range)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    budget = _budget(args)
    config = {
        "recipes": names,
        "beta_range": args.beta_range,
        "budget": {"restarts": budget.restarts, "max_evaluations": budget.max_evaluations, "seed": budget.seed},
    }
    writer = _writer(args, config, seed=budget.seed)

    all_tables: Dict[str, pd.DataFrame] = {}
    summary: Dict[str, Any] = {"seed": budget.seed, "restarts": budget.restarts}
    verdicts: Dict[str, Any] = {}
    for name in names:
        outcome = run_recipe(name, budget, tuple(args.beta_range) if args.beta_range else None)
        for table_name, frame in outcome["tables"].items():
            csv_path = writer.write_table(frame, table_name)
            all_tables[table_name] = frame
            if args.gnuplot and table_name in GNUPLOT_COLUMNS:
                x, y = GNUPLOT_COLUMNS[table_name]
                writer.write_gnuplot(frame, csv_path, table_name, x, [c for c in y if c in frame.columns])
        verdicts[name] = "n/a" if outcome["passed"] is None else ("PASS" if outcome["passed"] else "FAIL")
        if outcome["ratios"]:
            summary[f"{name}_amplification"] = outcome["ratios"]
        logger.info("Recipe %s: %s", name, verdicts[name])
    summary["verdicts"] = verdicts

    if args.xlsx:
        writer.write_workbook(all_tables, summary, "reproduce")
    failed = [name for name, verdict in verdicts.items() if verdict == "FAIL"]
    if failed:
        logger.error("Recipes below the tabulated fidelities: %s", ", ".join(failed))
        return EXIT_FAILED
    return EXIT_OK


COMMANDS = {
    "scq": cmd_scq,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "reproduce": cmd_reproduce,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _build_parser().parse_args(argv)
    args.argv = argv
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValidationError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"catengine {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ZeroProbability, AllStartsInfeasible) as exc:
        print(f"catengine {args.command}: {exc}", file=sys.stderr)
        return EXIT_ZERO_PROBABILITY
    except CatEngineError as exc:
        logger.exception("catengine %s failed", args.command)
        print(f"catengine {args.command}: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except ValueError as exc:
        print(f"catengine {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
