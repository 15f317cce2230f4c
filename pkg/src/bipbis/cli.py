"""Command-line entry point: ``bipbis <command> [flags]``.

Flags override values from an optional ``--config file.json``. Errors exit
nonzero after printing a single machine-parsable JSON line to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import BipbisError, ParameterError
from .experiments import (ExperimentConfig, SCHEMAS, TRIAL_COMMANDS,
                          run_experiment, sweep)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with parameters; flags override")
    p.add_argument("--seed", type=int, help="base seed (default 1)")
    p.add_argument("--stream", type=int, help="base stream offset (default 0)")
    p.add_argument("--record", help="write the full experiment record as JSON here")


def _add_trial_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="vertices per side")
    p.add_argument("--d", type=float, help="average degree")
    p.add_argument("--trials", type=int, help="number of trials (default 20)")
    p.add_argument("--workers", type=int, help="parallel workers (default: BIPBIS_WORKERS or cpu count)")
    p.add_argument("--csv", help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bipbis",
        description="Balanced independent sets in sparse random bipartite graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a graph and write the text format")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=float)
    p.add_argument("--out", help="output path for the graph text file")
    _add_common(p)

    p = sub.add_parser("exact", help="exact max gamma-balanced independent set of a graph file")
    p.add_argument("--graph", help="graph text file (header 'n m', then 'l r' lines)")
    p.add_argument("--gamma", type=float)
    p.add_argument("--limit", type=int, help="per-side capacity limit (default 32)")
    _add_common(p)

    p = sub.add_parser("local", help="run the 1-local algorithm over seeded trials")
    _add_trial_flags(p)
    p.add_argument("--p", type=float, help="L-side inclusion threshold")
    p.add_argument("--gamma", type=float, help="balance parameter (default 0.5)")
    _add_common(p)

    p = sub.add_parser("lowdeg", help="run the degree-1 polynomial with rounding over seeded trials")
    _add_trial_flags(p)
    p.add_argument("--epsilon", type=float, help="density slack; sets k_l and k_r")
    p.add_argument("--eta", type=float, help="rounding error budget (default 0)")
    _add_common(p)

    p = sub.add_parser("ogp", help="interpolation-path stability and overlap-chain probe")
    _add_trial_flags(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--K", type=int, help="chain length target (default 2)")
    p.add_argument("--gamma-steps", dest="gamma_steps", type=int, help="path length in units of n^2 (default 1)")
    p.add_argument("--c", type=float, help="badness threshold factor (default 0.5)")
    _add_common(p)

    p = sub.add_parser("phase", help="classify a phase-diagram point")
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    _add_common(p)

    p = sub.add_parser("thresholds", help="existence and algorithmic density thresholds")
    p.add_argument("--gamma", type=float)
    _add_common(p)

    p = sub.add_parser("exponent", help="first-moment exponent at density c*(log d)/d")
    p.add_argument("--c", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--gamma", type=float)
    _add_common(p)

    p = sub.add_parser("sweep", help="grid sweep of a trial command (at most 2 parameters)")
    p.add_argument("trial_command", choices=TRIAL_COMMANDS)
    p.add_argument("--grid", action="append", default=[],
                   help="param=start:stop:step or param=v1,v2,... (repeatable, max 2)")
    _add_trial_flags(p)
    p.add_argument("--p", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--gamma-steps", dest="gamma_steps", type=int)
    p.add_argument("--c", type=float)
    _add_common(p)

    return parser


def _parse_grid_values(spec: str) -> tuple[str, list[float]]:
    if "=" not in spec:
        raise ParameterError(f"grid spec must look like name=...: got {spec!r}")
    name, body = spec.split("=", 1)
    name = name.strip()
    if "," in body:
        values = [float(v) for v in body.split(",") if v.strip()]
    elif ":" in body:
        parts = body.split(":")
        if len(parts) != 3:
            raise ParameterError(f"range grid must be start:stop:step, got {body!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ParameterError("grid step must be positive")
        values = []
        v = start
        while v <= stop + 1e-12:
            values.append(round(v, 12))
            v += step
    else:
        values = [float(body)]
    if not values:
        raise ParameterError(f"grid for {name!r} is empty")
    return name, values


def _gather_params(args: argparse.Namespace) -> dict:
    params: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ParameterError("config file must contain a JSON object")
        params.update(loaded)
    skip = {"command", "config", "grid", "trial_command", "func"}
    for key, value in vars(args).items():
        if key in skip or value is None:
            continue
        params[key] = value
    return params


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = _gather_params(args)
        if args.command == "sweep":
            grid = dict(_parse_grid_values(g) for g in args.grid)
            record = sweep(ExperimentConfig(args.trial_command, params), grid)
            print(f"rows={len(record.rows)} cells={len(record.outputs['cells'])} "
                  f"csv={params.get('csv')} schema_version={record.schema_version}")
            return 0
        record = run_experiment(ExperimentConfig(args.command, params))
        if args.command in SCHEMAS:
            print(f"rows={len(record.rows)} csv={params.get('csv')} "
                  f"schema_version={record.schema_version}")
        else:
            for key, value in record.outputs.items():
                print(f"{key}={value}")
        return 0
    except BipbisError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "IOError", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
