"""Command-line interface: ``python -m src.hard_tsp.cli <command> ...``."""

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from .client import HardTspClient, load_instance, to_builtin
from .config import Settings, configure_logging
from .core import metric_closure, scale_and_round
from .errors import HardTspError
from .reports import fit_runtime_regression, read_runtime_records
from .tsplib import tsplib_write

logger = logging.getLogger(__name__)

EXIT_USAGE = 2


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="Master random seed")
    parser.add_argument("--delta", type=int, default=None, help="Tour right-hand side for IH-OPT")
    parser.add_argument("--time-limit", type=float, default=None, help="Seconds per exact search")
    parser.add_argument("--reps", type=int, default=None, help="Branch-and-bound repetitions per evaluation")
    parser.add_argument("--out-dir", default=None, help="Directory for written instances and logs")
    parser.add_argument("--workers", type=int, default=None, help="Processes for batch hardening")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hard_tsp", description="Generate metric TSP instances with a large SEP gap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="Sample fractional SEP vertices")
    p.add_argument("n", type=int)
    p.add_argument("r", type=int, nargs="?", default=1)
    _add_common(p)

    p = sub.add_parser("harden", help="Harden one instance")
    p.add_argument("instance", help="TSPLIB file")
    _add_common(p)

    p = sub.add_parser("generate", help="Sample, harden and rank a batch")
    p.add_argument("n", type=int)
    p.add_argument("r", type=int)
    _add_common(p)

    p = sub.add_parser("evaluate", help="Gap and hardness proxy of an instance")
    p.add_argument("instance", help="TSPLIB file")
    _add_common(p)

    p = sub.add_parser("convert", help="Rewrite an instance as EXPLICIT FULL_MATRIX")
    p.add_argument("instance", help="TSPLIB or JSON file")
    p.add_argument("output")
    p.add_argument("--scale", type=float, default=None, help="Scale and round fractional costs")
    p.add_argument("--closure", action="store_true", help="Apply the shortest-path closure after rounding")
    _add_common(p)

    p = sub.add_parser("export-dot", help="SEP support graph as DOT")
    p.add_argument("instance", help="TSPLIB file")
    p.add_argument("--x", default=None, help="JSON file with an edge vector; SEP is solved when omitted")
    p.add_argument("--output", default=None, help="Write here instead of stdout")
    _add_common(p)

    p = sub.add_parser("regress", help="Fit log10 runtime against n")
    p.add_argument("records", help="CSV with n and runtime columns")
    _add_common(p)

    p = sub.add_parser("sweep", help="Harden one instance at several deltas")
    p.add_argument("instance", help="TSPLIB file")
    p.add_argument("--deltas", type=int, nargs="+", default=[100, 1000, 10000])
    _add_common(p)

    p = sub.add_parser("fetch", help="Download a TSPLIB instance")
    p.add_argument("name")
    _add_common(p)

    return parser


def settings_from_args(args: argparse.Namespace, base: Optional[Settings] = None) -> Settings:
    """Environment settings overridden by any flag given on the command line."""
    settings = base or Settings.from_env()
    overrides = {
        'seed': args.seed,
        'delta': args.delta,
        'time_limit': args.time_limit,
        'reps': args.reps,
        'out_dir': args.out_dir,
        'workers': args.workers,
        'log_level': args.log_level,
    }
    return replace(settings, **{k: v for k, v in overrides.items() if v is not None})


def _load_json_instance(path: Path):
    with path.open(encoding="utf-8") as fh:
        return load_instance(json.load(fh), name=path.stem)


def _run(client: HardTspClient, args: argparse.Namespace) -> Any:
    settings = client.settings
    out_dir = Path(settings.out_dir)

    if args.command == "sample":
        result = client.sample(args.n, args.r)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / f"sample_n{args.n}_s{settings.seed}.json"
        target.write_text(json.dumps(result, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return {'path': str(target), 'vertices': [v['key'] for v in result['vertices']]}

    if args.command == "harden":
        outcome = client.harden_instance(args.instance)
        path = client.save_outcome(outcome, out_dir, seed=settings.seed, delta=settings.delta)
        return to_builtin({'path': str(path), **outcome.to_dict()})

    if args.command == "generate":
        return client.generate(args.n, args.r)

    if args.command == "evaluate":
        return client.evaluate(args.instance)

    if args.command == "convert":
        source = Path(args.instance)
        inst = _load_json_instance(source) if source.suffix == ".json" else load_instance(source)
        if args.scale is not None:
            inst = scale_and_round(inst.edge_vector(), args.scale, name=inst.name)
            if args.closure:
                inst = metric_closure(inst)
        path = tsplib_write(inst, args.output)
        return {'path': str(path), 'n': inst.n}

    if args.command == "export-dot":
        x = None
        if args.x:
            with open(args.x, encoding="utf-8") as fh:
                x = json.load(fh)
        text = client.export_dot(args.instance, x)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
            return {'path': args.output}
        sys.stdout.write(text)
        return None

    if args.command == "regress":
        return fit_runtime_regression(read_runtime_records(args.records)).to_dict()

    if args.command == "sweep":
        return client.sweep(args.instance, args.deltas)

    if args.command == "fetch":
        return {'path': str(client.fetch(args.name))}

    raise ValueError(f"Invalid command: {args.command}")


def _append_run_log(out_dir: Path, entry: Dict[str, Any]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "runs.jsonl").open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(to_builtin(entry), sort_keys=True) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    args = build_parser().parse_args(argv)
    settings = settings_from_args(args)
    configure_logging(settings.log_level)
    client = HardTspClient(settings=settings)

    started = time.perf_counter()
    entry: Dict[str, Any] = {'command': args.command, 'argv': argv if argv is not None else sys.argv[1:]}
    try:
        result = _run(client, args)
    except HardTspError as e:
        logger.error("%s failed: %s", args.command, e)
        entry.update({'ok': False, 'error': str(e), 'error_type': type(e).__name__})
        _append_run_log(Path(settings.out_dir), entry)
        return EXIT_USAGE

    entry.update({'ok': True, 'elapsed': time.perf_counter() - started})
    _append_run_log(Path(settings.out_dir), entry)
    if result is not None:
        print(json.dumps(to_builtin(result), sort_keys=True, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
