"""Batch entry points: generate fixtures, run pipelines, serve the HTTP API.

Exit codes: 0 success, 2 config/usage error, 3 environment error
(unreadable paths, address in use), 4 data validation error.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from . import synth
from .augment import RNG_ALGORITHM, AugmentSpec, augment
from .data import load_dataset
from .errors import InvalidConfig, OntocohortError
from .evaluate import (
    TaskSpec,
    TrainConfig,
    build_baseline_cohorts,
    cross_validate,
    format_report_table,
)
from .filtering import FilterSpec, filter_graph
from .graph import build_graph, load_edge_list, load_labels
from .synth import SynthConfig, generate_synthetic, write_bundle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENVIRONMENT = 3
EXIT_DATA = 4


class CliError(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _read_json(path: str, what: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_ENVIRONMENT, f"cannot read {what} {path!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"{what} {path!r} is not valid JSON: {exc}") from exc


def _load_data_dir(data_dir: str):
    base = Path(data_dir)
    if not base.is_dir():
        raise CliError(EXIT_ENVIRONMENT, f"data directory {data_dir!r} not found")
    try:
        dataset = load_dataset(
            base / synth.FILE_NAMES["visits"], base / synth.FILE_NAMES["vocabulary"]
        )
        edges = load_edge_list(base / synth.FILE_NAMES["edges"])
        labels_path = base / synth.FILE_NAMES["labels"]
        labels = load_labels(labels_path) if labels_path.exists() else None
        graph = build_graph(edges, dataset, labels=labels)
    except OSError as exc:
        raise CliError(EXIT_ENVIRONMENT, str(exc)) from exc
    except OntocohortError as exc:
        raise CliError(EXIT_DATA, str(exc)) from exc
    return graph, dataset


def cmd_generate(args) -> int:
    config_obj = _read_json(args.config, "config") if args.config else {}
    try:
        config = SynthConfig.from_dict(config_obj)
    except (InvalidConfig, TypeError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid generator config: {exc}") from exc
    data = generate_synthetic(config, args.seed)
    out = write_bundle(data, args.out)
    print(f"wrote {data.manifest['node_count']} nodes, "
          f"{data.manifest['visit_count']} visits to {out}")
    return EXIT_OK


def _augment_specs(obj, default_seeds) -> list[tuple[str, AugmentSpec]]:
    """One (name, spec) pair per requested augmentation row."""
    entries = obj if isinstance(obj, list) else [obj]
    if not entries:
        raise CliError(EXIT_CONFIG, "augment config must name at least one spec")
    out = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise CliError(EXIT_CONFIG, "augment config entries must be objects")
        entry = dict(entry)
        name = str(entry.pop("name", f"augmented_{i + 1}" if len(entries) > 1 else "augmented"))
        entry.setdefault("seed_codes", default_seeds)
        try:
            out.append((name, AugmentSpec.from_dict(entry)))
        except (ValueError, TypeError, KeyError) as exc:
            raise CliError(EXIT_CONFIG, f"invalid augment spec {name!r}: {exc}") from exc
    return out


def cmd_run(args) -> int:
    graph, dataset = _load_data_dir(args.data)

    try:
        filter_spec = FilterSpec.from_dict(_read_json(args.filter, "filter config"))
    except (ValueError, TypeError, KeyError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid filter config: {exc}") from exc
    try:
        fg = filter_graph(graph, filter_spec, dataset)
    except OntocohortError as exc:
        raise CliError(EXIT_DATA, str(exc)) from exc

    specs = _augment_specs(
        _read_json(args.augment, "augment config"), sorted(filter_spec.selected_codes)
    )

    task = TaskSpec(
        name=args.task,
        label_key=args.task,
        min_duration_hours=args.min_duration_hours,
    )
    train_config = TrainConfig(
        learning_rate=args.learning_rate, iterations=args.iterations, l2=args.l2
    )

    try:
        cohorts = build_baseline_cohorts(
            fg, filter_spec, dataset, args.random_sizes, seed=args.baseline_seed
        )
    except OntocohortError as exc:
        raise CliError(EXIT_DATA, str(exc)) from exc

    rows: list[tuple[str, list[str], dict | None]] = [
        ("target", cohorts["target"], None)
    ]
    for name, spec in specs:
        result = augment(fg, spec)
        rows.append((name, sorted(result.cohort_visit_ids), spec.to_dict()))
    for size in args.random_sizes:
        rows.append((f"random_{size}", cohorts[f"random_{size}"], None))

    reports = []
    cohort_meta = []
    for name, visit_ids, params in rows:
        try:
            report = cross_validate(
                dataset,
                visit_ids,
                task,
                k=args.folds,
                seed=args.cv_seed,
                config=train_config,
                cohort_name=name,
            )
        except OntocohortError as exc:
            raise CliError(EXIT_DATA, f"evaluation of {name!r} failed: {exc}") from exc
        reports.append(report)
        cohort_meta.append(
            {"name": name, "visit_count": len(visit_ids), "augment": params}
        )

    table = format_report_table(reports)
    document = {
        "parameters": {
            "data_dir": str(args.data),
            "filter": filter_spec.to_dict(),
            "augment": [dict(meta["augment"], name=meta["name"])
                        for meta in cohort_meta if meta["augment"] is not None],
            "task": task.to_dict(),
            "folds": args.folds,
            "cv_seed": args.cv_seed,
            "baseline_seed": args.baseline_seed,
            "random_sizes": list(args.random_sizes),
            "train": {
                "learning_rate": train_config.learning_rate,
                "iterations": train_config.iterations,
                "l2": train_config.l2,
            },
        },
        "rng": RNG_ALGORITHM,
        "cohorts": cohort_meta,
        "reports": [r.to_dict() for r in reports],
        "table": table,
    }
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(table, end="")
    return EXIT_OK


def _parse_listen(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise CliError(EXIT_CONFIG, f"listen address {addr!r} must be host:port")
    return host or "127.0.0.1", int(port)


def cmd_serve(args) -> int:
    from .service import create_app

    host, port = _parse_listen(args.listen)
    graph_check = Path(args.data)
    if not graph_check.is_dir():
        raise CliError(EXIT_ENVIRONMENT, f"data directory {args.data!r} not found")
    # Bind eagerly so a taken port fails fast with the environment exit code.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((host, port))
    except OSError as exc:
        probe.close()
        raise CliError(EXIT_ENVIRONMENT, f"cannot listen on {args.listen}: {exc}") from exc
    probe.close()

    try:
        app = create_app(data_dir=args.data)
    except Exception as exc:
        raise CliError(EXIT_DATA, f"cannot preload data: {exc}") from exc

    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontocohort",
        description="Grow clinical cohorts along a concept hierarchy and evaluate them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic ontology + visit bundle")
    gen.add_argument("--config", help="JSON generator config (defaults apply if omitted)")
    gen.add_argument("--seed", type=int, required=True, help="RNG seed")
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="filter, augment, and evaluate cohorts")
    run.add_argument("--data", required=True, help="generated data directory")
    run.add_argument("--filter", required=True, help="JSON filter spec")
    run.add_argument("--augment", required=True, help="JSON augment spec or list of specs")
    run.add_argument("--task", required=True, help="label key to predict")
    run.add_argument("--out", required=True, help="report JSON path")
    run.add_argument("--random-sizes", type=int, nargs="*", default=[],
                     help="sizes for random-fill baseline cohorts")
    run.add_argument("--folds", type=int, default=3)
    run.add_argument("--cv-seed", type=int, default=0)
    run.add_argument("--baseline-seed", type=int, default=0)
    run.add_argument("--learning-rate", type=float, default=0.1)
    run.add_argument("--iterations", type=int, default=500)
    run.add_argument("--l2", type=float, default=1e-3)
    run.add_argument("--min-duration-hours", type=float, default=None,
                     help="exclude visits shorter than this")
    run.set_defaults(func=cmd_run)

    serve = sub.add_parser("serve", help="serve the HTTP session API")
    serve.add_argument("--data", required=True, help="generated data directory")
    serve.add_argument("--listen", default="127.0.0.1:8000", help="host:port")
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OntocohortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
