"""MIFair Command Line Interface.

Subcommands: assess a prediction dump or checkpoint, train one model, run an
eta sweep, and run the self-check batteries.

Exit codes: 0 success, 2 input or config error, 3 fairness threshold failed,
4 coverage error, 5 internal failure.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
import yaml

from .. import __version__
from ..config import get_config, load_run_config
from ..core import emit_report, run_selfcheck, sweep
from ..exceptions import (
    AlignmentError, ConfigError, CoverageError, DivergenceError, MIFairError, SchemaError
)
from ..models import (
    Dataset, Notion, Prediction, RunManifest, SchemaConfig, SweepConfig,
    SynthConfig, TrainConfig, parse_notion
)
from ..services import (
    assess, forward, load_checkpoint, load_csv, restandardize, save_checkpoint,
    split, synth_biased, train, write_report
)
from ..utils import file_digest, format_timestamp, log_grid, validate_sweep_config

logger = logging.getLogger("mifair.cli")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_THRESHOLD = 3
EXIT_COVERAGE = 4
EXIT_INTERNAL = 5

DEFAULT_TRAIN_FRACTION = 0.75
DEFAULT_OUT = "results"


def _read_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"File not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path} is not valid YAML: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a mapping")
    return data


def _schema(source: Any) -> SchemaConfig:
    if isinstance(source, (str, Path)):
        source = _read_yaml(Path(source))
    if not isinstance(source, dict):
        raise SchemaError("A schema mapping or schema file path is required")
    return SchemaConfig.from_dict(source)


def _parse_notions(raw: Optional[str]) -> List[str]:
    if not raw:
        return [n.value for n in Notion]
    return [parse_notion(name).value for name in raw.split(",") if name.strip()]


def _load_predictions(path: Path, ds: Dataset) -> Prediction:
    """Per-row probabilities with the class names as header."""
    if not path.exists():
        raise ConfigError(f"Predictions file not found: {path}")
    frame = pd.read_csv(path)
    header = tuple(str(c).strip() for c in frame.columns)
    if header != ds.class_names:
        raise AlignmentError(f"prediction columns {list(header)} do not match classes {list(ds.class_names)}")
    if len(frame) != ds.size:
        raise AlignmentError(f"{len(frame)} prediction rows for {ds.size} data rows")
    return Prediction(probs=frame.to_numpy(dtype=float))


def load_datasets(document: Dict[str, Any], data_override: Optional[str] = None) -> Tuple[Dataset, Dataset]:
    """Train and held-out datasets from a run document.

    A `synthetic` section draws a population; otherwise `data.path` is read
    with `schema`. Without `data.test_path` the rows are split by
    `data.train_fraction` and re-standardized on the training part.
    """
    data = document.get("data") or {}
    fraction = float(data.get("train_fraction", DEFAULT_TRAIN_FRACTION))
    split_seed = int(data.get("seed", 0))

    synthetic = document.get("synthetic")
    if synthetic and not data_override:
        population = synth_biased(SynthConfig.from_dict(synthetic), int(synthetic.get("seed", 0)))
        return restandardize(*split(population, fraction, split_seed))

    path = data_override or data.get("path")
    if not path:
        raise ConfigError("Run document needs a `synthetic` section or a `data.path`")
    if "schema" not in document:
        raise ConfigError("Run document needs a `schema` section or schema file path")
    schema = _schema(document["schema"])

    full = load_csv(path, schema)
    if data.get("test_path"):
        return full, load_csv(data["test_path"], schema, encoding=full.encoding)
    return restandardize(*split(full, fraction, split_seed))


def _manifest(command: str, config: Dict[str, Any], seeds: List[int]) -> RunManifest:
    return RunManifest(
        command=command,
        config=config,
        tool_version=__version__,
        seeds=seeds,
        created_at=format_timestamp()
    )


def _write_manifest(manifest: RunManifest, out_dir: Path) -> None:
    for name, path in manifest.artifacts.items():
        manifest.digests[name] = file_digest(path)
    manifest.save(out_dir / "manifest.json")


def cmd_assess(args: argparse.Namespace) -> int:
    """Assess predictions (or a checkpoint's) on a dataset."""
    started = time.perf_counter()
    if not args.data or not args.schema:
        raise ConfigError("assess needs --data and --schema")
    if bool(args.predictions) == bool(args.model):
        raise ConfigError("assess needs exactly one of --predictions or --model")

    schema = _schema(args.schema)
    notions = _parse_notions(args.notions)
    if args.model:
        params, encoding, _ = load_checkpoint(args.model)
        ds = load_csv(args.data, schema, encoding=encoding)
        pred = forward(params, ds.features)
    else:
        ds = load_csv(args.data, schema)
        pred = _load_predictions(Path(args.predictions), ds)

    units = args.units or get_config().estimation.get("units", "nats")
    report = assess(ds, pred, notions, units=units, normalize=args.normalize)

    out_dir = Path(args.out or DEFAULT_OUT)
    manifest = _manifest("assess", {
        "data": str(args.data), "schema": schema.to_dict(), "notions": notions,
        "predictions": args.predictions, "model": args.model, "threshold": args.threshold,
        "units": units, "normalize": args.normalize
    }, [])
    manifest.add_artifact("metrics", write_report(report, out_dir / "metrics.csv"))
    with open(out_dir / "metrics.json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    manifest.add_artifact("metrics_json", out_dir / "metrics.json")
    manifest.timings["total_seconds"] = time.perf_counter() - started
    _write_manifest(manifest, out_dir)

    for name, value in report.iota.items():
        print(f"iota_{name} = {value.raw:.6g} {value.units}")
    print(f"ACC_mean = {report.acc_mean:.4f}, ACC_weighted = {report.acc_weighted:.4f}")

    if args.threshold is not None:
        passed = report.verdict(args.threshold)
        print(f"verdict at s={args.threshold:g}: {'PASS' if passed else 'FAIL'}")
        return EXIT_OK if passed else EXIT_THRESHOLD
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    """Train one model from a run document."""
    started = time.perf_counter()
    if not args.config:
        raise ConfigError("train needs --config")
    document = load_run_config(args.config)
    if args.seed is not None:
        document["train"]["seed"] = args.seed
    cfg = TrainConfig.from_dict(document["train"])
    ds_train, ds_eval = load_datasets(document, args.data)

    params, trace = train(ds_train, ds_eval, cfg, document["train"].get("hidden_sizes", [16]))

    out_dir = Path(args.out or document["output"].get("dir", DEFAULT_OUT))
    manifest = _manifest("train", document, [cfg.seed])
    manifest.add_artifact("checkpoint", save_checkpoint(
        params, out_dir / "checkpoint.json", ds_train.encoding, ds_train.class_names
    ))
    trace_path = out_dir / "trace.csv"
    pd.DataFrame([r.to_dict() for r in trace.records]).to_csv(
        trace_path, index=False, float_format="%.12g", lineterminator="\n"
    )
    manifest.add_artifact("trace", trace_path)
    if trace.final_report is not None:
        manifest.add_artifact("metrics", write_report(trace.final_report, out_dir / "metrics.csv"))
    manifest.timings["total_seconds"] = time.perf_counter() - started
    _write_manifest(manifest, out_dir)

    last = trace.records[-1]
    print(f"trained {trace.epochs} epochs: loss={last.loss:.5f} iota={last.iota:.6g} eval_acc={last.eval_acc:.4f}")
    return EXIT_OK


def build_sweep_config(document: Dict[str, Any]) -> SweepConfig:
    section = document["sweep"]
    is_valid, errors = validate_sweep_config(section)
    if not is_valid:
        raise ConfigError("Invalid sweep section", errors)
    base = TrainConfig.from_dict(document["train"])
    etas = section.get("etas")
    if etas is None:
        low, high = section.get("grids", {}).get(base.notion.name, [-2, 2])
        etas = log_grid(low, high, int(section.get("grid_points", 10)))
    return SweepConfig(
        base=base,
        etas=list(etas),
        seeds=list(section["seeds"]),
        threshold=float(section.get("threshold", 0.2)),
        eval_notions=tuple(section.get("eval_notions") or [n.value for n in Notion]),
        hidden_sizes=tuple(document["train"].get("hidden_sizes", [16])),
        units=section.get("units", "nats"),
        normalize=bool(section.get("normalize", False))
    )


def cmd_sweep(args: argparse.Namespace) -> int:
    """Run an eta x seed sweep and write its report."""
    started = time.perf_counter()
    if not args.config:
        raise ConfigError("sweep needs --config")
    document = load_run_config(args.config)
    if args.seed is not None:
        document["sweep"]["seeds"] = [args.seed]
    if args.threshold is not None:
        document["sweep"]["threshold"] = args.threshold
    cfg = build_sweep_config(document)
    ds_train, ds_eval = load_datasets(document, args.data)

    report = sweep(cfg, ds_train, ds_eval, jobs=args.jobs)

    out_dir = Path(args.out or document["output"].get("dir", DEFAULT_OUT))
    manifest = _manifest("sweep", document, cfg.seeds)
    for name, path in emit_report(report, out_dir).items():
        manifest.add_artifact(name, path)
    manifest.timings["total_seconds"] = time.perf_counter() - started
    _write_manifest(manifest, out_dir)

    print(f"{len(report.trials)} trials ({report.n_failed} failed), {len(report.aggregates)} etas -> {out_dir}")
    return EXIT_OK


def cmd_selfcheck(args: argparse.Namespace) -> int:
    """Run the oracle batteries."""
    summary = run_selfcheck(args.seed or 0)
    for line in summary.lines():
        print(line)
    return EXIT_OK if summary.passed else EXIT_INTERNAL


COMMANDS = {
    "assess": cmd_assess,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "selfcheck": cmd_selfcheck,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mifair", description="Mutual-information group fairness")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    assess_parser = sub.add_parser("assess", help="Assess predictions on a dataset")
    assess_parser.add_argument("--data", required=True)
    assess_parser.add_argument("--schema", required=True)
    assess_parser.add_argument("--predictions", help="CSV of class probabilities, header = class names")
    assess_parser.add_argument("--model", help="Checkpoint written by `train`")
    assess_parser.add_argument("--notions", help="Comma-separated notions (default: all)")
    assess_parser.add_argument("--threshold", type=float, help="Fail (exit 3) if any |pairwise| exceeds it")
    assess_parser.add_argument("--units", choices=("nats", "bits"))
    assess_parser.add_argument("--normalize", action="store_true")
    assess_parser.add_argument("--out")

    for name, help_text in (("train", "Train one model"), ("sweep", "Run an eta sweep")):
        command = sub.add_parser(name, help=help_text)
        command.add_argument("--config", required=True)
        command.add_argument("--data", help="Override data.path of the run document")
        command.add_argument("--seed", type=int)
        command.add_argument("--out")
        if name == "sweep":
            command.add_argument("--threshold", type=float)
            command.add_argument("--jobs", type=int, help="Parallel trials (overrides MIFAIR_JOBS)")

    check = sub.add_parser("selfcheck", help="Run the verification batteries")
    check.add_argument("--seed", type=int, default=0)
    return parser


def _configure_logging(level: Optional[str]) -> None:
    level = (level or get_config().app.get("log_level", "INFO")).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and map errors onto exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging(args.log_level)
        if getattr(args, "jobs", None) is not None and args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        return COMMANDS[args.command](args)
    except CoverageError as e:
        logger.error(str(e))
        return EXIT_COVERAGE
    except DivergenceError as e:
        logger.error(str(e))
        return EXIT_INTERNAL
    except (MIFairError, FileNotFoundError) as e:
        logger.error(str(e))
        return EXIT_INPUT
    except Exception as e:
        logger.exception(f"Internal failure: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
