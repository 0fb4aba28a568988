"""Sweep Reporting.

Writes the per-trial table, the per-eta aggregate table and a readable
summary. Output depends only on the report, so re-emitting it is
byte-identical.
"""

import logging
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd

from ..models import SweepReport

logger = logging.getLogger(__name__)

REPORT_FORMAT_VERSION = 1
FLOAT_FORMAT = "%.12g"
TRIAL_COLUMNS = ["eta", "seed", "status", "error", "epochs_run", "final_loss"]
AGGREGATE_COLUMNS = ["eta", "n_ok", "n_failed"]


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise OSError(f"Cannot write {path}: {e}") from e


def trials_frame(rep: SweepReport) -> pd.DataFrame:
    rows = []
    for trial in rep.trials:
        row = {
            "eta": trial.eta,
            "seed": trial.seed,
            "status": trial.status.value,
            "error": trial.error or "",
            "epochs_run": trial.epochs_run,
            "final_loss": trial.final_loss
        }
        row.update({name: trial.metrics.get(name) for name in rep.metric_names})
        rows.append(row)
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS + list(rep.metric_names))


def aggregates_frame(rep: SweepReport) -> pd.DataFrame:
    columns = AGGREGATE_COLUMNS + [f"{m}_{stat}" for m in rep.metric_names for stat in ("mean", "std")]
    return pd.DataFrame(rep.aggregates, columns=columns)


def tradeoff_rows(rep: SweepReport) -> List[Dict[str, float]]:
    """Per eta: accuracy lost and relative iota reduction against vanilla."""
    notion = rep.config.base.notion.name
    key = f"iota_{notion}_mean"
    try:
        vanilla = rep.aggregate_for(0.0)
    except KeyError:
        return []
    rows = []
    for row in rep.aggregates:
        base_iota = vanilla.get(key, float("nan"))
        iota_now = row.get(key, float("nan"))
        reduction = 1.0 - iota_now / base_iota if base_iota and np.isfinite(base_iota) and base_iota > 0 else float("nan")
        rows.append({
            "eta": row["eta"],
            "acc_loss": vanilla.get("ACC_mean_mean", float("nan")) - row.get("ACC_mean_mean", float("nan")),
            f"iota_{notion}_reduction": reduction
        })
    return rows


def summary_text(rep: SweepReport) -> str:
    cfg = rep.config
    lines = [
        f"MIFair sweep summary (format {REPORT_FORMAT_VERSION})",
        f"notion: {cfg.base.notion.name}",
        f"etas: {', '.join(f'{e:g}' for e in cfg.etas)}",
        f"seeds: {', '.join(str(s) for s in cfg.seeds)}",
        f"threshold: {cfg.threshold:g}",
        f"trials: {len(rep.trials)} ({rep.n_failed} failed)",
        "",
        "Threshold crossing (smallest eta with every mean |pairwise| <= threshold):"
    ]
    crossing = pd.DataFrame(
        [c.to_dict() for c in rep.crossings],
        columns=["kind", "eta", "max_abs_at_eta", "vanilla_max_abs"]
    )
    lines.append(crossing.to_string(index=False, na_rep="none", float_format=lambda v: f"{v:.6g}")
                 if not crossing.empty else "  (no pairwise metrics)")

    lines.extend(["", "Fairness-accuracy trade-off against vanilla:"])
    tradeoff = pd.DataFrame(tradeoff_rows(rep))
    lines.append(tradeoff.to_string(index=False, na_rep="n/a", float_format=lambda v: f"{v:.6g}")
                 if not tradeoff.empty else "  (no vanilla trials)")

    failed = [t for t in rep.trials if not t.ok]
    if failed:
        lines.extend(["", "Failed trials:"])
        lines.extend(f"  eta={t.eta:g} seed={t.seed}: {t.error}" for t in failed)
    return "\n".join(lines) + "\n"


def emit_report(rep: SweepReport, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Write `trials.csv`, `aggregates.csv` and `summary.txt` into `out_dir`.

    Returns:
        Artifact name to path
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"Cannot create report directory {out_dir}: {e}") from e

    paths = {
        "trials": out_dir / "trials.csv",
        "aggregates": out_dir / "aggregates.csv",
        "summary": out_dir / "summary.txt"
    }
    _write_csv(trials_frame(rep), paths["trials"])
    _write_csv(aggregates_frame(rep), paths["aggregates"])
    try:
        with open(paths["summary"], "w", encoding="utf-8", newline="\n") as f:
            f.write(summary_text(rep))
    except OSError as e:
        raise OSError(f"Cannot write {paths['summary']}: {e}") from e

    logger.info(f"Wrote sweep report ({len(rep.trials)} trials, {len(rep.aggregates)} etas) to {out_dir}")
    return paths
