"""
CSV reports, human-readable summaries and run records.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
from django.conf import settings

from apps.metrics.services import F1_AVERAGING
from .models import ExperimentRun
from .specs import ExperimentSpec, ReportRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def rows_to_frame(rows: Sequence[ReportRow]) -> pd.DataFrame:
    return pd.DataFrame([row.to_record() for row in rows])


def summary_text(title: str, rows: Sequence[ReportRow]) -> str:
    """One line per row: mean +- std of every scored metric."""
    lines = [title, '=' * len(title)]
    for row in rows:
        cells = [
            f"{name.upper()} {row.mean[name]:.4f} +- {row.std[name]:.4f}" for name in row.spec.metric_names
        ]
        flag = '  <- best' if row.extra.get('best') else ''
        lines.append(f"{row.label:<24} {'  '.join(cells)}{flag}")
    if rows and 'f1' in rows[0].spec.metric_names:
        lines.append('')
        lines.append(f"F1 is {F1_AVERAGING}-averaged over classes.")
    if rows:
        lines.append(f"{rows[0].spec.folds}-fold cross-validation, seed {rows[0].spec.seed}.")
    return '\n'.join(lines) + '\n'


def _json_ready(value):
    """Replace NaN with None so reports are valid JSON."""
    if isinstance(value, dict):
        return {key: _json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    if isinstance(value, (float, np.floating)):
        return None if not np.isfinite(value) else float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def record_run(
    kind: str,
    report: Dict[str, object],
    spec: Optional[ExperimentSpec] = None,
    output_path: Optional[PathLike] = None,
    seed: int = 0,
) -> Optional[ExperimentRun]:
    """Store an ExperimentRun when LAB_RECORD_RUNS is on."""
    if not settings.LAB_RECORD_RUNS:
        return None
    run = ExperimentRun.objects.create(
        kind=kind,
        protocol=spec.protocol if spec else '',
        seed=spec.seed if spec else seed,
        spec=_json_ready(spec.to_dict()) if spec else {},
        report=_json_ready(report),
        output_path=str(output_path or ''),
        status=ExperimentRun.Status.COMPLETED,
    )
    logger.info(f"Recorded experiment run {run.id} ({kind})")
    return run


def write_report(
    rows: Sequence[ReportRow],
    out_dir: PathLike,
    name: str,
    kind: Optional[str] = None,
    title: Optional[str] = None,
) -> Path:
    """
    Write <name>.csv and <name>.txt under out_dir and record the run.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    frame = rows_to_frame(rows)
    frame.to_csv(csv_path, index=False)
    (out_dir / f"{name}.txt").write_text(summary_text(title or name, rows), encoding='utf-8')
    logger.info(f"Wrote {len(rows)} report rows to {csv_path}")

    spec = rows[0].spec if rows else None
    record_run(kind or name, {'rows': frame.to_dict(orient='records')}, spec=spec, output_path=csv_path)
    return csv_path


def write_frame(frame: pd.DataFrame, out_dir: PathLike, name: str, kind: Optional[str] = None, seed: int = 0) -> Path:
    """Write a plain table (e.g. the correlation report) and record the run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    frame.to_csv(csv_path, index=False)
    (out_dir / f"{name}.txt").write_text(frame.to_string(index=False) + '\n', encoding='utf-8')
    logger.info(f"Wrote {len(frame)} rows to {csv_path}")
    record_run(kind or name, {'rows': frame.to_dict(orient='records')}, output_path=csv_path, seed=seed)
    return csv_path


def write_json(data: Dict[str, object], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_ready(data), indent=2), encoding='utf-8')
    return path
