"""
Static PNG plots of experiment reports.
"""

import logging
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from apps.core.exceptions import DataError  # noqa: E402
from apps.metrics.correlation import COEFFICIENTS  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _metric_columns(frame: pd.DataFrame):
    return [column[len('mean_'):] for column in frame.columns if column.startswith('mean_')]


def _require(frame: pd.DataFrame, columns, name: str):
    missing = [column for column in columns if column not in frame.columns]
    if missing or frame.empty:
        raise DataError(f"{name} report is empty or lacks columns {missing}")


def plot_noise(frame: pd.DataFrame, path: PathLike) -> Path:
    """Scored metrics against test noise variance, with fold std as error bars."""
    _require(frame, ['noise_variance'], 'noise')
    metrics = _metric_columns(frame)
    ordered = frame.sort_values('noise_variance', kind='stable')
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for metric in metrics:
        ax.errorbar(
            ordered['noise_variance'], ordered[f'mean_{metric}'], yerr=ordered[f'std_{metric}'],
            marker='o', capsize=3, label=metric.upper(),
        )
    ax.set_xlabel('Test noise variance')
    ax.set_ylabel('Score')
    ax.set_title('Robustness to Gaussian input noise')
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_modalities(frame: pd.DataFrame, path: PathLike) -> Path:
    """Grouped bars of every scored metric per modality subset."""
    _require(frame, ['label'], 'modality ablation')
    metrics = _metric_columns(frame)
    positions = np.arange(len(frame))
    width = 0.8 / max(len(metrics), 1)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for index, metric in enumerate(metrics):
        ax.bar(
            positions + index * width, frame[f'mean_{metric}'], width,
            yerr=frame[f'std_{metric}'], capsize=2, label=metric.upper(),
        )
    ax.set_xticks(positions + width * (len(metrics) - 1) / 2)
    ax.set_xticklabels(frame['label'].astype(str))
    ax.set_xlabel('Modalities (F face, E eye movement, G fixation map)')
    ax.set_ylabel('Score')
    ax.set_title('Modality ablation')
    ax.legend()
    return _save(fig, path)


def plot_correlations(frame: pd.DataFrame, path: PathLike) -> Path:
    """One panel per coefficient: ER and FER bars for every emotion."""
    _require(frame, ['emotion', 'view', *COEFFICIENTS], 'correlation')
    emotions = list(dict.fromkeys(frame['emotion']))
    positions = np.arange(len(emotions))
    fig, axes = plt.subplots(1, len(COEFFICIENTS), figsize=(15, 4.5), sharey=True)
    for ax, coefficient in zip(axes, COEFFICIENTS):
        for offset, view in ((-0.2, 'ER'), (0.2, 'FER')):
            values = (
                frame[frame['view'] == view]
                .set_index('emotion')
                .reindex(emotions)[coefficient]
                .astype(float)
                .fillna(0.0)
            )
            ax.bar(positions + offset, values, 0.4, label=view)
        ax.set_xticks(positions)
        ax.set_xticklabels(emotions, rotation=45, ha='right')
        ax.set_title(coefficient.capitalize())
    axes[0].set_ylabel('Mean |coefficient| over eye channels')
    axes[0].legend()
    return _save(fig, path)


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    logger.info(f"Saved plot to {path}")
    return path
