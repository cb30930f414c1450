"""
Seeded raw eye streams with planned blinks, saccades and dropouts.
"""

from typing import Sequence, Tuple

import numpy as np
import pandas as pd

from .stream import RAW_COLUMNS, RawEyeStream


def simulate_raw_stream(
    n_records: int = 400,
    period_ms: float = 10.0,
    blinks: Sequence[Tuple[float, float]] = ((1000.0, 200.0), (2500.0, 40.0)),
    saccade_every: int = 40,
    saccade_len: int = 3,
    dropout_rate: float = 0.0,
    seed: int = 0,
) -> RawEyeStream:
    """
    Build a stream sampled every period_ms.

    blinks lists (start_ms, duration_ms) pairs; blink records carry no gaze
    or pupil value. A saccade of saccade_len records starts every
    saccade_every records. dropout_rate is the chance that a fixation
    record loses its pupil value.
    """
    rng = np.random.default_rng(seed)
    timestamps = np.arange(n_records) * period_ms
    events = np.array(['fixation'] * n_records, dtype=object)
    if saccade_every > 0:
        for start in range(saccade_every // 2, n_records, saccade_every):
            events[start:start + saccade_len] = 'saccade'

    # gaze hops between fixation targets at every saccade
    targets = rng.uniform(0.2, 0.8, size=(n_records // max(saccade_every, 1) + 2, 2))
    segment = np.cumsum(np.concatenate(([0], (events[1:] == 'saccade') & (events[:-1] != 'saccade'))))
    gaze = targets[segment] + rng.normal(scale=0.005, size=(n_records, 2))
    direction = np.column_stack([gaze[:, 0] - 0.5, gaze[:, 1] - 0.5]) + rng.normal(scale=0.01, size=(n_records, 2))
    pupil = 4.0 + 0.3 * np.sin(timestamps / 700.0) + rng.normal(scale=0.02, size=n_records)
    position = np.array([0.0, 0.0, 600.0]) + rng.normal(scale=1.0, size=(n_records, 3))

    frame = pd.DataFrame({
        'timestamp_ms': timestamps,
        'gaze_x': gaze[:, 0],
        'gaze_y': gaze[:, 1],
        'gaze_dir_x': direction[:, 0],
        'gaze_dir_y': direction[:, 1],
        'pupil_mm': pupil,
        'eye_pos_x': position[:, 0],
        'eye_pos_y': position[:, 1],
        'eye_pos_z': position[:, 2],
        'event_type': events,
    }, columns=list(RAW_COLUMNS))

    if dropout_rate > 0:
        dropped = (rng.random(n_records) < dropout_rate) & (events == 'fixation')
        frame.loc[dropped, 'pupil_mm'] = np.nan

    for start_ms, duration_ms in blinks:
        rows = (timestamps >= start_ms) & (timestamps < start_ms + duration_ms)
        frame.loc[rows, 'event_type'] = 'blink'
        frame.loc[rows, ['gaze_x', 'gaze_y', 'gaze_dir_x', 'gaze_dir_y', 'pupil_mm']] = np.nan
    return RawEyeStream(frame)


def simulate_fixation_frames(stream: RawEyeStream, every: int = 4, grid: int = 4) -> pd.DataFrame:
    """
    Fixation-density frames (grid x grid cells) taken every `every` records.

    Each frame is a normalized Gaussian bump around the current gaze point;
    frames at records without gaze are uniform.
    """
    frame = stream.frame.iloc[::every]
    centers = (np.arange(grid) + 0.5) / grid
    cx, cy = np.meshgrid(centers, centers, indexing='ij')
    rows = []
    for _, record in frame.iterrows():
        if np.isnan(record['gaze_x']) or np.isnan(record['gaze_y']):
            density = np.full((grid, grid), 1.0 / grid ** 2)
        else:
            bump = np.exp(-((cx - record['gaze_x']) ** 2 + (cy - record['gaze_y']) ** 2) / 0.05)
            density = bump / bump.sum()
        rows.append([record['timestamp_ms']] + density.reshape(-1).tolist())
    columns = ['timestamp_ms'] + [f'fix_{i:02d}' for i in range(grid * grid)]
    return pd.DataFrame(rows, columns=columns)
