"""
Eye-stream conditioning stages.

Every stage takes a RawEyeStream and returns a new one; inputs are
never modified in place.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from django.conf import settings
from scipy.interpolate import interp1d

from apps.core.exceptions import ContractError, DataError, ParameterError, UnrecoverableStreamError
from .stream import CHANNEL_COLUMNS, SIGNAL_COLUMNS, BlinkInterval, RawEyeStream, runs_of

logger = logging.getLogger(__name__)

DETECTORS = ('events', 'dropout', 'union')


def _blink_evidence(stream: RawEyeStream, detector: str) -> np.ndarray:
    if detector not in DETECTORS:
        raise ParameterError(f"unknown blink detector '{detector}', expected one of {DETECTORS}")
    flagged = stream.events == 'blink'
    dropout = np.isnan(stream.column('pupil_mm'))
    if detector == 'events':
        return flagged
    if detector == 'dropout':
        return dropout
    return flagged | dropout


def detect_blinks(
    stream: RawEyeStream,
    detector: Optional[str] = None,
    min_ms: Optional[float] = None,
    max_ms: Optional[float] = None,
) -> List[BlinkInterval]:
    """
    Turn maximal runs of blink evidence into intervals.

    A blink lasts from its first record to the first record after the run;
    a run that reaches the end of the stream is closed one median sample
    interval after its last record. Valid blinks last between min_ms and
    max_ms inclusive.
    """
    detector = detector or settings.EYEPREP_BLINK_DETECTOR
    min_ms = settings.EYEPREP_BLINK_MIN_MS if min_ms is None else min_ms
    max_ms = settings.EYEPREP_BLINK_MAX_MS if max_ms is None else max_ms

    timestamps = stream.timestamps
    period = float(np.median(np.diff(timestamps))) if len(timestamps) > 1 else 0.0
    intervals = []
    for start, stop in runs_of(_blink_evidence(stream, detector)):
        start_ms = float(timestamps[start])
        end_ms = float(timestamps[stop]) if stop < len(timestamps) else float(timestamps[stop - 1]) + period
        duration = end_ms - start_ms
        intervals.append(BlinkInterval(start_ms, end_ms, start, stop, min_ms <= duration <= max_ms))

    invalid = sum(not interval.valid for interval in intervals)
    logger.debug(f"Detected {len(intervals)} blinks ({invalid} invalid) with detector '{detector}'")
    return intervals


def _interpolate_rows(frame: pd.DataFrame, rows: np.ndarray, anchors: np.ndarray, column: str) -> bool:
    """
    Linearly interpolate frame[column] at rows from anchor rows.

    Outside the anchors the nearest anchor value is used. Returns False
    when the column has no anchor to interpolate from.
    """
    values = frame[column].to_numpy(dtype=np.float64)
    usable = anchors & ~np.isnan(values)
    if not usable.any():
        return False
    times = frame['timestamp_ms'].to_numpy(dtype=np.float64)
    filled = values.copy()
    filled[rows] = np.interp(times[rows], times[usable], values[usable])
    frame[column] = filled
    return True


def correct_blinks(stream: RawEyeStream, intervals: Sequence[BlinkInterval]) -> RawEyeStream:
    """
    Replace gaze and pupil over invalid blinks by linear interpolation.

    Anchors are records outside every blink interval. Valid blinks are
    left untouched; event types are preserved.

    Raises:
        UnrecoverableStreamError: if a channel has no record to interpolate from
    """
    frame = stream.frame.copy()
    inside_any = np.zeros(len(frame), dtype=bool)
    invalid_rows = np.zeros(len(frame), dtype=bool)
    for interval in intervals:
        inside_any[interval.start_index:interval.stop_index] = True
        if not interval.valid:
            invalid_rows[interval.start_index:interval.stop_index] = True

    if not invalid_rows.any():
        return stream.with_frame(frame)

    anchors = ~inside_any
    for column in SIGNAL_COLUMNS:
        if not _interpolate_rows(frame, invalid_rows, anchors, column):
            raise UnrecoverableStreamError(f"no valid '{column}' record to interpolate invalid blinks from")
    logger.debug(f"Corrected {int(invalid_rows.sum())} records inside invalid blinks")
    return stream.with_frame(frame)


def correct_saccades(stream: RawEyeStream) -> RawEyeStream:
    """
    Interpolate gaze and pupil over saccade runs between flanking fixation samples.
    """
    frame = stream.frame.copy()
    saccade_rows = stream.events == 'saccade'
    if not saccade_rows.any():
        return stream.with_frame(frame)
    fixation_rows = stream.events == 'fixation'
    for column in SIGNAL_COLUMNS:
        _interpolate_rows(frame, saccade_rows, fixation_rows, column)
    return stream.with_frame(frame)


def fill_dropouts(stream: RawEyeStream) -> RawEyeStream:
    """
    Fill every remaining missing channel value, including dropouts inside valid blinks.

    Raises:
        UnrecoverableStreamError: if a channel has no value at all
    """
    frame = stream.frame.copy()
    present = np.ones(len(frame), dtype=bool)
    for column in CHANNEL_COLUMNS:
        missing = frame[column].isna().to_numpy()
        if not missing.any():
            continue
        if not _interpolate_rows(frame, missing, present, column):
            raise UnrecoverableStreamError(f"channel '{column}' has no recorded value")
    return stream.with_frame(frame)


def pupil_fluctuation(stream: RawEyeStream) -> RawEyeStream:
    """
    Add pupil_fluct, the first difference of pupil diameter with d_0 = 0.

    Raises:
        ContractError: if pupil values are still missing
    """
    pupil = stream.column('pupil_mm')
    if np.isnan(pupil).any():
        raise ContractError("pupil_fluctuation needs a stream without missing pupil values")
    frame = stream.frame.copy()
    frame['pupil_fluct'] = np.concatenate(([0.0], np.diff(pupil)))
    return stream.with_frame(frame)


def derive_gaze_time(stream: RawEyeStream) -> RawEyeStream:
    """Add gaze_time, seconds elapsed within the current fixation run (0 elsewhere)."""
    timestamps = stream.timestamps
    gaze_time = np.zeros(len(timestamps))
    for start, stop in runs_of(stream.events == 'fixation'):
        gaze_time[start:stop] = (timestamps[start:stop] - timestamps[start]) / 1000.0
    frame = stream.frame.copy()
    frame['gaze_time'] = gaze_time
    return stream.with_frame(frame)


def filter_fixations(fixation_frames: pd.DataFrame, invalid_intervals: Sequence[BlinkInterval]) -> pd.DataFrame:
    """
    Drop fixation frames whose timestamp falls inside an invalid blink.
    """
    timestamps = fixation_frames['timestamp_ms'].to_numpy(dtype=np.float64)
    keep = np.ones(len(fixation_frames), dtype=bool)
    for interval in invalid_intervals:
        if interval.valid:
            continue
        keep &= ~((timestamps >= interval.start_ms) & (timestamps < interval.end_ms))
    kept = fixation_frames.loc[keep].reset_index(drop=True)
    if len(fixation_frames) and kept.empty:
        logger.warning("Every fixation frame fell inside an invalid blink; no frames remain")
    return kept


def resample_uniform(
    stream: RawEyeStream,
    target_len: int,
    columns: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """
    Resample channels onto target_len evenly spaced instants.

    The grid starts at the first timestamp and steps by the stream's
    span over target_len periods, so a uniform stream resampled to its
    own length is unchanged.

    Raises:
        ParameterError: if target_len < 2
        DataError: if the stream has fewer than 2 records or a channel has missing values
    """
    return resample_frame(stream.frame, target_len, columns or CHANNEL_COLUMNS)


def resample_frame(frame: pd.DataFrame, target_len: int, columns: Sequence[str]) -> np.ndarray:
    if target_len < 2:
        raise ParameterError(f"target_len must be >= 2, got {target_len}")
    count = len(frame)
    if count < 2:
        raise DataError(f"cannot resample a stream of {count} record(s)")
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise ContractError(f"cannot resample missing columns {missing}")
    values = frame[list(columns)].to_numpy(dtype=np.float64)
    if np.isnan(values).any():
        raise DataError("cannot resample channels with missing values")

    timestamps = frame['timestamp_ms'].to_numpy(dtype=np.float64)
    step = (timestamps[-1] - timestamps[0]) * count / (count - 1) / target_len
    grid = timestamps[0] + step * np.arange(target_len)
    interpolate = interp1d(timestamps, values, axis=0, kind='linear', fill_value='extrapolate', assume_sorted=True)
    return interpolate(grid)
