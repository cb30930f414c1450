"""
Raw eye-tracking streams and blink intervals.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Union

import numpy as np
import pandas as pd

from apps.core.exceptions import DataError, MalformedRecordError

GAZE_COLUMNS = ('gaze_x', 'gaze_y', 'gaze_dir_x', 'gaze_dir_y')
EYE_POSITION_COLUMNS = ('eye_pos_x', 'eye_pos_y', 'eye_pos_z')
SIGNAL_COLUMNS = GAZE_COLUMNS + ('pupil_mm',)
CHANNEL_COLUMNS = SIGNAL_COLUMNS + EYE_POSITION_COLUMNS
RAW_COLUMNS = ('timestamp_ms',) + CHANNEL_COLUMNS + ('event_type',)
EVENT_TYPES = ('fixation', 'saccade', 'blink')


class RawEyeStream:
    """
    Time-ordered eye-tracker records backed by a DataFrame.

    Missing pupil or gaze samples are NaN. Derived columns such as
    pupil_fluct and gaze_time may be added by the preprocessing stages.
    """

    def __init__(self, frame: pd.DataFrame):
        missing = [column for column in RAW_COLUMNS if column not in frame.columns]
        if missing:
            raise DataError(f"eye stream is missing columns: {missing}")
        frame = frame.reset_index(drop=True).copy()
        if frame.empty:
            raise DataError("eye stream has no records")
        timestamps = frame['timestamp_ms'].to_numpy(dtype=np.float64)
        if np.any(~np.isfinite(timestamps)) or np.any(np.diff(timestamps) <= 0):
            raise DataError("eye stream timestamps must be finite and strictly increasing")
        unknown = sorted(set(frame['event_type']) - set(EVENT_TYPES))
        if unknown:
            raise DataError(f"unknown event types: {unknown}")
        for column in CHANNEL_COLUMNS:
            frame[column] = frame[column].astype(np.float64)
        self.frame = frame

    @classmethod
    def from_records(cls, records: Iterable[Dict[str, object]]) -> 'RawEyeStream':
        return cls(pd.DataFrame(list(records), columns=list(RAW_COLUMNS)))

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> 'RawEyeStream':
        """
        Raises:
            MalformedRecordError: if a channel value cannot be parsed as a number
        """
        frame = pd.read_csv(path)
        for column in CHANNEL_COLUMNS + ('timestamp_ms',):
            if column not in frame.columns:
                continue
            parsed = pd.to_numeric(frame[column], errors='coerce')
            bad = parsed.isna() & frame[column].notna()
            if bad.any():
                # header is line 1
                raise MalformedRecordError(int(bad.idxmax()) + 2, column, 'not a number')
            frame[column] = parsed
        return cls(frame)

    def to_csv(self, path: Union[str, Path]):
        self.frame.to_csv(path, index=False)

    @property
    def timestamps(self) -> np.ndarray:
        return self.frame['timestamp_ms'].to_numpy(dtype=np.float64)

    @property
    def events(self) -> np.ndarray:
        return self.frame['event_type'].to_numpy()

    def column(self, name: str) -> np.ndarray:
        return self.frame[name].to_numpy(dtype=np.float64)

    def with_frame(self, frame: pd.DataFrame) -> 'RawEyeStream':
        return RawEyeStream(frame)

    def copy(self) -> 'RawEyeStream':
        return RawEyeStream(self.frame)

    def __len__(self):
        return len(self.frame)

    def equals(self, other: 'RawEyeStream') -> bool:
        return self.frame.equals(other.frame)


@dataclass(frozen=True)
class BlinkInterval:
    """
    A maximal run of blink evidence.

    start_index/stop_index are row positions (stop exclusive); end_ms is
    the timestamp of the first record after the run.
    """
    start_ms: float
    end_ms: float
    start_index: int
    stop_index: int
    valid: bool

    @property
    def duration_ms(self) -> float:
        return self.end_ms - self.start_ms

    def contains(self, timestamp_ms: float) -> bool:
        return self.start_ms <= timestamp_ms < self.end_ms

    def to_dict(self) -> Dict[str, object]:
        return {
            'start_ms': self.start_ms,
            'end_ms': self.end_ms,
            'duration_ms': self.duration_ms,
            'records': self.stop_index - self.start_index,
            'valid': self.valid,
        }


def runs_of(mask: np.ndarray) -> List[tuple]:
    """(start, stop) row positions of every maximal True run."""
    padded = np.concatenate(([0], mask.astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    return [(int(start), int(stop)) for start, stop in edges.reshape(-1, 2)]
