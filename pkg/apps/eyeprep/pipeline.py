"""
End-to-end eye-stream preprocessing.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from apps.datamodel.types import EYEMOVE_CHANNELS
from .services import (
    correct_blinks,
    correct_saccades,
    derive_gaze_time,
    detect_blinks,
    fill_dropouts,
    filter_fixations,
    pupil_fluctuation,
    resample_frame,
    resample_uniform,
)
from .stream import RawEyeStream

logger = logging.getLogger(__name__)


@dataclass
class PreprocessResult:
    cleaned: RawEyeStream
    eyemove: np.ndarray
    fixation: Optional[np.ndarray] = None
    report: Dict[str, Any] = field(default_factory=dict)


def fixation_columns(frames: pd.DataFrame):
    return [column for column in frames.columns if column != 'timestamp_ms']


def preprocess_stream(
    stream: RawEyeStream,
    target_len: int = 32,
    fixations: Optional[pd.DataFrame] = None,
    fixation_len: int = 32,
    detector: Optional[str] = None,
) -> PreprocessResult:
    """
    Detect blinks, correct invalid blinks and saccades, fill dropouts,
    derive pupil fluctuation and gaze time, and resample to target_len.

    Fixation frames, when given, are filtered against the invalid blinks
    and resampled to fixation_len; if fewer than two frames survive the
    fixation tensor is all zeros.
    """
    intervals = detect_blinks(stream, detector=detector)
    invalid = [interval for interval in intervals if not interval.valid]
    missing_before = int(stream.frame[list(EYEMOVE_CHANNELS[:4]) + ['pupil_mm']].isna().to_numpy().sum())

    corrected = correct_blinks(stream, intervals)
    corrected = correct_saccades(corrected)
    corrected = fill_dropouts(corrected)
    corrected = derive_gaze_time(pupil_fluctuation(corrected))
    eyemove = resample_uniform(corrected, target_len, EYEMOVE_CHANNELS)

    report: Dict[str, Any] = {
        'records': len(stream),
        'blinks': [interval.to_dict() for interval in intervals],
        'invalid_blinks': len(invalid),
        'corrected_blink_records': int(sum(i.stop_index - i.start_index for i in invalid)),
        'corrected_saccade_records': int((stream.events == 'saccade').sum()),
        'missing_values_filled': missing_before,
    }

    fixation = None
    if fixations is not None:
        kept = filter_fixations(fixations, invalid)
        columns = fixation_columns(fixations)
        report['fixation_frames'] = len(fixations)
        report['fixation_frames_dropped'] = len(fixations) - len(kept)
        if len(kept) >= 2:
            fixation = resample_frame(kept, fixation_len, columns)
        else:
            logger.warning(f"Only {len(kept)} fixation frame(s) left; emitting a zero fixation sequence")
            fixation = np.zeros((fixation_len, len(columns)))

    logger.info(
        f"Preprocessed stream of {len(stream)} records: "
        f"{len(intervals)} blinks ({len(invalid)} invalid)"
    )
    return PreprocessResult(cleaned=corrected, eyemove=eyemove, fixation=fixation, report=report)
