"""
JSONL persistence of multimodal datasets.
"""

import json
import logging
from pathlib import Path
from typing import List, Sequence, Union

from apps.core.exceptions import LabelRangeError, MalformedRecordError, first_error_field, get_error_message
from .serializers import SampleRecordSerializer
from .types import LabelSet, MultimodalSample

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def sample_to_record(sample: MultimodalSample) -> dict:
    return {
        'sample_id': sample.sample_id,
        'shapes': {
            'face': list(sample.face_seq.shape),
            'eyemove': list(sample.eyemove_seq.shape),
            'fixation': list(sample.fixation_seq.shape),
        },
        'face': sample.face_seq.reshape(-1).tolist(),
        'eyemove': sample.eyemove_seq.reshape(-1).tolist(),
        'fixation': sample.fixation_seq.reshape(-1).tolist(),
        'labels': sample.labels.to_dict(),
    }


def record_to_sample(record, line_number: int = 0) -> MultimodalSample:
    """
    Validate one decoded record.

    Raises:
        LabelRangeError: if a label is missing or outside its legal range
        MalformedRecordError: for any other invalid field
    """
    serializer = SampleRecordSerializer(data=record)
    if not serializer.is_valid():
        field = first_error_field(serializer.errors)
        message = get_error_message(serializer.errors)
        if field.startswith('labels.'):
            label = field.split('.', 1)[1]
            value = record.get('labels', {}).get(label) if isinstance(record.get('labels'), dict) else None
            raise LabelRangeError(label, value, f"line {line_number}: {message}")
        raise MalformedRecordError(line_number, field, message)

    data = serializer.validated_data
    return MultimodalSample(
        sample_id=data['sample_id'],
        face_seq=data['face_seq'],
        eyemove_seq=data['eyemove_seq'],
        fixation_seq=data['fixation_seq'],
        labels=LabelSet(**data['labels']),
    )


def save_dataset(samples: Sequence[MultimodalSample], path: PathLike) -> None:
    """Write one JSON object per sample; floats keep their exact repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as handle:
        for sample in samples:
            handle.write(json.dumps(sample_to_record(sample)))
            handle.write('\n')
    logger.info(f"Saved {len(samples)} samples to {path}")


def load_dataset(path: PathLike) -> List[MultimodalSample]:
    """
    Read a JSONL dataset. Blank lines are skipped; an empty file is an empty dataset.

    Raises:
        MalformedRecordError: with the 1-based line number and field name
    """
    path = Path(path)
    samples = []
    with path.open('r', encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(line_number, 'record', f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise MalformedRecordError(line_number, 'record', 'expected a JSON object')
            samples.append(record_to_sample(record, line_number))
    logger.info(f"Loaded {len(samples)} samples from {path}")
    return samples
