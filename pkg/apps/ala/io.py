"""
JSONL persistence of annotation bundles.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from apps.core.exceptions import MalformedRecordError, first_error_field, get_error_message
from .serializers import AnnotationBundleSerializer
from .types import AnnotationBundle

logger = logging.getLogger(__name__)


def save_bundles(
    bundles: Sequence[AnnotationBundle],
    path: Union[str, Path],
    er_labels: Optional[Dict[str, int]] = None,
):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as handle:
        for bundle in bundles:
            record = bundle.to_dict()
            if er_labels is not None and bundle.item_id in er_labels:
                record['er_label'] = er_labels[bundle.item_id]
            handle.write(json.dumps(record) + '\n')


def load_bundles(path: Union[str, Path]) -> Tuple[List[AnnotationBundle], Dict[str, int]]:
    """
    Read bundles and any ER labels stored next to them.

    Raises:
        MalformedRecordError: with line number and field name
    """
    bundles, er_labels = [], {}
    with Path(path).open('r', encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(line_number, 'record', f"invalid JSON: {exc.msg}") from exc
            serializer = AnnotationBundleSerializer(data=record)
            if not serializer.is_valid():
                raise MalformedRecordError(
                    line_number, first_error_field(serializer.errors), get_error_message(serializer.errors)
                )
            data = serializer.validated_data
            bundles.append(AnnotationBundle(
                item_id=data['item_id'],
                class_count=data['class_count'],
                machine_label=data.get('machine_label'),
                expert_labels=list(data.get('expert_labels', [])),
                ratings=dict(data.get('ratings', {})),
            ))
            if 'er_label' in data:
                er_labels[data['item_id']] = data['er_label']
    logger.info(f"Loaded {len(bundles)} annotation bundles from {path}")
    return bundles, er_labels
