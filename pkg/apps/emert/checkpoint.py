"""
Checkpoint files: named float64 parameters plus a JSON header.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from apps.core.exceptions import DataError
from .config import ModelConfig
from .model import EmertModel

logger = logging.getLogger(__name__)

HEADER_KEY = '__header__'
FORMAT_VERSION = 1


def save_checkpoint(model: EmertModel, path: Union[str, Path], extra: Optional[Dict[str, object]] = None) -> Path:
    """Write every named parameter and a header with the config and seed."""
    path = Path(path)
    if path.suffix != '.npz':
        path = path.with_suffix('.npz')
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        'format_version': FORMAT_VERSION,
        'seed': model.seed,
        'config': model.config.to_dict(),
        'extra': extra or {},
    }
    arrays = model.state_dict()
    arrays[HEADER_KEY] = np.array(json.dumps(header))
    np.savez(path, **arrays)
    logger.info(f"Saved checkpoint with {len(arrays) - 1} parameters to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[EmertModel, Dict[str, object]]:
    """
    Rebuild a model from a checkpoint.

    Raises:
        DataError: if the file has no readable header
    """
    path = Path(path)
    with np.load(path, allow_pickle=False) as archive:
        if HEADER_KEY not in archive.files:
            raise DataError(f"{path} is not a model checkpoint (no header)")
        try:
            header = json.loads(str(archive[HEADER_KEY]))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: unreadable checkpoint header") from exc
        state = {name: archive[name] for name in archive.files if name != HEADER_KEY}

    model = EmertModel(ModelConfig.from_dict(header['config']), seed=header.get('seed', 0))
    model.load_state_dict(state)
    logger.info(f"Loaded checkpoint from {path}")
    return model, header
