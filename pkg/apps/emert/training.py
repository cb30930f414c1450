"""
Mini-batch training of EMERT models.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from apps.core.exceptions import EmptyInputError, NonFiniteError, TrainingDivergedError
from apps.datamodel.types import MultimodalSample
from apps.diffkernel.optim import SGD, OptimizerState
from apps.diffkernel.tensor import backward
from .config import ModelConfig
from .evaluation import evaluate
from .losses import adversarial_loss, discriminator_targets, task_losses, total_loss
from .model import Batch, EmertModel, make_batch

logger = logging.getLogger(__name__)

LOG_COLUMNS = [
    'epoch', 'learning_rate', 'loss', 'loss_adv', 'loss_er', 'loss_fer',
    'disc_acc_generic', 'disc_acc_unique',
]


@dataclass
class TrainingLog:
    records: List[Dict[str, float]] = field(default_factory=list)

    def append(self, record: Dict[str, float]):
        self.records.append(record)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.records)
        extra = [column for column in frame.columns if column not in LOG_COLUMNS]
        return frame.reindex(columns=LOG_COLUMNS + extra)

    def save_csv(self, path: Union[str, Path]):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False)

    @property
    def last(self) -> Dict[str, float]:
        return self.records[-1] if self.records else {}


@dataclass
class TrainResult:
    model: EmertModel
    log: TrainingLog
    seen_ids: List[str] = field(default_factory=list)


def _value(node) -> float:
    return float('nan') if node is None else node.item()


class Trainer:
    """
    Runs the mini-batch loop: forward, combined loss, backward, SGD step.

    Batches are drawn from a seeded permutation each epoch, so a run is
    reproducible given (config, seed, samples).
    """

    def __init__(self, cfg: ModelConfig, seed: int = 0, dump_dir: Optional[Union[str, Path]] = None):
        self.cfg = cfg
        self.seed = seed
        self.dump_dir = Path(dump_dir) if dump_dir else None

    def fit(
        self,
        samples: Sequence[MultimodalSample],
        validation: Optional[Sequence[MultimodalSample]] = None,
        model: Optional[EmertModel] = None,
    ) -> TrainResult:
        if not samples:
            raise EmptyInputError("training needs at least one sample")
        cfg = self.cfg
        samples = sorted(samples, key=lambda s: s.sample_id)
        model = model or EmertModel(cfg, seed=self.seed)
        batches_per_epoch = int(np.ceil(len(samples) / cfg.batch_size))
        state = OptimizerState(
            learning_rate=cfg.learning_rate,
            total_steps=batches_per_epoch * cfg.epochs,
            momentum=cfg.momentum,
            weight_decay=cfg.weight_decay,
            grad_clip=cfg.grad_clip,
        )
        optimizer = SGD(model.named_parameters(), state)
        order_rng = np.random.default_rng([self.seed, 1])
        noise_rng = np.random.default_rng([self.seed, 2])
        log = TrainingLog()
        seen = set()

        logger.info(
            f"Training on {len(samples)} samples for {cfg.epochs} epochs "
            f"({model.parameter_count()} parameters, seed {self.seed})"
        )
        for epoch in range(1, cfg.epochs + 1):
            totals = {'loss': 0.0, 'loss_adv': 0.0, 'loss_er': 0.0, 'loss_fer': 0.0}
            hits = {'generic': 0, 'unique': 0}
            tokens = 0
            present = set()
            rate = state.effective_rate()
            permutation = order_rng.permutation(len(samples))
            for index in range(batches_per_epoch):
                chunk = [samples[i] for i in permutation[index * cfg.batch_size:(index + 1) * cfg.batch_size]]
                batch = make_batch(chunk, cfg, noise_variance=cfg.train_noise_variance, rng=noise_rng)
                seen.update(batch.sample_ids)
                components = self._step(model, optimizer, batch, epoch, index)
                for key in totals:
                    if not np.isnan(components[key]):
                        totals[key] += components[key] * len(batch)
                        present.add(key)
                if 'targets' in components:
                    hits['generic'] += components['generic_hits']
                    hits['unique'] += components['unique_hits']
                    tokens += components['targets']

            record = {'epoch': epoch, 'learning_rate': rate}
            record.update({
                key: value / len(samples) if key in present else float('nan') for key, value in totals.items()
            })
            record['disc_acc_generic'] = hits['generic'] / tokens if tokens else float('nan')
            record['disc_acc_unique'] = hits['unique'] / tokens if tokens else float('nan')
            if validation:
                for view, metrics in evaluate(model, validation).scores(cfg).items():
                    for name, value in metrics.items():
                        record[f'val_{view}_{name}'] = value
            log.append(record)
            logger.debug(f"Epoch {epoch}/{cfg.epochs}: loss={record['loss']:.4f}")

        logger.info(f"Training finished: final loss {log.last.get('loss', float('nan')):.4f}")
        return TrainResult(model=model, log=log, seen_ids=sorted(seen))

    def _step(self, model: EmertModel, optimizer: SGD, batch: Batch, epoch: int, index: int) -> Dict[str, float]:
        cfg = self.cfg
        components: Dict[str, float] = {}
        try:
            output = model(batch)
            loss_adv = None
            if cfg.use_mafd:
                targets = discriminator_targets(batch.labels, cfg)
                loss_adv = adversarial_loss(output.generic_logits, output.unique_logits, targets)
                shape = output.generic_logits.shape
                components['targets'] = len(targets)
                components['generic_hits'] = int(
                    (output.generic_logits.value.reshape(-1, shape[-1]).argmax(axis=1) == targets).sum()
                )
                components['unique_hits'] = int(
                    (output.unique_logits.value.reshape(-1, shape[-1]).argmax(axis=1) == targets).sum()
                )
            loss_e, loss_f = task_losses(output.prediction, batch.labels, cfg)
            loss = total_loss(loss_adv, loss_e, loss_f, cfg)
            components.update({
                'loss': loss.item(),
                'loss_adv': _value(loss_adv),
                'loss_er': _value(loss_e),
                'loss_fer': _value(loss_f),
            })
            backward(loss)
            if not np.isfinite(optimizer.global_grad_norm()):
                raise NonFiniteError("gradient norm is not finite")
        except NonFiniteError as exc:
            self._diverged(batch, epoch, index, components, str(exc))
        optimizer.step()
        return components

    def _diverged(self, batch: Batch, epoch: int, index: int, components: Dict[str, float], reason: str):
        dump = {
            'seed': self.seed,
            'epoch': epoch,
            'batch': index,
            'reason': reason,
            'sample_ids': batch.sample_ids,
            'components': {key: value for key, value in components.items() if isinstance(value, float)},
            'input_abs_max': {
                'face': float(np.abs(batch.face).max()),
                'eyemove': float(np.abs(batch.eyemove).max()),
                'fixation': float(np.abs(batch.fixation).max()),
            },
        }
        if self.dump_dir is not None:
            self.dump_dir.mkdir(parents=True, exist_ok=True)
            path = self.dump_dir / f"diverged_seed{self.seed}_epoch{epoch}_batch{index}.json"
            path.write_text(json.dumps(dump, indent=2, default=str))
            dump['dump_path'] = str(path)
        logger.error(f"Training diverged at epoch {epoch}, batch {index}: {reason}")
        raise TrainingDivergedError(f"loss became non-finite at epoch {epoch}, batch {index}", details=dump)


def train(
    samples: Sequence[MultimodalSample],
    cfg: ModelConfig,
    seed: int = 0,
    validation: Optional[Sequence[MultimodalSample]] = None,
    dump_dir: Optional[Union[str, Path]] = None,
) -> TrainResult:
    return Trainer(cfg, seed=seed, dump_dir=dump_dir).fit(samples, validation=validation)
