"""Training: instance-to-tensor batching, the optimization loop with
early stopping, and the training log.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .builders.base import PointQAInstance
from .errors import ConfigurationError, ContractError, TrainingDivergedError
from .features import FeatureStore, geometry_features, select_regions
from .models import ModelConfig, build_model, save_checkpoint
from .models.vocab import AnswerVocab, Vocabulary

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    optimizer: str = "adamax"
    learning_rate: float = 0.002
    warmup_decay: bool = False
    patience: int = 500  # iterations without val improvement
    max_iterations: int = 2000
    batch_size: int = 64
    val_interval: int = 100
    seed: int = 0

    def validate(self) -> None:
        if self.optimizer not in ("adamax", "adam"):
            raise ConfigurationError(f"unknown optimizer: {self.optimizer}")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be positive")
        if self.patience < 1:
            raise ConfigurationError("patience must be >= 1")


class TensorBatcher:
    """Precomputes model inputs for a dataset against a feature store.

    The point stream is selected with the configured strategy; the image
    stream always carries the full proposal set.  Instances without a
    point (the verbal-disambiguation data) fall back to full-image
    selection for the point stream.
    """

    def __init__(
        self,
        instances: list[PointQAInstance],
        features: FeatureStore,
        image_dims: dict[str, tuple[int, int]],
        vocab: Vocabulary,
        answers: AnswerVocab,
        strategy: str = "all_containing",
        n_proposals: int = 16,
        max_question_len: int = 20,
    ) -> None:
        if not instances:
            raise ContractError("empty dataset")
        self.instances = instances
        self.vocab = vocab
        self.answers = answers
        self.strategy = strategy
        self.n = n_proposals
        self.max_question_len = max_question_len
        self.fallback_count = 0

        img_cache: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._tokens: list[list[int]] = []
        self._labels: list[int] = []
        self._pt: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        self._img: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []

        for inst in instances:
            if inst.answer not in answers:
                raise ContractError(
                    f"answer {inst.answer!r} of {inst.qa_id} not in model vocabulary"
                )
            self._tokens.append(vocab.encode(inst.question, max_question_len))
            self._labels.append(answers.index[inst.answer])
            width, height = image_dims[inst.image_id]
            proposals = features.get(inst.image_id)

            if inst.image_id not in img_cache:
                full = select_regions(proposals, None, "full_image", n_proposals)
                img_cache[inst.image_id] = self._augment(full, width, height)
            self._img.append(img_cache[inst.image_id])

            strategy = self.strategy
            point = inst.point
            if point is None and strategy != "gt_box":
                strategy = "full_image"
            selected = select_regions(
                proposals, point, strategy, n_proposals, gt_box=inst.gt_box
            )
            if selected.used_fallback:
                self.fallback_count += 1
            self._pt.append(self._augment(selected, width, height))

    @staticmethod
    def _augment(selected, width: int, height: int):
        geo = geometry_features(selected.boxes, width, height)
        feats = np.concatenate([selected.features, geo], axis=1)
        return feats, selected.mask.copy(), selected.boxes.copy()

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def input_dim(self) -> int:
        return self._pt[0][0].shape[1]

    def subset_with_question(self, indices: list[int], question: str) -> "TensorBatcher":
        """A view over selected rows with the question text replaced but
        the precomputed regions kept, for question-swap analysis."""
        clone = object.__new__(TensorBatcher)
        clone.instances = [
            dataclasses.replace(self.instances[i], question=question) for i in indices
        ]
        clone.vocab = self.vocab
        clone.answers = self.answers
        clone.strategy = self.strategy
        clone.n = self.n
        clone.max_question_len = self.max_question_len
        clone.fallback_count = 0
        tokens = self.vocab.encode(question, self.max_question_len)
        clone._tokens = [list(tokens) for _ in indices]
        clone._labels = [self._labels[i] for i in indices]
        clone._pt = [self._pt[i] for i in indices]
        clone._img = [self._img[i] for i in indices]
        return clone

    def batch(self, indices: list[int], dtype: torch.dtype = torch.float32) -> dict:
        tokens = [self._tokens[i] for i in indices]
        t = max(len(tk) for tk in tokens)
        tok = torch.zeros((len(indices), t), dtype=torch.long)
        tok_mask = torch.zeros((len(indices), t), dtype=torch.bool)
        for row, tk in enumerate(tokens):
            tok[row, : len(tk)] = torch.tensor(tk, dtype=torch.long)
            tok_mask[row, : len(tk)] = True

        def stack(slot: int, source) -> torch.Tensor:
            return torch.from_numpy(np.stack([source[i][slot] for i in indices]))

        return {
            "tokens": tok,
            "token_mask": tok_mask,
            "pt_feats": stack(0, self._pt).to(dtype),
            "pt_mask": stack(1, self._pt),
            "pt_boxes": stack(2, self._pt).to(dtype),
            "img_feats": stack(0, self._img).to(dtype),
            "img_mask": stack(1, self._img),
            "img_boxes": stack(2, self._img).to(dtype),
            "labels": torch.tensor([self._labels[i] for i in indices], dtype=torch.long),
        }

    def iter_batches(self, batch_size: int, order: list[int] | None = None):
        order = order if order is not None else list(range(len(self.instances)))
        for start in range(0, len(order), batch_size):
            chunk = order[start : start + batch_size]
            yield chunk, self.batch(chunk)


@torch.no_grad()
def accuracy(model: torch.nn.Module, batcher: TensorBatcher, batch_size: int = 256) -> float:
    model.eval()
    correct = 0
    for _, batch in batcher.iter_batches(batch_size):
        logits, _ = model(batch)
        correct += int((logits.argmax(dim=1) == batch["labels"]).sum())
    return correct / len(batcher)


@dataclass
class TrainResult:
    best_val: float
    best_iteration: int
    iterations: int
    log: list[dict] = field(default_factory=list)

    def write_log(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for entry in self.log:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")


def _learning_rate(config: TrainConfig, iteration: int) -> float:
    if not config.warmup_decay:
        return config.learning_rate
    warmup = max(1, int(0.1 * config.max_iterations))
    if iteration <= warmup:
        return config.learning_rate * iteration / warmup
    frac = (iteration - warmup) / max(1, config.max_iterations - warmup)
    return config.learning_rate * (1.0 - 0.9 * min(1.0, frac))


def train(
    model: torch.nn.Module,
    train_batcher: TensorBatcher,
    val_batcher: TensorBatcher,
    config: TrainConfig,
) -> TrainResult:
    """Minimize cross-entropy with periodic val checks; restores and
    returns the best-val weights when patience runs out."""
    config.validate()
    torch.manual_seed(config.seed)
    opt_cls = torch.optim.Adamax if config.optimizer == "adamax" else torch.optim.Adam
    optimizer = opt_cls(model.parameters(), lr=config.learning_rate)

    rng = random.Random(config.seed)
    best_val = -1.0
    best_iteration = 0
    best_state = None
    log: list[dict] = []
    iteration = 0
    stop = False

    def check(loss_value: float) -> bool:
        nonlocal best_val, best_iteration, best_state
        val_acc = accuracy(model, val_batcher)
        model.train()
        log.append(
            {"iteration": iteration, "loss": loss_value, "val_accuracy": val_acc}
        )
        logger.info("iteration %d: loss %.4f, val accuracy %.4f", iteration, loss_value, val_acc)
        if val_acc > best_val:
            best_val = val_acc
            best_iteration = iteration
            best_state = copy.deepcopy(model.state_dict())
            return False
        return iteration - best_iteration >= config.patience

    model.train()
    last_loss = math.nan
    while not stop:
        order = list(range(len(train_batcher)))
        rng.shuffle(order)
        for _, batch in train_batcher.iter_batches(config.batch_size, order):
            iteration += 1
            for group in optimizer.param_groups:
                group["lr"] = _learning_rate(config, iteration)
            logits, _ = model(batch)
            loss = torch.nn.functional.cross_entropy(logits, batch["labels"])
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss is not finite at iteration {iteration}"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            last_loss = loss.item()

            if iteration % config.val_interval == 0 and check(last_loss):
                stop = True
                break
            if iteration >= config.max_iterations:
                if iteration % config.val_interval != 0:
                    check(last_loss)
                stop = True
                break

    if best_state is None:
        check(last_loss)
    model.load_state_dict(best_state)
    model.eval()
    return TrainResult(
        best_val=best_val, best_iteration=best_iteration, iterations=iteration, log=log
    )


def train_from_files(
    model_config: ModelConfig,
    train_instances: list[PointQAInstance],
    val_instances: list[PointQAInstance],
    features: FeatureStore,
    image_dims: dict[str, tuple[int, int]],
    config: TrainConfig,
    strategy: str = "all_containing",
    out_dir: str | Path | None = None,
) -> tuple[torch.nn.Module, TrainResult]:
    """End-to-end helper: build vocabularies from train, train, and
    optionally persist checkpoint plus log."""
    model_config.question_vocab = Vocabulary.from_questions(
        [i.question for i in train_instances]
    ).tokens
    model_config.answer_vocab = AnswerVocab(
        [i.answer for i in train_instances]
    ).labels
    vocab = Vocabulary(model_config.question_vocab)
    answers = AnswerVocab(model_config.answer_vocab)

    model = build_model(model_config)
    kwargs = dict(
        features=features,
        image_dims=image_dims,
        vocab=vocab,
        answers=answers,
        strategy=strategy,
        n_proposals=model_config.n_proposals,
        max_question_len=model_config.max_question_len,
    )
    train_batcher = TensorBatcher(train_instances, **kwargs)
    val_batcher = TensorBatcher(val_instances, **kwargs)
    result = train(model, train_batcher, val_batcher, config)
    if out_dir is not None:
        out_dir = Path(out_dir)
        save_checkpoint(model_config, model.state_dict(), out_dir / "checkpoint.pqck")
        result.write_log(out_dir / "train_log.jsonl")
    return model, result
