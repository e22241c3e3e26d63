import math

import pytest
import torch

import pointqa.training as training_mod
from pointqa.builders import BuilderConfig, build_local_dataset
from pointqa.errors import ContractError, TrainingDivergedError
from pointqa.models import ModelConfig, build_model, save_checkpoint
from pointqa.models.vocab import AnswerVocab, Vocabulary
from pointqa.scene_graph import build_taxonomy
from pointqa.synthworld import SynthWorldConfig, synth_world_generate
from pointqa.training import TensorBatcher, TrainConfig, _learning_rate, train


def tiny_world(num_images=16, seed=5):
    config = SynthWorldConfig(
        num_images=num_images,
        classes=("shirt",),
        colors=("red", "blue", "green", "yellow"),
        actions=("standing", "sitting", "running", "eating"),
        objects_per_image=(2, 2),
        proposals_per_image=12,
        feature_dim=16,
        noise=0.01,
        seed=seed,
    )
    world = synth_world_generate(config)
    category_map = {c: "color" for c in config.colors}
    category_map.update({a: "action" for a in config.actions})
    taxonomy = build_taxonomy(world.annotations, 100, {}, category_map)
    instances, _ = build_local_dataset(world.annotations, BuilderConfig(seed=seed, taxonomy=taxonomy))
    return world, instances


def make_batchers(world, instances, strategy="all_containing"):
    vocab = Vocabulary.from_questions([i.question for i in instances])
    answers = AnswerVocab([i.answer for i in instances])
    dims = {img.image_id: (img.width, img.height) for img in world.annotations}
    train_insts = [i for i in instances if i.split == "train"]
    val_insts = [i for i in instances if i.split != "train"] or train_insts
    kwargs = dict(
        features=world.features, image_dims=dims, vocab=vocab, answers=answers,
        strategy=strategy, n_proposals=12,
    )
    return (
        TensorBatcher(train_insts, **kwargs),
        TensorBatcher(val_insts, **kwargs),
        vocab,
        answers,
    )


def model_for(vocab, answers, seed=0):
    config = ModelConfig(
        architecture="pythia_local",
        streams="point_q",
        d=32,
        heads=2,
        feature_dim=16,
        n_proposals=12,
        seed=seed,
        answer_vocab=answers.labels,
        question_vocab=vocab.tokens,
    )
    return config, build_model(config)


def test_batcher_rejects_empty_and_unknown_answers():
    world, instances = tiny_world()
    vocab = Vocabulary.from_questions([i.question for i in instances])
    with pytest.raises(ContractError):
        TensorBatcher(
            [], features=world.features, image_dims={}, vocab=vocab,
            answers=AnswerVocab(["x"]),
        )
    with pytest.raises(ContractError):
        make_batchers(world, instances)[0].__class__(
            instances,
            features=world.features,
            image_dims={img.image_id: (256, 256) for img in world.annotations},
            vocab=vocab,
            answers=AnswerVocab(["onlythis"]),
        )


def test_early_stopping_contract(monkeypatch):
    world, instances = tiny_world()
    train_b, val_b, vocab, answers = make_batchers(world, instances)
    _, model = model_for(vocab, answers)

    val_curve = iter([0.5, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6])
    monkeypatch.setattr(training_mod, "accuracy", lambda *a, **k: next(val_curve))
    config = TrainConfig(
        patience=3, max_iterations=100, val_interval=1, batch_size=4, seed=1,
        learning_rate=1e-4,
    )
    result = train(model, train_b, val_b, config)
    # improvement at check 2; three non-improving checks (3, 4, 5) exhaust patience
    assert result.iterations == 5
    assert result.best_val == 0.6
    assert result.best_iteration == 2
    assert [e["iteration"] for e in result.log] == [1, 2, 3, 4, 5]


def test_early_stopping_returns_best_checkpoint(monkeypatch):
    world, instances = tiny_world()
    train_b, val_b, vocab, answers = make_batchers(world, instances)
    _, model = model_for(vocab, answers)

    snapshots = []
    val_curve = iter([0.3, 0.7, 0.5, 0.4, 0.2])

    def fake_accuracy(m, *a, **k):
        snapshots.append({k2: v.clone() for k2, v in m.state_dict().items()})
        return next(val_curve)

    monkeypatch.setattr(training_mod, "accuracy", fake_accuracy)
    config = TrainConfig(patience=3, max_iterations=100, val_interval=1, batch_size=4, seed=1)
    result = train(model, train_b, val_b, config)
    assert result.best_val == 0.7
    best = snapshots[1]
    for name, value in model.state_dict().items():
        assert torch.equal(value, best[name])


def test_log_iterations_strictly_increase():
    world, instances = tiny_world()
    train_b, val_b, vocab, answers = make_batchers(world, instances)
    _, model = model_for(vocab, answers)
    config = TrainConfig(
        patience=50, max_iterations=30, val_interval=10, batch_size=8, seed=2,
        learning_rate=1e-3,
    )
    result = train(model, train_b, val_b, config)
    iters = [e["iteration"] for e in result.log]
    assert iters == sorted(set(iters))
    assert all(b > a for a, b in zip(iters, iters[1:]))
    assert result.best_val >= max(0.0, min(e["val_accuracy"] for e in result.log))


def test_training_determinism_byte_identical(tmp_path):
    world, instances = tiny_world()
    checkpoints = []
    for run in range(2):
        train_b, val_b, vocab, answers = make_batchers(world, instances)
        config, model = model_for(vocab, answers, seed=7)
        tconfig = TrainConfig(
            patience=200, max_iterations=40, val_interval=20, batch_size=8, seed=7,
            learning_rate=1e-3,
        )
        train(model, train_b, val_b, tconfig)
        path = tmp_path / f"run{run}.pqck"
        save_checkpoint(config, model.state_dict(), path)
        checkpoints.append(path.read_bytes())
    assert checkpoints[0] == checkpoints[1]


def test_divergence_detected():
    world, instances = tiny_world()
    train_b, val_b, vocab, answers = make_batchers(world, instances)

    n_answers = len(answers)

    class NaNModel(torch.nn.Module):
        def __init__(self):
            super().__init__()
            self.w = torch.nn.Parameter(torch.ones(1))

        def forward(self, batch):
            b = batch["tokens"].shape[0]
            return torch.full((b, n_answers), float("nan")) * self.w, {}

    config = TrainConfig(patience=10, max_iterations=10, val_interval=5, batch_size=4)
    with pytest.raises(TrainingDivergedError):
        train(NaNModel(), train_b, val_b, config)


def test_learning_rate_schedule():
    config = TrainConfig(learning_rate=1.0, warmup_decay=True, max_iterations=100)
    assert _learning_rate(config, 1) == pytest.approx(0.1)
    assert _learning_rate(config, 10) == pytest.approx(1.0)
    assert _learning_rate(config, 100) == pytest.approx(0.1)
    flat = TrainConfig(learning_rate=0.5, warmup_decay=False, max_iterations=100)
    assert _learning_rate(flat, 50) == 0.5


def test_learning_improves_on_tiny_task():
    world, instances = tiny_world(num_images=30)
    train_b, val_b, vocab, answers = make_batchers(world, instances)
    _, model = model_for(vocab, answers, seed=3)
    before = training_mod.accuracy(model, val_b)
    config = TrainConfig(
        patience=400, max_iterations=150, val_interval=50, batch_size=16, seed=3,
        learning_rate=0.002,
    )
    result = train(model, train_b, val_b, config)
    assert result.best_val > before
    assert result.best_val >= 0.5
