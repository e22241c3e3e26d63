"""Command-line entry point.

Subcommands: build-local, build-looktwice, build-general,
build-verbal-spatial, synth, train, evaluate, analyze-attention,
analyze-context-words, verify, review-sample, serve.

Exit status: 0 on success, 1 on an expected failure (message on stderr),
2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import random
import sys
from importlib import resources
from pathlib import Path

from . import builders
from .builders import verify as verify_mod
from .errors import PointQAError
from .evaluation import (
    EVAL_STRATEGIES,
    EvalReport,
    attention_analysis,
    context_word_analysis,
    evaluate,
)
from .models import ModelConfig, load_model
from .models.vocab import AnswerVocab, Vocabulary
from .scene_graph import (
    AnnotationStore,
    build_taxonomy,
    load_annotations,
    load_json_map,
    write_annotations,
)
from .synthworld import SynthWorldConfig, make_comparative_dataset, synth_world_generate
from .training import TensorBatcher, TrainConfig, train_from_files


def _default_map(name: str) -> dict[str, str]:
    with resources.files("pointqa.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def _image_dims(store: AnnotationStore) -> dict[str, tuple[int, int]]:
    return {img.image_id: (img.width, img.height) for img in store}


def _fractions(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _write_report(report: builders.BuildReport, out_dir: Path) -> None:
    report.write(out_dir / "report.json")
    counts = ", ".join(f"{k}={v}" for k, v in sorted(report.split_counts.items()))
    print(f"[{report.dataset}] {report.instances} instances over {report.images} images ({counts})")


def _make_taxonomy(store, args):
    category_map = load_json_map(args.taxonomy) if args.taxonomy else _default_map("category_map.json")
    synonym_map = load_json_map(args.synonyms) if args.synonyms else _default_map("synonym_map.json")
    return build_taxonomy(store, args.top_k, synonym_map, category_map)


def cmd_build_local(args) -> int:
    store = load_annotations(args.annotations)
    config = builders.BuilderConfig(
        seed=args.seed,
        iou_threshold=args.iou_threshold,
        split_fractions=_fractions(args.splits),
        taxonomy=_make_taxonomy(store, args),
    )
    instances, report = builders.build_local_dataset(store, config)
    out_dir = Path(args.out)
    report.split_counts = builders.write_split_files(instances, out_dir, "local")
    failures = verify_mod.check_local(instances, args.iou_threshold)
    report.constraint_checks = {"local": {"ok": not failures, "failures": failures[:20]}}
    _write_report(report, out_dir)
    return 0 if not failures else 1


def cmd_build_looktwice(args) -> int:
    store = load_annotations(args.annotations)
    super_map = (
        load_json_map(args.supercategories)
        if args.supercategories
        else _default_map("supercategory_map.json")
    )
    config = builders.LookTwiceConfig(
        seed=args.seed,
        supercategory_map=super_map,
        min_class_frequency=args.min_class_frequency,
        dedup_iou=args.dedup_iou,
    )
    instances, report = builders.build_looktwice_dataset(store, config)
    out_dir = Path(args.out)
    report.split_counts = builders.write_split_files(instances, out_dir, "looktwice")
    failures = verify_mod.check_looktwice(instances)
    report.constraint_checks = {"looktwice": {"ok": not failures, "failures": failures[:20]}}
    _write_report(report, out_dir)
    return 0 if not failures else 1


def cmd_build_general(args) -> int:
    store = load_annotations(args.annotations)
    config = builders.GeneralConfig(seed=args.seed, split_fractions=_fractions(args.splits))
    instances, report = builders.build_general_dataset(store, config)
    out_dir = Path(args.out)
    report.split_counts = builders.write_split_files(instances, out_dir, "general")
    failures = verify_mod.check_general(instances)
    report.constraint_checks = {"general": {"ok": not failures, "failures": failures[:20]}}
    _write_report(report, out_dir)
    return 0 if not failures else 1


def cmd_build_verbal_spatial(args) -> int:
    store = load_annotations(args.annotations)
    config = builders.VerbalSpatialConfig(seed=args.seed, split_fractions=_fractions(args.splits))
    dv, ds, report = builders.build_dv_ds(store, config)
    out_dir = Path(args.out)
    builders.write_split_files(dv, out_dir, "dv")
    builders.write_split_files(ds, out_dir, "ds")
    failures = verify_mod.check_dv_ds(dv, ds)
    report.constraint_checks = {"dv_ds": {"ok": not failures, "failures": failures[:20]}}
    _write_report(report, out_dir)
    return 0 if not failures else 1


def cmd_synth(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    world_config = SynthWorldConfig.from_dict(spec.get("world", {}))
    world = synth_world_generate(world_config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_annotations(world.annotations, out_dir / "annotations.jsonl")
    world.features.save(out_dir / "features")
    with (out_dir / "world.json").open("w", encoding="utf-8") as fh:
        json.dump(world_config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    task = spec.get("task")
    builder_opts = spec.get("builder", {})
    if task == "local":
        category_map = {c: "color" for c in world_config.colors}
        category_map.update({a: "action" for a in world_config.actions})
        taxonomy = build_taxonomy(
            world.annotations, builder_opts.get("top_k", 100), {}, category_map
        )
        config = builders.BuilderConfig(
            seed=builder_opts.get("seed", world_config.seed), taxonomy=taxonomy
        )
        instances, report = builders.build_local_dataset(world.annotations, config)
        report.split_counts = builders.write_split_files(instances, out_dir, "local")
    elif task == "looktwice":
        super_map = builder_opts.get("supercategory_map") or _default_map(
            "supercategory_map.json"
        )
        config = builders.LookTwiceConfig(
            seed=builder_opts.get("seed", world_config.seed),
            supercategory_map=super_map,
            min_class_frequency=builder_opts.get("min_class_frequency", 5),
        )
        instances, report = builders.build_looktwice_dataset(world.annotations, config)
        report.split_counts = builders.write_split_files(instances, out_dir, "looktwice")
    elif task == "comparative":
        instances = make_comparative_dataset(world, builder_opts.get("seed", world_config.seed))
        report = builders.BuildReport(dataset="comparative", instances=len(instances))
        report.split_counts = builders.write_split_files(instances, out_dir, "comparative")
    elif task is not None:
        raise PointQAError(f"unknown synth task: {task}")
    else:
        report = builders.BuildReport(dataset="synth", images=len(world.annotations))
    report.images = len(world.annotations)
    _write_report(report, out_dir)
    return 0


def _load_split(data_dir: Path, prefix: str, split: str) -> list:
    path = data_dir / f"{prefix}.{split}.jsonl"
    if not path.exists():
        raise PointQAError(f"missing dataset file: {path}")
    return builders.read_jsonl(path)


def _open_data_dir(data_dir: Path):
    from .features import FeatureStore

    store = load_annotations(data_dir / "annotations.jsonl")
    features = FeatureStore.open(data_dir / "features")
    return store, features


def cmd_train(args) -> int:
    data_dir = Path(args.data)
    store, features = _open_data_dir(data_dir)
    train_instances = _load_split(data_dir, args.prefix, "train")
    val_instances = _load_split(data_dir, args.prefix, "val")

    model_config = ModelConfig(
        architecture=args.arch,
        streams=args.streams,
        d=args.d,
        heads=args.heads,
        feature_dim=features.get(store.image_ids()[0]).feature_dim,
        n_proposals=args.n_proposals,
        seed=args.seed,
    )
    train_config = TrainConfig(
        optimizer=args.optimizer,
        learning_rate=args.lr,
        warmup_decay=args.warmup_decay,
        patience=args.patience,
        max_iterations=args.iterations,
        batch_size=args.batch_size,
        val_interval=args.val_interval,
        seed=args.seed,
    )
    _, result = train_from_files(
        model_config,
        train_instances,
        val_instances,
        features,
        _image_dims(store),
        train_config,
        strategy=args.strategy,
        out_dir=args.out,
    )
    print(
        f"trained {args.arch}/{args.streams}: best val accuracy "
        f"{result.best_val:.4f} at iteration {result.best_iteration} "
        f"({result.iterations} iterations)"
    )
    return 0


def _batcher_for(args, split_override: str | None = None):
    data_dir = Path(args.data)
    store, features = _open_data_dir(data_dir)
    model, config = load_model(args.checkpoint)
    instances = _load_split(data_dir, args.prefix, split_override or args.split)
    strategy = EVAL_STRATEGIES.get(args.strategy, args.strategy)
    batcher = TensorBatcher(
        instances,
        features=features,
        image_dims=_image_dims(store),
        vocab=Vocabulary(config.question_vocab),
        answers=AnswerVocab(config.answer_vocab),
        strategy=strategy,
        n_proposals=config.n_proposals,
        max_question_len=config.max_question_len,
    )
    return model, batcher


def cmd_evaluate(args) -> int:
    model, batcher = _batcher_for(args)
    report = evaluate(model, batcher)
    if args.out:
        report.write(args.out)
    print(
        f"accuracy {report.accuracy:.4f} "
        f"({report.overall['correct']}/{report.overall['total']})"
    )
    return 0


def cmd_analyze_attention(args) -> int:
    model, batcher = _batcher_for(args)
    swap = (args.swap_from, args.swap_to) if args.swap_from and args.swap_to else None
    stats = attention_analysis(model, batcher, question_swap=swap)
    payload = json.dumps(stats, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    print(payload)
    return 0


def cmd_analyze_context_words(args) -> int:
    report_a = EvalReport.read(args.report_a)
    report_b = EvalReport.read(args.report_b)
    words = [w.strip() for w in args.words.split(",") if w.strip()]
    result = context_word_analysis(report_a, report_b, words)
    payload = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    print(payload)
    return 0


def cmd_verify(args) -> int:
    data_dir = Path(args.data)
    all_failures: dict[str, list[str]] = {}

    def gather(prefix: str) -> list:
        out = []
        for path in sorted(data_dir.glob(f"{prefix}.*.jsonl")):
            out.extend(builders.read_jsonl(path))
        return out

    local = gather("local")
    if local:
        all_failures["local"] = verify_mod.check_local(local, args.iou_threshold)
    looktwice = gather("looktwice")
    if looktwice:
        all_failures["looktwice"] = verify_mod.check_looktwice(looktwice)
    general = gather("general")
    if general:
        all_failures["general"] = verify_mod.check_general(general)
    dv, ds = gather("dv"), gather("ds")
    if dv or ds:
        all_failures["dv_ds"] = verify_mod.check_dv_ds(dv, ds)

    if not all_failures:
        raise PointQAError(f"no recognized dataset files under {data_dir}")
    ok = True
    for name, failures in sorted(all_failures.items()):
        status = "ok" if not failures else f"{len(failures)} failures"
        print(f"{name}: {status}")
        for failure in failures[:10]:
            print(f"  - {failure}")
        ok = ok and not failures
    return 0 if ok else 1


def cmd_review_sample(args) -> int:
    instances = builders.read_jsonl(args.data)
    rng = random.Random(args.seed)
    sample = instances if len(instances) <= args.n else rng.sample(instances, args.n)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["qa_id", "image_id", "question", "point_x", "point_y", "answer", "split"]
        )
        for inst in sample:
            writer.writerow(
                [
                    inst.qa_id,
                    inst.image_id,
                    inst.question,
                    inst.point.x if inst.point else "",
                    inst.point.y if inst.point else "",
                    inst.answer,
                    inst.split,
                ]
            )
    print(f"wrote {len(sample)} review rows to {out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        checkpoint=args.checkpoint, features=args.features, annotations=args.annotations
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pointqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common_build(p):
        p.add_argument("--annotations", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=0, help="worker pool size (reserved)")

    p = sub.add_parser("build-local", help="build the attribute-question dataset")
    common_build(p)
    p.add_argument("--taxonomy", help="attribute->category JSON (default: packaged map)")
    p.add_argument("--synonyms", help="raw->canonical attribute JSON (default: packaged map)")
    p.add_argument("--top-k", type=int, default=100)
    p.add_argument("--iou-threshold", type=float, default=0.2)
    p.add_argument("--splits", default="0.7,0.1,0.1,0.1")
    p.set_defaults(func=cmd_build_local)

    p = sub.add_parser("build-looktwice", help="build the counting dataset")
    common_build(p)
    p.add_argument("--supercategories", help="class->supercategory JSON")
    p.add_argument("--min-class-frequency", type=int, default=100)
    p.add_argument("--dedup-iou", type=float, default=0.5)
    p.set_defaults(func=cmd_build_looktwice)

    p = sub.add_parser("build-general", help="build the yes/no pointing dataset")
    common_build(p)
    p.add_argument("--splits", default="0.8,0.1,0.1")
    p.set_defaults(func=cmd_build_general)

    p = sub.add_parser("build-verbal-spatial", help="build the D_V/D_S pair")
    common_build(p)
    p.add_argument("--splits", default="0.8,0.1,0.1")
    p.set_defaults(func=cmd_build_verbal_spatial)

    p = sub.add_parser("synth", help="generate a synthetic world (and task data)")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model on a built dataset")
    p.add_argument("--data", required=True, help="dir with annotations, features, datasets")
    p.add_argument("--prefix", default="local")
    p.add_argument("--arch", default="pythia_local")
    p.add_argument("--streams", default="point_q")
    p.add_argument("--strategy", default="all_containing")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--n-proposals", type=int, default=24)
    p.add_argument("--optimizer", default="adamax")
    p.add_argument("--lr", type=float, default=0.002)
    p.add_argument("--warmup-decay", action="store_true")
    p.add_argument("--patience", type=int, default=500)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--val-interval", type=int, default=100)
    p.set_defaults(func=cmd_train)

    def common_eval(p):
        p.add_argument("--checkpoint", required=True)
        p.add_argument("--data", required=True)
        p.add_argument("--prefix", default="local")
        p.add_argument("--split", default="test_dev")
        p.add_argument("--strategy", default="point", help="none | point | gt_box")
        p.add_argument("--out")

    p = sub.add_parser("evaluate", help="accuracy report on a split")
    common_eval(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze-attention", help="attention statistics / question swap")
    common_eval(p)
    p.add_argument("--swap-from")
    p.add_argument("--swap-to")
    p.set_defaults(func=cmd_analyze_attention)

    p = sub.add_parser("analyze-context-words", help="per-word accuracy deltas")
    p.add_argument("--report-a", required=True)
    p.add_argument("--report-b", required=True)
    p.add_argument("--words", required=True, help="comma-separated word list")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze_context_words)

    p = sub.add_parser("verify", help="run all dataset constraint checkers")
    p.add_argument("--data", required=True)
    p.add_argument("--iou-threshold", type=float, default=0.2)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("review-sample", help="export a human-review sheet")
    p.add_argument("--data", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_review_sample)

    p = sub.add_parser("serve", help="run the inference HTTP service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("PQA_LOG_LEVEL", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PointQAError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
