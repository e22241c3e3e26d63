import json
import random

import pytest

from pointqa.cli import main

from conftest import box, image_record, obj, write_jsonl


@pytest.fixture
def local_annotations(tmp_path):
    rng = random.Random(0)
    records = []
    for i in range(12):
        colors = rng.sample(["red", "blue", "green", "white"], 2)
        records.append(
            image_record(
                f"img{i:02d}",
                [
                    obj("a", "shirt", box(0, 0, 30, 30), [colors[0]]),
                    obj("b", "shirt", box(100, 100, 30, 30), [colors[1]]),
                ],
            )
        )
    return write_jsonl(tmp_path / "sg.jsonl", records)


def test_build_local_writes_splits_and_report(tmp_path, local_annotations):
    out = tmp_path / "data"
    code = main(
        [
            "build-local",
            "--annotations", str(local_annotations),
            "--out", str(out),
            "--seed", "17",
            "--iou-threshold", "0.2",
        ]
    )
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["dataset"] == "local"
    assert report["constraint_checks"]["local"]["ok"]
    files = sorted(p.name for p in out.glob("local.*.jsonl"))
    assert files == [
        "local.test_dev.jsonl",
        "local.test_final.jsonl",
        "local.train.jsonl",
        "local.val.jsonl",
    ]


def test_build_local_byte_reproducible(tmp_path, local_annotations):
    outs = []
    for run in range(2):
        out = tmp_path / f"data{run}"
        main(
            [
                "build-local",
                "--annotations", str(local_annotations),
                "--out", str(out),
                "--seed", "17",
            ]
        )
        outs.append(b"".join(sorted(p.read_bytes() for p in out.glob("local.*.jsonl"))))
    assert outs[0] == outs[1]


def test_verify_passes_on_built_dataset(tmp_path, local_annotations):
    out = tmp_path / "data"
    main(["build-local", "--annotations", str(local_annotations), "--out", str(out)])
    assert main(["verify", "--data", str(out)]) == 0


def test_verify_fails_on_tampered_dataset(tmp_path, local_annotations):
    out = tmp_path / "data"
    main(["build-local", "--annotations", str(local_annotations), "--out", str(out)])
    target = next(out.glob("local.train.jsonl"))
    lines = [json.loads(l) for l in target.read_text().splitlines()]
    for line in lines:
        line["answer"] = "red"  # breaks point-necessity
        line["meta"]["answer_set"] = ["red"]
    target.write_text("\n".join(json.dumps(l) for l in lines) + "\n")
    assert main(["verify", "--data", str(out)]) == 1


def test_review_sample(tmp_path, local_annotations):
    out = tmp_path / "data"
    main(["build-local", "--annotations", str(local_annotations), "--out", str(out)])
    dataset = next(out.glob("local.train.jsonl"))
    review = tmp_path / "review.csv"
    code = main(
        ["review-sample", "--data", str(dataset), "--n", "5", "--seed", "3", "--out", str(review)]
    )
    assert code == 0
    lines = review.read_text().splitlines()
    assert lines[0].startswith("qa_id,image_id,question,point_x,point_y,answer")
    assert len(lines) == 6


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["build-local", "--no-such-flag"])
    assert err.value.code == 2


def test_expected_failure_exits_1(tmp_path):
    code = main(
        ["build-local", "--annotations", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path)]
    )
    assert code == 1


SYNTH_CONFIG = {
    "world": {
        "num_images": 24,
        "classes": ["shirt"],
        "colors": ["red", "blue", "green", "yellow"],
        "actions": ["standing", "sitting", "running", "eating"],
        "objects_per_image": [2, 2],
        "proposals_per_image": 12,
        "feature_dim": 16,
        "noise": 0.01,
        "seed": 5,
    },
    "task": "local",
}


def synth_dir(tmp_path):
    config_path = tmp_path / "synth.json"
    config_path.write_text(json.dumps(SYNTH_CONFIG))
    out = tmp_path / "world"
    assert main(["synth", "--config", str(config_path), "--out", str(out)]) == 0
    return out


def test_synth_train_evaluate_pipeline(tmp_path):
    world = synth_dir(tmp_path)
    assert (world / "annotations.jsonl").exists()
    assert (world / "features" / "manifest.json").exists()
    assert (world / "local.train.jsonl").exists()

    ckpt_dir = tmp_path / "ckpt"
    code = main(
        [
            "train",
            "--data", str(world),
            "--prefix", "local",
            "--arch", "pythia_local",
            "--streams", "point_q",
            "--out", str(ckpt_dir),
            "--d", "32",
            "--n-proposals", "12",
            "--iterations", "60",
            "--val-interval", "30",
            "--patience", "200",
            "--batch-size", "16",
            "--seed", "2",
        ]
    )
    assert code == 0
    checkpoint = ckpt_dir / "checkpoint.pqck"
    assert checkpoint.exists()
    log_lines = (ckpt_dir / "train_log.jsonl").read_text().splitlines()
    assert all({"iteration", "loss", "val_accuracy"} <= set(json.loads(l)) for l in log_lines)

    report_path = tmp_path / "report.json"
    code = main(
        [
            "evaluate",
            "--checkpoint", str(checkpoint),
            "--data", str(world),
            "--prefix", "local",
            "--split", "val",
            "--strategy", "point",
            "--out", str(report_path),
        ]
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    assert 0.0 <= report["overall"]["accuracy"] <= 1.0

    stats_path = tmp_path / "attn.json"
    code = main(
        [
            "analyze-attention",
            "--checkpoint", str(checkpoint),
            "--data", str(world),
            "--prefix", "local",
            "--split", "val",
            "--swap-from", "What color is this shirt?",
            "--swap-to", "What action is this person doing?",
            "--out", str(stats_path),
        ]
    )
    assert code == 0
    stats = json.loads(stats_path.read_text())
    assert "question_swap" in stats

    words_path = tmp_path / "words.json"
    code = main(
        [
            "analyze-context-words",
            "--report-a", str(report_path),
            "--report-b", str(report_path),
            "--words", "color,farthest",
            "--out", str(words_path),
        ]
    )
    assert code == 0
    words = json.loads(words_path.read_text())
    assert words["color"]["delta"] == 0.0
    assert words["farthest"]["count"] == 0
