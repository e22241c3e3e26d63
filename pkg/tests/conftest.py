import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# Filled by the acceptance tests; echoed after the run so the one-line
# pass/fail verdicts survive pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_jsonl(path: Path, records: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return path


def box(x, y, w, h):
    return {"x": x, "y": y, "w": w, "h": h}


def image_record(image_id, objects, source_qas=(), width=200, height=200, **extra):
    return {
        "image_id": image_id,
        "width": width,
        "height": height,
        "objects": objects,
        "source_qas": list(source_qas),
        **extra,
    }


def obj(object_id, name, b, attributes=()):
    return {
        "object_id": object_id,
        "names": [name],
        "box": b,
        "attributes": list(attributes),
    }


@pytest.fixture
def shirt_pair_record():
    """Two disjoint shirts (red/blue) and two persons (standing/sitting)."""
    return image_record(
        "img1",
        [
            obj("o1", "shirt", box(10, 10, 30, 30), ["red"]),
            obj("o2", "shirt", box(100, 10, 30, 30), ["blue"]),
            obj("o3", "person", box(10, 60, 40, 80), ["standing"]),
            obj("o4", "person", box(100, 60, 40, 80), ["sitting"]),
        ],
    )


@pytest.fixture
def annotation_file(tmp_path, shirt_pair_record):
    return write_jsonl(tmp_path / "annotations.jsonl", [shirt_pair_record])
