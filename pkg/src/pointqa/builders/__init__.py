from .base import (
    EVAL_SPLITS,
    LOCAL_SPLITS,
    BuildReport,
    PointQAInstance,
    assign_splits,
    read_jsonl,
    write_jsonl,
    write_split_files,
)
from .general import GeneralConfig, build_general_dataset, transform_which_question
from .local import BuilderConfig, build_local_dataset, find_local_pairs
from .looktwice import (
    LookTwiceConfig,
    bin_count_answer,
    build_looktwice_dataset,
    count_instances,
    extract_count_subject,
    generalize_question,
    match_subject_to_region,
)
from .verbal_spatial import (
    VerbalSpatialConfig,
    build_dv_ds,
    detect_verbal_disambiguation,
)

__all__ = [
    "EVAL_SPLITS",
    "LOCAL_SPLITS",
    "BuildReport",
    "PointQAInstance",
    "assign_splits",
    "read_jsonl",
    "write_jsonl",
    "write_split_files",
    "BuilderConfig",
    "build_local_dataset",
    "find_local_pairs",
    "LookTwiceConfig",
    "bin_count_answer",
    "build_looktwice_dataset",
    "count_instances",
    "extract_count_subject",
    "generalize_question",
    "match_subject_to_region",
    "GeneralConfig",
    "build_general_dataset",
    "transform_which_question",
    "VerbalSpatialConfig",
    "build_dv_ds",
    "detect_verbal_disambiguation",
]
