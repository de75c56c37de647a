"""Part-level Shapley explanations for black-box image classifiers.

Given an image, named part boxes and any image -> logits model, the package
computes each part's exact Shapley contribution to the decision by
evaluating all 2^K mean-inpainted part combinations, then aggregates the
per-sample results into class- and task-level histograms.
"""

__version__ = "0.1.0"

from .aggregation import (
    ClassHistogram,
    SampleRecord,
    TaskHistogram,
    class_histogram,
    histogram_similarity,
    task_histogram,
)
from .client import RemoteValueFunction, connect_external
from .coalitions import (
    MAX_EXACT_PARTS,
    Coalition,
    CoalitionSpace,
    enumerate_coalitions,
    marginal_pairs,
    shapley_weight,
)
from .engine import (
    PartShapleyMatrix,
    SampleContribution,
    estimate_shapley_mc,
    explain_sample,
    select_target,
)
from .errors import PartShapError
from .estimator import ShapleyPartExplainer
from .image import RasterImage, load_image, save_png
from .manifest import DatasetManifest, LabeledSample
from .masking import CoalitionImageSet, compute_fill_value, generate_set, render_coalition
from .models import (
    AdditiveToyModel,
    CallableValueFunction,
    CountingValueFunction,
    TableToyModel,
    ValueFunction,
    evaluate,
    evaluate_batch,
)
from .parts import PartAnnotation, PartSet, part_set
from .sanity import (
    compare_annotation_sources,
    inclusion_exclusion_report,
    run_exclusion,
    run_inclusion,
)

__all__ = [
    "AdditiveToyModel",
    "CallableValueFunction",
    "ClassHistogram",
    "Coalition",
    "CoalitionImageSet",
    "CoalitionSpace",
    "CountingValueFunction",
    "DatasetManifest",
    "LabeledSample",
    "MAX_EXACT_PARTS",
    "PartAnnotation",
    "PartSet",
    "PartShapError",
    "PartShapleyMatrix",
    "RasterImage",
    "RemoteValueFunction",
    "SampleContribution",
    "SampleRecord",
    "ShapleyPartExplainer",
    "TableToyModel",
    "TaskHistogram",
    "ValueFunction",
    "class_histogram",
    "compare_annotation_sources",
    "compute_fill_value",
    "connect_external",
    "enumerate_coalitions",
    "estimate_shapley_mc",
    "evaluate",
    "evaluate_batch",
    "explain_sample",
    "generate_set",
    "histogram_similarity",
    "inclusion_exclusion_report",
    "load_image",
    "marginal_pairs",
    "part_set",
    "render_coalition",
    "run_exclusion",
    "run_inclusion",
    "save_png",
    "select_target",
    "shapley_weight",
    "task_histogram",
]
