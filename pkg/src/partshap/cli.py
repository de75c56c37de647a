"""Command-line surface.

Subcommands: explain-sample, explain-class, explain-task, sanity,
generate-masks. Model specs: "toy:additive:<config>", "toy:table:<config>",
"exec:<command line>" (stdio protocol subprocess), or an http(s) URL.
Exit codes: 0 ok, 2 usage, 3 data error, 4 model error.

Runs are reproducible: the result store contains a config snapshot and all
JSON is written canonically, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import __version__
from .aggregation import task_histogram
from .client import connect_external
from .coalitions import Coalition
from .engine import select_target
from .errors import DataError, EmptyDataset, ModelError, PartShapError
from .manifest import DatasetManifest
from .masking import generate_set
from .models import ValueFunction, additive_from_config, table_from_config
from .pipeline import (
    build_class_histograms,
    explain_dataset,
    explain_one,
    record_from_matrix,
)
from .plots import bar_chart_svg, grouped_bar_chart_svg
from .sanity import compare_annotation_sources, inclusion_exclusion_report
from .store import ResultStore


class UsageError(Exception):
    pass


def load_model(spec: str, expected_classes: int) -> ValueFunction:
    if spec.startswith("toy:additive:"):
        model = additive_from_config(spec[len("toy:additive:"):])
    elif spec.startswith("toy:table:"):
        model = table_from_config(spec[len("toy:table:"):])
    elif spec.startswith("exec:"):
        return connect_external(spec[len("exec:"):], expected_classes)
    elif spec.startswith(("http://", "https://")):
        return connect_external(spec, expected_classes)
    else:
        raise UsageError(
            f"unrecognized model spec {spec!r} "
            "(expected toy:additive:<file>, toy:table:<file>, exec:<cmd> or an http URL)"
        )
    if model.num_classes != expected_classes:
        from .errors import ClassCountMismatch

        raise ClassCountMismatch(
            f"model has {model.num_classes} classes, manifest has {expected_classes}"
        )
    return model


def _close_model(model) -> None:
    close = getattr(model, "close", None)
    if close is not None:
        close()


def _resolve_class(manifest: DatasetManifest, value: str | None) -> int | None:
    if value is None:
        return None
    if value in manifest.classes:
        return manifest.label_index(value)
    try:
        index = int(value)
    except ValueError:
        raise UsageError(
            f"--class {value!r} is neither a class name nor an index; "
            f"classes: {list(manifest.classes)}"
        ) from None
    if not 0 <= index < len(manifest.classes):
        raise UsageError(f"--class index {index} out of range")
    return index


def _snapshot(args, command: str) -> dict:
    # everything that determines the outputs; --out itself is deliberately
    # excluded so two runs into different directories stay byte-identical
    snap = {
        "version": __version__,
        "command": command,
        "manifest": args.manifest,
        "model": getattr(args, "model", None),
        "seed": getattr(args, "seed", 0),
        "jobs": getattr(args, "jobs", 1),
        "target_class": getattr(args, "target_class", None),
        "include_misclassified": getattr(args, "include_misclassified", False),
        "mc_permutations": getattr(args, "mc_permutations", None),
        "sample_id": getattr(args, "sample_id", None),
        "mode": getattr(args, "mode", None),
        "manifest_b": getattr(args, "manifest_b", None),
        "svg": getattr(args, "svg", False),
    }
    return snap


def argv_from_snapshot(config: dict, out: str) -> list[str]:
    """Rebuild the exact CLI invocation of a persisted run."""
    argv = [config["command"], "--manifest", config["manifest"], "--out", out]
    if config.get("model"):
        argv += ["--model", config["model"]]
    if config.get("sample_id"):
        argv += ["--sample-id", config["sample_id"]]
    if config.get("mode"):
        argv += ["--mode", config["mode"]]
    if config.get("manifest_b"):
        argv += ["--manifest-b", config["manifest_b"]]
    if config.get("target_class") is not None:
        argv += ["--class", str(config["target_class"])]
    if config.get("include_misclassified"):
        argv += ["--include-misclassified"]
    if config.get("mc_permutations") is not None:
        argv += ["--mc-permutations", str(config["mc_permutations"])]
    if config.get("svg"):
        argv += ["--svg"]
    argv += ["--seed", str(config.get("seed", 0)), "--jobs", str(config.get("jobs", 1))]
    return argv


def _named(names, values) -> dict:
    return {name: value for name, value in zip(names, values)}


def _record_json(manifest: DatasetManifest, record) -> dict:
    vocab = manifest.part_vocabulary
    return {
        "sample_id": record.sample_id,
        "true_label": manifest.classes[record.true_label],
        "predicted_label": manifest.classes[record.predicted_label],
        "k_star": vocab[record.argmax_part],
        "k_star_index": record.argmax_part,
        "histogram": _named(vocab, record.histogram),
        "normalized": _named(vocab, record.normalized),
        "degenerate_normalization": record.degenerate_normalization,
    }


def cmd_explain_sample(args) -> int:
    manifest = DatasetManifest.load(args.manifest)
    sample = manifest.load_sample(manifest.record(args.sample_id))
    target = _resolve_class(manifest, args.target_class)
    model = load_model(args.model, len(manifest.classes))
    try:
        store = ResultStore(args.out)
        store.write_config(_snapshot(args, "explain-sample"))
        matrix = explain_one(
            model, sample, mc_permutations=args.mc_permutations, seed=args.seed
        )
        record = record_from_matrix(
            sample, matrix, manifest.part_vocabulary, target_class=target
        )
        contribution = select_target(
            matrix, "predicted" if target is None else target
        )
        payload = _record_json(manifest, record)
        payload["target_class"] = manifest.classes[contribution.target_class]
        payload["target_mode"] = contribution.target_mode
        payload["local_parts"] = list(sample.parts.names)
        payload["coalition_logits"] = {
            Coalition(bits, sample.parts.k).bitstring(): logits
            for bits, logits in sorted(matrix.coalition_logits.items())
        }
        store.write_json(f"samples/{record.sample_id}.json", payload)
        if args.svg:
            store.write_text(
                f"plots/sample-{record.sample_id}.svg",
                bar_chart_svg(
                    sample.parts.names,
                    [float(v) for v in contribution.normalized],
                    title=f"{record.sample_id}: part contribution "
                    f"({manifest.classes[contribution.target_class]})",
                    y_label="contribution / sample max",
                ),
            )
        print(
            f"explained {record.sample_id}: top part "
            f"{manifest.part_vocabulary[record.argmax_part]!r} "
            f"for class {manifest.classes[contribution.target_class]!r} "
            f"({1 << sample.parts.k} evaluations)"
        )
        return 0
    finally:
        _close_model(model)


def _explain_all(args, manifest: DatasetManifest, model) -> list:
    if not manifest.records:
        raise EmptyDataset(f"{args.manifest}: manifest has no samples")
    target = _resolve_class(manifest, args.target_class)
    samples = [manifest.load_sample(rec) for rec in manifest.records]
    return explain_dataset(
        model,
        samples,
        manifest.part_vocabulary,
        target_class=target,
        mc_permutations=args.mc_permutations,
        seed=args.seed,
        jobs=args.jobs,
    )


def _class_histograms_json(histos, vocab) -> list:
    return [
        {
            "class": h.class_name,
            "n_samples": h.n_samples,
            "counts": _named(vocab, h.counts),
            "frequencies": _named(vocab, h.frequencies),
            "mean_contribution": _named(vocab, h.mean_contribution),
        }
        for h in histos
    ]


def _run_aggregation(args, command: str, *, with_task: bool) -> int:
    manifest = DatasetManifest.load(args.manifest)
    model = load_model(args.model, len(manifest.classes))
    try:
        store = ResultStore(args.out)
        store.write_config(_snapshot(args, command))
        records = _explain_all(args, manifest, model)
        for record in records:
            store.write_json(
                f"samples/{record.sample_id}.json", _record_json(manifest, record)
            )
        histos = build_class_histograms(
            records,
            manifest.classes,
            manifest.part_vocabulary,
            correct_only=not args.include_misclassified,
        )
        vocab = manifest.part_vocabulary
        store.write_json("class_histograms.json", _class_histograms_json(histos, vocab))
        if args.svg:
            for h in histos:
                store.write_text(
                    f"plots/class-{h.class_name}.svg",
                    bar_chart_svg(
                        vocab,
                        [float(v) for v in h.frequencies],
                        title=f"class {h.class_name}: top-part frequency "
                        f"(n={h.n_samples})",
                        y_label="frequency",
                    ),
                )
        lines = [
            f"class {h.class_name}: n={h.n_samples}"
            + (
                f", top part {vocab[int(np.argmax(h.frequencies))]!r}"
                if h.n_samples
                else " (empty)"
            )
            for h in histos
        ]
        if with_task:
            task = task_histogram(histos)
            store.write_json(
                "task_histogram.json",
                {
                    "values": _named(vocab, task.values),
                    "contributing_classes": task.contributing_classes,
                },
            )
            if args.svg:
                store.write_text(
                    "plots/task.svg",
                    bar_chart_svg(
                        vocab,
                        [float(v) for v in task.values],
                        title="task-level part contribution",
                        y_label="summed frequency",
                    ),
                )
            lines.append(
                f"task: top part {vocab[int(np.argmax(task.values))]!r} "
                f"over {task.contributing_classes} contributing classes"
            )
        print("\n".join(lines))
        return 0
    finally:
        _close_model(model)


def cmd_explain_class(args) -> int:
    return _run_aggregation(args, "explain-class", with_task=False)


def cmd_explain_task(args) -> int:
    return _run_aggregation(args, "explain-task", with_task=True)


def _report_csv(report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class", "part", "contribution", "inclusion_accuracy", "exclusion_accuracy"])
    for row in report.rows():
        writer.writerow(row)
    for i, part in enumerate(report.part_names):
        writer.writerow(
            [
                "overall",
                part,
                "",
                float(report.inclusion_overall[i]),
                float(report.exclusion_overall[i]),
            ]
        )
    return buf.getvalue()


def cmd_sanity(args) -> int:
    manifest = DatasetManifest.load(args.manifest)
    if args.mode == "exclusion" and len(manifest.part_vocabulary) < 2:
        raise UsageError(
            "sanity --mode exclusion needs at least 2 vocabulary parts: "
            "excluding the only part would leave no parts at all"
        )
    if args.mode == "annotation-compare" and not args.manifest_b:
        raise UsageError("sanity --mode annotation-compare needs --manifest-b")
    model = load_model(args.model, len(manifest.classes))
    try:
        store = ResultStore(args.out)
        store.write_config(_snapshot(args, "sanity"))
        vocab = manifest.part_vocabulary
        if args.mode == "annotation-compare":
            other = DatasetManifest.load(args.manifest_b)
            comparison = compare_annotation_sources(
                model,
                manifest,
                other,
                correct_only=not args.include_misclassified,
                jobs=args.jobs,
            )
            store.write_json(
                "sanity/annotation_compare.json",
                {
                    "per_class": _named(comparison.class_names, comparison.per_class),
                    "average": comparison.average,
                },
            )
            print(f"annotation-compare: average cosine similarity {comparison.average:.4f}")
            return 0

        samples = [manifest.load_sample(rec) for rec in manifest.records]
        if not samples:
            raise EmptyDataset(f"{args.manifest}: manifest has no samples")
        report = inclusion_exclusion_report(
            model, samples, vocab, correct_only=not args.include_misclassified
        )
        store.write_json(
            f"sanity/{args.mode}.json",
            {
                "part_names": list(report.part_names),
                "class_names": list(report.class_names),
                "inclusion_accuracy": {
                    c: _named(vocab, report.inclusion_accuracy[:, i])
                    for i, c in enumerate(report.class_names)
                },
                "exclusion_accuracy": {
                    c: _named(vocab, report.exclusion_accuracy[:, i])
                    for i, c in enumerate(report.class_names)
                },
                "inclusion_overall": _named(vocab, report.inclusion_overall),
                "exclusion_overall": _named(vocab, report.exclusion_overall),
                "class_contribution": {
                    c: _named(vocab, report.class_contribution[:, i])
                    for i, c in enumerate(report.class_names)
                },
                "n_per_class": _named(report.class_names, report.n_per_class),
            },
        )
        store.write_text(f"sanity/{args.mode}.csv", _report_csv(report))
        if args.svg:
            grid = (
                report.inclusion_accuracy
                if args.mode == "inclusion"
                else report.exclusion_accuracy
            )
            for i, cname in enumerate(report.class_names):
                order = list(report.class_part_order[i])
                store.write_text(
                    f"plots/sanity-{args.mode}-{cname}.svg",
                    grouped_bar_chart_svg(
                        [vocab[j] for j in order],
                        [
                            (
                                "contribution",
                                [float(report.class_contribution[j, i]) for j in order],
                                "#707070",
                            ),
                            (
                                f"{args.mode} accuracy",
                                [
                                    None if np.isnan(grid[j, i]) else float(grid[j, i])
                                    for j in order
                                ],
                                "#4878a8" if args.mode == "inclusion" else "#d2803c",
                            ),
                        ],
                        title=f"{args.mode}: class {cname}",
                        y_label="value",
                    ),
                )
        print(f"{args.mode}: report written for {len(samples)} samples")
        return 0
    finally:
        _close_model(model)


def cmd_generate_masks(args) -> int:
    from .image import save_png

    manifest = DatasetManifest.load(args.manifest)
    sample = manifest.load_sample(manifest.record(args.sample_id))
    store = ResultStore(args.out)
    store.write_config(_snapshot(args, "generate-masks"))
    image_set = generate_set(sample.image, sample.parts)
    count = 0
    for coalition, image in image_set.images():
        save_png(image, store.path(f"{coalition.bitstring()}.png"))
        count += 1
    print(f"wrote {count} coalition images for {args.sample_id} to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="partshap",
        description="Per-part Shapley explanations of image classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", required=True, help="dataset manifest (JSON lines)")
    common.add_argument("--out", required=True, help="result store directory")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling estimators")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for dataset runs")

    modeled = argparse.ArgumentParser(add_help=False)
    modeled.add_argument(
        "--model",
        required=True,
        help="toy:additive:<file> | toy:table:<file> | exec:<cmd> | http(s) URL",
    )
    modeled.add_argument(
        "--class",
        "--target-class",
        dest="target_class",
        default=None,
        help="class (name or index) whose logit the histograms explain; "
        "default: the model's prediction per sample",
    )
    modeled.add_argument(
        "--include-misclassified",
        action="store_true",
        help="aggregate over all samples, not just correctly predicted ones",
    )
    modeled.add_argument(
        "--mc-permutations",
        type=int,
        default=None,
        help="enable the permutation-sampling estimator with this many draws",
    )
    modeled.add_argument("--svg", action="store_true", help="also write SVG bar charts")

    p = sub.add_parser(
        "explain-sample",
        parents=[common, modeled],
        help="per-part contribution histogram for one sample",
    )
    p.add_argument("--sample-id", required=True)
    p.set_defaults(func=cmd_explain_sample)

    p = sub.add_parser(
        "explain-class",
        parents=[common, modeled],
        help="class-level histograms over the dataset",
    )
    p.set_defaults(func=cmd_explain_class)

    p = sub.add_parser(
        "explain-task",
        parents=[common, modeled],
        help="class- and task-level histograms over the dataset",
    )
    p.set_defaults(func=cmd_explain_task)

    p = sub.add_parser(
        "sanity",
        parents=[common, modeled],
        help="inclusion/exclusion accuracy runs and annotation robustness",
    )
    p.add_argument(
        "--mode",
        required=True,
        choices=["inclusion", "exclusion", "annotation-compare"],
    )
    p.add_argument("--manifest-b", default=None, help="second annotation source")
    p.set_defaults(func=cmd_sanity)

    p = sub.add_parser(
        "generate-masks",
        parents=[common],
        help="write every coalition render of one sample as PNG",
    )
    p.add_argument("--sample-id", required=True)
    p.set_defaults(func=cmd_generate_masks)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except PartShapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
