"""Batch command-line interface.

Subcommands:

* ``preprocess``: tile + per-channel transform every image, writing patch
  PNGs and a manifest JSON per image (the handoff point for external
  enhancement models).
* ``binarize``: run the full pipeline, writing one {0, 255} mask PNG per
  image.
* ``evaluate``: score already-written masks against ground truth, writing a
  JSON report with per-image metrics and dataset means.
* ``pipeline``: binarize + evaluate in one pass (optionally also writing the
  stage-1 manifests).

Datasets are directory trees; an image's ground truth sits next to it with a
configurable stem suffix (default ``_gt``/``_GT``). Exit code 0 means every
image succeeded, 2 means some images failed (details in the report/stderr),
1 means the run itself could not proceed.

Runs are deterministic: identical inputs and options produce byte-identical
masks, manifests, and reports. Images are processed concurrently; set
DOCWAVE_WORKERS to cap the thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .manifest import export_grids
from .metrics import evaluate, mean_report
from .pipeline import Enhancer, FusionWeights, RunConfig, prepare_channels, run_pipeline
from .raster import load_raster, mask_from_raster, save_raster

IMAGE_EXTS = (".png", ".bmp", ".tif", ".tiff", ".jpg", ".jpeg")


@dataclass(frozen=True)
class ImageEntry:
    """One dataset image: id (relative stem), path, optional ground truth."""

    image_id: str
    path: str
    gt_path: str | None


def ingest_dataset(root, gt_suffixes=("_gt", "_GT")) -> list:
    """Find images under `root` and pair each with its ground-truth file.

    A file is a ground truth when its stem ends with one of `gt_suffixes`;
    it is then attached to the image sharing the remaining stem (any
    supported extension). Results are sorted by id; duplicate ids (same
    relative stem, different extensions) are an error.
    """
    root = str(root)
    if not os.path.isdir(root):
        raise ValueError(f"dataset root {root!r} is not a directory")
    images = {}
    gts = {}
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            stem, ext = os.path.splitext(name)
            if ext.lower() not in IMAGE_EXTS:
                continue
            rel = os.path.relpath(os.path.join(dirpath, stem), root)
            rel = rel.replace(os.sep, "/")
            suffix = next((s for s in gt_suffixes if stem.endswith(s)), None)
            if suffix:
                gts[rel[: -len(suffix)]] = os.path.join(dirpath, name)
            else:
                if rel in images:
                    raise ValueError(f"duplicate image id {rel!r} (multiple extensions?)")
                images[rel] = os.path.join(dirpath, name)
    orphans = sorted(set(gts) - set(images))
    if orphans:
        raise ValueError(f"ground truth without matching image: {', '.join(orphans)}")
    return [
        ImageEntry(image_id=rel, path=images[rel], gt_path=gts.get(rel))
        for rel in sorted(images)
    ]


def _worker_count() -> int:
    env = os.environ.get("DOCWAVE_WORKERS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"DOCWAVE_WORKERS must be >= 1, got {env}")
        return n
    return min(8, os.cpu_count() or 1)


def _run_parallel(entries, fn):
    """Apply fn to entries concurrently; returns ({id: result}, {id: error})."""
    results = {}
    errors = {}
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        futures = {e.image_id: pool.submit(fn, e) for e in entries}
        for image_id, fut in futures.items():
            try:
                results[image_id] = fut.result()
            except Exception as exc:
                errors[image_id] = f"{type(exc).__name__}: {exc}"
    return results, errors


def _flat_id(image_id: str) -> str:
    return image_id.replace("/", "__")


def _config_from_args(args, image_id: str | None = None) -> RunConfig:
    def enhancer(kind: str, manifest_dir: str | None) -> Enhancer:
        if kind == "external":
            if not manifest_dir:
                raise ValueError("external enhancer needs --stage2-manifest-dir")
            if image_id is None:
                raise ValueError("external enhancer is only valid per image")
            return Enhancer(
                kind="external",
                manifest_path=os.path.join(manifest_dir, f"{_flat_id(image_id)}.json"),
            )
        return Enhancer(kind=kind, alpha=args.alpha, beta=args.beta)

    debug_dir = None
    if getattr(args, "debug_dump", None) and image_id is not None:
        debug_dir = os.path.join(args.debug_dump, _flat_id(image_id))
    return RunConfig(
        patch_size=args.patch_size,
        global_size=args.global_size,
        weights=FusionWeights(omega=args.omega, local_weight=args.local_weight),
        threshold=args.threshold,
        stage2=enhancer(args.stage2, getattr(args, "stage2_manifest_dir", None)),
        stage3_local=Enhancer(kind=args.stage3_local, alpha=args.alpha, beta=args.beta),
        stage3_global=Enhancer(kind=args.stage3_global, alpha=args.alpha, beta=args.beta),
        norm_alpha=args.alpha,
        norm_beta=args.beta,
        debug_dir=debug_dir,
    )


def _config_doc(args) -> dict:
    return {
        "patch_size": args.patch_size,
        "global_size": args.global_size,
        "omega": args.omega,
        "local_weight": args.local_weight,
        "threshold": args.threshold,
        "alpha": args.alpha,
        "beta": args.beta,
        "stage2": args.stage2,
        "stage3_local": args.stage3_local,
        "stage3_global": args.stage3_global,
    }


def _report_number(x):
    return None if x is None or (isinstance(x, float) and math.isinf(x)) else x


def _report_entry(image_id: str, rep) -> dict:
    return {
        "file": image_id,
        "fm": rep.fm,
        "pfm": rep.pfm,
        "psnr": _report_number(rep.psnr),
        "drd": rep.drd,
        "avg": _report_number(rep.avg),
        "counts": {"tp": rep.counts.tp, "fp": rep.counts.fp, "fn": rep.counts.fn, "tn": rep.counts.tn},
    }


def _write_report(path, config_doc, reports, errors) -> None:
    doc = {
        "config": config_doc,
        "images": [_report_entry(i, reports[i]) for i in sorted(reports)],
        "errors": [{"file": i, "error": errors[i]} for i in sorted(errors)],
    }
    if reports:
        mean = mean_report([reports[i] for i in sorted(reports)])
        doc["mean"] = {k: _report_number(v) for k, v in mean.items()}
    os.makedirs(os.path.dirname(os.path.abspath(str(path))), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_gt(entry: ImageEntry):
    if entry.gt_path is None:
        raise ValueError("no ground truth found for this image")
    return mask_from_raster(load_raster(entry.gt_path))


def _cmd_preprocess(args) -> int:
    entries = ingest_dataset(args.root, tuple(args.gt_suffix))
    if not entries:
        print(f"no images found under {args.root}", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)

    def work(entry: ImageEntry):
        img = load_raster(entry.path)
        stage1 = prepare_channels(img, args.patch_size, args.alpha, args.beta)
        export_grids(_flat_id(entry.image_id), stage1.channels, args.out)
        return len(stage1.channels)

    results, errors = _run_parallel(entries, work)
    for image_id in sorted(results):
        print(f"{image_id}: wrote {results[image_id]} channel grid(s)")
    for image_id in sorted(errors):
        print(f"{image_id}: FAILED: {errors[image_id]}", file=sys.stderr)
    return 0 if not errors else 2


def _cmd_binarize(args) -> int:
    entries = ingest_dataset(args.root, tuple(args.gt_suffix))
    if not entries:
        print(f"no images found under {args.root}", file=sys.stderr)
        return 1
    _config_from_args(args, entries[0].image_id)  # bad flag values are fatal
    os.makedirs(args.out, exist_ok=True)

    def work(entry: ImageEntry):
        mask = run_pipeline(load_raster(entry.path), _config_from_args(args, entry.image_id))
        out_path = os.path.join(args.out, f"{_flat_id(entry.image_id)}.png")
        save_raster(out_path, mask)
        return out_path

    results, errors = _run_parallel(entries, work)
    for image_id in sorted(results):
        print(f"{image_id}: {results[image_id]}")
    for image_id in sorted(errors):
        print(f"{image_id}: FAILED: {errors[image_id]}", file=sys.stderr)
    return 0 if not errors else 2


def _cmd_evaluate(args) -> int:
    entries = ingest_dataset(args.root, tuple(args.gt_suffix))
    if not entries:
        print(f"no images found under {args.root}", file=sys.stderr)
        return 1

    def work(entry: ImageEntry):
        gt = _load_gt(entry)
        pred_path = os.path.join(args.pred, f"{_flat_id(entry.image_id)}.png")
        if not os.path.exists(pred_path):
            raise ValueError(f"no prediction at {pred_path}")
        pred = mask_from_raster(load_raster(pred_path))
        return evaluate(pred, gt, weighted_pfm=not args.uniform_pfm)

    reports, errors = _run_parallel(entries, work)
    _write_report(args.report, {"pred": args.pred, "uniform_pfm": args.uniform_pfm}, reports, errors)
    _print_report_summary(reports, errors)
    return 0 if not errors else 2


def _cmd_pipeline(args) -> int:
    entries = ingest_dataset(args.root, tuple(args.gt_suffix))
    if not entries:
        print(f"no images found under {args.root}", file=sys.stderr)
        return 1
    _config_from_args(args, entries[0].image_id)  # bad flag values are fatal
    os.makedirs(args.out, exist_ok=True)
    if args.stage1_out:
        os.makedirs(args.stage1_out, exist_ok=True)

    def work(entry: ImageEntry):
        img = load_raster(entry.path)
        if args.stage1_out:
            stage1 = prepare_channels(img, args.patch_size, args.alpha, args.beta)
            export_grids(_flat_id(entry.image_id), stage1.channels, args.stage1_out)
        mask = run_pipeline(img, _config_from_args(args, entry.image_id))
        save_raster(os.path.join(args.out, f"{_flat_id(entry.image_id)}.png"), mask)
        if entry.gt_path is None:
            return None
        return evaluate(mask, _load_gt(entry), weighted_pfm=not args.uniform_pfm)

    results, errors = _run_parallel(entries, work)
    reports = {i: r for i, r in results.items() if r is not None}
    _write_report(args.report, _config_doc(args), reports, errors)
    _print_report_summary(reports, errors)
    skipped = sorted(set(results) - set(reports))
    if skipped:
        print(f"no ground truth for: {', '.join(skipped)} (masks written, not scored)")
    return 0 if not errors else 2


def _print_report_summary(reports, errors) -> None:
    for image_id in sorted(reports):
        rep = reports[image_id]
        psnr_txt = "inf" if math.isinf(rep.psnr) else f"{rep.psnr:.2f}"
        avg_txt = "n/a" if rep.avg is None else f"{rep.avg:.2f}"
        print(
            f"{image_id}: fm={rep.fm:.2f} pfm={rep.pfm:.2f} "
            f"psnr={psnr_txt} drd={rep.drd:.2f} avg={avg_txt}"
        )
    for image_id in sorted(errors):
        print(f"{image_id}: FAILED: {errors[image_id]}", file=sys.stderr)
    if reports:
        mean = mean_report(list(reports.values()))
        psnr_txt = "inf" if math.isinf(mean["psnr"]) else f"{mean['psnr']:.2f}"
        avg_txt = "n/a" if mean["avg"] is None else f"{mean['avg']:.2f}"
        print(
            f"mean over {len(reports)}: fm={mean['fm']:.2f} pfm={mean['pfm']:.2f} "
            f"psnr={psnr_txt} drd={mean['drd']:.2f} avg={avg_txt}"
        )


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("root", help="dataset directory (searched recursively)")
    p.add_argument(
        "--gt-suffix",
        action="append",
        default=None,
        help="ground-truth stem suffix (repeatable; default: _gt and _GT)",
    )


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--patch-size", type=int, default=224, help="square patch edge (default 224)")
    p.add_argument("--global-size", type=int, default=512, help="global branch edge (default 512)")
    p.add_argument("--omega", type=float, default=0.5, help="color-vs-luma fusion weight (default 0.5)")
    p.add_argument("--local-weight", type=float, default=0.5, help="local-vs-global fusion weight (default 0.5)")
    p.add_argument("--threshold", type=float, default=0.5, help="final cut on [0, 1] (default 0.5)")
    p.add_argument("--alpha", type=float, default=None, help="normalization spread override")
    p.add_argument("--beta", type=float, default=None, help="normalization center override")
    p.add_argument("--stage2", choices=("identity", "wavelet", "external"), default="identity")
    p.add_argument(
        "--stage2-manifest-dir",
        default=None,
        help="directory of per-image manifests (<id>.json) for --stage2 external",
    )
    p.add_argument("--stage3-local", choices=("identity", "wavelet"), default="identity")
    p.add_argument("--stage3-global", choices=("identity", "wavelet"), default="identity")
    p.add_argument(
        "--debug-dump",
        default=None,
        help="write per-stage intermediate images under this directory (one subdir per image)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docwave",
        description="Document image binarization: preprocessing, pipeline, and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="write stage-1 patches + manifest per image")
    _add_dataset_args(p)
    p.add_argument("--out", required=True, help="output directory for manifests and patches")
    p.add_argument("--patch-size", type=int, default=224)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.set_defaults(fn=_cmd_preprocess)

    p = sub.add_parser("binarize", help="run the pipeline, write one mask PNG per image")
    _add_dataset_args(p)
    p.add_argument("--out", required=True, help="output directory for masks")
    _add_config_args(p)
    p.set_defaults(fn=_cmd_binarize)

    p = sub.add_parser("evaluate", help="score existing masks against ground truth")
    _add_dataset_args(p)
    p.add_argument("--pred", required=True, help="directory of predicted masks (<id>.png)")
    p.add_argument("--report", required=True, help="output JSON report path")
    p.add_argument("--uniform-pfm", action="store_true", help="use uniform pseudo-F weights")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("pipeline", help="binarize and evaluate in one pass")
    _add_dataset_args(p)
    p.add_argument("--out", required=True, help="output directory for masks")
    p.add_argument("--report", required=True, help="output JSON report path")
    p.add_argument("--stage1-out", default=None, help="also write stage-1 manifests here")
    p.add_argument("--uniform-pfm", action="store_true", help="use uniform pseudo-F weights")
    _add_config_args(p)
    p.set_defaults(fn=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.gt_suffix is None:
        args.gt_suffix = ["_gt", "_GT"]
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
