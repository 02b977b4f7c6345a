"""Command-line entry points: extract-features, train, predict, evaluate.

Exit codes: 0 success, 1 validation error (bad or missing inputs), 2 runtime
or numeric failure.
"""

import argparse
import asyncio
import json
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pandas as pd
import torch
from loguru import logger
from pydantic import ValidationError as PydanticValidationError

from .core.checkpoint import load_checkpoint, save_checkpoint
from .core.model import init_params
from .core.training import fit
from .data.manifest import (
    ScoreScale,
    build_samples,
    denormalize_score,
    load_feature_index,
    parse_manifest,
    split_train_val,
    write_feature_index,
)
from .evaluation.metrics import ScoredRecord
from .evaluation.report import compute_report, read_report_csv, render_comparison, render_report
from .features.audio import load_audio, resample
from .features.frontend import synthetic_frontend
from .features.stack_io import LayerStack, load_layer_stack, save_layer_stack
from .run_config import load_run_config
from .utils.async_helpers import gather_with_concurrency
from .utils.config import AXES, TARGET_SAMPLE_RATE, resolve_seed, setup_logging, setup_run_logging
from .utils.errors import (
    AesaError,
    FormatError,
    MissingColumnError,
    ShapeError,
    UnmatchedClipError,
    ValidationError,
)
from .utils.helpers import format_duration, generate_run_id, utc_timestamp

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

STACK_SUFFIX = ".aesf"
PREDICTION_COLUMNS = ["clip_id", "system_id", "domain", "axis", "prediction"]
FRAME_SCORE_COLUMNS = ["clip_id", "axis", "frame", "score"]
VALIDATION_SPLITS = {"val", "valid", "validation", "dev"}


# ---------------------------------------------------------------- extract-features

def _extract_one(entry, frontend: str, manifest_dir: Path, precomputed_dir: Path | None,
                 out_dir: Path, seed: int, num_layers: int, dim: int) -> tuple[str, Path, tuple[int, int]]:
    if frontend == "synthetic":
        audio_path = Path(entry.path)
        if not audio_path.is_absolute():
            audio_path = manifest_dir / audio_path
        clip = resample(load_audio(audio_path, clip_id=entry.clip_id), TARGET_SAMPLE_RATE)
        stack = synthetic_frontend(clip, seed=seed, num_layers=num_layers, dim=dim)
    else:
        stack = load_layer_stack(precomputed_dir / f"{entry.clip_id}{STACK_SUFFIX}", clip_id=entry.clip_id)

    out_path = out_dir / f"{entry.clip_id}{STACK_SUFFIX}"
    save_layer_stack(stack, out_path)
    return entry.clip_id, out_path, (stack.num_layers, stack.dim)


def _missing_inputs(entries, frontend: str, manifest_dir: Path, precomputed_dir: Path | None) -> list[str]:
    missing = []
    for entry in entries:
        if frontend == "synthetic":
            path = Path(entry.path)
            path = path if path.is_absolute() else manifest_dir / path
        else:
            path = precomputed_dir / f"{entry.clip_id}{STACK_SUFFIX}"
        if not path.exists():
            missing.append(entry.clip_id)
    return missing


def cmd_extract_features(args: argparse.Namespace) -> int:
    seed = resolve_seed(args.seed)
    manifest_path = Path(args.manifest)
    entries = parse_manifest(manifest_path, ScoreScale(lower=args.scale_lower, upper=args.scale_upper))
    precomputed_dir = Path(args.precomputed_dir) if args.precomputed_dir else None
    if args.frontend == "precomputed" and precomputed_dir is None:
        raise ValidationError("--precomputed-dir is required with --frontend precomputed")

    errors: dict[str, str] = {
        clip_id: "input file not found"
        for clip_id in _missing_inputs(entries, args.frontend, manifest_path.parent, precomputed_dir)
    }
    todo = [entry for entry in entries if entry.clip_id not in errors]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        (lambda entry=entry: _extract_one(entry, args.frontend, manifest_path.parent, precomputed_dir,
                                          out_dir, seed, args.layers, args.dim))
        for entry in todo
    ]
    results = asyncio.run(gather_with_concurrency(args.workers, jobs))

    written: dict[str, Path] = {}
    shapes: dict[str, tuple[int, int]] = {}
    for entry, result in zip(todo, results, strict=True):
        if isinstance(result, BaseException):
            errors[entry.clip_id] = str(result)
            continue
        clip_id, path, shape = result
        written[clip_id] = path
        shapes[clip_id] = shape

    if shapes:
        reference, _ = Counter(shapes.values()).most_common(1)[0]
        for clip_id, shape in shapes.items():
            if shape != reference:
                errors[clip_id] = f"layer stack has (L, D)={shape}, other clips have {reference}"
                written[clip_id].unlink(missing_ok=True)
                del written[clip_id]

    write_feature_index(out_dir, written)
    logger.info(f"Wrote {len(written)} feature files and index to {out_dir}")

    if errors:
        for clip_id, message in sorted(errors.items()):
            logger.error(f"{clip_id}: {message}")
        print(f"{len(errors)} of {len(entries)} clip(s) failed: {', '.join(sorted(errors))}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# ---------------------------------------------------------------- train

def _select_split(entries, config, seed: int):
    if config.val_count is not None:
        split_seed = config.split_seed if config.split_seed is not None else seed
        return split_train_val(entries, config.val_count, split_seed)
    train = [entry for entry in entries if entry.split.lower() not in VALIDATION_SPLITS]
    val = [entry for entry in entries if entry.split.lower() in VALIDATION_SPLITS]
    if not val:
        raise ValidationError("Manifest has no validation clips; tag them with split=val or set val_count")
    return train, val


def _common_shape(stacks: list[LayerStack]) -> tuple[int, int]:
    reference = (stacks[0].num_layers, stacks[0].dim)
    for stack in stacks:
        if (stack.num_layers, stack.dim) != reference:
            raise ShapeError(
                f"Clip {stack.clip_id!r} has (L, D)=({stack.num_layers}, {stack.dim}), expected {reference}"
            )
    return reference


def cmd_train(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, {
        "manifest": args.manifest,
        "features_dir": args.features_dir,
        "checkpoint_out": args.checkpoint_out,
    })
    for name in ("manifest", "features_dir", "checkpoint_out"):
        if getattr(config, name) is None:
            raise ValidationError(f"{name} must be given in the config file or on the command line")

    seed = resolve_seed(args.seed, config.seed)
    scale = config.to_scale()
    train_config = config.to_train_config(seed)

    entries = parse_manifest(config.manifest, scale)
    train_entries, val_entries = _select_split(entries, config, seed)
    if not train_entries:
        raise ValidationError("Training split is empty")
    train_samples = build_samples(train_entries, config.features_dir, scale)
    val_samples = build_samples(val_entries, config.features_dir, scale)
    num_layers, input_dim = _common_shape([s.stack for s in train_samples + val_samples])
    model_config = config.to_model_config(input_dim=input_dim, num_layers=num_layers)

    checkpoint_out = Path(config.checkpoint_out)
    run_id = generate_run_id()
    handler = setup_run_logging(checkpoint_out.parent, run_id)
    started = time.monotonic()
    try:
        torch.manual_seed(seed)
        model = init_params(model_config, seed)
        result = fit(
            train_samples, val_samples, train_config, model,
            scale=scale,
            history_path=checkpoint_out.with_suffix(".history.jsonl"),
        )
        save_checkpoint(result.model, checkpoint_out, metadata={
            "scale_lower": scale.lower,
            "scale_upper": scale.upper,
            "seed": seed,
            "run_id": run_id,
        })
    finally:
        logger.remove(handler)

    metadata = {
        "run_id": run_id,
        "finished_at": utc_timestamp(),
        "duration": format_duration(time.monotonic() - started),
        "seed": seed,
        "applied_config": config.model_dump(mode="json"),
        "train_config": train_config.model_dump(mode="json"),
        "model_config": model_config.model_dump(mode="json"),
        "train_clips": len(train_samples),
        "val_clips": len(val_samples),
        "best_epoch": result.best_epoch,
        "best_val_mse": result.best_val_mse,
        "epochs_run": len(result.history),
        "resumed": False,
    }
    (checkpoint_out.parent / "run_metadata.json").write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- predict

def cmd_predict(args: argparse.Namespace) -> int:
    model, metadata = load_checkpoint(args.checkpoint)
    scale = ScoreScale(
        lower=args.scale_lower if args.scale_lower is not None else metadata.get("scale_lower", 1.0),
        upper=args.scale_upper if args.scale_upper is not None else metadata.get("scale_upper", 10.0),
    )
    entries = parse_manifest(args.manifest, scale)
    index = load_feature_index(args.features_dir)

    missing = [e.clip_id for e in entries if e.clip_id not in index or not index[e.clip_id].exists()]
    if missing:
        raise ValidationError(f"Missing feature files for clip(s): {', '.join(missing)}")
    stacks = [load_layer_stack(index[e.clip_id], clip_id=e.clip_id) for e in entries]
    for stack in stacks:
        if stack.num_layers != model.config.num_layers or stack.dim != model.config.input_dim:
            raise ShapeError(
                f"Clip {stack.clip_id!r} has (L, D)=({stack.num_layers}, {stack.dim}); checkpoint expects "
                f"({model.config.num_layers}, {model.config.input_dim})"
            )

    rows, frame_rows = [], []
    model.eval()
    with torch.no_grad():
        for entry, stack in zip(entries, stacks, strict=True):
            output = model(stack)
            clip_scores = output.clip_scores.double().numpy()
            raw = denormalize_score(np.clip(clip_scores, 0.0, 1.0), scale)
            for axis_index, axis in enumerate(AXES):
                rows.append([entry.clip_id, entry.system_id or "", entry.domain, axis, f"{raw[axis_index]:.6f}"])
                if args.frame_scores:
                    frame_rows.extend(
                        [entry.clip_id, axis, frame, f"{score:.6f}"]
                        for frame, score in enumerate(output.frame_scores[axis_index].tolist())
                    )

    outputs = {Path(args.out): pd.DataFrame(rows, columns=PREDICTION_COLUMNS)}
    if args.frame_scores:
        outputs[Path(args.frame_scores)] = pd.DataFrame(frame_rows, columns=FRAME_SCORE_COLUMNS)
    # Every destination directory exists before the first file is written.
    for path in outputs:
        path.parent.mkdir(parents=True, exist_ok=True)
    for path, frame in outputs.items():
        frame.to_csv(path, index=False, lineterminator="\n")
        logger.info(f"Wrote {len(frame)} rows for {len(entries)} clips to {path}")
    return EXIT_OK


# ---------------------------------------------------------------- evaluate

def read_predictions(path: str | Path) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype={"clip_id": str, "system_id": str, "domain": str, "axis": str},
                        keep_default_na=False)
    if list(frame.columns) != PREDICTION_COLUMNS:
        raise MissingColumnError(f"Prediction file {path} must have header {','.join(PREDICTION_COLUMNS)}", line=1)
    try:
        frame["prediction"] = pd.to_numeric(frame["prediction"], errors="raise")
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Prediction file {path} has a non-numeric prediction: {e}")
    return frame


def cmd_evaluate(args: argparse.Namespace) -> int:
    scale = ScoreScale(lower=args.scale_lower, upper=args.scale_upper)
    predictions = read_predictions(args.predictions)
    gold = {entry.clip_id: entry for entry in parse_manifest(args.gold, scale)}

    unmatched = sorted(set(predictions["clip_id"]) - set(gold))
    if unmatched:
        raise UnmatchedClipError(unmatched)
    unknown_axes = sorted(set(predictions["axis"]) - set(AXES))
    if unknown_axes:
        raise ValidationError(f"Unknown axis value(s) in predictions: {', '.join(unknown_axes)}")
    duplicated = predictions.duplicated(["clip_id", "axis"], keep=False)
    if duplicated.any():
        repeated = sorted(set(predictions.loc[duplicated, "clip_id"]))
        raise ValidationError(f"Predictions repeat (clip_id, axis) for clip(s): {', '.join(repeated)}")

    records = [
        ScoredRecord(
            clip_id=row.clip_id,
            system_id=row.system_id or gold[row.clip_id].system_id,
            domain=gold[row.clip_id].domain,
            axis=row.axis,
            prediction=float(row.prediction),
            gold=gold[row.clip_id].scores[row.axis],
        )
        for row in predictions.itertuples(index=False)
    ]

    scale_label = f"raw {scale.lower:g}-{scale.upper:g}"
    report = compute_report(records, level=args.level, scale=scale_label)
    outputs = {
        "report.csv": render_report(report, "csv"),
        "report.txt": render_report(report, "text"),
    }
    if args.pooled or args.baseline:
        pooled = compute_report(records, level=args.level, pool_domains=True, scale=scale_label)
        outputs["overall_report.csv"] = render_report(pooled, "csv")
        outputs["overall_report.txt"] = render_report(pooled, "text")
        if args.baseline:
            outputs["comparison.txt"] = render_comparison(pooled, read_report_csv(args.baseline))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in outputs.items():
        (out_dir / name).write_text(content)
    print(outputs["report.txt"], end="")
    logger.info(f"Wrote {', '.join(outputs)} to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aesanet", description=__doc__.splitlines()[0])
    parser.add_argument("--log-file", type=Path, default=None, help="Debug log file (default ~/.aesanet/aesanet.log)")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_scale(sub, default_lower=1.0, default_upper=10.0):
        sub.add_argument("--scale-lower", type=float, default=default_lower)
        sub.add_argument("--scale-upper", type=float, default=default_upper)

    extract = commands.add_parser("extract-features", help="Write one layer-stack file per manifest clip")
    extract.add_argument("--manifest", required=True)
    extract.add_argument("--frontend", choices=["synthetic", "precomputed"], default="synthetic")
    extract.add_argument("--precomputed-dir", default=None, help="Directory of <clip_id>.aesf files")
    extract.add_argument("--out-dir", required=True)
    extract.add_argument("--seed", type=int, default=None)
    extract.add_argument("--layers", type=int, default=13, help="Synthetic frontend layer count")
    extract.add_argument("--dim", type=int, default=768, help="Synthetic frontend feature dimension")
    extract.add_argument("--workers", type=int, default=4)
    add_scale(extract)
    extract.set_defaults(handler=cmd_extract_features)

    train = commands.add_parser("train", help="Train AESA-Net and write the best checkpoint")
    train.add_argument("--config", default=None, help="key = value run configuration file")
    train.add_argument("--manifest", default=None)
    train.add_argument("--features-dir", default=None)
    train.add_argument("--checkpoint-out", default=None)
    train.add_argument("--seed", type=int, default=None)
    train.set_defaults(handler=cmd_train)

    predict = commands.add_parser("predict", help="Predict de-normalized scores for every manifest clip")
    predict.add_argument("--checkpoint", required=True)
    predict.add_argument("--manifest", required=True)
    predict.add_argument("--features-dir", required=True)
    predict.add_argument("--out", required=True)
    predict.add_argument("--frame-scores", default=None, help="Optional CSV of per-frame normalized scores")
    add_scale(predict, default_lower=None, default_upper=None)
    predict.set_defaults(handler=cmd_predict)

    evaluate = commands.add_parser("evaluate", help="Compute MSE/LCC/SRCC/KTAU reports")
    evaluate.add_argument("--predictions", required=True)
    evaluate.add_argument("--gold", required=True, help="Gold manifest")
    evaluate.add_argument("--level", choices=["system", "utterance"], default="system")
    evaluate.add_argument("--out-dir", required=True)
    evaluate.add_argument("--pooled", action="store_true", help="Also write a domain-pooled per-axis report")
    evaluate.add_argument("--baseline", default=None, help="Pooled baseline report CSV to compare against")
    add_scale(evaluate)
    evaluate.set_defaults(handler=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_file)
    try:
        return args.handler(args)
    except (ValidationError, FormatError, PydanticValidationError, FileNotFoundError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except AesaError as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
