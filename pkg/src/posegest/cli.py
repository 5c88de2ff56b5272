"""Command-line entry point for the gesture recognition pipeline.

Subcommands: synth (generate a dataset file), train (leave-one-subject-out
training run), eval (metrics report + figures for saved checkpoints),
predict (stdin/stdout prediction pipe), serve (TCP prediction service).

Exit codes are a stable scripting contract: 0 success, 1 usage error,
2 data or model error, 3 runtime failure. All randomness flows from
explicit --seed flags, progress goes to standard error, and results go
to standard output or files, so outputs are reproducible and pipeable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import Dataset
from .dataio import (
    CheckpointError,
    DatasetFormatError,
    load_model,
    model_checksum,
    read_dataset,
    save_model,
    write_dataset,
)
from .metrics import ConfusionMatrix, render_report, report
from .mlp import DEFAULT_DIMS, predict
from .serve import PredictionServer, serve_stream
from .synth import SynthConfig, generate
from .training import TrainConfig, normalize_frame, run_loso

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    """argparse with the usage exit code pinned to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonnegative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = _nonnegative_float(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("need at least two positive dimensions")
    if dims[0] != DEFAULT_DIMS[0] or dims[-1] != DEFAULT_DIMS[-1]:
        raise argparse.ArgumentTypeError(
            f"dims must start at {DEFAULT_DIMS[0]} (flattened frame) and end at "
            f"{DEFAULT_DIMS[-1]} (gesture classes)"
        )
    return dims


def _endpoint(text: str) -> tuple[str, int]:
    host, sep, port_text = text.rpartition(":")
    if not sep or not host:
        raise argparse.ArgumentTypeError(f"expected host:port, got {text!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid port: {port_text!r}") from None
    if not 0 <= port <= 65535:
        raise argparse.ArgumentTypeError(f"port out of range: {port}")
    return host, port


def build_parser() -> _Parser:
    parser = _Parser(prog="posegest", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(
        dest="command", required=True, metavar="command", parser_class=_Parser
    )

    synth = commands.add_parser("synth", help="generate a synthetic dataset file")
    synth.add_argument("--out", required=True, help="dataset file to write (JSON lines)")
    synth.add_argument("--subjects", type=_positive_int, default=8, help="number of subjects")
    synth.add_argument(
        "--per-class", type=_positive_int, default=5, dest="per_class",
        help="repetitions per gesture per subject per distance",
    )
    synth.add_argument("--noise", type=_nonnegative_float, default=0.02, help="coordinate noise std")
    synth.add_argument("--seed", type=int, default=0, help="generator seed")

    train = commands.add_parser(
        "train", help="leave-one-subject-out training run"
    )
    train.add_argument("--data", required=True, help="dataset file")
    train.add_argument("--out", required=True, help="directory for checkpoints, reports, figures")
    train.add_argument("--seed", type=int, default=0, help="initialization/shuffling seed")
    train.add_argument("--fold", default=None, metavar="SUBJECT", help="train one named fold only")
    train.add_argument(
        "--normalize", action="store_true",
        help="hip-center and torso-scale coordinates before training",
    )
    train.add_argument("--alpha", type=_positive_float, default=0.01, help="learning rate")
    train.add_argument("--beta1", type=float, default=0.9, help="first-moment decay")
    train.add_argument("--beta2", type=float, default=0.999, help="second-moment decay")
    train.add_argument("--eps", type=_positive_float, default=1e-8, help="denominator offset")
    train.add_argument("--max-epochs", type=_positive_int, default=2000, help="epoch cap")
    train.add_argument(
        "--patience", type=_positive_int, default=50,
        help="epochs without held-out improvement before stopping",
    )
    train.add_argument(
        "--batch-size", type=_positive_int, default=64,
        help="mini-batch size; values past the training-set size mean full batch",
    )
    train.add_argument(
        "--dims", type=_dims, default=DEFAULT_DIMS,
        help="layer sizes, comma-separated (default %(default)s)",
    )

    evaluate = commands.add_parser(
        "eval", help="metrics report and figures for saved checkpoints"
    )
    evaluate.add_argument("--data", required=True, help="dataset file")
    which = evaluate.add_mutually_exclusive_group(required=True)
    which.add_argument("--model", help="one checkpoint, scored on every sample")
    which.add_argument(
        "--model-dir", dest="model_dir",
        help="directory of per-fold checkpoints; each scores its held-out subject",
    )
    evaluate.add_argument("--out", required=True, help="directory for the report and figures")

    pred = commands.add_parser(
        "predict", help="answer frame lines from stdin until EOF"
    )
    pred.add_argument("--model", required=True, help="checkpoint file")
    pred.add_argument(
        "--stdio", action="store_true",
        help="read stdin / write stdout (the default and only mode)",
    )

    serve = commands.add_parser(
        "serve", help="streaming prediction service"
    )
    serve.add_argument("--model", required=True, help="checkpoint file")
    mode = serve.add_mutually_exclusive_group(required=True)
    mode.add_argument(
        "--listen", type=_endpoint, metavar="HOST:PORT",
        help="TCP endpoint (port 0 picks a free port; the bound port is printed)",
    )
    mode.add_argument("--stdio", action="store_true", help="serve stdin/stdout instead of TCP")

    return parser


def _load_transform(metadata: dict):
    return normalize_frame if metadata.get("normalize") else None


def _write_report_files(out_dir: Path, cm: ConfusionMatrix, extra: dict, fold_lines: list[str]):
    """Text + JSON report and figures; returns the rendered text."""
    from .figures import confusion_heatmap, metric_bars  # matplotlib loads only when needed

    rep = report(cm)
    text = render_report(rep, cm)
    if fold_lines:
        text += "\n" + "\n".join(fold_lines) + "\n"
    (out_dir / "report.txt").write_text(text, encoding="utf-8")
    doc = rep.as_dict()
    doc["confusion"] = {"labels": list(cm.labels), "counts": cm.counts.tolist()}
    doc.update(extra)
    (out_dir / "report.json").write_text(
        json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    confusion_heatmap(cm, out_dir / "confusion.png")
    metric_bars(rep, out_dir / "metrics.png")
    return text


def cmd_synth(args) -> int:
    config = SynthConfig(
        subjects=args.subjects,
        samples_per_class_per_subject=args.per_class,
        noise_std=args.noise,
        seed=args.seed,
    )
    ds = generate(config)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset(ds, out)
    print(f"wrote {len(ds)} samples ({len(ds.subjects())} subjects) to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_train(args) -> int:
    ds = read_dataset(args.data)
    config = TrainConfig(
        seed=args.seed,
        max_epochs=args.max_epochs,
        batch_size=args.batch_size,
        patience=args.patience,
        normalize=args.normalize,
        alpha=args.alpha,
        beta1=args.beta1,
        beta2=args.beta2,
        eps=args.eps,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(fold, rep):
        print(
            f"fold {fold.held_out_subject}: {rep.epochs_run} epochs, "
            f"best {rep.best_epoch}, held-out loss {rep.best_heldout_loss:.4f} "
            f"({rep.wall_time_s:.1f}s)",
            file=sys.stderr,
        )

    result = run_loso(ds, config, dims=args.dims, only_subject=args.fold, progress=progress)

    fold_lines = []
    fold_docs = []
    for outcome in result.outcomes:
        rep = outcome.report
        subject = rep.held_out_subject
        checkpoint = out_dir / f"model-{subject}.json"
        save_model(
            rep.model,
            checkpoint,
            metadata={
                "held_out": subject,
                "best_epoch": rep.best_epoch,
                "epochs_run": rep.epochs_run,
                "best_heldout_loss": rep.best_heldout_loss,
                "seed": config.seed,
                "normalize": config.normalize,
                "dims": list(args.dims),
                "alpha": config.alpha,
                "beta1": config.beta1,
                "beta2": config.beta2,
                "eps": config.eps,
                "batch_size": config.batch_size,
                "patience": config.patience,
                "max_epochs": config.max_epochs,
            },
        )
        fold_lines.append(
            f"fold {subject}: epochs {rep.epochs_run}, best {rep.best_epoch}, "
            f"held-out loss {rep.best_heldout_loss:.6f}, checkpoint {checkpoint.name}"
        )
        fold_docs.append(
            {
                "held_out": subject,
                "best_epoch": rep.best_epoch,
                "epochs_run": rep.epochs_run,
                "best_heldout_loss": rep.best_heldout_loss,
                "model_checksum": model_checksum(rep.model),
                "model_file": checkpoint.name,
            }
        )

    cm = result.pooled_confusion(ds)
    text = _write_report_files(out_dir, cm, {"folds": fold_docs}, fold_lines)
    from .figures import loss_curves

    loss_curves([o.report for o in result.outcomes], out_dir / "loss-curves.png")
    print(text, end="")
    return EXIT_OK


def _eval_single(ds: Dataset, model_path: Path) -> ConfusionMatrix:
    model, metadata = load_model(model_path)
    transform = _load_transform(metadata)
    cm = ConfusionMatrix()
    for sample in ds:
        frame = transform(sample.frame) if transform else sample.frame
        gesture, _ = predict(model, frame)
        cm.accumulate(sample.label.index, gesture.index)
    return cm


def _eval_model_dir(ds: Dataset, model_dir: Path) -> ConfusionMatrix:
    checkpoints = sorted(model_dir.glob("model-*.json"))
    if not checkpoints:
        raise CheckpointError(f"no model-*.json checkpoints in {model_dir}")
    cm = ConfusionMatrix()
    for path in checkpoints:
        model, metadata = load_model(path)
        subject = metadata.get("held_out")
        if not subject:
            raise CheckpointError(f"{path}: metadata does not name a held-out subject")
        transform = _load_transform(metadata)
        scored = 0
        for sample in ds:
            if sample.subject != subject:
                continue
            frame = transform(sample.frame) if transform else sample.frame
            gesture, _ = predict(model, frame)
            cm.accumulate(sample.label.index, gesture.index)
            scored += 1
        if scored == 0:
            raise CheckpointError(f"{path}: held-out subject {subject!r} has no samples in the data")
    return cm


def cmd_eval(args) -> int:
    ds = read_dataset(args.data)
    if args.model is not None:
        cm = _eval_single(ds, Path(args.model))
    else:
        cm = _eval_model_dir(ds, Path(args.model_dir))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    text = _write_report_files(out_dir, cm, {}, [])
    print(text, end="")
    return EXIT_OK


def cmd_predict(args) -> int:
    model, metadata = load_model(args.model)
    checksum = model_checksum(model)
    try:
        errors = serve_stream(model, checksum, sys.stdin, sys.stdout, _load_transform(metadata))
    except KeyboardInterrupt:
        return EXIT_OK
    return EXIT_OK if errors == 0 else EXIT_DATA


def cmd_serve(args) -> int:
    model, metadata = load_model(args.model)
    checksum = model_checksum(model)
    transform = _load_transform(metadata)
    if args.stdio:
        try:
            serve_stream(model, checksum, sys.stdin, sys.stdout, transform)
        except KeyboardInterrupt:
            pass
        return EXIT_OK
    host, port = args.listen
    try:
        server = PredictionServer((host, port), model, checksum, transform)
    except OSError as exc:
        print(f"posegest serve: cannot bind {host}:{port}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    bound_host, bound_port = server.bound_address
    print(f"listening on {bound_host}:{bound_port}", flush=True)
    try:
        server.serve_forever(poll_interval=0.1)
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DatasetFormatError, CheckpointError) as exc:
        print(f"posegest {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError, PermissionError) as exc:
        print(f"posegest {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"posegest {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        print(f"posegest {args.command}: interrupted", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"posegest {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # the contract promises a stable nonzero code
        print(f"posegest {args.command}: unexpected failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
