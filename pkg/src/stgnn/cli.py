"""Command-line surface: synth, preprocess, run, params, roc-plot.

Every command is deterministic given its flags and inputs; outputs are
written atomically (temp file + rename). Failures print a machine-readable
error JSON to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import struct
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .errors import ConfigError, DataError, StgnnError
from .evaluation import ExperimentConfig, HyperGrid, run_experiment
from .models import ModelSpec, build_model
from .plots import write_roc_svg
from .prep import load_manifest, window_adjacency, window_split
from .synth import SynthConfig, generate_dataset

PREPROCESSED_MAGIC = b"STGP"
FAST_GRID = {"dropout": 0.0, "lr": 1e-3, "weight_decay": 0.0, "batch_size": 32}


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=Path("."))
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--precision", choices=("f32", "f64"), default="f32")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stgnn",
                                     description="spatio-temporal graph classification engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    _add_shared(p)
    p.add_argument("--subjects", type=int, required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--sessions", type=int, default=4)
    p.add_argument("--effect", type=float, default=1.0)
    p.add_argument("--signal", choices=("covariance", "spectral", "both"), default="covariance")
    p.add_argument("--format", choices=("bin", "csv"), default="bin")

    p = sub.add_parser("preprocess", help="window, scale and graph a dataset")
    _add_shared(p)
    p.add_argument("--data", type=Path, required=True, help="manifest path")
    p.add_argument("--splits", type=int, choices=(4, 64), default=4,
                   help="samples per subject (4 -> full sessions, 64 -> 16 windows/scan)")
    p.add_argument("--threshold", type=int, choices=(5, 20), default=5)

    p = run_parser = sub.add_parser("run", help="cross-validated training and evaluation")
    _add_shared(p)
    p.add_argument("--config", type=Path, default=None,
                   help="key-value file merged under explicit flags")
    p.add_argument("--data", type=Path, default=None, help="manifest path")
    p.add_argument("--model", type=str, default="mean_CNN",
                   help="architecture name (e.g. mean_CNN_GCN5) or logreg / logreg_bin")
    p.add_argument("--threshold", type=int, choices=(5, 20), default=5)
    p.add_argument("--splits", type=int, choices=(4, 64), default=4)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--grid-fast", action="store_true",
                   help="single grid point instead of the full 27-point search")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None, help="override (fast grid only)")
    p.add_argument("--permute-labels", action="store_true")
    p.add_argument("--select-final-epoch", action="store_true")
    p.add_argument("--no-timestamp", action="store_true",
                   help="suppress wall-clock fields for byte-identical reruns")
    p.add_argument("--aux-link-weight", type=float, default=0.0)
    p.add_argument("--aux-entropy-weight", type=float, default=0.0)

    p = sub.add_parser("params", help="print the trainable parameter count")
    p.add_argument("--model", type=str, required=True)
    p.add_argument("--length", type=int, default=1200)
    p.add_argument("--nodes", type=int, default=50)
    p.add_argument("--threshold", type=int, choices=(5, 20), default=5)

    p = sub.add_parser("roc-plot", help="render fold ROC CSVs into one SVG")
    p.add_argument("inputs", nargs="*", type=Path)
    p.add_argument("--dir", type=Path, default=None, help="directory of roc_fold*.csv files")
    p.add_argument("--out", type=Path, required=True)

    parser.run_parser = run_parser  # config-file defaults attach to the subparser
    return parser


# commands -------------------------------------------------------------------


def cmd_synth(args) -> int:
    config = SynthConfig(n_subjects=args.subjects, n_nodes=args.nodes,
                         session_length=args.length, n_sessions=args.sessions,
                         effect_size=args.effect, signal=args.signal, seed=args.seed)
    manifest = generate_dataset(config, args.out, fmt=args.format)
    print(manifest)
    return 0


def cmd_preprocess(args) -> int:
    windows_per_scan = 1 if args.splits == 4 else 16
    records = load_manifest(args.data)
    header = {
        "version": 1,
        "n_nodes": records[0].sessions[0].shape[1] if records else 0,
        "windows_per_scan": windows_per_scan,
        "threshold_percent": args.threshold,
        "adjacency_scope": "per_window",
    }
    body = bytearray()
    count = 0
    for record in records:
        for window in window_split(record, windows_per_scan):
            adjacency = window_adjacency(window, args.threshold)
            sid = window.subject_id.encode("utf-8")
            body += struct.pack("<H", len(sid)) + sid
            body += struct.pack("<HHB", window.scan_index, window.window_index, window.label)
            n, t = window.features.shape
            body += struct.pack("<II", n, t)
            body += np.ascontiguousarray(window.features, dtype="<f4").tobytes()
            body += struct.pack("<I", adjacency.n_edges)
            body += np.ascontiguousarray(adjacency.edges.T, dtype="<u4").tobytes()
            count += 1
    header["n_samples"] = count
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = PREPROCESSED_MAGIC + struct.pack("<I", len(header_bytes)) + header_bytes + bytes(body)
    out = args.out if args.out.suffix else args.out / "preprocessed.stgp"
    _atomic_write_bytes(out, payload)
    print(out)
    return 0


def load_preprocessed(path: Path) -> tuple[dict, list[dict]]:
    """Read a preprocess output file back into header + sample dicts."""
    raw = Path(path).read_bytes()
    if raw[:4] != PREPROCESSED_MAGIC:
        raise DataError(f"{path} is not a preprocessed dataset")
    header_len, = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8:8 + header_len].decode("utf-8"))
    offset = 8 + header_len
    samples = []
    for _ in range(header["n_samples"]):
        sid_len, = struct.unpack_from("<H", raw, offset)
        offset += 2
        sid = raw[offset:offset + sid_len].decode("utf-8")
        offset += sid_len
        scan, window, label = struct.unpack_from("<HHB", raw, offset)
        offset += 5
        n, t = struct.unpack_from("<II", raw, offset)
        offset += 8
        features = np.frombuffer(raw, dtype="<f4", count=n * t, offset=offset).reshape(n, t)
        offset += n * t * 4
        n_edges, = struct.unpack_from("<I", raw, offset)
        offset += 4
        edges = np.frombuffer(raw, dtype="<u4", count=2 * n_edges, offset=offset)
        edges = edges.reshape(n_edges, 2).T.astype(np.int64)
        offset += 8 * n_edges
        samples.append({"subject_id": sid, "scan_index": scan, "window_index": window,
                        "label": label, "features": features.copy(), "edges": edges})
    return header, samples


# accepted run-config keys and their coercions; anything else is rejected
_RUN_CONFIG_TYPES = {
    "data": Path, "model": str, "threshold": int, "splits": int, "folds": int,
    "seed": int, "out": Path, "jobs": int, "precision": str,
    "grid_fast": _parse_bool, "epochs": int, "batch_size": int, "lr": float,
    "permute_labels": _parse_bool, "select_final_epoch": _parse_bool,
    "no_timestamp": _parse_bool, "aux_link_weight": float, "aux_entropy_weight": float,
}


def load_run_config(path: Path) -> dict:
    """Parse a `key = value` file; keys mirror the run flags."""
    overrides: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, value = line.partition("=")
        else:
            key, _, value = line.partition(" ")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _RUN_CONFIG_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        if not value:
            raise ConfigError(f"{path}:{lineno}: missing value for {key!r}")
        try:
            overrides[key] = _RUN_CONFIG_TYPES[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return overrides


def _results_grid(args) -> HyperGrid:
    if args.grid_fast:
        grid = HyperGrid.fast(dropout=FAST_GRID["dropout"],
                              lr=args.lr if args.lr is not None else FAST_GRID["lr"],
                              weight_decay=FAST_GRID["weight_decay"],
                              batch_size=FAST_GRID["batch_size"])
    else:
        if args.lr is not None:
            raise ConfigError("--lr only applies together with --grid-fast")
        grid = HyperGrid()
    updates = {}
    if args.epochs is not None:
        updates["epochs"] = args.epochs
    if args.batch_size is not None:
        updates["batch_size"] = args.batch_size
    if updates:
        grid = HyperGrid(dropouts=grid.dropouts, learning_rates=grid.learning_rates,
                         weight_decays=grid.weight_decays,
                         epochs=updates.get("epochs", grid.epochs),
                         batch_size=updates.get("batch_size", grid.batch_size))
    return grid


def cmd_run(args) -> int:
    if args.data is None:
        raise ConfigError("run needs --data (or a `data` entry in --config)")
    config = ExperimentConfig(
        manifest=str(args.data),
        model=args.model,
        threshold_percent=args.threshold,
        windows_per_scan=1 if args.splits == 4 else 16,
        k_folds=args.folds,
        seed=args.seed,
        grid=_results_grid(args),
        permute_labels=args.permute_labels,
        select_final_epoch=args.select_final_epoch,
        link_weight=args.aux_link_weight,
        entropy_weight=args.aux_entropy_weight,
        jobs=args.jobs,
    )
    document = run_experiment(config)
    if args.no_timestamp:
        document["wall_clock_seconds"] = None
    out_dir = Path(args.out)
    for report in document["folds"]:
        rows = ["threshold,fpr,tpr"]
        rows += [f"{thr:.10g},{fpr:.10g},{tpr:.10g}" for thr, fpr, tpr in report["roc"]]
        _atomic_write_text(out_dir / f"roc_fold{report['fold']}.csv", "\n".join(rows) + "\n")
    _atomic_write_text(out_dir / "results.json", json.dumps(document, indent=2) + "\n")
    agg = document["aggregate"]
    print(f"{document['config']['model']}  "
          f"{agg['auc']['mean']:.3f} ( {agg['auc']['sd']:.3f} )  "
          f"{agg['sensitivity']['mean']:.3f} ( {agg['sensitivity']['sd']:.3f} )  "
          f"{agg['specificity']['mean']:.3f} ( {agg['specificity']['sd']:.3f} )")
    return 0


def cmd_params(args) -> int:
    spec = ModelSpec.from_name(args.model, threshold_percent=args.threshold)
    model = build_model(spec, n_nodes=args.nodes, input_length=args.length)
    print(model.parameter_count())
    return 0


def cmd_roc_plot(args) -> int:
    paths = list(args.inputs)
    if args.dir is not None:
        paths += sorted(args.dir.glob("roc_fold*.csv"))
    if not paths:
        raise ConfigError("no ROC CSV inputs given")
    curves = []
    for path in paths:
        if not Path(path).exists():
            raise DataError(f"missing ROC file {path}")
        points = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["threshold", "fpr", "tpr"]:
                raise DataError(f"{path}: expected header threshold,fpr,tpr")
            for row in reader:
                points.append((float(row["fpr"]), float(row["tpr"])))
        curves.append((Path(path).stem, points))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.parent / f".{out.name}.tmp"
    write_roc_svg(tmp, curves)
    os.replace(tmp, out)
    print(out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            # config supplies defaults; flags given explicitly still win
            parser.run_parser.set_defaults(**load_run_config(args.config))
            args = parser.parse_args(argv)
        if getattr(args, "precision", None):
            ad.set_default_dtype(args.precision)
        handlers = {
            "synth": cmd_synth,
            "preprocess": cmd_preprocess,
            "run": cmd_run,
            "params": cmd_params,
            "roc-plot": cmd_roc_plot,
        }
        return handlers[args.command](args)
    except StgnnError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
