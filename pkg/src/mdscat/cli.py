"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import classify, config, datasets, dtcwt, pipeline, scattering
from .errors import ConfigError, DataError, StructureError

EXIT_CONFIG = 2
EXIT_DATA = 3

def _floats(text):
    return tuple(float(v) for v in text.split(","))

def _ints(text):
    return tuple(int(v) for v in text.split(","))

def _add_overrides(p):
    g = p.add_argument_group("config overrides")
    g.add_argument("--name")
    g.add_argument("--fractions", type=_floats, help="comma-separated, e.g. 1,0.7")
    g.add_argument("--J", type=int, dest="J")
    g.add_argument("--region", type=_ints, help="e.g. 2,2 (2D) or 1,4 (1D)")
    g.add_argument("--log", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--log-k", type=float, dest="log_k")
    g.add_argument("--layer2", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--kernel", choices=("linear", "rbf"))
    g.add_argument("--gamma", type=float)
    g.add_argument("--C", type=float, dest="C")
    g.add_argument("--tol", type=float)
    g.add_argument("--evaluation", choices=("split", "kfold"))
    g.add_argument("--k", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--variant", choices=config.VARIANTS)
    g.add_argument("--train-limit", type=int, dest="train_limit")
    g.add_argument("--test-limit", type=int, dest="test_limit")
    g.add_argument("--output-dir", dest="output_dir")
    g.add_argument("--chunk", type=int)

_OVERRIDES = ("name", "fractions", "J", "region", "log", "log_k", "layer2", "kernel", "gamma", "C",
              "tol", "evaluation", "k", "seed", "variant", "train_limit", "test_limit",
              "output_dir", "chunk")

def _config(args) -> config.PipelineConfig:
    src = args.config
    cfg = config.load_config(src) if Path(src).suffix == ".json" or Path(src).exists() \
        else config.reference_config(src)
    changes = {k: getattr(args, k) for k in _OVERRIDES if getattr(args, k, None) is not None}
    return cfg.replace(**changes) if changes else cfg

def _run_dir(cfg) -> Path:
    return Path(cfg.output_dir) / f"{cfg.name or cfg.dataset}-{cfg.config_hash()}"

def _debug_dump(cfg, parts):
    print(dtcwt.format_bank(), file=sys.stderr)
    sample = next(iter(parts.values())).samples[0]
    fwd = dtcwt.forward_2d if cfg.ndim == 2 else dtcwt.forward_1d
    print(fwd(sample, cfg.J).format_energies(), file=sys.stderr)

def cmd_run(args):
    cfg = _config(args)
    parts = pipeline.load_data(cfg, args.data_root)
    if args.debug:
        _debug_dump(cfg, parts)
    report = pipeline.run(cfg, parts=parts)
    out = report.write(_run_dir(cfg))
    sys.stdout.write(report.to_text())
    print(f"report written to {out}")

def cmd_extract(args):
    cfg = _config(args)
    parts = pipeline.load_data(cfg, args.data_root)
    if args.debug:
        _debug_dump(cfg, parts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for split, ds in parts.items():
        feats = pipeline.extract(cfg, ds)
        path = scattering.save_features(out / f"{split}{args.format}", feats, ds.labels)
        print(f"{path}: {len(ds)} samples x {feats.length} features, hash {feats.config_hash}")

def cmd_train(args):
    feats, labels = scattering.load_features(args.features)
    if labels is None:
        raise DataError(f"{args.features} carries no labels")
    x = np.atleast_2d(feats.values)
    stats = datasets.standardize_fit(x)
    kernel = classify.KernelSpec(args.kernel, args.gamma)
    model = classify.svm_train(datasets.standardize_apply(stats, x), labels, kernel, args.C, args.tol)
    classify.save_model(args.out, model, stats)
    print(f"model written to {args.out} ({len(model.support_index)} support vectors)")

def cmd_evaluate(args):
    model, stats = classify.load_model(args.model)
    feats, labels = scattering.load_features(args.features)
    if labels is None:
        raise DataError(f"{args.features} carries no labels")
    x = np.atleast_2d(feats.values)
    if stats is not None:
        x = datasets.standardize_apply(stats, x)
    m = classify.evaluate(model.predict(x), labels, model.classes)
    result = dict(m.to_dict(), feature_hash=feats.config_hash)
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    print(f"error {m.error_pct:.2f}%")

def cmd_ablation(args):
    cfg = _config(args)
    parts = pipeline.load_data(cfg, args.data_root)
    table = pipeline.ablation(cfg, parts=parts)
    text = pipeline.format_ablation(table, cfg.dataset)
    out = _run_dir(cfg.replace(variant=None))
    out = out.with_name(out.name + "-ablation")
    out.mkdir(parents=True, exist_ok=True)
    (out / "ablation.json").write_text(json.dumps({"config_hash": cfg.config_hash(), "table": table},
                                                  indent=2, sort_keys=True) + "\n")
    (out / "ablation.txt").write_text(text)
    sys.stdout.write(text)
    print(f"table written to {out}")

def cmd_reproduce(args):
    args.config = f"{args.dataset}_desk" if args.desk else args.dataset
    if args.ablation:
        cmd_ablation(args)
    else:
        cmd_run(args)

def build_parser():
    ap = argparse.ArgumentParser(prog="mdscat", description="Multi-resolution DTCWT scattering + SVM pipeline")
    ap.add_argument("--data-root", type=Path, default=None,
                    help=f"directory with the raw data (default ${datasets.DATA_ENV} or ./data)")
    ap.add_argument("--debug", action="store_true", help="dump filter taps and subband energies to stderr")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="extract, train and evaluate one configuration")
    p.add_argument("--config", required=True, help="JSON file or shipped config name")
    _add_overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("extract", help="write scattering features per data split")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=(".npz", ".csv"), default=".npz")
    _add_overrides(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train an SVM on a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kernel", choices=("linear", "rbf"), default="linear")
    p.add_argument("--gamma", type=float)
    p.add_argument("--C", type=float, default=1.0, dest="C")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a trained model on a feature file")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablation", help="all four variants with and without log")
    p.add_argument("--config", required=True)
    _add_overrides(p)
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("reproduce", help="run a shipped reference configuration")
    p.add_argument("dataset", choices=config.DATASETS)
    p.add_argument("--desk", action="store_true", help="use the reduced desk-scale config")
    p.add_argument("--ablation", action="store_true", help="run the variant table instead of one config")
    _add_overrides(p)
    p.set_defaults(func=cmd_reproduce)
    return ap

def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, StructureError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0

if __name__ == "__main__":
    sys.exit(main())
