"""End-to-end runs: load data, extract features, train, evaluate, report."""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import classify, datasets, scattering
from .config import VARIANTS, PipelineConfig
from .errors import DataError

DEFAULT_FILES = {
    "usps": {"train": "zip.train", "test": "zip.test"},
    "isolet": {"train": "isolet1+2+3+4.data", "test": "isolet5.data"},
    "yeast": {"all": "yeast.data"},
    "glass": {"all": "glass.data"},
}


def _locate(root: Path, name: str) -> Path:
    path = Path(name) if Path(name).is_absolute() else root / name
    if path.exists():
        return path
    gz = path.with_name(path.name + ".gz")
    if gz.exists():
        return gz
    raise DataError(f"data file {path} not found (set ${datasets.DATA_ENV} or pass --data-root)")


def load_data(cfg: PipelineConfig, root: Optional[Path] = None) -> dict:
    """``{"train": ds, "test": ds}`` for split evaluation, ``{"all": ds}`` for k-fold."""
    root = Path(root) if root is not None else datasets.data_root()
    files = dict(cfg.files) if cfg.files else dict(DEFAULT_FILES[cfg.dataset])
    if cfg.dataset == "usps":
        train, test = datasets.load_usps(_locate(root, files["train"]), _locate(root, files["test"]))
        parts = {"train": train, "test": test}
    else:
        schema = datasets.SCHEMAS[cfg.dataset]
        if "all" in files:
            parts = {"all": datasets.load_uci(_locate(root, files["all"]), schema)}
        else:
            train = datasets.load_uci(_locate(root, files["train"]),
                                      dataclasses.replace(schema, expected_samples=None))
            test = datasets.load_uci(_locate(root, files["test"]),
                                     dataclasses.replace(schema, expected_samples=None))
            if len(train) + len(test) != schema.expected_samples:
                raise DataError(f"{cfg.dataset}: expected {schema.expected_samples} samples in total, "
                                f"found {len(train) + len(test)}")
            parts = {"train": train, "test": test}
    if cfg.evaluation == "kfold" and "all" not in parts:
        joined = datasets.Dataset(cfg.dataset, np.concatenate([parts["train"].samples, parts["test"].samples]),
                                  np.concatenate([parts["train"].labels, parts["test"].labels]),
                                  parts["train"].class_names,
                                  {"path": [parts["train"].provenance["path"], parts["test"].provenance["path"]]})
        parts = {"all": joined}
    if cfg.evaluation == "split" and "all" in parts:
        raise DataError(f"{cfg.dataset} ships as a single file; use k-fold evaluation")
    if cfg.train_limit is not None:
        key = "train" if "train" in parts else "all"
        parts[key] = parts[key].head(cfg.train_limit)
    if cfg.test_limit is not None and "test" in parts:
        parts["test"] = parts["test"].head(cfg.test_limit)
    return parts


def extract(cfg: PipelineConfig, ds: datasets.Dataset) -> scattering.ScatterFeatures:
    return scattering.extract_batched(ds.samples, cfg.resolutions(), cfg.scatter(), chunk=cfg.chunk)


@dataclass
class Outcome:
    error_pct: float
    confusion: np.ndarray
    classes: np.ndarray
    fold_errors: list = field(default_factory=list)
    converged: bool = True


def fit_predict(cfg: PipelineConfig, train_x, train_y, test_x):
    """Standardise on the training rows only, train, predict the test rows."""
    stats = datasets.standardize_fit(train_x)
    model = classify.svm_train(datasets.standardize_apply(stats, train_x), train_y,
                               cfg.kernel_spec(), cfg.C, cfg.tol)
    return model.predict(datasets.standardize_apply(stats, test_x)), model, stats


def evaluate_features(cfg: PipelineConfig, values: dict, labels: dict, n_classes: int) -> Outcome:
    classes = np.arange(n_classes)
    if cfg.evaluation == "split":
        pred, _, _ = fit_predict(cfg, values["train"], labels["train"], values["test"])
        m = classify.evaluate(pred, labels["test"], classes)
        return Outcome(m.error_pct, m.confusion, classes)
    x, y = values["all"], labels["all"]
    plan = datasets.kfold(y, cfg.k, cfg.seed)
    conf = np.zeros((n_classes, n_classes), dtype=np.int64)
    errors = []
    for train_idx, test_idx in plan.splits():
        pred, _, _ = fit_predict(cfg, x[train_idx], y[train_idx], x[test_idx])
        m = classify.evaluate(pred, y[test_idx], classes)
        errors.append(m.error_pct)
        conf += m.confusion
    return Outcome(float(np.mean(errors)), conf, classes, errors)


def _dataset_summary(parts: dict) -> dict:
    return {k: {"n": len(ds), "checksum": ds.checksum()[:16]} for k, ds in sorted(parts.items())}


@dataclass
class Report:
    data: dict
    seconds: float

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        d = self.data
        cfg = d["config"]
        sizes = ", ".join(f"{k}={v['n']}" for k, v in d["data"].items())
        lines = [
            f"dataset        {cfg['dataset']}  ({sizes})",
            f"config hash    {d['config_hash']}",
            f"feature hash   {d['feature_hash']}  length {d['feature_length']}",
            f"variant        {cfg['variant'] or '-'}  log={cfg['log']}",
            f"fractions      {d['effective']['fractions']}  J={cfg['J']}  region={d['effective']['region']}",
            f"svm            {cfg['kernel']}  C={cfg['C']}  gamma={cfg['gamma'] if cfg['gamma'] is not None else 'default'}",
            f"evaluation     {cfg['evaluation']}" + (f"  k={cfg['k']} seed={cfg['seed']}" if cfg["evaluation"] == "kfold" else ""),
            f"error          {d['error_pct']:.2f}%",
        ]
        if d["fold_errors"]:
            lines.append("fold errors    " + " ".join(f"{e:.2f}" for e in d["fold_errors"]))
        lines.append("confusion (rows true, columns predicted)")
        lines += ["  " + " ".join(f"{v:4d}" for v in row) for row in d["confusion"]]
        lines.append(f"time           {self.seconds:.1f} s")
        return "\n".join(lines) + "\n"

    def write(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "report.json").write_text(self.to_json())
        (directory / "report.txt").write_text(self.to_text())
        return directory


def _report(cfg, parts, features, outcome, seconds) -> Report:
    data = {
        "config_hash": cfg.config_hash(),
        "config": {k: v for k, v in cfg.to_dict().items() if k not in ("output_dir", "chunk")},
        "effective": {"fractions": list(cfg.effective_fractions), "region": list(cfg.effective_region)},
        "data": _dataset_summary(parts),
        "feature_hash": features.config_hash,
        "feature_length": features.length,
        "error_pct": outcome.error_pct,
        "fold_errors": outcome.fold_errors,
        "classes": outcome.classes.tolist(),
        "confusion": outcome.confusion.tolist(),
    }
    return Report(data, seconds)


def run(cfg: PipelineConfig, root: Optional[Path] = None, parts: Optional[dict] = None) -> Report:
    """Full pipeline for one configuration."""
    start = time.perf_counter()
    parts = parts or load_data(cfg, root)
    feats = {k: extract(cfg, ds) for k, ds in parts.items()}
    outcome = evaluate_features(cfg, {k: f.values for k, f in feats.items()},
                                {k: ds.labels for k, ds in parts.items()},
                                next(iter(parts.values())).n_classes)
    return _report(cfg, parts, next(iter(feats.values())), outcome, time.perf_counter() - start)


def ablation(cfg: PipelineConfig, root: Optional[Path] = None, parts: Optional[dict] = None) -> dict:
    """Error of every variant with and without log, ``{variant: {"nolog": e, "log": e}}``.

    Each variant's features are extracted once without log; the log column
    applies :func:`scattering.log_transform` to the same values, which is
    exactly what a run with ``log`` enabled computes.
    """
    parts = parts or load_data(cfg, root)
    n_classes = next(iter(parts.values())).n_classes
    labels = {k: ds.labels for k, ds in parts.items()}
    table = {}
    for variant in VARIANTS:
        base = cfg.replace(variant=variant, log=False)
        raw = {k: extract(base, ds).values for k, ds in parts.items()}
        logged = {k: scattering.log_transform(v, base.log_k) for k, v in raw.items()}
        table[variant] = {
            "nolog": evaluate_features(base, raw, labels, n_classes).error_pct,
            "log": evaluate_features(base.replace(log=True), logged, labels, n_classes).error_pct,
            "config_hash": {"nolog": base.config_hash(), "log": base.replace(log=True).config_hash()},
        }
    return table


def format_ablation(table: dict, dataset: str) -> str:
    head = f"{'':10s}" + "".join(f"{v:>16s}" for v in VARIANTS)
    row = f"{dataset:10s}" + "".join(f"{table[v]['nolog']:>9.2f}/{table[v]['log']:<6.2f}" for v in VARIANTS)
    return "error % (no log / log)\n" + head + "\n" + row + "\n"
