"""Pipeline configuration: JSON files, overrides, variant rules, hashing."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .classify import KernelSpec
from .errors import ConfigError
from .pyramid import ResolutionSet
from .scattering import ScatterConfig

VARIANTS = ("DSCAT", "DSCATP", "MDSCAT", "MDSCATP")
DATASETS = ("usps", "isolet", "yeast", "glass")
NDIM = {"usps": 2, "isolet": 1, "yeast": 1, "glass": 1}
# fields that do not change results and stay out of the hash
_UNHASHED = ("output_dir", "chunk", "name")


@dataclass(frozen=True)
class PipelineConfig:
    dataset: str
    name: str = ""
    files: dict = field(default_factory=dict)
    train_limit: Optional[int] = None
    test_limit: Optional[int] = None
    fractions: tuple = (1.0,)
    J: int = 3
    region: tuple = (1, 1)
    log: bool = False
    log_k: float = 1e-6
    layer2: bool = True
    kernel: str = "linear"
    gamma: Optional[float] = None
    C: float = 1.0
    tol: float = 1e-3
    evaluation: str = "split"
    k: int = 10
    seed: int = 42
    variant: Optional[str] = None
    output_dir: str = "runs"
    chunk: int = 512

    def __post_init__(self):
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        object.__setattr__(self, "region", tuple(int(r) for r in self.region))
        object.__setattr__(self, "files", dict(self.files))
        validate(self)

    @property
    def ndim(self) -> int:
        return NDIM[self.dataset]

    @property
    def effective_fractions(self) -> tuple:
        """Fractions after the variant rule (DSCAT* keep only the full resolution)."""
        if self.variant is not None and self.variant.startswith("DSCAT"):
            return (1.0,)
        return self.fractions

    @property
    def effective_region(self) -> tuple:
        """Region after the variant rule (non-pooled variants use a single sample)."""
        if self.variant is not None and not self.variant.endswith("P"):
            return (1, 1)
        return self.region

    def scatter(self) -> ScatterConfig:
        return ScatterConfig(J=self.J, region=self.effective_region, ndim=self.ndim,
                             log_enabled=self.log, log_k=self.log_k, layer2_enabled=self.layer2)

    def resolutions(self) -> ResolutionSet:
        return ResolutionSet(self.effective_fractions)

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, self.gamma)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["fractions"] = list(self.fractions)
        d["region"] = list(self.region)
        return d

    def config_hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "PipelineConfig":
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **changes)


def validate(cfg: PipelineConfig) -> None:
    """Field-level checks; raises ConfigError naming the field."""
    if cfg.dataset not in DATASETS:
        raise ConfigError(f"dataset: must be one of {DATASETS}, got {cfg.dataset!r}")
    if cfg.evaluation not in ("split", "kfold"):
        raise ConfigError(f"evaluation: must be 'split' or 'kfold', got {cfg.evaluation!r}")
    if cfg.evaluation == "kfold" and cfg.k < 2:
        raise ConfigError(f"k: must be >= 2, got {cfg.k}")
    if cfg.C <= 0:
        raise ConfigError(f"C: must be positive, got {cfg.C}")
    if cfg.tol <= 0:
        raise ConfigError(f"tol: must be positive, got {cfg.tol}")
    for name in ("train_limit", "test_limit"):
        v = getattr(cfg, name)
        if v is not None and v < 1:
            raise ConfigError(f"{name}: must be >= 1, got {v}")
    if cfg.chunk < 1:
        raise ConfigError(f"chunk: must be >= 1, got {cfg.chunk}")
    try:
        cfg.scatter()
        cfg.resolutions()
        cfg.kernel_spec()
    except ConfigError as exc:
        raise ConfigError(f"invalid parameters: {exc}") from None
    v = cfg.variant
    if v is None:
        return
    if v not in VARIANTS:
        raise ConfigError(f"variant: must be one of {VARIANTS}, got {v!r}")
    if v.startswith("MDSCAT") and len(cfg.fractions) < 2:
        raise ConfigError(f"variant {v}: needs at least two fractions, got {cfg.fractions}")
    if v.endswith("P") and max(cfg.region) <= 1:
        raise ConfigError(f"variant {v}: region must exceed 1 sample, got {cfg.region}")


def from_dict(d: dict) -> PipelineConfig:
    names = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    if "dataset" not in d:
        raise ConfigError("dataset: field is required")
    try:
        return PipelineConfig(**d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(d)


def reference_config(name: str) -> PipelineConfig:
    """A config shipped with the package, e.g. ``usps`` or ``usps_desk``."""
    try:
        text = resources.files("mdscat").joinpath("configs", f"{name}.json").read_text()
    except FileNotFoundError:
        raise ConfigError(f"no shipped config named {name!r}; available: {', '.join(shipped_configs())}") from None
    return from_dict(json.loads(text))


def shipped_configs() -> list:
    root = resources.files("mdscat").joinpath("configs")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
