"""Two-layer complex wavelet scattering with region L2 pooling.

For a signal x (1D or 2D, optionally batched along leading axes):

* ``S0 = smooth(x)``
* ``U1[l1, t1] = region_l2(W x [l1, t1])`` and ``S1 = smooth(U1)``
* ``U2 = region_l2(W U1[l1, t1] [l2, t2])`` for every l2 > l1, and ``S2 = smooth(U2)``

``W`` is the DTCWT and ``smooth`` the lowpass branch of the same transform.
Each map is averaged down to the common grid of the coarsest level J, so a
level-l map is smoothed with depth ``J - l``. All blocks of one resolution
then share the same spatial extent.

Output ordering is (m, l1, t1, l2, t2) lexicographic, then row-major
spatial; multi-resolution features are concatenated resolution-major.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from . import dtcwt
from .dtcwt import ORIENTATIONS, FilterBank, default_filter_bank
from .errors import ConfigError, DataError, InvariantError, StructureError
from .pyramid import ResolutionSet, multi_resolution

LOG_K = 1e-6


@dataclass(frozen=True)
class ScatterConfig:
    """Scattering parameters.

    ``region`` is ``(r, r)`` for 2D inputs and ``(1, r)`` for 1D inputs.
    """

    J: int = 3
    region: tuple = (2, 2)
    ndim: int = 2
    log_enabled: bool = True
    log_k: float = LOG_K
    layer2_enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "region", tuple(int(r) for r in self.region))
        if self.ndim not in (1, 2):
            raise ConfigError(f"ndim must be 1 or 2, got {self.ndim}")
        if not isinstance(self.J, int) or self.J < 1:
            raise ConfigError(f"J must be an integer >= 1, got {self.J!r}")
        if len(self.region) != 2 or min(self.region) < 1:
            raise ConfigError(f"region must be two positive integers, got {self.region}")
        if self.ndim == 1 and self.region[0] != 1:
            raise ConfigError(f"1D region must have the form (1, r), got {self.region}")
        if self.log_k <= 0:
            raise ConfigError(f"log_k must be positive, got {self.log_k}")

    @property
    def orientations(self) -> tuple:
        return ORIENTATIONS if self.ndim == 2 else (None,)

    @property
    def window(self) -> tuple:
        """Region extent per transformed axis."""
        return self.region if self.ndim == 2 else self.region[1:]


@dataclass(frozen=True, order=True)
class PathDescriptor:
    """One scattering path. Orientations are ``None`` for 1D signals."""

    m: int
    scale1: Optional[int] = None
    theta1: Optional[int] = None
    scale2: Optional[int] = None
    theta2: Optional[int] = None

    def __post_init__(self):
        if self.m not in (0, 1, 2):
            raise InvariantError(f"layer {self.m} is not 0, 1 or 2")
        if self.m == 2 and not self.scale2 > self.scale1:
            raise InvariantError(f"second-layer scale {self.scale2} must exceed {self.scale1}")

    def label(self) -> str:
        parts = [f"m={self.m}"]
        if self.m >= 1:
            parts.append(f"l1={self.scale1}")
            if self.theta1 is not None:
                parts.append(f"t1={self.theta1}")
        if self.m == 2:
            parts.append(f"l2={self.scale2}")
            if self.theta2 is not None:
                parts.append(f"t2={self.theta2}")
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str) -> "PathDescriptor":
        keys = {"m": "m", "l1": "scale1", "t1": "theta1", "l2": "scale2", "t2": "theta2"}
        kw = {}
        for token in text.split():
            k, v = token.split("=")
            kw[keys[k]] = int(v)
        return cls(**kw)


@dataclass(frozen=True)
class ManifestEntry:
    fraction: float
    path: PathDescriptor
    shape: tuple

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


@dataclass(frozen=True)
class ScatterFeatures:
    """Flattened features (leading batch axes preserved) and their layout."""

    values: np.ndarray
    manifest: tuple
    config_hash: str = ""
    log_applied: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return self.values.shape[-1]

    def blocks(self) -> Iterator[tuple]:
        """Yield ``(ManifestEntry, block)`` pairs in storage order."""
        start = 0
        for entry in self.manifest:
            stop = start + entry.size
            yield entry, self.values[..., start:stop].reshape(self.values.shape[:-1] + entry.shape)
            start = stop


def region_l2(coefficients, window: Sequence[int]) -> np.ndarray:
    """Sliding-window L2 norm of complex coefficients, stride 1.

    ``window`` gives the region extent along each trailing axis. Borders use
    half-sample symmetric padding of ``(r - 1) // 2`` before and ``r // 2``
    after, so the output has the input extent.
    """
    z = np.asarray(coefficients)
    window = tuple(int(r) for r in window)
    k = len(window)
    if z.ndim < k:
        raise ConfigError(f"region {window} needs {k} trailing axes, got shape {z.shape}")
    spatial = z.shape[-k:]
    for r, n in zip(window, spatial):
        if r < 1:
            raise ConfigError(f"region extents must be >= 1, got {window}")
        if r // 2 > n:
            raise ConfigError(f"region {window} does not fit a subband of extent {spatial}")
    power = z.real * z.real + z.imag * z.imag if np.iscomplexobj(z) else z * z
    if all(r == 1 for r in window):
        return np.sqrt(power)
    pad = [(0, 0)] * (z.ndim - k) + [((r - 1) // 2, r // 2) for r in window]
    padded = np.pad(power, pad, mode="symmetric")
    total = np.zeros(power.shape)
    lead = (slice(None),) * (z.ndim - k)
    for offset in np.ndindex(*window):
        sl = tuple(slice(o, o + n) for o, n in zip(offset, spatial))
        total += padded[lead + sl]
    return np.sqrt(total)


def _transform(x, depth, cfg, bank):
    if cfg.ndim == 2:
        return dtcwt.forward_2d(x, depth, bank).highpasses
    # give 1D bands a length-1 orientation axis so both cases share a layout
    return tuple(h[..., None, :] for h in dtcwt.forward_1d(x, depth, bank).highpasses)


def local_average(maps, depth: int, ndim: int = 2, bank: Optional[FilterBank] = None) -> np.ndarray:
    """Average ``maps`` with the depth-``depth`` scaling function and decimate by ``2**depth``."""
    return dtcwt.lowpass_smooth(maps, depth, ndim=ndim, bank=bank)


def _smooth(u, depth, cfg, bank):
    return local_average(u, depth, cfg.ndim, bank)


def scatter_layer1(signal, cfg: ScatterConfig, bank: Optional[FilterBank] = None):
    """First layer.

    Returns ``(U1, S0, S1)``; ``U1[l - 1]`` and ``S1[l - 1]`` have shape
    ``(..., orientations, *spatial)``.
    """
    bank = bank or default_filter_bank()
    x = np.asarray(signal, dtype=np.float64)
    highs = _transform(x, cfg.J, cfg, bank)
    U1 = [region_l2(h, cfg.window) for h in highs]
    S0 = _smooth(x, cfg.J, cfg, bank)
    S1 = [_smooth(u, cfg.J - lam, cfg, bank) for lam, u in enumerate(U1, start=1)]
    return U1, S0, S1


def scatter_layer2(U1, cfg: ScatterConfig, bank: Optional[FilterBank] = None) -> dict:
    """Second layer: ``{(l1, l2): array of shape (..., O1, O2, *spatial)}``."""
    bank = bank or default_filter_bank()
    out = {}
    for lam1, u in enumerate(U1, start=1):
        depth = cfg.J - lam1
        if depth < 1:
            continue
        for level, h in enumerate(_transform(u, depth, cfg, bank), start=1):
            lam2 = lam1 + level
            out[(lam1, lam2)] = _smooth(region_l2(h, cfg.window), cfg.J - lam2, cfg, bank)
    return out


def path_manifest(cfg: ScatterConfig) -> list:
    """Paths of one resolution in storage order."""
    th = cfg.orientations
    paths = [PathDescriptor(0)]
    paths += [PathDescriptor(1, l1, t1) for l1 in range(1, cfg.J + 1) for t1 in th]
    if cfg.layer2_enabled:
        paths += [PathDescriptor(2, l1, t1, l2, t2)
                  for l1 in range(1, cfg.J + 1) for t1 in th
                  for l2 in range(l1 + 1, cfg.J + 1) for t2 in th]
    return paths


def _collect(signal, cfg, bank):
    """Blocks of one resolution in manifest order, each (..., *spatial)."""
    U1, S0, S1 = scatter_layer1(signal, cfg, bank)
    blocks = [S0]
    for s in S1:
        blocks += [np.take(s, k, axis=-cfg.ndim - 1) for k in range(s.shape[-cfg.ndim - 1])]
    if cfg.layer2_enabled:
        S2 = scatter_layer2(U1, cfg, bank)
        n_th = len(cfg.orientations)
        for l1 in range(1, cfg.J + 1):
            for t1 in range(n_th):
                for l2 in range(l1 + 1, cfg.J + 1):
                    block = np.take(S2[(l1, l2)], t1, axis=-cfg.ndim - 2)
                    blocks += [np.take(block, t2, axis=-cfg.ndim - 1) for t2 in range(n_th)]
    return blocks


def log_transform(features, k: float = LOG_K) -> np.ndarray:
    """``log(features + k)``; inputs must be non-negative (to 1e-12)."""
    a = np.asarray(features, dtype=np.float64)
    if k <= 0:
        raise ConfigError(f"log constant must be positive, got {k}")
    if a.size and a.min() < -1e-12:
        raise InvariantError(f"log input has negative value {a.min()!r}")
    return np.log(a + k)


def feature_hash(cfg: ScatterConfig, resolutions: ResolutionSet,
                 bank: Optional[FilterBank] = None) -> str:
    """Stable digest of every setting that changes the feature layout or values."""
    bank = bank or default_filter_bank()
    payload = {"scatter": asdict(cfg), "fractions": list(resolutions.fractions),
               "method": resolutions.method, "bank": bank.name}
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _assemble(signal, cfg, bank, fraction):
    x = np.asarray(signal, dtype=np.float64)
    blocks = _collect(x, cfg, bank)
    paths = path_manifest(cfg)
    if len(blocks) != len(paths):
        raise InvariantError(f"{len(blocks)} blocks for {len(paths)} paths")
    batch = x.shape[:x.ndim - cfg.ndim]
    spatial = blocks[0].shape[len(batch):]
    for p, b in zip(paths, blocks):
        if b.shape[len(batch):] != spatial:
            raise StructureError(f"block {p.label()} has extent {b.shape[len(batch):]}, expected {spatial}")
    # clip the negative side lobes of the smoothing kernel
    values = np.maximum(np.concatenate([b.reshape(batch + (-1,)) for b in blocks], axis=-1), 0.0)
    manifest = tuple(ManifestEntry(fraction, p, spatial) for p in paths)
    return values, manifest


def scatter_transform(signal, cfg: ScatterConfig, bank: Optional[FilterBank] = None) -> ScatterFeatures:
    """Scattering features of a single resolution."""
    return multi_resolution_scatter(signal, ResolutionSet((1.0,)), cfg, bank)


def multi_resolution_scatter(signal, resolutions: ResolutionSet, cfg: ScatterConfig,
                             bank: Optional[FilterBank] = None) -> ScatterFeatures:
    """Scattering features of every pyramid level, concatenated resolution-major."""
    bank = bank or default_filter_bank()
    levels = multi_resolution(signal, resolutions, cfg.J, cfg.ndim)
    parts, manifest = [], []
    for fraction, x in zip(resolutions.fractions, levels):
        values, entries = _assemble(x, cfg, bank, fraction)
        parts.append(values)
        manifest.extend(entries)
    values = np.concatenate(parts, axis=-1)
    if cfg.log_enabled:
        values = log_transform(values, cfg.log_k)
    return ScatterFeatures(values, tuple(manifest), feature_hash(cfg, resolutions, bank),
                           cfg.log_enabled)


def extract_batched(samples, resolutions: ResolutionSet, cfg: ScatterConfig,
                    bank: Optional[FilterBank] = None, chunk: int = 512) -> ScatterFeatures:
    """``multi_resolution_scatter`` over a stack of samples in fixed-size chunks."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != cfg.ndim + 1:
        raise DataError(f"expected a stack of {cfg.ndim}D samples, got shape {samples.shape}")
    if len(samples) == 0:
        raise DataError("no samples to transform")
    pieces = [multi_resolution_scatter(samples[i:i + chunk], resolutions, cfg, bank)
              for i in range(0, len(samples), chunk)]
    first = pieces[0]
    return ScatterFeatures(np.concatenate([p.values for p in pieces]), first.manifest,
                           first.config_hash, first.log_applied)


# ---------------------------------------------------------------------------
# export

def _header(features: ScatterFeatures) -> dict:
    return {
        "config_hash": features.config_hash,
        "log_applied": features.log_applied,
        "manifest": [[e.fraction, e.path.label(), list(e.shape)] for e in features.manifest],
    }


def _from_header(header: dict, values) -> ScatterFeatures:
    manifest = tuple(ManifestEntry(float(f), PathDescriptor.parse(p), tuple(s))
                     for f, p, s in header["manifest"])
    if sum(e.size for e in manifest) != values.shape[-1]:
        raise DataError("feature file manifest does not match the row length")
    return ScatterFeatures(values, manifest, header["config_hash"], bool(header["log_applied"]))


def save_features(path, features: ScatterFeatures, labels=None) -> Path:
    """Write features as ``.npz`` (bit-exact) or delimited text (``.csv``/``.txt``).

    Text files start with ``#``-prefixed header lines (JSON), then one row
    per sample: label (if given) followed by the feature values.
    """
    path = Path(path)
    values = np.atleast_2d(features.values)
    header = _header(features)
    if path.suffix == ".npz":
        arrays = {"values": values, "header": np.array(json.dumps(header))}
        if labels is not None:
            arrays["labels"] = np.asarray(labels)
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)
        return path
    header["has_labels"] = labels is not None
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header) + "\n")
        for i, row in enumerate(values):
            cells = [repr(float(v)) for v in row]
            if labels is not None:
                cells.insert(0, str(int(labels[i])))
            fh.write(",".join(cells) + "\n")
    return path


def load_features(path):
    """Inverse of :func:`save_features`; returns ``(features, labels or None)``."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature file {path} not found")
    if path.suffix == ".npz":
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            labels = data["labels"] if "labels" in data.files else None
            return _from_header(header, data["values"]), labels
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise DataError(f"{path}: missing header line")
        header = json.loads(first[2:])
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    labels = None
    if header.pop("has_labels", False):
        labels = np.array([int(r[0]) for r in rows])
        rows = [r[1:] for r in rows]
    values = np.array([[float(v) for v in r] for r in rows])
    return _from_header(header, values), labels
