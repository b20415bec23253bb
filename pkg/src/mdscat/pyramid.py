"""Multi-resolution input pyramids built by band-limited resampling.

Each resolution is a separable windowed-sinc resample of the input. Sample
centres are aligned (output sample i sits at input position
``(i + 0.5) * n / m - 0.5``), the sinc cutoff is the output Nyquist rate, the
window is Lanczos with ``LOBES`` lobes, borders use half-sample symmetric
reflection, and every weight row is normalised to sum to one so constants are
preserved exactly.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dtcwt import min_length
from .errors import ConfigError

LOBES = 4
METHOD = f"lanczos{LOBES}"


@dataclass(frozen=True)
class ResolutionSet:
    """Scale fractions of the pyramid, finest first (the first must be 1.0)."""

    fractions: tuple = (1.0,)
    method: str = METHOD

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        object.__setattr__(self, "fractions", fr)
        if not fr:
            raise ConfigError("at least one resolution fraction is required")
        if fr[0] != 1.0:
            raise ConfigError(f"first fraction must be 1.0, got {fr[0]}")
        for f in fr:
            if not 0.0 < f <= 1.0:
                raise ConfigError(f"fraction {f} is outside (0, 1]")
        for a, b in zip(fr, fr[1:]):
            if not b < a:
                raise ConfigError(f"fractions must be strictly decreasing ({a} then {b})")
        if self.method != METHOD:
            raise ConfigError(f"unknown resampling method {self.method!r}; only {METHOD!r} is available")


def scaled_extent(n: int, fraction: float, depth: int) -> int:
    """round(fraction * n), halves rounded up, raised to the minimum length for ``depth``."""
    if fraction == 1.0:
        return n
    return max(int(math.floor(fraction * n + 0.5)), min_length(depth))


def output_shapes(shape: Sequence[int], resolutions: ResolutionSet, depth: int) -> list:
    """Per-fraction output extents for the axes in ``shape``.

    Raises ConfigError when a fraction gives an axis too short for ``depth``
    or when extents stop decreasing strictly.
    """
    shape = tuple(int(n) for n in shape)
    for n in shape:
        if n < min_length(depth):
            raise ConfigError(
                f"input extent {n} is too short for depth {depth}; minimum length is {min_length(depth)}")
    out = [shape]
    for f in resolutions.fractions[1:]:
        new = tuple(scaled_extent(n, f, depth) for n in shape)
        for prev, cur in zip(out[-1], new):
            if cur >= prev:
                raise ConfigError(
                    f"fraction {f} gives extent {cur}, not smaller than the previous {prev} "
                    f"(minimum length for depth {depth} is {min_length(depth)})")
        out.append(new)
    return out


@functools.lru_cache(maxsize=256)
def resample_matrix(n: int, m: int, lobes: int = LOBES) -> np.ndarray:
    """(m, n) matrix taking a length-n axis to length m."""
    if n == m:
        mat = np.eye(n)
        mat.setflags(write=False)
        return mat
    s = min(1.0, m / n)
    half = lobes / s
    pos = (np.arange(m) + 0.5) * n / m - 0.5
    mat = np.zeros((m, n))
    for i, p in enumerate(pos):
        taps = np.arange(math.floor(p - half) + 1, math.ceil(p + half))
        t = p - taps
        w = np.sinc(s * t) * np.sinc(s * t / lobes)
        w[np.abs(t) >= half] = 0.0
        r = np.mod(taps, 2 * n)
        idx = np.where(r < n, r, 2 * n - 1 - r)
        np.add.at(mat[i], idx, w)
        mat[i] /= mat[i].sum()
    mat.setflags(write=False)
    return mat


def resample(signal, shape: Sequence[int]) -> np.ndarray:
    """Resample the trailing ``len(shape)`` axes of ``signal`` to ``shape``."""
    x = np.asarray(signal, dtype=np.float64)
    k = len(shape)
    for i, m in enumerate(shape):
        axis = x.ndim - k + i
        n = x.shape[axis]
        if n == m:
            continue
        x = np.moveaxis(np.moveaxis(x, axis, -1) @ resample_matrix(n, int(m)).T, -1, axis)
    return x


def multi_resolution(signal, resolutions: ResolutionSet, depth: int, ndim: int = 2) -> list:
    """One resampled copy of ``signal`` per fraction.

    The trailing ``ndim`` axes are resampled; leading axes are a batch. The
    1.0 entry is the input object itself.
    """
    x = np.asarray(signal)
    if ndim not in (1, 2) or x.ndim < ndim:
        raise ConfigError(f"cannot take a {ndim}D pyramid of an array with shape {x.shape}")
    shapes = output_shapes(x.shape[-ndim:], resolutions, depth)
    return [signal if f == 1.0 else resample(x, s)
            for f, s in zip(resolutions.fractions, shapes)]
