"""Dual-tree complex wavelet transform (1D and 2D) with perfect reconstruction.

The transform follows Kingsbury's q-shift construction. Level 1 filters the
input at full rate with an odd-length near-symmetric biorthogonal pair; the
even and odd output phases form tree a and tree b. Levels >= 2 use an
orthonormal q-shift pair whose tree-b filters are the time reverse of the
tree-a filters, so the two trees stay a quarter sample apart and the complex
coefficient ``tree_a + 1j * tree_b`` is approximately analytic.

Both trees are carried interleaved in one real array. Symmetric (half-sample)
extension of the interleaved array maps tree a onto tree b at the borders,
which is what keeps the transform perfectly reconstructing with symmetric
boundaries.

Every filtering stage is a linear map along one axis. Each map is built once
per (filters, length) as a dense matrix and applied with ``matmul``, so the
routines accept arbitrary leading batch dimensions: ``forward_1d`` works on
the last axis, ``forward_2d`` on the last two.

Gain convention: level-1 analysis taps carry a factor sqrt(2) (lowpass taps
sum to sqrt(2)), q-shift lowpass taps sum to sqrt(2), synthesis taps carry
the matching 1/sqrt(2). A constant input of value c therefore leaves a depth-J
lowpass of c * 2**(J/2) per transformed axis.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import ConfigError, StructureError

SQRT2 = np.sqrt(2.0)

#: Orientation (degrees) of the six 2D subbands, in storage order.
ORIENTATIONS = (15, 45, 75, 105, 135, 165)

# Kingsbury near_sym_a (5,7)-tap level-1 pair; exact rationals.
_NEAR_SYM_H0 = np.array([-1, 5, 12, 5, -1]) / 20.0
_NEAR_SYM_H1 = np.array([3, -15, -73, 170, -73, -15, 3]) / 280.0
_NEAR_SYM_G0 = np.array([-3, -15, 73, 170, 73, -15, -3]) / 280.0
_NEAR_SYM_G1 = np.array([-1, -5, 12, -5, -1]) / 20.0

# Kingsbury q-shift (10,10)-tap filter "qshift_06", tree-a lowpass. It has an
# exact zero at z = -1, so constants give no highpass output at any level.
_QSHIFT_06_H0A = np.array([
    0.03516383657149474, 0.0, -0.08832942445107285, 0.23389032060723564,
    0.7602723690661257, 0.5875182977235605, 0.0, -0.11430183714424873,
    0.0, 0.0,
])


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Analysis and synthesis taps for the dual tree.

    ``h0o/h1o`` (analysis) and ``g0o/g1o`` (synthesis) are the level-1
    lowpass/highpass filters, shared by both trees (tree a reads the even
    output phase, tree b the odd one). ``h0a, h0b, h1a, h1b`` are the q-shift
    analysis filters of levels >= 2 for tree a and tree b; ``g*`` are the
    matching synthesis filters.
    """

    h0o: np.ndarray
    h1o: np.ndarray
    g0o: np.ndarray
    g1o: np.ndarray
    h0a: np.ndarray
    h0b: np.ndarray
    h1a: np.ndarray
    h1b: np.ndarray
    g0a: np.ndarray
    g0b: np.ndarray
    g1a: np.ndarray
    g1b: np.ndarray
    name: str = "custom"
    _key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        for f in ("h0o", "h1o", "g0o", "g1o", "h0a", "h0b", "h1a", "h1b",
                  "g0a", "g0b", "g1a", "g1b"):
            object.__setattr__(self, f, _frozen(getattr(self, f)))
        if abs(self.h0o.sum() - SQRT2) > 1e-12:
            raise ConfigError(f"level-1 lowpass taps sum to {self.h0o.sum()!r}, expected sqrt(2)")
        if len(self.h0o) % 2 == 0 or len(self.h1o) % 2 == 0:
            raise ConfigError("level-1 filters must have odd length")
        if len(self.h0a) % 2 or not np.array_equal(self.h0b, self.h0a[::-1]):
            raise ConfigError("tree-b q-shift lowpass must be the reversed tree-a lowpass")
        pr = np.convolve(self.h0o, self.g0o) + np.convolve(self.h1o, self.g1o)
        delta = np.zeros_like(pr)
        delta[len(pr) // 2] = 1.0
        if np.abs(pr - delta).max() > 1e-12:
            raise ConfigError("level-1 pair does not reconstruct perfectly")
        m = len(self.h0a)
        acf = np.correlate(self.h0a, self.h0a, "full")[m - 1::2]
        if abs(acf[0] - 1.0) > 1e-12 or np.abs(acf[1:]).max() > 1e-12:
            raise ConfigError("q-shift lowpass is not orthonormal")
        key = tuple(tuple(getattr(self, f).tolist()) for f in
                    ("h0o", "h1o", "g0o", "g1o", "h0a", "h0b", "h1a", "h1b",
                     "g0a", "g0b", "g1a", "g1b"))
        object.__setattr__(self, "_key", key)

    @classmethod
    def from_prototypes(cls, h0o, h1o, g0o, g1o, h0a, name="custom") -> "FilterBank":
        """Build a bank from unit-DC level-1 taps and a q-shift tree-a lowpass.

        The level-1 analysis taps are scaled by sqrt(2) (synthesis by
        1/sqrt(2)); every other q-shift filter is derived from ``h0a``.
        """
        h0a = np.asarray(h0a, dtype=np.float64)
        sign = (-1.0) ** np.arange(len(h0a))
        h1a = sign * h0a[::-1]
        return cls(
            h0o=np.asarray(h0o) * SQRT2, h1o=np.asarray(h1o) * SQRT2,
            g0o=np.asarray(g0o) / SQRT2, g1o=np.asarray(g1o) / SQRT2,
            h0a=h0a, h0b=h0a[::-1], h1a=h1a, h1b=h1a[::-1],
            g0a=h0a[::-1], g0b=h0a, g1a=h1a[::-1], g1b=h1a,
            name=name,
        )


@functools.lru_cache(maxsize=None)
def default_filter_bank() -> FilterBank:
    """The frozen bank every result in this package is defined against:
    near_sym_a (5,7) at level 1 and qshift_06 (10,10) at levels >= 2."""
    return FilterBank.from_prototypes(
        _NEAR_SYM_H0, _NEAR_SYM_H1, _NEAR_SYM_G0, _NEAR_SYM_G1, _QSHIFT_06_H0A,
        name="near_sym_a+qshift_06",
    )


def format_bank(bank: Optional[FilterBank] = None) -> str:
    """Plain-text dump of all taps (17 significant digits)."""
    bank = bank or default_filter_bank()
    lines = [f"# filter bank {bank.name}"]
    for f in ("h0o", "h1o", "g0o", "g1o", "h0a", "h0b", "h1a", "h1b",
              "g0a", "g0b", "g1a", "g1b"):
        taps = " ".join(f"{v:.17g}" for v in getattr(bank, f))
        lines.append(f"{f} ({len(getattr(bank, f))}): {taps}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# 1D stage matrices

def _reflect(idx, n):
    """Half-sample symmetric index map: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ..."""
    r = np.mod(idx, 2 * n)
    return np.where(r < n, r, 2 * n - 1 - r)


@functools.lru_cache(maxsize=512)
def _undecimated(h: tuple, n: int) -> np.ndarray:
    h = np.asarray(h)
    c = len(h) // 2
    mat = np.zeros((n, n))
    p = np.arange(n)
    for k, tap in enumerate(h):
        np.add.at(mat, (p, _reflect(p + c - k, n)), tap)
    mat.setflags(write=False)
    return mat


@functools.lru_cache(maxsize=512)
def _decimating(ha: tuple, hb: tuple, n: int) -> np.ndarray:
    # ha filters the even samples, hb the odd ones; outputs interleave.
    ha, hb = np.asarray(ha), np.asarray(hb)
    m = len(ha)
    k = np.arange(n // 4)
    first = 0 if np.dot(ha, hb) > 0 else 1
    mat = np.zeros((n // 2, n))
    for j in range(m):
        np.add.at(mat, (2 * k + first, _reflect(4 * k + m - 2 * j, n)), ha[j])
        np.add.at(mat, (2 * k + 1 - first, _reflect(4 * k + m + 1 - 2 * j, n)), hb[j])
    mat.setflags(write=False)
    return mat


@functools.lru_cache(maxsize=512)
def _interpolating(ga: tuple, gb: tuple, n: int) -> np.ndarray:
    ga, gb = np.asarray(ga), np.asarray(gb)
    m = len(ga)
    half = m // 2
    shift_a, shift_b = (1, 0) if np.dot(ga, gb) > 0 else (0, 1)
    mat = np.zeros((2 * n, n))
    for s in range(n):
        taps = np.arange((s + half + 1) % 2, m, 2)
        np.add.at(mat, (2 * s, _reflect(s + half - taps - shift_a, n)), ga[taps])
        np.add.at(mat, (2 * s + 1, _reflect(s + half - taps - shift_b, n)), gb[taps])
    mat.setflags(write=False)
    return mat


def _along(mat, x, axis):
    if axis == -1:
        return np.matmul(x, mat.T)
    return np.matmul(mat, x)


def _t(a):
    return tuple(a.tolist())


def _pad_even(x, axis):
    """Repeat the last sample when the axis has odd length."""
    if x.shape[axis] % 2 == 0:
        return x
    last = np.take(x, [-1], axis=axis)
    return np.concatenate([x, last], axis=axis)


def _pad_quad(x, axis):
    """Extend both ends by one repeated sample when length % 4 != 0."""
    if x.shape[axis] % 4 == 0:
        return x
    n = x.shape[axis]
    return np.concatenate([np.take(x, [0], axis=axis), x,
                           np.take(x, [n - 1], axis=axis)], axis=axis)


def min_length(depth: int) -> int:
    """Shortest axis length accepted for a ``depth``-level transform."""
    return max(2, 2 ** (depth - 1))


def _check(shape, depth, axes):
    if not isinstance(depth, (int, np.integer)) or depth < 1:
        raise ConfigError(f"depth must be an integer >= 1, got {depth!r}")
    for ax in axes:
        if len(shape) < -ax:
            raise ConfigError(f"input has {len(shape)} dims, need at least {-ax}")
        if shape[ax] < min_length(depth):
            raise ConfigError(
                f"axis of length {shape[ax]} is too short for depth {depth}; "
                f"minimum length is {min_length(depth)}")


# ---------------------------------------------------------------------------
# pyramids

@dataclass(frozen=True)
class ComplexSubband:
    coefficients: np.ndarray
    scale: int
    orientation: Optional[int]
    decimation: int


@dataclass(frozen=True)
class DtcwtPyramid:
    """Lowpass residual plus one complex highpass array per level.

    1D: ``highpasses[l]`` has shape ``(..., n_l)``.
    2D: ``highpasses[l]`` has shape ``(..., 6, h_l, w_l)``, orientations in
    the order of :data:`ORIENTATIONS`.
    The lowpass holds both (1D) or all four (2D) trees interleaved.
    """

    lowpass: np.ndarray
    highpasses: tuple
    ndim: int
    input_shape: tuple

    @property
    def depth(self) -> int:
        return len(self.highpasses)

    def subbands(self) -> Iterator[ComplexSubband]:
        for level, hp in enumerate(self.highpasses, start=1):
            if self.ndim == 1:
                yield ComplexSubband(hp, level, None, 2 ** level)
            else:
                for k, theta in enumerate(ORIENTATIONS):
                    yield ComplexSubband(hp[..., k, :, :], level, theta, 2 ** level)

    def format_energies(self) -> str:
        lines = [f"# subband energies ({self.ndim}D, depth {self.depth})",
                 f"lowpass: {float(np.sum(self.lowpass ** 2)):.17g}"]
        for sb in self.subbands():
            tag = f"level {sb.scale}" + ("" if sb.orientation is None else f" {sb.orientation:3d}deg")
            lines.append(f"{tag}: {float(np.sum(np.abs(sb.coefficients) ** 2)):.17g}")
        return "\n".join(lines)


def _to_complex(hi):
    return hi[..., 0::2] + 1j * hi[..., 1::2]


def _from_complex(z):
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def forward_1d(signal, depth: int, bank: Optional[FilterBank] = None) -> DtcwtPyramid:
    """DTCWT of the last axis of ``signal``."""
    bank = bank or default_filter_bank()
    x = np.asarray(signal, dtype=np.float64)
    _check(x.shape, depth, (-1,))
    input_shape = x.shape[-1:]
    x = _pad_even(x, -1)
    n = x.shape[-1]
    hi = _along(_undecimated(_t(bank.h1o), n), x, -1)
    lo = _along(_undecimated(_t(bank.h0o), n), x, -1)
    highs = [_to_complex(hi)]
    for _ in range(1, depth):
        lo = _pad_quad(lo, -1)
        n = lo.shape[-1]
        hi = _along(_decimating(_t(bank.h1b), _t(bank.h1a), n), lo, -1)
        lo = _along(_decimating(_t(bank.h0b), _t(bank.h0a), n), lo, -1)
        highs.append(_to_complex(hi))
    return DtcwtPyramid(lo, tuple(highs), 1, input_shape)


def inverse_1d(pyramid: DtcwtPyramid, bank: Optional[FilterBank] = None) -> np.ndarray:
    """Reconstruct the signal from a 1D pyramid."""
    bank = bank or default_filter_bank()
    if pyramid.ndim != 1:
        raise StructureError("inverse_1d needs a 1D pyramid")
    highs = pyramid.highpasses
    if not highs:
        raise StructureError("pyramid has no levels")
    lo = np.asarray(pyramid.lowpass, dtype=np.float64)
    for level in range(len(highs) - 1, 0, -1):
        hi = _from_complex(highs[level])
        if hi.shape[-1] != lo.shape[-1]:
            raise StructureError(
                f"level {level + 1}: highpass length {hi.shape[-1] // 2} does not match "
                f"lowpass length {lo.shape[-1]}")
        n = lo.shape[-1]
        lo = (_along(_interpolating(_t(bank.g0b), _t(bank.g0a), n), lo, -1)
              + _along(_interpolating(_t(bank.g1b), _t(bank.g1a), n), hi, -1))
        target = 2 * highs[level - 1].shape[-1]
        if lo.shape[-1] == target + 2:
            lo = lo[..., 1:-1]
        elif lo.shape[-1] != target:
            raise StructureError(f"level {level}: band lengths are inconsistent")
    hi = _from_complex(highs[0])
    if hi.shape[-1] != lo.shape[-1]:
        raise StructureError("level 1: band lengths are inconsistent")
    n = lo.shape[-1]
    x = (_along(_undecimated(_t(bank.g0o), n), lo, -1)
         + _along(_undecimated(_t(bank.g1o), n), hi, -1))
    return x[..., :pyramid.input_shape[-1]]


def _q2c(y):
    """Corners of each 2x2 quad -> the two complex subbands of a pair."""
    p = (y[..., 0::2, 0::2] + 1j * y[..., 0::2, 1::2]) / SQRT2
    q = (y[..., 1::2, 1::2] - 1j * y[..., 1::2, 0::2]) / SQRT2
    return p - q, p + q


def _c2q(w1, w2):
    p = (w1 + w2) / SQRT2
    q = (w1 - w2) / SQRT2
    h, w = w1.shape[-2:]
    y = np.empty(w1.shape[:-2] + (2 * h, 2 * w))
    y[..., 0::2, 0::2] = p.real
    y[..., 0::2, 1::2] = p.imag
    y[..., 1::2, 0::2] = q.imag
    y[..., 1::2, 1::2] = -q.real
    return y


def _orient(horiz, diag, vert):
    # storage order 15, 45, 75, 105, 135, 165
    return np.stack([horiz[0], diag[0], vert[0], vert[1], diag[1], horiz[1]], axis=-3)


def forward_2d(image, depth: int, bank: Optional[FilterBank] = None) -> DtcwtPyramid:
    """DTCWT of the last two axes of ``image`` (six orientations per level)."""
    bank = bank or default_filter_bank()
    x = np.asarray(image, dtype=np.float64)
    _check(x.shape, depth, (-2, -1))
    input_shape = x.shape[-2:]
    x = _pad_even(_pad_even(x, -2), -1)
    r, c = x.shape[-2:]
    lo = _along(_undecimated(_t(bank.h0o), r), x, -2)
    hi = _along(_undecimated(_t(bank.h1o), r), x, -2)
    a0, a1 = _undecimated(_t(bank.h0o), c), _undecimated(_t(bank.h1o), c)
    lolo = _along(a0, lo, -1)
    highs = [_orient(_q2c(_along(a0, hi, -1)), _q2c(_along(a1, hi, -1)),
                     _q2c(_along(a1, lo, -1)))]
    for _ in range(1, depth):
        lolo = _pad_quad(_pad_quad(lolo, -2), -1)
        r, c = lolo.shape[-2:]
        lo = _along(_decimating(_t(bank.h0b), _t(bank.h0a), r), lolo, -2)
        hi = _along(_decimating(_t(bank.h1b), _t(bank.h1a), r), lolo, -2)
        d0 = _decimating(_t(bank.h0b), _t(bank.h0a), c)
        d1 = _decimating(_t(bank.h1b), _t(bank.h1a), c)
        lolo = _along(d0, lo, -1)
        highs.append(_orient(_q2c(_along(d0, hi, -1)), _q2c(_along(d1, hi, -1)),
                             _q2c(_along(d1, lo, -1))))
    return DtcwtPyramid(lolo, tuple(highs), 2, input_shape)


def _crop2(z, target):
    for axis, want in ((-2, target[0]), (-1, target[1])):
        have = z.shape[axis]
        if have == want + 2:
            z = np.take(z, np.arange(1, have - 1), axis=axis)
        elif have != want:
            raise StructureError(f"band sizes are inconsistent ({have} vs {want})")
    return z


def inverse_2d(pyramid: DtcwtPyramid, bank: Optional[FilterBank] = None) -> np.ndarray:
    """Reconstruct the image from a 2D pyramid."""
    bank = bank or default_filter_bank()
    if pyramid.ndim != 2:
        raise StructureError("inverse_2d needs a 2D pyramid")
    highs = pyramid.highpasses
    if not highs:
        raise StructureError("pyramid has no levels")
    z = np.asarray(pyramid.lowpass, dtype=np.float64)
    for level in range(len(highs), 0, -1):
        hp = highs[level - 1]
        if hp.shape[-3] != 6:
            raise StructureError("2D highpass needs 6 orientations")
        lh = _c2q(hp[..., 0, :, :], hp[..., 5, :, :])
        hl = _c2q(hp[..., 2, :, :], hp[..., 3, :, :])
        hh = _c2q(hp[..., 1, :, :], hp[..., 4, :, :])
        if lh.shape[-2:] != z.shape[-2:]:
            raise StructureError(
                f"level {level}: highpass {hp.shape[-2:]} does not match lowpass {z.shape[-2:]}")
        r, c = z.shape[-2:]
        if level > 1:
            s0r = _interpolating(_t(bank.g0b), _t(bank.g0a), r)
            s1r = _interpolating(_t(bank.g1b), _t(bank.g1a), r)
            s0c = _interpolating(_t(bank.g0b), _t(bank.g0a), c)
            s1c = _interpolating(_t(bank.g1b), _t(bank.g1a), c)
        else:
            s0r, s1r = _undecimated(_t(bank.g0o), r), _undecimated(_t(bank.g1o), r)
            s0c, s1c = _undecimated(_t(bank.g0o), c), _undecimated(_t(bank.g1o), c)
        y1 = _along(s0r, z, -2) + _along(s1r, lh, -2)
        y2 = _along(s0r, hl, -2) + _along(s1r, hh, -2)
        z = _along(s0c, y1, -1) + _along(s1c, y2, -1)
        if level > 1:
            prev = highs[level - 2].shape[-2:]
            z = _crop2(z, (2 * prev[0], 2 * prev[1]))
    h, w = pyramid.input_shape
    return z[..., :h, :w]


def lowpass_smooth(signal, depth: int, ndim: Optional[int] = None,
                   bank: Optional[FilterBank] = None) -> np.ndarray:
    """Average with the depth-``depth`` scaling function, decimating by
    ``2**depth`` per axis.

    This is the lowpass branch of a ``depth``-level transform with the
    highpass discarded; the interleaved tree phases of the residual are then
    averaged. ``depth == 0`` returns the input unchanged. A constant c maps to
    c * 2**(depth/2) per axis.
    """
    bank = bank or default_filter_bank()
    x = np.asarray(signal, dtype=np.float64)
    ndim = ndim or x.ndim
    if ndim not in (1, 2):
        raise ConfigError(f"ndim must be 1 or 2, got {ndim}")
    if depth == 0:
        return x
    axes = (-1,) if ndim == 1 else (-2, -1)
    _check(x.shape, depth, axes)
    for ax in axes:
        x = _pad_even(x, ax)
        x = _along(_undecimated(_t(bank.h0o), x.shape[ax]), x, ax)
    for _ in range(1, depth):
        for ax in axes:
            x = _pad_quad(x, ax)
            x = _along(_decimating(_t(bank.h0b), _t(bank.h0a), x.shape[ax]), x, ax)
    if ndim == 1:
        return 0.5 * (x[..., 0::2] + x[..., 1::2])
    return 0.25 * (x[..., 0::2, 0::2] + x[..., 0::2, 1::2]
                   + x[..., 1::2, 0::2] + x[..., 1::2, 1::2])
