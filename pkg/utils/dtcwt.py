"""Two-dimensional dual-tree complex wavelet transform.

Level 1 is an undecimated separable stage built on the near-symmetric 13/19
biorthogonal pair (the two trees are the even/odd sample phases recovered by
the quad-to-complex packing); levels 2 and up run the two quarter-shift trees
on alternate samples. Both stages use half-sample symmetric extension, and
every stage is exactly invertible.

Subband order at every level follows the usual DT-CWT layout, orientations of
roughly 15, 45, 75, 105, 135 and 165 degrees.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Tuple

import numpy as np
from scipy import ndimage
from scipy.linalg import convolution_matrix

from .errors import ImageTooSmall, ShapeMismatch

logger = logging.getLogger(__name__)

ORIENTATIONS = (15, 45, 75, 105, 135, 165)

# Near-symmetric 13-tap analysis lowpass (Kingsbury near_sym_b)
_NEAR_SYM_H0 = np.array([-9, 0, 114, -240, -247, 1520, 2844, 1520, -247, -240, 114, 0, -9]) / 5120.0

# Matching 19-tap synthesis lowpass to seven decimals, centre tap first
_NEAR_SYM_G0_HALF = np.array([
    0.5594308, 0.2997576, -0.0516881, -0.0556431, 0.0238560,
    0.0071568, -0.0018834, -0.0013419, 0.0, 0.0000706])

# 14-tap quarter-shift lowpass H_L (Kingsbury, Phil. Trans. R. Soc. A, 1999)
_HL_14 = np.array([
    0.0032531427636532, -0.0038832119991585, 0.0346603468448535,
    -0.0388728012688278, -0.1172038876991153, 0.2752953846688820,
    0.7561456438925225, 0.5688104207121227, 0.0118660920337970,
    -0.1067118046866654, 0.0238253847949203, 0.0170252238815540,
    -0.0054394759372741, -0.0045568956284755])


def _negate_odd_offsets(h: np.ndarray) -> np.ndarray:
    """Negate taps at odd distance from the centre of an odd-length filter."""
    out = h.copy()
    centre = len(h) // 2
    out[(np.arange(len(h)) - centre) % 2 == 1] *= -1
    return out


def _symmetric_from_half(half: np.ndarray) -> np.ndarray:
    return np.concatenate([half[:0:-1], half])


def _near_sym_synthesis(h0: np.ndarray, g0_half: np.ndarray) -> np.ndarray:
    """
    Adjust the tabulated synthesis lowpass so the pair reconstructs exactly.

    The product h0 * g0 must be half-band (centre 0.5, zero at every other even
    offset) and g0 must vanish at Nyquist so the level-1 highpass sums to zero.
    The smallest correction meeting both is added to the rounded table.
    """
    size = len(g0_half)
    # maps the half table onto the full symmetric filter
    expand = np.stack([_symmetric_from_half(np.eye(size)[j]) for j in range(size)], axis=1)
    product = convolution_matrix(h0, 2 * size - 1, mode="full") @ expand
    centre = product.shape[0] // 2
    alternating = (-1.0) ** (np.arange(2 * size - 1) - (size - 1))

    constraints = np.vstack([product[centre::2], alternating @ expand])
    target = np.zeros(constraints.shape[0])
    target[0] = 0.5
    correction = np.linalg.lstsq(constraints, target - constraints @ g0_half, rcond=None)[0]
    return _symmetric_from_half(g0_half + correction)


@dataclass(frozen=True, eq=False)
class FilterBank:
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
    biort_name: str = "near-sym-13/19"
    qshift_name: str = "qshift-14"

    @classmethod
    def from_tables(cls) -> "FilterBank":
        h0b = _HL_14.copy()
        h0a = h0b[::-1].copy()
        h1a = _HL_14.copy()
        h1a[0::2] *= -1
        h1b = h1a[::-1].copy()
        g0o = _near_sym_synthesis(_NEAR_SYM_H0, _NEAR_SYM_G0_HALF)
        return cls(
            h0o=_NEAR_SYM_H0.copy(),
            h1o=_negate_odd_offsets(g0o),
            g0o=g0o,
            g1o=_negate_odd_offsets(_NEAR_SYM_H0),
            h0a=h0a, h0b=h0b, h1a=h1a, h1b=h1b,
            g0a=h0a[::-1].copy(), g0b=h0b[::-1].copy(),
            g1a=h1a[::-1].copy(), g1b=h1b[::-1].copy(),
        )

    @property
    def identifiers(self) -> Tuple[str, str]:
        return self.biort_name, self.qshift_name

    def check_reconstruction(self, tolerance: float = 1e-10) -> bool:
        """Run a delta through each 1-D analysis/synthesis pair and compare."""
        response = np.convolve(self.h0o, self.g0o) + np.convolve(self.h1o, self.g1o)
        delta = np.zeros_like(response)
        delta[len(response) // 2] = 1.0
        if np.max(np.abs(response - delta)) >= tolerance:
            return False

        # one impulse in the interior, one against each edge
        impulse = np.zeros((32, 3))
        impulse[12, 0] = impulse[0, 1] = impulse[30, 2] = 1.0
        lo = _qshift_analysis(impulse, self.h0b, self.h0a, axis=0)
        hi = _qshift_analysis(impulse, self.h1b, self.h1a, axis=0)
        rebuilt = (_qshift_synthesis(lo, self.g0b, self.g0a, axis=0)
                   + _qshift_synthesis(hi, self.g1b, self.g1a, axis=0))
        return bool(np.max(np.abs(rebuilt - impulse)) < tolerance)


FILTER_BANK = FilterBank.from_tables()


class BandPart(str, Enum):
    REAL = "real"
    IMAGINARY = "imaginary"
    ABS = "abs"


@dataclass(frozen=True, eq=False)
class DtcwtPyramid:
    """Complex subbands per level, each an (h, w, 6) array, plus the real lowpass residual."""
    levels: Tuple[np.ndarray, ...]
    lowpass: np.ndarray
    original_shape: Tuple[int, int]
    # per level: (rows extended, columns extended) before that level's filtering
    extensions: Tuple[Tuple[bool, bool], ...] = field(default=())

    @property
    def depth(self) -> int:
        return len(self.levels)


@dataclass(frozen=True, eq=False)
class BandSet:
    """The twelve real level-1 matrices, keyed by (band index, part)."""
    bands: Dict[Tuple[int, BandPart], np.ndarray]
    source_level: int = 1

    def __getitem__(self, key: Tuple[int, BandPart]) -> np.ndarray:
        index, part = key
        return self.bands[(index, BandPart(part))]

    def __iter__(self) -> Iterator[Tuple[int, BandPart]]:
        return iter(self.bands)

    def __len__(self) -> int:
        return len(self.bands)

    def keys(self) -> List[Tuple[int, BandPart]]:
        return list(self.bands)

    def items(self):
        return self.bands.items()

    @property
    def shape(self) -> Tuple[int, int]:
        return next(iter(self.bands.values())).shape


def _colfilter(x: np.ndarray, h: np.ndarray, axis: int) -> np.ndarray:
    return ndimage.convolve1d(x, h, axis=axis, mode="reflect")


def _reflect(index: np.ndarray, length: int) -> np.ndarray:
    """Fold indices into [0, length) by half-sample symmetric extension."""
    folded = np.mod(index, 2 * length)
    return np.where(folded < length, folded, 2 * length - 1 - folded)


def _tree_index(length: int, taps: int, phase: int) -> np.ndarray:
    # output k of the tree on this phase reads composite samples
    # 2 * (2k - offset + t) + phase, t = 0 .. taps - 1, extended symmetrically
    # so that one tree continues as the mirror image of the other
    offset = taps // 2 - 1
    positions = 2 * (2 * np.arange(length // 4)[:, None] + np.arange(taps)[None, :] - offset) + phase
    return _reflect(positions, length)


def _tree_decimate(x: np.ndarray, h: np.ndarray, phase: int) -> np.ndarray:
    index = _tree_index(x.shape[0], len(h), phase)
    return np.tensordot(x[index], h, axes=([1], [0]))


def _tree_expand(out: np.ndarray, y: np.ndarray, g: np.ndarray, phase: int) -> None:
    """Upsample and filter with g into out; the exact adjoint of decimating with reverse(g)."""
    index = _tree_index(out.shape[0], len(g), phase)[:, ::-1]
    weights = g.reshape((1, len(g)) + (1,) * (y.ndim - 1))
    np.add.at(out, index, weights * y[:, None, ...])


def _qshift_analysis(x: np.ndarray, ha: np.ndarray, hb: np.ndarray, axis: int) -> np.ndarray:
    """Filter and decimate one axis with the two q-shift trees, interleaving their outputs."""
    x = np.moveaxis(x, axis, 0)
    n = x.shape[0]
    if n % 4:
        raise ShapeMismatch(f"q-shift stage needs a multiple of 4 samples, got {n}")

    ya = _tree_decimate(x, ha, 0)
    yb = _tree_decimate(x, hb, 1)
    y = np.empty((n // 2,) + x.shape[1:])
    if np.sum(ha * hb) > 0:
        y[0::2], y[1::2] = ya, yb
    else:
        y[0::2], y[1::2] = yb, ya
    return np.moveaxis(y, 0, axis)


def _qshift_synthesis(y: np.ndarray, ga: np.ndarray, gb: np.ndarray, axis: int) -> np.ndarray:
    y = np.moveaxis(y, axis, 0)
    if np.sum(ga * gb) > 0:
        ya, yb = y[0::2], y[1::2]
    else:
        ya, yb = y[1::2], y[0::2]

    x = np.zeros((2 * y.shape[0],) + y.shape[1:])
    _tree_expand(x, ya, ga, 0)
    _tree_expand(x, yb, gb, 1)
    return np.moveaxis(x, 0, axis)


def _q2c(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Pack each 2x2 quad (a b / c d) into the complex pair (p - q, p + q)."""
    p = (y[0::2, 0::2] + 1j * y[0::2, 1::2]) * np.sqrt(0.5)
    q = (y[1::2, 1::2] - 1j * y[1::2, 0::2]) * np.sqrt(0.5)
    return p - q, p + q


def _c2q(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    p = (w1 + w2) / 2
    q = (w2 - w1) / 2
    y = np.empty((2 * w1.shape[0], 2 * w1.shape[1]))
    y[0::2, 0::2] = np.sqrt(2) * p.real
    y[0::2, 1::2] = np.sqrt(2) * p.imag
    y[1::2, 1::2] = np.sqrt(2) * q.real
    y[1::2, 0::2] = -np.sqrt(2) * q.imag
    return y


def _pack(horizontal: np.ndarray, vertical: np.ndarray, diagonal: np.ndarray) -> np.ndarray:
    h1, h2 = _q2c(horizontal)
    v1, v2 = _q2c(vertical)
    d1, d2 = _q2c(diagonal)
    return np.stack([h1, d1, v1, v2, d2, h2], axis=-1)


def _unpack(subbands: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    horizontal = _c2q(subbands[..., 0], subbands[..., 5])
    vertical = _c2q(subbands[..., 2], subbands[..., 3])
    diagonal = _c2q(subbands[..., 1], subbands[..., 4])
    return horizontal, vertical, diagonal


def _check_size(shape: Tuple[int, int], levels: int) -> None:
    extended = [d + d % 2 for d in shape]
    if min(extended) < 2 ** levels:
        raise ImageTooSmall(
            f"image {shape[0]}x{shape[1]} is too small for a {levels}-level transform "
            f"(needs at least {2 ** levels} pixels per side)"
        )


def forward(img: np.ndarray, levels: int = 1, bank: FilterBank = FILTER_BANK) -> DtcwtPyramid:
    """
    Decompose a grayscale image.

    Args:
        img: 2-D real raster
        levels: Number of decomposition levels (>= 1)
        bank: Filter tables to use

    Returns:
        DtcwtPyramid whose level-l subbands measure ceil(side / 2**l) per axis
    """
    x = np.asarray(img, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D raster, got shape {x.shape}")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    _check_size(x.shape, levels)

    original_shape = x.shape
    extensions = []

    odd = (x.shape[0] % 2 == 1, x.shape[1] % 2 == 1)
    if odd[0]:
        x = np.vstack([x, x[-1:]])
    if odd[1]:
        x = np.hstack([x, x[:, -1:]])
    extensions.append(odd)

    lo = _colfilter(x, bank.h0o, axis=0)
    hi = _colfilter(x, bank.h1o, axis=0)
    lowpass = _colfilter(lo, bank.h0o, axis=1)
    subbands = [_pack(
        horizontal=_colfilter(hi, bank.h0o, axis=1),
        vertical=_colfilter(lo, bank.h1o, axis=1),
        diagonal=_colfilter(hi, bank.h1o, axis=1),
    )]

    for _ in range(1, levels):
        pad = (lowpass.shape[0] % 4 != 0, lowpass.shape[1] % 4 != 0)
        if pad[0]:
            lowpass = np.vstack([lowpass[:1], lowpass, lowpass[-1:]])
        if pad[1]:
            lowpass = np.hstack([lowpass[:, :1], lowpass, lowpass[:, -1:]])
        extensions.append(pad)

        lo = _qshift_analysis(lowpass, bank.h0b, bank.h0a, axis=0)
        hi = _qshift_analysis(lowpass, bank.h1b, bank.h1a, axis=0)
        lowpass = _qshift_analysis(lo, bank.h0b, bank.h0a, axis=1)
        subbands.append(_pack(
            horizontal=_qshift_analysis(hi, bank.h0b, bank.h0a, axis=1),
            vertical=_qshift_analysis(lo, bank.h1b, bank.h1a, axis=1),
            diagonal=_qshift_analysis(hi, bank.h1b, bank.h1a, axis=1),
        ))

    logger.debug(f"Forward transform of {original_shape} over {levels} level(s)")
    return DtcwtPyramid(
        levels=tuple(subbands),
        lowpass=lowpass,
        original_shape=original_shape,
        extensions=tuple(extensions),
    )


def inverse(pyramid: DtcwtPyramid, bank: FilterBank = FILTER_BANK) -> np.ndarray:
    """Reconstruct the image a pyramid was computed from."""
    if pyramid.depth < 1 or len(pyramid.extensions) != pyramid.depth:
        raise ShapeMismatch("pyramid levels and extension records disagree")

    lowpass = np.asarray(pyramid.lowpass, dtype=np.float64)
    for index in range(pyramid.depth - 1, -1, -1):
        subbands = pyramid.levels[index]
        if subbands.ndim != 3 or subbands.shape[2] != 6:
            raise ShapeMismatch(f"level {index + 1} does not hold 6 subbands")
        if lowpass.shape != (2 * subbands.shape[0], 2 * subbands.shape[1]):
            raise ShapeMismatch(
                f"lowpass {lowpass.shape} inconsistent with level {index + 1} subbands {subbands.shape[:2]}"
            )

        horizontal, vertical, diagonal = _unpack(subbands)
        if index == 0:
            lo = _colfilter(lowpass, bank.g0o, axis=1) + _colfilter(vertical, bank.g1o, axis=1)
            hi = _colfilter(horizontal, bank.g0o, axis=1) + _colfilter(diagonal, bank.g1o, axis=1)
            lowpass = _colfilter(lo, bank.g0o, axis=0) + _colfilter(hi, bank.g1o, axis=0)
        else:
            lo = (_qshift_synthesis(lowpass, bank.g0b, bank.g0a, axis=1)
                  + _qshift_synthesis(vertical, bank.g1b, bank.g1a, axis=1))
            hi = (_qshift_synthesis(horizontal, bank.g0b, bank.g0a, axis=1)
                  + _qshift_synthesis(diagonal, bank.g1b, bank.g1a, axis=1))
            lowpass = (_qshift_synthesis(lo, bank.g0b, bank.g0a, axis=0)
                       + _qshift_synthesis(hi, bank.g1b, bank.g1a, axis=0))
            rows_padded, cols_padded = pyramid.extensions[index]
            if rows_padded:
                lowpass = lowpass[1:-1]
            if cols_padded:
                lowpass = lowpass[:, 1:-1]

    height, width = pyramid.original_shape
    return lowpass[:height, :width]


def split_bands(pyramid: DtcwtPyramid, part_mode: str = "real-imag") -> BandSet:
    """
    Separate the six level-1 complex subbands into twelve real matrices.

    Keys are ordered (0, real), (0, imaginary), (1, real), ... (5, imaginary).
    With part_mode 'real-abs' the second matrix of each band is the complex
    magnitude instead of the imaginary part.
    """
    if pyramid.depth < 1:
        raise ShapeMismatch("pyramid has no levels")
    if part_mode not in ("real-imag", "real-abs"):
        raise ValueError(f"unknown band part mode: {part_mode}")

    level1 = pyramid.levels[0]
    bands = {}
    for k in range(6):
        subband = level1[..., k]
        bands[(k, BandPart.REAL)] = subband.real.copy()
        if part_mode == "real-imag":
            bands[(k, BandPart.IMAGINARY)] = subband.imag.copy()
        else:
            bands[(k, BandPart.ABS)] = np.abs(subband)
    return BandSet(bands=bands, source_level=1)
