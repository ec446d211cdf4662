import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
from scipy import ndimage

from .dtcwt import BandPart
from .errors import EmptyPatchSet, ShapeMismatch
from .imagecore import extract_patches

logger = logging.getLogger(__name__)

FILTER_METHODS = ("median", "smfr", "wiener", "mmwf")


@dataclass(frozen=True, eq=False)
class EnhancedBand:
    data: np.ndarray
    band_index: int
    part: BandPart
    method: str
    segment_id: int

    def __post_init__(self):
        if self.method not in FILTER_METHODS:
            raise ValueError(f"unknown enhancement method: {self.method}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("enhanced band contains NaN or Inf")


def normalize(band: np.ndarray, linthresh: float = 1.0) -> np.ndarray:
    """Symmetric-log compression followed by a z-score; constant input maps to zeros."""
    if linthresh <= 0:
        raise ValueError(f"linthresh must be > 0, got {linthresh}")
    x = np.asarray(band, dtype=np.float64)
    y = np.sign(x) * np.log1p(np.abs(x) / linthresh)
    std = y.std()
    if std == 0:
        return np.zeros_like(y)
    return (y - y.mean()) / std


def band_relevance(
    band: np.ndarray,
    segment: np.ndarray,
    patch_size: int = 32,
    tolerance: float = 0.5,
    stride: Optional[int] = None
) -> bool:
    """
    Decide whether a band carries enough variation inside a segment to analyse.

    Patch means are taken over unpadded patches lying entirely inside the
    segment; the band is relevant when their coefficient of variation exceeds
    the tolerance. Fewer than two patches means the band is skipped.
    """
    band = np.asarray(band, dtype=np.float64)
    segment = np.asarray(segment, dtype=bool)
    if segment.shape != band.shape:
        raise ShapeMismatch(f"segment shape {segment.shape} does not match band {band.shape}")

    try:
        patches = extract_patches(band, patch_size, stride=stride or patch_size, region=segment)
    except EmptyPatchSet:
        return False
    if len(patches) < 2:
        return False

    means = patches.patches.mean(axis=1)
    cv = means.std() / (abs(means.mean()) + 1e-9)
    return bool(cv > tolerance)


def _check_window(k: int) -> None:
    if k < 3 or k % 2 == 0:
        raise ValueError(f"window size must be odd and >= 3, got {k}")


def median_filter(m: np.ndarray, k: int = 3) -> np.ndarray:
    """k x k median with reflective borders."""
    _check_window(k)
    return ndimage.median_filter(np.asarray(m, dtype=np.float64), size=k, mode="reflect")


def smfr(m: np.ndarray, k: int = 3) -> np.ndarray:
    """Small median filter residue: first residue minus its own median-filtered version."""
    m = np.asarray(m, dtype=np.float64)
    first = m - median_filter(m, k)
    second = median_filter(first, k)
    return first - second


def wiener_filter(m: np.ndarray, k: int = 3, noise_var: Optional[float] = None) -> np.ndarray:
    """
    Local adaptive Wiener filter.

    Args:
        m: Input matrix
        k: Odd window size for the local mean and variance
        noise_var: Noise variance; defaults to the mean of all local variances

    Returns:
        mu + gain * (m - mu), with gain (var - noise_var) / var clamped to [0, 1]
    """
    _check_window(k)
    m = np.asarray(m, dtype=np.float64)
    mean = ndimage.uniform_filter(m, size=k, mode="reflect")
    variance = np.clip(ndimage.uniform_filter(m * m, size=k, mode="reflect") - mean * mean, 0.0, None)
    if noise_var is None:
        noise_var = float(variance.mean())

    gain = np.zeros_like(m)
    active = variance > 0
    gain[active] = np.clip((variance[active] - noise_var) / variance[active], 0.0, 1.0)
    return mean + gain * (m - mean)


def mmwf(m: np.ndarray, k: int = 3) -> np.ndarray:
    """Median-modified Wiener filter: Wiener smoothing of the median-filtered matrix."""
    return wiener_filter(median_filter(m, k), k)


FILTERS: Dict[str, Callable[..., np.ndarray]] = {
    "median": median_filter,
    "smfr": smfr,
    "wiener": wiener_filter,
    "mmwf": mmwf,
}


def enhance(m: np.ndarray, method: str, k: int = 3, noise_var: Optional[float] = None) -> np.ndarray:
    """Apply one of the four enhancement filters by name."""
    if method not in FILTERS:
        raise ValueError(f"unknown enhancement method: {method}")
    if method == "wiener":
        return wiener_filter(m, k, noise_var)
    return FILTERS[method](m, k)
