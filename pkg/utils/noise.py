import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Union

import numpy as np

from .dtcwt import BandSet
from .errors import DegenerateReference, EmptyPatchSet, InsufficientPatches, ShapeMismatch
from .imagecore import PatchSet, downsample_mask, extract_patches

logger = logging.getLogger(__name__)

NOISE_MODES = ("refined", "raw", "balanced")


@dataclass(frozen=True, eq=False)
class NoiseEstimate:
    variance: float
    eigenvalues: np.ndarray  # descending
    patch_size: int
    patch_count: int

    def to_dict(self, keep: int = 5) -> Dict:
        return {
            "variance": self.variance,
            "patch_size": self.patch_size,
            "patch_count": self.patch_count,
            "top_eigenvalues": self.eigenvalues[:keep].tolist(),
            "bottom_eigenvalues": self.eigenvalues[-keep:].tolist(),
        }


def _lower_quarter_median(ascending: np.ndarray) -> float:
    return float(np.median(ascending[:math.ceil(0.25 * len(ascending))]))


def _balanced_tail_mean(ascending: np.ndarray) -> float:
    """Drop the largest eigenvalues until as many of the rest lie above their mean as below it."""
    for size in range(len(ascending) - 1, 0, -1):
        tail = ascending[:size]
        tau = tail.mean()
        if np.count_nonzero(tail > tau) == np.count_nonzero(tail < tau):
            return float(tau)
    return float(ascending[0])


def estimate_noise(patches: PatchSet, mode: str = "refined") -> NoiseEstimate:
    """
    Estimate additive Gaussian noise variance from the patch covariance spectrum.

    Args:
        patches: Patch set with at least patch_size**2 patches
        mode: 'raw' uses the smallest eigenvalue; 'refined' the median of the
            smallest quarter of the eigenvalues; 'balanced' the mean of the longest
            low tail whose values lie evenly around that mean

    Returns:
        NoiseEstimate with the eigenvalues sorted descending
    """
    if mode not in NOISE_MODES:
        raise ValueError(f"unknown noise mode: {mode}")

    dimension = patches.patch_size ** 2
    count = len(patches)
    if count < dimension:
        raise InsufficientPatches(f"{count} patches available, {dimension} needed")

    covariance = np.cov(patches.patches, rowvar=False)
    # eigvalsh returns ascending values; tiny negatives are round-off
    ascending = np.clip(np.linalg.eigvalsh(covariance), 0.0, None)

    if mode == "raw":
        variance = float(ascending[0])
    elif mode == "balanced":
        variance = _balanced_tail_mean(ascending)
    else:
        variance = _lower_quarter_median(ascending)

    return NoiseEstimate(
        variance=variance,
        eigenvalues=ascending[::-1].copy(),
        patch_size=patches.patch_size,
        patch_count=count,
    )


def estimate_region_noise(
    band: np.ndarray,
    region: np.ndarray,
    patch_size: int = 8,
    padding: int = 3,
    mode: str = "refined"
) -> NoiseEstimate:
    """Noise estimate from all stride-1 patches lying entirely inside a region."""
    band = np.asarray(band)
    region = np.asarray(region, dtype=bool)
    if region.shape != band.shape:
        raise ShapeMismatch(f"region shape {region.shape} does not match band {band.shape}")
    if not region.any():
        raise InsufficientPatches("region is empty")

    try:
        patches = extract_patches(band, patch_size, stride=1, region=region, padding=padding)
    except EmptyPatchSet as e:
        raise InsufficientPatches(f"region too small for {patch_size}x{patch_size} patches") from e
    return estimate_noise(patches, mode=mode)


def noise_discrepancy(
    inside: Union[NoiseEstimate, float],
    outside: Union[NoiseEstimate, float]
) -> float:
    """Relative gap |inside - outside| / outside between two noise variances."""
    inside_var = inside.variance if isinstance(inside, NoiseEstimate) else float(inside)
    outside_var = outside.variance if isinstance(outside, NoiseEstimate) else float(outside)
    if outside_var <= 0:
        raise DegenerateReference("reference noise variance is zero")
    return abs(inside_var - outside_var) / outside_var


def band_noise_table(
    bands: BandSet,
    mask: np.ndarray,
    patch_size: int = 8,
    padding: int = 3,
    mode: str = "refined"
) -> List[Dict]:
    """
    Inside / outside / whole-band noise variance for every band-part.

    The image-resolution mask is decimated to band resolution first. Entries
    that cannot be estimated are reported as None.
    """
    band_mask = downsample_mask(mask, bands.shape)
    rows = []
    for (index, part), band in bands.items():
        row = {"band": index, "part": part.value}
        for name, region in (("inside", band_mask),
                             ("outside", ~band_mask),
                             ("whole", np.ones_like(band_mask))):
            try:
                row[name] = estimate_region_noise(band, region, patch_size, padding, mode).variance
            except InsufficientPatches:
                logger.debug(f"Band {index} {part.value}: no estimate for {name}")
                row[name] = None

        try:
            row["discrepancy"] = (
                noise_discrepancy(row["inside"], row["outside"])
                if row["inside"] is not None and row["outside"] is not None else None
            )
        except DegenerateReference:
            row["discrepancy"] = None
        rows.append(row)
    return rows
