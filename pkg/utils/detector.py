"""Inpainting localisation: per-segment noise inconsistencies in level-1 DT-CWT bands."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import ndimage
from skimage.filters import threshold_otsu

from config import PipelineConfig

from .bandops import FILTER_METHODS, EnhancedBand, band_relevance, median_filter, mmwf, normalize, smfr, wiener_filter
from .cluster import cluster_segment
from .dtcwt import BandPart, forward, split_bands
from .errors import DegenerateReference, ImageTooSmall, InsufficientPatches, ShapeMismatch
from .imagecore import to_grayscale, upsample_mask
from .noise import NoiseEstimate, estimate_region_noise, noise_discrepancy
from .segmentation import SegmentMap, merge_regions, segment_mask, slic_superpixels

logger = logging.getLogger(__name__)

MIN_SIDE = 16


@dataclass(frozen=True)
class Contribution:
    segment_id: int
    band_index: int
    part: str
    filter: str
    selected_region_pixels: int


@dataclass(frozen=True)
class SkippedJob:
    segment_id: int
    band_index: int
    part: str
    reason: str


@dataclass(eq=False)
class DetectionResult:
    heatmap: np.ndarray
    mask: np.ndarray
    contributions: List[Contribution] = field(default_factory=list)
    skipped: List[SkippedJob] = field(default_factory=list)
    segment_count: int = 0

    def to_report(self) -> Dict:
        return {
            "image_shape": list(self.heatmap.shape),
            "segment_count": self.segment_count,
            "heat_max": float(self.heatmap.max()) if self.heatmap.size else 0.0,
            "mask_pixels": int(self.mask.sum()),
            "contributions": [asdict(c) for c in self.contributions],
            "skipped": [asdict(s) for s in self.skipped],
        }


@dataclass(eq=False)
class _BandContext:
    index: int
    part: BandPart
    band: np.ndarray
    normalized: np.ndarray
    shared: Dict[str, np.ndarray]
    whole: Optional[NoiseEstimate]


@dataclass(eq=False)
class _JobOutcome:
    segment_id: int
    contributions: List[Contribution] = field(default_factory=list)
    evidence: List[np.ndarray] = field(default_factory=list)
    skipped: Optional[SkippedJob] = None


def _pick_outlier(
    var_a: float,
    var_b: float,
    var_outside: Optional[float],
    var_whole: float,
    threshold: float
) -> Optional[str]:
    """
    Name the candidate ('a' or 'b') that deviates most from the whole band, if suspicious.

    The chosen variance must differ from the outside reference by more than the
    threshold; without an outside region the other candidate is the reference.
    """
    if var_whole <= 0:
        return None
    deviation_a = abs(var_a - var_whole) / var_whole
    deviation_b = abs(var_b - var_whole) / var_whole
    chosen, chosen_var, other_var = ("a", var_a, var_b) if deviation_a >= deviation_b else ("b", var_b, var_a)
    reference = var_outside if var_outside is not None else other_var
    try:
        discrepancy = noise_discrepancy(chosen_var, reference)
    except DegenerateReference:
        return None
    return chosen if discrepancy > threshold else None


def select_forged_region(
    band: np.ndarray,
    region_a: np.ndarray,
    region_b: np.ndarray,
    outside: np.ndarray,
    config: PipelineConfig,
    whole_estimate: Optional[NoiseEstimate] = None,
    outside_estimate: Optional[NoiseEstimate] = None
) -> Optional[np.ndarray]:
    """
    Pick the candidate region whose noise variance is the outlier, or None.

    Any region too small for noise estimation withholds the evidence. An empty
    outside region (segment covering the whole band) falls back to comparing
    the two candidates with each other.
    """
    region_a = np.asarray(region_a, dtype=bool)
    region_b = np.asarray(region_b, dtype=bool)
    outside = np.asarray(outside, dtype=bool)
    if (region_a & region_b).any() or (region_a & outside).any() or (region_b & outside).any():
        raise ValueError("candidate regions and outside region must be disjoint")

    def estimate(region):
        return estimate_region_noise(band, region, config.noise_patch, config.noise_padding, config.noise_mode)

    try:
        var_a = estimate(region_a).variance
        var_b = estimate(region_b).variance
        whole = whole_estimate or estimate(np.ones_like(region_a))
        var_outside = None
        if outside.any():
            var_outside = (outside_estimate or estimate(outside)).variance
    except InsufficientPatches:
        return None

    choice = _pick_outlier(var_a, var_b, var_outside, whole.variance, config.suspicion_threshold)
    if choice is None:
        return None
    return region_a if choice == "a" else region_b


def binarize(
    heatmap: np.ndarray,
    method: str = "otsu",
    fixed_threshold: float = 0.5,
    min_heat: float = 0.0
) -> np.ndarray:
    """
    Threshold a heat map into the detection mask.

    'fixed' keeps pixels strictly above fixed_threshold; 'otsu' thresholds the
    nonzero heat values with a 256-bin Otsu split. Pixels below min_heat are
    never kept.
    """
    heat = np.asarray(heatmap, dtype=np.float64)
    if method == "fixed":
        mask = heat > fixed_threshold
    elif method == "otsu":
        positive = heat[heat > 0]
        if positive.size == 0:
            return np.zeros(heat.shape, dtype=bool)
        if np.all(positive == positive[0]):
            mask = heat > 0
        else:
            mask = heat > threshold_otsu(positive, nbins=256)
    else:
        raise ValueError(f"unknown binarisation method: {method}")

    if min_heat > 0:
        mask &= heat >= min_heat
    return mask


def _drop_small_components(mask: np.ndarray, min_pixels: int) -> np.ndarray:
    components, count = ndimage.label(mask)
    if count == 0:
        return mask
    sizes = np.bincount(components.ravel())
    return mask & (sizes[components] >= min_pixels)


def _tidy_regions(low: np.ndarray, segment: np.ndarray, min_pixels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Hand specks smaller than min_pixels from each cluster to the other one."""
    if min_pixels <= 1:
        return low, segment & ~low
    low = _drop_small_components(low, min_pixels)
    high = _drop_small_components(segment & ~low, min_pixels)
    return segment & ~high, high


def _band_context(index: int, part: BandPart, band: np.ndarray, config: PipelineConfig) -> _BandContext:
    normalized = normalize(band, config.linthresh)
    k = config.filter_window
    shared = {
        "median": median_filter(normalized, k),
        "smfr": smfr(normalized, k),
        "mmwf": mmwf(normalized, k),
    }
    try:
        whole = estimate_region_noise(band, np.ones(band.shape, dtype=bool),
                                      config.noise_patch, config.noise_padding, config.noise_mode)
    except InsufficientPatches:
        whole = None
    return _BandContext(index, part, band, normalized, shared, whole)


def _cluster_feature(data: np.ndarray, config: PipelineConfig) -> np.ndarray:
    if config.cluster_feature == "value":
        return data
    if config.cluster_feature == "magnitude":
        return np.abs(data)
    # local energy: windowed mean magnitude
    return ndimage.uniform_filter(np.abs(data), size=config.energy_window, mode="reflect")


def _analyse(segment_id: int, mask: np.ndarray, context: _BandContext, config: PipelineConfig) -> _JobOutcome:
    """Run the four enhancement filters on one (segment, band-part) pair."""
    outcome = _JobOutcome(segment_id=segment_id)
    part = context.part.value

    if not band_relevance(context.band, mask, config.relevance_patch,
                          config.relevance_tolerance, config.relevance_stride):
        outcome.skipped = SkippedJob(segment_id, context.index, part, "irrelevant-band")
        return outcome

    outside = ~mask
    outside_estimate = None
    estimable = context.whole is not None
    if estimable and outside.any():
        try:
            outside_estimate = estimate_region_noise(context.band, outside, config.noise_patch,
                                                     config.noise_padding, config.noise_mode)
        except InsufficientPatches:
            estimable = False

    try:
        segment_noise = estimate_region_noise(context.normalized, mask, config.noise_patch,
                                              config.noise_padding, config.noise_mode).variance
    except InsufficientPatches:
        segment_noise = None

    for method in FILTER_METHODS:
        if method == "wiener":
            data = wiener_filter(context.normalized, config.filter_window, segment_noise)
        else:
            data = context.shared[method]
        data = _cluster_feature(data, config)

        selected = None
        enhanced = EnhancedBand(data, context.index, context.part, method, segment_id)
        split = cluster_segment(enhanced, mask, config.cluster_backend, config.cluster_seed, config.fuzzifier)
        if split is not None and estimable:
            low, high = _tidy_regions(split.low, mask, config.min_region_pixels)
            selected = select_forged_region(context.band, low, high, outside, config,
                                            whole_estimate=context.whole, outside_estimate=outside_estimate)

        pixels = int(selected.sum()) if selected is not None else 0
        outcome.contributions.append(Contribution(segment_id, context.index, part, method, pixels))
        outcome.evidence.append(selected)
    return outcome


def _run_jobs(function: Callable, items: Iterable, jobs: int) -> List:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(function, items))


def detect(
    img: np.ndarray,
    config: Optional[PipelineConfig] = None,
    segments: Optional[SegmentMap] = None,
    jobs: Optional[int] = None
) -> DetectionResult:
    """
    Localise inpainted regions in an image.

    Args:
        img: Gray (H, W) or RGB (H, W, 3) raster, at least 16x16
        config: Pipeline settings; defaults when omitted
        segments: Optional externally supplied segmentation
        jobs: Worker threads; defaults to the CPU count

    Returns:
        DetectionResult with heat map, mask and per-job provenance
    """
    config = config or PipelineConfig()
    jobs = jobs or os.cpu_count() or 1
    raster = np.asarray(img, dtype=np.float64)
    gray = to_grayscale(raster) if raster.ndim == 3 else raster
    if gray.ndim != 2:
        raise ShapeMismatch(f"expected a gray or RGB raster, got shape {raster.shape}")
    height, width = gray.shape
    if height < MIN_SIDE or width < MIN_SIDE:
        raise ImageTooSmall(f"image {width}x{height} is below the {MIN_SIDE}x{MIN_SIDE} minimum")

    if segments is None:
        superpixels = slic_superpixels(raster, config.slic_superpixels, config.compactness, config.slic_cell_size)
        segments = merge_regions(superpixels, raster, config.merge_threshold)
    elif segments.shape != gray.shape:
        raise ShapeMismatch(f"segment map {segments.shape} does not match image {gray.shape}")
    logger.info(f"Analysing {segments.count} segment(s) of a {width}x{height} image")

    bands = split_bands(forward(gray, 1), config.band_part)
    contexts = _run_jobs(lambda item: _band_context(item[0][0], item[0][1], item[1], config),
                         list(bands.items()), jobs)

    analysed = [segments.largest()] if config.largest_segment_only else list(segments.segment_ids)
    skipped: List[SkippedJob] = []
    job_items = []
    band_masks = {}
    for segment_id in segments.segment_ids:
        if segment_id not in analysed:
            skipped.extend(SkippedJob(segment_id, c.index, c.part.value, "not-largest-segment") for c in contexts)
            continue
        mask = segment_mask(segments, segment_id, bands.shape)
        if mask.sum() < config.min_segment_band_pixels:
            logger.debug(f"Segment {segment_id} too small at band resolution ({int(mask.sum())} px)")
            skipped.extend(SkippedJob(segment_id, c.index, c.part.value, "segment-too-small") for c in contexts)
            continue
        band_masks[segment_id] = mask
        job_items.extend((segment_id, context) for context in contexts)

    def run(item):
        segment_id, context = item
        try:
            return _analyse(segment_id, band_masks[segment_id], context, config)
        except Exception as e:
            logger.warning(f"Segment {segment_id} band {context.index} {context.part.value} failed: {e}")
            return _JobOutcome(segment_id, skipped=SkippedJob(segment_id, context.index,
                                                              context.part.value, f"error: {e}"))

    outcomes = _run_jobs(run, job_items, jobs)

    counts = np.zeros(gray.shape, dtype=np.int64)
    produced = {segment_id: 0 for segment_id in segments.segment_ids}
    contributions: List[Contribution] = []
    for outcome in outcomes:
        if outcome.skipped is not None:
            skipped.append(outcome.skipped)
            continue
        contributions.extend(outcome.contributions)
        produced[outcome.segment_id] += len(outcome.contributions)
        image_mask = segments.labels == outcome.segment_id
        for evidence in outcome.evidence:
            if evidence is not None:
                counts += upsample_mask(evidence, gray.shape) & image_mask

    heatmap = np.zeros(gray.shape, dtype=np.float64)
    every_image = len(contexts) * len(FILTER_METHODS) * segments.count
    for segment_id in segments.segment_ids:
        denominator = produced[segment_id] if config.heat_denominator == "produced" else every_image
        if denominator:
            pixels = segments.labels == segment_id
            heatmap[pixels] = counts[pixels] / denominator

    mask = binarize(heatmap, config.binarize, config.fixed_threshold, config.min_heat)
    logger.info(f"Detection produced {len(contributions)} evidence images, "
                f"{len(skipped)} skipped jobs, {int(mask.sum())} flagged pixels")
    return DetectionResult(heatmap=heatmap, mask=mask, contributions=contributions,
                           skipped=skipped, segment_count=segments.count)
