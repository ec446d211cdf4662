import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage
from skimage import graph
from skimage.segmentation import slic

from .errors import DecodeError, ImageIOError, ShapeMismatch, UnknownLabel
from .imagecore import PathLike, downsample_mask

logger = logging.getLogger(__name__)

_LABEL_MODES = ("L", "P", "I", "I;16", "I;16B", "I;16L")


@dataclass(frozen=True, eq=False)
class SegmentMap:
    """Flat partition of an image into contiguously numbered segments."""
    labels: np.ndarray
    segment_ids: Tuple[int, ...]
    areas: Dict[int, int]

    @classmethod
    def from_labels(cls, raw: np.ndarray) -> "SegmentMap":
        raw = np.asarray(raw)
        values, inverse, counts = np.unique(raw, return_inverse=True, return_counts=True)
        labels = inverse.reshape(raw.shape).astype(np.int32)
        return cls(
            labels=labels,
            segment_ids=tuple(range(len(values))),
            areas={index: int(count) for index, count in enumerate(counts)},
        )

    @property
    def count(self) -> int:
        return len(self.segment_ids)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.labels.shape

    def largest(self) -> int:
        return max(self.segment_ids, key=lambda label: (self.areas[label], -label))


def _merge_orphans(labels: np.ndarray, max_passes: int = 10) -> np.ndarray:
    """Hand disconnected fragments of a label to their largest neighbouring segment."""
    labels = labels.copy()
    for _ in range(max_passes):
        changed = False
        areas = np.bincount(labels.ravel())
        for label in np.unique(labels):
            components, count = ndimage.label(labels == label)
            if count <= 1:
                continue
            sizes = np.bincount(components.ravel())[1:]
            keep = int(np.argmax(sizes)) + 1
            for component in range(1, count + 1):
                if component == keep:
                    continue
                fragment = components == component
                rim = ndimage.binary_dilation(fragment) & ~fragment
                neighbours = np.unique(labels[rim])
                neighbours = neighbours[neighbours != label]
                if neighbours.size == 0:
                    continue
                target = max(neighbours, key=lambda n: (areas[n], -n))
                labels[fragment] = target
                changed = True
        if not changed:
            break
    return labels


def slic_superpixels(
    img: np.ndarray,
    target_count: int = 32,
    compactness: float = 10.0,
    cell_size: Optional[int] = None
) -> SegmentMap:
    """
    Grid-seeded SLIC superpixels with a connectivity clean-up pass.

    Args:
        img: Gray (H, W) or RGB (H, W, 3) raster on the 0-255 scale
        target_count: Approximate number of superpixels
        compactness: Balance between colour proximity and spatial proximity
        cell_size: If given, overrides target_count with one cell per cell_size**2 pixels

    Returns:
        SegmentMap of connected superpixels
    """
    raster = np.asarray(img, dtype=np.float64)
    if target_count < 1:
        raise ValueError(f"target_count must be >= 1, got {target_count}")
    if compactness <= 0:
        raise ValueError(f"compactness must be > 0, got {compactness}")

    if cell_size:
        target_count = max(1, math.ceil(raster.shape[0] * raster.shape[1] / cell_size ** 2))

    if raster.ndim == 3:
        # colour input goes through CIELAB, which expects [0, 1] floats
        labels = slic(raster / 255.0, n_segments=target_count, compactness=compactness,
                      start_label=0, enforce_connectivity=True, channel_axis=-1)
    else:
        labels = slic(raster, n_segments=target_count, compactness=compactness,
                      start_label=0, enforce_connectivity=True, channel_axis=None)

    segments = SegmentMap.from_labels(_merge_orphans(labels))
    logger.debug(f"SLIC produced {segments.count} superpixels (target {target_count})")
    return segments


def _merge_mean_color(rag: graph.RAG, src: int, dst: int) -> None:
    rag.nodes[dst]["total color"] += rag.nodes[src]["total color"]
    rag.nodes[dst]["pixel count"] += rag.nodes[src]["pixel count"]
    rag.nodes[dst]["mean color"] = rag.nodes[dst]["total color"] / rag.nodes[dst]["pixel count"]


def _mean_color_weight(rag: graph.RAG, src: int, dst: int, n: int) -> Dict[str, float]:
    diff = rag.nodes[dst]["mean color"] - rag.nodes[n]["mean color"]
    return {"weight": float(np.linalg.norm(diff))}


def merge_regions(sp: SegmentMap, img: np.ndarray, merge_threshold: float = 25.0) -> SegmentMap:
    """
    Greedily merge adjacent segments whose mean colours are closer than merge_threshold.

    Distances are Euclidean in the raster's own channel space; the closest
    qualifying pair is merged first and edge weights are refreshed after each merge.
    """
    raster = np.asarray(img, dtype=np.float64)
    if raster.shape[:2] != sp.shape:
        raise ShapeMismatch(f"segment map {sp.shape} does not match image {raster.shape[:2]}")
    if merge_threshold <= 0 or sp.count == 1:
        return SegmentMap.from_labels(sp.labels)

    channels = raster.reshape(sp.shape[0], sp.shape[1], -1)
    flat_labels = sp.labels.ravel()
    counts = np.bincount(flat_labels, minlength=sp.count)
    totals = np.stack([
        np.bincount(flat_labels, weights=channels[..., c].ravel(), minlength=sp.count)
        for c in range(channels.shape[2])
    ], axis=1)

    rag = graph.RAG(sp.labels, connectivity=1)
    for label in sp.segment_ids:
        if label not in rag:
            rag.add_node(label)
        rag.nodes[label].update({
            "labels": [label],
            "pixel count": int(counts[label]),
            "total color": totals[label].copy(),
            "mean color": totals[label] / counts[label],
        })
    for a, b, data in rag.edges(data=True):
        data["weight"] = float(np.linalg.norm(rag.nodes[a]["mean color"] - rag.nodes[b]["mean color"]))

    merged = graph.merge_hierarchical(
        sp.labels, rag, thresh=merge_threshold, rag_copy=False, in_place_merge=True,
        merge_func=_merge_mean_color, weight_func=_mean_color_weight,
    )
    result = SegmentMap.from_labels(merged)
    logger.debug(f"Merged {sp.count} superpixels into {result.count} segments")
    return result


def load_segment_map(path: PathLike, shape: Tuple[int, int]) -> SegmentMap:
    """Read an externally produced single-channel label PNG."""
    path = Path(path)
    if not path.is_file():
        raise ImageIOError("segment map file missing", str(path))
    try:
        with Image.open(path) as image:
            image.load()
            if image.mode not in _LABEL_MODES:
                raise DecodeError(f"segment map must be single-channel, got mode {image.mode}", str(path))
            raw = np.asarray(image)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise DecodeError(f"cannot decode segment map: {e}", str(path)) from e

    if raw.shape != tuple(shape):
        raise ShapeMismatch(f"segment map is {raw.shape}, image is {tuple(shape)}", str(path))
    return SegmentMap.from_labels(raw)


def save_segment_map(path: PathLike, segments: SegmentMap) -> None:
    """Write labels as an 8-bit PNG, or 16-bit when there are more than 256 segments."""
    dtype = np.uint8 if segments.count <= 256 else np.uint16
    try:
        Image.fromarray(segments.labels.astype(dtype)).save(path)
    except OSError as e:
        raise ImageIOError(f"cannot write segment map: {e}", str(path)) from e


def segment_mask(
    segments: SegmentMap,
    label: int,
    band_shape: Optional[Tuple[int, int]] = None
) -> np.ndarray:
    """Boolean mask of one segment, optionally decimated to a level-1 band's resolution."""
    if label not in segments.areas:
        raise UnknownLabel(f"segment {label} not in map with ids 0..{segments.count - 1}")
    mask = segments.labels == label
    if band_shape is not None and tuple(band_shape) != mask.shape:
        mask = downsample_mask(mask, band_shape)
    return mask


def render_preview(segments: SegmentMap, seed: int = 0) -> np.ndarray:
    """Random colour per segment, as an (H, W, 3) uint8 raster."""
    rng = np.random.default_rng(seed)
    palette = rng.integers(0, 256, size=(segments.count, 3), dtype=np.uint8)
    return palette[segments.labels]
