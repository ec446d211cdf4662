import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import cv2
import numpy as np
from scipy import ndimage

from config import PipelineConfig

from .detector import detect
from .errors import EmptyDataset, ForensicsError, InvalidRegion, RegionTooLarge, ShapeMismatch
from .imagecore import PathLike, load_image, load_mask, save_image, save_mask, to_grayscale

logger = logging.getLogger(__name__)

SYNTH_MODES = ("denoise", "blur", "telea-fill")
BORDER_MARGIN = 8


@dataclass(frozen=True)
class MetricResult:
    accuracy: float
    recall: Optional[float]  # None when the truth mask is empty
    iou: float
    tp: int
    fp: int
    tn: int
    fn: int


@dataclass(frozen=True)
class ImageScore:
    name: str
    accuracy: float
    recall: Optional[float]
    iou: float


@dataclass
class MetricsReport:
    per_image: List[ImageScore] = field(default_factory=list)
    aggregate: Dict[str, Optional[float]] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    failed: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "per_image": [
                {"name": s.name, "accuracy": s.accuracy, "recall": s.recall, "iou": s.iou}
                for s in self.per_image
            ],
            "aggregate": dict(self.aggregate),
            "counts": dict(self.counts),
            "failed": list(self.failed),
        }

    def format_table(self) -> str:
        """Aligned plain-text table with Accuracy, Recall and IoU columns."""
        def cell(value):
            return "n/a" if value is None else f"{value:.4f}"

        width = max([len("Image"), len("Mean")] + [len(s.name) for s in self.per_image])
        lines = [f"{'Image':<{width}}  {'Accuracy':>8}  {'Recall':>8}  {'IoU':>8}"]
        lines.append("-" * len(lines[0]))
        for s in self.per_image:
            lines.append(f"{s.name:<{width}}  {cell(s.accuracy):>8}  {cell(s.recall):>8}  {cell(s.iou):>8}")
        lines.append("-" * len(lines[0]))
        lines.append(
            f"{'Mean':<{width}}  {cell(self.aggregate.get('accuracy')):>8}  "
            f"{cell(self.aggregate.get('recall')):>8}  {cell(self.aggregate.get('iou')):>8}"
        )
        if self.failed:
            lines.append(f"Failed: {', '.join(self.failed)}")
        return "\n".join(lines)


def pixel_metrics(pred: np.ndarray, truth: np.ndarray) -> MetricResult:
    """
    Pixel-level accuracy, recall and IoU of a predicted mask.

    Recall is None when the truth mask is empty; IoU is 1.0 when both masks are empty.
    """
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise ShapeMismatch(f"prediction {pred.shape} and truth {truth.shape} differ")

    tp = int(np.count_nonzero(pred & truth))
    fp = int(np.count_nonzero(pred & ~truth))
    fn = int(np.count_nonzero(~pred & truth))
    tn = int(pred.size - tp - fp - fn)

    accuracy = (tp + tn) / pred.size if pred.size else 1.0
    recall = tp / (tp + fn) if tp + fn else None
    union = tp + fp + fn
    iou = tp / union if union else 1.0
    return MetricResult(accuracy, recall, iou, tp, fp, tn, fn)


def _mean(values: List[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def _matched_pairs(root: Path) -> List[Tuple[str, Path, Path]]:
    inpainted = {p.name: p for p in sorted((root / "inpainted").glob("*.png"))}
    masks = {p.name: p for p in sorted((root / "mask").glob("*.png"))}
    return [(name, inpainted[name], masks[name]) for name in sorted(inpainted.keys() & masks.keys())]


def evaluate_dataset(
    root: PathLike,
    config: Optional[PipelineConfig] = None,
    jobs: Optional[int] = None
) -> MetricsReport:
    """
    Run the detector over root/inpainted/*.png and score it against root/mask/*.png.

    Args:
        root: Dataset directory
        config: Pipeline settings passed to the detector
        jobs: Images evaluated concurrently

    Returns:
        MetricsReport in filename order; undecodable images are listed under failed
    """
    root = Path(root)
    config = config or PipelineConfig()
    pairs = _matched_pairs(root)
    if not pairs:
        raise EmptyDataset("no matching inpainted/ and mask/ PNG pairs", str(root))
    jobs = jobs or os.cpu_count() or 1
    logger.info(f"Evaluating {len(pairs)} image(s) from {root}")

    def score(pair):
        name, image_path, mask_path = pair
        try:
            image = load_image(image_path)
            truth = load_mask(mask_path)
            # the detector runs single-threaded inside each image job
            result = detect(image, config, jobs=1)
            metrics = pixel_metrics(result.mask, truth)
        except ForensicsError as e:
            logger.warning(f"Skipping {name}: {e}")
            return name, None
        logger.info(f"{name}: accuracy={metrics.accuracy:.4f} iou={metrics.iou:.4f}")
        return name, metrics

    if jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            outcomes = list(executor.map(score, pairs))
    else:
        outcomes = [score(pair) for pair in pairs]

    report = MetricsReport(counts={"tp": 0, "fp": 0, "tn": 0, "fn": 0})
    for name, metrics in outcomes:
        if metrics is None:
            report.failed.append(name)
            continue
        report.per_image.append(ImageScore(name, metrics.accuracy, metrics.recall, metrics.iou))
        for key in report.counts:
            report.counts[key] += getattr(metrics, key)

    report.aggregate = {
        "accuracy": _mean([s.accuracy for s in report.per_image]),
        "recall": _mean([s.recall for s in report.per_image]),
        "iou": _mean([s.iou for s in report.per_image]),
    }
    return report


def synth_forgery(
    clean: np.ndarray,
    region: np.ndarray,
    mode: str = "denoise",
    noise_sigma: float = 10.0,
    seed: int = 0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fake an inpainting: noise the whole image, then paste a low-noise version into the region.

    Args:
        clean: Gray raster on the 0-255 scale (RGB is converted to luma)
        region: Mask of the area to forge, at least 8 pixels from every border
        mode: 'denoise' (5x5 Gaussian), 'blur' (9x9 box) or 'telea-fill'
        noise_sigma: Standard deviation of the added Gaussian noise
        seed: Noise generator seed

    Returns:
        (forged raster, truth mask); the truth mask is a copy of region
    """
    if mode not in SYNTH_MODES:
        raise ValueError(f"unknown synthesis mode: {mode}")
    raster = np.asarray(clean, dtype=np.float64)
    if raster.ndim == 3:
        raster = to_grayscale(raster)
    region = np.asarray(region, dtype=bool)
    if region.shape != raster.shape:
        raise ShapeMismatch(f"region {region.shape} does not match image {raster.shape}")
    if not region.any():
        raise InvalidRegion("region is empty")
    rows, cols = np.nonzero(region)
    height, width = region.shape
    if (rows.min() < BORDER_MARGIN or cols.min() < BORDER_MARGIN
            or rows.max() >= height - BORDER_MARGIN or cols.max() >= width - BORDER_MARGIN):
        raise InvalidRegion(f"region must stay {BORDER_MARGIN} pixels away from the border")
    if region.sum() > 0.5 * region.size:
        raise RegionTooLarge(f"region covers {region.mean():.0%} of the image")

    rng = np.random.default_rng(seed)
    noisy = raster + rng.normal(0.0, noise_sigma, raster.shape) if noise_sigma > 0 else raster.copy()

    if mode == "denoise":
        smooth = cv2.GaussianBlur(noisy, (5, 5), 0)
    elif mode == "blur":
        smooth = cv2.blur(noisy, (9, 9))
    else:
        source = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
        smooth = cv2.inpaint(source, region.astype(np.uint8) * 255, 3, cv2.INPAINT_TELEA).astype(np.float64)

    forged = noisy.copy()
    forged[region] = smooth[region]
    return np.clip(np.rint(forged), 0, 255), region.copy()


def make_disk(shape: Tuple[int, int], center: Tuple[float, float], radius: float) -> np.ndarray:
    rows, cols = np.ogrid[:shape[0], :shape[1]]
    return (rows - center[0]) ** 2 + (cols - center[1]) ** 2 <= radius ** 2


def make_clean_texture(shape: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Smooth low-contrast random texture in the 90-160 range, nearly free of fine detail."""
    field_ = ndimage.gaussian_filter(rng.random(shape), sigma=16)
    span = field_.max() - field_.min()
    if span == 0:
        return np.full(shape, 125.0)
    return 90.0 + 70.0 * (field_ - field_.min()) / span


def generate_suite(root: PathLike, count: int = 20, seed: int = 0, size: int = 256) -> List[str]:
    """
    Write a synthetic evaluation suite under root.

    Creates inpainted/, mask/ and original/ with count forgeries (modes cycled,
    sigma alternating 5 and 10, disk radii 24-56) and negative/ with count
    pure-noise controls. Returns the generated file names.
    """
    root = Path(root)
    for name in ("inpainted", "mask", "original", "negative"):
        (root / name).mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    names = []
    for i in range(count):
        name = f"synth_{i:03d}.png"
        clean = make_clean_texture((size, size), rng)
        radius = int(rng.integers(24, 57))
        margin = radius + BORDER_MARGIN + 1
        center = (int(rng.integers(margin, size - margin)), int(rng.integers(margin, size - margin)))
        region = make_disk((size, size), center, radius)
        mode = SYNTH_MODES[i % len(SYNTH_MODES)]
        sigma = (5.0, 10.0)[i % 2]

        forged, truth = synth_forgery(clean, region, mode, sigma, seed=seed * 1000 + i)
        save_image(root / "inpainted" / name, forged)
        save_mask(root / "mask" / name, truth)
        save_image(root / "original" / name, clean)

        control = 128.0 + rng.normal(0.0, sigma, (size, size))
        save_image(root / "negative" / name, control)
        names.append(name)
        logger.debug(f"Generated {name}: mode={mode} sigma={sigma} radius={radius}")

    logger.info(f"Wrote {count} synthetic forgeries and {count} negative controls to {root}")
    return names
