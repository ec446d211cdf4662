import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError
from skimage.util import view_as_windows

from .errors import DecodeError, EmptyPatchSet, ImageIOError, ShapeMismatch

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class PatchSet:
    """Flattened square patches cut from a raster, with their top-left origins.

    Origins are expressed in source raster coordinates, so they are negative
    for patches that reach into reflective padding.
    """
    patch_size: int
    stride: int
    patches: np.ndarray
    origins: np.ndarray

    def __len__(self) -> int:
        return self.patches.shape[0]


def load_image(path: PathLike) -> np.ndarray:
    """
    Load a PNG or PGM file as a float raster.

    Args:
        path: File to decode

    Returns:
        A (H, W) array for grayscale files, (H, W, 3) for color ones, values on
        the native 0-255 scale (16-bit files keep their native range)
    """
    path = Path(path)
    if not path.is_file() or not os.access(path, os.R_OK):
        raise ImageIOError("image file missing or unreadable", str(path))

    try:
        with Image.open(path) as image:
            image.load()
            raster = _image_to_array(image)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise DecodeError(f"cannot decode image: {e}", str(path)) from e

    logger.debug(f"Loaded {path} with shape {raster.shape}")
    return raster


def _image_to_array(image: Image.Image) -> np.ndarray:
    if image.mode in ("L", "I", "I;16", "I;16B", "F"):
        return np.asarray(image, dtype=np.float64)
    if image.mode in ("1", "LA"):
        return np.asarray(image.convert("L"), dtype=np.float64)
    return np.asarray(image.convert("RGB"), dtype=np.float64)


def save_image(path: PathLike, raster: np.ndarray) -> None:
    """Write a gray or RGB raster as 8-bit PNG, or as binary PGM for a .pgm suffix."""
    data = np.clip(np.rint(np.asarray(raster, dtype=np.float64)), 0, 255).astype(np.uint8)
    try:
        Image.fromarray(data).save(path)
    except OSError as e:
        raise ImageIOError(f"cannot write image: {e}", str(path)) from e


def save_mask(path: PathLike, mask: np.ndarray) -> None:
    """Write a boolean mask as 0/255 8-bit PNG."""
    save_image(path, np.where(np.asarray(mask, dtype=bool), 255, 0))


def load_mask(path: PathLike) -> np.ndarray:
    raster = load_image(path)
    if raster.ndim == 3:
        raster = to_grayscale(raster)
    return raster > 127


def to_grayscale(rgb: Union[np.ndarray, Sequence[np.ndarray]]) -> np.ndarray:
    """
    Convert a three-channel raster to luma.

    Args:
        rgb: A (H, W, 3) array, or a sequence of three equally sized channels

    Returns:
        The (H, W) array 0.299 R + 0.587 G + 0.114 B
    """
    if isinstance(rgb, np.ndarray) and rgb.ndim == 3:
        if rgb.shape[2] != 3:
            raise ShapeMismatch(f"expected 3 channels, got {rgb.shape[2]}")
        channels = [rgb[..., c] for c in range(3)]
    else:
        channels = [np.asarray(c) for c in rgb]
        if len(channels) != 3:
            raise ShapeMismatch(f"expected 3 channels, got {len(channels)}")
        if len({c.shape for c in channels}) != 1:
            raise ShapeMismatch(f"channel dimensions differ: {[c.shape for c in channels]}")

    r, g, b = (np.asarray(c, dtype=np.float64) for c in channels)
    return LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b


def extract_patches(
    img: np.ndarray,
    patch_size: int,
    stride: int = 1,
    region: Optional[np.ndarray] = None,
    padding: int = 0
) -> PatchSet:
    """
    Cut every square patch whose footprint lies inside the (optionally padded) raster.

    Args:
        img: 2-D raster
        patch_size: Patch side length
        stride: Step between neighbouring origins
        region: Optional mask; a patch is kept only if all its pixels are inside
        padding: Reflective padding added around the raster (and the region)

    Returns:
        PatchSet with one flattened row per patch, in row-major origin order
    """
    data = np.asarray(img, dtype=np.float64)
    if data.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D raster, got shape {data.shape}")
    if patch_size < 2 or stride < 1 or padding < 0:
        raise ValueError(f"invalid patch geometry: size={patch_size}, stride={stride}, padding={padding}")

    mask = None
    if region is not None:
        mask = np.asarray(region, dtype=bool)
        if mask.shape != data.shape:
            raise ShapeMismatch(f"region shape {mask.shape} does not match raster {data.shape}")

    if padding:
        data = np.pad(data, padding, mode="reflect")
        if mask is not None:
            mask = np.pad(mask, padding, mode="reflect")

    if min(data.shape) < patch_size:
        raise EmptyPatchSet(f"raster {data.shape} smaller than patch size {patch_size}")

    windows = view_as_windows(data, (patch_size, patch_size), step=stride)
    if mask is None:
        keep = np.ones(windows.shape[:2], dtype=bool)
    else:
        keep = view_as_windows(mask, (patch_size, patch_size), step=stride).all(axis=(2, 3))

    if not keep.any():
        raise EmptyPatchSet("no patch fits inside the region")

    rows, cols = np.nonzero(keep)
    origins = np.stack([rows * stride - padding, cols * stride - padding], axis=1)
    patches = windows[rows, cols].reshape(len(rows), patch_size * patch_size)
    return PatchSet(patch_size=patch_size, stride=stride, patches=patches, origins=origins)


def downsample_mask(mask: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    """2x decimation of a mask by 2x2 majority vote, ties counted as true."""
    mask = np.asarray(mask, dtype=bool)
    h, w = shape
    extra_rows = 2 * h - mask.shape[0]
    extra_cols = 2 * w - mask.shape[1]
    if extra_rows not in (0, 1) or extra_cols not in (0, 1):
        raise ShapeMismatch(f"cannot decimate mask {mask.shape} to {shape}")

    padded = np.pad(mask, ((0, extra_rows), (0, extra_cols)), mode="edge")
    votes = padded.reshape(h, 2, w, 2).sum(axis=(1, 3))
    return votes >= 2


def upsample_mask(mask: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    """2x nearest-neighbour enlargement cropped to the target shape."""
    enlarged = np.repeat(np.repeat(np.asarray(mask), 2, axis=0), 2, axis=1)
    return enlarged[:shape[0], :shape[1]]
