"""WBND band dumps: 16-byte header (magic, width, height, band code) followed by float32 rows."""
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List

import matplotlib
import numpy as np

from .dtcwt import BandPart, BandSet, forward, split_bands
from .errors import DecodeError, ImageIOError, ShapeMismatch
from .imagecore import PathLike, save_image, to_grayscale

logger = logging.getLogger(__name__)

MAGIC = b"WBND"
HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True, eq=False)
class BandFile:
    band_index: int
    part: BandPart
    data: np.ndarray


def _code(band_index: int, part: BandPart) -> int:
    # imaginary and magnitude share the second slot
    return band_index * 2 + (0 if BandPart(part) == BandPart.REAL else 1)


def write_band(path: PathLike, data: np.ndarray, band_index: int, part: BandPart) -> None:
    data = np.asarray(data)
    if data.ndim != 2:
        raise ShapeMismatch(f"band must be 2-D, got shape {data.shape}")
    height, width = data.shape
    try:
        with open(path, "wb") as f:
            f.write(HEADER.pack(MAGIC, width, height, _code(band_index, part)))
            f.write(np.ascontiguousarray(data, dtype="<f4").tobytes())
    except OSError as e:
        raise ImageIOError(f"cannot write band file: {e}", str(path)) from e


def read_band(path: PathLike, abs_part: bool = False) -> BandFile:
    """Decode a WBND file; abs_part reads the odd slot as magnitude instead of imaginary."""
    path = Path(path)
    if not path.is_file():
        raise ImageIOError("band file missing", str(path))
    raw = path.read_bytes()
    if len(raw) < HEADER.size:
        raise DecodeError("band file shorter than its header", str(path))

    magic, width, height, code = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DecodeError(f"bad magic {magic!r}", str(path))
    expected = HEADER.size + 4 * width * height
    if len(raw) != expected:
        raise DecodeError(f"expected {expected} bytes for {width}x{height}, got {len(raw)}", str(path))

    data = np.frombuffer(raw, dtype="<f4", offset=HEADER.size).reshape(height, width).astype(np.float64)
    second = BandPart.ABS if abs_part else BandPart.IMAGINARY
    part = BandPart.REAL if code % 2 == 0 else second
    return BandFile(band_index=code // 2, part=part, data=data)


def render_preview(data: np.ndarray, spectral: bool = False) -> np.ndarray:
    """
    Render a band for viewing.

    Plain previews stretch min..max onto 0..255 gray. Spectral previews z-normalise,
    clamp to (-1, 2) and apply the Spectral colour map, returning (H, W, 3).
    """
    data = np.asarray(data, dtype=np.float64)
    if spectral:
        std = data.std()
        z = (data - data.mean()) / std if std > 0 else np.zeros_like(data)
        scaled = (np.clip(z, -1.0, 2.0) + 1.0) / 3.0
        rgba = matplotlib.colormaps["Spectral"](scaled)
        return np.rint(rgba[..., :3] * 255.0)

    low, high = data.min(), data.max()
    if high == low:
        return np.zeros_like(data)
    return np.rint(255.0 * (data - low) / (high - low))


def dump_bands(
    image: np.ndarray,
    out_dir: PathLike,
    part_mode: str = "real-imag",
    spectral: bool = False
) -> List[Path]:
    """Write the twelve level-1 band-parts of an image as WBND files plus PNG previews."""
    raster = np.asarray(image, dtype=np.float64)
    gray = to_grayscale(raster) if raster.ndim == 3 else raster
    bands: BandSet = split_bands(forward(gray, 1), part_mode)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (index, part), band in bands.items():
        stem = f"band{index}_{part.value}"
        write_band(out_dir / f"{stem}.wbnd", band, index, part)
        save_image(out_dir / f"{stem}.png", render_preview(band, spectral))
        written.append(out_dir / f"{stem}.wbnd")
    logger.info(f"Dumped {len(written)} band files to {out_dir}")
    return written
