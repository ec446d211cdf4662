import struct

import numpy as np
import pytest

from utils.bandio import HEADER, dump_bands, read_band, render_preview, write_band
from utils.dtcwt import BandPart
from utils.errors import DecodeError, ImageIOError, ShapeMismatch


def test_header_layout(tmp_path):
    data = np.arange(6, dtype=np.float64).reshape(2, 3)
    write_band(tmp_path / "b.wbnd", data, 3, BandPart.IMAGINARY)
    raw = (tmp_path / "b.wbnd").read_bytes()
    assert len(raw) == 16 + 4 * 6
    assert raw[:4] == b"WBND"
    assert struct.unpack("<III", raw[4:16]) == (3, 2, 7)
    assert np.array_equal(np.frombuffer(raw[16:], dtype="<f4"), np.arange(6, dtype=np.float32))


def test_read_back(tmp_path, rng):
    data = rng.normal(size=(5, 9))
    write_band(tmp_path / "b.wbnd", data, 4, BandPart.REAL)
    band = read_band(tmp_path / "b.wbnd")
    assert (band.band_index, band.part) == (4, BandPart.REAL)
    assert np.allclose(band.data, data.astype(np.float32))


def test_odd_slot_as_magnitude(tmp_path):
    write_band(tmp_path / "b.wbnd", np.ones((2, 2)), 1, BandPart.ABS)
    assert read_band(tmp_path / "b.wbnd").part == BandPart.IMAGINARY
    assert read_band(tmp_path / "b.wbnd", abs_part=True).part == BandPart.ABS


def test_broken_files(tmp_path):
    with pytest.raises(ImageIOError):
        read_band(tmp_path / "missing.wbnd")

    (tmp_path / "short.wbnd").write_bytes(b"WBND")
    with pytest.raises(DecodeError):
        read_band(tmp_path / "short.wbnd")

    (tmp_path / "magic.wbnd").write_bytes(HEADER.pack(b"XXXX", 1, 1, 0) + b"\0" * 4)
    with pytest.raises(DecodeError):
        read_band(tmp_path / "magic.wbnd")

    write_band(tmp_path / "cut.wbnd", np.ones((4, 4)), 0, BandPart.REAL)
    (tmp_path / "cut.wbnd").write_bytes((tmp_path / "cut.wbnd").read_bytes()[:-4])
    with pytest.raises(DecodeError):
        read_band(tmp_path / "cut.wbnd")

    with pytest.raises(ShapeMismatch):
        write_band(tmp_path / "flat.wbnd", np.ones(4), 0, BandPart.REAL)


def test_previews(rng):
    data = rng.normal(size=(8, 8))
    gray = render_preview(data)
    assert gray.shape == (8, 8)
    assert gray.min() == 0 and gray.max() == 255
    assert not render_preview(np.full((3, 3), 2.0)).any()

    coloured = render_preview(data, spectral=True)
    assert coloured.shape == (8, 8, 3)
    assert coloured.min() >= 0 and coloured.max() <= 255


def test_dump_bands(tmp_path, noise_image):
    written = dump_bands(noise_image, tmp_path / "bands")
    assert len(written) == 12
    assert len(list((tmp_path / "bands").glob("*.wbnd"))) == 12
    assert len(list((tmp_path / "bands").glob("*.png"))) == 12
    first = read_band(written[0])
    assert (first.band_index, first.part) == (0, BandPart.REAL)
    assert first.data.shape == (32, 32)
