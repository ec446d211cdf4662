import numpy as np
import pytest
from PIL import Image

from utils.errors import DecodeError, EmptyPatchSet, ImageIOError, ShapeMismatch
from utils.imagecore import (
    downsample_mask,
    extract_patches,
    load_image,
    load_mask,
    save_image,
    save_mask,
    to_grayscale,
    upsample_mask,
)


def test_load_gray_png(tmp_path):
    data = np.arange(64, dtype=np.uint8).reshape(8, 8)
    Image.fromarray(data).save(tmp_path / "gray.png")
    raster = load_image(tmp_path / "gray.png")
    assert raster.shape == (8, 8)
    assert raster.dtype == np.float64
    assert np.array_equal(raster, data)


def test_load_rgb_png(tmp_path):
    data = np.zeros((5, 7, 3), dtype=np.uint8)
    data[..., 1] = 200
    Image.fromarray(data).save(tmp_path / "rgb.png")
    raster = load_image(tmp_path / "rgb.png")
    assert raster.shape == (5, 7, 3)
    assert np.all(raster[..., 1] == 200)


def test_pgm_written_and_read_back(tmp_path):
    data = np.array([[0, 10], [250, 255]], dtype=np.float64)
    save_image(tmp_path / "small.pgm", data)
    assert (tmp_path / "small.pgm").read_bytes().startswith(b"P5")
    assert np.array_equal(load_image(tmp_path / "small.pgm"), data)


def test_missing_file_raises_io_error(tmp_path):
    with pytest.raises(ImageIOError) as info:
        load_image(tmp_path / "nope.png")
    assert "nope.png" in str(info.value)


def test_garbage_file_raises_decode_error(tmp_path):
    path = tmp_path / "broken.png"
    path.write_bytes(b"definitely not a png")
    with pytest.raises(DecodeError):
        load_image(path)


def test_mask_round_trip(tmp_path):
    mask = np.zeros((6, 6), dtype=bool)
    mask[2:4, 1:5] = True
    save_mask(tmp_path / "mask.png", mask)
    stored = np.asarray(Image.open(tmp_path / "mask.png"))
    assert set(np.unique(stored)) == {0, 255}
    assert np.array_equal(load_mask(tmp_path / "mask.png"), mask)


def test_grayscale_weights():
    rgb = np.zeros((2, 2, 3))
    rgb[..., 0] = 100
    rgb[..., 1] = 50
    rgb[..., 2] = 200
    expected = 0.299 * 100 + 0.587 * 50 + 0.114 * 200
    assert np.allclose(to_grayscale(rgb), expected)


def test_grayscale_of_equal_channels_is_identity(rng):
    channel = rng.uniform(0, 255, (9, 4))
    assert np.allclose(to_grayscale(np.stack([channel] * 3, axis=-1)), channel)


def test_grayscale_channel_mismatch():
    with pytest.raises(ShapeMismatch):
        to_grayscale([np.zeros((4, 4)), np.zeros((4, 4)), np.zeros((4, 5))])


def test_exact_tiling():
    patches = extract_patches(np.zeros((8, 8)), 8, stride=8)
    assert len(patches) == 1
    assert len(extract_patches(np.zeros((8, 8)), 8, stride=1)) == 1


def test_sixteen_by_sixteen_stride_four():
    patches = extract_patches(np.zeros((16, 16)), 8, stride=4)
    assert len(patches) == 9
    origins = {tuple(o) for o in patches.origins}
    assert origins == {(r, c) for r in (0, 4, 8) for c in (0, 4, 8)}


def test_tiling_count_matches_area():
    patches = extract_patches(np.zeros((32, 48)), 8, stride=8)
    assert len(patches) == (32 // 8) * (48 // 8)


def test_patch_contents_follow_origins(rng):
    img = rng.normal(size=(20, 20))
    patches = extract_patches(img, 4, stride=3)
    for patch, (r, c) in zip(patches.patches, patches.origins):
        assert np.array_equal(patch, img[r:r + 4, c:c + 4].ravel())


def test_region_requires_every_pixel_inside():
    region = np.zeros((16, 16), dtype=bool)
    region[:8, :9] = True
    patches = extract_patches(np.zeros((16, 16)), 8, stride=1, region=region)
    assert {tuple(o) for o in patches.origins} == {(0, 0), (0, 1)}


def test_padding_produces_negative_origins():
    patches = extract_patches(np.zeros((8, 8)), 8, stride=1, padding=3)
    assert len(patches) == 49
    assert patches.origins.min() == -3


def test_region_too_small_raises():
    region = np.zeros((16, 16), dtype=bool)
    region[:3, :3] = True
    with pytest.raises(EmptyPatchSet):
        extract_patches(np.zeros((16, 16)), 8, region=region)


def test_mask_resampling():
    mask = np.zeros((9, 10), dtype=bool)
    mask[2:6, 4:8] = True
    small = downsample_mask(mask, (5, 5))
    assert small.shape == (5, 5)
    assert small[1:3, 2:4].all()
    assert upsample_mask(small, (9, 10)).shape == (9, 10)
    assert np.array_equal(upsample_mask(small, (9, 10))[2:6, 4:8], mask[2:6, 4:8])
