import numpy as np
import pytest
from PIL import Image
from scipy import ndimage

from utils.errors import DecodeError, ImageIOError, ShapeMismatch, UnknownLabel
from utils.segmentation import (
    SegmentMap,
    load_segment_map,
    merge_regions,
    render_preview,
    save_segment_map,
    segment_mask,
    slic_superpixels,
)


def _thirds(height=60, width=90):
    img = np.zeros((height, width))
    img[:, width // 3:2 * width // 3] = 128
    img[:, 2 * width // 3:] = 255
    return img


def _grid_labels(height, width, rows, cols):
    r = np.arange(height)[:, None] * rows // height
    c = np.arange(width)[None, :] * cols // width
    return r * cols + c


def test_constant_image_gives_grid_cells():
    segments = slic_superpixels(np.full((64, 64), 90.0), target_count=4)
    assert segments.count == 4
    assert sum(segments.areas.values()) == 64 * 64


def test_cell_size_overrides_target():
    segments = slic_superpixels(np.full((64, 64), 90.0), target_count=100, cell_size=32)
    assert segments.count == 4


def test_labels_are_contiguous_and_connected(rng):
    img = rng.uniform(0, 255, (48, 48))
    segments = slic_superpixels(img, target_count=16)
    assert set(np.unique(segments.labels)) == set(segments.segment_ids)
    assert segments.segment_ids == tuple(range(segments.count))
    for label in segments.segment_ids:
        _, components = ndimage.label(segments.labels == label)
        assert components == 1


def test_invalid_slic_arguments():
    with pytest.raises(ValueError):
        slic_superpixels(np.zeros((16, 16)), target_count=0)
    with pytest.raises(ValueError):
        slic_superpixels(np.zeros((16, 16)), compactness=0.0)


def test_merge_collapses_cells_of_equal_colour():
    img = _thirds()
    cells = SegmentMap.from_labels(_grid_labels(60, 90, 4, 3))
    assert cells.count == 12

    merged = merge_regions(cells, img, merge_threshold=25.0)
    assert merged.count == 3
    for third in range(3):
        column = merged.labels[:, third * 30:(third + 1) * 30]
        assert np.all(column == column[0, 0])


def test_merge_threshold_zero_keeps_everything():
    cells = SegmentMap.from_labels(_grid_labels(60, 90, 4, 3))
    assert merge_regions(cells, _thirds(), merge_threshold=0.0).count == 12


def test_two_halves_recovered():
    rng = np.random.default_rng(8)
    img = np.full((64, 64), 50.0)
    img[:, 32:] = 200.0
    img += rng.normal(0.0, 2.0, img.shape)
    truth = np.zeros(img.shape, dtype=int)
    truth[:, 32:] = 1

    segments = merge_regions(slic_superpixels(img, target_count=16), img, merge_threshold=25.0)
    assert segments.count == 2

    predicted = np.zeros_like(truth)
    for label in segments.segment_ids:
        inside = segments.labels == label
        predicted[inside] = np.bincount(truth[inside]).argmax()
    assert np.mean(predicted == truth) >= 0.98


def test_merge_shape_mismatch():
    cells = SegmentMap.from_labels(_grid_labels(60, 90, 4, 3))
    with pytest.raises(ShapeMismatch):
        merge_regions(cells, np.zeros((60, 80)))


def test_label_map_round_trip(tmp_path):
    segments = SegmentMap.from_labels(_grid_labels(20, 30, 2, 3) * 7)
    assert segments.count == 6
    save_segment_map(tmp_path / "labels.png", segments)
    loaded = load_segment_map(tmp_path / "labels.png", (20, 30))
    assert np.array_equal(loaded.labels, segments.labels)
    assert loaded.areas == segments.areas


def test_label_map_errors(tmp_path):
    with pytest.raises(ImageIOError):
        load_segment_map(tmp_path / "missing.png", (4, 4))

    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(tmp_path / "rgb.png")
    with pytest.raises(DecodeError):
        load_segment_map(tmp_path / "rgb.png", (4, 4))

    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(tmp_path / "gray.png")
    with pytest.raises(ShapeMismatch):
        load_segment_map(tmp_path / "gray.png", (5, 4))


def test_segment_mask_and_decimation():
    segments = SegmentMap.from_labels(_grid_labels(32, 32, 2, 2))
    mask = segment_mask(segments, 0)
    assert mask.sum() == 256
    assert mask[:16, :16].all()

    small = segment_mask(segments, 3, band_shape=(16, 16))
    assert small.shape == (16, 16)
    assert small[8:, 8:].all() and not small[:8, :].any()

    with pytest.raises(UnknownLabel):
        segment_mask(segments, 4)


def test_largest_prefers_lowest_label_on_ties():
    labels = np.zeros((4, 4), dtype=int)
    labels[:, 2:] = 1
    assert SegmentMap.from_labels(labels).largest() == 0
    labels[0, 0] = 1
    assert SegmentMap.from_labels(labels).largest() == 1


def test_preview_colours_follow_segments():
    segments = SegmentMap.from_labels(_grid_labels(10, 10, 2, 1))
    preview = render_preview(segments)
    assert preview.shape == (10, 10, 3)
    assert preview.dtype == np.uint8
    assert np.all(preview[:5] == preview[0, 0])
