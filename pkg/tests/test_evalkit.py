import numpy as np
import pytest

from utils.detector import DetectionResult, detect
from utils.errors import EmptyDataset, InvalidRegion, RegionTooLarge, ShapeMismatch
from utils.evalkit import (
    evaluate_dataset,
    generate_suite,
    make_clean_texture,
    make_disk,
    pixel_metrics,
    synth_forgery,
)
from utils.imagecore import load_image, load_mask, save_image, save_mask


def test_metric_examples():
    truth = np.zeros(10, dtype=bool)
    truth[:2] = True

    perfect = pixel_metrics(truth, truth)
    assert (perfect.accuracy, perfect.recall, perfect.iou) == (1.0, 1.0, 1.0)

    missed = pixel_metrics(np.zeros(10, dtype=bool), truth)
    assert missed.accuracy == pytest.approx(0.8)
    assert missed.recall == 0.0 and missed.iou == 0.0

    single = np.zeros(10, dtype=bool)
    single[0] = True
    pred = np.zeros(10, dtype=bool)
    pred[:2] = True
    over = pixel_metrics(pred, single)
    assert over.accuracy == pytest.approx(0.9)
    assert over.recall == 1.0 and over.iou == 0.5


def test_empty_truth():
    empty = np.zeros((4, 4), dtype=bool)
    result = pixel_metrics(empty, empty)
    assert result.recall is None
    assert result.iou == 1.0
    assert result.accuracy == 1.0


def test_metrics_against_brute_force():
    rng = np.random.default_rng(77)
    for _ in range(500):
        pred = rng.random((16, 16)) < rng.random()
        truth = rng.random((16, 16)) < rng.random()
        result = pixel_metrics(pred, truth)

        pairs = list(zip(pred.ravel(), truth.ravel()))
        tp = sum(p and t for p, t in pairs)
        fp = sum(p and not t for p, t in pairs)
        fn = sum(t and not p for p, t in pairs)
        tn = len(pairs) - tp - fp - fn
        assert (result.tp, result.fp, result.fn, result.tn) == (tp, fp, fn, tn)
        assert result.accuracy == pytest.approx((tp + tn) / len(pairs))
        if tp + fp + fn:
            assert result.iou == pytest.approx(tp / (tp + fp + fn))
        if tp + fn:
            assert result.recall == pytest.approx(tp / (tp + fn))
            assert result.iou <= result.recall + 1e-12


def test_metric_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        pixel_metrics(np.zeros((3, 3)), np.zeros((3, 4)))


def _write_pair(root, name, image, mask):
    save_image(root / "inpainted" / name, image)
    save_mask(root / "mask" / name, mask)


def test_evaluate_dataset_with_stub_detector(tmp_path, monkeypatch):
    (tmp_path / "inpainted").mkdir()
    (tmp_path / "mask").mkdir()
    truth = make_disk((32, 32), (16, 16), 6)
    image = np.where(truth, 200.0, 50.0)
    _write_pair(tmp_path, "a.png", image, truth)
    _write_pair(tmp_path, "b.png", np.full((32, 32), 50.0), np.zeros((32, 32), dtype=bool))
    save_image(tmp_path / "inpainted" / "unpaired.png", image)
    (tmp_path / "inpainted" / "broken.png").write_bytes(b"not an image")
    save_mask(tmp_path / "mask" / "broken.png", truth)

    def stub_detect(img, config=None, segments=None, jobs=None):
        return DetectionResult(heatmap=np.zeros(img.shape), mask=img > 128)

    monkeypatch.setattr("utils.evalkit.detect", stub_detect)
    report = evaluate_dataset(tmp_path, jobs=2)

    assert [s.name for s in report.per_image] == ["a.png", "b.png"]
    assert report.failed == ["broken.png"]
    assert report.per_image[0].iou == 1.0
    assert report.per_image[1].recall is None
    assert report.aggregate == {"accuracy": 1.0, "recall": 1.0, "iou": 1.0}
    assert report.counts["tp"] == int(truth.sum())
    assert report.counts["fp"] == 0 and report.counts["fn"] == 0

    table = report.format_table()
    assert "Accuracy" in table and "IoU" in table
    assert "n/a" in table
    assert "Failed: broken.png" in table
    assert report.to_dict()["failed"] == ["broken.png"]


def test_empty_dataset(tmp_path):
    with pytest.raises(EmptyDataset) as info:
        evaluate_dataset(tmp_path)
    assert str(tmp_path) in str(info.value)


def test_denoise_and_blur_lower_inside_noise():
    clean = np.full((128, 128), 120.0)
    region = make_disk(clean.shape, (64, 64), 30)
    for mode in ("denoise", "blur"):
        forged, truth = synth_forgery(clean, region, mode=mode, noise_sigma=10.0, seed=2)
        residual = forged - clean
        assert residual[truth].var() < 0.5 * residual[~truth].var()


def test_modes_share_the_noisy_background(rng):
    clean = make_clean_texture((96, 96), rng)
    region = make_disk(clean.shape, (48, 48), 20)
    outputs = [synth_forgery(clean, region, mode=mode, seed=4)[0] for mode in ("denoise", "blur", "telea-fill")]
    for other in outputs[1:]:
        assert np.array_equal(outputs[0][~region], other[~region])


def test_noiseless_constant_stays_constant():
    clean = np.full((64, 64), 120.0)
    forged, _ = synth_forgery(clean, make_disk(clean.shape, (32, 32), 10), noise_sigma=0.0)
    assert np.all(forged == 120.0)


def test_truth_is_an_independent_copy():
    region = make_disk((64, 64), (32, 32), 10)
    _, truth = synth_forgery(np.full((64, 64), 120.0), region)
    truth[:] = False
    assert region.any()


def test_rgb_input_is_reduced_to_luma():
    clean = np.full((64, 64, 3), 120.0)
    forged, _ = synth_forgery(clean, make_disk((64, 64), (32, 32), 10))
    assert forged.shape == (64, 64)


def test_synth_validation():
    clean = np.full((256, 256), 120.0)
    with pytest.raises(ValueError):
        synth_forgery(clean, make_disk(clean.shape, (128, 128), 20), mode="smudge")
    with pytest.raises(InvalidRegion):
        synth_forgery(clean, np.zeros(clean.shape, dtype=bool))
    with pytest.raises(InvalidRegion):
        synth_forgery(clean, make_disk(clean.shape, (5, 128), 20))
    big = np.zeros(clean.shape, dtype=bool)
    big[8:248, 8:248] = True
    with pytest.raises(RegionTooLarge):
        synth_forgery(clean, big)
    with pytest.raises(ShapeMismatch):
        synth_forgery(clean, np.ones((10, 10), dtype=bool))


def test_generate_suite_layout(tmp_path):
    names = generate_suite(tmp_path / "a", count=3, seed=1, size=160)
    assert names == ["synth_000.png", "synth_001.png", "synth_002.png"]
    for name in names:
        for folder in ("inpainted", "mask", "original", "negative"):
            assert (tmp_path / "a" / folder / name).is_file()
        mask = load_mask(tmp_path / "a" / "mask" / name)
        assert mask.shape == (160, 160)
        assert 0 < mask.mean() < 0.5

    generate_suite(tmp_path / "b", count=3, seed=1, size=160)
    for name in names:
        assert np.array_equal(load_image(tmp_path / "a" / "inpainted" / name),
                              load_image(tmp_path / "b" / "inpainted" / name))


@pytest.mark.slow
def test_synthetic_benchmark(tmp_path):
    names = generate_suite(tmp_path, count=20, seed=0)
    report = evaluate_dataset(tmp_path)
    assert not report.failed
    assert np.median([s.iou for s in report.per_image]) >= 0.5
    assert report.aggregate["accuracy"] >= 0.9

    coverage = [detect(load_image(tmp_path / "negative" / name)).mask.mean() for name in names]
    assert np.mean(coverage) < 0.02
