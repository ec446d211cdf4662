import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path so config.py, cli.py and the utils package import
sys.path.append(str(Path(__file__).parent.parent))

from utils.evalkit import make_disk, synth_forgery  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def noise_image():
    """Flat gray image with sigma 10 Gaussian noise."""
    generator = np.random.default_rng(7)
    return np.clip(np.rint(120.0 + generator.normal(0.0, 10.0, (64, 64))), 0, 255)


@pytest.fixture(scope="session")
def disk_forgery():
    """256x256 flat noisy image whose central disk (radius 40) was denoised."""
    clean = np.full((256, 256), 120.0)
    region = make_disk(clean.shape, (128, 128), 40)
    forged, truth = synth_forgery(clean, region, mode="denoise", noise_sigma=10.0, seed=3)
    return forged, truth
