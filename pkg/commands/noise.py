import json
import logging

import numpy as np

from commands import UsageError, pipeline_config
from utils.dtcwt import forward, split_bands
from utils.errors import ShapeMismatch
from utils.imagecore import load_image, load_mask, to_grayscale
from utils.noise import NOISE_MODES, band_noise_table, estimate_region_noise, noise_discrepancy

logger = logging.getLogger(__name__)


def run_noise(cli, args) -> int:
    """Print PCA noise estimates for an image, optionally split by a mask or per band."""
    if args.patch < 2 or args.padding < 0:
        raise UsageError("--patch must be >= 2 and --padding >= 0")
    if args.bands and not args.mask:
        raise UsageError("--bands needs --mask")
    mode = args.mode or pipeline_config(args).noise_mode

    image = load_image(args.image)
    gray = to_grayscale(image) if image.ndim == 3 else image
    mask = None
    if args.mask:
        mask = load_mask(args.mask)
        if mask.shape != gray.shape:
            raise ShapeMismatch(f"mask {mask.shape} does not match image {gray.shape}", args.mask)

    if args.bands:
        bands = split_bands(forward(gray, 1), pipeline_config(args).band_part)
        output = band_noise_table(bands, mask, args.patch, args.padding, mode)
    elif mask is None:
        output = estimate_region_noise(gray, np.ones(gray.shape, dtype=bool), args.patch, args.padding, mode).to_dict()
    else:
        inside = estimate_region_noise(gray, mask, args.patch, args.padding, mode)
        outside = estimate_region_noise(gray, ~mask, args.patch, args.padding, mode)
        output = {
            "inside": inside.to_dict(),
            "outside": outside.to_dict(),
            "discrepancy": noise_discrepancy(inside, outside),
        }

    print(json.dumps(output, indent=4))
    return 0


def setup(cli):
    parser = cli.add_command('noise', run_noise, help='patch-PCA noise variance estimate')
    parser.add_argument('--image', required=True)
    parser.add_argument('--mask', help='estimate inside and outside this mask')
    parser.add_argument('--patch', type=int, default=8, help='patch side (default 8)')
    parser.add_argument('--padding', type=int, default=3, help='reflective padding (default 3)')
    parser.add_argument('--mode', choices=NOISE_MODES, help='raw minimum eigenvalue, refined lowest-quarter median or balanced-tail mean')
    parser.add_argument('--bands', action='store_true', help='per band-part table of inside/outside/whole variances')
