import logging

from commands import UsageError
from utils.evalkit import SYNTH_MODES, generate_suite, synth_forgery
from utils.imagecore import load_image, load_mask, save_image, save_mask

logger = logging.getLogger(__name__)


def run_synth(cli, args) -> int:
    """Create one synthetic forgery, or a whole evaluation suite with --suite."""
    seed = args.seed if args.seed is not None else 0
    if args.suite:
        if args.count < 1:
            raise UsageError(f"--count must be >= 1, got {args.count}")
        generate_suite(args.suite, args.count, seed)
        return 0

    missing = [flag for flag, value in (('--image', args.image), ('--region', args.region),
                                        ('--out-image', args.out_image), ('--out-truth', args.out_truth))
               if not value]
    if missing:
        raise UsageError(f"missing {', '.join(missing)} (or use --suite DIR)")
    if args.sigma < 0:
        raise UsageError(f"--sigma must be non-negative, got {args.sigma}")

    clean = load_image(args.image)
    region = load_mask(args.region)
    forged, truth = synth_forgery(clean, region, args.mode, args.sigma, seed=seed)
    save_image(args.out_image, forged)
    save_mask(args.out_truth, truth)
    logger.info(f"Wrote {args.out_image} ({args.mode}, sigma={args.sigma})")
    return 0


def setup(cli):
    parser = cli.add_command('synth', run_synth, help='synthesise low-noise forgeries with ground truth')
    parser.add_argument('--image', help='clean source image')
    parser.add_argument('--region', help='mask PNG of the area to forge')
    parser.add_argument('--mode', choices=SYNTH_MODES, default='denoise')
    parser.add_argument('--sigma', type=float, default=10.0, help='global noise standard deviation')
    parser.add_argument('--out-image', help='forged image PNG')
    parser.add_argument('--out-truth', help='truth mask PNG')
    parser.add_argument('--suite', metavar='DIR', help='generate a full synthetic dataset instead')
    parser.add_argument('--count', type=int, default=20, help='forgeries in the suite (default 20)')
