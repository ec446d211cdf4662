import logging

from commands import UsageError
from utils.bandio import read_band, render_preview, write_band
from utils.bandops import FILTER_METHODS, enhance, normalize
from utils.imagecore import save_image

logger = logging.getLogger(__name__)


def run_enhance(cli, args) -> int:
    """Apply one enhancement filter to a dumped band file."""
    if args.window < 3 or args.window % 2 == 0:
        raise UsageError(f"--window must be odd and >= 3, got {args.window}")
    if args.linthresh <= 0:
        raise UsageError(f"--linthresh must be positive, got {args.linthresh}")

    band = read_band(args.band, abs_part=args.abs_part)
    data = normalize(band.data, args.linthresh) if args.normalize else band.data
    enhanced = enhance(data, args.filter, args.window)

    write_band(args.out, enhanced, band.band_index, band.part)
    if args.preview:
        save_image(args.preview, render_preview(enhanced, spectral=args.spectral))
    logger.info(f"Applied {args.filter} to band {band.band_index} {band.part.value}")
    return 0


def setup(cli):
    parser = cli.add_command('enhance', run_enhance, help='filter a WBND band file')
    parser.add_argument('--band', required=True, help='input WBND file')
    parser.add_argument('--filter', required=True, choices=FILTER_METHODS)
    parser.add_argument('--window', type=int, default=3, help='odd window size (default 3)')
    parser.add_argument('--normalize', action='store_true', help='symlog + z-score before filtering')
    parser.add_argument('--linthresh', type=float, default=1.0)
    parser.add_argument('--abs-part', action='store_true', help='odd band codes hold magnitudes')
    parser.add_argument('--out', required=True, help='output WBND file')
    parser.add_argument('--preview', help='preview PNG')
    parser.add_argument('--spectral', action='store_true', help='Spectral colour map preview')
