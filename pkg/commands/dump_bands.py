import logging

from utils.bandio import dump_bands
from utils.imagecore import load_image

logger = logging.getLogger(__name__)


def run_dump_bands(cli, args) -> int:
    image = load_image(args.image)
    dump_bands(image, args.out_dir, args.part_mode, spectral=args.spectral)
    return 0


def setup(cli):
    parser = cli.add_command('dump-bands', run_dump_bands, help='write the twelve level-1 band-parts as WBND files')
    parser.add_argument('--image', required=True)
    parser.add_argument('--out-dir', required=True)
    parser.add_argument('--part-mode', choices=['real-imag', 'real-abs'], default='real-imag')
    parser.add_argument('--spectral', action='store_true', help='Spectral colour map previews')
