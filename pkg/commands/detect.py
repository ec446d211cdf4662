import json
import logging

from commands import add_pipeline_flags, pipeline_config, resolve_jobs
from utils.bandio import dump_bands
from utils.detector import detect
from utils.imagecore import load_image, save_image, save_mask
from utils.segmentation import load_segment_map

logger = logging.getLogger(__name__)


def write_report(path, report) -> None:
    with open(path, 'w') as f:
        json.dump(report, f, indent=4)


def run_detect(cli, args) -> int:
    """Run the detector on one image and write mask, heat map and optional report."""
    jobs = resolve_jobs(args)
    config = pipeline_config(args)

    image = load_image(args.image)
    segments = None
    if args.segments:
        segments = load_segment_map(args.segments, image.shape[:2])

    result = detect(image, config, segments=segments, jobs=jobs)
    save_mask(args.out_mask, result.mask)
    save_image(args.out_heat, result.heatmap * 255.0)

    if args.report:
        report = result.to_report()
        report['image'] = args.image
        report['config'] = config.to_mapping()
        write_report(args.report, report)
    if args.dump_bands:
        dump_bands(image, args.dump_bands, config.band_part)

    logger.info(f"Wrote {args.out_mask} ({int(result.mask.sum())} flagged pixels) and {args.out_heat}")
    return 0


def setup(cli):
    parser = cli.add_command('detect', run_detect, help='localise inpainted regions in an image')
    parser.add_argument('--image', required=True, help='PNG or PGM image to analyse')
    parser.add_argument('--segments', help='externally produced label map PNG')
    parser.add_argument('--out-mask', required=True, help='binary mask PNG')
    parser.add_argument('--out-heat', required=True, help='heat map PNG')
    parser.add_argument('--report', help='JSON provenance report')
    parser.add_argument('--dump-bands', metavar='DIR', help='also write the level-1 bands as WBND files')
    add_pipeline_flags(parser)
