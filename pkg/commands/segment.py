import logging

from commands import add_pipeline_flags, pipeline_config
from utils.imagecore import load_image, save_image
from utils.segmentation import merge_regions, render_preview, save_segment_map, slic_superpixels

logger = logging.getLogger(__name__)


def run_segment(cli, args) -> int:
    """Segment an image the way the detector does and write the label map."""
    config = pipeline_config(args)
    image = load_image(args.image)

    segments = slic_superpixels(image, config.slic_superpixels, config.compactness, config.slic_cell_size)
    if not args.no_merge:
        segments = merge_regions(segments, image, config.merge_threshold)

    save_segment_map(args.out_labels, segments)
    if args.out_preview:
        save_image(args.out_preview, render_preview(segments, seed=config.cluster_seed))
    logger.info(f"Wrote {segments.count} segment(s) to {args.out_labels}")
    return 0


def setup(cli):
    parser = cli.add_command('segment', run_segment, help='SLIC superpixels plus colour merging')
    parser.add_argument('--image', required=True)
    parser.add_argument('--out-labels', required=True, help='single-channel label map PNG')
    parser.add_argument('--out-preview', help='random-colour preview PNG')
    parser.add_argument('--no-merge', action='store_true', help='stop after the superpixel stage')
    add_pipeline_flags(parser)
