# utils package
# This file makes the utils directory a proper Python package

# detector and evalkit depend on config.py, which itself imports utils.errors,
# so they are imported by module path rather than re-exported here
from .errors import (
    ForensicsError,
    ImageIOError,
    DecodeError,
    ShapeMismatch,
    EmptyPatchSet,
    ImageTooSmall,
    InsufficientPatches,
    DegenerateReference,
    DegenerateInput,
    UnknownLabel,
    EmptyDataset,
    RegionTooLarge,
    InvalidRegion,
    ConfigError
)
from .imagecore import (
    PatchSet,
    load_image,
    save_image,
    load_mask,
    save_mask,
    to_grayscale,
    extract_patches
)
from .dtcwt import FILTER_BANK, BandPart, forward, inverse, split_bands
from .noise import NoiseEstimate, estimate_noise, estimate_region_noise, noise_discrepancy
from .segmentation import SegmentMap, slic_superpixels, merge_regions, load_segment_map, segment_mask
from .bandops import EnhancedBand, normalize, band_relevance, median_filter, smfr, wiener_filter, mmwf
from .cluster import kmeans_1d, fuzzy_cmeans_1d, cluster_segment

__version__ = "1.0.0"
