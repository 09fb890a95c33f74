"""Raster types, ROI algebra, region statistics and the PNM codec."""

from .image import as_float, as_gray, as_rgb, is_rgb, quantize, round_half_up
from .pnm import decode_image, encode_image, read_image, read_size, write_image
from .regions import (
    Region,
    RegionStats,
    rasterize_region,
    region_mask,
    region_stats,
    stats_over_mask,
    union,
)

__all__ = [
    "Region", "RegionStats", "as_float", "as_gray", "as_rgb", "decode_image",
    "encode_image", "is_rgb", "quantize", "rasterize_region", "read_image",
    "read_size", "region_mask", "region_stats", "round_half_up",
    "stats_over_mask", "union", "write_image",
]
