"""Structural-area and nighttime-light analytics for industrial sites."""

from ._sitedev import (
    InstanceMask,
    LinearFit,
    MaskSet,
    SitedevError,
    average_precision,
    generate_scene,
    iou,
    l1_score,
    load_masks,
    load_raster,
    match_instances,
    ntl_eligible,
    ntl_label,
    ols_fit,
    resample_bilinear,
    rgb_to_luminance,
    save_masks,
    split_by_site,
    structural_area,
    union_pixel_count,
    yearly_trend,
)

__version__ = "0.1.0"

__all__ = [
    "InstanceMask",
    "LinearFit",
    "MaskSet",
    "SitedevError",
    "average_precision",
    "generate_scene",
    "iou",
    "l1_score",
    "load_masks",
    "load_raster",
    "match_instances",
    "ntl_eligible",
    "ntl_label",
    "ols_fit",
    "resample_bilinear",
    "rgb_to_luminance",
    "save_masks",
    "split_by_site",
    "structural_area",
    "union_pixel_count",
    "yearly_trend",
]
