"""Oriented bounding box geometry, PIoU loss, and VOC07 evaluation."""

from ._obbkit import (
    Detection,
    FitConfig,
    FitLoss,
    GroundTruth,
    Obb,
    PiouConfig,
    PiouLossKind,
    ValidationError,
    acm_points,
    apply_offsets,
    boundary_sweep,
    canonicalize,
    corners,
    evaluate,
    fit,
    iou_exact,
    min_area_rect,
    piou,
    piou_grad,
    piou_loss,
    rotated_nms,
    smooth_l1,
    tile_windows,
)

__all__ = [
    "Detection",
    "FitConfig",
    "FitLoss",
    "GroundTruth",
    "Obb",
    "PiouConfig",
    "PiouLossKind",
    "ValidationError",
    "acm_points",
    "apply_offsets",
    "boundary_sweep",
    "canonicalize",
    "corners",
    "evaluate",
    "fit",
    "iou_exact",
    "min_area_rect",
    "piou",
    "piou_grad",
    "piou_loss",
    "rotated_nms",
    "smooth_l1",
    "tile_windows",
]
