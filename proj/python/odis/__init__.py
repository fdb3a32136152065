"""Omnidirectional image synthesis: sphere geometry, NFoV projection, view blending,
patch codebooks, masked-token sampling and two-stage panorama synthesis.

Images are float32 arrays of shape (H, W, 3) with values in [0, 1]; panoramas are
2:1 equirectangular.
"""

from ._odis import (
    Codebook,
    DataError,
    blend_views,
    condition,
    coverage,
    direction_to_erp_pixel,
    directions,
    erp_pixel_to_direction,
    extract_view,
    extract_yaw_pitch,
    mask_ratio,
    metrics,
    reconstruct_compare,
    render_scene,
    sample_oracle,
    scheduled_mask_count,
    seam_score,
    synthesize,
    train_codebook,
)

__all__ = [
    "Codebook",
    "DataError",
    "blend_views",
    "condition",
    "coverage",
    "direction_to_erp_pixel",
    "directions",
    "erp_pixel_to_direction",
    "extract_view",
    "extract_yaw_pitch",
    "mask_ratio",
    "metrics",
    "reconstruct_compare",
    "render_scene",
    "sample_oracle",
    "scheduled_mask_count",
    "seam_score",
    "synthesize",
    "train_codebook",
]
