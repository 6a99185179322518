"""Grid geometry, rasterisation, encoders and VWGT tensor files."""

from .encoders import EncodedInput, GridEncoder, canonical_kind, create_encoder
from .raster import (
    coverage_mask,
    make_two_encoder_inputs,
    rasterize_layout,
    rasterize_target_mask,
    rasterize_vwg_pad,
    rasterize_wordgrid,
    resize_image,
    token_cells,
)
from .spec import CellBox, GridSpec, scale_box
from .tensor_io import read_tensor, write_tensor

__all__ = [
    "CellBox",
    "EncodedInput",
    "GridEncoder",
    "GridSpec",
    "canonical_kind",
    "coverage_mask",
    "create_encoder",
    "make_two_encoder_inputs",
    "rasterize_layout",
    "rasterize_target_mask",
    "rasterize_vwg_pad",
    "rasterize_wordgrid",
    "read_tensor",
    "resize_image",
    "scale_box",
    "token_cells",
    "write_tensor",
]
