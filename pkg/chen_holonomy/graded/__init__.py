from chen_holonomy.graded.linear import (
    block_embed,
    block_extract,
    direct_sum,
    flag_direct_sum,
    hom_compose,
    is_strictly_flag_lowering,
)
from chen_holonomy.graded.model import DirectSum, Flag, GradedHom, GradedSpace

__all__ = [
    "DirectSum",
    "Flag",
    "GradedHom",
    "GradedSpace",
    "block_embed",
    "block_extract",
    "direct_sum",
    "flag_direct_sum",
    "hom_compose",
    "is_strictly_flag_lowering",
]
