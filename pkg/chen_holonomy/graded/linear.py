from __future__ import annotations

import logging
from typing import Sequence, Union

from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.model import ShapeMismatchError
from chen_holonomy.graded.model import (
    DirectSum,
    Flag,
    FlagMismatchError,
    GradedHom,
    GradedSpace,
)

LOGGER = logging.getLogger(__name__)


def hom_compose(f: GradedHom, g: GradedHom) -> GradedHom:
    """f after g"""
    if g.target != f.source:
        raise ShapeMismatchError(f"cannot compose: {g.target} is not {f.source}")
    return GradedHom(g.source, f.target, f.degree + g.degree, f.matrix @ g.matrix)


def direct_sum(spaces: Sequence[GradedSpace]) -> DirectSum:
    if not spaces:
        raise ValueError("direct sum of nothing")
    dims: dict[int, int] = {}
    for space in spaces:
        for k, dim in space.components:
            dims[k] = dims.get(k, 0) + dim
    return DirectSum(tuple(spaces), GradedSpace.of(dims))


def block_extract(f: GradedHom, summed: DirectSum, row: int, col: int) -> GradedHom:
    if f.source != summed.space or f.target != summed.space:
        raise ShapeMismatchError("map is not defined on this direct sum")
    matrix = f.matrix.submatrix(summed.block_indices(row), summed.block_indices(col))
    return GradedHom(summed.summands[col], summed.summands[row], f.degree, matrix)


def block_embed(f: GradedHom, summed: DirectSum, row: int, col: int) -> GradedHom:
    """places a map V_col -> V_row into the corresponding block of an endomorphism of the sum"""
    if f.source != summed.summands[col] or f.target != summed.summands[row]:
        raise ShapeMismatchError(f"map does not fit block ({row}, {col})")
    size = summed.space.total_dim
    matrix = f.matrix.embedded(
        (size, size), summed.block_indices(row), summed.block_indices(col)
    )
    return GradedHom(summed.space, summed.space, f.degree, matrix)


def flag_direct_sum(summed: DirectSum, flags: Sequence[Flag]) -> Flag:
    """
    the flag on a direct sum that lists the last summand's layers first, so that
    every map from summand i into summand i+1 is strictly lowering
    """
    if len(flags) != len(summed.summands):
        raise FlagMismatchError(f"{len(flags)} flags for {len(summed.summands)} summands")
    layers = []
    for block in reversed(range(len(summed.summands))):
        flag = flags[block]
        if flag.space != summed.summands[block]:
            raise FlagMismatchError(f"flag of block {block} lives on another space")
        indices = summed.block_indices(block)
        layers.extend(tuple(indices[i] for i in layer) for layer in flag.layers)
    return Flag(summed.space, tuple(layers))


def matrix_is_strictly_flag_lowering(matrix: SparseMatrix, flag: Flag) -> bool:
    layer_of = flag.layer_of
    return all(layer_of[r] < layer_of[c] for r, c, _ in matrix.entries())


def is_strictly_flag_lowering(f: Union[GradedHom, SparseMatrix], flag: Flag) -> bool:
    if isinstance(f, GradedHom):
        if f.source != flag.space or f.target != flag.space:
            raise FlagMismatchError("flag and map live on different spaces")
        f = f.matrix
    elif f.shape != (flag.space.total_dim, flag.space.total_dim):
        raise FlagMismatchError(f"matrix {f.shape} does not act on {flag.space}")
    return matrix_is_strictly_flag_lowering(f, flag)
