from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Sequence

from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.model import ShapeMismatchError


class InvalidGradedSpaceError(Exception):
    """Raised when a graded space has no dimension or a non-positive component"""

    pass


class FlagMismatchError(Exception):
    """Raised when a flag is not a partition of the basis of the space it is used with"""

    pass


@dataclass(frozen=True)
class GradedSpace:
    """
    finite-dimensional Z-graded vector space. the basis is ordered by ascending
    degree; `components` holds (degree, dimension) pairs in that order.
    """

    components: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.components:
            raise InvalidGradedSpaceError("a graded space needs at least one component")
        degrees = [k for k, _ in self.components]
        if degrees != sorted(set(degrees)):
            raise InvalidGradedSpaceError(f"degrees {degrees} must be strictly ascending")
        for k, dim in self.components:
            if dim < 1:
                raise InvalidGradedSpaceError(f"degree {k} has dimension {dim}")

    @classmethod
    def of(cls, dims: Mapping[int, int]) -> GradedSpace:
        return cls(tuple(sorted((int(k), int(d)) for k, d in dims.items() if d)))

    @classmethod
    def concentrated(cls, degree: int = 0, dim: int = 1) -> GradedSpace:
        return cls(((degree, dim),))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.components)

    def dim(self, degree: int) -> int:
        return dict(self.components).get(degree, 0)

    @cached_property
    def total_dim(self) -> int:
        return sum(dim for _, dim in self.components)

    @cached_property
    def offsets(self) -> dict[int, int]:
        offsets, running = {}, 0
        for k, dim in self.components:
            offsets[k] = running
            running += dim
        return offsets

    def indices(self, degree: int) -> range:
        if degree not in self.offsets:
            return range(0)
        start = self.offsets[degree]
        return range(start, start + self.dim(degree))

    @cached_property
    def basis_degrees(self) -> tuple[int, ...]:
        return tuple(k for k, dim in self.components for _ in range(dim))

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k}:{d}" for k, d in self.components) + "}"


@dataclass(frozen=True)
class GradedHom:
    """a constant linear map of homogeneous internal degree, stored on the full bases"""

    source: GradedSpace
    target: GradedSpace
    degree: int
    matrix: SparseMatrix

    def __post_init__(self):
        expected = (self.target.total_dim, self.source.total_dim)
        if self.matrix.shape != expected:
            raise ShapeMismatchError(f"matrix {self.matrix.shape} but spaces need {expected}")
        rows, cols = self.target.basis_degrees, self.source.basis_degrees
        for r, c, _ in self.matrix.entries():
            if rows[r] != cols[c] + self.degree:
                raise ShapeMismatchError(
                    f"entry ({r}, {c}) maps degree {cols[c]} to {rows[r]}, "
                    f"not of internal degree {self.degree}"
                )

    @classmethod
    def identity(cls, space: GradedSpace) -> GradedHom:
        return cls(space, space, 0, SparseMatrix.identity(space.total_dim))

    @classmethod
    def zero(cls, source: GradedSpace, target: GradedSpace, degree: int = 0) -> GradedHom:
        return cls(source, target, degree, SparseMatrix.zero((target.total_dim, source.total_dim)))

    @classmethod
    def from_blocks(
        cls,
        source: GradedSpace,
        target: GradedSpace,
        degree: int,
        blocks: Mapping[int, Sequence[Sequence[Fraction | int]]],
    ) -> GradedHom:
        entries = {}
        for k, block in blocks.items():
            rows, cols = target.indices(k + degree), source.indices(k)
            if not rows or not cols:
                if any(any(v for v in row) for row in block):
                    raise ShapeMismatchError(f"block from degree {k} has no target")
                continue
            if len(block) != len(rows) or any(len(row) != len(cols) for row in block):
                raise ShapeMismatchError(f"block from degree {k} has the wrong shape")
            for i, row in enumerate(block):
                for j, value in enumerate(row):
                    entries[(rows[i], cols[j])] = Fraction(value)
        return cls(
            source, target, degree, SparseMatrix((target.total_dim, source.total_dim), entries)
        )

    def blocks(self) -> dict[int, SparseMatrix]:
        result = {}
        for k in self.source.degrees:
            rows = self.target.indices(k + self.degree)
            if rows:
                result[k] = self.matrix.submatrix(rows, self.source.indices(k))
        return result

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def __add__(self, other: GradedHom) -> GradedHom:
        if (self.source, self.target, self.degree) != (other.source, other.target, other.degree):
            raise ShapeMismatchError("cannot add maps between different spaces or degrees")
        return GradedHom(self.source, self.target, self.degree, self.matrix + other.matrix)

    def __neg__(self) -> GradedHom:
        return GradedHom(self.source, self.target, self.degree, -self.matrix)

    def __sub__(self, other: GradedHom) -> GradedHom:
        return self + (-other)

    def scaled(self, factor: Fraction | int) -> GradedHom:
        scaled = self.matrix.scaled(Fraction(factor))
        return GradedHom(self.source, self.target, self.degree, scaled)


@dataclass(frozen=True)
class DirectSum:
    """
    a direct sum together with the bookkeeping that places each summand's
    basis inside the sum: per degree, summand 0 comes first, then summand 1, ...
    """

    summands: tuple[GradedSpace, ...]
    space: GradedSpace

    def block_indices(self, block: int) -> tuple[int, ...]:
        if not 0 <= block < len(self.summands):
            raise IndexError(f"block {block} out of range for {len(self.summands)} summands")
        indices = []
        for k in self.summands[block].degrees:
            start = self.space.offsets[k] + sum(
                summand.dim(k) for summand in self.summands[:block]
            )
            indices.extend(range(start, start + self.summands[block].dim(k)))
        return tuple(indices)


@dataclass(frozen=True)
class Flag:
    """
    an ordered partition of the basis into layers F_1, F_2, ...; a map is strictly
    lowering when every nonzero entry sends a basis vector into a lower layer
    """

    space: GradedSpace
    layers: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.layers:
            raise FlagMismatchError("a flag needs at least one layer")
        seen = [i for layer in self.layers for i in layer]
        if sorted(seen) != list(range(self.space.total_dim)):
            raise FlagMismatchError(
                f"layers {self.layers} do not partition the basis of {self.space}"
            )
        if any(not layer for layer in self.layers):
            raise FlagMismatchError("flag layers must be non-empty")

    @classmethod
    def discrete(cls, space: GradedSpace, order: Optional[Sequence[int]] = None) -> Flag:
        order = range(space.total_dim) if order is None else order
        return cls(space, tuple((i,) for i in order))

    @classmethod
    def single(cls, space: GradedSpace) -> Flag:
        return cls(space, (tuple(range(space.total_dim)),))

    @property
    def nu(self) -> int:
        return len(self.layers)

    @cached_property
    def layer_of(self) -> dict[int, int]:
        return {i: position for position, layer in enumerate(self.layers) for i in layer}

    def to_json(self) -> list[list[int]]:
        return [list(layer) for layer in self.layers]
