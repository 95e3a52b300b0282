from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence

import numpy as np

from chen_holonomy.exactnum.model import NonInvertibleError, ShapeMismatchError

Entry = Any


class SparseMatrix:
    """
    immutable sparse matrix whose entries live in an exact ring: Fraction for
    constant maps, MultiPoly for form coefficients. zero entries are never stored.
    """

    __slots__ = ("shape", "rows")

    shape: tuple[int, int]
    rows: dict[int, dict[int, Entry]]

    def __init__(
        self,
        shape: tuple[int, int],
        entries: Optional[Mapping[tuple[int, int], Entry]] = None,
    ):
        n_rows, n_cols = shape
        rows: dict[int, dict[int, Entry]] = {}
        for (r, c), value in (entries or {}).items():
            if not (0 <= r < n_rows and 0 <= c < n_cols):
                raise ShapeMismatchError(f"entry ({r}, {c}) outside shape {shape}")
            if value:
                rows.setdefault(r, {})[c] = value
        self.shape = (n_rows, n_cols)
        self.rows = rows

    @classmethod
    def _make(cls, shape: tuple[int, int], rows: dict[int, dict[int, Entry]]) -> SparseMatrix:
        matrix = cls.__new__(cls)
        matrix.shape = shape
        matrix.rows = {r: row for r, row in rows.items() if row}
        return matrix

    @classmethod
    def zero(cls, shape: tuple[int, int]) -> SparseMatrix:
        return cls._make(shape, {})

    @classmethod
    def identity(cls, size: int, one: Entry = Fraction(1)) -> SparseMatrix:
        return cls._make((size, size), {i: {i: one} for i in range(size)})

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[Entry]]) -> SparseMatrix:
        n_rows = len(rows)
        n_cols = len(rows[0]) if rows else 0
        if any(len(row) != n_cols for row in rows):
            raise ShapeMismatchError("ragged matrix")
        return cls(
            (n_rows, n_cols),
            {(r, c): v for r, row in enumerate(rows) for c, v in enumerate(row)},
        )

    def entries(self) -> Iterator[tuple[int, int, Entry]]:
        for r in sorted(self.rows):
            row = self.rows[r]
            for c in sorted(row):
                yield r, c, row[c]

    def get(self, r: int, c: int, default: Entry = Fraction(0)) -> Entry:
        return self.rows.get(r, {}).get(c, default)

    def is_zero(self) -> bool:
        return not self.rows

    def __bool__(self) -> bool:
        return bool(self.rows)

    def _check_same_shape(self, other: SparseMatrix) -> None:
        if self.shape != other.shape:
            raise ShapeMismatchError(f"{self.shape} vs {other.shape}")

    def __add__(self, other: SparseMatrix) -> SparseMatrix:
        self._check_same_shape(other)
        rows = {r: dict(row) for r, row in self.rows.items()}
        for r, row in other.rows.items():
            target = rows.setdefault(r, {})
            for c, value in row.items():
                total = target[c] + value if c in target else value
                if total:
                    target[c] = total
                else:
                    target.pop(c, None)
        return SparseMatrix._make(self.shape, rows)

    def __neg__(self) -> SparseMatrix:
        return self.map(lambda value: -value)

    def __sub__(self, other: SparseMatrix) -> SparseMatrix:
        return self + (-other)

    def scaled(self, factor: Entry) -> SparseMatrix:
        return self.map(lambda value: value * factor)

    def __matmul__(self, other: SparseMatrix) -> SparseMatrix:
        if self.shape[1] != other.shape[0]:
            raise ShapeMismatchError(f"cannot compose {self.shape} with {other.shape}")
        rows: dict[int, dict[int, Entry]] = {}
        for r, row in self.rows.items():
            target: dict[int, Entry] = {}
            for k, a in row.items():
                other_row = other.rows.get(k)
                if not other_row:
                    continue
                for c, b in other_row.items():
                    product = a * b
                    target[c] = target[c] + product if c in target else product
            cleaned = {c: v for c, v in target.items() if v}
            if cleaned:
                rows[r] = cleaned
        return SparseMatrix._make((self.shape[0], other.shape[1]), rows)

    def map(self, fn: Callable[[Entry], Entry]) -> SparseMatrix:
        return self.map_indexed(lambda r, c, value: fn(value))

    def map_indexed(self, fn: Callable[[int, int, Entry], Entry]) -> SparseMatrix:
        rows: dict[int, dict[int, Entry]] = {}
        for r, row in self.rows.items():
            mapped = {}
            for c, value in row.items():
                result = fn(r, c, value)
                if result:
                    mapped[c] = result
            if mapped:
                rows[r] = mapped
        return SparseMatrix._make(self.shape, rows)

    def submatrix(self, row_indices: Sequence[int], col_indices: Sequence[int]) -> SparseMatrix:
        row_lookup = {g: i for i, g in enumerate(row_indices)}
        col_lookup = {g: j for j, g in enumerate(col_indices)}
        rows: dict[int, dict[int, Entry]] = {}
        for r, row in self.rows.items():
            if r not in row_lookup:
                continue
            picked = {col_lookup[c]: v for c, v in row.items() if c in col_lookup}
            if picked:
                rows[row_lookup[r]] = picked
        return SparseMatrix._make((len(row_indices), len(col_indices)), rows)

    def embedded(
        self,
        shape: tuple[int, int],
        row_indices: Sequence[int],
        col_indices: Sequence[int],
    ) -> SparseMatrix:
        if len(row_indices) != self.shape[0] or len(col_indices) != self.shape[1]:
            raise ShapeMismatchError(f"cannot place {self.shape} at the given indices")
        rows = {
            row_indices[r]: {col_indices[c]: v for c, v in row.items()}
            for r, row in self.rows.items()
        }
        return SparseMatrix._make(shape, rows)

    def to_dense(self, zero: Entry = Fraction(0)) -> list[list[Entry]]:
        return [
            [self.get(r, c, zero) for c in range(self.shape[1])]
            for r in range(self.shape[0])
        ]

    def to_array(self, convert: Callable[[Entry], float] = float) -> np.ndarray:
        array = np.zeros(self.shape, dtype=float)
        for r, c, value in self.entries():
            array[r, c] = convert(value)
        return array

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"({r},{c}): {v}" for r, c, v in self.entries())
        return f"SparseMatrix({self.shape}, {{{body}}})"


def rational_inverse(matrix: SparseMatrix) -> SparseMatrix:
    """exact Gauss-Jordan inverse of a square matrix of rationals"""
    size, cols = matrix.shape
    if size != cols:
        raise ShapeMismatchError(f"cannot invert a {matrix.shape} matrix")
    work = [
        [Fraction(v) for v in row] + [Fraction(int(i == r)) for i in range(size)]
        for r, row in enumerate(matrix.to_dense())
    ]
    for column in range(size):
        pivot = next((r for r in range(column, size) if work[r][column]), None)
        if pivot is None:
            raise NonInvertibleError("singular constant part")
        work[column], work[pivot] = work[pivot], work[column]
        scale = work[column][column]
        work[column] = [v / scale for v in work[column]]
        for r in range(size):
            if r != column and work[r][column]:
                factor = work[r][column]
                work[r] = [a - factor * b for a, b in zip(work[r], work[column])]
    return SparseMatrix.from_dense([row[size:] for row in work])
