from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Union

import numpy as np

from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.model import ShapeMismatchError
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.graded.model import GradedHom, GradedSpace

T = "t"


def chart_variable(index: int) -> str:
    return f"x{index}"


def chart_variables(m: int) -> tuple[str, ...]:
    return tuple(chart_variable(i) for i in range(1, m + 1))


class FormDomainError(Exception):
    """Raised when forms on different domains (chart dimension, interval factor) are mixed"""

    pass


class NonComposableError(Exception):
    """Raised when the Hom values of two forms cannot be composed"""

    pass


class InhomogeneousFormError(Exception):
    """Raised when an operation needs a single total degree and the form has several"""

    pass


@dataclass(frozen=True, order=True)
class FormMonomial:
    """dx_{i1} ^ ... ^ dx_{ik} (^ dt), with dt always stored last"""

    dx: tuple[int, ...] = ()
    dt: bool = False

    def __post_init__(self):
        if list(self.dx) != sorted(set(self.dx)) or any(i < 1 for i in self.dx):
            raise ValueError(f"dx indices {self.dx} must be strictly ascending and positive")

    @property
    def degree(self) -> int:
        return len(self.dx) + (1 if self.dt else 0)

    def without_dt(self) -> FormMonomial:
        return FormMonomial(self.dx, False)

    def wedge(self, other: FormMonomial) -> tuple[int, Optional[FormMonomial]]:
        if self.dt and other.dt:
            return 0, None
        if set(self.dx) & set(other.dx):
            return 0, None
        swaps = len(other.dx) if self.dt else 0
        swaps += sum(1 for i in self.dx for j in other.dx if i > j)
        merged = FormMonomial(tuple(sorted(self.dx + other.dx)), self.dt or other.dt)
        return (-1 if swaps % 2 else 1), merged

    def __str__(self) -> str:
        factors = [f"dx{i}" for i in self.dx] + (["dt"] if self.dt else [])
        return "^".join(factors) if factors else "1"


ONE = FormMonomial()
DT = FormMonomial((), True)


def dx(*indices: int) -> FormMonomial:
    return FormMonomial(tuple(indices))


@dataclass(frozen=True)
class HomForm:
    """
    a polynomial differential form with values in Hom(source, target). terms map a
    form monomial to a matrix of polynomials on the full bases; a form lives on
    R^m x [0,1] when `cylinder` is set (t is then a coordinate and dt is allowed),
    otherwise on R^m, where a stray t in a coefficient is just a parameter.
    """

    m: int
    source: GradedSpace
    target: GradedSpace
    terms: Mapping[FormMonomial, SparseMatrix] = field(default_factory=dict)
    cylinder: bool = True

    def __post_init__(self):
        shape = (self.target.total_dim, self.source.total_dim)
        cleaned = {}
        for monomial, matrix in self.terms.items():
            if matrix.shape != shape:
                raise ShapeMismatchError(f"coefficient {matrix.shape}, expected {shape}")
            if any(i > self.m for i in monomial.dx):
                raise FormDomainError(f"{monomial} does not live on R^{self.m}")
            if monomial.dt and not self.cylinder:
                raise FormDomainError(f"{monomial} needs the interval factor")
            if not matrix.is_zero():
                cleaned[monomial] = matrix.map(MultiPoly.coerce)
        object.__setattr__(self, "terms", cleaned)

    @classmethod
    def _make(
        cls,
        like: HomForm,
        terms: dict[FormMonomial, SparseMatrix],
        source: Optional[GradedSpace] = None,
        target: Optional[GradedSpace] = None,
        cylinder: Optional[bool] = None,
        m: Optional[int] = None,
    ) -> HomForm:
        form = cls.__new__(cls)
        object.__setattr__(form, "m", like.m if m is None else m)
        object.__setattr__(form, "source", like.source if source is None else source)
        object.__setattr__(form, "target", like.target if target is None else target)
        object.__setattr__(form, "cylinder", like.cylinder if cylinder is None else cylinder)
        object.__setattr__(form, "terms", {k: v for k, v in terms.items() if not v.is_zero()})
        return form

    @classmethod
    def zero(
        cls, m: int, source: GradedSpace, target: GradedSpace, cylinder: bool = True
    ) -> HomForm:
        return cls(m, source, target, {}, cylinder)

    @classmethod
    def identity(cls, space: GradedSpace, m: int, cylinder: bool = True) -> HomForm:
        return cls.from_hom(GradedHom.identity(space), m, cylinder=cylinder)

    @classmethod
    def from_hom(
        cls,
        hom: GradedHom,
        m: int,
        monomial: FormMonomial = ONE,
        coefficient: Union[MultiPoly, Fraction, int] = 1,
        cylinder: bool = True,
    ) -> HomForm:
        """the decomposable form (coefficient * monomial) (x) hom"""
        coefficient = MultiPoly.coerce(coefficient)
        matrix = hom.matrix.map(lambda value: coefficient * value)
        return cls(m, hom.source, hom.target, {monomial: matrix}, cylinder)

    # arithmetic

    def _check_compatible(self, other: HomForm) -> None:
        if (self.m, self.cylinder) != (other.m, other.cylinder):
            raise FormDomainError(
                f"forms on R^{self.m} (cylinder={self.cylinder}) and "
                f"R^{other.m} (cylinder={other.cylinder})"
            )
        if (self.source, self.target) != (other.source, other.target):
            raise ShapeMismatchError("forms take values in different Hom spaces")

    def __add__(self, other: HomForm) -> HomForm:
        self._check_compatible(other)
        terms = dict(self.terms)
        for monomial, matrix in other.terms.items():
            terms[monomial] = terms[monomial] + matrix if monomial in terms else matrix
        return HomForm._make(self, terms)

    def __neg__(self) -> HomForm:
        return HomForm._make(self, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: HomForm) -> HomForm:
        return self + (-other)

    def scaled(self, factor: Union[MultiPoly, Fraction, int]) -> HomForm:
        if isinstance(factor, int):
            factor = Fraction(factor)
        return HomForm._make(self, {k: v.scaled(factor) for k, v in self.terms.items()})

    def map_coefficients(self, fn: Callable[[MultiPoly], MultiPoly]) -> HomForm:
        return HomForm._make(self, {k: v.map(fn) for k, v in self.terms.items()})

    def subst(self, name: str, value: Union[MultiPoly, Fraction, int]) -> HomForm:
        return self.map_coefficients(lambda p: p.subst(name, value))

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HomForm):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except (FormDomainError, ShapeMismatchError):
            return False

    __hash__ = None  # type: ignore[assignment]

    # degrees

    def term_degrees(self):
        """yields (monomial, row, col, total degree) for each nonzero entry"""
        rows, cols = self.target.basis_degrees, self.source.basis_degrees
        for monomial, matrix in self.terms.items():
            for r, c, _ in matrix.entries():
                yield monomial, r, c, monomial.degree + rows[r] - cols[c]

    def total_degrees(self) -> set[int]:
        return {degree for _, _, _, degree in self.term_degrees()}

    def total_degree(self) -> Optional[int]:
        """the single total degree, or None for the zero form"""
        degrees = self.total_degrees()
        if len(degrees) > 1:
            raise InhomogeneousFormError(f"form has total degrees {sorted(degrees)}")
        return next(iter(degrees), None)

    def is_homogeneous(self) -> bool:
        return len(self.total_degrees()) <= 1

    def homogeneous_components(self) -> dict[int, HomForm]:
        return self._split(lambda monomial, r, c, degree: degree)

    def partial_degree_components(self) -> dict[int, HomForm]:
        return self._split(lambda monomial, r, c, degree: monomial.degree)

    def _split(self, key) -> dict[int, HomForm]:
        buckets: dict[int, dict[FormMonomial, dict[tuple[int, int], MultiPoly]]] = {}
        for monomial, r, c, degree in self.term_degrees():
            bucket = buckets.setdefault(key(monomial, r, c, degree), {})
            bucket.setdefault(monomial, {})[(r, c)] = self.terms[monomial].get(r, c)
        shape = (self.target.total_dim, self.source.total_dim)
        return {
            k: HomForm._make(
                self, {mono: SparseMatrix(shape, entries) for mono, entries in bucket.items()}
            )
            for k, bucket in sorted(buckets.items())
        }

    def without_dt(self) -> HomForm:
        return HomForm._make(self, {k: v for k, v in self.terms.items() if not k.dt})

    # inspection

    def coefficient(self, monomial: FormMonomial) -> SparseMatrix:
        return self.terms.get(
            monomial, SparseMatrix.zero((self.target.total_dim, self.source.total_dim))
        )

    def blocks(self):
        """yields (monomial, source degree, target degree, block) in a stable order"""
        for monomial in sorted(self.terms):
            matrix = self.terms[monomial]
            for k in self.source.degrees:
                for l in self.target.degrees:
                    block = matrix.submatrix(self.target.indices(l), self.source.indices(k))
                    if not block.is_zero():
                        yield monomial, k, l, block

    def max_abs_coefficient(self) -> Fraction:
        return max(
            (
                entry.max_abs_coefficient()
                for matrix in self.terms.values()
                for _, _, entry in matrix.entries()
            ),
            default=Fraction(0),
        )

    def first_term(self) -> Optional[str]:
        for monomial in sorted(self.terms):
            for r, c, entry in self.terms[monomial].entries():
                return f"{monomial} [{r},{c}]: {entry}"
        return None

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for monomial in sorted(self.terms):
            for r, c, entry in self.terms[monomial].entries():
                pieces.append(f"({entry})*{monomial}*E[{r},{c}]")
        return " + ".join(pieces)


@dataclass(frozen=True)
class ExteriorValue:
    """the value of an End(V)-valued form at a point: one float matrix per dx monomial"""

    row_degrees: tuple[int, ...]
    col_degrees: tuple[int, ...]
    coefficients: Mapping[FormMonomial, np.ndarray] = field(default_factory=dict)

    @classmethod
    def identity(cls, space: GradedSpace) -> ExteriorValue:
        degrees = space.basis_degrees
        return cls(degrees, degrees, {ONE: np.eye(space.total_dim)})

    @classmethod
    def zero(cls, source: GradedSpace, target: GradedSpace) -> ExteriorValue:
        return cls(target.basis_degrees, source.basis_degrees, {})

    def _twisted(self, matrix: np.ndarray, form_degree: int) -> np.ndarray:
        if form_degree % 2 == 0:
            return matrix
        rows = np.array([(-1) ** d for d in self.row_degrees], dtype=float)
        cols = np.array([(-1) ** d for d in self.col_degrees], dtype=float)
        return matrix * rows[:, None] * cols[None, :]

    def wedge(self, other: ExteriorValue) -> ExteriorValue:
        result: dict[FormMonomial, np.ndarray] = {}
        for sigma, a in self.coefficients.items():
            for tau, b in other.coefficients.items():
                sign, monomial = sigma.wedge(tau)
                if not sign:
                    continue
                product = sign * (self._twisted(a, tau.degree) @ b)
                result[monomial] = result[monomial] + product if monomial in result else product
        return ExteriorValue(self.row_degrees, other.col_degrees, result)

    def __add__(self, other: ExteriorValue) -> ExteriorValue:
        result = dict(self.coefficients)
        for monomial, value in other.coefficients.items():
            result[monomial] = result[monomial] + value if monomial in result else value
        return ExteriorValue(self.row_degrees, self.col_degrees, result)

    def __sub__(self, other: ExteriorValue) -> ExteriorValue:
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> ExteriorValue:
        return ExteriorValue(
            self.row_degrees,
            self.col_degrees,
            {k: v * factor for k, v in self.coefficients.items()},
        )

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.coefficients.values()), default=0.0)

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(v))) for v in self.coefficients.values())

    def coefficient(self, monomial: FormMonomial) -> np.ndarray:
        value = self.coefficients.get(monomial)
        if value is None:
            return np.zeros((len(self.row_degrees), len(self.col_degrees)))
        return value


@dataclass(frozen=True)
class PolyMap:
    """
    a polynomial map into R^p given by p component polynomials in x1..xq, and in
    t as well when `cylinder` is set (a homotopy R^q x [0,1] -> R^p)
    """

    components: tuple[MultiPoly, ...]
    domain_dim: int
    cylinder: bool = False

    def __post_init__(self):
        allowed = set(chart_variables(self.domain_dim)) | ({T} if self.cylinder else set())
        for component in self.components:
            stray = set(component.used_variables()) - allowed
            if stray:
                raise FormDomainError(f"component {component} uses {sorted(stray)}")

    @property
    def target_dim(self) -> int:
        return len(self.components)

    @classmethod
    def identity(cls, m: int) -> PolyMap:
        return cls(tuple(MultiPoly.variable(v) for v in chart_variables(m)), m)

    @classmethod
    def constant(cls, point, domain_dim: int) -> PolyMap:
        return cls(tuple(MultiPoly.constant(Fraction(v)) for v in point), domain_dim)

    @classmethod
    def linear_contraction(cls, base_point) -> PolyMap:
        """h(x, t) = x0 + t (x - x0), a homotopy from the constant map at x0 to the identity"""
        t = MultiPoly.variable(T)
        components = tuple(
            Fraction(x0) + t * (MultiPoly.variable(chart_variable(i)) - Fraction(x0))
            for i, x0 in enumerate(base_point, start=1)
        )
        return cls(components, len(components), cylinder=True)

    def at_height(self, s: Union[Fraction, int]) -> PolyMap:
        if not self.cylinder:
            return self
        return PolyMap(tuple(c.subst(T, s) for c in self.components), self.domain_dim)
