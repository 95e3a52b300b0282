from __future__ import annotations

import logging
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from chen_holonomy.exactnum.model import RationalFormatError

LOGGER = logging.getLogger(__name__)

Rational = Fraction
Exponents = tuple[int, ...]
Scalar = Union[int, Fraction]
PolyLike = Union["MultiPoly", int, Fraction]


def parse_rational(text: str) -> Fraction:
    """parses the "num/den" (or plain integer) wire format"""
    if not isinstance(text, str):
        raise RationalFormatError(f"expected a rational string, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise RationalFormatError(f"malformed rational {text!r}") from e


def format_rational(value: Scalar) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _add_exps(a: Exponents, b: Exponents) -> Exponents:
    return tuple(x + y for x, y in zip(a, b))


class MultiPoly:
    """
    a polynomial with exact rational coefficients over an ordered set of named
    variables. values are immutable; operations between polynomials over
    different variable sets work over the union of the two sets.
    """

    __slots__ = ("variables", "terms")

    variables: tuple[str, ...]
    terms: dict[Exponents, Fraction]

    def __init__(
        self,
        variables: Iterable[str] = (),
        terms: Optional[Mapping[Exponents, Scalar]] = None,
    ):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"repeated variable in {variables}")
        cleaned: dict[Exponents, Fraction] = {}
        for exps, coefficient in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(variables) or any(e < 0 for e in exps):
                raise ValueError(f"exponents {exps} do not fit {variables}")
            coefficient = Fraction(coefficient)
            if coefficient:
                cleaned[exps] = cleaned.get(exps, Fraction(0)) + coefficient
        self.variables = variables
        self.terms = {exps: c for exps, c in cleaned.items() if c}

    @classmethod
    def _make(
        cls, variables: tuple[str, ...], terms: dict[Exponents, Fraction]
    ) -> MultiPoly:
        poly = cls.__new__(cls)
        poly.variables = variables
        poly.terms = terms
        return poly

    @classmethod
    def constant(cls, value: Scalar, variables: Iterable[str] = ()) -> MultiPoly:
        variables = tuple(variables)
        value = Fraction(value)
        terms = {(0,) * len(variables): value} if value else {}
        return cls._make(variables, terms)

    @classmethod
    def zero(cls, variables: Iterable[str] = ()) -> MultiPoly:
        return cls._make(tuple(variables), {})

    @classmethod
    def one(cls, variables: Iterable[str] = ()) -> MultiPoly:
        return cls.constant(1, variables)

    @classmethod
    def variable(cls, name: str, variables: Optional[Iterable[str]] = None) -> MultiPoly:
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            variables = variables + (name,)
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls._make(variables, {exps: Fraction(1)})

    @classmethod
    def coerce(cls, value: PolyLike) -> MultiPoly:
        if isinstance(value, MultiPoly):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.constant(value)
        raise TypeError(f"cannot treat {value!r} as a polynomial")

    # variable bookkeeping

    def extended(self, variables: Sequence[str]) -> MultiPoly:
        """re-express over a superset of the current variables, in the given order"""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        positions = []
        for name in self.variables:
            if name not in variables:
                if not self.free_of(name):
                    raise ValueError(f"variable {name} missing from {variables}")
            positions.append(variables.index(name) if name in variables else None)
        terms: dict[Exponents, Fraction] = {}
        width = len(variables)
        for exps, coefficient in self.terms.items():
            target = [0] * width
            for position, e in zip(positions, exps):
                if position is not None:
                    target[position] = e
            terms[tuple(target)] = coefficient
        return MultiPoly._make(variables, terms)

    def _aligned(self, other: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
        if self.variables == other.variables:
            return self, other
        union = self.variables + tuple(
            v for v in other.variables if v not in self.variables
        )
        return self.extended(union), other.extended(union)

    def free_of(self, name: str) -> bool:
        if name not in self.variables:
            return True
        index = self.variables.index(name)
        return all(exps[index] == 0 for exps in self.terms)

    def used_variables(self) -> tuple[str, ...]:
        return tuple(v for v in self.variables if not self.free_of(v))

    def trimmed(self) -> MultiPoly:
        return self.extended(self.used_variables())

    def rename(self, old: str, new: str) -> MultiPoly:
        if old not in self.variables:
            return self
        if new in self.variables and new != old:
            return self.subst(old, MultiPoly.variable(new))
        return MultiPoly._make(
            tuple(new if v == old else v for v in self.variables), dict(self.terms)
        )

    # ring structure

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(exps) for exps in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.variables), Fraction(0))

    def __add__(self, other: PolyLike) -> MultiPoly:
        if not isinstance(other, (MultiPoly, int, Fraction)):
            return NotImplemented
        left, right = self._aligned(MultiPoly.coerce(other))
        terms = dict(left.terms)
        for exps, coefficient in right.terms.items():
            total = terms.get(exps, 0) + coefficient
            if total:
                terms[exps] = total
            else:
                terms.pop(exps, None)
        return MultiPoly._make(left.variables, terms)

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        return MultiPoly._make(
            self.variables, {exps: -c for exps, c in self.terms.items()}
        )

    def __sub__(self, other: PolyLike) -> MultiPoly:
        if not isinstance(other, (MultiPoly, int, Fraction)):
            return NotImplemented
        return self + (-MultiPoly.coerce(other))

    def __rsub__(self, other: PolyLike) -> MultiPoly:
        return MultiPoly.coerce(other) - self

    def __mul__(self, other: PolyLike) -> MultiPoly:
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if not self.terms or not other.terms:
            left, _ = self._aligned(other)
            return MultiPoly._make(left.variables, {})
        left, right = self._aligned(other)
        terms: dict[Exponents, Fraction] = {}
        for a_exps, a in left.terms.items():
            for b_exps, b in right.terms.items():
                exps = _add_exps(a_exps, b_exps)
                terms[exps] = terms.get(exps, 0) + a * b
        return MultiPoly._make(left.variables, {e: c for e, c in terms.items() if c})

    def __rmul__(self, other: PolyLike) -> MultiPoly:
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        return NotImplemented

    def __pow__(self, exponent: int) -> MultiPoly:
        if exponent < 0:
            raise ValueError("negative powers are not polynomials")
        result = MultiPoly.one(self.variables)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def scaled(self, factor: Scalar) -> MultiPoly:
        factor = Fraction(factor)
        if not factor:
            return MultiPoly._make(self.variables, {})
        return MultiPoly._make(
            self.variables, {exps: c * factor for exps, c in self.terms.items()}
        )

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    # calculus

    def diff(self, name: str) -> MultiPoly:
        if name not in self.variables:
            return MultiPoly._make(self.variables, {})
        index = self.variables.index(name)
        terms: dict[Exponents, Fraction] = {}
        for exps, coefficient in self.terms.items():
            e = exps[index]
            if e:
                lowered = exps[:index] + (e - 1,) + exps[index + 1 :]
                terms[lowered] = coefficient * e
        return MultiPoly._make(self.variables, terms)

    def antiderivative(self, name: str) -> MultiPoly:
        poly = self if name in self.variables else self.extended(self.variables + (name,))
        index = poly.variables.index(name)
        terms: dict[Exponents, Fraction] = {}
        for exps, coefficient in poly.terms.items():
            e = exps[index]
            raised = exps[:index] + (e + 1,) + exps[index + 1 :]
            terms[raised] = coefficient / (e + 1)
        return MultiPoly._make(poly.variables, terms)

    def integrate(self, name: str, lower: PolyLike, upper: PolyLike) -> MultiPoly:
        """definite integral in `name` between bounds that do not involve it"""
        lower, upper = MultiPoly.coerce(lower), MultiPoly.coerce(upper)
        if not lower.free_of(name) or not upper.free_of(name):
            raise ValueError(f"integration bounds must be free of {name}")
        primitive = self.antiderivative(name)
        return primitive.subst(name, upper) - primitive.subst(name, lower)

    def subst(self, name: str, value: PolyLike) -> MultiPoly:
        return self.compose({name: value})

    def compose(self, mapping: Mapping[str, PolyLike]) -> MultiPoly:
        """simultaneous substitution of the mapped variables"""
        mapping = {
            name: MultiPoly.coerce(value)
            for name, value in mapping.items()
            if name in self.variables
        }
        if not mapping:
            return self
        kept = tuple(v for v in self.variables if v not in mapping)
        kept_positions = [self.variables.index(v) for v in kept]
        mapped_positions = [(self.variables.index(v), v) for v in mapping]
        result_variables = kept
        for value in mapping.values():
            result_variables += tuple(
                v for v in value.variables if v not in result_variables
            )
        images = {name: value.extended(result_variables) for name, value in mapping.items()}
        powers: dict[tuple[str, int], MultiPoly] = {}

        def power(name: str, e: int) -> MultiPoly:
            key = (name, e)
            if key not in powers:
                powers[key] = images[name] if e == 1 else power(name, e - 1) * images[name]
            return powers[key]

        padding = (0,) * (len(result_variables) - len(kept))
        result = MultiPoly._make(result_variables, {})
        for exps, coefficient in self.terms.items():
            rest = tuple(exps[p] for p in kept_positions) + padding
            piece = MultiPoly._make(result_variables, {rest: coefficient})
            for position, name in mapped_positions:
                if exps[position]:
                    piece = piece * power(name, exps[position])
            result = result + piece
        return result

    # evaluation

    def evaluate(self, point: Mapping[str, Scalar]) -> Fraction:
        value = self.compose({v: Fraction(point[v]) for v in self.used_variables()})
        return value.constant_term()

    def eval_float(self, point: Mapping[str, float]) -> float:
        used = self.used_variables()
        missing = [v for v in used if v not in point]
        if missing:
            raise KeyError(f"unbound variables {missing}")
        poly = self.extended(used)
        values = [float(point[v]) for v in used]
        return _horner({e: float(c) for e, c in poly.terms.items()}, values, 0)

    # introspection

    def degree_in(self, name: str) -> int:
        if name not in self.variables or not self.terms:
            return 0
        index = self.variables.index(name)
        return max(exps[index] for exps in self.terms)

    def total_degree(self) -> int:
        return max((sum(exps) for exps in self.terms), default=0)

    def max_abs_coefficient(self) -> Fraction:
        return max((abs(c) for c in self.terms.values()), default=Fraction(0))

    # wire format

    def to_json(self, variables: Sequence[str]) -> list[dict]:
        aligned = self.extended(tuple(variables))
        return [
            {"coef": format_rational(c), "exps": list(exps)}
            for exps, c in sorted(aligned.terms.items())
        ]

    @classmethod
    def from_json(cls, data: list[dict], variables: Sequence[str]) -> MultiPoly:
        terms: dict[Exponents, Fraction] = {}
        for term in data:
            exps = tuple(int(e) for e in term["exps"])
            if len(exps) != len(variables):
                raise RationalFormatError(
                    f"exponent vector {list(exps)} does not match {list(variables)}"
                )
            terms[exps] = terms.get(exps, Fraction(0)) + parse_rational(term["coef"])
        return cls(tuple(variables), terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for exps, coefficient in sorted(self.terms.items(), reverse=True):
            factors = [
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.variables, exps)
                if e
            ]
            if not factors:
                pieces.append(str(coefficient))
            elif coefficient == 1:
                pieces.append("*".join(factors))
            elif coefficient == -1:
                pieces.append("-" + "*".join(factors))
            else:
                pieces.append(f"{coefficient}*" + "*".join(factors))
        return " + ".join(pieces).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"MultiPoly({self})"


def _horner(terms: dict[Exponents, float], values: Sequence[float], index: int) -> float:
    if index == len(values):
        return sum(terms.values())
    buckets: dict[int, dict[Exponents, float]] = {}
    for exps, coefficient in terms.items():
        buckets.setdefault(exps[index], {})[exps] = coefficient
    if not buckets:
        return 0.0
    accumulator = 0.0
    for e in range(max(buckets), -1, -1):
        inner = buckets.get(e)
        accumulator = accumulator * values[index]
        if inner:
            accumulator += _horner(inner, values, index + 1)
    return accumulator
