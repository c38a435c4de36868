"""
Exact arithmetic for Q/Z phases and cyclotomic numbers
Gauss sums, modular data and partition functions are carried as CycloValue;
closed forms r·√m·ζ₈ˢ are recognized as EighthRootForm
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import NotEighthRootForm, SingularMatrix, ShapeMismatch

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


def lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if hasattr(value, "__index__"):
        return Fraction(int(value))
    return Fraction(value)


def parse_fraction(text: Union[str, int], require_reduced: bool = False) -> Fraction:
    """Parse "p/q" (or an integer) into a Fraction."""
    if isinstance(text, int):
        return Fraction(text)
    raw = str(text).strip()
    if "/" not in raw:
        return Fraction(int(raw))
    num_text, den_text = raw.split("/", 1)
    num, den = int(num_text), int(den_text)
    if den <= 0:
        raise ValueError(f"Denominator must be positive in {raw!r}")
    if require_reduced and math.gcd(num, den) != 1:
        raise ValueError(f"Fraction {raw!r} is not in lowest terms")
    return Fraction(num, den)


def format_fraction(value: Rational) -> str:
    value = _as_fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, order=True)
class PhaseQZ:
    """An element a of Q/Z with 0 <= a < 1, standing for e(a) = exp(2πia)."""

    value: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "value", _as_fraction(self.value) % 1)

    @classmethod
    def of(cls, value) -> "PhaseQZ":
        if isinstance(value, PhaseQZ):
            return value
        if isinstance(value, str):
            return cls(parse_fraction(value))
        return cls(_as_fraction(value))

    def __add__(self, other) -> "PhaseQZ":
        return PhaseQZ(self.value + PhaseQZ.of(other).value)

    __radd__ = __add__

    def __neg__(self) -> "PhaseQZ":
        return PhaseQZ(-self.value)

    def __sub__(self, other) -> "PhaseQZ":
        return PhaseQZ(self.value - PhaseQZ.of(other).value)

    def __rsub__(self, other) -> "PhaseQZ":
        return PhaseQZ(PhaseQZ.of(other).value - self.value)

    def __mul__(self, k: int) -> "PhaseQZ":
        return PhaseQZ(self.value * k)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.value == 0

    def to_cyclo(self) -> "CycloValue":
        return CycloValue.root_of_unity(self.value)

    def __str__(self) -> str:
        return format_fraction(self.value)


# ---------------------------------------------------------------------------
# Cyclotomic polynomials
# ---------------------------------------------------------------------------

def _divisors(n: int) -> List[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _exact_division(numerator: Sequence[int], divisor: Sequence[int]) -> List[int]:
    """Divide integer polynomials (constant term first) by a monic divisor with zero remainder."""
    rest = list(numerator)
    width = len(divisor)
    quotient = [0] * (len(rest) - width + 1)
    for i in range(len(quotient) - 1, -1, -1):
        c = rest[i + width - 1]
        quotient[i] = c
        if c:
            for j, d in enumerate(divisor):
                rest[i + j] -= c * d
    if any(rest[: width - 1]):
        raise ArithmeticError("cyclotomic division left a remainder")
    return quotient


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> Tuple[int, ...]:
    """Coefficients of Φ_n, constant term first: x^n − 1 divided by Φ_d for every proper divisor d."""
    numerator = [-1] + [0] * (n - 1) + [1]
    for d in _divisors(n)[:-1]:
        numerator = _exact_division(numerator, cyclotomic_polynomial(d))
    return tuple(numerator)


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    return len(cyclotomic_polynomial(n)) - 1


@lru_cache(maxsize=None)
def _power_reduction(n: int) -> Tuple[Tuple[int, ...], ...]:
    """Row k holds x^k mod Φ_n in the power basis 1, x, ..., x^{φ(n)−1}, for 0 <= k < n."""
    phi_poly = cyclotomic_polynomial(n)
    degree = len(phi_poly) - 1
    current = [0] * degree
    current[0] = 1
    rows = []
    for _ in range(n):
        rows.append(tuple(current))
        top = current[-1]
        current = [0] + current[:-1]
        if top:
            for j in range(degree):
                current[j] -= top * phi_poly[j]
    return tuple(rows)


@lru_cache(maxsize=None)
def reduction_matrix(n: int) -> np.ndarray:
    matrix = np.array(_power_reduction(n), dtype=np.int64)
    matrix.setflags(write=False)
    return matrix


# ---------------------------------------------------------------------------
# Cyclotomic numbers
# ---------------------------------------------------------------------------

class CycloValue:
    """Exact element Σ c_k ζ_N^k of Q(ζ_N), kept reduced modulo Φ_N."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Sequence[Rational]):
        if order < 1:
            raise ValueError(f"Order must be positive, got {order}")
        if len(coeffs) != euler_phi(order):
            raise ShapeMismatch(
                f"Order {order} needs {euler_phi(order)} coefficients, got {len(coeffs)}"
            )
        self.order = order
        self.coeffs = tuple(_as_fraction(c) for c in coeffs)

    @classmethod
    def from_counts(cls, order: int, counts: Union[Mapping[int, Rational], Sequence[Rational]]) -> "CycloValue":
        """Reduce Σ counts[k]·ζ_order^k (any integer k) to canonical form."""
        items = counts.items() if isinstance(counts, Mapping) else enumerate(counts)
        table = _power_reduction(order)
        acc = [Fraction(0)] * euler_phi(order)
        for k, c in items:
            c = _as_fraction(c)
            if not c:
                continue
            for j, r in enumerate(table[int(k) % order]):
                if r:
                    acc[j] += c * r
        return cls(order, acc)

    @classmethod
    def rational(cls, value: Rational) -> "CycloValue":
        return cls(1, [_as_fraction(value)])

    @classmethod
    def root_of_unity(cls, phase) -> "CycloValue":
        phase = PhaseQZ.of(phase).value
        return cls.from_counts(phase.denominator, {phase.numerator: 1})

    @classmethod
    def from_phases(cls, phases: Iterable) -> "CycloValue":
        """Exact Σ e(a) over an iterable of phases."""
        values = [PhaseQZ.of(p).value for p in phases]
        order = 1
        for v in values:
            order = lcm(order, v.denominator)
        counts: Dict[int, int] = {}
        for v in values:
            k = v.numerator * (order // v.denominator)
            counts[k] = counts.get(k, 0) + 1
        return cls.from_counts(order, counts)

    def lift(self, order: int) -> "CycloValue":
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"Cannot lift order {self.order} to {order}")
        step = order // self.order
        return CycloValue.from_counts(order, {k * step: c for k, c in enumerate(self.coeffs)})

    def _common(self, other) -> Tuple["CycloValue", "CycloValue"]:
        other = as_cyclo(other)
        if other.order == self.order:
            return self, other
        order = lcm(self.order, other.order)
        return self.lift(order), other.lift(order)

    def __add__(self, other) -> "CycloValue":
        a, b = self._common(other)
        return CycloValue(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> "CycloValue":
        return CycloValue(self.order, [-c for c in self.coeffs])

    def __sub__(self, other) -> "CycloValue":
        return self + (-as_cyclo(other))

    def __rsub__(self, other) -> "CycloValue":
        return as_cyclo(other) + (-self)

    def __mul__(self, other) -> "CycloValue":
        if isinstance(other, (int, Fraction)):
            return CycloValue(self.order, [c * other for c in self.coeffs])
        a, b = self._common(other)
        counts: Dict[int, Fraction] = {}
        for i, x in enumerate(a.coeffs):
            if not x:
                continue
            for j, y in enumerate(b.coeffs):
                if y:
                    counts[i + j] = counts.get(i + j, Fraction(0)) + x * y
        return CycloValue.from_counts(a.order, counts)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "CycloValue":
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        return self * as_cyclo(other).inverse()

    def __rtruediv__(self, other) -> "CycloValue":
        return as_cyclo(other) * self.inverse()

    def __pow__(self, exponent: int) -> "CycloValue":
        base = self if exponent >= 0 else self.inverse()
        exponent = abs(exponent)
        result = CycloValue.rational(1)
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other) -> bool:
        try:
            a, b = self._common(other)
        except TypeError:
            return NotImplemented
        return a.coeffs == b.coeffs

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    def galois(self, j: int) -> "CycloValue":
        """Image under ζ_N ↦ ζ_N^j."""
        return CycloValue.from_counts(self.order, {(k * j) % self.order: c for k, c in enumerate(self.coeffs)})

    def conjugate(self) -> "CycloValue":
        return self.galois(-1)

    def inverse(self) -> "CycloValue":
        """x⁻¹ = Π_{σ≠1} σ(x) / N(x), the field norm N(x) being rational."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero cyclotomic number")
        if self.is_rational():
            return CycloValue.rational(1 / self.coeffs[0])
        partial = CycloValue.rational(1)
        for j in range(2, self.order):
            if math.gcd(j, self.order) == 1:
                partial = partial * self.galois(j)
        norm = (self * partial).to_fraction()
        return partial * (1 / norm)

    def to_complex(self) -> complex:
        total = 0j
        for k, c in enumerate(self.coeffs):
            if c:
                angle = 2 * math.pi * k / self.order
                total += float(c) * complex(math.cos(angle), math.sin(angle))
        return total

    def render(self) -> Dict:
        return {
            "order": self.order,
            "coeffs": {str(k): format_fraction(c) for k, c in enumerate(self.coeffs) if c},
            "float": float_shadow(self.to_complex()),
        }

    def __repr__(self) -> str:
        terms = [f"{format_fraction(c)}·ζ{self.order}^{k}" for k, c in enumerate(self.coeffs) if c]
        return "CycloValue(" + (" + ".join(terms) or "0") + ")"


def as_cyclo(value) -> CycloValue:
    if isinstance(value, CycloValue):
        return value
    if isinstance(value, PhaseQZ):
        return value.to_cyclo()
    if isinstance(value, (int, Fraction)) or hasattr(value, "__index__"):
        return CycloValue.rational(_as_fraction(value))
    raise TypeError(f"Cannot interpret {value!r} as a cyclotomic number")


def float_shadow(z: complex) -> List[float]:
    return [round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0]


def cyclo_combine(x: CycloValue, y: CycloValue, op: str) -> CycloValue:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    raise ValueError(f"Unknown operation {op!r}; expected 'add' or 'mul'")


# ---------------------------------------------------------------------------
# Closed forms r·√m·ζ₈ˢ
# ---------------------------------------------------------------------------

def squarefree_split(n: int) -> Tuple[int, int]:
    """Return (s, m) with n = s²·m and m square-free."""
    if n < 1:
        raise ValueError(f"Expected a positive integer, got {n}")
    s, m, rest, p = 1, 1, n, 2
    while p * p <= rest:
        while rest % (p * p) == 0:
            rest //= p * p
            s *= p
        if rest % p == 0:
            rest //= p
            m *= p
        p += 1
    return s, m * rest


def _prime_factors(m: int) -> List[int]:
    primes, p = [], 2
    while p * p <= m:
        if m % p == 0:
            primes.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        primes.append(m)
    return primes


@lru_cache(maxsize=None)
def sqrt_cyclo(m: int) -> CycloValue:
    """√m for square-free m as a cyclotomic number, built from quadratic Gauss sums."""
    result = CycloValue.rational(1)
    for p in _prime_factors(m):
        if p == 2:
            root = CycloValue.from_counts(8, {1: 1, 7: 1})
        else:
            gauss = CycloValue.from_counts(p, _square_counts(p))
            root = gauss if p % 4 == 1 else gauss * CycloValue.from_counts(4, {3: 1})
        result = result * root
    return result


def _square_counts(p: int) -> Dict[int, int]:
    counts: Dict[int, int] = {}
    for k in range(p):
        r = (k * k) % p
        counts[r] = counts.get(r, 0) + 1
    return counts


@dataclass(frozen=True)
class EighthRootForm:
    """The number rational·radicand^{half_power/2}·ζ₈^eighth in normal form."""

    rational: Fraction
    radicand: int = 1
    half_power: int = 0
    eighth: int = 0

    def __post_init__(self):
        rational = _as_fraction(self.rational)
        if rational <= 0:
            raise ValueError(f"rational part must be positive, got {rational}")
        s, m = squarefree_split(int(self.radicand))
        e = int(self.half_power)
        rational *= Fraction(s) ** e
        rational *= Fraction(m) ** (e // 2)
        e %= 2
        if m == 1 or e == 0:
            m, e = 1, 0
        object.__setattr__(self, "rational", rational)
        object.__setattr__(self, "radicand", m)
        object.__setattr__(self, "half_power", e)
        object.__setattr__(self, "eighth", int(self.eighth) % 8)

    @classmethod
    def sqrt_power(cls, base: int, exponent: int, eighth: int = 0) -> "EighthRootForm":
        """(√base)^exponent·ζ₈^eighth."""
        return cls(Fraction(1), base, exponent, eighth)

    def __mul__(self, other: "EighthRootForm") -> "EighthRootForm":
        m1 = self.radicand if self.half_power else 1
        m2 = other.radicand if other.half_power else 1
        return EighthRootForm(
            self.rational * other.rational,
            m1 * m2,
            1 if (self.half_power or other.half_power) else 0,
            self.eighth + other.eighth,
        )

    def conjugate(self) -> "EighthRootForm":
        return EighthRootForm(self.rational, self.radicand, self.half_power, -self.eighth)

    def to_cyclo(self) -> CycloValue:
        value = CycloValue.rational(self.rational) * CycloValue.root_of_unity(Fraction(self.eighth, 8))
        if self.half_power:
            value = value * sqrt_cyclo(self.radicand)
        return value

    def to_complex(self) -> complex:
        magnitude = float(self.rational) * math.sqrt(self.radicand) ** self.half_power
        angle = 2 * math.pi * self.eighth / 8
        return magnitude * complex(math.cos(angle), math.sin(angle))

    def render(self) -> Dict:
        return {
            "rational": format_fraction(self.rational),
            "sqrt": self.radicand,
            "zeta8": self.eighth,
            "float": float_shadow(self.to_complex()),
        }


def recognize_eighthroot(x: CycloValue) -> EighthRootForm:
    """Write x as r·√m·ζ₈ˢ, or raise NotEighthRootForm."""
    x = as_cyclo(x)
    if x.is_zero():
        raise NotEighthRootForm("zero has no eighth-root form")
    modulus_sq = x * x.conjugate()
    if not modulus_sq.is_rational():
        raise NotEighthRootForm("|x|² is not rational", {"value": x.render()})
    value = modulus_sq.to_fraction()
    s, m = squarefree_split(value.numerator * value.denominator)
    rational = Fraction(s, value.denominator)
    base = CycloValue.rational(rational)
    if m > 1:
        base = base * sqrt_cyclo(m)
    for eighth in range(8):
        if base * CycloValue.root_of_unity(Fraction(eighth, 8)) == x:
            return EighthRootForm(rational, m, 1 if m > 1 else 0, eighth)
    raise NotEighthRootForm("phase is not an eighth root of unity", {"value": x.render()})


# ---------------------------------------------------------------------------
# Matrices over ℤ[ζ_N]
# ---------------------------------------------------------------------------

class CycloMatrix:
    """Integer matrix over ℤ[ζ_N]; data[i, j, k] is the coefficient of ζ_N^k in entry (i, j)."""

    def __init__(self, order: int, data: np.ndarray):
        self.order = order
        self.data = np.asarray(data, dtype=np.int64)

    @classmethod
    def from_exponents(cls, order: int, exponents) -> "CycloMatrix":
        exps = np.asarray(exponents, dtype=np.int64) % order
        rows, cols = exps.shape
        data = np.zeros((rows, cols, order), dtype=np.int64)
        data[np.arange(rows)[:, None], np.arange(cols)[None, :], exps] = 1
        return cls(order, data)

    @classmethod
    def from_permutation(cls, order: int, targets: Sequence[int]) -> "CycloMatrix":
        """Row i has a single 1 in column targets[i]."""
        size = len(targets)
        data = np.zeros((size, size, order), dtype=np.int64)
        data[np.arange(size), np.asarray(targets, dtype=np.int64), 0] = 1
        return cls(order, data)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    def times_monomial(self, exponents) -> "CycloMatrix":
        """Right product with the matrix whose (y, z) entry is ζ_N^{exponents[y, z]}."""
        n = self.order
        exps = np.asarray(exponents, dtype=np.int64) % n
        rows, inner = self.shape
        if exps.shape[0] != inner:
            raise ShapeMismatch(f"Cannot multiply {self.shape} by {exps.shape}")
        ks = np.arange(n)
        y_index = np.arange(inner)[:, None]
        out = np.zeros((rows, exps.shape[1], n), dtype=np.int64)
        for z in range(exps.shape[1]):
            shift = (ks[None, :] - exps[:, z][:, None]) % n
            out[:, z, :] = self.data[:, y_index, shift].sum(axis=1)
        return CycloMatrix(n, out)

    def scale(self, counts: Sequence[int]) -> "CycloMatrix":
        """Multiply every entry by Σ counts[k]·ζ_N^k."""
        n = self.order
        counts = np.asarray(counts, dtype=np.int64)
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        circulant = counts[idx]
        return CycloMatrix(n, self.data @ circulant)

    def lift(self, order: int) -> "CycloMatrix":
        if order == self.order:
            return self
        step = order // self.order
        data = np.zeros(self.data.shape[:2] + (order,), dtype=np.int64)
        data[:, :, ::step] = self.data
        return CycloMatrix(order, data)

    def reduced(self) -> np.ndarray:
        return self.data @ reduction_matrix(self.order)

    def entry(self, i: int, j: int) -> CycloValue:
        return CycloValue.from_counts(self.order, [int(c) for c in self.data[i, j]])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CycloMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        order = lcm(self.order, other.order)
        return bool(np.array_equal(self.lift(order).reduced(), other.lift(order).reduced()))

    __hash__ = None


# ---------------------------------------------------------------------------
# Exact linear algebra over cyclotomic numbers
# ---------------------------------------------------------------------------

def cyclo_rref(matrix: Sequence[Sequence]) -> Tuple[List[List[CycloValue]], List[int]]:
    """Reduced row echelon form and pivot columns."""
    rows = [[as_cyclo(v) for v in row] for row in matrix]
    if not rows:
        return rows, []
    pivots: List[int] = []
    r = 0
    for c in range(len(rows[0])):
        pivot = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero()), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def cyclo_rank(matrix: Sequence[Sequence]) -> int:
    return len(cyclo_rref(matrix)[1])


def cyclo_inverse(matrix: Sequence[Sequence]) -> List[List[CycloValue]]:
    size = len(matrix)
    augmented = [
        list(row) + [CycloValue.rational(1 if i == j else 0) for j in range(size)]
        for i, row in enumerate(matrix)
    ]
    reduced, pivots = cyclo_rref(augmented)
    if pivots[:size] != list(range(size)):
        raise SingularMatrix("matrix over the cyclotomic field is singular")
    return [row[size:] for row in reduced]


def cyclo_matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[List[CycloValue]]:
    if a and len(a[0]) != len(b):
        raise ShapeMismatch("inner dimensions differ")
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        out_row = []
        for j in range(cols):
            acc = CycloValue.rational(0)
            for k, v in enumerate(row):
                w = b[k][j]
                if not as_cyclo(v).is_zero() and not as_cyclo(w).is_zero():
                    acc = acc + as_cyclo(v) * as_cyclo(w)
            out_row.append(acc)
        out.append(out_row)
    return out
