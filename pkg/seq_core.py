"""
Exact scalars, vectors and matrices over the rationals, plus p-norm evaluation.

Every basis constant in this package is computed from the types here. Scalars
are fractions.Fraction; matrices hold read-only numpy object arrays of
Fractions, so numpy does the row/column bookkeeping while Python's rational
arithmetic keeps every entry exact.
"""
import logging
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext, ROUND_HALF_EVEN
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

try:
    from . import config
except ImportError:
    import config

logger = logging.getLogger(__name__)

Scalar = Fraction
ScalarLike = Union[Fraction, int, str, Decimal]


# =========================================================================
# Errors
# =========================================================================
class BasisError(Exception):
    """Root of every error raised by this package."""


class SingularMatrix(BasisError):
    def __init__(self, column: int):
        self.column = column
        super().__init__(f"matrix is singular: column {column + 1} depends on the columns before it")


class DimensionMismatch(BasisError):
    def __init__(self, expected: int, got: int, what: str = "dimension"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} mismatch: expected {expected}, got {got}")


class DimensionTooLarge(BasisError):
    def __init__(self, n: int, cap: int, cost: Optional[int] = None, what: str = "enumeration"):
        self.n = n
        self.cap = cap
        self.cost = cost
        msg = f"n={n} exceeds the {what} cap {cap}"
        if cost is not None:
            msg += f" (estimated {cost:,} exact operations); raise the cap explicitly"
        super().__init__(msg)


class InconclusiveComparison(BasisError):
    """Certified bounds overlap; more digits are needed to decide."""


# =========================================================================
# Scalars
# =========================================================================
def as_scalar(value: ScalarLike) -> Fraction:
    """
    Parse a value into an exact rational.
    Accepts Fraction, int, Decimal and strings like "3", "-2/7", "0.125", "1e-3".
    Floats are refused: they were rounded before we ever saw them.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a scalar: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"not a finite rational: {value!r}")
        return Fraction(value)
    if isinstance(value, float):
        raise ValueError(f"float {value!r} is not exact; pass a string such as '1/3'")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not an exact rational: {value!r}") from e
    raise ValueError(f"not a scalar: {value!r}")


def to_decimal(x: Fraction, precision: Optional[int] = None) -> Decimal:
    """Round-half-even decimal with `precision` significant digits."""
    precision = precision or config.DISPLAY_PRECISION
    with localcontext() as ctx:
        ctx.prec = precision
        ctx.rounding = ROUND_HALF_EVEN
        return Decimal(x.numerator) / Decimal(x.denominator)


def decimal_display(x: Fraction, precision: Optional[int] = None) -> str:
    return str(to_decimal(x, precision))


def integer_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) for integers n >= 0, k >= 1."""
    if n < 0 or k < 1:
        raise ValueError(f"integer_root needs n >= 0 and k >= 1, got n={n}, k={k}")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton from above; the start point is >= the true root
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def certified_root(value: Fraction, k: int, digits: Optional[int] = None) -> Tuple[Fraction, Fraction]:
    """
    Rational bounds (lower, upper) of value ** (1/k), at most 10**-digits apart.
    lower == upper exactly when value is the k-th power of a rational.
    """
    value = as_scalar(value)
    if value < 0:
        raise ValueError(f"root of a negative scalar: {value}")
    digits = digits or config.CERTIFIED_DIGITS
    num, den = value.numerator, value.denominator
    rn, rd = integer_root(num, k), integer_root(den, k)
    if rn ** k == num and rd ** k == den:
        exact = Fraction(rn, rd)
        return exact, exact
    scale = 10 ** digits
    r = integer_root(num * scale ** k // den, k)
    return Fraction(r, scale), Fraction(r + 1, scale)


def certified_power(value: Fraction, p: Fraction, digits: Optional[int] = None) -> Tuple[Fraction, Fraction]:
    """Bounds of |value| ** p for a positive rational p = a/b."""
    p = as_scalar(p)
    if p <= 0:
        raise ValueError(f"exponent must be positive, got {p}")
    base = abs(as_scalar(value)) ** p.numerator
    return certified_root(base, p.denominator, digits)


# =========================================================================
# Vectors
# =========================================================================
@dataclass(frozen=True)
class Vector:
    """A point of l1^n; coords[i] is the i-th coordinate x(i)."""
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        coords = tuple(as_scalar(c) for c in self.coords)
        if not coords:
            raise ValueError("a vector needs at least one coordinate")
        object.__setattr__(self, 'coords', coords)

    @classmethod
    def of(cls, *values: ScalarLike) -> "Vector":
        return cls(tuple(values))

    @classmethod
    def unit(cls, n: int, i: int, sign: int = 1) -> "Vector":
        return cls(tuple(Fraction(sign) if k == i else Fraction(0) for k in range(n)))

    @classmethod
    def zeros(cls, n: int) -> "Vector":
        return cls((Fraction(0),) * n)

    @property
    def n(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.coords)

    def __getitem__(self, i: int) -> Fraction:
        return self.coords[i]

    def _check(self, other: "Vector") -> None:
        if other.n != self.n:
            raise DimensionMismatch(self.n, other.n)

    def __add__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Vector":
        return Vector(tuple(-a for a in self.coords))

    def scale(self, c: ScalarLike) -> "Vector":
        c = as_scalar(c)
        return Vector(tuple(c * a for a in self.coords))

    def dot(self, other: "Vector") -> Fraction:
        self._check(other)
        return sum((a * b for a, b in zip(self.coords, other.coords)), Fraction(0))


# =========================================================================
# Matrices
# =========================================================================
def _frozen(rows) -> np.ndarray:
    arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            arr[i, j] = as_scalar(x)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Matrix:
    """
    Square matrix of exact scalars. Column j is the j-th basis vector, so a
    basis {x_j} is the matrix T with T e_j = x_j.
    """
    entries: np.ndarray

    def __post_init__(self):
        rows = [list(r) for r in self.entries]
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix must be square and nonempty")
        object.__setattr__(self, 'entries', _frozen(rows))

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[ScalarLike]]) -> "Matrix":
        return cls([list(r) for r in rows])

    @classmethod
    def from_columns(cls, columns: Sequence[Union[Vector, Sequence[ScalarLike]]]) -> "Matrix":
        cols = [list(c) for c in columns]
        n = len(cols)
        for c in cols:
            if len(c) != n:
                raise DimensionMismatch(n, len(c), "column length")
        return cls([[cols[j][i] for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def column(self, j: int) -> Vector:
        return Vector(tuple(self.entries[:, j]))

    def row(self, i: int) -> Vector:
        return Vector(tuple(self.entries[i, :]))

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self.n)]

    def rows(self) -> List[Vector]:
        return [self.row(i) for i in range(self.n)]

    def transpose(self) -> "Matrix":
        return Matrix(self.entries.T)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if other.n != self.n:
            raise DimensionMismatch(self.n, other.n)
        return Matrix(self.entries.dot(other.entries))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix) or other.n != self.n:
            return False
        return all(a == b for a, b in zip(self.entries.flat, other.entries.flat))

    __hash__ = None

    def tolist(self) -> List[List[Fraction]]:
        return [list(r) for r in self.entries]


def identity(n: int) -> Matrix:
    return Matrix([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])


def diagonal(values: Sequence[ScalarLike]) -> Matrix:
    n = len(values)
    return Matrix([[as_scalar(values[i]) if i == j else Fraction(0) for j in range(n)] for i in range(n)])


def _integer_rows(m: Matrix) -> Tuple[List[List[int]], List[int]]:
    """Row i of m as integers over a common denominator: m[i] = ints[i] / scales[i]."""
    ints, scales = [], []
    for row in m.entries:
        scale = math.lcm(*(x.denominator for x in row))
        ints.append([x.numerator * (scale // x.denominator) for x in row])
        scales.append(scale)
    return ints, scales


def invert(m: Matrix, cap: Optional[int] = None) -> Matrix:
    """
    Exact inverse by fraction-free Gauss-Jordan elimination.

    Each row of [m | I] is kept as integers over its own denominator, with
    the common content divided out after every update, so the inner loop
    is integer arithmetic only. Pivoting is partial, on the largest exact
    magnitude, ties to the lowest row.
    """
    cap = cap or config.INVERSION_CAP
    n = m.n
    if n > cap:
        raise DimensionTooLarge(n, cap, what="inversion")
    ints, scales = _integer_rows(m)
    work = np.empty((n, 2 * n), dtype=object)
    for i in range(n):
        work[i, :n] = ints[i]
        work[i, n:] = [scales[i] if j == i else 0 for j in range(n)]
    den = list(scales)   # actual row i = work[i] / den[i]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: Fraction(abs(work[r, col]), den[r]))
        if work[pivot, col] == 0:
            raise SingularMatrix(col)
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
            den[col], den[pivot] = den[pivot], den[col]
        lead, prow = work[col, col], work[col].copy()
        for r in range(n):
            f = work[r, col]
            if r == col or f == 0:
                continue
            row = lead * work[r] - f * prow
            d = den[r] * lead
            if d < 0:
                row, d = -row, -d
            g = math.gcd(d, *row.tolist())
            if g > 1:
                row, d = row // g, d // g
            work[r], den[r] = row, d
    return Matrix([[Fraction(work[i, n + j], work[i, i]) for j in range(n)] for i in range(n)])


def identity_defect(a: Matrix, b: Matrix) -> Optional[Tuple[int, int]]:
    """
    First (i, j) in row-major order where a @ b differs from the identity,
    or None. Rows of a and columns of b are brought to integers first.
    """
    if a.n != b.n:
        raise DimensionMismatch(a.n, b.n)
    a_ints, a_scales = _integer_rows(a)
    b_ints, b_scales = _integer_rows(b.transpose())
    prod = np.array(a_ints, dtype=object).dot(np.array(b_ints, dtype=object).T)
    for i in range(a.n):
        for j in range(a.n):
            if prod[i, j] != (a_scales[i] * b_scales[j] if i == j else 0):
                return i, j
    return None


def column_sums_l1(m: Matrix) -> List[Fraction]:
    out = []
    for j in range(m.n):
        col = m.entries[:, j]
        scale = math.lcm(*(x.denominator for x in col))
        out.append(Fraction(sum(abs(x.numerator) * (scale // x.denominator) for x in col), scale))
    return out


def argmax_column_l1(m: Matrix) -> Tuple[Fraction, int]:
    """(max column abs sum, lowest column index attaining it)."""
    sums = column_sums_l1(m)
    best = max(sums)
    return best, sums.index(best)


def operator_norm_l1(m: Matrix) -> Fraction:
    """Operator norm of m on l1^n: the largest absolute column sum."""
    return argmax_column_l1(m)[0]


# =========================================================================
# p-norms
# =========================================================================
@dataclass(frozen=True)
class PNorm:
    """Exponent of an l_p norm; p is None for p = infinity."""
    p: Optional[Fraction]

    def __post_init__(self):
        if self.p is not None:
            p = as_scalar(self.p)
            if p < 1:
                raise ValueError(f"p must be >= 1 or infinity, got {p}")
            object.__setattr__(self, 'p', p)

    @classmethod
    def parse(cls, value: Union["PNorm", ScalarLike]) -> "PNorm":
        if isinstance(value, PNorm):
            return value
        if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
            return cls(None)
        return cls(as_scalar(value))

    @property
    def is_infinite(self) -> bool:
        return self.p is None

    @property
    def is_integer(self) -> bool:
        return self.p is not None and self.p.denominator == 1

    def exponent(self) -> Fraction:
        """Exponent e with norm = stored ** (1/e); 1 for infinity."""
        return Fraction(1) if self.p is None else self.p

    def __str__(self) -> str:
        return "inf" if self.p is None else str(self.p)


INFINITY = PNorm(None)


@dataclass(frozen=True)
class NormValue:
    """
    A p-norm evaluated without rounding.
    For p = infinity the stored quantity is the norm; for finite p it is
    ||v||_p ** p. `power` is that quantity when exact (None otherwise) and
    [lower, upper] certified bounds of it (equal when exact). `display` is
    the decimal rendering of ||v||_p itself.
    """
    p: PNorm
    power: Optional[Fraction]
    lower: Fraction
    upper: Fraction
    display: Decimal

    @property
    def exact(self) -> bool:
        return self.power is not None


def _display_norm(lower: Fraction, upper: Fraction, p: PNorm, precision: int) -> Decimal:
    mid = (lower + upper) / 2
    with localcontext() as ctx:
        ctx.prec = precision + 5
        d = Decimal(mid.numerator) / Decimal(mid.denominator)
        if p.is_infinite or p.p == 1:
            out = d
        elif p.p == 2:
            out = d.sqrt()
        elif d == 0:
            out = d
        else:
            e = p.p
            out = d ** (Decimal(e.denominator) / Decimal(e.numerator))
        ctx.prec = precision
        ctx.rounding = ROUND_HALF_EVEN
        return +out


def lp_norm(v: Vector, p: Union[PNorm, ScalarLike], digits: Optional[int] = None,
            precision: Optional[int] = None) -> NormValue:
    """
    ||v||_1 and ||v||_inf are exact; for finite p > 1 the p-th power is exact
    when p is an integer and carried as certified bounds otherwise.
    """
    p = PNorm.parse(p)
    precision = precision or config.DISPLAY_PRECISION
    if p.is_infinite:
        m = max(abs(x) for x in v)
        return NormValue(p, m, m, m, _display_norm(m, m, p, precision))
    if p.is_integer:
        k = p.p.numerator
        power = sum((abs(x) ** k for x in v), Fraction(0))
        return NormValue(p, power, power, power, _display_norm(power, power, p, precision))
    lo, hi, exact = Fraction(0), Fraction(0), True
    for x in v:
        a, b = certified_power(x, p.p, digits)
        lo += a
        hi += b
        exact = exact and a == b
    return NormValue(p, lo if exact else None, lo, hi, _display_norm(lo, hi, p, precision))


def l1_norm(v: Vector) -> Fraction:
    return sum((abs(x) for x in v), Fraction(0))


def linf_norm(v: Vector) -> Fraction:
    return max(abs(x) for x in v)


def l2_squared(v: Vector) -> Fraction:
    return sum((x * x for x in v), Fraction(0))


def norm_le(a: NormValue, b: NormValue) -> bool:
    """
    Decide ||.||_a <= ||.||_b for norms evaluated with possibly different p.
    Both stored quantities are raised to a common integer power; exact inputs
    give an exact answer, bounded inputs raise InconclusiveComparison when
    the bounds overlap.
    """
    ea, eb = a.p.exponent(), b.p.exponent()
    # ||a|| = Qa ** (1/ea); raise both sides to ea.num * eb.num
    ka = ea.denominator * eb.numerator
    kb = eb.denominator * ea.numerator
    if a.exact and b.exact:
        return a.power ** ka <= b.power ** kb
    if a.upper ** ka <= b.lower ** kb:
        return True
    if a.lower ** ka > b.upper ** kb:
        return False
    raise InconclusiveComparison(f"cannot order l_{a.p} and l_{b.p} values at the current digits")
