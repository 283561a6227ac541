"""
Concrete bases of l1^n and certificates built on them.

  prop1_block / prop1_direct_sum   the (1/5, 2) family whose first vector has
                                   sup-norm 1/n, and its block-diagonal sums
  thm2_check                       k1 >= inf ||x_n||_2 / (K sqrt 2) for normalized bases
  fact2_check                      ||sum a_i x_i||_1 >= (1/(C sqrt 2)) sum |a_i| ||x_i||_2
  interpolation_check              ||v||_p^p <= ||v||_inf^(p-1) ||v||_1
  random_basis / perturb_basis     seeded generators for the verification suites

sqrt(2) and the l2 norms are never materialized: certificates compare squares,
and sums of square roots are replaced by certified rational upper bounds.
"""
import logging
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

try:
    from . import config
    from .seq_core import (
        BasisError, DimensionMismatch, PNorm, NormValue, SingularMatrix, Vector,
        as_scalar, certified_power, certified_root, l1_norm, l2_squared, linf_norm,
        lp_norm, to_decimal,
    )
    from .basis_constants import (
        Basis, DualSystem, coefficient_functionals, equivalence_constants,
        unconditional_constant,
    )
except ImportError:
    import config
    from seq_core import (
        BasisError, DimensionMismatch, PNorm, NormValue, SingularMatrix, Vector,
        as_scalar, certified_power, certified_root, l1_norm, l2_squared, linf_norm,
        lp_norm, to_decimal,
    )
    from basis_constants import (
        Basis, DualSystem, coefficient_functionals, equivalence_constants,
        unconditional_constant,
    )

logger = logging.getLogger(__name__)

Seed = Union[int, Sequence[int]]


class NotNormalized(BasisError):
    def __init__(self, norms: Sequence[Fraction]):
        self.norms = tuple(norms)
        bad = [j + 1 for j, v in enumerate(self.norms) if v != 1]
        super().__init__(f"basis is not normalized in l1: vectors {bad} have norm != 1")


class GenerationFailed(BasisError):
    def __init__(self, attempts: int, mode: str):
        self.attempts = attempts
        super().__init__(f"{mode}: {attempts} consecutive singular draws")


class RandomMode(str, Enum):
    NEAR_STANDARD = "near_standard"
    DENSE = "dense"
    GRID = "grid"
    SIGNED_PERMUTATION = "signed_permutation"


# =========================================================================
# (1/5, 2) construction family
# =========================================================================
@dataclass(frozen=True)
class Prop1Block:
    n: int
    basis: Basis
    normalized: bool
    sup_norm_witness: Fraction   # max_i |x_1(i)|


@dataclass(frozen=True)
class Prop1Sum:
    """
    Finite section of the infinite block-diagonal basis. `basis` is only
    assembled when the total dimension fits the inversion cap.
    """
    block_sizes: Tuple[int, ...]
    dimension: int
    sup_norm_witness: Fraction
    k1: Fraction
    k2: Fraction
    basis: Optional[Basis]


def _prop1_vectors(n: int) -> List[Vector]:
    first = Vector((Fraction(1, n),) * n)
    return [first] + [Vector.unit(n, 0) + Vector.unit(n, i) for i in range(1, n)]


def prop1_functionals(n: int) -> DualSystem:
    """Closed-form coefficient functionals of the unnormalized block."""
    d = n - 2
    rows = [Vector((Fraction(-n, d),) + (Fraction(n, d),) * (n - 1))]
    for j in range(1, n):
        coords = [Fraction(-1, d)] * n
        coords[0] = Fraction(1, d)
        coords[j] = Fraction(n - 3, d)
        rows.append(Vector(tuple(coords)))
    return DualSystem(tuple(rows))


def prop1_expected_constants(n: int) -> Tuple[Fraction, Fraction]:
    """(k1, k2): the column sums of the inverse are (2n-1)/(n-2) and (3n-5)/(n-2)."""
    return Fraction(n - 2, max(2 * n - 1, 3 * n - 5)), Fraction(2)


def prop1_block(n: int, normalized: bool = False) -> Prop1Block:
    if n < 3:
        raise ValueError(f"the construction needs n > 2, got {n}")
    basis = Basis.from_vectors(_prop1_vectors(n))

    # self-checks against the closed forms
    if coefficient_functionals(basis) != prop1_functionals(n):
        raise BasisError(f"n={n}: functionals differ from the closed form")
    witness = linf_norm(basis.vectors[0])
    if witness != Fraction(1, n):
        raise BasisError(f"n={n}: max |x_1(i)| = {witness}, expected 1/{n}")
    consts = equivalence_constants(basis)
    if (consts.k1, consts.k2) != prop1_expected_constants(n) or consts.k1 < Fraction(1, 5):
        raise BasisError(f"n={n}: constants ({consts.k1}, {consts.k2}) differ from the closed form")

    if normalized:
        basis = basis.normalized()
    return Prop1Block(n=n, basis=basis, normalized=normalized, sup_norm_witness=linf_norm(basis.vectors[0]))


def prop1_direct_sum(block_sizes: Sequence[int], blocks: Optional[Mapping[int, Prop1Block]] = None) -> Prop1Sum:
    """`blocks` may carry unnormalized blocks already built, keyed by size."""
    sizes = tuple(int(s) for s in block_sizes)
    if not sizes:
        raise ValueError("block_sizes must not be empty")
    if min(sizes) < 3:
        raise ValueError(f"every block needs size > 2, got {sizes}")
    dim = sum(sizes)

    k1s, k2s, witnesses = [], [], []
    blocks = blocks or {}
    for s in sorted(set(sizes)):
        block = blocks.get(s)
        if block is None or block.normalized:
            block = prop1_block(s)
        consts = equivalence_constants(block.basis)
        k1s.append(consts.k1)
        k2s.append(consts.k2)
        witnesses.append(block.sup_norm_witness)

    basis = None
    if dim <= config.INVERSION_CAP:
        columns, offset = [], 0
        for s in sizes:
            for v in _prop1_vectors(s):
                coords = [Fraction(0)] * dim
                coords[offset:offset + s] = v.coords
                columns.append(Vector(tuple(coords)))
            offset += s
        basis = Basis.from_vectors(columns)
    else:
        logger.info(f"Direct sum of dimension {dim} exceeds the inversion cap; reporting blockwise values only")
    return Prop1Sum(block_sizes=sizes, dimension=dim, sup_norm_witness=min(witnesses),
                    k1=min(k1s), k2=max(k2s), basis=basis)


# =========================================================================
# (k,1)-equivalence and Khintchine-type certificates
# =========================================================================
@dataclass(frozen=True)
class Thm2Certificate:
    K: Fraction
    inf_l2_sq: Fraction
    k_sq_scaled: Fraction      # inf ||x_n||_2^2 / (2 K^2)
    k1_actual: Fraction
    k2_actual: Fraction
    holds: bool


@dataclass(frozen=True)
class Fact2Certificate:
    constant: Fraction          # C, the unconditional constant used
    lhs_sq_scaled: Fraction     # 2 C^2 ||sum a_i x_i||_1^2
    rhs_lower: Fraction         # bounds of sum |a_i| ||x_i||_2
    rhs_upper: Fraction
    rhs_display: Decimal
    holds: bool


@dataclass(frozen=True)
class InterpolationCertificate:
    p: PNorm
    lhs: NormValue              # ||v||_p^p
    rhs_lower: Fraction         # bounds of ||v||_inf^(p-1) ||v||_1
    rhs_upper: Fraction
    holds: bool
    equality: bool


def thm2_check(b: Basis, cap: Optional[int] = None, force: bool = False,
               workers: Optional[int] = None) -> Thm2Certificate:
    norms = [l1_norm(x) for x in b.vectors]
    if any(v != 1 for v in norms):
        raise NotNormalized(norms)
    K = unconditional_constant(b, cap=cap, force=force, workers=workers).value
    inf_l2_sq = min(l2_squared(x) for x in b.vectors)
    k_sq_scaled = inf_l2_sq / (2 * K * K)
    consts = equivalence_constants(b)
    holds = consts.k1 ** 2 >= k_sq_scaled and consts.k2 == 1
    if not holds:
        logger.error(f"(k,1)-equivalence certificate failed: k1^2={consts.k1 ** 2}, k^2={k_sq_scaled}, k2={consts.k2}")
    return Thm2Certificate(K=K, inf_l2_sq=inf_l2_sq, k_sq_scaled=k_sq_scaled,
                           k1_actual=consts.k1, k2_actual=consts.k2, holds=holds)


def fact2_check(b: Basis, alphas: Sequence, constant: Optional[Fraction] = None,
                digits: Optional[int] = None, cap: Optional[int] = None,
                workers: Optional[int] = None) -> Fact2Certificate:
    """
    Checks 2 C^2 ||sum a_i x_i||_1^2 >= (sum |a_i| ||x_i||_2)^2, with the
    right side replaced by its certified upper bound. Pass `constant` to
    reuse one enumeration across many coefficient vectors.
    """
    alphas = [as_scalar(a) for a in alphas]
    if len(alphas) > b.n:
        raise DimensionMismatch(b.n, len(alphas), "coefficient count")
    alphas += [Fraction(0)] * (b.n - len(alphas))
    C = constant if constant is not None else unconditional_constant(b, cap=cap, workers=workers).value

    total = Vector.zeros(b.n)
    lo, hi = Fraction(0), Fraction(0)
    for a, x in zip(alphas, b.vectors):
        if not a:
            continue
        total = total + x.scale(a)
        r_lo, r_hi = certified_root(l2_squared(x), 2, digits)
        lo += abs(a) * r_lo
        hi += abs(a) * r_hi
    lhs = 2 * C * C * l1_norm(total) ** 2
    return Fact2Certificate(constant=C, lhs_sq_scaled=lhs, rhs_lower=lo, rhs_upper=hi,
                            rhs_display=to_decimal((lo + hi) / 2), holds=lhs >= hi * hi)


def interpolation_check(v: Vector, p, digits: Optional[int] = None) -> InterpolationCertificate:
    p = PNorm.parse(p)
    if p.is_infinite or p.p <= 1:
        raise ValueError(f"interpolation needs a finite p > 1, got {p}")
    digits = digits or config.CERTIFIED_DIGITS
    lhs = lp_norm(v, p, digits=digits)
    M, S = linf_norm(v), l1_norm(v)
    if p.is_integer:
        rhs = M ** (p.p.numerator - 1) * S
        rhs_lo = rhs_hi = rhs
    else:
        r_lo, r_hi = certified_power(M, p.p - 1, digits)
        rhs_lo, rhs_hi = r_lo * S, r_hi * S
    equality = all(x == 0 or abs(x) == M for x in v)
    if M == 0:
        return InterpolationCertificate(p, lhs, rhs_lo, rhs_hi, True, True)

    if p.is_integer:
        holds = lhs.power <= rhs_lo
    else:
        # divide by M^p: sum w_i^p <= sum w_i with w_i = |v_i|/M in [0, 1]
        holds = True
        for x in v:
            w = abs(x) / M
            if w in (0, 1):
                continue
            places = digits
            upper = certified_power(w, p.p, places)[1]
            while upper > w and places < 8 * digits:
                places *= 2
                upper = certified_power(w, p.p, places)[1]
            holds = holds and upper <= w
    return InterpolationCertificate(p, lhs, rhs_lo, rhs_hi, holds, equality)


# =========================================================================
# Random bases
# =========================================================================
def _rng(seed: Optional[Seed], rng: Optional[np.random.Generator]) -> np.random.Generator:
    if rng is not None:
        return rng
    return np.random.default_rng(config.DEFAULT_SEED if seed is None else seed)


def _random_direction(n: int, rng: np.random.Generator) -> Vector:
    g = config.GRID_NUMERATOR
    coords = [int(c) for c in rng.integers(-g, g + 1, size=n)]
    if not any(coords):
        coords[int(rng.integers(0, n))] = 1
    return Vector(tuple(coords))


def perturb_basis(x: Basis, radii: Sequence, rng: np.random.Generator) -> List[Vector]:
    """y_j = x_j + w_j with ||w_j||_1 = radii[j] exactly."""
    if len(radii) != x.n:
        raise DimensionMismatch(x.n, len(radii), "radius count")
    out = []
    for xj, r in zip(x.vectors, radii):
        r = as_scalar(r)
        u = _random_direction(x.n, rng)
        out.append(xj + u.scale(r / l1_norm(u)) if r else xj)
    return out


def _draw(n: int, mode: RandomMode, radius: Fraction, rng: np.random.Generator) -> List[Vector]:
    if mode is RandomMode.SIGNED_PERMUTATION:
        perm = [int(k) for k in rng.permutation(n)]
        signs = [1 if s else -1 for s in rng.integers(0, 2, size=n)]
        return [Vector.unit(n, perm[j], signs[j]) for j in range(n)]
    if mode is RandomMode.NEAR_STANDARD:
        out = []
        for j in range(n):
            t = Fraction(int(rng.integers(1, 100)), 100)
            u = _random_direction(n, rng)
            out.append(Vector.unit(n, j) + u.scale(radius * t / l1_norm(u)))
        return out
    if mode is RandomMode.GRID:
        values = [as_scalar(v) for v in config.GRID_VALUES]
        idx = rng.integers(0, len(values), size=(n, n))
        return [Vector(tuple(values[int(k)] for k in col)) for col in idx]
    g, d = config.GRID_NUMERATOR, config.GRID_DENOMINATOR
    nums = rng.integers(-g, g + 1, size=(n, n))
    dens = rng.integers(1, d + 1, size=(n, n))
    return [Vector(tuple(Fraction(int(a), int(b)) for a, b in zip(nc, dc))) for nc, dc in zip(nums, dens)]


def random_basis(n: int, seed: Optional[Seed] = None, mode: Union[RandomMode, str] = RandomMode.DENSE,
                 radius=None, normalized: bool = False,
                 rng: Optional[np.random.Generator] = None) -> Basis:
    """
    Deterministic given (n, seed, mode). Singular draws are rejected and
    redrawn; after config.SINGULAR_RETRIES rejections GenerationFailed is raised.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    mode = RandomMode(mode)
    radius = as_scalar(radius if radius is not None else config.NEAR_STANDARD_RADIUS)
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    gen = _rng(seed, rng)
    for _ in range(config.SINGULAR_RETRIES):
        try:
            basis = Basis.from_vectors(_draw(n, mode, radius, gen))
        except SingularMatrix:
            continue
        return basis.normalized() if normalized else basis
    raise GenerationFailed(config.SINGULAR_RETRIES, mode.value)
