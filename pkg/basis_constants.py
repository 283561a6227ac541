"""
Coefficient functionals, equivalence constants to the standard unit vector
basis, and the unconditional basis constant of a basis of l1^n.

A basis is the matrix T whose column j is x_j. Then:
  - the coefficient functionals x_j* are the rows of T^-1,
  - k2 = max_j ||x_j||_1 = ||T||,
  - 1/k1 = max_i sum_j |x_j*(i)| = ||T^-1||,
  - K = max over sign vectors eps of ||T D_eps T^-1||,
with every norm the l1^n -> l1^n operator norm (largest absolute column sum).
Both equivalence constants are attained, so they are optimal, not just valid.
"""
import logging
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

try:
    from . import config
    from .seq_core import (
        BasisError, DimensionMismatch, DimensionTooLarge, Matrix, SingularMatrix, Vector,
        argmax_column_l1, as_scalar, identity, identity_defect, invert, l1_norm, linf_norm,
    )
except ImportError:
    import config
    from seq_core import (
        BasisError, DimensionMismatch, DimensionTooLarge, Matrix, SingularMatrix, Vector,
        argmax_column_l1, as_scalar, identity, identity_defect, invert, l1_norm, linf_norm,
    )

logger = logging.getLogger(__name__)


# =========================================================================
# Domain types
# =========================================================================
@dataclass(frozen=True, eq=False)
class Basis:
    """
    n linearly independent vectors of l1^n, held as the columns of `matrix`.
    The inverse is computed once at construction unless a caller that already
    knows it exactly passes it in; a singular matrix raises SingularMatrix here.
    """
    matrix: Matrix
    labels: Optional[Tuple[str, ...]] = None
    inverse: Optional[Matrix] = field(default=None, repr=False)

    def __post_init__(self):
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.matrix.n:
                raise DimensionMismatch(self.matrix.n, len(labels), "label count")
            object.__setattr__(self, 'labels', labels)
        if self.inverse is None:
            object.__setattr__(self, 'inverse', invert(self.matrix))

    @classmethod
    def from_vectors(cls, vectors: Sequence[Vector], labels: Optional[Sequence[str]] = None) -> "Basis":
        return cls(Matrix.from_columns(vectors), tuple(labels) if labels else None)

    @classmethod
    def standard(cls, n: int) -> "Basis":
        return cls(identity(n))

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def vectors(self) -> List[Vector]:
        return self.matrix.columns()

    @property
    def is_normalized(self) -> bool:
        return all(l1_norm(x) == 1 for x in self.vectors)

    def normalized(self) -> "Basis":
        """Divide every vector by its exact l1 norm; row j of the inverse is multiplied by it."""
        norms = [l1_norm(x) for x in self.vectors]
        matrix = Matrix.from_columns([x.scale(1 / c) for x, c in zip(self.vectors, norms)])
        inverse = Matrix.from_rows([f.scale(c) for f, c in zip(self.inverse.rows(), norms)])
        return Basis(matrix, self.labels, inverse)

    def scaled(self, c) -> "Basis":
        c = as_scalar(c)
        if c == 0:
            raise SingularMatrix(0)
        return Basis(Matrix.from_columns([x.scale(c) for x in self.vectors]), self.labels,
                     Matrix.from_rows([f.scale(1 / c) for f in self.inverse.rows()]))

    def permuted(self, perm: Sequence[int], coordinates: bool = True) -> "Basis":
        """Reorder the vectors by perm (new j-th vector = old perm[j]); optionally the coordinates too."""
        current = self.vectors
        vectors = [current[k] for k in perm]
        if coordinates:
            vectors = [Vector(tuple(v[k] for k in perm)) for v in vectors]
        return Basis.from_vectors(vectors)

    def same_vectors(self, other: "Basis") -> bool:
        return self.matrix == other.matrix


@dataclass(frozen=True)
class DualSystem:
    """functionals[j] is x_j* in coordinates; functionals[j][i] = x_j*(i)."""
    functionals: Tuple[Vector, ...]

    @property
    def n(self) -> int:
        return len(self.functionals)

    def as_matrix(self) -> Matrix:
        return Matrix.from_rows([list(f) for f in self.functionals])


@dataclass(frozen=True)
class EquivalenceConstants:
    """
    Optimal (k1, k2): k1 ||sum a_i y_i|| <= ||sum a_i x_i|| <= k2 ||sum a_i y_i||.
    k1_witness: index i with k1 attained at the preimage of the unit vector e_i.
    k2_witness: index j with k2 attained at a = e_j.
    """
    k1: Fraction
    k2: Fraction
    k1_witness: int
    k2_witness: int
    provenance: str = "coefficient-functional formula (exact optimum)"


@dataclass(frozen=True)
class UnconditionalConstant:
    value: Fraction
    witness_signs: Tuple[int, ...]
    classes: int = 0
    provenance: str = "sign enumeration"


# =========================================================================
# Coefficient functionals and equivalence constants
# =========================================================================
def coefficient_functionals(b: Basis) -> DualSystem:
    """Rows of T^-1, checked to be biorthogonal to the basis."""
    defect = identity_defect(b.inverse, b.matrix)
    if defect is not None:
        j, i = defect
        raise BasisError(f"biorthogonality failed at x_{j + 1}*(x_{i + 1})")
    return DualSystem(tuple(b.inverse.rows()))


def equivalence_constants(b: Basis) -> EquivalenceConstants:
    k2, k2_at = argmax_column_l1(b.matrix)
    inv_norm, k1_at = argmax_column_l1(b.inverse)
    return EquivalenceConstants(k1=1 / inv_norm, k2=k2, k1_witness=k1_at, k2_witness=k2_at)


def relative_equivalence(x: Basis, y: Basis) -> EquivalenceConstants:
    """
    Optimal constants of {x_n} relative to {y_n} (both bases of the same l1^n):
    K2 = ||T_x T_y^-1||, K1 = 1 / ||T_y T_x^-1||.
    """
    if x.n != y.n:
        raise DimensionMismatch(x.n, y.n)
    k2, k2_at = argmax_column_l1(x.matrix @ y.inverse)
    inv_norm, k1_at = argmax_column_l1(y.matrix @ x.inverse)
    return EquivalenceConstants(k1=1 / inv_norm, k2=k2, k1_witness=k1_at, k2_witness=k2_at,
                                provenance="relative operator norms (exact optimum)")


def dual_norms(d: DualSystem) -> List[Fraction]:
    """||x_n*|| as a functional on l1^n, i.e. the l_inf norm of its row."""
    return [linf_norm(f) for f in d.functionals]


# =========================================================================
# Unconditional constant: sign enumeration
# =========================================================================
def _gray(index: int) -> int:
    return index ^ (index >> 1)


def signs_for(index: int, n: int) -> Tuple[int, ...]:
    """Sign vector of Gray-code class `index`; eps_1 is fixed to +1."""
    g = _gray(index)
    return (1,) + tuple(-1 if (g >> (j - 1)) & 1 else 1 for j in range(1, n))


def _sign_key(signs: Sequence[int]) -> Tuple[int, ...]:
    # +1 sorts before -1, so the all-ones vector is the smallest
    return tuple(0 if s > 0 else 1 for s in signs)


def _scan_range(t: np.ndarray, tinv: np.ndarray, start: int, stop: int):
    """
    Walk Gray-code classes [start, stop). Flipping eps_j changes
    T D T^-1 by the rank-one term -2 eps_j t_j r_j.
    """
    n = t.shape[0]
    signs = list(signs_for(start, n))
    outers = [np.multiply.outer(t[:, j], tinv[j, :]) for j in range(n)]
    m = (t * np.array(signs, dtype=object)).dot(tinv)
    best, best_key = None, None
    for index in range(start, stop):
        if index > start:
            j = (_gray(index) ^ _gray(index - 1)).bit_length()
            m = m - outers[j] * (2 * signs[j])
            signs[j] = -signs[j]
        value = max(np.abs(m).sum(axis=0))
        key = _sign_key(signs)
        if best is None or value > best or (value == best and key < best_key):
            best, best_key = value, key
    return best, best_key


def enumeration_cost(n: int) -> int:
    return 2 ** (n - 1) * n * n


def unconditional_constant(b: Basis, cap: Optional[int] = None, force: bool = False,
                           workers: Optional[int] = None) -> UnconditionalConstant:
    """
    K = max over the 2^(n-1) sign classes of ||T D_eps T^-1||.
    Ranges of Gray-code classes are split across workers; the reduction keeps
    the largest value and, among ties, the smallest sign key, so the result
    does not depend on the worker count.
    """
    cap = cap or config.ENUMERATION_CAP
    workers = workers or config.WORKERS
    n = b.n
    classes = 2 ** (n - 1)
    if n > cap:
        if not force:
            raise DimensionTooLarge(n, cap, enumeration_cost(n))
        logger.warning(f"Forcing sign enumeration past cap {cap}: {classes:,} classes, "
                       f"~{enumeration_cost(n):,} exact operations")
    t = np.array(b.matrix.entries, dtype=object)
    tinv = np.array(b.inverse.entries, dtype=object)

    workers = max(1, min(workers, classes))
    bounds = [classes * w // workers for w in range(workers + 1)]
    ranges = [(bounds[w], bounds[w + 1]) for w in range(workers) if bounds[w] < bounds[w + 1]]
    if workers > 1:
        logger.info(f"Sign enumeration n={n}: {classes:,} classes over {len(ranges)} workers")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_range, [t] * len(ranges), [tinv] * len(ranges),
                                    [r[0] for r in ranges], [r[1] for r in ranges]))
    else:
        logger.debug(f"Sign enumeration n={n}: {classes:,} classes")
        results = [_scan_range(t, tinv, start, stop) for start, stop in ranges]

    value, key = max(results, key=lambda r: (r[0], tuple(-k for k in r[1])))
    witness = tuple(1 if k == 0 else -1 for k in key)
    return UnconditionalConstant(value=value, witness_signs=witness, classes=classes)


# =========================================================================
# Brute-force oracles
# =========================================================================
def _combine(b: Basis, alpha: Sequence[Fraction]) -> Vector:
    total = Vector.zeros(b.n)
    for a, x in zip(alpha, b.vectors):
        if a:
            total = total + x.scale(a)
    return total


def candidate_coefficients(b: Basis) -> List[Tuple[Fraction, ...]]:
    """
    Signed unit vectors a = +-e_j and the preimages a = T^-1(+-e_i): the
    vertices of the two polytopes where the extreme ratios are attained.
    """
    out = []
    for j in range(b.n):
        for s in (1, -1):
            out.append(tuple(Vector.unit(b.n, j, s)))
            out.append(tuple(b.inverse.column(j).scale(s)))
    return out


def vertex_oracle_constants(b: Basis) -> Tuple[Fraction, Fraction]:
    """min / max of ||sum a_i x_i||_1 / sum |a_i| over the vertex candidates."""
    ratios = []
    for alpha in candidate_coefficients(b):
        ratios.append(l1_norm(_combine(b, alpha)) / sum(abs(a) for a in alpha))
    return min(ratios), max(ratios)


def definition_oracle_unconditional(b: Basis) -> Fraction:
    """
    Smallest C with ||sum eps_i a_i x_i|| <= C ||sum a_i x_i|| over all 2^n
    sign vectors and all vertex coefficient candidates, evaluated straight
    from the definition.
    """
    best = Fraction(1)
    candidates = candidate_coefficients(b)
    for eps in itertools.product((1, -1), repeat=b.n):
        for alpha in candidates:
            base = l1_norm(_combine(b, alpha))
            flipped = l1_norm(_combine(b, [e * a for e, a in zip(eps, alpha)]))
            best = max(best, flipped / base)
    return best
