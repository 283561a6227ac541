"""
delta-dominated perturbations of a basis of l1^n.

  perturbation_radius   m = max_n ||x_n - y_n||_1, strict comparison with delta
  bp_criterion          sum_n ||x_n*|| ||x_n - y_n|| < 1  (small-perturbation test)
  sandwich_check        k/(k+m) <= actual constants <= k/(k-m) when m < k
  recovery_check        ||sum a z|| <= 2(1+k1)/(delta k1) ||sum a x|| for y = x + (delta/2) z
  min_dominating_delta  smallest delta under re-indexing, by bottleneck assignment
"""
import logging
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

try:
    from . import config
    from .seq_core import (
        BasisError, DimensionMismatch, DimensionTooLarge, SingularMatrix, Vector,
        as_scalar, l1_norm,
    )
    from .basis_constants import (
        Basis, coefficient_functionals, dual_norms, equivalence_constants,
        relative_equivalence,
    )
except ImportError:
    import config
    from seq_core import (
        BasisError, DimensionMismatch, DimensionTooLarge, SingularMatrix, Vector,
        as_scalar, l1_norm,
    )
    from basis_constants import (
        Basis, coefficient_functionals, dual_norms, equivalence_constants,
        relative_equivalence,
    )

logger = logging.getLogger(__name__)

VectorsLike = Union[Basis, Sequence[Vector]]


class LengthMismatch(DimensionMismatch):
    def __init__(self, expected: int, got: int):
        super().__init__(expected, got, "sequence length")


class NotApplicable(BasisError):
    """The hypothesis m < k fails; the sandwich bound makes no claim."""

    def __init__(self, m: Fraction, k: Fraction, reason: Optional[str] = None):
        self.m = m
        self.k = k
        super().__init__(reason or f"not applicable: m={m} >= k={k}")


# =========================================================================
# Domain types
# =========================================================================
@dataclass(frozen=True)
class PerturbationReport:
    m: Fraction
    delta: Optional[Fraction]
    dominated: Optional[bool]
    per_index_distances: Tuple[Fraction, ...]


@dataclass(frozen=True)
class BPCriterion:
    total: Fraction
    passes: bool
    dual_norms: Tuple[Fraction, ...]
    distances: Tuple[Fraction, ...]


@dataclass(frozen=True)
class SandwichCertificate:
    k: Fraction
    m: Fraction
    bound_low: Fraction
    bound_high: Fraction
    actual_low: Fraction
    actual_high: Fraction
    holds: bool


@dataclass(frozen=True)
class RecoveryCertificate:
    delta: Fraction
    k1: Fraction
    bound: Fraction
    actual: Fraction
    holds: bool


@dataclass(frozen=True)
class BottleneckResult:
    """
    assignment[i] = j pairs the unit vector e_i with x_j.
    delta_min = max_i d[i][assignment[i]], minimal over all permutations.
    """
    delta_min: Fraction
    assignment: Tuple[int, ...]
    distance_matrix: Tuple[Tuple[Fraction, ...], ...]
    indexwise_delta: Fraction
    normalized: bool
    provenance: str = "bottleneck assignment (re-indexing allowed)"

    def dominated_for(self, delta) -> bool:
        """Some re-indexing of the basis is a delta-dominated perturbation of {e_i} (strict)."""
        return self.delta_min < as_scalar(delta)


# =========================================================================
# delta-dominated perturbations
# =========================================================================
def _vectors(seq: VectorsLike) -> List[Vector]:
    return seq.vectors if isinstance(seq, Basis) else [v if isinstance(v, Vector) else Vector(tuple(v)) for v in seq]


def _check_lengths(xs: List[Vector], ys: List[Vector]) -> None:
    if len(xs) != len(ys):
        raise LengthMismatch(len(xs), len(ys))
    for x, y in zip(xs, ys):
        if x.n != y.n:
            raise DimensionMismatch(x.n, y.n)


def perturbation_radius(x: VectorsLike, y: VectorsLike, delta=None) -> PerturbationReport:
    xs, ys = _vectors(x), _vectors(y)
    _check_lengths(xs, ys)
    distances = tuple(l1_norm(a - b) for a, b in zip(xs, ys))
    m = max(distances)
    if delta is None:
        return PerturbationReport(m, None, None, distances)
    delta = as_scalar(delta)
    return PerturbationReport(m, delta, m < delta, distances)


def bp_criterion(x: Basis, y: VectorsLike) -> BPCriterion:
    """Passing (total < 1) certifies that {y_n} is a basis equivalent to {x_n}."""
    ys = _vectors(y)
    _check_lengths(x.vectors, ys)
    norms = dual_norms(coefficient_functionals(x))
    distances = [l1_norm(a - b) for a, b in zip(x.vectors, ys)]
    total = sum((d * t for d, t in zip(norms, distances)), Fraction(0))
    return BPCriterion(total, total < 1, tuple(norms), tuple(distances))


def sandwich_check(x: Basis, y: Basis) -> SandwichCertificate:
    k = equivalence_constants(x).k1
    m = perturbation_radius(x, y).m
    if m >= k:
        raise NotApplicable(m, k)
    rel = relative_equivalence(x, y)
    low, high = k / (k + m), k / (k - m)
    holds = low <= rel.k1 <= rel.k2 <= high
    if not holds:
        logger.error(f"Sandwich violated: bounds ({low}, {high}), actual ({rel.k1}, {rel.k2})")
    return SandwichCertificate(k=k, m=m, bound_low=low, bound_high=high,
                               actual_low=rel.k1, actual_high=rel.k2, holds=holds)


def recovery_check(x: Basis, z: Basis, delta) -> RecoveryCertificate:
    """
    With y_n = x_n + (delta/2) z_n and k1 the optimal lower constant of {x_n}
    relative to {y_n}: ||sum a_n z_n|| <= 2(1+k1)/(delta k1) ||sum a_n x_n||.
    """
    delta = as_scalar(delta)
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if x.n != z.n:
        raise DimensionMismatch(x.n, z.n)
    half = delta / 2
    try:
        y = Basis.from_vectors([a + b.scale(half) for a, b in zip(x.vectors, z.vectors)])
    except SingularMatrix:
        raise NotApplicable(half, delta, "perturbed sequence is not a basis; no equivalence to recover")
    k1 = relative_equivalence(x, y).k1
    bound = 2 * (1 + k1) / (delta * k1)
    actual = relative_equivalence(z, x).k2
    return RecoveryCertificate(delta=delta, k1=k1, bound=bound, actual=actual, holds=actual <= bound)


# =========================================================================
# Bottleneck assignment against the standard basis
# =========================================================================
def distance_matrix(b: Basis) -> List[List[Fraction]]:
    """d[i][j] = ||x_j - e_i||_1."""
    n = b.n
    xs = b.vectors
    return [[l1_norm(xs[j] - Vector.unit(n, i)) for j in range(n)] for i in range(n)]


def _perfect_matching(allowed: List[List[bool]]) -> Optional[List[int]]:
    """Augmenting-path bipartite matching; returns row -> column or None."""
    n = len(allowed)
    owner = [-1] * n   # column j -> row

    def augment(i: int, seen: List[bool]) -> bool:
        for j in range(n):
            if allowed[i][j] and not seen[j]:
                seen[j] = True
                if owner[j] == -1 or augment(owner[j], seen):
                    owner[j] = i
                    return True
        return False

    for i in range(n):
        if not augment(i, [False] * n):
            return None
    sigma = [0] * n
    for j, i in enumerate(owner):
        sigma[i] = j
    return sigma


def min_dominating_delta(b: Basis) -> BottleneckResult:
    """
    Binary search over the sorted distinct distances; a threshold is feasible
    when the graph of pairs with d[i][j] <= threshold has a perfect matching.
    """
    normalized = b.is_normalized
    if not normalized:
        logger.warning("min_dominating_delta on a basis that is not normalized; the C = 2 bound concerns normalized bases")
    d = distance_matrix(b)
    thresholds = sorted({v for row in d for v in row})
    lo, hi = 0, len(thresholds) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        t = thresholds[mid]
        sigma = _perfect_matching([[v <= t for v in row] for row in d])
        if sigma is not None:
            best = sigma
            hi = mid - 1
        else:
            lo = mid + 1
    # the largest threshold admits every edge, so best is always set
    delta_min = max(d[i][best[i]] for i in range(b.n))
    indexwise = max(d[i][i] for i in range(b.n))
    return BottleneckResult(delta_min=delta_min, assignment=tuple(best),
                            distance_matrix=tuple(tuple(r) for r in d),
                            indexwise_delta=indexwise, normalized=normalized)


def brute_force_min_delta(b: Basis, limit: Optional[int] = None) -> Tuple[Fraction, Tuple[int, ...]]:
    """O(n!) oracle for min_dominating_delta."""
    limit = limit or config.BRUTE_FORCE_LIMIT
    if b.n > limit:
        raise DimensionTooLarge(b.n, limit, what="permutation brute force")
    d = distance_matrix(b)
    best, best_perm = None, None
    for perm in itertools.permutations(range(b.n)):
        value = max(d[i][perm[i]] for i in range(b.n))
        if best is None or value < best:
            best, best_perm = value, perm
    return best, best_perm
