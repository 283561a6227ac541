"""
验证引擎：把各条定理/事实的随机化验证套件统一成 run(statement) 一个入口，
供 CLI (verify / search-c) 调用。
负责 generate -> certify -> collect violations 一个完整批次。
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

try:
    from . import config
    from . import settings
    from . import basis_file
    from .seq_core import BasisError, DimensionTooLarge, SingularMatrix, Vector, as_scalar
    from .basis_constants import (
        Basis, enumeration_cost, coefficient_functionals, definition_oracle_unconditional, dual_norms,
        equivalence_constants, relative_equivalence, unconditional_constant,
        vertex_oracle_constants,
    )
    from .perturbation import (
        NotApplicable, bp_criterion, brute_force_min_delta, min_dominating_delta,
        perturbation_radius, recovery_check, sandwich_check,
    )
    from .l1_constructions import (
        RandomMode, fact2_check, interpolation_check, perturb_basis, prop1_block,
        prop1_direct_sum, prop1_expected_constants, random_basis, thm2_check,
    )
except ImportError:
    import config
    import settings
    import basis_file
    from seq_core import BasisError, DimensionTooLarge, SingularMatrix, Vector, as_scalar
    from basis_constants import (
        Basis, enumeration_cost, coefficient_functionals, definition_oracle_unconditional, dual_norms,
        equivalence_constants, relative_equivalence, unconditional_constant,
        vertex_oracle_constants,
    )
    from perturbation import (
        NotApplicable, bp_criterion, brute_force_min_delta, min_dominating_delta,
        perturbation_radius, recovery_check, sandwich_check,
    )
    from l1_constructions import (
        RandomMode, fact2_check, interpolation_check, perturb_basis, prop1_block,
        prop1_direct_sum, prop1_expected_constants, random_basis, thm2_check,
    )

logger = logging.getLogger(__name__)

STATEMENTS = ('fact1', 'thm1', 'thm2', 'fact2', 'prop1', 'c2', 'lemma1', 'unconditional', 'interp')
SEARCH_FAMILIES = ('prop1', 'dense', 'near_standard', 'grid', 'signed_permutation')


def parse_range(text: str) -> Tuple[int, int]:
    """'3..20' -> (3, 20); a single integer is a one-point range."""
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
    else:
        lo = hi = int(text)
    if lo > hi:
        raise ValueError(f"empty range {text!r}")
    return lo, hi


def _instance(b: Basis) -> str:
    """Serialized basis attached to a violation for reproduction."""
    return basis_file.serialize(basis_file.BasisFile.from_basis(b))


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _ratio(rng: np.random.Generator) -> Fraction:
    """Uniform draw from {1/100, ..., 99/100}."""
    return Fraction(int(rng.integers(1, 100)), 100)


def _given(p: Dict[str, Any]) -> Optional[Basis]:
    """Basis supplied with --basis, carried through the pool as its CSV text."""
    text = p.get('basis')
    return basis_file.parse(text, source="--basis").to_basis() if text else None


# =========================================================================
# 单次试验（顶层函数，可被进程池 pickle）
# =========================================================================
def _trial_fact1(seed: int, index: int, p: Dict[str, Any]) -> Dict[str, Any]:
    rng = _rng(seed, index)
    x = _given(p)
    if x is not None:
        n, base = x.n, 'file'
    else:
        n = p['n']
        # 轮换三类出发基: 标准基 / 标准基近邻 / 稠密随机基
        base = ('standard', 'near_standard', 'dense')[index % 3]
        x = Basis.standard(n) if base == 'standard' else random_basis(n, rng=rng, mode=base)
    norms = dual_norms(coefficient_functionals(x))
    budget = _ratio(rng)
    radii = [budget * _ratio(rng) / (n * d) for d in norms]
    y = perturb_basis(x, radii, rng)
    bp = bp_criterion(x, y)
    row = {'trial': index, 'n': n, 'base': base, 'sum': bp.total, 'passes': bp.passes,
           'invertible': None, 'k1': None, 'k2': None, 'holds': True}
    if bp.passes:
        try:
            rel = relative_equivalence(Basis.from_vectors(y), x)
            row.update(invertible=True, k1=rel.k1, k2=rel.k2)
        except SingularMatrix:
            row.update(invertible=False, holds=False, instance=_instance(x))
    return row


def _trial_thm1(seed: int, index: int, p: Dict[str, Any]) -> Dict[str, Any]:
    rng = _rng(seed, index)
    n = p['n']
    x = _given(p)
    if x is not None:
        n, base = x.n, 'file'
    elif index % 4 == 3 and n >= 3:
        x, base = prop1_block(n).basis, 'prop1'
    else:
        x, base = random_basis(n, rng=rng, mode=RandomMode.DENSE), 'dense'
    k = equivalence_constants(x).k1
    r = k * _ratio(rng)
    y_vectors = perturb_basis(x, [r * _ratio(rng) for _ in range(n)], rng)
    m = perturbation_radius(x, y_vectors).m
    row = {'trial': index, 'n': n, 'base': base, 'k': k, 'm': m}
    if m >= k:
        row.update(not_applicable=True, holds=True)
        return row
    try:
        cert = sandwich_check(x, Basis.from_vectors(y_vectors))
    except SingularMatrix:
        # m < k 时扰动序列必然可逆
        row.update(holds=False, instance=_instance(x))
        return row
    delta = Fraction(int(rng.integers(1, 9)), 4)
    try:
        rec = recovery_check(x, Basis.standard(n), delta)
        rec_fields = {'recovery_delta': delta, 'recovery_bound': rec.bound,
                      'recovery_actual': rec.actual, 'recovery_holds': rec.holds}
    except NotApplicable:
        rec_fields = {'recovery_delta': delta, 'recovery_holds': None}
    row.update(m=cert.m, bound_low=cert.bound_low, actual_low=cert.actual_low,
               actual_high=cert.actual_high, bound_high=cert.bound_high,
               margin_low=cert.actual_low - cert.bound_low,
               margin_high=cert.bound_high - cert.actual_high, **rec_fields)
    row['holds'] = cert.holds and rec_fields['recovery_holds'] is not False
    if not row['holds']:
        row['instance'] = _instance(x)
    return row


def _trial_thm2(seed: int, index: int, p: Dict[str, Any]) -> Dict[str, Any]:
    rng = _rng(seed, index)
    b = _given(p)
    if b is not None:
        n, base = b.n, 'file'
    elif index < p['random_trials']:
        n = int(rng.integers(2, p['n_max'] + 1))
        b, base = random_basis(n, rng=rng, mode=RandomMode.DENSE, normalized=True), 'dense'
    else:
        n = 3 + index - p['random_trials']
        b, base = prop1_block(n, normalized=True).basis, 'prop1'
    cert = thm2_check(b, cap=p['cap'], force=p['force'], workers=1)
    row = {'trial': index, 'n': n, 'base': base, 'K': cert.K, 'k1': cert.k1_actual,
           'k1_sq': cert.k1_actual ** 2, 'k_sq': cert.k_sq_scaled, 'k2': cert.k2_actual,
           'holds': cert.holds}
    if not cert.holds:
        row['instance'] = _instance(b)
    return row


def _trial_fact2(seed: int, index: int, p: Dict[str, Any]) -> List[Dict[str, Any]]:
    """一个基 + p['per_basis'] 组系数，复用同一个无条件常数。"""
    rng = _rng(seed, index)
    b = _given(p) or random_basis(int(rng.integers(1, p['n_max'] + 1)), rng=rng,
                                  mode=RandomMode.DENSE, normalized=bool(index % 2))
    n = b.n
    C = unconditional_constant(b, cap=p['cap'], force=p['force'], workers=1).value
    g = config.GRID_NUMERATOR
    rows = []
    for k in range(p['per_basis']):
        size = int(rng.integers(1, n + 1))
        alphas = [Fraction(int(a), int(d)) for a, d in
                  zip(rng.integers(-g, g + 1, size=size), rng.integers(1, config.GRID_DENOMINATOR + 1, size=size))]
        if not any(alphas):
            alphas[0] = Fraction(1)
        cert = fact2_check(b, alphas, constant=C, digits=p['digits'])
        row = {'trial': index * p['per_basis'] + k, 'n': n, 'C': C, 'lhs_sq_scaled': cert.lhs_sq_scaled,
               'rhs_upper_sq': cert.rhs_upper ** 2, 'rhs': str(cert.rhs_display), 'holds': cert.holds}
        if not cert.holds:
            row['instance'] = _instance(b)
            row['alphas'] = [str(a) for a in alphas]
        rows.append(row)
    return rows


def _trial_lemma1(seed: int, index: int, p: Dict[str, Any]) -> Dict[str, Any]:
    rng = _rng(seed, index)
    b = _given(p) or random_basis(int(rng.integers(1, p['n_max'] + 1)), rng=rng, mode=RandomMode.GRID)
    n = b.n
    consts = equivalence_constants(b)
    lo, hi = vertex_oracle_constants(b)
    row = {'trial': index, 'n': n, 'k1': consts.k1, 'k2': consts.k2, 'oracle_k1': lo, 'oracle_k2': hi,
           'holds': (consts.k1, consts.k2) == (lo, hi)}
    if not row['holds']:
        row['instance'] = _instance(b)
    return row


def _trial_unconditional(seed: int, index: int, p: Dict[str, Any]) -> Dict[str, Any]:
    rng = _rng(seed, index)
    b = _given(p) or random_basis(int(rng.integers(1, p['n_max'] + 1)), rng=rng, mode=RandomMode.DENSE)
    n = b.n
    K = unconditional_constant(b, cap=p['cap'], force=p['force'], workers=1)
    oracle = definition_oracle_unconditional(b)
    row = {'trial': index, 'n': n, 'K': K.value, 'oracle': oracle,
           'witness': list(K.witness_signs), 'holds': K.value == oracle}
    if not row['holds']:
        row['instance'] = _instance(b)
    return row


def _trial_interp(seed: int, index: int, p: Dict[str, Any]) -> Dict[str, Any]:
    rng = _rng(seed, index)
    exponents = p['exponents']
    expo = as_scalar(exponents[index % len(exponents)])
    size = int(rng.integers(1, 9))
    g = config.GRID_NUMERATOR
    if index % 5 == 0:
        # 等模向量（含零坐标）：必须取等号
        mod = Fraction(int(rng.integers(1, g + 1)), int(rng.integers(1, config.GRID_DENOMINATOR + 1)))
        coords = [mod * int(rng.choice([-1, 0, 1])) for _ in range(size)]
        if not any(coords):
            coords[0] = mod
    else:
        coords = [Fraction(int(a), int(d)) for a, d in
                  zip(rng.integers(-g, g + 1, size=size), rng.integers(1, config.GRID_DENOMINATOR + 1, size=size))]
    v = Vector(tuple(coords))
    cert = interpolation_check(v, expo, digits=p['digits'])
    nonzero = {abs(x) for x in coords if x}
    constant_modulus = len(nonzero) <= 1
    consistent = cert.equality == constant_modulus
    if expo.denominator == 1:
        consistent = consistent and ((cert.lhs.power == cert.rhs_lower) == constant_modulus)
    return {'trial': index, 'p': expo, 'size': size, 'equality': cert.equality,
            'lhs': str(cert.lhs.display), 'holds': cert.holds and consistent,
            'vector': [str(x) for x in coords]}


def _trial_search(seed: int, index: int, p: Dict[str, Any]) -> Dict[str, Any]:
    rng = _rng(seed, index)
    lo, hi = p['n_range']
    n = int(rng.integers(lo, hi + 1))
    b = random_basis(n, rng=rng, mode=p['family'], normalized=True)
    res = min_dominating_delta(b)
    row = {'trial': index, 'n': n, 'delta_min': res.delta_min, 'indexwise_delta': res.indexwise_delta,
           'holds': res.delta_min <= 2 and res.indexwise_delta <= 2, 'instance': _instance(b)}
    return row


TRIALS: Dict[str, Callable] = {
    'fact1': _trial_fact1,
    'thm1': _trial_thm1,
    'thm2': _trial_thm2,
    'fact2': _trial_fact2,
    'lemma1': _trial_lemma1,
    'unconditional': _trial_unconditional,
    'interp': _trial_interp,
    'search': _trial_search,
}


@dataclass
class SuiteResult:
    statement: str
    params: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    not_applicable: int = 0
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def violations(self) -> List[Dict[str, Any]]:
        return [r for r in self.rows if not r.get('holds', True)]

    @property
    def status(self) -> str:
        return 'violations' if self.violations else 'ok'


class VerifyEngine:
    """
    封装验证配置与批次执行。CLI 每个 verify / search-c 命令调用一次 run()/search_c()。
    多进程时每个试验用 default_rng([seed, trial]) 独立播种，结果按试验序号汇总，
    与 worker 数无关。
    """

    def __init__(self, cfg: Optional[Dict[str, Any]] = None):
        # 配置：显式 cfg > JSON > env > config.py 默认值
        cfg = cfg if cfg is not None else settings.resolve_config()
        self.cap: int = int(cfg.get('enumeration_cap', config.ENUMERATION_CAP))
        self.workers: int = max(1, int(cfg.get('workers', config.WORKERS)))
        self.seed: int = int(cfg.get('seed', config.DEFAULT_SEED))
        self.digits: int = int(cfg.get('certified_digits', config.CERTIFIED_DIGITS))
        self.force: bool = bool(cfg.get('force_cap', False))

    # ---- 批次执行 ----
    def _map(self, fn: Callable, count: int, seed: int, params: Dict[str, Any]) -> List[Any]:
        if self.workers > 1 and count > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(fn, [seed] * count, range(count), [params] * count,
                                     chunksize=max(1, count // (4 * self.workers))))
        return [fn(seed, i, params) for i in range(count)]

    def _check_cap(self, n: int) -> None:
        if n > self.cap and not self.force:
            raise DimensionTooLarge(n, self.cap, enumeration_cost(n))

    def run(self, statement: str, trials: Optional[int] = None, n: Optional[int] = None,
            n_range: Optional[str] = None, seed: Optional[int] = None,
            per_basis: int = 100, basis: Optional[Basis] = None) -> SuiteResult:
        """
        执行一条陈述的验证套件。
        basis 给定时，以该基代替随机生成的基（prop1 / interp 不接受）。
        返回 SuiteResult；violations 非空时 status == 'violations'。
        """
        if statement not in STATEMENTS:
            raise ValueError(f"unknown statement {statement!r}; choose from {', '.join(STATEMENTS)}")
        if basis is not None and statement in ('prop1', 'interp'):
            raise ValueError(f"verify {statement} does not take a basis file")
        seed = self.seed if seed is None else seed
        trials = config.DEFAULT_TRIALS if trials is None else trials
        if trials < 0:
            raise ValueError(f"trials must be >= 0, got {trials}")
        logger.info(f"verify {statement}: trials={trials} n={n} n_range={n_range} seed={seed}")

        if statement == 'prop1':
            result = self._run_prop1(parse_range(n_range or config.DEFAULT_N_RANGE))
        elif statement == 'c2':
            result = self._run_c2(parse_range(n_range or config.DEFAULT_N_RANGE), basis)
        else:
            params: Dict[str, Any] = {'cap': self.cap, 'force': self.force, 'digits': self.digits}
            if basis is not None:
                params['basis'] = _instance(basis)
                if statement in ('thm2', 'fact2', 'unconditional'):
                    self._check_cap(basis.n)
                if statement in ('thm2', 'lemma1', 'unconditional'):
                    # 固定基上的确定性检查只需一次
                    trials = min(trials, 1)
            if statement in ('fact1', 'thm1'):
                params['n'] = n or 6
                if params['n'] < 1:
                    raise ValueError(f"n must be >= 1, got {params['n']}")
            elif statement == 'thm2':
                params['n_max'] = n or 8
                params['random_trials'] = trials
                if basis is None:
                    self._check_cap(params['n_max'])
                    prop_max = parse_range(n_range)[1] if n_range else 12
                    self._check_cap(prop_max)
                    trials = trials + max(0, prop_max - 2)
            elif statement == 'fact2':
                params['n_max'] = n or 6
                params['per_basis'] = max(1, per_basis)
                if basis is None:
                    self._check_cap(params['n_max'])
                trials = -(-trials // params['per_basis'])
            elif statement == 'lemma1':
                params['n_max'] = n or 4
            elif statement == 'unconditional':
                params['n_max'] = n or 6
                if basis is None:
                    self._check_cap(params['n_max'])
            elif statement == 'interp':
                params['exponents'] = list(config.INTERPOLATION_EXPONENTS)
            out = self._map(TRIALS[statement], trials, seed, params)
            rows = [r for chunk in out for r in chunk] if statement == 'fact2' else out
            shown = {k: v for k, v in params.items() if k != 'basis'}
            result = SuiteResult(statement, {'trials': len(rows), 'seed': seed, **shown}, rows)
            if basis is not None:
                result.params['basis_digest'] = basis_file.digest(basis_file.BasisFile.from_basis(basis))
            result.not_applicable = sum(1 for r in rows if r.get('not_applicable'))

        result.summary = {'trials': len(result.rows), 'violations': len(result.violations),
                          'not_applicable': result.not_applicable}
        if result.violations:
            logger.error(f"verify {statement}: {len(result.violations)} violation(s)")
        else:
            logger.info(f"verify {statement}: {len(result.rows)} trial(s), zero violations")
        return result

    # ---- 确定性套件 ----
    def _run_prop1(self, n_range: Tuple[int, int]) -> SuiteResult:
        lo, hi = n_range
        if lo < 3:
            raise ValueError(f"prop1 needs n >= 3, got range {lo}..{hi}")
        rows, blocks = [], {}
        running_sup = None   # sup-norm witness of the blocks 3..n seen so far
        for n in range(3, hi + 1):
            try:
                block = prop1_block(n)
            except BasisError as e:
                rows.append({'n': n, 'error': str(e), 'holds': False})
                continue
            blocks[n] = block
            running_sup = block.sup_norm_witness if running_sup is None else min(running_sup, block.sup_norm_witness)
            if n < lo:
                continue
            consts = equivalence_constants(block.basis)
            expected_k1, expected_k2 = prop1_expected_constants(n)
            rows.append({
                'n': n, 'k1': consts.k1, 'k2': consts.k2, 'expected_k1': expected_k1,
                'sup_norm': block.sup_norm_witness, 'direct_sum_sup_norm': running_sup,
                'holds': (consts.k1 == expected_k1 and consts.k2 == expected_k2 == 2
                          and consts.k1 >= Fraction(1, 5)
                          and block.sup_norm_witness == running_sup == Fraction(1, n)),
            })

        # the assembled direct sum over every block size must agree with the blockwise values
        total = prop1_direct_sum(range(3, hi + 1), blocks)
        sum_row = {'n': f"3..{hi}", 'k1': total.k1, 'k2': total.k2, 'dimension': total.dimension,
                   'direct_sum_sup_norm': total.sup_norm_witness,
                   'holds': total.sup_norm_witness == Fraction(1, hi) and total.k2 == 2
                   and total.k1 >= Fraction(1, 5)}
        if total.basis is not None:
            assembled = equivalence_constants(total.basis)
            sum_row['assembled'] = True
            sum_row['holds'] = sum_row['holds'] and (assembled.k1, assembled.k2) == (total.k1, total.k2)
        rows.append(sum_row)
        return SuiteResult('prop1', {'n_range': f"{lo}..{hi}"}, rows)

    def _run_c2(self, n_range: Tuple[int, int], basis: Optional[Basis] = None) -> SuiteResult:
        lo, hi = n_range
        if basis is not None:
            cases = [(basis.n, basis, None)]
        else:
            if lo < 3:
                raise ValueError(f"c2 needs n >= 3, got range {lo}..{hi}")
            cases = [(n, prop1_block(n, normalized=True).basis, Fraction(2 * (n - 1), n))
                     for n in range(lo, hi + 1)]
        rows = []
        for n, b, expected in cases:
            res = min_dominating_delta(b)
            row = {'n': n, 'delta_min': res.delta_min, 'expected': expected,
                   'indexwise_delta': res.indexwise_delta, 'assignment': list(res.assignment)}
            ok = res.delta_min <= 2 or not res.normalized
            if expected is not None:
                ok = ok and res.delta_min == expected
            if n <= config.BRUTE_FORCE_LIMIT:
                brute, _ = brute_force_min_delta(b)
                row['brute_force'] = brute
                ok = ok and brute == res.delta_min
            row['holds'] = ok
            rows.append(row)
        params = {'n_range': f"{lo}..{hi}"} if basis is None else \
            {'basis_digest': basis_file.digest(basis_file.BasisFile.from_basis(basis))}
        return SuiteResult('c2', params, rows)

    # ---- C 的随机搜索 ----
    def search_c(self, n_range: Optional[str] = None, trials: Optional[int] = None,
                 seed: Optional[int] = None, family: str = 'dense') -> SuiteResult:
        """
        在归一化基上随机搜索 min_dominating_delta 的最大值；所有观测值必须 <= 2。
        """
        if family not in SEARCH_FAMILIES:
            raise ValueError(f"unknown family {family!r}; choose from {', '.join(SEARCH_FAMILIES)}")
        seed = self.seed if seed is None else seed
        lo, hi = parse_range(n_range or config.DEFAULT_N_RANGE)
        trials = config.DEFAULT_TRIALS if trials is None else trials
        logger.info(f"search-c family={family} n={lo}..{hi} trials={trials} seed={seed}")
        if family == 'prop1':
            if lo < 3:
                raise ValueError(f"prop1 family needs n >= 3, got range {lo}..{hi}")
            rows = []
            for n in range(lo, hi + 1):
                b = prop1_block(n, normalized=True).basis
                res = min_dominating_delta(b)
                rows.append({'trial': n - lo, 'n': n, 'delta_min': res.delta_min,
                             'indexwise_delta': res.indexwise_delta,
                             'holds': res.delta_min <= 2 and res.indexwise_delta <= 2,
                             'instance': _instance(b)})
        else:
            if lo < 1:
                raise ValueError(f"n must be >= 1, got range {lo}..{hi}")
            rows = self._map(_trial_search, trials, seed, {'n_range': (lo, hi), 'family': family})
        result = SuiteResult('search-c', {'family': family, 'n_range': f"{lo}..{hi}",
                                          'trials': len(rows), 'seed': seed}, rows)
        if rows:
            best = max(rows, key=lambda r: (r['delta_min'], -r['trial']))
            result.summary = {'best': best['delta_min'], 'best_n': best['n'],
                              'best_indexwise': max(r['indexwise_delta'] for r in rows),
                              'witness': best['instance'], 'trials': len(rows),
                              'violations': len(result.violations)}
        else:
            result.summary = {'trials': 0, 'violations': 0}
        for r in rows:
            if r['holds']:
                r.pop('instance', None)
        return result
