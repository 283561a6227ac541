"""
命令行入口：analyze / construct / verify / search-c。

退出码：0 成功/验证通过，1 验证失败，2 输入错误，3 奇异矩阵，4 超出枚举上限。
stdout 只输出报告（文本表格或 --json 文档），日志走 stderr。
"""
import argparse
import logging
import sys
from fractions import Fraction
from typing import Any, Dict, IO, Optional, Sequence, Tuple

try:
    from . import config
    from . import settings
    from . import basis_file
    from . import report
    from .dashboard import ReportDashboard
    from .engine import SEARCH_FAMILIES, STATEMENTS, VerifyEngine
    from .seq_core import (
        BasisError, DimensionMismatch, DimensionTooLarge, SingularMatrix, as_scalar, linf_norm,
    )
    from .basis_constants import (
        Basis, coefficient_functionals, dual_norms, enumeration_cost, equivalence_constants,
        relative_equivalence, unconditional_constant,
    )
    from .perturbation import (
        NotApplicable, bp_criterion, min_dominating_delta, perturbation_radius, sandwich_check,
    )
    from .l1_constructions import (
        NotNormalized, RandomMode, prop1_block, prop1_direct_sum, prop1_expected_constants,
        random_basis, thm2_check,
    )
except ImportError:
    import config
    import settings
    import basis_file
    import report
    from dashboard import ReportDashboard
    from engine import SEARCH_FAMILIES, STATEMENTS, VerifyEngine
    from seq_core import (
        BasisError, DimensionMismatch, DimensionTooLarge, SingularMatrix, as_scalar, linf_norm,
    )
    from basis_constants import (
        Basis, coefficient_functionals, dual_norms, enumeration_cost, equivalence_constants,
        relative_equivalence, unconditional_constant,
    )
    from perturbation import (
        NotApplicable, bp_criterion, min_dominating_delta, perturbation_radius, sandwich_check,
    )
    from l1_constructions import (
        NotNormalized, RandomMode, prop1_block, prop1_direct_sum, prop1_expected_constants,
        random_basis, thm2_check,
    )

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_SINGULAR = 3
EXIT_CAP = 4


# =========================================================================
# Parser
# =========================================================================
def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the machine-readable report on stdout")
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default {config.DEFAULT_SEED})")
    common.add_argument("--cap", type=int, default=None,
                        help=f"largest n for sign enumeration (default {config.ENUMERATION_CAP})")
    common.add_argument("--force-cap", action="store_true", help="enumerate past the cap after logging the cost")
    common.add_argument("--precision", type=int, default=None,
                        help=f"significant digits of decimal renderings (default {config.DISPLAY_PRECISION})")
    common.add_argument("--workers", type=int, default=None, help="worker processes for enumeration and suites")
    common.add_argument("--config", default=None, help=f"settings file (default {settings.CONFIG_FILE})")
    common.add_argument("--save-config", action="store_true", help="persist the effective settings")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    noise.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog=config.APP_NAME,
                                     description="Exact basis constants of l1^n and certificate suites.")
    parser.add_argument("--version", action="version", version=f"{config.APP_NAME} {config.VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="constants of a basis file")
    p.add_argument("input", help="basis file (CSV or JSON form)")
    p.add_argument("--against", metavar="FILE", help="second basis: perturbation radius, bp criterion, sandwich")
    p.add_argument("--delta", default=None, help="dominance threshold (rational), strict comparison")
    p.add_argument("--thm2", action="store_true", help="(k,1)-equivalence certificate (basis must be normalized)")
    p.add_argument("--min-delta", action="store_true", help="smallest dominating delta under re-indexing")

    p = sub.add_parser("construct", parents=[common], help="write a basis file")
    p.add_argument("kind", choices=("prop1", "prop1_sum", "random"))
    p.add_argument("--n", type=int, default=None, help="dimension")
    p.add_argument("--sizes", default=None, help="prop1_sum block sizes, e.g. 3,4,5")
    p.add_argument("--normalized", action="store_true", help="rescale every vector to l1 norm 1")
    p.add_argument("--mode", choices=[m.value for m in RandomMode], default=RandomMode.DENSE.value)
    p.add_argument("--radius", default=None, help=f"near_standard radius (default {config.NEAR_STANDARD_RADIUS})")
    p.add_argument("--verify", action="store_true", help="run the construction's self-checks")
    p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="basis file form")

    p = sub.add_parser("verify", parents=[common], help="certificate suite for one statement")
    p.add_argument("statement", choices=STATEMENTS)
    p.add_argument("--trials", type=int, default=None, help=f"random trials (default {config.DEFAULT_TRIALS})")
    p.add_argument("--n", type=int, default=None, help="dimension (fact1/thm1) or largest dimension")
    p.add_argument("--n-range", default=None, help=f"e.g. 3..20 (default {config.DEFAULT_N_RANGE})")
    p.add_argument("--per-basis", type=int, default=100, help="fact2: coefficient vectors per basis")
    p.add_argument("--basis", metavar="FILE", default=None, help="check this basis instead of random ones")
    p.add_argument("--csv", metavar="PATH", default=None, help="write the per-trial table")

    p = sub.add_parser("search-c", parents=[common], help="random search for the largest dominating delta")
    p.add_argument("--n-range", default=None, help=f"e.g. 3..12 (default {config.DEFAULT_N_RANGE})")
    p.add_argument("--trials", type=int, default=None, help=f"random bases (default {config.DEFAULT_TRIALS})")
    p.add_argument("--family", choices=SEARCH_FAMILIES, default="dense")
    p.add_argument("--csv", metavar="PATH", default=None, help="write the per-trial table")
    return parser


# =========================================================================
# Commands
# =========================================================================
def _load_basis(path: str) -> Tuple[basis_file.BasisFile, Basis]:
    bf = basis_file.load(path)
    return bf, bf.to_basis()


def cmd_analyze(args: argparse.Namespace, cfg: Dict[str, Any], out: IO[str]) -> int:
    if args.delta is not None and not (args.against or args.min_delta):
        raise ValueError("--delta is only used with --against or --min-delta")
    bf, b = _load_basis(args.input)
    n = b.n
    precision = cfg['precision']
    cap = cfg['enumeration_cap']
    code = EXIT_OK

    consts = equivalence_constants(b)
    norms = dual_norms(coefficient_functionals(b))
    a: Dict[str, Any] = {
        'input': args.input, 'n': n, 'digest': basis_file.digest(bf),
        'k1': consts.k1, 'k2': consts.k2,
        'k1_witness': consts.k1_witness + 1, 'k2_witness': consts.k2_witness + 1,
        'dual_norms': norms, 'provenance': dict(report.PROVENANCE),
    }
    logger.info(f"analyze {args.input}: n={n}, k1={consts.k1}, k2={consts.k2}")

    if n <= cap or args.force_cap:
        uc = unconditional_constant(b, cap=cap, force=args.force_cap, workers=cfg['workers'])
        a.update(K=uc.value, K_witness=uc.witness_signs, K_classes=uc.classes)
    else:
        a['K'] = None
        a['K_skipped'] = (f"n={n} exceeds enumeration cap {cap} "
                          f"(~{enumeration_cost(n):,} exact operations); rerun with --force-cap")
        logger.error(a['K_skipped'])
        code = EXIT_CAP

    delta = as_scalar(args.delta) if args.delta is not None else None
    if args.min_delta:
        res = min_dominating_delta(b)
        a.update(delta_min=res.delta_min, indexwise_delta=res.indexwise_delta,
                 assignment=[j + 1 for j in res.assignment], normalized=res.normalized)
        if delta is not None:
            a['dominated_for_delta'] = res.dominated_for(delta)

    if args.thm2:
        if a['K'] is None:
            a['thm2'] = {'skipped': "needs K"}
        else:
            try:
                cert = thm2_check(b, cap=cap, force=args.force_cap, workers=cfg['workers'])
                a['thm2'] = {'K': cert.K, 'inf_l2_sq': cert.inf_l2_sq, 'k1_sq': cert.k1_actual ** 2,
                             'k_sq_scaled': cert.k_sq_scaled, 'k2': cert.k2_actual, 'holds': cert.holds}
                if not cert.holds:
                    code = code or EXIT_VIOLATION
            except NotNormalized as e:
                a['thm2'] = {'not_applicable': str(e)}

    if args.against:
        ybf, y = _load_basis(args.against)
        if y.n != n:
            raise DimensionMismatch(n, y.n, "--against dimension")
        pr = perturbation_radius(b, y, delta)
        bp = bp_criterion(b, y)
        rel = relative_equivalence(b, y)
        section = {'digest': basis_file.digest(ybf), 'm': pr.m, 'delta': pr.delta, 'dominated': pr.dominated,
                   'bp_sum': bp.total, 'bp_passes': bp.passes, 'K1': rel.k1, 'K2': rel.k2}
        try:
            sw = sandwich_check(b, y)
            section.update(sandwich_low=sw.bound_low, sandwich_high=sw.bound_high, sandwich_holds=sw.holds)
            if not sw.holds:
                code = code or EXIT_VIOLATION
        except NotApplicable as e:
            section['sandwich'] = str(e)
        a['against'] = section

    if args.json:
        rep = report.new_report('analyze', {'input': args.input, 'against': args.against,
                                            'cap': cap, 'force_cap': args.force_cap,
                                            'delta': delta}, precision)
        rep['input_digest'] = a['digest']
        keys = ('n', 'k1', 'k2', 'k1_witness', 'k2_witness', 'K', 'K_witness', 'K_classes', 'K_skipped')
        rep['constants'] = report.jsonable({k: a[k] for k in keys if k in a}, precision)
        rep['dual_norms'] = report.jsonable(norms, precision)
        rep['provenance'] = a['provenance']
        perturb = {k: a[k] for k in ('delta_min', 'indexwise_delta', 'assignment', 'normalized',
                                      'dominated_for_delta', 'against') if k in a}
        if perturb:
            rep['perturbation'] = report.jsonable(perturb, precision)
        if 'thm2' in a:
            rep['certificates'] = report.jsonable({'thm2': a['thm2']}, precision)
        out.write(report.dumps(rep))
    else:
        ReportDashboard(out, precision).render_analysis(a)
    return code


def _construct_checks(kind: str, args: argparse.Namespace, built: Any, b: Basis,
                      bf: basis_file.BasisFile, text: str) -> Dict[str, bool]:
    checks = {'round_trip': basis_file.parse(text).columns == bf.columns}
    if kind == 'prop1':
        # prop1_block has already matched functionals and constants against the closed forms
        checks['sup_norm'] = linf_norm(b.vectors[0]) == Fraction(1, args.n)
        if not args.normalized:
            consts = equivalence_constants(b)
            checks['constants'] = (consts.k1, consts.k2) == prop1_expected_constants(args.n)
    elif kind == 'prop1_sum':
        checks['sup_norm'] = built.sup_norm_witness == Fraction(1, max(built.block_sizes))
        consts = equivalence_constants(built.basis)
        checks['blockwise_constants'] = (consts.k1, consts.k2) == (built.k1, built.k2)
    else:
        try:
            coefficient_functionals(b)
            checks['biorthogonal'] = True
        except BasisError as e:
            logger.error(f"construct {kind}: {e}")
            checks['biorthogonal'] = False
    if args.normalized:
        checks['normalized'] = b.is_normalized
    return checks


def cmd_construct(args: argparse.Namespace, cfg: Dict[str, Any], out: IO[str]) -> int:
    kind = args.kind
    if kind in ('prop1', 'random') and args.n is None:
        raise ValueError(f"construct {kind} needs --n")
    if kind == 'prop1':
        built = prop1_block(args.n, normalized=args.normalized)
        b = built.basis
        params = {'kind': kind, 'n': args.n, 'normalized': args.normalized}
    elif kind == 'prop1_sum':
        if not args.sizes:
            raise ValueError("construct prop1_sum needs --sizes, e.g. 3,4,5")
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        built = prop1_direct_sum(sizes)
        if built.basis is None:
            raise ValueError(f"dimension {built.dimension} exceeds the inversion cap {config.INVERSION_CAP}")
        b = built.basis.normalized() if args.normalized else built.basis
        params = {'kind': kind, 'sizes': sizes, 'normalized': args.normalized}
    else:
        seed = cfg['seed']
        built = None
        b = random_basis(args.n, seed=seed, mode=args.mode, radius=args.radius, normalized=args.normalized)
        params = {'kind': kind, 'n': args.n, 'seed': seed, 'mode': args.mode,
                  'radius': args.radius, 'normalized': args.normalized}

    bf = basis_file.BasisFile.from_basis(b)
    text = basis_file.serialize(bf, args.format)
    code = EXIT_OK
    checks = None
    if args.verify:
        checks = _construct_checks(kind, args, built, b, bf, text)
        failed = [name for name, ok in checks.items() if not ok]
        if failed:
            logger.error(f"construct {kind}: self-check(s) failed: {', '.join(failed)}")
            code = EXIT_VIOLATION
        else:
            logger.info(f"construct {kind}: all self-checks passed")

    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"Basis file written to {args.output}")

    if args.json:
        rep = report.new_report('construct', params, cfg['precision'])
        rep['digest'] = basis_file.digest(bf)
        rep['n'] = b.n
        if checks is not None:
            rep['checks'] = checks
        if args.output:
            rep['output'] = args.output
        else:
            rep['basis_file'] = text
        out.write(report.dumps(rep))
    elif not args.output:
        out.write(text)
    return code


def _suite_report(command: str, result, precision: int) -> Dict[str, Any]:
    rep = report.new_report(command, result.params, precision)
    rep['statement'] = result.statement
    rep['status'] = result.status
    rep['summary'] = report.jsonable(result.summary, precision)
    rep['rows'] = report.jsonable(result.rows, precision)
    return rep


def cmd_verify(args: argparse.Namespace, cfg: Dict[str, Any], out: IO[str]) -> int:
    basis = _load_basis(args.basis)[1] if args.basis else None
    engine = VerifyEngine(cfg)
    result = engine.run(args.statement, trials=args.trials, n=args.n, n_range=args.n_range,
                        seed=cfg['seed'], per_basis=args.per_basis, basis=basis)
    if args.csv:
        report.write_csv(result.rows, args.csv)
    if args.json:
        out.write(report.dumps(_suite_report('verify', result, cfg['precision'])))
    else:
        ReportDashboard(out, cfg['precision']).render_suite(args.statement, result.rows, result.summary)
    return EXIT_VIOLATION if result.violations else EXIT_OK


def cmd_search_c(args: argparse.Namespace, cfg: Dict[str, Any], out: IO[str]) -> int:
    engine = VerifyEngine(cfg)
    result = engine.search_c(n_range=args.n_range, trials=args.trials, seed=cfg['seed'], family=args.family)
    if args.csv:
        report.write_csv(result.rows, args.csv)
    if args.json:
        out.write(report.dumps(_suite_report('search-c', result, cfg['precision'])))
    else:
        ReportDashboard(out, cfg['precision']).render_search(result.rows, result.summary)
    if result.violations:
        logger.error(f"search-c: {len(result.violations)} basis/bases exceed delta = 2")
        return EXIT_VIOLATION
    return EXIT_OK


COMMANDS = {
    'analyze': cmd_analyze,
    'construct': cmd_construct,
    'verify': cmd_verify,
    'search-c': cmd_search_c,
}


# =========================================================================
# Entry
# =========================================================================
def _resolve(args: argparse.Namespace) -> Dict[str, Any]:
    cfg = settings.resolve_config(overrides={
        'enumeration_cap': args.cap,
        'precision': args.precision,
        'workers': args.workers,
        'seed': args.seed,
    }, path=args.config)
    if args.save_config:
        settings.save_config({k: cfg[k] for k in settings.get_default_config()}, path=args.config)
    cfg['force_cap'] = args.force_cap
    return cfg


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[IO[str]] = None) -> int:
    """Parse argv, run one command, map errors to exit codes."""
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return EXIT_INPUT if e.code not in (0, None) else EXIT_OK

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](args, cfg, out)
    except basis_file.BasisFileError as e:
        logger.error(f"Input error: {e}")
        return EXIT_INPUT
    except (NotNormalized, DimensionMismatch, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INPUT
    except SingularMatrix as e:
        logger.error(f"Singular input: {e}")
        return EXIT_SINGULAR
    except DimensionTooLarge as e:
        logger.error(f"Resource cap: {e}")
        return EXIT_CAP
    except BasisError as e:
        logger.error(f"Verification failed: {e}")
        return EXIT_VIOLATION
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_INPUT
