"""
Command-line interface: analyze, certify, generate, perturb, decompose, bell, audit.

Exit codes: 0 success or GenuineContextuality, 2 unreadable document,
3 invalid scenario/model, 4 solver failure, 5 bad estimator input,
10 NotCertified, 11 ConditionFailed.
"""
from typing import Dict, List, Optional, Sequence
import argparse
import json
import logging
import sys

from .batch import BatchRunner, BatchTask
from .catalog import catalog_entries, experiment_presets, ncycle_box, ncycle_vertices
from .certify import (
    EtaKind,
    SigmaPolicy,
    Verdict,
    certify,
    certify_inequality,
    estimate_eta,
    estimate_sigma,
    run_preset,
)
from .config import DEFAULT_BACKEND, INCIDENCE_SIZE_CAP, MAX_WORKERS, PROBABILITY_TOLERANCE
from .contextual_fractions import (
    bell_inequality,
    nc_decomposition,
    noncontextual_fraction,
    nonsignalling_fraction,
    ns_decomposition,
)
from .documents import (
    dumps,
    hvm_to_document,
    model_to_document,
    read_hvm,
    read_model,
    report_document,
    write_document,
)
from .empirical import EmpiricalModel, is_nonsignalling, mim, perturb
from .exceptions import (
    ContextualityError,
    CorrectedBoundViolation,
    DegenerateResidual,
    DocumentParseError,
    EstimatorInputError,
    ModelError,
    NumericalFailure,
)
from .hvm import audit, boundary_hvm, eta_star, signalling_hvm_for_pr_box

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4
EXIT_ESTIMATOR = 5
VERDICT_EXIT_CODES = {
    Verdict.GENUINE: 0,
    Verdict.NOT_CERTIFIED: 10,
    Verdict.CONDITION_FAILED: 11,
}


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, DocumentParseError):
        return EXIT_PARSE
    if isinstance(error, EstimatorInputError):
        return EXIT_ESTIMATOR
    if isinstance(error, (NumericalFailure, CorrectedBoundViolation, DegenerateResidual)):
        return EXIT_SOLVER
    # ScenarioError, ModelError, HvmError, SizeCapExceeded, LinearProgramError, BoundsInverted
    return EXIT_VALIDATION


def _emit(args, human: str, kind: str, payload: Dict, source: Optional[str] = None):
    print(human)
    if args.json:
        print(dumps(report_document(kind, payload, source)), end='')


# analyze

def analyze_model(model: EmpiricalModel, backend: str = DEFAULT_BACKEND,
                  size_cap: int = INCIDENCE_SIZE_CAP,
                  tolerance: float = PROBABILITY_TOLERANCE) -> Dict:
    ncf = noncontextual_fraction(model, backend, size_cap)
    nsf = nonsignalling_fraction(model, backend, size_cap)
    signalling = is_nonsignalling(model, tolerance)
    return {
        'scenario': model.scenario.describe(),
        'cf': ncf.complement,
        'ncf': ncf.value,
        'sf': nsf.complement,
        'nsf': nsf.value,
        'mim': mim(model),
        'nonsignalling': signalling.nonsignalling,
        'worst_discrepancy': signalling.worst,
        'eta_star': eta_star(model),
        'diagnostics': [d.to_dict() for d in model.diagnostics],
    }


def _analysis_summary(path: str, analysis: Dict) -> str:
    lines = [f"== {path}"]
    for key in ('cf', 'ncf', 'sf', 'nsf', 'mim', 'eta_star'):
        lines.append(f"{key.upper():<11} {float(analysis[key]):.6f}")
    lines.append(f"{'NS':<11} {'yes' if analysis['nonsignalling'] else 'no'}")
    for diagnostic in analysis['diagnostics']:
        lines.append(f"[{diagnostic['level']}] {diagnostic['message']}")
    return '\n'.join(lines)


def _analyze_path(path: str, args) -> Dict:
    model, source = read_model(path, use_counts=args.counts, renormalize=args.renormalize)
    return {'source': source, **analyze_model(model, args.backend, args.size_cap, args.tolerance)}


def cmd_analyze(args) -> int:
    if args.batch:
        tasks = [BatchTask(path, _analyze_path, path, args) for path in args.paths]
        results = BatchRunner(args.workers).run_all(tasks)
    else:
        tasks, results = [], []
        for path in args.paths:
            task = BatchTask(path, _analyze_path, path, args)
            tasks.append(task)
            results.append(task.run())

    code = EXIT_OK
    for task, result in zip(tasks, results):
        if task.error is not None:
            print(f"== {task.name}\nerror: {task.error}")
            code = code or exit_code_for(task.error)
            continue
        analysis = dict(result['result'])
        source = analysis.pop('source')
        _emit(args, _analysis_summary(task.name, analysis), 'analysis', analysis, source)
    return code


# certify

def _estimator_data(args) -> Dict:
    if args.eta_data is None:
        return {}
    try:
        data = json.loads(args.eta_data)
    except json.JSONDecodeError as e:
        raise EstimatorInputError(f"--eta-data is not valid JSON: {e.msg}")
    if not isinstance(data, dict):
        raise EstimatorInputError("--eta-data must be a JSON object")
    return data


def cmd_certify(args) -> int:
    if args.preset:
        presets = experiment_presets()
        if args.preset not in presets:
            raise EstimatorInputError(f"Unknown preset {args.preset}; choose from {sorted(presets)}")
        outcome = run_preset(presets[args.preset])
        human = outcome.report.summary() if outcome.report else (
            f"eta {outcome.eta.value:.6f}  [{outcome.eta.provenance}]\n"
            f"CF <= {outcome.cf_bound:.6f} for any hidden-variable model with 2eta+sigma < 1")
        if outcome.winter is not None:
            human += (f"\ndeterministic bound {outcome.winter.winter_bound:.6f} "
                      f"(saturates at {outcome.winter.winter_saturation:.6g}), relaxed bound {outcome.winter.our_bound:.6f}")
        if outcome.expected:
            human += f"\nexpected    {outcome.expected}"
        _emit(args, human, 'preset', outcome.to_dict())
        return VERDICT_EXIT_CODES[outcome.report.verdict] if outcome.report else EXIT_OK

    if args.eta is not None:
        eta = estimate_eta(EtaKind.MANUAL, {'value': args.eta})
    elif args.eta_kind is not None:
        eta = estimate_eta(args.eta_kind, _estimator_data(args))
    else:
        raise EstimatorInputError("Give --eta or --eta-kind with --eta-data")

    source, model = None, None
    if args.path:
        model, source = read_model(args.path, use_counts=args.counts, renormalize=args.renormalize)

    if args.sigma is not None:
        sigma = estimate_sigma(SigmaPolicy.MANUAL, manual_value=args.sigma)
    else:
        sigma = estimate_sigma(args.sigma_policy, model=model, backend=args.backend)

    inequality = None
    if args.inequality:
        inequality = {'beta_cl': args.inequality[0], 'beta_max': args.inequality[1]}

    if model is not None:
        if args.observed is not None and inequality is not None:
            inequality['observed'] = args.observed
        report = certify(model, eta, sigma, args.backend, inequality=inequality, sigma_prime=args.sigma_prime)
    elif args.observed is not None and inequality is not None:
        report = certify_inequality(args.observed, inequality['beta_cl'], inequality['beta_max'], eta, sigma)
    else:
        raise EstimatorInputError("certify needs a model document, or --inequality with --observed")

    report.source = {'fingerprint': source} if source else None
    _emit(args, report.summary(), 'certification', report.to_dict(), source)
    return VERDICT_EXIT_CODES[report.verdict]


# generate / perturb

def _generated_document(args) -> Dict:
    entries = catalog_entries()
    if args.name in entries:
        return model_to_document(entries[args.name].model(exact=args.exact))
    if args.name == 'ncycle-box':
        return model_to_document(ncycle_box(args.n, exact=args.exact))
    if args.name == 'ncycle-hs1':
        return model_to_document(ncycle_vertices(args.n, exact=args.exact)[0])
    if args.name == 'boundary-hvm':
        return hvm_to_document(boundary_hvm(args.n, args.alpha, backend=args.backend).hvm)
    if args.name == 'pr-box-hvm':
        return hvm_to_document(signalling_hvm_for_pr_box())
    raise ModelError(f"Unknown generator {args.name}; choose from {generator_names()}")


def generator_names() -> List[str]:
    return sorted(catalog_entries()) + ['boundary-hvm', 'ncycle-box', 'ncycle-hs1', 'pr-box-hvm']


def _write_or_print(document: Dict, out: Optional[str]):
    if out:
        write_document(out, document)
    else:
        print(dumps(document), end='')


def cmd_generate(args) -> int:
    _write_or_print(_generated_document(args), args.output)
    return EXIT_OK


def cmd_perturb(args) -> int:
    model, _ = read_model(args.path, use_counts=args.counts, renormalize=args.renormalize)
    _write_or_print(model_to_document(perturb(model, args.epsilon, seed=args.seed)), args.output)
    return EXIT_OK


# decompose / bell / audit

def cmd_decompose(args) -> int:
    model, source = read_model(args.path, use_counts=args.counts, renormalize=args.renormalize)
    build = nc_decomposition if args.kind == 'nc' else ns_decomposition
    decomposition = build(model, args.backend, args.size_cap)
    label = 'NCF' if args.kind == 'nc' else 'NSF'
    payload = {
        'decomposition': decomposition.kind,
        'weight': decomposition.weight,
        'part_a': None if decomposition.part_a is None else decomposition.part_a.to_mapping(),
        'part_b': None if decomposition.part_b is None else decomposition.part_b.to_mapping(),
    }
    human = f"{label:<11} {float(decomposition.weight):.6f}\n{'residual':<11} {float(1 - decomposition.weight):.6f}"
    _emit(args, human, 'decomposition', payload, source)
    return EXIT_OK


def cmd_bell(args) -> int:
    model, source = read_model(args.path, use_counts=args.counts, renormalize=args.renormalize)
    inequality = bell_inequality(model, args.backend, args.size_cap)
    lines = []
    for context, terms in inequality.to_dict()['coefficients'].items():
        rendered = '  '.join(f"{outcome}:{float(a):+.6f}" for outcome, a in terms.items())
        lines.append(f"[{context}] {rendered}")
    lines += [
        f"{'value':<11} {float(inequality.value):.6f}",
        f"{'bound':<11} {float(inequality.classical_bound):.6f}",
        f"{'violation':<11} {float(inequality.normalized_violation):.6f}",
    ]
    _emit(args, '\n'.join(lines), 'bell_inequality', inequality.to_dict(), source)
    return EXIT_OK


def cmd_audit(args) -> int:
    hvm, source = read_hvm(args.path)
    report = audit(hvm, args.backend, args.size_cap)
    lines = [f"{'lambda':<11} {'eta':>9} {'sigma':>9} {'CF':>9}"]
    for entry in report.per_lambda:
        lines.append(f"{entry.label:<11} {float(entry.eta):>9.6f} {float(entry.sigma):>9.6f} {float(entry.cf):>9.6f}")
    lines += [
        f"{'eta':<11} {float(report.eta):.6f}",
        f"{'sigma':<11} {float(report.sigma):.6f}",
        f"{'2eta+sigma':<11} {float(report.condition_value):.6f} ({'< 1' if report.condition_ok else '>= 1'})",
        f"{'realized CF':<11} {float(report.realized_cf):.6f}",
    ]
    _emit(args, '\n'.join(lines), 'audit', report.to_dict(), source)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--backend', choices=['float', 'exact'], default=DEFAULT_BACKEND,
                        help=f'LP backend (default: {DEFAULT_BACKEND})')
    common.add_argument('--size-cap', type=int, default=INCIDENCE_SIZE_CAP,
                        help='Largest incidence matrix, in entries')
    common.add_argument('--tolerance', type=float, default=PROBABILITY_TOLERANCE,
                        help='Probability tolerance for non-signalling checks')
    common.add_argument('--json', action='store_true', help='Print the machine-readable report after the summary')
    common.add_argument('--verbose', '-v', action='store_true', help='Verbose output')

    model_input = argparse.ArgumentParser(add_help=False)
    model_input.add_argument('--counts', action='store_true', help='Read the counts section instead of the model')
    model_input.add_argument('--renormalize', action='store_true',
                             help='Rescale contexts whose probabilities do not sum to 1; each correction is reported')

    parser = argparse.ArgumentParser(
        prog='contextuality',
        description='Contextual and signalling fractions, and certification of genuine contextuality',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    analyze = commands.add_parser('analyze', parents=[common, model_input], help='CF, SF, MIM and eta* of models')
    analyze.add_argument('paths', nargs='+')
    analyze.add_argument('--batch', action='store_true', help='Process documents concurrently')
    analyze.add_argument('--workers', type=int, default=MAX_WORKERS,
                         help=f'Concurrent workers in batch mode (default: {MAX_WORKERS})')
    analyze.set_defaults(handler=cmd_analyze)

    cert = commands.add_parser('certify', parents=[common, model_input], help='Certify genuine contextuality')
    cert.add_argument('path', nargs='?')
    cert.add_argument('--eta', type=float, help='Manual eta')
    cert.add_argument('--eta-kind', choices=[k.value for k in EtaKind], help='Eta estimator')
    cert.add_argument('--eta-data', help='Estimator inputs as a JSON object')
    cert.add_argument('--sigma', type=float, help='Manual sigma')
    cert.add_argument('--sigma-policy', choices=[p.value for p in SigmaPolicy], default=SigmaPolicy.ZERO.value)
    cert.add_argument('--inequality', type=float, nargs=2, metavar=('BETA_CL', 'BETA_MAX'))
    cert.add_argument('--observed', type=float, help='Observed inequality value')
    cert.add_argument('--sigma-prime', type=float, help='Also apply the fully deterministic criterion CF <= sigma_prime')
    cert.add_argument('--preset', help='Replay a published certification')
    cert.set_defaults(handler=cmd_certify)

    generate = commands.add_parser('generate', parents=[common], help='Write a catalog model or HVM')
    generate.add_argument('name', help=f"One of {', '.join(generator_names())}")
    generate.add_argument('--n', type=int, default=4, help='n-cycle size')
    generate.add_argument('--alpha', default='3/4', help='Boundary HVM weight in [1/2, 1]')
    generate.add_argument('--exact', action='store_true', help='Rational probabilities')
    generate.add_argument('--output', '-o')
    generate.set_defaults(handler=cmd_generate)

    perturbation = commands.add_parser('perturb', parents=[common, model_input], help='Seeded perturbation')
    perturbation.add_argument('path')
    perturbation.add_argument('--epsilon', type=float, required=True)
    perturbation.add_argument('--seed', type=int, default=0)
    perturbation.add_argument('--output', '-o')
    perturbation.set_defaults(handler=cmd_perturb)

    decompose = commands.add_parser('decompose', parents=[common, model_input], help='NC or NS decomposition')
    decompose.add_argument('path')
    decompose.add_argument('--kind', choices=['nc', 'ns'], default='nc')
    decompose.set_defaults(handler=cmd_decompose)

    bell = commands.add_parser('bell', parents=[common, model_input], help='Bell inequality optimised to the data')
    bell.add_argument('path')
    bell.set_defaults(handler=cmd_bell)

    audit_parser = commands.add_parser('audit', parents=[common], help='Audit a hidden-variable model')
    audit_parser.add_argument('path')
    audit_parser.set_defaults(handler=cmd_audit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s [%(levelname)s] %(message)s',
        datefmt='%H:%M:%S',
    )
    try:
        return args.handler(args)
    except ContextualityError as e:
        code = exit_code_for(e)
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return code


if __name__ == '__main__':
    sys.exit(main())
