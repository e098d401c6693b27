#!/usr/bin/env python
import argparse
import os
import sys

from orliczlab.lib.data_types import Field, OpNormMethod
from orliczlab.lib.exceptions import (
    ConfigurationError,
    ExponentDomainError,
    OrliczLabError,
    RankMismatch,
)
from orliczlab.lib.configure import report_directory
from orliczlab.lib.experiment_config import ExperimentConfig
from orliczlab.lib.experiments import (
    Instance,
    admissibility_report,
    classical_ratios,
    probe_optimality,
    search_constant,
    verify_inequality,
)
from orliczlab.lib.exponents import (
    ExponentTuple,
    ProblemSpec,
    cotcrit_admissible,
    cotcrit_thresholds,
    parse_exponent,
)
from orliczlab.lib.opnorm import operator_norm
from orliczlab.lib.report import (
    JsonRecord,
    log_table,
    render_json,
    write_csv,
    write_json,
)
from orliczlab.lib.tensor import CoefficientTensor, MixedNormSpec, mixed_norm
from orliczlab.lib.witness import WitnessFamily, WitnessKind

from orliczlab import settings

import logging.config
logging.config.dictConfig(settings.logger_config)
logger = logging.getLogger()

# the short method names accepted next to the full ones
METHOD_ALIASES = {
    'exact': OpNormMethod.EXACT_ENUMERATION,
    'diagonal': OpNormMethod.DIAGONAL_CLOSED_FORM,
    'ascent': OpNormMethod.ALTERNATING_ASCENT,
}
FILE_NOT_FOUND_EXIT_CODE = 3


def exponent_list(text):
    """
    Type function for argparse - comma separated exponents 'inf', integers
    or 'a/b'.
    """
    try:
        return ExponentTuple.parse(text)
    except ExponentDomainError as e:
        raise argparse.ArgumentTypeError(str(e))


def decimal_exponent_list(text):
    """
    Type function for argparse - exponents which may also be decimals,
    as used for quasi-norm sweeps.
    """
    try:
        return ExponentTuple.parse(text, allow_decimal=True)
    except ExponentDomainError as e:
        raise argparse.ArgumentTypeError(str(e))


def exponent(text):
    try:
        return parse_exponent(text)
    except ExponentDomainError as e:
        raise argparse.ArgumentTypeError(str(e))


def int_list(text):
    """Type function for argparse - comma separated integers."""
    try:
        return [int(t) for t in text.split(',') if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a list of integers")


def method_type(text):
    if text in METHOD_ALIASES:
        return METHOD_ALIASES[text]
    try:
        return OpNormMethod(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown method '{text}'")


def _pick(value, fallback):
    return value if value is not None else fallback


class Parser(object):
    def __init__(self):
        config_path = os.path.join(settings.home_dir, 'config.ini')
        self.config = settings.read_config(config_path)
        loglevel = self.config.get('logging', 'loglevel', fallback='INFO')

        # setup the command line parser
        self.parser = argparse.ArgumentParser(
            prog='orliczlab',
            description='Mixed-norm inequalities for multilinear forms: '
                        'exponent thresholds, operator norms and '
                        'optimality experiments.')
        self.parser.add_argument(
            '--loglevel', default=loglevel, choices=['INFO', 'DEBUG'])
        self.parser.add_argument(
            '--jobs', type=int, default=settings.JOBS,
            help='worker processes, results do not depend on it')
        self.parser.add_argument(
            '--output', default=None,
            help='report file, JSON if it ends in .json, CSV otherwise')
        self.parser.add_argument(
            '--save', action='store_true',
            help='write the report into the report directory of config.ini')
        self.parser.add_argument(
            '--config', default=None,
            help='experiment config JSON, or a JSON report to rerun')
        self.parser.add_argument(
            '--json', action='store_true',
            help='print the full report as JSON')
        subparsers = self.parser.add_subparsers(dest='cmd')

        # cmd: exponents
        parser_exponents = subparsers.add_parser(
            'exponents', help='minimal admissible exponents of a spec',
            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        parser_exponents.add_argument(
            '--m', type=int, default=None, help='arity (defaults to len(p))')
        parser_exponents.add_argument(
            '--p', type=exponent_list, required=True,
            help="space exponents, e.g. 'inf,inf' or '4,4'")
        parser_exponents.add_argument(
            '--sigma', type=int_list, default=None,
            help='summation order, outermost axis first (1-based)')

        # cmd: cotcrit
        parser_cotcrit = subparsers.add_parser(
            'cotcrit',
            help='admissible exponents for operators into l_r',
            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        parser_cotcrit.add_argument(
            '--p', type=exponent_list, required=True, help='space exponents')
        parser_cotcrit.add_argument(
            '--r', type=exponent, required=True,
            help='codomain exponent, 2 <= r < inf')
        parser_cotcrit.add_argument(
            '--q', type=exponent_list, default=None,
            help='exponents q_1..q_m to check')

        # cmd: mixed-norm
        parser_mixed = subparsers.add_parser(
            'mixed-norm', help='permuted mixed norm of a tensor file',
            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        parser_mixed.add_argument('--tensor', required=True, help='tensor JSON')
        parser_mixed.add_argument(
            '--q', type=decimal_exponent_list, required=True,
            help='exponents aligned with the order, outermost first')
        parser_mixed.add_argument(
            '--order', type=int_list, default=None,
            help='summation order (1-based axes), natural by default')

        # cmd: opnorm
        parser_opnorm = subparsers.add_parser(
            'opnorm', help='operator norm of a tensor file',
            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        parser_opnorm.add_argument('--tensor', required=True, help='tensor JSON')
        parser_opnorm.add_argument(
            '--p', type=exponent_list, required=True, help='space exponents')
        parser_opnorm.add_argument(
            '--method', type=method_type, default=OpNormMethod.AUTO,
            help='auto, exact, diagonal or ascent')
        self._add_norm_arguments(parser_opnorm)

        # cmd: verify
        parser_verify = subparsers.add_parser(
            'verify', help='ratio table of an inequality over instances',
            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        self._add_spec_arguments(parser_verify)
        parser_verify.add_argument(
            '--q', type=exponent_list, default=None,
            help='outer exponents q_1..q_(m-1), an m-th entry is replaced '
                 'by the optimal innermost exponent')
        parser_verify.add_argument(
            '--tensor', action='append', default=None,
            help='tensor JSON, may be repeated')
        self._add_family_arguments(parser_verify)
        parser_verify.add_argument(
            '--k', type=int, default=None,
            help='hadamard order exponent, the matrix has size 2^k')
        parser_verify.add_argument(
            '--classical', action='store_true',
            help='also report the three classical bilinear ratios')
        parser_verify.add_argument(
            '--check-embedding', action='store_true',
            help='assert that zero padding keeps every ratio')
        self._add_norm_arguments(parser_verify)

        # cmd: probe
        parser_probe = subparsers.add_parser(
            'probe', help='growth of the ratio along a witness family',
            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        self._add_spec_arguments(parser_probe)
        parser_probe.add_argument(
            '--q', type=decimal_exponent_list, default=None,
            help='exponents, decimals allowed')
        self._add_family_arguments(parser_probe)
        parser_probe.add_argument(
            '--codomain-r', type=exponent, default=None,
            help='vector-valued diagonal witness into l_r')
        parser_probe.add_argument(
            '--threshold', type=float, default=None,
            help='slope above which the ratio counts as growing')
        self._add_norm_arguments(parser_probe)

        # cmd: search-constant
        parser_search = subparsers.add_parser(
            'search-constant',
            help='largest (l_2, l_1) ratio over n x n sign matrices',
            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        parser_search.add_argument('--n', type=int, default=None, help='matrix size')
        parser_search.add_argument(
            '--no-symmetry', action='store_true',
            help='enumerate all sign matrices instead of one per orbit')
        parser_search.add_argument(
            '--budget', type=int, default=None,
            help='cap on classes times enumerated sign vectors')

    @staticmethod
    def _add_spec_arguments(parser):
        parser.add_argument('--p', type=exponent_list, default=None,
                            help='space exponents')
        parser.add_argument('--sigma', type=int_list, default=None,
                            help='summation order, outermost axis first')

    @staticmethod
    def _add_family_arguments(parser):
        parser.add_argument(
            '--family', default=None, choices=[k.value for k in WitnessKind],
            help='witness family')
        parser.add_argument('--n', type=int_list, default=None,
                            help='sizes, comma separated')
        parser.add_argument('--pins', type=int, default=None,
                            help='pinned slots of a pinned-diagonal witness')
        parser.add_argument('--seeds', type=int_list, default=None,
                            help='seeds of a random family, comma separated')

    @staticmethod
    def _add_norm_arguments(parser):
        parser.add_argument('--starts', type=int, default=None,
                            help='ascent starts')
        parser.add_argument('--seed', type=int, default=None,
                            help='ascent seed (0 unless a config sets one)')
        parser.add_argument('--tol', type=float, default=None,
                            help='relative sweep improvement that stops a start')
        parser.add_argument('--max-sweeps', type=int, default=None,
                            help='sweep cap per ascent start')
        parser.add_argument('--enumeration-budget', type=int, default=None,
                            help='cap on enumerated sign-vector combinations')

    def parse_arguments(self, argv=None):
        return self.parser.parse_args(argv)

    def run_commands(self, args):
        # program execution
        if args.loglevel:
            # update the loglevel of the stdout handler to the user choice
            logger.handlers[0].setLevel(args.loglevel)

        config = ExperimentConfig.load(args.config) if args.config else None

        if args.cmd == 'exponents':
            p = args.p
            m = _pick(args.m, len(p))
            spec = ProblemSpec(m=m, p=p, sigma=args.sigma)
            report = admissibility_report(spec)
            logger.info(str(report))
            logger.info(render_json(report.to_json()))
            self._emit(report, args, config)

        elif args.cmd == 'cotcrit':
            thresholds = cotcrit_thresholds(args.p, args.r)
            logger.info(f"lambda thresholds: {thresholds}")
            result = {'p': args.p.to_json(), 'r': str(args.r),
                      'thresholds': thresholds.to_json()}
            if args.q is not None:
                verdict = cotcrit_admissible(args.p, args.r, args.q)
                logger.info(f"q={args.q} admissible={verdict.admissible}")
                result['q'] = args.q.to_json()
                result['admissible'] = verdict.admissible
            if args.json:
                logger.info(render_json(result))
            self._emit(JsonRecord(result), args, config)

        elif args.cmd == 'mixed-norm':
            tensor = CoefficientTensor.load(args.tensor)
            order = args.order or list(range(1, tensor.rank + 1))
            value = mixed_norm(tensor, MixedNormSpec(order=order, exps=args.q))
            logger.info(f"{value:.12g}")
            self._emit(JsonRecord({
                'tensor': os.path.abspath(args.tensor),
                'order': list(order),
                'q': args.q.to_json(),
                'mixed_norm': value,
            }), args, config)

        elif args.cmd == 'opnorm':
            tensor = CoefficientTensor.load(args.tensor)
            estimate = operator_norm(
                tensor, args.p, method=args.method,
                budget=args.enumeration_budget, starts=args.starts,
                seed=_pick(args.seed, config.seed if config else 0),
                tol=_pick(args.tol, config.tol if config else None),
                max_sweeps=_pick(args.max_sweeps, config.max_sweeps if config else None),
                jobs=args.jobs)
            logger.info(str(estimate))
            if args.json:
                logger.info(render_json(estimate.to_json()))
            self._emit(estimate, args, config)

        elif args.cmd == 'verify':
            config = self._resolve_config(args, config)
            spec, instances = self._verify_instances(args, config)
            report = verify_inequality(
                spec, config.q, instances,
                check_embedding=config.check_embedding,
                budget=config.enumeration_budget, starts=config.starts,
                seed=config.seed, tol=config.tol, max_sweeps=config.max_sweeps,
                jobs=args.jobs)
            log_table(report, config.experiment_id)
            if config.classical:
                for instance in instances:
                    ratios = classical_ratios(
                        instance.tensor, budget=config.enumeration_budget,
                        starts=config.starts, seed=config.seed, tol=config.tol,
                        max_sweeps=config.max_sweeps)
                    logger.info(
                        f"{instance.label}: orlicz={ratios.orlicz:.12g} "
                        f"littlewood_mixed={ratios.littlewood_mixed:.12g} "
                        f"littlewood_43={ratios.littlewood_43:.12g}")
            logger.info(report.summary())
            if args.json:
                logger.info(render_json(report.to_json()))
            self._emit(report, args, config)

        elif args.cmd == 'probe':
            config = self._resolve_config(args, config)
            if config.family is None:
                raise ConfigurationError("probe needs a witness family")
            report = probe_optimality(
                config.spec, config.q, config.family, config.n_range,
                seeds=config.seeds, threshold=config.growth_threshold,
                budget=config.enumeration_budget, starts=config.starts,
                tol=config.tol, max_sweeps=config.max_sweeps, jobs=args.jobs)
            log_table(report, config.experiment_id)
            logger.info(report.summary())
            if args.json:
                logger.info(render_json(report.to_json()))
            self._emit(report, args, config)

        elif args.cmd == 'search-constant':
            config = config or ExperimentConfig(experiment_id='search-constant')
            n = _pick(args.n, config.n_range[0] if config.n_range else None)
            if n is None:
                raise ConfigurationError("search-constant needs --n")
            budget = _pick(args.budget, config.search_budget)
            config.n_range = [n]
            config.search_budget = budget
            report = search_constant(
                n, reduce_symmetry=not args.no_symmetry, budget=budget,
                jobs=args.jobs)
            logger.info(report.summary())
            if args.json:
                logger.info(render_json(report.to_json()))
            self._emit(report, args, config)

        else:
            self.parser.print_help()
        return 0

    @staticmethod
    def _resolve_config(args, config):
        """Merges command line flags over an optional config file."""
        config = config or ExperimentConfig(experiment_id=args.cmd)
        if args.p is not None:
            config.spec = ProblemSpec(
                m=len(args.p), p=args.p,
                sigma=args.sigma or (config.spec.sigma if config.spec and
                                     len(config.spec.p) == len(args.p) else None))
        elif args.sigma is not None and config.spec is not None:
            config.spec = ProblemSpec(
                m=config.spec.m, p=config.spec.p, sigma=args.sigma,
                field=config.spec.field)
        if config.spec is None:
            raise ConfigurationError(f"{args.cmd} needs space exponents --p")
        if args.q is not None:
            config.q = args.q
        if config.q is None:
            raise ConfigurationError(f"{args.cmd} needs exponents --q")
        if args.family is not None:
            codomain_r = getattr(args, 'codomain_r', None)
            config.family = WitnessFamily(
                kind=args.family, m=config.spec.m, pins=args.pins,
                codomain_r=codomain_r)
        if args.n is not None:
            config.n_range = args.n
        if args.seeds is not None:
            config.seeds = args.seeds
        config.enumeration_budget = _pick(
            args.enumeration_budget, config.enumeration_budget)
        config.starts = _pick(args.starts, config.starts)
        config.seed = _pick(args.seed, config.seed)
        config.tol = _pick(args.tol, config.tol)
        config.max_sweeps = _pick(args.max_sweeps, config.max_sweeps)
        if getattr(args, 'tensor', None):
            config.tensors = [os.path.abspath(path) for path in args.tensor]
        config.check_embedding = (
            config.check_embedding or getattr(args, 'check_embedding', False))
        config.classical = config.classical or getattr(args, 'classical', False)
        if getattr(args, 'threshold', None) is not None:
            config.growth_threshold = args.threshold
        return config

    @staticmethod
    def _verify_instances(args, config):
        instances = []
        for path in config.tensors:
            tensor = CoefficientTensor.load(path)
            instances.append(Instance(
                tensor=tensor, n=max(tensor.dims),
                label=os.path.basename(path)))
        family = config.family
        if family is not None:
            if family.is_vector_valued:
                raise ConfigurationError("verify takes scalar families")
            if family.kind is WitnessKind.HADAMARD and args.k is not None:
                config.n_range = [2 ** args.k]
            sizes = config.n_range
            if not sizes:
                raise ConfigurationError("a family needs sizes --n (or --k)")
            seeds = config.seeds if family.is_random else config.seeds[:1]
            for n in sizes:
                for seed in seeds:
                    instances.append(Instance(
                        tensor=family.emit(n, seed=seed), n=n,
                        seed=seed if family.is_random else None,
                        label=str(family)))
        if not instances:
            raise ConfigurationError("verify needs --tensor or --family")

        spec = config.spec
        if any(i.tensor.field is Field.COMPLEX for i in instances):
            spec = ProblemSpec(m=spec.m, p=spec.p, sigma=spec.sigma,
                               field=Field.COMPLEX)
        for instance in instances:
            if instance.tensor.rank != spec.m:
                raise RankMismatch(
                    f"{instance.label} has rank {instance.tensor.rank}, "
                    f"p has {spec.m} entries")
        return spec, instances

    def _emit(self, report, args, config):
        """Writes the report to --output or, with --save, the report directory."""
        output = args.output or (config.output if config is not None else None)
        if output is None and args.save:
            fmt = config.output_format if config is not None else 'json'
            if not hasattr(report, 'rows') and not hasattr(report, 'best_ratio'):
                fmt = 'json'
            name = config.experiment_id if config is not None else args.cmd
            directory = report_directory(self.config, settings.home_dir)
            os.makedirs(directory, exist_ok=True)
            output = os.path.join(directory, f"{name}.{fmt}")
        if output is None:
            return
        tabular = hasattr(report, 'rows') or hasattr(report, 'best_ratio')
        if output.endswith('.json') or not tabular:
            write_json(report, output, config=config)
        else:
            experiment_id = config.experiment_id if config else args.cmd
            write_csv(report, output, experiment_id=experiment_id)
        logger.info(f"report written to {output}")


def run(argv=None) -> int:
    """Runs one command and returns the process exit code."""
    parser = Parser()
    args = parser.parse_arguments(argv)
    try:
        return parser.run_commands(args)
    except OrliczLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except FileNotFoundError as e:
        logger.error(f"file not found: {e.filename}")
        return FILE_NOT_FOUND_EXIT_CODE


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
