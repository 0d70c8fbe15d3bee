"""
Command-Line Interface
filter / noise / metrics / similar subcommands over XYZ and PLY files
"""
from typing import List, Optional
import argparse
import logging
import sys

from pydantic import ValidationError

from cloud_io.files import read_cloud, write_cloud
from evaluation.metrics import MSE_NEIGHBORS, evaluate
from filtering.config import FILTER_DEFAULTS, configure_logging
from filtering.pipeline import FilterParams, filter_cloud, filter_sampled, scheme_advice
from filtering.rpca import DescriptorKind
from filtering.similarity import (
    SearchMode, build_descriptor_table, calibrate_theta, find_similar, find_similar_local,
)
from geometry.cloud import PointCloud, add_gaussian_noise, build_index, denormalize, normalize
from geometry.errors import NlpfError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageError(Exception):
    """Bad command-line arguments"""


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on bad arguments"""

    def error(self, message):
        raise UsageError(message)


def _add_search_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--descriptor', choices=[d.value for d in DescriptorKind],
                        default=DescriptorKind.RPCA.value, help='Patch descriptor')
    parser.add_argument('--search', choices=[m.value for m in SearchMode],
                        default=SearchMode.NON_LOCAL.value,
                        help='Search the whole cloud or a ball around each point')
    parser.add_argument('--radius-factor', type=float,
                        default=FILTER_DEFAULTS['local_radius_factor'],
                        help='Local search radius in patch radii')
    parser.add_argument('--set-size', type=int, default=None,
                        help='Calibrate theta for this median similar-set size (overrides --theta)')


def build_parser() -> CliParser:
    parser = CliParser(prog='nlpf', description='Non-local point-cloud filtering')
    parser.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR')
    commands = parser.add_subparsers(dest='command', parser_class=CliParser)
    commands.required = True

    f = commands.add_parser('filter', help='Filter a noisy cloud')
    f.add_argument('--in', dest='input', required=True)
    f.add_argument('--out', required=True)
    f.add_argument('--k', type=int, default=FILTER_DEFAULTS['k'])
    f.add_argument('--theta', type=float, default=FILTER_DEFAULTS['theta'])
    f.add_argument('--iters', type=int, default=FILTER_DEFAULTS['iterations'])
    f.add_argument('--scheme', type=int, choices=(1, 2), default=FILTER_DEFAULTS['scheme'])
    f.add_argument('--sample', type=float, default=None, help='Fraction of points to filter')
    f.add_argument('--seed', type=int, default=0)
    f.add_argument('--report', default=None, help='Write the timing report here')
    f.add_argument('--normalize', action='store_true',
                   help='Filter at unit bounding-box diagonal, then restore scale')
    _add_search_arguments(f)

    n = commands.add_parser('noise', help='Add Gaussian noise')
    n.add_argument('--in', dest='input', required=True)
    n.add_argument('--out', required=True)
    n.add_argument('--level', type=float, required=True,
                   help='Standard deviation as a fraction of the bounding-box diagonal')
    n.add_argument('--seed', type=int, default=0)

    m = commands.add_parser('metrics', help='Chamfer distance and MSE against a reference')
    m.add_argument('--ref', required=True)
    m.add_argument('--in', dest='input', required=True)
    m.add_argument('--k', type=int, default=MSE_NEIGHBORS)

    s = commands.add_parser('similar', help='Dump the similar set of one point')
    s.add_argument('--in', dest='input', required=True)
    s.add_argument('--point', type=int, required=True)
    s.add_argument('--k', type=int, default=FILTER_DEFAULTS['k'])
    s.add_argument('--theta', type=float, default=FILTER_DEFAULTS['theta'])
    s.add_argument('--out', required=True)
    _add_search_arguments(s)
    return parser


def _filter_params(args, iterations: int = 1,
                   scheme: int = FILTER_DEFAULTS['scheme']) -> FilterParams:
    try:
        return FilterParams(
            k=args.k,
            theta=args.theta,
            iterations=iterations,
            scheme=scheme,
            descriptor=args.descriptor,
            search=args.search,
            local_radius_factor=args.radius_factor,
            set_size=args.set_size,
        )
    except ValidationError as e:
        raise UsageError(str(e))


def run_filter(args) -> int:
    params = _filter_params(args, args.iters, args.scheme)
    if args.sample is not None and not 0 < args.sample <= 1:
        raise UsageError(f"--sample must be in (0, 1], got {args.sample}")

    print(f"💡 {scheme_advice()}")
    cloud = read_cloud(args.input)
    print(f"📂 Loaded {len(cloud)} points from {args.input}")

    working, center, scale = (normalize(cloud) if args.normalize else (cloud, None, None))
    if args.sample is not None:
        filtered, report = filter_sampled(working, params, args.sample, args.seed)
    else:
        filtered, report = filter_cloud(working, params)
    if args.normalize:
        filtered = denormalize(filtered, center, scale)

    write_cloud(filtered, args.out)
    print(f"✅ Filtered cloud written to {args.out} ({report.total:.2f}s)")

    if args.report:
        with open(args.report, 'w') as handle:
            handle.write('\n'.join(report.to_lines()) + '\n')
        print(f"📝 Report written to {args.report}")
    return EXIT_OK


def run_noise(args) -> int:
    if args.level < 0:
        raise UsageError(f"--level must be non-negative, got {args.level}")
    cloud = read_cloud(args.input)
    noisy = add_gaussian_noise(cloud, args.level, args.seed)
    write_cloud(noisy, args.out)
    print(f"✅ Noisy cloud written to {args.out} (level {args.level}, seed {args.seed})")
    return EXIT_OK


def run_metrics(args) -> int:
    if args.k < 1:
        raise UsageError(f"--k must be at least 1, got {args.k}")
    result = evaluate(read_cloud(args.ref), read_cloud(args.input), args.k)
    scaled = result.scaled()
    print(result.to_line())
    print(f"📊 chamfer {scaled['chamfer']:.4f} x1e-5, mse {scaled['mse']:.4f} x1e-3")
    return EXIT_OK


def run_similar(args) -> int:
    params = _filter_params(args)
    cloud = read_cloud(args.input)
    if not 0 <= args.point < len(cloud):
        raise UsageError(f"--point {args.point} outside 0..{len(cloud) - 1}")

    index = build_index(cloud)
    table = build_descriptor_table(cloud, params.k, params.rpca, index, params.descriptor)
    theta = params.theta if params.set_size is None else calibrate_theta(table, params.set_size)
    if params.search == SearchMode.LOCAL:
        similar = find_similar_local(args.point, table, theta, cloud, index,
                                     params.local_radius_factor)
    else:
        similar = find_similar(args.point, table, theta)
    write_cloud(PointCloud(cloud.points[similar.member_indices]), args.out)
    print(f"✅ {len(similar)} similar patch centers written to {args.out}")
    return EXIT_OK


COMMANDS = {
    'filter': run_filter,
    'noise': run_noise,
    'metrics': run_metrics,
    'similar': run_similar,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand

    Returns:
        int: 0 on success, 1 on usage errors, 2 on I/O or parse errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return EXIT_OK if e.code in (None, 0) else EXIT_USAGE

    configure_logging(args.log_level)

    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NlpfError, OSError, ValueError) as e:
        logger.error("%s failed: %s", args.command, e)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
