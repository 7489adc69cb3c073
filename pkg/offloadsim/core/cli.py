"""The :code:`sim` command."""
import argparse
import logging
import sys

from .config import ExperimentConfig, load_config
from .datasets import convert_linqs
from .errors import SimError
from .harness import run_ablation, run_partition_bench, run_sweep, run_training
from .version import __version__


log = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'


def _config(args):

    config = load_config(args.config) if args.config else ExperimentConfig().validate()
    return config.override(out_dir=args.out, seed=args.seed)


def cmd_sweep(args):
    return run_sweep(_config(args))


def cmd_bench(args):
    return run_partition_bench(_config(args))


def cmd_train(args):
    return run_training(_config(args))


def cmd_ablate(args):
    return run_ablation(_config(args))


def cmd_convert(args):
    graph = convert_linqs(args.content, args.cites, args.output)
    log.info("Wrote %s", graph)
    return args.output


def _experiment(sub, name, func, help):

    parser = sub.add_parser(name, help=help)
    parser.add_argument("--config", help="key = value configuration file, defaults apply when omitted")
    parser.add_argument("--out", help="directory receiving the CSV files, overrides out_dir")
    parser.add_argument("--seed", type=int, help="run this seed only, overrides seeds")
    parser.set_defaults(func=func)

    return parser


def build_parser():

    parser = argparse.ArgumentParser(prog="sim", description="Simulate GNN inference offloading on edge servers")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log at debug level")

    sub = parser.add_subparsers(dest="command", required=True)

    _experiment(sub, "sweep", cmd_sweep, "evaluate a method over users, associations, positions or models")
    _experiment(sub, "bench", cmd_bench, "time HiCut against repeated minimum cuts")
    _experiment(sub, "train", cmd_train, "train drlgo, drl_only or ptom")
    _experiment(sub, "ablate", cmd_ablate, "compare drlgo with drl_only on paired layouts")

    convert = sub.add_parser("convert", help="turn .content/.cites files into the graph format")
    convert.add_argument("content")
    convert.add_argument("cites")
    convert.add_argument("output")
    convert.set_defaults(func=cmd_convert)

    return parser


def main(argv=None):

    args = build_parser().parse_args(argv)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format=LOG_FORMAT, stream=sys.stderr)

    try:
        path = args.func(args)
    except SimError as err:
        log.error("%s", err)
        return 1

    log.info("Results in %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
