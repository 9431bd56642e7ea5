import argparse
import math

from subspace_sparsify.generators import KINDS
from subspace_sparsify.pipeline import MatrixType

DEFAULT_SWEEP_BINS = "8,16,32,64,128,256,512,1024"


def parse_ratio(value):
    try:
        ratio = float(value)
    except ValueError as float_err:
        raise argparse.ArgumentTypeError(f"invalid ratio {value!r}") from float_err
    if not 0 <= ratio <= 1:
        raise argparse.ArgumentTypeError(f"ratio must be in [0, 1], got {value}")
    return ratio


def parse_norm_p(value):
    try:
        norm_p = float(value)
    except ValueError as float_err:
        raise argparse.ArgumentTypeError(f"invalid norm {value!r}") from float_err
    if math.isnan(norm_p) or norm_p < 0:
        raise argparse.ArgumentTypeError(f"p must be in [0, inf], got {value}")
    return norm_p


def parse_positive_float(value):
    try:
        number = float(value)
    except ValueError as float_err:
        raise argparse.ArgumentTypeError(f"invalid number {value!r}") from float_err
    if not (math.isfinite(number) and number > 0):
        raise argparse.ArgumentTypeError(f"expected a finite value > 0, got {value}")
    return number


def parse_nonnegative_int(value):
    try:
        number = int(value)
    except ValueError as int_err:
        raise argparse.ArgumentTypeError(f"invalid integer {value!r}") from int_err
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {value}")
    return number


def parse_positive_int(value):
    number = parse_nonnegative_int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return number


def parse_csv(comma_sep_str):
    return [parse_nonnegative_int(item.strip()) for item in comma_sep_str.split(",") if item.strip()]


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--no-verbose",
        action="store_true",
        default=False,
        help="If enabled so disable verbose mode.",
    )
    common.add_argument(
        "--no-exit",
        action="store_true",
        default=False,
        help="If enabled so it will not call exit.",
    )
    common.add_argument(
        "--format",
        choices=("json", "text"),
        default="json",
        help="Report format (default: json)",
    )
    common.add_argument(
        "--no-timing",
        action="store_true",
        default=False,
        help="Leave the timing block out of reports so identical runs give identical files.",
    )
    return common


def _add_rule_arguments(parser, max_bins=False):
    parser.add_argument("--ratio", type=parse_ratio, default=0.8, help="Sparsity ratio in [0, 1] (default: 0.8)")
    parser.add_argument(
        "--p", dest="norm_p", type=parse_norm_p, default=1.0, help="Norm used by the pattern rule (default: 1)"
    )
    if max_bins:
        parser.add_argument(
            "--max-bins",
            type=parse_nonnegative_int,
            default=1000,
            help="Maximum number of bins per sign class; 0 gives every entry its own bin (default: 1000)",
        )


class GlobalParser(argparse.ArgumentParser):
    def __init__(self):
        super().__init__(prog="subspace-sparsify")
        common = _common_parser()
        subparsers = self.add_subparsers(dest="command", metavar="COMMAND", parser_class=argparse.ArgumentParser)
        subparsers.required = True

        sparsify = subparsers.add_parser("sparsify", parents=[common], help="Sparsify a dense matrix.")
        sparsify.add_argument("--input", required=True, help="Matrix Market file of A")
        sparsify.add_argument("--output", required=True, help="Matrix Market file for X")
        _add_rule_arguments(sparsify, max_bins=True)
        sparsify.add_argument(
            "--impose-nullspaces",
            action="store_true",
            default=False,
            help="Project the result so it keeps the null-spaces of A",
        )
        sparsify.add_argument(
            "--matrix-type",
            choices=MatrixType.names(),
            default=MatrixType.general.name,
            help="Structure of A, validated on input and enforced on output",
        )
        sparsify.add_argument("--pattern", help="Matrix Market file whose stored entries give the pattern")
        sparsify.add_argument("--exact", action="store_true", default=False, help="One-step solve without binning")
        sparsify.add_argument("--rank-tol", type=parse_positive_float, help="Override the numerical rank tolerance")
        sparsify.add_argument(
            "--cg-tol", type=parse_positive_float, default=1e-12, help="Null-space CG tolerance (default: 1e-12)"
        )
        sparsify.add_argument("--report", help="Write the report here instead of stdout")

        pattern = subparsers.add_parser("pattern", parents=[common], help="Write the 0/1 sparsity pattern.")
        pattern.add_argument("--input", required=True)
        pattern.add_argument("--output", required=True)
        _add_rule_arguments(pattern)

        bins = subparsers.add_parser("bins", parents=[common], help="Write the bin identifier of every position.")
        bins.add_argument("--input", required=True)
        bins.add_argument("--output", required=True)
        _add_rule_arguments(bins, max_bins=True)
        bins.add_argument("--pattern", help="Matrix Market file whose stored entries give the pattern")

        diagnose = subparsers.add_parser("diagnose", parents=[common], help="Spectral quality of a sparse X.")
        diagnose.add_argument("--input", required=True, help="Matrix Market file of A")
        diagnose.add_argument("--sparse", required=True, help="Matrix Market file of X")
        diagnose.add_argument(
            "--hessian", action="store_true", default=False, help="Also report the pattern Hessian condition number"
        )
        diagnose.add_argument("--output", help="Write the report here instead of stdout")

        sweep = subparsers.add_parser("sweep-bins", parents=[common], help="Spectral quality against bin count.")
        sweep.add_argument("--input", required=True)
        _add_rule_arguments(sweep)
        sweep.add_argument(
            "--bins",
            type=parse_csv,
            default=parse_csv(DEFAULT_SWEEP_BINS),
            help=f"Comma separated bin counts (default: {DEFAULT_SWEEP_BINS})",
        )
        sweep.add_argument("--impose-nullspaces", action="store_true", default=False)
        sweep.add_argument("--output", help="JSON file, or CSV when the name ends in .csv (default: stdout)")

        gen = subparsers.add_parser("gen", parents=[common], help="Generate a test matrix.")
        gen.add_argument("--kind", choices=KINDS, default="paper40")
        gen.add_argument("--n", type=parse_positive_int, default=40)
        gen.add_argument("--rank", type=parse_positive_int, help="Rank of the `rankdef` kind")
        gen.add_argument("--seed", type=parse_nonnegative_int, default=0)
        gen.add_argument("--output", required=True)

    def parse_args(self, args=None, namespace=None):
        res = super().parse_args(args, namespace)
        if res.command == "sweep-bins" and not res.bins:
            self.error("argument --bins: expected at least one bin count")
        return res
