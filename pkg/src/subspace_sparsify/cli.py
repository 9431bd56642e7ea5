#!/usr/bin/env python3
"""Module that contains the command line app.
Why does this file exist, and why not put this in __main__?
  You might be tempted to import things from __main__ later, but that will cause
  problems: the code will get executed twice:
  - When you run `python -msubspace_sparsify` python will execute
    ``__main__.py`` as a script. That means there won't be any
    ``subspace_sparsify.__main__`` in ``sys.modules``.
  - When you import __main__ it will get executed again (as a module) because
    there's no ``subspace_sparsify.__main__`` in ``sys.modules``.
"""
import csv
import io
import json
import logging
import sys
import time
from typing import Any, NamedTuple

from colorama import init as colorama_init

from subspace_sparsify import generators, matrix_market, pipeline
from subspace_sparsify.binning import compute_bins
from subspace_sparsify.errors import SparsifyError
from subspace_sparsify.global_parser import GlobalParser
from subspace_sparsify.pattern import lp_pattern
from subspace_sparsify.utils import atomic_write, atomic_write_all

colorama_init(autoreset=True)

_logger = logging.getLogger(__name__)

SWEEP_CSV_COLUMNS = ("max_bins", "n_bins", "cond_pinv_product", "pinv_relative_difference", "objective_value")


class CommandResult(NamedTuple):
    status: int
    value: Any = None


def dumps_json(document) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def _render(report, fmt: str, no_timing: bool) -> str:
    if fmt == "text":
        if isinstance(report, pipeline.SparsifyReport):
            return report.to_string(timing=not no_timing) + "\n"
        return report.to_string() + "\n"
    if isinstance(report, pipeline.SparsifyReport):
        return dumps_json(report.to_dict(timing=not no_timing))
    return dumps_json(report.to_dict())


def _emit(content: str, output, no_verbose: bool):
    if output:
        atomic_write(output, content)
    elif not no_verbose:
        print(content, end="")


def cmd_sparsify(args):
    a = matrix_market.read_matrix_market(args.input)
    cfg = pipeline.SparsifyConfig(
        sparsity_ratio=args.ratio,
        sparsity_norm_p=args.norm_p,
        max_num_bins=args.max_bins,
        impose_null_spaces=args.impose_nullspaces,
        matrix_type=pipeline.MatrixType.parse(args.matrix_type),
        rank_tol_override=args.rank_tol,
        cg_tol=args.cg_tol,
    )
    pattern = matrix_market.read_pattern(args.pattern) if args.pattern else None
    if args.exact:
        x, report = pipeline.sparsify_exact_detailed(a, cfg, pattern=pattern)
    elif pattern is not None:
        x, report = pipeline.sparsify_for_pattern(a, pattern, cfg)
    else:
        x, report = pipeline.sparsify(a, cfg)
    rendered = _render(report, args.format, args.no_timing)
    if args.report:
        atomic_write_all({args.output: matrix_market.dumps_matrix_market(x), args.report: rendered})
    else:
        matrix_market.write_matrix_market(args.output, x)
        _emit(rendered, None, args.no_verbose)
    return report


def cmd_pattern(args):
    a = matrix_market.read_matrix_market(args.input)
    pattern = lp_pattern(a, args.ratio, args.norm_p)
    matrix_market.write_pattern(args.output, pattern)
    _logger.info("%d of %d positions kept", pattern.nnz, a.size)
    return pattern


def cmd_bins(args):
    a = matrix_market.read_matrix_market(args.input)
    pattern = matrix_market.read_pattern(args.pattern) if args.pattern else lp_pattern(a, args.ratio, args.norm_p)
    bins = compute_bins(a, pattern, args.max_bins)
    matrix_market.write_bins(args.output, bins)
    _logger.info("%d pattern entries in %d bins", pattern.nnz, bins.n_bins)
    return bins


def cmd_diagnose(args):
    a = matrix_market.read_matrix_market(args.input)
    x = matrix_market.read_sparse(args.sparse)
    report = pipeline.diagnostics(a, x, hessian=args.hessian)
    _emit(_render(report, args.format, args.no_timing), args.output, args.no_verbose)
    return report


def cmd_sweep_bins(args):
    a = matrix_market.read_matrix_market(args.input)
    start = time.perf_counter()
    rows = pipeline.sweep_bins(a, args.ratio, args.norm_p, args.bins, impose_null_spaces=args.impose_nullspaces)
    elapsed = time.perf_counter() - start
    if args.output and args.output.lower().endswith(".csv"):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(SWEEP_CSV_COLUMNS)
        for row in rows:
            writer.writerow([repr(value) if isinstance(value, float) else value for value in row])
        content = buffer.getvalue()
    else:
        document = {
            "schema_version": pipeline.SCHEMA_VERSION,
            "ratio": args.ratio,
            "p": pipeline.json_float(args.norm_p),
            "rows": [row.to_dict() for row in rows],
        }
        if not args.no_timing:
            document["timing"] = {"total": round(elapsed, 6)}
        content = dumps_json(document)
    _emit(content, args.output, args.no_verbose)
    return rows


def cmd_gen(args):
    a = generators.gen_test_matrix(args.kind, args.n, rank=args.rank, seed=args.seed)
    matrix_market.write_matrix_market(args.output, a)
    return a


COMMANDS = {
    "sparsify": cmd_sparsify,
    "pattern": cmd_pattern,
    "bins": cmd_bins,
    "diagnose": cmd_diagnose,
    "sweep-bins": cmd_sweep_bins,
    "gen": cmd_gen,
}


def run(args):
    logging.basicConfig(
        level=logging.WARNING if args.no_verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        res = CommandResult(0, COMMANDS[args.command](args))
    except (SparsifyError, OSError) as err:
        print(f"subspace-sparsify {args.command}: {err}", file=sys.stderr)
        res = CommandResult(1)
    if args.no_exit:
        return res
    sys.exit(res.status)


def main(argv=None):
    parser = GlobalParser()
    if argv is None:
        argv = sys.argv[1:]
    return run(parser.parse_args(argv))


if __name__ == "__main__":
    main()
