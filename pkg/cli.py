"""
Command-line front end for strataflow.

    python cli.py reduce --mode core|weak <poset-file> [--out FILE]
    python cli.py homology <poset-file>
    python cli.py enumerate --codim-max N [--out DIR]
    python cli.py case-study [--out DIR]
    python cli.py export-dot <poset-file>

Exit status: 0 success, 1 validation failure, 2 usage or file error.
Logs go to stderr; stdout carries only the line-oriented results.
"""

import sys
import json
import time
import logging
import argparse
from dataclasses import fields
from typing import List, Optional

from complex import format_homology, homology, order_complex
from config import StrataConfig
from export import ResultWriter
from flows import (ANNULUS, FlowError, build_stratified_poset, class_ids, degeneracy_profile,
                   enumerate_component)
from pipeline import CaseStudyPipeline, RunReport, acceptance_mismatches
from poset import PosetError, StratifiedPoset, format_poset, read_poset, to_dot
from reduction import core, weak_reduce
from utils import file_digest, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='strataflow',
        description='Finite-space homotopy tools and the annulus gradient-flow case study.')
    parser.add_argument('--log-level', default=StrataConfig.LOG_LEVEL,
                        help='logging level for stderr (default: %(default)s)')
    parser.add_argument('--log-file', default=StrataConfig.LOG_FILE,
                        help='also append log records to this file')
    commands = parser.add_subparsers(dest='command', required=True)

    reduce_cmd = commands.add_parser('reduce', help='core or weak reduction of a poset file')
    reduce_cmd.add_argument('--mode', choices=['core', 'weak'], required=True)
    reduce_cmd.add_argument('--out', help='write the reduced poset to this file')
    reduce_cmd.add_argument('poset_file')

    homology_cmd = commands.add_parser('homology', help='order-complex homology of a poset file')
    homology_cmd.add_argument('poset_file')

    enum_cmd = commands.add_parser('enumerate', help='enumerate annulus flow classes')
    enum_cmd.add_argument('--codim-max', type=int, required=True,
                          choices=range(0, StrataConfig.MAX_CODIM + 1), metavar='N')
    enum_cmd.add_argument('--out', default=StrataConfig.OUTPUT_DIR,
                          help='output directory (default: %(default)s)')

    case_cmd = commands.add_parser('case-study', help='full pipeline with acceptance summary')
    case_cmd.add_argument('--out', help='also write the results to this directory')

    dot_cmd = commands.add_parser('export-dot', help='DOT Hasse diagram of a poset file')
    dot_cmd.add_argument('poset_file')
    return parser


def _load(path: str):
    """Poset file as (poset, stratified or None)."""
    loaded = read_poset(path)
    if isinstance(loaded, StratifiedPoset):
        return loaded.poset, loaded
    return loaded, None


def cmd_reduce(args, report: RunReport) -> int:
    poset, stratified = _load(args.poset_file)
    report.inputs[args.poset_file] = file_digest(args.poset_file)
    reducer = core if args.mode == 'core' else weak_reduce
    result, trace = reducer(poset)

    for line in trace.lines():
        print(line)
    print(f"size: {trace.initial_size} -> {trace.final_size}")

    output = result
    if stratified is not None:
        output = StratifiedPoset(result, {x: stratified.codim[x] for x in result.elements})
    if args.out:
        with open(args.out, 'w', encoding='ascii', newline='\n') as f:
            f.write(format_poset(output))
        logger.info(f"Saved reduced poset to {args.out}")
    return EXIT_OK


def cmd_homology(args, report: RunReport) -> int:
    poset, _ = _load(args.poset_file)
    report.inputs[args.poset_file] = file_digest(args.poset_file)
    profile = homology(order_complex(poset))
    report.betti = profile.betti
    for line in format_homology(profile):
        print(line)
    return EXIT_OK


def cmd_enumerate(args, report: RunReport) -> int:
    classes = enumerate_component(ANNULUS, args.codim_max)
    component = build_stratified_poset(classes)
    named = class_ids(classes)

    writer = ResultWriter(args.out)
    ok = all([
        writer.save_diagrams(named),
        writer.save_poset(component),
        writer.save_dot(component),
        writer.save_class_table(named),
    ])

    for q in sorted(classes):
        counts = {}
        for d in classes[q]:
            label = degeneracy_profile(d)
            counts[label] = counts.get(label, 0) + 1
        report.strata[q] = len(classes[q])
        report.splits[q] = counts
        parts = ' '.join(f"{label}={n}" for label, n in sorted(counts.items()))
        print(f"codim {q}: {len(classes[q])} ({parts})")
    print(f"total: {len(named)}")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_case_study(args, report: RunReport) -> int:
    pipeline = CaseStudyPipeline(out_dir=args.out)
    result = pipeline.run()
    if result is None:
        return EXIT_INVALID

    for f in fields(result):
        if f.name not in ('command', 'wall_time'):
            setattr(report, f.name, getattr(result, f.name))
    for line in result.summary_lines():
        print(line)
    problems = acceptance_mismatches(result)
    for problem in problems:
        logger.error(f"Acceptance mismatch: {problem}")
    return EXIT_INVALID if problems else EXIT_OK


def cmd_export_dot(args, report: RunReport) -> int:
    loaded = read_poset(args.poset_file)
    report.inputs[args.poset_file] = file_digest(args.poset_file)
    sys.stdout.write(to_dot(loaded))
    return EXIT_OK


def _record(args, report: RunReport, status: int):
    """Log the run summary; enumerate also appends it to its output directory's run log."""
    logger.info(f"{args.command} finished in {report.wall_time}s with status {status}: "
                f"{json.dumps(report.to_dict(), sort_keys=True)}")
    if args.command == 'enumerate':
        ResultWriter(args.out).log_run(report.to_dict(), success=status == EXIT_OK)


COMMANDS = {
    'reduce': cmd_reduce,
    'homology': cmd_homology,
    'enumerate': cmd_enumerate,
    'case-study': cmd_case_study,
    'export-dot': cmd_export_dot,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(args.log_level, StrataConfig.LOG_FORMAT, args.log_file)
    report = RunReport(command=args.command)
    start = time.perf_counter()

    try:
        status = COMMANDS[args.command](args, report)
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (PosetError, FlowError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (OverflowError, UnicodeDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID

    report.wall_time = round(time.perf_counter() - start, 3)
    _record(args, report, status)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
