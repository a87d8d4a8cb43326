"""Command-line front end.

Exit codes: 0 SAT, 1 UNSAT, 2 usage or parse error, 3 resource limit,
4 the extracted witness failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .engine import ResourceLimitExceeded, decide
from .parser import ParseError, parse_abox
from .witness import WitnessError, extract_model

EXIT_SAT, EXIT_UNSAT, EXIT_USAGE, EXIT_RESOURCE, EXIT_WITNESS = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hpdl", description="Decide satisfiability of an HPDL ABox.")
    p.add_argument("input", help="ABox file, or - for standard input")
    p.add_argument("--model", metavar="PATH", help="write the verified witness model (JSON) on SAT")
    p.add_argument("--dot", metavar="PATH", help="write the final tableau as Graphviz DOT")
    p.add_argument("--trace", action="store_true", help="log each rule application to stderr")
    p.add_argument("--stats", action="store_true", help="print run statistics as JSON to stderr")
    p.add_argument("--max-nodes", type=_positive, default=500_000, metavar="N",
                   help="node budget (default 500000)")
    p.add_argument("--seed", type=int, default=0, metavar="K",
                   help="tie-breaking seed; 0 keeps the canonical order")
    p.add_argument("--reachability-pruning", action="store_true",
                   help="only expand nodes reachable from the root without crossing Unsat nodes")
    return p


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = _read(args.input)
    except OSError as exc:
        print(f"hpdl: cannot read {args.input}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        abox = parse_abox(text)
    except ParseError as exc:
        print(f"hpdl: {args.input}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE

    trace = (lambda line: print(line, file=sys.stderr)) if args.trace else None
    try:
        result = decide(abox, seed=args.seed, max_nodes=args.max_nodes,
                        reachability_pruning=args.reachability_pruning, trace=trace)
    except ResourceLimitExceeded as exc:
        print(f"hpdl: {exc}", file=sys.stderr)
        return EXIT_RESOURCE

    print(result.verdict)
    stats = result.stats
    print(f"nodes: {stats.nodes}, edges: {stats.edges_created - stats.edges_deleted}")
    if args.stats:
        print(json.dumps(stats.to_dict(), indent=2), file=sys.stderr)
    if args.dot:
        Path(args.dot).write_text(result.tableau.to_dot(), encoding="utf-8")

    if not result.satisfiable:
        return EXIT_UNSAT
    if args.model:
        try:
            witness = extract_model(result.tableau, abox)
        except WitnessError as exc:
            print(f"hpdl: witness check failed: {exc}", file=sys.stderr)
            return EXIT_WITNESS
        Path(args.model).write_text(witness.model.dumps(), encoding="utf-8")
        print(f"model: {len(witness.model.worlds)} worlds written to {args.model}")
    return EXIT_SAT


if __name__ == "__main__":
    sys.exit(main())
