"""dirtylocus-plot: render figures from dirtylocus analysis CSV files.

Usage: dirtylocus-plot <kind> <input.csv> [input2.csv ...] --out <image>
with kind one of locus | nyquist | sensitivity | sweep.  Inputs must be
analysis files produced by the dirtylocus CLI (the run-manifest header is
required); a file whose columns do not match the requested figure kind is
rejected.
"""

from __future__ import annotations

import argparse
import sys

from .io import FIGURE_KINDS, PlotJob, SchemaError, read_analysis_file
from .render import render_job, save_figure


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SchemaError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dirtylocus-plot", description=__doc__)
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("inputs", nargs="+", help="analysis CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        job = PlotJob(tuple(args.inputs), args.kind, args.out, args.dpi)
        files = [read_analysis_file(path) for path in job.inputs]
        fig = render_job(job.kind, files)
        save_figure(fig, job.out, job.dpi)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    raise SystemExit(main())
