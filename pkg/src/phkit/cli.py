"""Command-line interface: ``phkit compute|plot|betti|bench``.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .bench import KINDS, SUITES, generate_dataset, report_to_json, report_to_text, run_suite
from .diagrams import (barcode_svg, diagram_svg, diagram_to_csv, diagram_to_json,
                       read_diagram_csv)
from .errors import DataError, PHError, UnsupportedModeError
from .ingest import (DistanceMatrix, PointCloud, distance_matrix, latlon2euc,
                     order_canonical_form, read_distance_matrix_csv, read_point_cloud_csv)
from .kernels import PREDICATES, WeightInput, column_weights, default_workers
from .reduce import BACKENDS, betti_curve, persist
from .simplicial import build_vr_complex


class UsageError(Exception):
    pass


def _upperlim(text: str) -> float:
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'inf', got {text!r}") from None
    if math.isnan(v) or v < 0:
        raise argparse.ArgumentTypeError("upperlim must be a nonnegative number or 'inf'")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return v


def _real(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("expected a number, got NaN")
    return v


def _int_list(text: str) -> tuple:
    try:
        vals = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("worker counts must be positive")
    return vals


def _dataset(text: str) -> tuple:
    kind, _, n = text.partition(":")
    if kind not in KINDS or not n.isdigit() or int(n) < 1:
        raise argparse.ArgumentTypeError(f"expected KIND:N with KIND in {KINDS}, got {text!r}")
    return kind, int(n)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phkit", description="Persistent homology of Vietoris-Rips filtrations.")
    p.add_argument("--version", action="version", version=f"phkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="compute a persistence diagram")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="CSV point cloud or distance matrix")
    src.add_argument("--dataset", type=_dataset, metavar="KIND:N",
                     help=f"seeded synthetic input, KIND in {', '.join(KINDS)}")
    c.add_argument("--format", choices=("points", "distmat"), default="points")
    c.add_argument("--rowsare", choices=("points", "dimensions"), default="points")
    c.add_argument("--header", action="store_true", help="skip the first CSV row")
    c.add_argument("--columns", type=_int_list, help="one-based coordinate columns, e.g. 2,3")
    c.add_argument("--label-column", type=_positive, help="one-based column holding point labels")
    c.add_argument("--latlon", action="store_true",
                   help="coordinates are latitude,longitude in degrees; map onto the unit sphere")
    c.add_argument("--upperlim", type=_upperlim, default=math.inf, help="distance threshold (default inf)")
    c.add_argument("--strict-threshold", action="store_true",
                   help="exclude pairs at exactly --upperlim (default keeps them)")
    c.add_argument("--maxdim", type=_nonneg, default=1)
    c.add_argument("--backend", choices=BACKENDS, default="col")
    c.add_argument("--cohomology", action="store_true")
    c.add_argument("--clear-compress", action="store_true")
    c.add_argument("--sort", choices=("radix", "merge"), default="radix")
    c.add_argument("--weights", choices=("none",) + tuple(sorted(PREDICATES)), default="none",
                   help="reorder equal-birth simplices by start weights of this predicate")
    c.add_argument("--workers", type=_positive, default=None,
                   help="worker threads (default: PHKIT_WORKERS or 1)")
    c.add_argument("--seed", type=int, default=0, help="seed for --dataset")
    c.add_argument("--keep-zero", action="store_true", help="keep zero-persistence pairs")
    c.add_argument("--generators", action="store_true", help="include cycle generators in the JSON output")
    c.add_argument("--output", type=Path, help="diagram CSV path (default: standard output)")
    c.add_argument("--json", type=Path, help="also write a JSON diagram with labels and metadata")

    pl = sub.add_parser("plot", help="draw a diagram CSV as SVG")
    pl.add_argument("--input", type=Path, required=True)
    pl.add_argument("--output", type=Path, required=True)
    pl.add_argument("--style", choices=("diagram", "barcode"), default="diagram")
    pl.add_argument("--dims", type=lambda s: tuple(_nonneg(t) for t in s.split(",")),
                    help="dimensions to draw, e.g. 0,1")

    b = sub.add_parser("betti", help="Betti numbers of a diagram at a filtration value")
    b.add_argument("--input", type=Path, required=True)
    b.add_argument("--at", type=_real, required=True, dest="eps")
    b.add_argument("--maxdim", type=_nonneg, default=None)

    be = sub.add_parser("bench", help="run a benchmark suite")
    be.add_argument("--suite", choices=sorted(SUITES), default="quick")
    be.add_argument("--backend", choices=BACKENDS, default="morse")
    be.add_argument("--workers", type=_positive, default=None)
    be.add_argument("--repetitions", type=int, default=3)
    be.add_argument("--workers-sweep", type=_int_list, default=None, metavar="1,2,4,8")
    be.add_argument("--format", choices=("text", "json"), default="text")
    be.add_argument("--output", type=Path)
    return p


def _write(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _load(args):
    if args.dataset:
        kind, n = args.dataset
        data = generate_dataset(kind, n, args.seed)
    elif args.format == "distmat":
        data = read_distance_matrix_csv(args.input)
    else:
        data = read_point_cloud_csv(args.input, args.rowsare, args.columns, args.header, args.label_column)
    if args.latlon:
        if not isinstance(data, PointCloud) or data.dims != 2:
            raise DataError("--latlon needs a two-column latitude,longitude point cloud")
        data = PointCloud(latlon2euc(data.coords, rowsare="dimensions"), data.labels)
    return data if isinstance(data, DistanceMatrix) else distance_matrix(data)


def cmd_compute(args) -> int:
    if args.dataset and (args.format != "points" or args.header or args.columns or args.label_column):
        raise UsageError("--format/--header/--columns/--label-column apply only to --input")
    if args.format == "distmat" and (args.columns or args.label_column or args.header
                                     or args.rowsare != "points" or args.latlon):
        raise UsageError("--columns/--label-column/--header/--rowsare/--latlon apply only to point clouds")
    if args.generators and args.cohomology:
        raise UsageError("--generators requires homology mode (drop --cohomology)")
    if args.generators and args.json is None:
        raise UsageError("--generators needs --json to write the chains")
    workers = args.workers or default_workers()
    dm = _load(args)
    filt = order_canonical_form(dm, args.upperlim, args.strict_threshold, sort=args.sort)
    fc = build_vr_complex(filt, args.maxdim)
    weights = None
    if args.weights != "none":
        weights = column_weights(WeightInput(filt.rank), args.weights, workers)
    pd = persist(fc, args.backend, cohomology=args.cohomology, clear=args.clear_compress,
                 keep_zero=args.keep_zero, generators=args.generators, workers=workers,
                 vertex_weights=weights, sort=args.sort)
    _write(diagram_to_csv(pd), args.output)
    if args.json is not None:
        meta = {"backend": args.backend, "cohomology": args.cohomology,
                "clear_compress": args.clear_compress, "maxdim": args.maxdim,
                "upperlim": "inf" if math.isinf(args.upperlim) else args.upperlim,
                "strict_threshold": args.strict_threshold,
                "sort": args.sort, "weights": args.weights, "keep_zero": args.keep_zero,
                "seed": args.seed, "npoints": dm.m,
                "source": str(args.input) if args.input else f"{args.dataset[0]}:{args.dataset[1]}"}
        args.json.write_text(diagram_to_json(pd, dm.labels, meta, fc if args.generators else None), encoding="utf-8")
    return 0


def cmd_plot(args) -> int:
    pd = read_diagram_csv(args.input)
    svg = barcode_svg(pd, args.dims) if args.style == "barcode" else diagram_svg(pd, args.dims)
    args.output.write_text(svg, encoding="utf-8")
    return 0


def cmd_betti(args) -> int:
    pd = read_diagram_csv(args.input, args.maxdim)
    top = pd.maxdim if args.maxdim is None else args.maxdim
    lines = ["dim,betti"] + [f"{k},{betti_curve(pd, k, args.eps)}" for k in range(top + 1)]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_bench(args) -> int:
    if args.repetitions < 3:
        raise UsageError("--repetitions must be at least 3")
    workers = args.workers or default_workers()
    report = run_suite(args.suite, args.backend, workers, args.repetitions, args.workers_sweep)
    _write(report_to_json(report) if args.format == "json" else report_to_text(report), args.output)
    return 0


COMMANDS = {"compute": cmd_compute, "plot": cmd_plot, "betti": cmd_betti, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, UnsupportedModeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"phkit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (PHError, OSError) as exc:
        print(f"phkit {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
