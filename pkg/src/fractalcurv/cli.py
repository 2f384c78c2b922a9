"""Command line front end.

Every subcommand reads a set (from an IFS file or the catalog), runs
one computation, and writes CSV or JSON to stdout or ``--output``.
Exit codes: 0 success, 2 usage error, 3 file I/O failure, 4 unreadable
or inconsistent input, 5 a computation refused to certify its result.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .catalog import (
    CatalogEntry,
    PrescribedExponentFamily,
    catalog_entry,
    square_parallel_curvatures,
    standard_names,
)
from .disk_union import sweep_curvatures
from .errors import FractalCurvError, SchemaError
from .exponents import fit_average_exponent, fit_exponent
from .fractal_string import (
    c0var_line,
    c0var_plane,
    c1var_product,
    component_count,
    load_string,
    parallel_length_line,
    string_from_ifs,
    string_to_dict,
)
from .ifs import (
    embed_in_plane,
    ifs_to_dict,
    load_ifs,
    moran_dimension,
    sample_attractor,
)
from .structure import (
    clusters,
    flatness_test,
    load_open_set,
    tiling_compatible,
    tiling_generator,
)

_EPILOG = """\
exit codes:
  0  success
  2  bad command line
  3  a file could not be read or written
  4  an input file or reference did not parse or validate
  5  a computation could not certify its result at the requested
     accuracy (scale range, sample budget, degenerate arrangement, ...)
"""

_K_COLUMNS = {0: "c0var", 1: "c1", 2: "c2"}


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_line(doc, path):
    _emit(json.dumps(doc, sort_keys=True) + "\n", path)


def _resolve_set(args):
    """(ifs, default_open_set) from --ifs FILE or --set REF."""
    if getattr(args, "ifs", None) and getattr(args, "set", None):
        raise ValueError("give either --ifs or --set, not both")
    if getattr(args, "ifs", None):
        return load_ifs(args.ifs), None
    if getattr(args, "set", None):
        entry = catalog_entry(args.set)
        if isinstance(entry, PrescribedExponentFamily):
            raise ValueError(
                "the prescribed-exponent family is not an iterated "
                "function system; use the catalog subcommand instead")
        open_set = entry.open_set if isinstance(entry, CatalogEntry) else None
        return entry.ifs, open_set
    raise ValueError("one of --ifs or --set is required")


def _eps_grid(args):
    if not 0.0 < args.eps_min < args.eps_max:
        raise ValueError("need 0 < --eps-min < --eps-max")
    if args.count < 2:
        raise ValueError("--count must be at least 2")
    return np.geomspace(args.eps_min, args.eps_max, args.count)


def _add_set_options(sub):
    sub.add_argument("--ifs", metavar="FILE",
                     help="IFS description in JSON")
    sub.add_argument("--set", metavar="REF",
                     help="catalog reference, e.g. gasket or digits:n=4,m=3")


def _add_grid_options(sub, eps_min, eps_max, count):
    sub.add_argument("--eps-min", type=float, default=eps_min)
    sub.add_argument("--eps-max", type=float, default=eps_max)
    sub.add_argument("--count", type=int, default=count,
                     help="number of radii on the geometric grid")


def _num(x):
    return repr(float(x))


def _threads(args):
    if args.threads is not None:
        return args.threads
    raw = os.environ.get("FRACTAL_CURVATURE_THREADS", "")
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(
            f"FRACTAL_CURVATURE_THREADS={raw!r} is not an integer") from None


def _write_plot(prefix, header, rows, logy=True):
    columns = header.split(",")
    with open(prefix + ".dat", "w", encoding="utf-8") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for row in rows:
            fh.write(" ".join(str(v) for v in row) + "\n")
    wanted = [c for c in columns if c.startswith(("c0var", "c1", "c2"))]
    lines = [
        "set logscale x",
        "set logscale y" if logy else "unset logscale y",
        'set xlabel "eps"',
        "set key left top",
        "plot " + ", \\\n     ".join(
            f'"{prefix}.dat" using 1:{columns.index(c) + 1} '
            f'with linespoints title "{c}"'
            for c in wanted),
    ]
    with open(prefix + ".gp", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _run_dim(args):
    ifs, _ = _resolve_set(args)
    _json_line({
        "dimension": moran_dimension(ifs),
        "ambient_dim": ifs.dim,
        "maps": len(ifs.maps),
    }, args.output)
    return 0


def _run_sweep(args):
    ifs, _ = _resolve_set(args)
    if ifs.dim == 1:
        ifs = embed_in_plane(ifs)
    eps = _eps_grid(args)
    delta = args.delta if args.delta is not None else float(eps[0]) / 16.0
    sample = sample_attractor(ifs, delta, budget=args.budget)
    pairs = sweep_curvatures(sample.points, eps,
                             resolution=sample.resolution,
                             threads=_threads(args))
    header = "eps,c0,c0var,c1,c2,components,holes"
    rows = [(_num(e), out.c0, _num(out.c0var), _num(out.c1), _num(out.c2),
             out.components, out.holes) for e, out in pairs]
    text = header + "\n" + "".join(",".join(map(str, r)) + "\n" for r in rows)
    _emit(text, args.output)
    if args.plot:
        _write_plot(args.plot, header, rows)
    return 0


def _run_string(args):
    if args.string:
        if args.ifs or args.set:
            raise ValueError("--string replaces --ifs/--set")
        string = load_string(args.string)
    else:
        ifs, _ = _resolve_set(args)
        if ifs.dim != 1:
            raise ValueError(
                "string formulas apply to one dimensional systems only")
        string = string_from_ifs(ifs, args.depth)
    if args.dump:
        _json_line(string_to_dict(string), args.output)
        return 0
    eps = _eps_grid(args)
    header = ("eps,components,c0var_line,length_line,"
              "c0var_plane,c1var_product")
    rows = [(_num(e), component_count(string, e),
             _num(c0var_line(string, e)),
             _num(parallel_length_line(string, e)),
             _num(c0var_plane(string, e)),
             _num(c1var_product(string, e))) for e in eps]
    text = header + "\n" + "".join(",".join(map(str, r)) + "\n" for r in rows)
    _emit(text, args.output)
    if args.plot:
        _write_plot(args.plot, header, rows)
    return 0


def _run_exponents(args):
    column = args.column or _K_COLUMNS[args.k]
    with open(args.csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "eps" not in fields or column not in fields:
            raise ValueError(
                f"CSV must provide columns 'eps' and {column!r}; "
                f"found {fields}")
        eps, values = [], []
        for row in reader:
            eps.append(float(row["eps"]))
            values.append(float(row[column]))
    fit = fit_exponent(eps, values, args.k)
    avg = fit_average_exponent(eps, values, args.k)
    _json_line({
        "k": args.k,
        "s_hat": float(fit.s_hat),
        "a_hat": float(avg.a_hat),
        "stderr": float(fit.stderr),
        "oscillation": float(fit.oscillation),
        "rows_used": int(fit.rows_used),
    }, args.output)
    return 0


def _run_clusters(args):
    ifs, _ = _resolve_set(args)
    report = clusters(ifs, args.level, contact_tol=args.contact_tol,
                      budget=args.budget)
    _json_line({
        "level": int(report.level),
        "count": int(report.count),
        "separation": (None if report.separation is None
                       else float(report.separation)),
        "contact_tol": float(report.contact_tol),
        "assignments": [{"word": [int(w) for w in word], "cluster": int(cid)}
                        for word, cid in report.assignments],
    }, args.output)
    return 0


def _run_flatness(args):
    ifs, _ = _resolve_set(args)
    delta = args.delta if args.delta is not None else args.axis_tol / 8.0
    sample = sample_attractor(ifs, delta, budget=args.budget)
    x0, x1, y0, y1 = args.window
    report = flatness_test(sample, ((x0, x1), (y0, y1)), args.axis_tol)
    _json_line({
        "flat_axes": [int(a) for a in report.flat_axes],
        "is_flat": bool(report.is_flat),
        "axis_tol": float(report.axis_tol),
    }, args.output)
    return 0


def _run_tiling(args):
    ifs, open_set = _resolve_set(args)
    if args.open_set:
        open_set = load_open_set(args.open_set)
    if open_set is None:
        raise ValueError("an --open-set file is required with --ifs")
    if (args.check is None) == (args.depth is None):
        raise ValueError("choose exactly one of --depth or --check")
    if args.check is not None:
        report = tiling_compatible(ifs, open_set, args.check,
                                   budget=args.budget)
        _json_line({
            "compatible": bool(report.compatible),
            "max_boundary_distance": float(report.max_boundary_distance),
            "boundary_samples": int(report.generator_boundary_samples),
            "tolerance": float(report.tolerance),
        }, args.output)
        return 0
    tiles = tiling_generator(ifs, open_set, args.depth)
    if ifs.dim == 1:
        doc = [{"word": [int(w) for w in word],
                "interval": [float(lo), float(hi)]}
               for word, (lo, hi) in tiles]
    else:
        doc = [{"word": [int(w) for w in word], "area": float(piece.area),
                "bounds": [float(v) for v in piece.bounds]}
               for word, piece in tiles]
    _json_line(doc, args.output)
    return 0


def _catalog_overview():
    return {
        "standard": list(standard_names()),
        "families": ["digits:n=..,m=..", "prescribed:a=..,b=.."],
    }


def _run_catalog(args):
    if not args.ref:
        _json_line(_catalog_overview(), args.output)
        return 0
    entry = catalog_entry(args.ref)
    if isinstance(entry, CatalogEntry):
        doc = {
            "kind": "standard",
            "name": entry.name,
            "ambient_dim": entry.ifs.dim,
            "dimension": moran_dimension(entry.ifs),
            "ifs": ifs_to_dict(entry.ifs),
        }
        if args.eps is not None:
            if entry.name != "square":
                raise ValueError(
                    "closed-form parallel-set curvatures exist only for "
                    "'square' and the prescribed family")
            doc["curvatures"] = square_parallel_curvatures(args.eps)
    elif isinstance(entry, PrescribedExponentFamily):
        doc = {
            "kind": "prescribed",
            "a": entry.a,
            "b": entry.b,
            "q": entry.q,
            "expected_exponents": entry.expected_exponents,
            "rung_scales": [entry.rung_scale(n) for n in range(8)],
            "cell_counts": [entry.hole_count(g) for g in range(8)],
        }
        if args.eps is not None:
            doc["curvatures"] = {
                "c0var": entry.c0var(args.eps),
                "c1var": entry.c1var(args.eps),
                "c2": entry.c2(args.eps),
            }
    else:
        doc = {
            "kind": "digits",
            "n": entry.n,
            "m": entry.m,
            "dimension": entry.dimension,
            "expected_exponents": entry.expected_exponents,
            "ifs": ifs_to_dict(entry.ifs),
            "product_maps": len(entry.product_ifs.maps),
        }
        if args.eps is not None:
            raise ValueError(
                "digit sets have no closed-form evaluator; build a string "
                "with the string subcommand instead")
    _json_line(doc, args.output)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fractalcurv",
        description="curvature measures of parallel sets of fractals",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("dim", help="Moran similarity dimension")
    _add_set_options(p)
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_run_dim)

    p = subs.add_parser(
        "sweep", help="disk-union curvature sweep over an eps grid")
    _add_set_options(p)
    _add_grid_options(p, 0.01, 0.2, 16)
    p.add_argument("--delta", type=float,
                   help="sample spacing (default eps-min/16)")
    p.add_argument("--budget", type=int, default=5_000_000,
                   help="sample point budget")
    p.add_argument("--threads", type=int,
                   help="thread count (default $FRACTAL_CURVATURE_THREADS)")
    p.add_argument("--plot", metavar="PREFIX",
                   help="also write PREFIX.dat and a gnuplot script")
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_run_sweep)

    p = subs.add_parser(
        "string", help="exact interval-gap formulas for 1-d sets")
    _add_set_options(p)
    p.add_argument("--string", metavar="FILE",
                   help="load a stored fractal string instead")
    p.add_argument("--depth", type=int, default=12,
                   help="prefractal depth when built from an IFS")
    _add_grid_options(p, 1e-6, 0.3, 48)
    p.add_argument("--dump", action="store_true",
                   help="write the string as JSON instead of a table")
    p.add_argument("--plot", metavar="PREFIX")
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_run_string)

    p = subs.add_parser(
        "exponents", help="fit scaling and averaged exponents from CSV")
    p.add_argument("csv", help="CSV with an eps column, e.g. sweep output")
    p.add_argument("--k", type=int, choices=(0, 1, 2), required=True,
                   help="curvature degree")
    p.add_argument("--column",
                   help="value column (default c0var/c1/c2 by degree)")
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_run_exponents)

    p = subs.add_parser(
        "clusters", help="contact clusters of depth-n cylinder sets")
    _add_set_options(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--contact-tol", type=float)
    p.add_argument("--budget", type=int, default=5_000_000)
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_run_clusters)

    p = subs.add_parser(
        "flatness", help="axis-degeneracy test inside a window")
    _add_set_options(p)
    p.add_argument("--window", type=float, nargs=4, required=True,
                   metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--axis-tol", type=float, required=True)
    p.add_argument("--delta", type=float,
                   help="sample spacing (default axis-tol/8)")
    p.add_argument("--budget", type=int, default=5_000_000)
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_run_flatness)

    p = subs.add_parser(
        "tiling", help="generator tiles or open-set compatibility")
    _add_set_options(p)
    p.add_argument("--open-set", metavar="FILE",
                   help="open set JSON (defaults to the catalog choice)")
    p.add_argument("--depth", type=int,
                   help="list the generator tiles up to this depth")
    p.add_argument("--check", type=float, metavar="TOL",
                   help="test boundary compatibility at this tolerance")
    p.add_argument("--budget", type=int, default=5_000_000)
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_run_tiling)

    p = subs.add_parser(
        "catalog", help="list or describe built-in sets")
    p.add_argument("ref", nargs="?",
                   help="name or family reference; omit to list")
    p.add_argument("--eps", type=float,
                   help="evaluate closed-form curvatures at this radius")
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_run_catalog)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, json.JSONDecodeError, ValueError) as exc:
        print(f"fractalcurv: {exc}", file=sys.stderr)
        return 4
    except FractalCurvError as exc:
        print(f"fractalcurv: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"fractalcurv: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
