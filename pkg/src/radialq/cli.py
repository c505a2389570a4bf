"""Command-line front end.

Subcommands: limit | asympt | lacunary | qint | plot.  Specifications are
read from JSON documents (see ``documents``); reports are emitted as
deterministic JSON (default) or CSV tables.  Exit codes: 0 success,
2 invalid specification, 3 requested limit does not converge, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import eulermac, lacunary, qintegral, radial
from .documents import (
    DocumentError,
    SeriesDocument,
    document_to_dict,
    format_complex,
    format_real,
    load_document,
    parse_polynomial,
    parse_rational,
)
from .hp import DEFAULT_PRECISION, context, to_real
from .plotting import (
    convergence_data,
    rectangles_lacunary,
    rectangles_polynomial,
    render_convergence_svg,
    render_rectangles_svg,
)
from .radial import FitError, Grid
from .reporting import build_report, report_json, rows_to_csv
from .series import (
    ExponentialExponent,
    PolynomialExponent,
    SeriesSpec,
    SpecificationError,
    TermBudgetError,
)

EXIT_OK = 0
EXIT_BAD_SPEC = 2
EXIT_NOT_CONVERGENT = 3
EXIT_IO = 4


def _common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--precision", type=int, default=DEFAULT_PRECISION,
                        help="working precision in bits (default 256)")
    fmt = parser.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON report (default)")
    fmt.add_argument("--csv", action="store_true", help="CSV report")
    parser.add_argument("--out", help="write the report to this path")
    parser.add_argument("--timing", action="store_true",
                        help="include wall time in the report (breaks byte determinism)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radialq",
        description="Radial limits, asymptotic expansions and oscillation "
                    "behaviour of series sum C(n) q^s(n) with periodic coefficients.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_limit = sub.add_parser("limit", help="classify/compute the radial limit")
    p_limit.add_argument("spec", help="series document (JSON)")
    p_limit.add_argument("--mode", choices=["closed", "numeric", "both"], default="both")
    p_limit.add_argument("--grid", help="x_min,x_max,count for the numeric grid")
    p_limit.add_argument("--fit-order", type=int, dest="fit_order")
    p_limit.add_argument("--rmax", type=int, default=8,
                         help="subsequence length for oscillation evidence")
    _common_flags(p_limit)

    p_asympt = sub.add_parser("asympt", help="asymptotic expansion in x = -log q")
    p_asympt.add_argument("spec")
    p_asympt.add_argument("--order", type=int, dest="order",
                          help="highest lattice index retained (default 2d+2)")
    p_asympt.add_argument("--em-depth", type=int, dest="em_depth", default=4)
    p_asympt.add_argument("--verify", action="store_true",
                          help="compare against direct summation and report residual slope")
    p_asympt.add_argument("--grid", help="x_min,x_max,count for --verify")
    _common_flags(p_asympt)

    p_lac = sub.add_parser("lacunary", help="oscillation analysis for q^(a^n)")
    p_lac.add_argument("spec")
    p_lac.add_argument("--base", help="override the exponential base a")
    p_lac.add_argument("--rmax", type=int, default=8)
    _common_flags(p_lac)

    p_qint = sub.add_parser("qint", help="q-integral approximants")
    p_qint.add_argument("--c", help="exponent c for integral of x^c")
    p_qint.add_argument("--q", required=True, help="parameter q in (0,1)")
    p_qint.add_argument("--pair", help="x-poly,y-poly e.g. 't,2t' or 't^2,3t^2'")
    p_qint.add_argument("--eps", default="1e-12", help="tail tolerance for --pair")
    _common_flags(p_qint)

    p_plot = sub.add_parser("plot", help="emit rectangle/convergence data (CSV + SVG)")
    p_plot.add_argument("spec")
    p_plot.add_argument("--what", choices=["rectangles", "convergence"], required=True)
    p_plot.add_argument("--q", default="0.9", help="parameter for rectangles mode")
    p_plot.add_argument("--j", type=int, default=0, help="residue class")
    p_plot.add_argument("--count", type=int, default=12, help="number of rectangles")
    p_plot.add_argument("--grid", help="x_min,x_max,count for convergence mode")
    _common_flags(p_plot)

    return parser


def _parse_grid(text: str | None, fallback: tuple[str, str, int]) -> tuple[str, str, int]:
    if text is None:
        return fallback
    parts = text.split(",")
    if len(parts) != 3:
        raise DocumentError(f"--grid expects x_min,x_max,count, got {text!r}")
    try:
        return parts[0], parts[1], int(parts[2])
    except ValueError as exc:
        raise DocumentError(f"invalid --grid {text!r}: {exc}") from None


def _emit(args, report: dict, csv_text: str | None) -> int:
    if args.csv and csv_text is not None:
        payload = csv_text
    else:
        payload = report_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def _classification_dict(result: radial.RadialLimit, precision: int) -> dict:
    out: dict = {"kind": result.kind}
    if result.value is not None:
        out["value"] = result.value
    if result.leading_term is not None:
        out["leading_term"] = {
            "coefficient": result.leading_term.coefficient,
            "exponent": str(result.leading_term.exponent),
            "label": result.leading_term.label,
        }
    if result.twisted_mean is not None:
        out["twisted_mean"] = result.twisted_mean
        out["twisted_period"] = result.twisted.period
    if result.evidence is not None:
        out["oscillation"] = _lacunary_dict(result.evidence)
    return out


def _lacunary_dict(report: lacunary.LacunaryReport) -> dict:
    return {
        "a": report.a,
        "period": report.k,
        "rotation": report.rotation,
        "pivot_j": report.pivot_j,
        "per_residue": [
            {
                "j": r.j,
                "M": r.M,
                "m": r.m,
                "x_scale": r.x_scale,
                "x0": r.x0,
                "x0_prime": r.x0_prime,
                "lower_value": r.lower_value,
                "upper_value": r.upper_value,
                "inequality_holds": r.inequality_holds,
            }
            for r in report.per_residue
        ],
        "samples_high": [[q, v] for q, v in report.samples_high],
        "samples_low": [[q, v] for q, v in report.samples_low],
        "cluster_high": report.cluster_high,
        "cluster_low": report.cluster_low,
        "separation": report.separation,
        "verdict": report.verdict,
    }


def cmd_limit(args) -> int:
    precision = args.precision
    doc = load_document(args.spec, precision)
    xi = doc.root_or_one
    started = time.monotonic()

    classification = radial.classify_radial_limit(
        doc.spec, xi, precision=precision, r_max=args.rmax
    )
    results: dict = {"classification": _classification_dict(classification, precision)}

    numeric = None
    if args.mode in ("numeric", "both") and classification.kind == "converges":
        grid = None
        if args.grid:
            lo, hi, count = _parse_grid(args.grid, ("1e-4", "1e-2", 12))
            grid = Grid.of(Fraction(lo), Fraction(hi), count)
        numeric = radial.extrapolate_limit(
            doc.spec, xi, grid=grid, fit_order=args.fit_order, precision=precision
        )
        results["numeric"] = {
            "estimate": numeric.estimate,
            "error_estimate": numeric.error_estimate,
            "fit_order": numeric.fit_order,
            "grid": {
                "x_min": str(numeric.grid.x_min),
                "x_max": str(numeric.grid.x_max),
                "count": numeric.grid.count,
            },
        }
    elif args.mode in ("numeric", "both"):
        results["numeric"] = None
        results["note"] = "numeric extrapolation skipped: series does not converge at xi"

    if args.mode == "both" and numeric is not None and classification.value is not None:
        with context(precision):
            results["difference"] = abs(classification.value - numeric.estimate)

    wall = time.monotonic() - started if args.timing else None
    report = build_report(
        "limit",
        {"document": document_to_dict(doc, precision), "mode": args.mode},
        results,
        precision,
        wall,
    )
    csv_text = None
    if args.csv:
        rows = [["kind", classification.kind]]
        if classification.value is not None:
            re_s, im_s = format_complex(classification.value, precision)
            rows.append(["closed_re", re_s])
            rows.append(["closed_im", im_s])
        if numeric is not None:
            re_s, im_s = format_complex(numeric.estimate, precision)
            rows.append(["numeric_re", re_s])
            rows.append(["numeric_im", im_s])
        csv_text = rows_to_csv(["key", "value"], rows)
    code = _emit(args, report, csv_text)
    if classification.kind != "converges":
        return EXIT_NOT_CONVERGENT
    return code


def cmd_asympt(args) -> int:
    precision = args.precision
    doc = load_document(args.spec, precision)
    if not isinstance(doc.spec.exponent, PolynomialExponent):
        raise SpecificationError("asympt requires a polynomial exponent")
    started = time.monotonic()
    expansion = eulermac.series_expansion(
        doc.spec, m=args.em_depth, W=args.order, precision=precision
    )
    d = expansion.denominator_degree
    terms = []
    for t in expansion.terms:
        entry = {
            "index": t.index,
            "exponent": str(Fraction(t.index, d)),
            "coefficient": t.coefficient,
        }
        if t.exact is not None:
            entry["exact"] = str(t.exact)
        if t.gamma_parts is not None:
            entry["gamma_parts"] = [
                {"l": l, "rational": str(r)} for l, r in t.gamma_parts
            ]
        terms.append(entry)
    results: dict = {
        "denominator_degree": d,
        "terms": terms,
        "remainder_order": str(expansion.remainder_order),
    }
    if args.verify:
        grid = _parse_grid(args.grid, ("1e-3", "1e-2", 8))
        xs = Grid.of(Fraction(grid[0]), Fraction(grid[1]), grid[2]).points(precision)
        residuals = eulermac.verify_expansion(doc.spec, expansion, xs, precision=precision)
        results["verify"] = {
            "points": [[x, r] for x, r in residuals.points],
            "slope": residuals.slope,
            "points_used": residuals.points_used,
        }
    wall = time.monotonic() - started if args.timing else None
    report = build_report(
        "asympt",
        {
            "document": document_to_dict(doc, precision),
            "order": expansion.terms[-1].index if expansion.terms else args.order,
            "em_depth": args.em_depth,
        },
        results,
        precision,
        wall,
    )
    csv_text = None
    if args.csv:
        rows = [
            [t["exponent"], format_complex(t["coefficient"], precision)[0],
             format_complex(t["coefficient"], precision)[1]]
            for t in terms
        ]
        csv_text = rows_to_csv(["exponent", "re", "im"], rows)
    return _emit(args, report, csv_text)


def cmd_lacunary(args) -> int:
    precision = args.precision
    doc = load_document(args.spec, precision)
    if args.base is not None:
        base = to_real(args.base, precision)
        spec = SeriesSpec(doc.spec.coefficients, ExponentialExponent(base))
    elif isinstance(doc.spec.exponent, ExponentialExponent):
        spec = doc.spec
    else:
        raise SpecificationError(
            "lacunary analysis needs an exponential exponent or --base"
        )
    started = time.monotonic()
    report_data = lacunary.oscillation_report(
        spec.coefficients, spec.exponent.base, r_max=args.rmax, precision=precision
    )
    wall = time.monotonic() - started if args.timing else None
    report = build_report(
        "lacunary",
        {"document": document_to_dict(doc, precision), "r_max": args.rmax},
        _lacunary_dict(report_data),
        precision,
        wall,
    )
    csv_text = None
    if args.csv:
        rows = [
            [r.j, format_real(r.M, precision), format_real(r.m, precision),
             format_real(r.lower_value, precision), format_real(r.upper_value, precision),
             r.inequality_holds]
            for r in report_data.per_residue
        ]
        csv_text = rows_to_csv(
            ["j", "M", "m", "lower_value", "upper_value", "inequality_holds"], rows
        )
    return _emit(args, report, csv_text)


def cmd_qint(args) -> int:
    precision = args.precision
    started = time.monotonic()
    if (args.c is None) == (args.pair is None):
        raise DocumentError("qint needs exactly one of --c or --pair")
    if args.c is not None:
        try:
            c_val = parse_rational(args.c)
        except DocumentError:
            c_val = to_real(args.c, precision)
        value = qintegral.q_integral_power(c_val, to_real(args.q, precision), precision)
        with context(precision):
            with_limit = 1 / (1 + to_real(c_val, precision))
            difference = abs(value - with_limit)
        results = {
            "approximant": value,
            "limit": with_limit,
            "difference": difference,
        }
        inputs = {"c": str(args.c), "q": str(args.q)}
        csv_rows = [["approximant", format_real(value, precision)],
                    ["limit", format_real(with_limit, precision)]]
    else:
        parts = args.pair.split(",")
        if len(parts) != 2:
            raise DocumentError(f"--pair expects two polynomials, got {args.pair!r}")
        pair = qintegral.LemmaPair(parse_polynomial(parts[0]), parse_polynomial(parts[1]))
        result = qintegral.lemma_sum(
            pair, to_real(args.q, precision), to_real(args.eps, precision), precision
        )
        limit = qintegral.lemma_limit(pair, precision)
        results = {
            "sum": result.total,
            "tail_bound": result.tail_bound,
            "terms_used": result.terms_used,
            "tail_start": result.tail_start,
            "tail_sum": result.tail_sum,
            "lower_int": result.lower_int,
            "upper_int": result.upper_int,
            "squeeze_holds": bool(result.lower_int <= result.tail_sum <= result.upper_int),
            "limit": limit,
            "c": str(pair.c),
        }
        inputs = {"pair": args.pair, "q": str(args.q), "eps": str(args.eps)}
        csv_rows = [["sum", format_real(result.total, precision)],
                    ["lower_int", format_real(result.lower_int, precision)],
                    ["tail_sum", format_real(result.tail_sum, precision)],
                    ["upper_int", format_real(result.upper_int, precision)],
                    ["limit", format_real(limit, precision)]]
    wall = time.monotonic() - started if args.timing else None
    report = build_report("qint", inputs, results, precision, wall)
    csv_text = rows_to_csv(["key", "value"], csv_rows) if args.csv else None
    return _emit(args, report, csv_text)


def cmd_plot(args) -> int:
    precision = args.precision
    doc = load_document(args.spec, precision)
    base = args.out or "plot"
    csv_path = f"{base}.csv"
    svg_path = f"{base}.svg"
    started = time.monotonic()

    if args.what == "rectangles":
        q = to_real(args.q, precision)
        if isinstance(doc.spec.exponent, PolynomialExponent):
            data = rectangles_polynomial(
                doc.spec, q, j=args.j, count=args.count, precision=precision
            )
        else:
            data = rectangles_lacunary(
                doc.spec, q, j=args.j, count=args.count, precision=precision
            )
        rows = [
            [r.n, format_real(r.x_left, precision), format_real(r.x_right, precision),
             format_real(r.height, precision)]
            for r in data.rectangles
        ]
        csv_text = rows_to_csv(["n", "x_left", "x_right", "height"], rows)
        svg_text = render_rectangles_svg(data)
        results = {"rectangles": len(data.rectangles), "csv": csv_path, "svg": svg_path}
    else:
        lo, hi, count = _parse_grid(args.grid, ("1e-4", "1e-1", 24))
        points = convergence_data(doc.spec, lo, hi, count, precision=precision)
        rows = [
            [format_real(x, precision)] + format_complex(v, precision)
            for x, v in points
        ]
        csv_text = rows_to_csv(["x", "re", "im"], rows)
        svg_text = render_convergence_svg(points)
        results = {"points": len(points), "csv": csv_path, "svg": svg_path}

    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(svg_text)

    wall = time.monotonic() - started if args.timing else None
    report = build_report(
        "plot",
        {"document": document_to_dict(doc, precision), "what": args.what},
        results,
        precision,
        wall,
    )
    sys.stdout.write(report_json(report))
    return EXIT_OK


_HANDLERS = {
    "limit": cmd_limit,
    "asympt": cmd_asympt,
    "lacunary": cmd_lacunary,
    "qint": cmd_qint,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (DocumentError, SpecificationError, FitError, TermBudgetError) as exc:
        sys.stderr.write(report_json({
            "schema": "1",
            "command": args.command,
            "error": str(exc),
        }))
        return EXIT_BAD_SPEC
    except OSError as exc:
        sys.stderr.write(report_json({
            "schema": "1",
            "command": args.command,
            "error": f"I/O failure: {exc}",
        }))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
