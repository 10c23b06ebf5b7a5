"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 precondition or genericity rejection,
3 numerical failure. Results go to stdout; logs and structured errors to stderr.
"""

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np

from poisson_bv import api, display
from poisson_bv.engines import boundary, rootdata
from poisson_bv.models.boundary import ExtractionConfig
from poisson_bv.models.codec import complex_to_pair, encode_array
from poisson_bv.models.config import OUTPUT_FORMATS, RunConfig
from poisson_bv.models.roots import ModelId
from poisson_bv.parsers.values import ValueParser
from poisson_bv.utils.errors import ConsistencyError, PoissonBVError
from poisson_bv.utils.storage import ConfigStorage

logger = logging.getLogger(__name__)

MODEL_CHOICES = [m.value for m in ModelId]
EXTRACTION_FLAGS = ("t0", "ratio", "n_points", "correction_orders")


class UsageError(Exception):
    """Raised for malformed command lines."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _plain(value: complex) -> Any:
    value = complex(value)
    return value.real if value.imag == 0 else complex_to_pair(value)


def _add_run_arguments(sub: argparse.ArgumentParser, f: bool = False, extraction: bool = False):
    sub.add_argument("--model", choices=MODEL_CHOICES, help="Space model")
    sub.add_argument(
        "--lambda", dest="lam",
        help="Spectral parameter, e.g. 0.7 or 0.7,1.1 or 0.4+0.2i; write negative values as --lambda=-0.5,0.3",
    )
    if f:
        sub.add_argument(
            "--f", dest="f", help="Boundary data: const:a, fourier:c_-K,...,c_K or cos(3)+0.5*sin(1)"
        )
    if extraction:
        sub.add_argument("--t0", type=float, help="Start of the radial grid")
        sub.add_argument("--ratio", type=float, help="Geometric ratio of the radial grid")
        sub.add_argument("--n-points", dest="n_points", type=int, help="Radial grid size")
        sub.add_argument(
            "--orders", dest="correction_orders", type=int, help="Correction orders in the fit"
        )
        sub.add_argument("--grid", type=int, help="Boundary points per circle")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="poisson-bv",
        description="Boundary values and inversion of the Poisson transform on corner models",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level on stderr")
    parser.add_argument("--output", choices=OUTPUT_FORMATS, help="Result format (default json)")
    parser.add_argument(
        "--enable-h3", dest="enable_h3", action="store_true", default=None,
        help="Enable the h3 model",
    )
    parser.add_argument("--config", help="RunConfig JSON file; explicit flags win")
    parser.add_argument("--save-config", dest="save_config", help="Write the merged RunConfig here")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    sub = subs.add_parser("exponents", help="Characteristic exponents rho - w . lambda")
    _add_run_arguments(sub)
    sub = subs.add_parser("generic", help="Genericity conditions for lambda")
    _add_run_arguments(sub)

    sub = subs.add_parser("poisson-eval", help="P_lambda f at corner coordinates (b, t)")
    _add_run_arguments(sub, f=True)
    sub.add_argument("--b", required=True, help="Boundary angles, comma separated")
    sub.add_argument("--t", required=True, help="Radial coordinates t_j in (0, 1], comma separated")

    sub = subs.add_parser("spherical", help="Spherical function at radial coordinates t")
    _add_run_arguments(sub)
    sub.add_argument("--t", required=True, help="Radial coordinates t_j in (0, 1], comma separated")

    sub = subs.add_parser("cfun", help="c-function by integral, boundary value and closed form")
    _add_run_arguments(sub, extraction=True)

    sub = subs.add_parser("bv", help="Boundary value of P_lambda f on a boundary grid")
    _add_run_arguments(sub, f=True, extraction=True)
    sub.add_argument("--threads", type=int, help="Worker cap (overrides POISSON_BV_THREADS)")

    sub = subs.add_parser("verify-inversion", help="Check bv(P_lambda f) = c(lambda) f")
    _add_run_arguments(sub, f=True, extraction=True)
    sub.add_argument("--tol", type=float, help="Residual tolerance (default 1e-4)")
    sub.add_argument("--seed", type=int, help="Seed for random group elements")
    sub.add_argument(
        "--equivariance-checks", dest="equivariance_checks", type=int, default=0,
        help="Number of random group elements for the equivariance spot check",
    )
    sub.add_argument("--fatou", action="store_true", help="Also report the Fatou rate at b = 0")
    sub.add_argument("--threads", type=int, help="Worker cap (overrides POISSON_BV_THREADS)")

    sub = subs.add_parser("fuchs-solve", help="Formal solution of P u = f")
    sub.add_argument("--operator", required=True, help="Operator terms i,k=c;... (c t^i theta^k)")
    sub.add_argument("--f", dest="f", required=True, help="Right-hand side coefficients f_0,f_1,...")
    sub.add_argument("--N", dest="N", type=int, help="Truncation order")

    sub = subs.add_parser("fuchs-delta", help="Delta-layer solution of P v = f")
    sub.add_argument("--operator", required=True, help="Operator terms i,k=c;... (c t^i theta^k)")
    sub.add_argument("--f", dest="f", required=True, help="Layer coefficients f_0,f_1,...")
    return parser


def resolve_run_config(args: argparse.Namespace, parser: ValueParser) -> RunConfig:
    """Merge the --config document with explicitly given flags (flags win)."""
    data = ConfigStorage().load_config_data(args.config) if args.config else {}
    model = getattr(args, "model", None) or data.get("model")
    if model is None:
        raise UsageError("--model is required (or a config file naming one)")
    data["model"] = model
    if getattr(args, "lam", None) is not None:
        data["lambda"] = encode_array(np.array(parser.parse_complex_list(args.lam)))
    if "lambda" not in data:
        raise UsageError("--lambda is required (or a config file naming one)")
    for name in ("f", "tol", "seed", "grid", "output"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    extraction = dict(data.get("extraction", {}))
    for name in EXTRACTION_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            extraction[name] = value
    data["extraction"] = ExtractionConfig.from_dict(extraction).to_dict()
    return RunConfig.from_dict(data)


def _emit(payload: Any, rows: Callable[[], list[dict]], fmt: str) -> None:
    text = display.render_csv(rows()) if fmt == "csv" else display.render_json(payload)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _run(args: argparse.Namespace) -> int:
    parser = ValueParser()

    if args.command == "fuchs-solve":
        series = api.fuchs_solve(parser.parse_operator(args.operator), parser.parse_series(args.f), args.N)
        _emit(series.to_dict(), lambda: display.series_rows(series.coeffs), args.output or "json")
        return 0
    if args.command == "fuchs-delta":
        layer = api.fuchs_delta(parser.parse_operator(args.operator), parser.parse_delta_layer(args.f))
        _emit(layer.to_dict(), lambda: display.series_rows(layer.coeffs), args.output or "json")
        return 0

    cfg = resolve_run_config(args, parser)
    if args.save_config:
        ConfigStorage().save_run_config(args.save_config, cfg)
    fmt = cfg.output
    model = api.get_model(cfg.model, args.enable_h3)
    lam = cfg.lam

    if args.command == "exponents":
        exps = rootdata.characteristic_exponents(model.root_datum, lam)
        payload = [[_plain(v) for v in e] for e in exps]
        _emit(payload, lambda: display.vector_rows("exponent", exps, model.root_datum.weyl_labels), fmt)
        return 0

    if args.command == "generic":
        report = rootdata.genericity_check(model.root_datum, lam)
        _emit(report.to_dict(), lambda: display.scalar_rows({
            "cond_i": report.cond_i, "cond_ii": report.cond_ii,
            "p_nonzero": report.p_nonzero, "p_value": report.p_value,
        }), fmt)
        rootdata.require_generic(model.root_datum, lam)
        return 0

    if args.command == "spherical":
        t = [float(v.real) for v in parser.parse_complex_list(args.t)]
        value = api.spherical(cfg.model, lam, t, args.enable_h3)
        _emit({"value": complex_to_pair(value)}, lambda: display.scalar_rows({"value": value}), fmt)
        return 0

    if args.command == "cfun":
        values = api.c_function(cfg.model, lam, cfg.extraction, args.enable_h3)
        _emit(
            {name: complex_to_pair(v) for name, v in values.items()},
            lambda: display.scalar_rows(values),
            fmt,
        )
        return 0

    f = parser.parse_boundary_function(cfg.f, cfg.model)

    if args.command == "poisson-eval":
        b = [float(v.real) for v in parser.parse_complex_list(args.b)]
        t = [float(v.real) for v in parser.parse_complex_list(args.t)]
        value = api.poisson_eval(cfg.model, lam, f, b, t, args.enable_h3)
        _emit({"value": complex_to_pair(value)}, lambda: display.scalar_rows({"value": value}), fmt)
        return 0

    if args.command == "bv":
        n = cfg.grid or max(8, 2 * f.band_limit + 2)
        bv = api.boundary_values(
            cfg.model, lam, f, n, cfg.extraction, threads=args.threads, enable_h3=args.enable_h3
        )
        points = boundary.boundary_points(model, n)
        samples = bv.samples if bv.samples is not None else np.array([bv(b) for b in points])
        payload = {
            "grid": n,
            "samples": encode_array(samples),
            "fourier": encode_array(bv.fourier_coefficients()),
        }
        _emit(payload, lambda: display.boundary_rows(bv, points), fmt)
        return 0

    if args.command == "verify-inversion":
        report = api.verify_inversion(
            cfg.model, lam, f, cfg.extraction, grid=cfg.grid,
            enable_h3=args.enable_h3, threads=args.threads,
        )
        payload = report.to_dict()
        payload["tol"] = cfg.tol
        if args.equivariance_checks:
            checks = api.equivariance_checks(
                cfg.model, lam, f, args.equivariance_checks, seed=cfg.seed, cfg=cfg.extraction,
                enable_h3=args.enable_h3,
            )
            payload["equivariance"] = [c.to_dict() for c in checks]
        if args.fatou:
            result = api.fatou(
                cfg.model, lam, f, boundary.base_point(model).angles, cfg.extraction, args.enable_h3
            )
            payload["fatou"] = result.to_dict()
        _emit(payload, lambda: display.inversion_rows(report), fmt)
        if report.residual_sup > cfg.tol:
            raise ConsistencyError(
                f"Inversion residual {report.residual_sup:.3e} exceeds tol {cfg.tol:.1e}"
            )
        return 0

    raise UsageError(f"Unknown command '{args.command}'")


def _report_error(payload: dict[str, Any]) -> None:
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        _report_error({"error": "UsageError", "message": str(e)})
        return 1
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        return _run(args)
    except PoissonBVError as e:
        _report_error(e.to_dict())
        return e.exit_code
    except (UsageError, ValueError, KeyError) as e:
        _report_error({"error": type(e).__name__, "message": str(e)})
        return 1


if __name__ == "__main__":
    sys.exit(main())
