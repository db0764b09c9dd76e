#!/usr/bin/env python3
"""
ybe_forge.py — Command-line front end.

Usage:
    python tools/ybe_forge.py verify --model zf --k 2 --samples 100 --seed 7
    python tools/ybe_forge.py reconstruct --model zf --order 8
    python tools/ybe_forge.py certify-no-go --model v14 --xi 1 --order 6
    python tools/ybe_forge.py baxterize --model v17_2-H
    python tools/ybe_forge.py spectrum --model ik --k 2 --L 3
    python tools/ybe_forge.py curve --branch sb --lambda4 0.3 --a 1.0
    python tools/ybe_forge.py --config run.json

The JSON report goes to stdout (and to --out when given); status goes to stderr.
Exit codes: 0 pass, 1 check failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import numpy as np
import pandas as pd
from tabulate import tabulate

from domain.baxterizer import bmw_baxterize, detect_families, hecke_baxterize, tl_baxterize
from domain.cba_engine import (
    bethe_residual,
    chain_sector_spectra,
    completeness_probe,
    one_excitation_check,
    reference_consistency,
    scattering_function,
)
from domain.errors import PoleProximityError, SeriesInconsistencyError, YbeForgeError
from domain.models import AlgebraFamily, AlgebraFit, Arity, BetheRoots, CurveBranch, CurveSpec, UniSeries, Verdict
from domain.reconstructor import (
    TWIST_BOUNDS,
    certify_no_go,
    local_evaluator,
    reconstruct_bivariate,
    reconstruct_univariate,
    series_coefficients,
    series_coefficients_2d,
    series_unitarity,
    sparsity_mask,
    ybe_order_check,
)
from domain.rmatrix_catalog import curve_residual, curve_slope, sample_curve
from domain.tensor_core import sup_norm
from domain.verifier import mutate_model, verify_model, ybe_residual_multiplicative
from tools.adapters import JsonModelSpecSource, JsonReportSink, JsonScatteringTable
from tools.model_registry import ResolvedModel, model_names, resolve
from tools.report_codec import decode_scalar, dumps, envelope
from tools.run_config import COMMANDS, ConfigError, RunConfig
from tools.settings import configure_logging, load_settings, section, thread_count, tolerances_from

logger = logging.getLogger("ybe_forge")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PARAM_FLAGS = ("k", "theta0", "xi", "lambda4", "a", "alpha", "beta", "phi", "psi", "Lambda", "J", "tau3")
BAXTERIZE_SAMPLES = 8


# ── Arguments ─────────────────────────────────────────────────────────────


def _scalar(text: str):
    """'0.3' -> 0.3, '1+2i' -> [1.0, 2.0]."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        z = decode_scalar(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from e
    return [z.real, z.imag]


def _assignment(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    name, value = text.split("=", 1)
    return name.strip(), _scalar(value)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help=f"registry name ({', '.join(model_names())})")
    common.add_argument("--spec-file", help="model-spec JSON (overrides --model)")
    common.add_argument("--seed", type=int, help="64-bit seed")
    common.add_argument("--samples", type=int)
    common.add_argument("--order", type=int, help="truncation order N")
    common.add_argument("--L", type=int, help="chain length")
    common.add_argument("--branch", help="curve branch (MB or SB)")
    common.add_argument("--tol", type=_assignment, action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--param", type=_assignment, action="append", default=[], metavar="NAME=VALUE")
    for flag in PARAM_FLAGS:
        common.add_argument(f"--{flag}", type=_scalar, dest=f"p_{flag}")
    common.add_argument("--scattering", choices=["trivial", "constant", "table"])
    common.add_argument("--scattering-value", type=_scalar)
    common.add_argument("--scattering-table")
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="also write the report here")
    common.add_argument("--mutate", action="store_true", help="corrupt one R entry (test hook)")
    common.add_argument("--settings", default=argparse.SUPPRESS, help="alternate settings.yaml")
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="ybe-forge", description="R-matrix workbench for three-state U(1) chains")
    parser.add_argument("--config", help="run from a RunConfig JSON file")
    parser.add_argument("--settings", help="alternate settings.yaml")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")
    for command in COMMANDS:
        sub.add_parser(command, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace, settings: dict) -> RunConfig:
    if args.config:
        return RunConfig.from_file(args.config)
    if not args.command:
        raise ConfigError("a command or --config is required")
    params = {}
    for flag in PARAM_FLAGS:
        value = getattr(args, f"p_{flag}", None)
        if value is not None:
            params[flag] = value
    params.update(dict(args.param))
    data = {
        "command": args.command,
        "seed": args.seed if args.seed is not None else int(section(settings, "defaults").get("seed", 7)),
        "model": args.model,
        "params": params,
        "spec_file": args.spec_file,
        "samples": args.samples,
        "order": args.order,
        "L": args.L,
        "branch": args.branch.upper() if args.branch else None,
        "tolerances": dict(args.tol),
        "threads": args.threads,
        "out": args.out,
        "mutate": bool(args.mutate),
    }
    if args.scattering:
        scattering = {"name": args.scattering}
        if args.scattering_value is not None:
            scattering["value"] = args.scattering_value
        if args.scattering_table:
            scattering["table_file"] = args.scattering_table
        data["scattering"] = scattering
    return RunConfig.from_dict({k: v for k, v in data.items() if v is not None})


# ── Model resolution ──────────────────────────────────────────────────────


def resolve_model(config: RunConfig) -> ResolvedModel:
    """Registry lookup, optionally through a model-spec file."""
    name, params, entries = config.model, config.complex_params(), None
    if config.spec_file:
        loaded = JsonModelSpecSource().load(config.spec_file)
        if not loaded["success"]:
            raise ConfigError(loaded["error"])
        spec = loaded["spec"]
        name = spec["name"]
        params = {
            k: v if isinstance(v, bool) else decode_scalar(v) for k, v in spec.get("params", {}).items()
        } | params
        entries = spec.get("entries")
    if not name:
        raise ConfigError("--model or --spec-file is required")
    try:
        return resolve(name, params, entries)
    except YbeForgeError as e:
        raise ConfigError(f"cannot build model '{name}': {e}") from e


def _print_table(title: str, rows: list, headers: list) -> None:
    print(f"\n{title}", file=sys.stderr)
    print(tabulate(rows, headers=headers, tablefmt="grid"), file=sys.stderr)


# ── Commands ──────────────────────────────────────────────────────────────


def _skipped(resolved: ResolvedModel) -> tuple[bool, dict]:
    """SKIP result for an entry that cannot be built without external data."""
    print(f"{resolved.name}: SKIP ({resolved.skip_reason})", file=sys.stderr)
    return True, {"model": resolved.name, "status": "SKIP", "reason": resolved.skip_reason}


def cmd_verify(config: RunConfig, settings: dict, ctx: dict) -> tuple[bool, dict]:
    resolved = resolve_model(config)
    if not resolved.has_rmatrix:
        raise ConfigError(f"verify needs an R-matrix model, '{resolved.name}' is a Hamiltonian")
    model = mutate_model(resolved.model) if config.mutate else resolved.model
    sampling = section(settings, "sampling")
    report = verify_model(
        model,
        samples=config.samples or int(sampling.get("samples", 100)),
        seed=config.seed,
        tolerances=ctx["tolerances"],
        threads=ctx["threads"],
        transfer_samples=int(sampling.get("transfer_samples", 5)),
        max_entry=float(sampling.get("max_entry", 1e2)),
        annulus=tuple(float(x) for x in sampling.get("curve_annulus", (0.5, 2.0))),
    )
    _print_table(
        f"verify {model.name}",
        [[c.check_name, c.sample_count, f"{c.max_residual:.3e}", f"{c.tolerance:.0e}", "ok" if c.passed else "FAIL"]
         for c in report.checks],
        ["check", "samples", "max residual", "tol", "status"],
    )
    return report.passed, {"model": model.name, "params": resolved.params, "mutated": config.mutate, "report": report}


def _univariate_summary(series: UniSeries, h) -> dict:
    return {
        "kind": "univariate",
        "order": series.order,
        "norm_index": series.norm_index,
        "coefficient_norms": [sup_norm(c) for c in series.coeffs],
        "consistency_residuals": list(series.residuals),
        "unitarity_by_order": series_unitarity(series),
        "ybe_order_check": [{"eps": e, "residual": r} for e, r in ybe_order_check(series)],
        "sparsity_mask_size": int(sparsity_mask(h).sum()),
        "coefficients": list(series.coeffs),
    }


def _reconstruct_curve(resolved: ResolvedModel, config: RunConfig, settings: dict, ctx: dict) -> tuple[bool, dict]:
    order = config.order or int(section(settings, "defaults").get("order", 8))
    radius = float(section(settings, "defaults").get("boundary_radius", 0.15))
    local = local_evaluator(resolved.model)
    boundary = series_coefficients(lambda s: local(s, 0.0), 0.0, radius, order)
    try:
        series = reconstruct_bivariate(boundary, order, tolerances=ctx["tolerances"])
    except SeriesInconsistencyError as e:
        return False, {"kind": "bivariate", "inconsistent_at": [e.m, e.n], "residual": e.residual}
    oracle = series_coefficients_2d(local, radius, order)
    error_by_degree = [
        max(sup_norm(series.coefficient(m, d - m) - oracle[(m, d - m)]) for m in range(d + 1))
        for d in range(order + 1)
    ]
    result = {
        "kind": "bivariate",
        "order": order,
        "coefficient_norms_by_degree": [
            max(sup_norm(series.coefficient(m, d - m)) for m in range(d + 1)) for d in range(order + 1)
        ],
        "residuals": series.residuals,
        "unitarity_by_degree": series_unitarity(series),
        "oracle_error_by_degree": error_by_degree,
        "coefficients": series.coeffs,
    }
    return True, result


def cmd_reconstruct(config: RunConfig, settings: dict, ctx: dict) -> tuple[bool, dict]:
    resolved = resolve_model(config)
    if resolved.skip_reason:
        return _skipped(resolved)
    if resolved.has_rmatrix and resolved.model.arity is Arity.CURVE:
        return _reconstruct_curve(resolved, config, settings, ctx)
    order = config.order or int(section(settings, "defaults").get("order", 8))
    outcome = reconstruct_univariate(resolved.hamiltonian, order, tolerances=ctx["tolerances"], model=resolved.name)
    if not isinstance(outcome, UniSeries):
        return False, {"kind": "obstruction", "report": outcome}
    result = _univariate_summary(outcome, resolved.hamiltonian)
    if resolved.has_rmatrix and resolved.model.arity is Arity.MULTIPLICATIVE:
        radius = float(section(settings, "defaults").get("taylor_radius", 0.25))
        evaluator = resolved.model.evaluator

        def normalized(u):
            r = evaluator(u)
            return r / r[0, 0]

        oracle = series_coefficients(normalized, 1.0, radius, order)
        result["oracle_error_by_order"] = [sup_norm(a - b) for a, b in zip(outcome.coeffs, oracle)]
    _print_table(
        f"reconstruct {resolved.name}",
        [[k, f"{n:.3e}", f"{r:.2e}"] for k, (n, r) in enumerate(
            zip(result["coefficient_norms"][1:], result["consistency_residuals"]), start=1)],
        ["order", "max |R_k|", "consistency"],
    )
    return True, result


def cmd_certify(config: RunConfig, settings: dict, ctx: dict) -> tuple[bool, dict]:
    resolved = resolve_model(config)
    if resolved.skip_reason:
        return _skipped(resolved)
    opt = section(settings, "optimizer")
    report = certify_no_go(
        resolved.hamiltonian,
        order=config.order or int(section(settings, "defaults").get("order", 8)),
        multistart=int(opt.get("multistart", 27)),
        seed=config.seed,
        max_iterations=int(opt.get("max_iterations", 400)),
        xatol=float(opt.get("xatol", 1e-10)),
        fatol=float(opt.get("fatol", 1e-14)),
        bounds=opt.get("twist_bounds", TWIST_BOUNDS),
        threads=ctx["threads"],
        tolerances=ctx["tolerances"],
        model=resolved.name,
    )
    print(f"{resolved.name}: {report.verdict.value} (best residual {report.details['best_residual']:.3e})",
          file=sys.stderr)
    return report.verdict is not Verdict.INCONCLUSIVE, {"params": resolved.params, "report": report}


def _baxterized(fit: AlgebraFit):
    """Multiplicative-argument evaluator of a fitted family's Baxterization."""
    if fit.family is AlgebraFamily.HECKE:
        return lambda x: hecke_baxterize(fit, np.sqrt(complex(x)))
    if fit.family is AlgebraFamily.TL:
        return lambda x: tl_baxterize(fit, x)
    return lambda x: bmw_baxterize(fit, np.sqrt(complex(x)))


def _baxterized_ybe(fit: AlgebraFit, seed: int) -> float:
    rng = np.random.default_rng(seed)
    r_fn = _baxterized(fit)
    worst, done = 0.0, 0
    while done < BAXTERIZE_SAMPLES:
        u, v = (np.exp(rng.uniform(np.log(0.5), np.log(2.0)) + 1j * rng.uniform(-np.pi, np.pi)) for _ in range(2))
        try:
            worst = max(worst, ybe_residual_multiplicative(r_fn, u, v))
        except PoleProximityError:
            continue
        done += 1
    return worst


def cmd_baxterize(config: RunConfig, settings: dict, ctx: dict) -> tuple[bool, dict]:
    resolved = resolve_model(config)
    if resolved.skip_reason:
        return _skipped(resolved)
    tol = ctx["tolerances"].algebraic
    families = {}
    passed = False
    for family, outcome in detect_families(resolved.hamiltonian, tol).items():
        if isinstance(outcome, AlgebraFit):
            ybe = _baxterized_ybe(outcome, config.seed)
            families[family.value] = {
                "fits": True,
                "alpha_scale": outcome.alpha_scale,
                "beta_shift": outcome.beta_shift,
                "constants": outcome.constants,
                "residuals": outcome.residuals,
                "baxterized_ybe_residual": ybe,
            }
            passed = passed or ybe <= tol
        else:
            families[family.value] = {"fits": False, "relation": outcome.relation, "residual": outcome.residual}
    _print_table(
        f"baxterize {resolved.name}",
        [[name, "yes" if f["fits"] else f"no ({f['relation']})"] for name, f in families.items()],
        ["family", "fits"],
    )
    return passed, {"model": resolved.name, "params": resolved.params, "families": families}


def _scattering(config: RunConfig):
    spec = config.scattering
    if spec is None:
        return None
    if spec["name"] == "table":
        if "table_file" not in spec:
            raise ConfigError("the table scattering function needs --scattering-table")
        loaded = JsonScatteringTable().load(spec["table_file"])
        if not loaded["success"]:
            raise ConfigError(loaded["error"])
        return loaded["table"]
    value = decode_scalar(spec["value"]) if "value" in spec else None
    return scattering_function(spec["name"], value)


def cmd_spectrum(config: RunConfig, settings: dict, ctx: dict) -> tuple[bool, dict]:
    resolved = resolve_model(config)
    if resolved.skip_reason:
        return _skipped(resolved)
    h = resolved.hamiltonian
    L = config.L or int(section(settings, "defaults").get("L", 3))
    tol = ctx["tolerances"].algebraic
    s_fn = _scattering(config)
    spectra = chain_sector_spectra(h, L, threads=ctx["threads"])
    m1 = one_excitation_check(h, L, tol)
    consistency = {M: reference_consistency(h, L, M, tol) for M in (0, 1)}
    result = {
        "model": resolved.name,
        "params": resolved.params,
        "L": L,
        "sectors": {M: sorted(levels, key=lambda z: (round(z.real, 10), z.imag)) for M, levels in spectra.items()},
        "one_excitation": m1,
        "reference_consistency": consistency,
    }
    if L in (2, 3):
        probe = completeness_probe(h, L)
        result["completeness"] = {"report": probe, "flagged": probe.flagged}
    if s_fn is not None:
        pairs = [(2 * np.pi * a / L, 2 * np.pi * b / L) for a in range(L) for b in range(a + 1, L)]
        result["bethe_pairs"] = [
            {"k": list(k), "residual": bethe_residual(BetheRoots(k=k), s_fn, L)} for k in pairs
        ]
    table = pd.DataFrame(
        {
            "M": list(spectra),
            "dimension": [len(v) for v in spectra.values()],
            "min Re E": [float(np.min(v.real)) for v in spectra.values()],
            "max Re E": [float(np.max(v.real)) for v in spectra.values()],
        }
    )
    _print_table(f"spectrum {resolved.name} L={L}", table.values.tolist(), list(table.columns))
    passed = all(r.passed for r in m1.values()) and all(r.passed for r in consistency.values())
    return passed, result


def cmd_curve(config: RunConfig, settings: dict, ctx: dict) -> tuple[bool, dict]:
    p = config.complex_params()
    branch = CurveBranch(config.branch or "SB")
    if branch is CurveBranch.SB:
        spec = CurveSpec(branch, lambda4=p.get("lambda4", 0.3))
    else:
        if "alpha" not in p or "beta" not in p:
            raise ConfigError("the MB curve needs --alpha and --beta")
        spec = CurveSpec(branch, alpha=p["alpha"], beta=p["beta"])
    a = p.get("a", 1.0)
    points = sample_curve(spec, a)
    rows = []
    for pt in points:
        try:
            slope = curve_slope(pt, spec)
        except YbeForgeError:
            slope = None
        rows.append({"point": pt, "residual": curve_residual(pt, spec), "slope": slope})
    worst = max((r["residual"] for r in rows), default=0.0)
    _print_table(
        f"{branch.value} curve at a={complex(a):.4g}",
        [[f"{complex(r['point'].b):.6g}", f"{r['residual']:.2e}"] for r in rows],
        ["b", "residual"],
    )
    return worst <= ctx["tolerances"].algebraic, {"branch": branch.value, "a": a, "points": rows}


COMMAND_TABLE = {
    "verify": cmd_verify,
    "reconstruct": cmd_reconstruct,
    "certify-no-go": cmd_certify,
    "baxterize": cmd_baxterize,
    "spectrum": cmd_spectrum,
    "curve": cmd_curve,
}


# ── Entry point ───────────────────────────────────────────────────────────


def usage_report(message: str) -> dict:
    return {"success": False, "error": message}


def execute(config: RunConfig, settings: dict) -> tuple[int, dict]:
    """Run one configuration; returns the exit code and the report (or a usage-error dict)."""
    try:
        ctx = {
            "tolerances": tolerances_from(settings, config.tolerances),
            "threads": thread_count(settings, config.threads),
        }
    except KeyError as e:
        return EXIT_USAGE, usage_report(str(e))

    error = None
    try:
        passed, result = COMMAND_TABLE[config.command](config, settings, ctx)
    except ConfigError as e:
        return EXIT_USAGE, usage_report(str(e))
    except YbeForgeError as e:
        logger.error("%s failed: %s", config.command, e)
        passed, result, error = False, {}, f"{type(e).__name__}: {e}"

    report = envelope(config.command, config.to_dict(), ctx["tolerances"].to_dict(), passed, result, error)
    check = JsonReportSink().validate(report)
    if not check["success"]:
        logger.error(check["error"])
        return EXIT_FAIL, {**report, "passed": False, "error": check["error"]}
    return (EXIT_PASS if passed else EXIT_FAIL), report


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = load_settings(args.settings)
    configure_logging(settings, args.verbose)
    try:
        config = config_from_args(args, settings)
    except ConfigError as e:
        code, report = EXIT_USAGE, usage_report(str(e))
    else:
        code, report = execute(config, settings)

    print(dumps(report))
    if code == EXIT_USAGE:
        print(f"error: {report['error']}", file=sys.stderr)
        return code
    if config.out:
        written = JsonReportSink().write(report, config.out)
        if not written["success"]:
            logger.error("cannot write %s: %s", config.out, written["error"])
            return EXIT_FAIL
        print(f"report written to {config.out}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
