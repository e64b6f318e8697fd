"""Batch command-line interface.

Loads a system (builtin or JSON description), runs one verification or
experiment per invocation, and emits a machine-readable JSON report —
plus a CSV series for the solver experiments.  Reports embed the config
echo, the seed, and the package version, and contain no timestamps, so
a rerun with the same arguments produces byte-identical output.

Exit codes:
    0   success (and the verdict matched --expect, when given)
    1   the verdict did not match any --expect value
    2   malformed input: unknown builtin, bad flags, coefficient
        expressions that fail to parse (message carries the source
        position), systems outside the required form
    3   numerical-domain failure: a coefficient guard tripped or an
        expression hit an evaluation singularity
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from typing import Sequence

import numpy as np

from . import __version__
from .clifford import build_dirac_rep, build_weyl_rep, commutator_table, \
    verify_clifford
from .consistency import (
    VERDICT_CONSISTENT,
    VERDICT_INCONSISTENT,
    CoefficientFormError,
    cc_residuals,
    check_consistency,
    to_coefficient_form,
)
from .dsl import DslEvaluationError, DslParseError
from .potential import (
    DomainError,
    MultiTimeSystem,
    Region,
    SpecError,
    load_system,
    make_builtin,
    sample_configs,
)
from .solver import (
    Grid,
    curvature_norm,
    holonomy_series,
    path_independence_experiment,
    product_state,
)
from .symmetry import (
    GAUGE_REMOVABLE,
    INTERACTING,
    UNDECIDED,
    compose,
    classify_interaction,
    exponential_form_residual,
    inverse,
    make_boost,
    make_rotation,
    make_translation,
    poincare_residual,
    translation_residual,
)

EXIT_OK = 0
EXIT_EXPECT = 1
EXIT_SPEC = 2
EXIT_DOMAIN = 3

EXPECT_CHOICES = ("consistent", "inconsistent", "interacting",
                  "gauge-removable")

# report verdicts -> the lowercase tokens accepted by --expect
_VERDICT_TOKENS = {
    VERDICT_CONSISTENT: "consistent",
    VERDICT_INCONSISTENT: "inconsistent",
    INTERACTING: "interacting",
    GAUGE_REMOVABLE: "gauge-removable",
    UNDECIDED: "undecided",
}


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def _parse_scalar(text: str):
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for convert in (int, float, complex):
        try:
            return convert(text)
        except ValueError:
            pass
    return text  # coefficient source string; parsed by the system builder


def _parse_param_value(raw: str):
    """NAME=VALUE values: scalar, comma-separated 4-tuple, or expression."""
    parts = raw.split(",")
    if len(parts) > 1:
        return tuple(_parse_scalar(part) for part in parts)
    return _parse_scalar(raw)


def _collect_params(pairs: Sequence[str]) -> dict:
    params = {}
    for pair in pairs:
        name, separator, value = pair.partition("=")
        if not separator or not name.strip():
            raise SpecError(f"expected --param NAME=VALUE, got {pair!r}")
        params[name.strip()] = _parse_param_value(value)
    return params


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _load_cmd_system(args: argparse.Namespace) -> MultiTimeSystem:
    if bool(args.spec) == bool(args.builtin):
        raise SpecError("provide exactly one of --spec FILE or --builtin NAME")
    if args.spec:
        if args.param:
            raise SpecError("--param only applies to --builtin systems")
        return load_system(args.spec)
    return make_builtin(args.builtin, _collect_params(args.param))


# ---------------------------------------------------------------------------
# Report plumbing
# ---------------------------------------------------------------------------

def _jsonify(value):
    """Recursively coerce numpy scalars and complex values to JSON types."""
    if isinstance(value, dict):
        return {str(key): _jsonify(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(item) for item in value]
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        as_complex = complex(value)
        return {"im": as_complex.imag, "re": as_complex.real}
    return str(value)


# Echoed into every report: the inputs that determine the numbers.
# Output paths are deliberately left out so that reruns with the same
# seed are byte-identical wherever they are written.
_ECHO_KEYS = ("spec", "builtin", "param", "region", "nsamples", "tol",
              "grid_n", "box_L", "T", "dt", "delta", "expect")


def _config_echo(args: argparse.Namespace) -> dict:
    return _jsonify({key: getattr(args, key)
                     for key in _ECHO_KEYS if hasattr(args, key)})


def _write_text(path: str, text: str) -> None:
    """Atomic file write: stage to a temp file, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _format_csv(rows: Sequence[Sequence]) -> str:
    lines = []
    for row in rows:
        cells = [cell if isinstance(cell, str) else repr(float(cell))
                 for cell in row]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommands: each returns (report dict, verdict or None)
# ---------------------------------------------------------------------------

def _cmd_verify_clifford(args: argparse.Namespace):
    report = {}
    worst = 0.0
    for name, build in (("dirac", build_dirac_rep), ("weyl", build_weyl_rep)):
        rep = build()
        residuals = verify_clifford(rep)
        table_sup = max(residual for _, _, residual in commutator_table(rep))
        worst = max(worst, table_sup, *residuals.values())
        report[name] = {
            "identities": residuals,
            "commutator_table_sup": table_sup,
        }
    report["max_residual"] = worst
    report["ok"] = bool(worst < args.tol)
    return report, None


def _cmd_check(args: argparse.Namespace):
    system = _load_cmd_system(args)
    rep = build_dirac_rep()
    rng = np.random.default_rng(args.seed)
    result = check_consistency(
        system, rep, nsamples=args.nsamples, region=Region(args.region),
        tol=args.tol, rng=rng)
    report = {"system": system.name,
              "masses": list(system.masses)} | result.as_dict()
    return report, result.verdict


def _cmd_cc(args: argparse.Namespace):
    system = _load_cmd_system(args)
    coefficients = to_coefficient_form(system)
    rng = np.random.default_rng(args.seed)
    samples = sample_configs(args.nsamples, rng, system.n_particles,
                             Region(args.region))
    residuals = cc_residuals(coefficients, system.masses, samples)
    sup = max(residuals.values())
    verdict = VERDICT_CONSISTENT if sup < args.tol else VERDICT_INCONSISTENT
    report = {
        "system": system.name,
        "cc": residuals,
        "sup": sup,
        "verdict": verdict,
        "tol": args.tol,
        "region": args.region,
        "nsamples": args.nsamples,
    }
    return report, verdict


def _cmd_classify(args: argparse.Namespace):
    system = _load_cmd_system(args)
    rep = build_dirac_rep()
    classification = classify_interaction(system, rep, tol=args.tol)
    rng = np.random.default_rng(args.seed)
    samples = sample_configs(args.nsamples, rng, system.n_particles)
    offsets = rng.uniform(-2.0, 2.0, size=(5, 4))
    translation_sup = max(
        translation_residual(system, offset, samples, rep)
        for offset in offsets)
    try:
        exponential = exponential_form_residual(
            to_coefficient_form(system), system.masses, samples)
    except CoefficientFormError:
        exponential = None  # alpha-sector fields not constant
    report = classification.as_dict() | {
        "system": system.name,
        "translation_sup": translation_sup,
        "exponential_form": exponential,
    }
    return report, classification.verdict


def _cmd_poincare(args: argparse.Namespace):
    system = _load_cmd_system(args)
    rep = build_dirac_rep()
    rng = np.random.default_rng(args.seed)
    samples = sample_configs(args.nsamples, rng, system.n_particles)
    rapidity = 0.5
    angle = math.pi / 3.0
    offset = (0.4, -0.3, 0.2, 0.7)
    boost_z = make_boost((0.0, 0.0, 1.0), rapidity, rep)
    sweep = (
        ("boost_x", make_boost((1.0, 0.0, 0.0), rapidity, rep)),
        ("boost_y", make_boost((0.0, 1.0, 0.0), rapidity, rep)),
        ("boost_z", boost_z),
        ("rotation_x", make_rotation((1.0, 0.0, 0.0), angle, rep)),
        ("rotation_y", make_rotation((0.0, 1.0, 0.0), angle, rep)),
        ("rotation_z", make_rotation((0.0, 0.0, 1.0), angle, rep)),
        ("translation", make_translation(offset)),
        ("boost_z_times_inverse", compose(boost_z, inverse(boost_z))),
    )
    residuals = {name: poincare_residual(system, transform, samples, rep)
                 for name, transform in sweep}
    report = {
        "system": system.name,
        "residuals": residuals,
        "rapidity": rapidity,
        "angle": angle,
        "offset": list(offset),
        "nsamples": args.nsamples,
    }
    return report, None


def _cmd_simulate(args: argparse.Namespace):
    if bool(args.dt) == bool(args.delta):
        raise SpecError("simulate needs exactly one of --dt or --delta")
    system = _load_cmd_system(args)
    rep = build_dirac_rep()
    grid = Grid(length=args.box_L, points=args.grid_n)
    psi0 = product_state(grid)
    if args.dt:
        result = path_independence_experiment(
            system, psi0, args.T, args.dt, rep)
        report = {
            "system": system.name,
            "experiment": "path-independence",
            "total_time": args.T,
        } | result.as_dict()
        csv_rows = [("dt", "discrepancy", "fitted_order")]
        csv_rows += [(dt, disc, result.fitted_order)
                     for dt, disc in result.rows]
    else:
        result = holonomy_series(system, psi0, args.delta, rep)
        report = {
            "system": system.name,
            "experiment": "loop-holonomy",
            "curvature_norm": curvature_norm(system, psi0, rep),
        } | result.as_dict()
        csv_rows = [("delta", "deviation", "deviation_per_delta2")]
        csv_rows += list(result.rows)
    report["grid"] = {"length": grid.length, "points": grid.points}
    if args.csv:
        _write_text(args.csv, _format_csv(csv_rows))
    return report, None


_HANDLERS = {
    "verify-clifford": _cmd_verify_clifford,
    "check": _cmd_check,
    "cc": _cmd_cc,
    "classify": _cmd_classify,
    "poincare": _cmd_poincare,
    "simulate": _cmd_simulate,
}


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtdirac",
        description="Consistency checks and experiments for multi-time "
                    "Dirac pairs.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="sampling seed; fixes the report bytes")
    common.add_argument("--tol", type=float, default=1e-9,
                        help="verdict tolerance (default 1e-9)")
    common.add_argument("--out", metavar="PATH",
                        help="write the JSON report here (default: stdout)")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--spec", metavar="FILE",
                        help="JSON system description")
    source.add_argument("--builtin", metavar="NAME",
                        help="builtin system (free, hoho, example1_vector, "
                             "coefficient_form, coulomb_like)")
    source.add_argument("--param", action="append", default=[],
                        metavar="NAME=VALUE",
                        help="builtin parameter; repeatable; values may be "
                             "numbers, comma-separated 4-vectors, or "
                             "coefficient expressions")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--nsamples", type=int, default=100,
                          help="number of sampled configurations")

    region = argparse.ArgumentParser(add_help=False)
    region.add_argument("--region", choices=["all", "spacelike"],
                        default="all",
                        help="sampling region (default: all)")

    expect = argparse.ArgumentParser(add_help=False)
    expect.add_argument("--expect", action="append",
                        choices=list(EXPECT_CHOICES), default=None,
                        help="exit 1 unless the verdict matches one of "
                             "these; repeatable")

    sub.add_parser(
        "verify-clifford", parents=[common],
        help="algebra identities and the commutator table, both "
             "representations")
    sub.add_parser(
        "check", parents=[common, source, sampling, region, expect],
        help="sampled consistency verdict for a two-particle system")
    sub.add_parser(
        "cc", parents=[common, source, sampling, region, expect],
        help="scalar compatibility conditions of the coefficient form")
    sub.add_parser(
        "classify", parents=[common, source, sampling, expect],
        help="interaction vs gauge classification, plus translation and "
             "exponential-form residuals")
    sub.add_parser(
        "poincare", parents=[common, source, sampling],
        help="covariance residuals for a fixed transform sweep")
    simulate = sub.add_parser(
        "simulate", parents=[common, source],
        help="two-time split-step experiments on the line model")
    simulate.add_argument("--grid-n", type=int, default=128, dest="grid_n",
                          help="grid points per particle (default 128)")
    simulate.add_argument("--box-L", type=float, default=20.0, dest="box_L",
                          help="periodic box length (default 20)")
    simulate.add_argument("--T", type=float, default=0.5, dest="T",
                          help="total time per particle for the "
                               "path-independence run (default 0.5)")
    simulate.add_argument("--dt", type=_float_list, metavar="D1,D2,...",
                          help="time steps: compare the two evolution orders")
    simulate.add_argument("--delta", type=_float_list, metavar="D1,D2,...",
                          help="loop sizes: run the holonomy series")
    simulate.add_argument("--csv", metavar="PATH",
                          help="write the series as CSV here")
    return parser


def entry(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        report, verdict = _HANDLERS[args.command](args)
    except (SpecError, CoefficientFormError, DslParseError,
            OSError) as exc:
        print(f"mtdirac: error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (DomainError, DslEvaluationError) as exc:
        print(f"mtdirac: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN

    envelope = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "config": _config_echo(args),
        "report": _jsonify(report),
    }
    if verdict is not None:
        envelope["verdict"] = verdict
    text = json.dumps(envelope, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)

    expectations = getattr(args, "expect", None)
    if expectations:
        token = _VERDICT_TOKENS.get(verdict or "")
        if token not in expectations:
            print(f"mtdirac: verdict {verdict} does not match "
                  f"--expect {','.join(expectations)}", file=sys.stderr)
            return EXIT_EXPECT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(entry())
