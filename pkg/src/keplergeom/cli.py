"""Command-line interface.

Subcommands: ``verify`` (run the identity suite, exit 0 iff all checks
pass), ``orbit`` (conserved quantities and ellipse elements for one family
member), ``family`` (focus locus, eccentricity extremes, bounding ellipse,
simultaneous return), ``envelope`` (directrix envelope with tangency
evidence), ``figures`` (figure datasets plus PNG renderings).

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 numeric or
singularity error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import (
    DEFAULT_DT_FRACTION,
    DEFAULT_ENERGY,
    DEFAULT_PSI,
    DEFAULT_R_FIXED,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    RunConfig,
)
from .errors import KeplerGeomError
from .family import (
    bounding_envelope,
    directrix_envelope,
    eccentricity_extremes,
    envelope_directrix,
    focus_locus,
    simultaneous_return_check,
)
from .figures import emit_figure_data
from .state import directrix, fall_point
from .errors import CircularOrbitError
from .verify import run_verify

EXIT_PASS = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _parse_r(text: str) -> tuple[float, float, float]:
    """Either a full "x,y,z" vector or a scalar radius on the default axis."""
    parts = [p for p in text.split(",") if p.strip() != ""]
    if len(parts) == 1:
        return (float(parts[0]), 0.0, 0.0)
    if len(parts) == 3:
        return (float(parts[0]), float(parts[1]), float(parts[2]))
    raise argparse.ArgumentTypeError("expected a scalar radius or x,y,z")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keplergeom",
        description="Geometry of bound Kepler orbits and the fixed-energy "
        "family through a fixed point.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mu", type=float, default=1.0, help="reduced mass (default 1)")
    common.add_argument("--k", type=float, default=1.0, help="coupling constant (default 1)")
    common.add_argument(
        "--H", type=float, default=DEFAULT_ENERGY, dest="energy",
        help=f"family energy, must be negative (default {DEFAULT_ENERGY})",
    )
    common.add_argument(
        "--r", type=_parse_r, default=DEFAULT_R_FIXED, metavar="X,Y,Z",
        help="fixed point as x,y,z or a scalar radius on the x axis (default 1,0,0)",
    )
    common.add_argument(
        "--psi", type=float, default=DEFAULT_PSI,
        help="momentum angle of the selected member (default pi/2)",
    )
    common.add_argument(
        "--samples", type=int, default=DEFAULT_SAMPLES,
        help=f"family sample count, at least 3 (default {DEFAULT_SAMPLES})",
    )
    common.add_argument(
        "--dt-fraction", type=float, default=DEFAULT_DT_FRACTION, dest="dt_fraction",
        help="numeric step as a fraction of the period, in (0, 1e-2] "
        f"(default {DEFAULT_DT_FRACTION})",
    )
    common.add_argument(
        "--format", choices=("json", "csv"), default="json", dest="fmt",
        help="output format (default json)",
    )
    common.add_argument("--out", dest="out_path", default=None, help="output file or directory")
    common.add_argument(
        "--tol-override", type=float, default=None, dest="tol_override",
        help="scale every verification tolerance by this factor (exploration only)",
    )
    common.add_argument(
        "--seed", type=int, default=DEFAULT_SEED,
        help=f"seed for the randomized checks (default {DEFAULT_SEED})",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    sub.add_parser("orbit", parents=[common], help="orbit elements of one member")
    sub.add_parser("family", parents=[common], help="family loci summary")
    sub.add_parser("envelope", parents=[common], help="directrix envelope report")
    sub.add_parser("figures", parents=[common], help="emit figure data and PNGs")
    return parser


def _vec(v) -> list[float]:
    return [float(x) for x in v]


def _conic_dict(conic) -> dict:
    out = {
        "kind": conic.kind.value,
        "focus1": _vec(conic.focus1),
        "focus2": None if conic.focus2 is None else _vec(conic.focus2),
        "major_axis": conic.major_axis,
        "eccentricity": conic.eccentricity,
        "normal": _vec(conic.normal),
    }
    if conic.directrix is not None:
        out["directrix"] = {"base": _vec(conic.directrix.base), "normal": _vec(conic.directrix.normal)}
    return out


def _orbit_payload(config: RunConfig) -> dict:
    member = config.member()
    params = config.params
    cons, geom = member.conserved, member.geometry
    try:
        line = directrix(member.state, params)
        directrix_out = {"base": _vec(line.base), "normal": _vec(line.normal)}
    except CircularOrbitError:
        directrix_out = None
    return {
        "params": {"mu": params.mu, "k": params.k},
        "state": {"psi": member.psi, "r": _vec(member.state.r), "p": _vec(member.state.p)},
        "conserved": {
            "angular_momentum": _vec(cons.angular_momentum),
            "energy": cons.energy,
            "lenz": _vec(cons.lenz),
            "eccentricity": cons.eccentricity,
        },
        "fall_point": _vec(fall_point(member.state, params)),
        "second_focus": _vec(geom.focus_second),
        "geometry": {
            "a": geom.a,
            "b": geom.b,
            "c": geom.c,
            "e": geom.e,
            "period": geom.period,
            "fall_radius": geom.fall_radius,
            "plane_normal": _vec(geom.plane_normal),
        },
        "directrix": directrix_out,
    }


def _family_payload(config: RunConfig) -> dict:
    spec = config.family_spec()
    foci = focus_locus(spec, config.samples)
    radius = 2.0 * spec.a - spec.r
    radius_err = float(np.max(np.abs(np.linalg.norm(foci - spec.r_fixed, axis=1) - radius)))
    e_min, e_sup = eccentricity_extremes(spec)
    return {
        "spec": _spec_dict(spec),
        "eccentricity_extremes": {"min": e_min, "sup": e_sup},
        "focus_locus": {
            "center": _vec(spec.r_fixed),
            "radius": radius,
            "samples": config.samples,
            "max_abs_radius_error": radius_err,
        },
        "bounding": _conic_dict(bounding_envelope(spec)),
        "simultaneous_return_max_miss": simultaneous_return_check(
            spec, min(config.samples, 32)
        ),
    }


def _envelope_payload(config: RunConfig) -> dict:
    spec = config.family_spec()
    report = directrix_envelope(spec, config.samples)
    residuals = [res for _, res in report.per_member_residual]
    branches = None
    if report.branches is not None:
        branches = {
            side: sum(1 for _, b in report.branches if b == side)
            for side in ("near", "far", "indeterminate")
        }
    try:
        env_line = envelope_directrix(spec)
        env_directrix = {"base": _vec(env_line.base), "normal": _vec(env_line.normal)}
    except ValueError:
        env_directrix = None
    return {
        "spec": _spec_dict(spec),
        "envelope": _conic_dict(report.envelope),
        "u_focus": None if report.u_focus is None else _vec(report.u_focus),
        "tangency": {
            "samples": len(residuals),
            "max_residual": max(residuals) if residuals else None,
            "mean_residual": (sum(residuals) / len(residuals)) if residuals else None,
        },
        "branches": branches,
        "skipped": [[p, reason] for p, reason in report.skipped],
        "fitted_numerically": report.fitted_numerically,
        "envelope_directrix": env_directrix,
    }


def _spec_dict(spec) -> dict:
    return {
        "mu": spec.params.mu,
        "k": spec.params.k,
        "energy": spec.energy,
        "r_fixed": _vec(spec.r_fixed),
        "plane_normal": _vec(spec.plane_normal),
        "a": spec.a,
        "p_mag": spec.p_mag,
        "period": spec.period,
    }


def _flatten_csv(payload: dict, prefix: str = "") -> list[str]:
    rows: list[str] = []
    for key, value in payload.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            rows += _flatten_csv(value, prefix=f"{path}.")
        elif isinstance(value, (list, tuple)) and all(
            isinstance(v, (int, float)) for v in value
        ):
            rows.append(path + "," + ",".join(repr(float(v)) for v in value))
        elif isinstance(value, (list, tuple)):
            rows.append(f"{path},{json.dumps(value)}")
        elif value is None:
            rows.append(f"{path},")
        elif isinstance(value, bool):
            rows.append(f"{path},{str(value).lower()}")
        elif isinstance(value, float):
            rows.append(f"{path},{value!r}")
        else:
            rows.append(f"{path},{value}")
    return rows


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        mu=args.mu,
        k=args.k,
        energy=args.energy,
        r_fixed=tuple(args.r),
        psi=args.psi,
        samples=args.samples,
        dt_fraction=args.dt_fraction,
        tol_override=args.tol_override,
        out_path=args.out_path,
        fmt=args.fmt,
        seed=args.seed,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        config = _config_from_args(args)
        config.validate()
        if config.command == "verify":
            report = run_verify(config)
            text = report.to_json() + "\n" if config.fmt == "json" else report.to_csv()
            _emit(text, config.out_path)
            return EXIT_PASS if report.overall else EXIT_VERIFY_FAIL
        if config.command == "figures":
            for path in emit_figure_data(config):
                sys.stdout.write(str(path) + "\n")
            return EXIT_PASS
        payload = {
            "orbit": _orbit_payload,
            "family": _family_payload,
            "envelope": _envelope_payload,
        }[config.command](config)
        if config.fmt == "json":
            text = json.dumps(payload, indent=2) + "\n"
        else:
            text = "name,value\n" + "\n".join(_flatten_csv(payload)) + "\n"
        _emit(text, config.out_path)
        return EXIT_PASS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeplerGeomError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
