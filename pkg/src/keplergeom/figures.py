"""Figure datasets and rendered figures.

Three figures cover the library's geometry:

* fig1 -- one orbit with its fall circle, the projected point s, the tangent
  line at the state, and the reflected second focus t;
* fig2 -- the fixed-energy family through the fixed point, the circle traced
  by the second foci, and the bounding ellipse;
* fig3 -- the members' origin-directrices and their envelope conic.

Each figure is written as a delimited point table (CSV schema
``set,psi,t,x,y,z``) with a JSON sidecar of conic/line parameters, or as a
single JSON document, and is additionally rendered to PNG.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .config import RunConfig
from .family import (
    bounding_envelope,
    directrix_envelope,
    envelope_directrix,
    family_member,
    focus_locus,
    psi_grid,
)
from .geom import ConicSpec, Line, plane_basis, sample_conic, unit
from .propagation import analytic_trajectory
from .state import directrix, fall_point

__all__ = ["emit_figure_data"]

# Rows are (set, psi, t, x, y, z); psi and t are None where not applicable.
Row = tuple[str, float | None, float | None, float, float, float]


def _rows(name: str, points: np.ndarray, psi=None, times=None) -> list[Row]:
    pts = np.atleast_2d(points)
    out = []
    for i, (x, y, z) in enumerate(pts):
        t = None if times is None else float(times[i])
        out.append((name, None if psi is None else float(psi), t, float(x), float(y), float(z)))
    return out


def _line_points(line: Line, plane_normal, half_length: float, n: int = 17) -> np.ndarray:
    direction = np.cross(plane_normal, line.normal)
    u = np.linspace(-half_length, half_length, n)
    return line.base + np.outer(u, direction)


def _conic_payload(conic: ConicSpec) -> dict:
    payload = {
        "kind": conic.kind.value,
        "focus1": [float(v) for v in conic.focus1],
        "focus2": None if conic.focus2 is None else [float(v) for v in conic.focus2],
        "major_axis": conic.major_axis,
        "eccentricity": conic.eccentricity,
        "normal": [float(v) for v in conic.normal],
    }
    if conic.directrix is not None:
        payload["directrix"] = _line_payload(conic.directrix)
    return payload


def _line_payload(line: Line) -> dict:
    return {
        "base": [float(v) for v in line.base],
        "normal": [float(v) for v in line.normal],
    }


def _fig1(config: RunConfig):
    member = config.member()
    params = config.params
    geom = member.geometry
    orbit = analytic_trajectory(
        member.state, params, np.linspace(0.0, geom.period, 256, endpoint=False)
    )
    rows: list[Row] = _rows("orbit", orbit.positions, psi=member.psi, times=orbit.times)
    theta = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
    e1, e2 = plane_basis(geom.plane_normal, prefer=member.state.r)
    circle = geom.fall_radius * (np.outer(np.cos(theta), e1) + np.outer(np.sin(theta), e2))
    for angle, point in zip(theta, circle):
        rows.append(("fall_circle", float(angle), None, *map(float, point)))
    tangent = Line(base=member.state.r, normal=unit(np.cross(member.state.p, member.conserved.angular_momentum)))
    rows += _rows("tangent", _line_points(tangent, geom.plane_normal, geom.fall_radius))
    s = fall_point(member.state, params)
    rows += _rows("point_origin", np.zeros(3))
    rows += _rows("point_r", member.state.r)
    rows += _rows("point_s", s)
    rows += _rows("point_t", geom.focus_second)
    conics = {
        "orbit": _conic_payload(
            ConicSpec.ellipse(np.zeros(3), geom.focus_second, 2.0 * geom.a, geom.plane_normal)
        ),
        "fall_circle": _conic_payload(
            ConicSpec.circle(np.zeros(3), geom.fall_radius, geom.plane_normal)
        ),
    }
    lines = {"tangent": _line_payload(tangent)}
    return rows, conics, lines


def _fig2(config: RunConfig):
    spec = config.family_spec()
    params = config.params
    rows: list[Row] = []
    for psi in psi_grid(min(16, config.samples)):
        m = family_member(spec, psi)
        arc = analytic_trajectory(
            m.state, params, np.linspace(0.0, m.geometry.period, 128, endpoint=False)
        )
        rows += _rows("orbit", arc.positions, psi=psi, times=arc.times)
    foci = focus_locus(spec, config.samples)
    for psi, point in zip(psi_grid(config.samples), foci):
        rows.append(("focus_locus", float(psi), None, *map(float, point)))
    bounding = bounding_envelope(spec)
    rows += _rows("bounding", sample_conic(bounding, 256))
    rows += _rows("point_origin", np.zeros(3))
    rows += _rows("point_r", spec.r_fixed)
    conics = {
        "bounding": _conic_payload(bounding),
        "focus_circle": _conic_payload(
            ConicSpec.circle(spec.r_fixed, 2.0 * spec.a - spec.r, spec.plane_normal)
        ),
        "fall_circle": _conic_payload(
            ConicSpec.circle(np.zeros(3), 2.0 * spec.a, spec.plane_normal)
        ),
    }
    return rows, conics, {}


def _fig3(config: RunConfig):
    spec = config.family_spec()
    params = config.params
    report = directrix_envelope(spec, config.samples)
    rows: list[Row] = []
    extent = 2.0 * spec.a + spec.r
    for psi in psi_grid(min(32, config.samples)):
        m = family_member(spec, psi)
        line = directrix(m.state, params)
        rows += _rows("directrix", _line_points(line, spec.plane_normal, extent), psi=psi)
    rows += _rows("envelope", sample_conic(report.envelope, 256))
    rows += _rows("point_r", spec.r_fixed)
    if report.u_focus is not None:
        rows += _rows("point_u", report.u_focus)
    conics = {"envelope": _conic_payload(report.envelope)}
    lines = {}
    if spec.r < spec.a * (1.0 - 1e-9):
        lines["envelope_directrix"] = _line_payload(envelope_directrix(spec))
    return rows, conics, lines


_BUILDERS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3}

_MARKER_SETS = {"point_origin", "point_r", "point_s", "point_t", "point_u"}


def _render(name: str, rows: list[Row], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    grouped: dict[tuple[str, float | None], list[tuple[float, float]]] = {}
    for set_name, psi, _t, x, y, _z in rows:
        grouped.setdefault((set_name, psi), []).append((x, y))
    seen_labels = set()
    for (set_name, _psi), pts in grouped.items():
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        label = None if set_name in seen_labels else set_name
        seen_labels.add(set_name)
        if set_name in _MARKER_SETS:
            ax.plot(xs, ys, "o", markersize=5, label=label)
        elif set_name == "focus_locus":
            ax.plot(xs, ys, ".", markersize=2, label=label)
        elif set_name in ("orbit", "fall_circle", "bounding", "envelope"):
            closed = set_name != "envelope"
            if closed:
                xs.append(xs[0])
                ys.append(ys[0])
            ax.plot(xs, ys, "-", linewidth=1.0, label=label)
        else:
            ax.plot(xs, ys, "-", linewidth=0.5, alpha=0.6, label=label)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=7)
    ax.set_title(name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _write_csv(rows: list[Row], path: Path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["set", "psi", "t", "x", "y", "z"])
    for set_name, psi, t, x, y, z in rows:
        writer.writerow(
            [
                set_name,
                "" if psi is None else repr(psi),
                "" if t is None else repr(t),
                repr(x),
                repr(y),
                repr(z),
            ]
        )
    path.write_text(buffer.getvalue())


def emit_figure_data(config: RunConfig) -> list[Path]:
    """Write the three figure datasets plus rendered PNGs; returns the paths.

    CSV format produces ``figN_points.csv`` plus a ``figN_conics.json``
    sidecar per figure; JSON format produces one ``figN.json`` document with
    the named point sets inline.  A ``figN.png`` rendering accompanies each.
    """
    config.validate()
    out_dir = Path(config.out_path) if config.out_path else Path("figures")
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for name, builder in _BUILDERS.items():
        rows, conics, lines = builder(config)
        sidecar = {"conics": conics, "lines": lines}
        if config.fmt == "csv":
            points_path = out_dir / f"{name}_points.csv"
            _write_csv(rows, points_path)
            conics_path = out_dir / f"{name}_conics.json"
            conics_path.write_text(json.dumps(sidecar, indent=2) + "\n")
            written += [points_path, conics_path]
        else:
            doc = {
                "figure": name,
                "points": [
                    {"set": s, "psi": psi, "t": t, "x": x, "y": y, "z": z}
                    for s, psi, t, x, y, z in rows
                ],
                **sidecar,
            }
            json_path = out_dir / f"{name}.json"
            json_path.write_text(json.dumps(doc, indent=2) + "\n")
            written.append(json_path)
        png_path = out_dir / f"{name}.png"
        _render(name, rows, png_path)
        written.append(png_path)
    return written
