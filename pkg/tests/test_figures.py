import csv
import json
import math

import numpy as np
import pytest

from keplergeom.cli import main
from keplergeom.config import RunConfig
from keplergeom.figures import emit_figure_data

from conftest import F1_ENVELOPE_AXIS, F1_LOCUS_RADIUS, S1_FALL_RADIUS


def load_points(path):
    rows = {}
    with open(path, newline="") as handle:
        for record in csv.DictReader(handle):
            rows.setdefault(record["set"], []).append(
                (
                    float(record["psi"]) if record["psi"] else None,
                    float(record["t"]) if record["t"] else None,
                    float(record["x"]),
                    float(record["y"]),
                    float(record["z"]),
                )
            )
    return rows


@pytest.fixture(scope="module")
def emitted(tmp_path_factory):
    out = tmp_path_factory.mktemp("figs")
    config = RunConfig(command="figures", samples=64, out_path=str(out), fmt="csv")
    paths = emit_figure_data(config)
    return out, paths


class TestEmission:
    def test_all_files_written(self, emitted):
        out, paths = emitted
        names = {p.name for p in paths}
        for fig in ("fig1", "fig2", "fig3"):
            assert f"{fig}_points.csv" in names
            assert f"{fig}_conics.json" in names
            assert f"{fig}.png" in names
        for p in paths:
            assert p.exists()
            assert p.stat().st_size > 0

    def test_fall_point_lies_on_fall_circle(self, emitted):
        out, _ = emitted
        rows = load_points(out / "fig1_points.csv")
        (s_point,) = rows["point_s"]
        radius = math.hypot(s_point[2], s_point[3])
        assert radius == pytest.approx(S1_FALL_RADIUS, abs=1e-12)
        circle = np.array([(x, y, z) for _, _, x, y, z in rows["fall_circle"]])
        assert np.max(
            np.abs(np.linalg.norm(circle, axis=1) - S1_FALL_RADIUS)
        ) <= 1e-12

    def test_fig1_has_construction_points(self, emitted):
        out, _ = emitted
        rows = load_points(out / "fig1_points.csv")
        for name in ("orbit", "tangent", "point_origin", "point_r", "point_s", "point_t"):
            assert name in rows
        (t_point,) = rows["point_t"]
        assert t_point[2] == pytest.approx(-11.0 / 7.0, abs=1e-12)

    def test_focus_circle_radius_statistic(self, emitted):
        out, _ = emitted
        rows = load_points(out / "fig2_points.csv")
        locus = np.array([(x, y, z) for _, _, x, y, z in rows["focus_locus"]])
        radii = np.linalg.norm(locus - np.array([1.0, 0.0, 0.0]), axis=1)
        assert np.max(np.abs(radii - F1_LOCUS_RADIUS)) <= 1e-10

    def test_fig3_envelope_sidecar(self, emitted):
        out, _ = emitted
        sidecar = json.loads((out / "fig3_conics.json").read_text())
        envelope = sidecar["conics"]["envelope"]
        assert envelope["kind"] == "ellipse"
        assert envelope["major_axis"] == pytest.approx(F1_ENVELOPE_AXIS)
        assert "directrix" not in envelope
        assert "envelope_directrix" in sidecar["lines"]
        rows = load_points(out / "fig3_points.csv")
        assert "directrix" in rows
        assert "envelope" in rows
        assert len({psi for psi, *_ in rows["directrix"]}) == 32

    def test_orbit_rows_carry_time_and_psi(self, emitted):
        out, _ = emitted
        rows = load_points(out / "fig1_points.csv")
        psi_values = [psi for psi, *_ in rows["orbit"]]
        assert all(psi == pytest.approx(math.pi / 2.0) for psi in psi_values)
        times = [t for _, t, *_ in rows["orbit"]]
        assert times == sorted(times)


class TestJsonFormat:
    def test_single_document(self, tmp_path):
        config = RunConfig(command="figures", samples=16, out_path=str(tmp_path), fmt="json")
        paths = emit_figure_data(config)
        names = {p.name for p in paths}
        assert "fig1.json" in names and "fig1_points.csv" not in names
        doc = json.loads((tmp_path / "fig2.json").read_text())
        assert set(doc) == {"figure", "points", "conics", "lines"}
        sets = {entry["set"] for entry in doc["points"]}
        assert {"orbit", "focus_locus", "bounding"} <= sets


class TestCliIntegration:
    def test_figures_subcommand(self, tmp_path, capsys):
        assert main(["figures", "--samples", "16", "--out", str(tmp_path)]) == 0
        printed = capsys.readouterr().out.strip().split("\n")
        assert len(printed) == 6  # three json documents + three renderings
        for line in printed:
            assert (tmp_path / line.split("/")[-1]).exists()

    def test_empty_sample_count_rejected(self, tmp_path, capsys):
        assert main(["figures", "--samples", "0", "--out", str(tmp_path)]) == 2
        capsys.readouterr()
