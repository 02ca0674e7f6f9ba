import json
import math

import pytest

from keplergeom.cli import main
from keplergeom.config import RunConfig
from keplergeom.verify import CheckResult, VerifyReport, run_verify

from conftest import (
    F1_BOUNDING_AXIS,
    F1_ENVELOPE_AXIS,
    F1_ENVELOPE_ECC,
    F1_LOCUS_RADIUS,
    S1_DIRECTRIX_X,
    S1_SECOND_FOCUS_X,
)

EXPECTED_CHECKS = {
    "second_focus_reflection_vs_lenz",
    "kepler_solver_residual",
    "rk4_energy_drift_one_period",
    "rk4_angular_momentum_drift_one_period",
    "rk4_lenz_drift_one_period",
    "focal_sum_numeric",
    "focal_sum_analytic",
    "period_detected_vs_closed_form",
    "harmonic_ratio_closed_form",
    "area_equal_intervals",
    "area_full_period_vs_pi_ab",
    "focus_locus_radius",
    "eccentricity_minimum",
    "eccentricity_minimum_far",
    "bounding_supremum_attained",
    "bounding_never_exceeded",
    "envelope_tangency",
    "envelope_tangency_parabola",
    "envelope_tangency_hyperbola",
    "reflected_focus_closed_form_vs_mirror",
    "simultaneous_return",
}


@pytest.fixture(scope="module")
def strangled_report():
    """One full verify run with an unmeetable tolerance scale."""
    return run_verify(RunConfig(tol_override=1e-30))


class TestVerify:
    def test_unmeetable_tolerance_fails(self, strangled_report):
        assert strangled_report.overall is False
        assert {c.name for c in strangled_report.checks} == EXPECTED_CHECKS
        for check in strangled_report.checks:
            assert math.isfinite(check.residual)
            assert check.residual >= 0.0
            assert check.tolerance > 0.0
            # checks with an exactly-zero residual survive any tolerance
            assert check.passed is (check.residual == 0.0)

    def test_residuals_pass_at_spec_tolerances(self, strangled_report):
        # The same residuals judged at the unscaled tolerances must pass;
        # this is the default-configuration outcome without a second run.
        for check in strangled_report.checks:
            assert check.residual <= check.tolerance / 1e-30

    def test_json_schema(self, strangled_report):
        payload = json.loads(strangled_report.to_json())
        assert set(payload) == {"checks", "overall"}
        assert payload["overall"] is False
        for entry in payload["checks"]:
            assert set(entry) == {"name", "residual", "tolerance", "pass"}

    def test_csv_rendering(self):
        report = VerifyReport(
            checks=(CheckResult("alpha", 1.5e-13, 1e-12, True),),
            overall=True,
        )
        text = report.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "name,residual,tolerance,pass"
        assert lines[1].startswith("alpha,1.5e-13,1e-12,true")
        assert lines[-1] == "overall,,,true"


class TestExitCodes:
    def test_verify_failure_exit(self, capsys, monkeypatch, strangled_report):
        # patch run_verify so the exit-1 path does not recompute the suite
        import keplergeom.cli as cli_mod

        monkeypatch.setattr(cli_mod, "run_verify", lambda config: strangled_report)
        code = main(["verify"])
        capsys.readouterr()
        assert code == 1

    def test_unbound_energy_is_usage_error(self, capsys):
        assert main(["verify", "--H", "0.1"]) == 2
        assert "error" in capsys.readouterr().err

    def test_bad_sample_count(self, capsys):
        assert main(["family", "--samples", "2"]) == 2
        capsys.readouterr()

    def test_bad_dt_fraction(self, capsys):
        assert main(["verify", "--dt-fraction", "0.5"]) == 2
        capsys.readouterr()

    def test_fixed_point_outside_fall_circle(self, capsys):
        assert main(["orbit", "--r", "4,0,0"]) == 2
        capsys.readouterr()

    def test_radial_psi_is_usage_error(self, capsys):
        assert main(["orbit", "--psi", "0"]) == 2
        capsys.readouterr()

    def test_unknown_command_rejected(self, capsys):
        assert main(["frobnicate"]) == 2
        capsys.readouterr()

    def test_near_degenerate_family_is_numeric_error(self, capsys):
        # r just inside the fall circle: every member's eccentricity sits
        # inside the refusal band of the propagators.
        radius = 2.0 * (25.0 / 14.0) * (1.0 - 1e-10)
        assert main(["figures", "--r", f"{radius!r},0,0", "--samples", "4"]) == 3
        assert "numeric error" in capsys.readouterr().err


class TestOrbitCommand:
    def test_default_member_payload(self, capsys):
        assert main(["orbit"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["conserved"]["energy"] == pytest.approx(-0.28, abs=1e-14)
        assert payload["conserved"]["eccentricity"] == pytest.approx(0.44, abs=1e-13)
        assert payload["second_focus"][0] == pytest.approx(S1_SECOND_FOCUS_X, abs=1e-12)
        assert payload["geometry"]["a"] == pytest.approx(25.0 / 14.0, rel=1e-13)
        assert payload["directrix"]["base"][0] == pytest.approx(S1_DIRECTRIX_X, abs=1e-12)
        assert payload["fall_point"][0] == pytest.approx(25.0 / 7.0, abs=1e-12)

    def test_circular_member_has_no_directrix(self, capsys):
        a = 25.0 / 14.0
        assert main(["orbit", "--r", f"{a!r},0,0"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["directrix"] is None

    def test_csv_format(self, capsys):
        assert main(["orbit", "--format", "csv"]) == 0
        out = capsys.readouterr().out
        lines = out.strip().split("\n")
        assert lines[0] == "name,value"
        rows = {line.split(",")[0]: line for line in lines[1:]}
        assert "geometry.a" in rows
        assert "second_focus" in rows

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "orbit.json"
        assert main(["orbit", "--out", str(target)]) == 0
        capsys.readouterr()
        payload = json.loads(target.read_text())
        assert payload["geometry"]["e"] == pytest.approx(0.44, abs=1e-13)


class TestFamilyCommand:
    def test_payload(self, capsys):
        assert main(["family", "--samples", "32"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["focus_locus"]["radius"] == pytest.approx(F1_LOCUS_RADIUS)
        assert payload["focus_locus"]["max_abs_radius_error"] <= 1e-12
        assert payload["eccentricity_extremes"]["min"] == pytest.approx(0.44, abs=1e-14)
        assert payload["eccentricity_extremes"]["sup"] == 1.0
        assert payload["bounding"]["major_axis"] == pytest.approx(F1_BOUNDING_AXIS)
        assert payload["simultaneous_return_max_miss"] <= 1e-9


class TestEnvelopeCommand:
    def test_ellipse_payload(self, capsys):
        assert main(["envelope", "--samples", "64"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["envelope"]["kind"] == "ellipse"
        assert payload["envelope"]["major_axis"] == pytest.approx(F1_ENVELOPE_AXIS)
        assert payload["envelope"]["eccentricity"] == pytest.approx(F1_ENVELOPE_ECC)
        assert payload["tangency"]["max_residual"] <= 1e-10
        assert payload["fitted_numerically"] is False
        assert payload["branches"] is None
        assert payload["envelope_directrix"]["base"][0] == pytest.approx(-18.0 / 7.0)

    def test_hyperbola_payload(self, capsys):
        radius = 1.5 * 25.0 / 14.0
        assert main(["envelope", "--r", f"{radius!r},0,0", "--samples", "64"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["envelope"]["kind"] == "hyperbola"
        assert payload["envelope"]["eccentricity"] == pytest.approx(3.0, rel=1e-12)
        assert payload["tangency"]["max_residual"] <= 1e-8
        assert payload["branches"]["near"] + payload["branches"]["far"] == 64
        assert payload["envelope_directrix"] is None

    def test_parabola_payload(self, capsys):
        radius = 25.0 / 14.0
        assert main(["envelope", "--r", f"{radius!r},0,0", "--samples", "64"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["envelope"]["kind"] == "parabola"
        assert payload["fitted_numerically"] is True
        assert payload["u_focus"] is None
        assert payload["envelope"]["directrix"]["base"][0] == pytest.approx(
            -radius, abs=1e-9
        )


class TestArgumentParsing:
    def test_scalar_radius_form(self, capsys):
        assert main(["orbit", "--r", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["state"]["r"] == [1.0, 0.0, 0.0]

    def test_malformed_radius(self, capsys):
        assert main(["orbit", "--r", "1,2"]) == 2
        capsys.readouterr()
