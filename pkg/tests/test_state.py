import math

import numpy as np
import pytest

from keplergeom import (
    CircularOrbitError,
    DegenerateOrbitError,
    PhaseState,
    RestStateWarning,
    UnboundOrbitError,
    analytic_trajectory,
    conserved_quantities,
    directrix,
    fall_point,
    geometric_second_focus,
    orbit_geometry,
    params_from_masses,
    point_line_distance,
)
from keplergeom.verify import random_bound_state

from conftest import (
    S1_A,
    S1_B,
    S1_C,
    S1_DIRECTRIX_X,
    S1_ENERGY,
    S1_FALL_RADIUS,
    S1_PERIOD,
    S1_SECOND_FOCUS_X,
)


@pytest.fixture
def circular(params):
    return PhaseState(r=(1.0, 0.0, 0.0), p=(0.0, 1.0, 0.0))


@pytest.fixture
def radial(params):
    return PhaseState(r=(1.0, 0.0, 0.0), p=(0.5, 0.0, 0.0))


class TestParamsFromMasses:
    def test_equal_masses(self):
        p = params_from_masses(1.0, 1.0, 1.0)
        assert p.mu == pytest.approx(0.5)
        assert p.k == pytest.approx(1.0)

    def test_test_particle_limit(self):
        p = params_from_masses(1.0, 1e-9, 1.0)
        assert p.mu == pytest.approx(1e-9, rel=1e-9)
        assert p.k == pytest.approx(1e-9)

    def test_arithmetic(self):
        p = params_from_masses(2.0, 3.0, 6.0)
        assert p.mu == pytest.approx(2.0)
        assert p.k == pytest.approx(36.0)

    def test_nonpositive_rejected(self):
        for bad in ((0.0, 1.0, 1.0), (1.0, -2.0, 1.0), (1.0, 1.0, 0.0)):
            with pytest.raises(ValueError):
                params_from_masses(*bad)


class TestConservedQuantities:
    def test_worked_example(self, s1, params):
        cons = conserved_quantities(s1, params)
        assert np.allclose(cons.angular_momentum, (0, 0, 1.2), atol=1e-15)
        assert cons.energy == pytest.approx(S1_ENERGY, abs=1e-15)
        assert np.allclose(cons.lenz, (0.44, 0, 0), atol=1e-15)
        assert cons.eccentricity == pytest.approx(0.44, abs=1e-15)

    def test_circular_has_zero_lenz(self, circular, params):
        cons = conserved_quantities(circular, params)
        assert cons.energy == pytest.approx(-0.5, abs=1e-15)
        assert np.linalg.norm(cons.lenz) <= 1e-15

    def test_radial_lenz_antiparallel_to_position(self, radial, params):
        cons = conserved_quantities(radial, params)
        assert np.linalg.norm(cons.angular_momentum) == 0.0
        assert cons.energy == pytest.approx(-0.875, abs=1e-15)
        assert np.allclose(cons.lenz, (-1.0, 0, 0), atol=1e-15)

    def test_square_length_identity_random(self, params):
        rng = np.random.default_rng(21)
        for _ in range(300):
            st = random_bound_state(rng, params, e_min=0.0, e_max=0.95)
            cons = conserved_quantities(st, params)  # validates on construction
            lhs = float(cons.lenz @ cons.lenz)
            l2 = float(cons.angular_momentum @ cons.angular_momentum)
            rhs = 2.0 * params.mu * cons.energy * l2 + (params.k * params.mu) ** 2
            scale = max(abs(lhs), abs(rhs), (params.k * params.mu) ** 2)
            assert abs(lhs - rhs) <= 1e-12 * scale

    def test_orthogonality_away_from_circular(self, params):
        # |L . K| <= 1e-12 |L||K| is only well-conditioned once the Lenz
        # vector stands clear of its cancellation noise floor.
        rng = np.random.default_rng(27)
        for _ in range(300):
            st = random_bound_state(rng, params, e_min=0.05, e_max=0.95)
            cons = conserved_quantities(st, params)
            bound = 1e-12 * np.linalg.norm(cons.angular_momentum) * np.linalg.norm(cons.lenz)
            assert abs(float(cons.angular_momentum @ cons.lenz)) <= bound

    def test_origin_rejected_at_state_construction(self):
        with pytest.raises(ValueError):
            PhaseState(r=(0.0, 0.0, 0.0), p=(0.0, 1.0, 0.0))


class TestFallPoint:
    def test_worked_example(self, s1, params):
        assert np.allclose(fall_point(s1, params), (S1_FALL_RADIUS, 0, 0), atol=1e-14)

    def test_point_of_fall_circle_is_fixed(self, params):
        st = PhaseState(r=(2.0, 0.0, 0.0), p=(0.0, 0.0, 0.0))  # H = -1/2, radius 2
        assert np.allclose(fall_point(st, params), st.r, atol=1e-15)

    def test_circular(self, circular, params):
        assert np.allclose(fall_point(circular, params), (2.0, 0, 0), atol=1e-15)

    def test_unbound_rejected(self, params):
        st = PhaseState(r=(1.0, 0.0, 0.0), p=(0.0, 2.0, 0.0))  # H = +1
        with pytest.raises(UnboundOrbitError):
            fall_point(st, params)


class TestGeometricSecondFocus:
    def test_worked_example(self, s1, params):
        t = geometric_second_focus(s1, params)
        assert np.allclose(t, (S1_SECOND_FOCUS_X, 0, 0), atol=1e-13)

    def test_circular_focus_at_origin(self, circular, params):
        assert np.linalg.norm(geometric_second_focus(circular, params)) <= 1e-13

    def test_matches_lenz_closed_form(self, params):
        rng = np.random.default_rng(22)
        for _ in range(1000):
            st = random_bound_state(rng, params)
            cons = conserved_quantities(st, params)
            closed = cons.lenz / (params.mu * cons.energy)
            mirrored = geometric_second_focus(st, params)
            rel = np.linalg.norm(mirrored - closed) / np.linalg.norm(closed)
            assert rel <= 1e-12

    def test_near_circular_absolute_agreement(self, params):
        # The relative comparison degrades as the focus shrinks to the
        # origin, so tiny eccentricities get an absolute bound instead.
        rng = np.random.default_rng(23)
        for _ in range(200):
            st = random_bound_state(rng, params, e_min=0.0, e_max=0.01)
            cons = conserved_quantities(st, params)
            closed = cons.lenz / (params.mu * cons.energy)
            mirrored = geometric_second_focus(st, params)
            scale = -params.k / cons.energy
            assert np.linalg.norm(mirrored - closed) <= 1e-12 * scale

    def test_focal_sum_forced_for_any_state(self, params):
        rng = np.random.default_rng(24)
        for _ in range(300):
            st = random_bound_state(rng, params, e_min=0.0, e_max=0.95)
            cons = conserved_quantities(st, params)
            t = geometric_second_focus(st, params)
            total = np.linalg.norm(t - st.r) + np.linalg.norm(st.r)
            assert total == pytest.approx(-params.k / cons.energy, rel=1e-12)

    def test_rest_state_returns_fall_point_with_warning(self, params):
        st = PhaseState(r=(2.0, 0.0, 0.0), p=(0.0, 0.0, 0.0))
        with pytest.warns(RestStateWarning):
            t = geometric_second_focus(st, params)
        assert np.allclose(t, st.r, atol=1e-14)

    def test_radial_motion_rejected(self, radial, params):
        with pytest.raises(DegenerateOrbitError):
            geometric_second_focus(radial, params)


class TestOrbitGeometry:
    def test_worked_example(self, s1, params):
        geom = orbit_geometry(s1, params)
        assert geom.a == pytest.approx(S1_A, rel=1e-14)
        assert geom.b == pytest.approx(S1_B, rel=1e-14)
        assert geom.c == pytest.approx(S1_C, rel=1e-14)
        assert geom.e == pytest.approx(0.44, abs=1e-14)
        assert geom.period == pytest.approx(S1_PERIOD, rel=1e-14)
        assert geom.fall_radius == pytest.approx(S1_FALL_RADIUS, rel=1e-14)
        assert np.allclose(geom.focus_second, (S1_SECOND_FOCUS_X, 0, 0), atol=1e-14)
        assert np.allclose(geom.plane_normal, (0, 0, 1), atol=1e-15)
        # cross-check the period against the harmonic-law route
        alt = math.sqrt(4.0 * math.pi**2 * params.mu * geom.a**3 / params.k)
        assert geom.period == pytest.approx(alt, rel=1e-14)

    def test_circular(self, circular, params):
        geom = orbit_geometry(circular, params)
        assert geom.a == pytest.approx(1.0, rel=1e-15)
        assert geom.b == pytest.approx(1.0, rel=1e-15)
        assert geom.c == pytest.approx(0.0, abs=1e-15)
        assert geom.e == pytest.approx(0.0, abs=1e-15)
        assert geom.period == pytest.approx(2.0 * math.pi, rel=1e-15)

    def test_harmonic_ratio(self, s1, circular, params):
        target = params.k / (4.0 * math.pi**2 * params.mu)
        for st in (s1, circular):
            geom = orbit_geometry(st, params)
            assert geom.a**3 / geom.period**2 == pytest.approx(target, rel=1e-12)

    def test_eccentricity_three_expressions(self, params):
        rng = np.random.default_rng(25)
        for _ in range(300):
            st = random_bound_state(rng, params)
            cons = conserved_quantities(st, params)
            geom = orbit_geometry(st, params)
            from_lenz = np.linalg.norm(cons.lenz) / (params.k * params.mu)
            from_focus = np.linalg.norm(geom.focus_second) * (-cons.energy) / params.k
            assert abs(geom.e - geom.c / geom.a) <= 1e-12
            assert abs(geom.e - from_lenz) <= 1e-12
            assert abs(geom.e - from_focus) <= 1e-12

    def test_focus_sum_on_analytic_orbit(self, s1, params, s1_geometry):
        traj = analytic_trajectory(
            s1, params, np.linspace(0.0, s1_geometry.period, 500)
        )
        pos = traj.positions
        sums = np.linalg.norm(pos, axis=1) + np.linalg.norm(
            pos - s1_geometry.focus_second, axis=1
        )
        assert np.max(np.abs(sums - s1_geometry.fall_radius)) <= 1e-10

    def test_unbound_and_radial_rejected(self, radial, params):
        with pytest.raises(UnboundOrbitError):
            orbit_geometry(PhaseState(r=(1, 0, 0), p=(0, 2, 0)), params)
        with pytest.raises(DegenerateOrbitError):
            orbit_geometry(radial, params)


class TestDirectrix:
    def test_worked_example(self, s1, params):
        line = directrix(s1, params)
        assert np.allclose(line.base, (S1_DIRECTRIX_X, 0, 0), atol=1e-14)
        assert np.allclose(line.normal, (1, 0, 0), atol=1e-15)

    def test_distance_is_radius_over_eccentricity(self, s1, params):
        line = directrix(s1, params)
        assert point_line_distance(s1.r, line) == pytest.approx(
            1.0 / 0.44, rel=1e-12
        )

    def test_random_states_distance_identity(self, params):
        rng = np.random.default_rng(26)
        for _ in range(200):
            st = random_bound_state(rng, params)
            cons = conserved_quantities(st, params)
            line = directrix(st, params)
            expected = np.linalg.norm(st.r) / cons.eccentricity
            assert point_line_distance(st.r, line) == pytest.approx(expected, rel=1e-11)

    def test_circular_rejected(self, circular, params):
        with pytest.raises(CircularOrbitError):
            directrix(circular, params)

    def test_degenerate_fall_orbit_directrix_is_r_perp(self, radial, params):
        # L = 0, e = 1: the directrix collapses to the perpendicular of r
        # through the origin.
        line = directrix(radial, params)
        assert np.allclose(line.base, (0, 0, 0), atol=1e-15)
        assert abs(abs(float(line.normal @ (1, 0, 0))) - 1.0) <= 1e-15
