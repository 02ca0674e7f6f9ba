import pytest

from keplergeom import (
    FamilySpec,
    PhaseState,
    PhysParams,
    integrate_numeric,
    orbit_geometry,
)
from keplergeom.propagation import Trajectory

# Worked example used throughout: mu = k = 1, r = (1,0,0), p = (0, 1.2, 0).
# Every derived number below was recomputed independently in 40-digit
# arithmetic before being frozen here.
S1_ANGMOM = 1.2
S1_ENERGY = -0.28
S1_LENZ = 0.44
S1_FALL_RADIUS = 25.0 / 7.0          # 3.5714285714...
S1_SECOND_FOCUS_X = -11.0 / 7.0      # -1.5714285714...
S1_A = 25.0 / 14.0
S1_B = 1.6035674514745463
S1_C = 11.0 / 14.0
S1_PERIOD = 14.993320610381375
S1_AREA = 8.995992366228825          # pi * a * b
S1_DIRECTRIX_X = 36.0 / 11.0
F1_LOCUS_RADIUS = 18.0 / 7.0         # 2a - r
F1_BOUNDING_AXIS = 43.0 / 7.0        # 4a - r
F1_U_X = 25.0 / 11.0
F1_V_X = 47.0 / 11.0
F1_ENVELOPE_AXIS = 36.0 / 11.0
F1_ENVELOPE_ECC = 7.0 / 18.0
F1_ENVELOPE_DIRECTRIX_X = -18.0 / 7.0


@pytest.fixture(scope="session")
def params():
    return PhysParams()


@pytest.fixture(scope="session")
def s1():
    return PhaseState(r=(1.0, 0.0, 0.0), p=(0.0, 1.2, 0.0))


@pytest.fixture(scope="session")
def s1_geometry(s1, params):
    return orbit_geometry(s1, params)


@pytest.fixture(scope="session")
def f1(params):
    return FamilySpec(
        params=params,
        energy=S1_ENERGY,
        r_fixed=(1.0, 0.0, 0.0),
        plane_normal=(0.0, 0.0, 1.0),
    )


@pytest.fixture(scope="session")
def s1_numeric_long(s1, params, s1_geometry):
    """RK4 trajectory over 1.6 periods at dt = T/1e5 (the costly fixture)."""
    dt = s1_geometry.period / 100000
    return integrate_numeric(s1, params, dt, 160000)


@pytest.fixture(scope="session")
def s1_numeric_one(s1_numeric_long, params):
    """First full period of the long trajectory, as its own Trajectory."""
    n = 100001
    t = s1_numeric_long
    return Trajectory(
        times=t.times[:n], positions=t.positions[:n], momenta=t.momenta[:n], params=params
    )
