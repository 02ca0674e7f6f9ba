"""Run configuration shared by the CLI subcommands.

The default configuration (mu = k = 1, H = -0.28, fixed point (1, 0, 0),
momentum angle pi/2) reproduces the worked example used throughout the test
suite and the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .family import FamilyMember, FamilySpec, family_member
from .state import PhysParams

__all__ = [
    "DEFAULT_DT_FRACTION",
    "DEFAULT_ENERGY",
    "DEFAULT_PLANE_NORMAL",
    "DEFAULT_PSI",
    "DEFAULT_R_FIXED",
    "DEFAULT_SAMPLES",
    "DEFAULT_SEED",
    "RunConfig",
]

DEFAULT_ENERGY = -0.28
DEFAULT_R_FIXED = (1.0, 0.0, 0.0)
DEFAULT_PLANE_NORMAL = (0.0, 0.0, 1.0)
DEFAULT_PSI = math.pi / 2.0
DEFAULT_SAMPLES = 256
DEFAULT_DT_FRACTION = 1e-5
DEFAULT_SEED = 20259


@dataclass
class RunConfig:
    """Validated inputs for one CLI invocation."""

    command: str = "verify"
    mu: float = 1.0
    k: float = 1.0
    energy: float = DEFAULT_ENERGY
    r_fixed: tuple[float, float, float] = DEFAULT_R_FIXED
    plane_normal: tuple[float, float, float] = DEFAULT_PLANE_NORMAL
    psi: float = DEFAULT_PSI
    samples: int = DEFAULT_SAMPLES
    dt_fraction: float = DEFAULT_DT_FRACTION
    tol_override: float | None = None
    out_path: str | None = None
    fmt: str = "json"
    seed: int = DEFAULT_SEED

    def validate(self) -> None:
        if self.command not in ("verify", "orbit", "family", "envelope", "figures"):
            raise ValueError(f"unknown command {self.command!r}")
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError("mu must be finite and positive")
        if not (math.isfinite(self.k) and self.k > 0.0):
            raise ValueError("k must be finite and positive")
        if not (math.isfinite(self.energy) and self.energy < 0.0):
            raise ValueError(f"energy must be negative (bound family), got {self.energy}")
        if self.samples < 3:
            raise ValueError("samples must be at least 3")
        if not (0.0 < self.dt_fraction <= 1e-2):
            raise ValueError("dt-fraction must lie in (0, 1e-2]")
        if self.tol_override is not None and not (
            math.isfinite(self.tol_override) and self.tol_override > 0.0
        ):
            raise ValueError("tol-override must be finite and positive")
        if self.fmt not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {self.fmt!r}")
        # Constructing the family validates the radius range and the plane.
        self.family_spec()

    @property
    def params(self) -> PhysParams:
        return PhysParams(mu=self.mu, k=self.k)

    def family_spec(self) -> FamilySpec:
        return FamilySpec(
            params=self.params,
            energy=self.energy,
            r_fixed=np.asarray(self.r_fixed, dtype=float),
            plane_normal=np.asarray(self.plane_normal, dtype=float),
        )

    def member(self) -> FamilyMember:
        """The family member selected by the configured momentum angle."""
        return family_member(self.family_spec(), self.psi)
