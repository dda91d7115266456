# pleat/config.py

from __future__ import annotations

from typing import Any, Dict

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt


# -----------------------------
# Numeric tolerances
# -----------------------------

class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    k_min: PositiveFloat = Field(1e-9, description="Curvature floor below which the Frenet frame is undefined")
    properness_margin: PositiveFloat = Field(1e-6, description="Required k - k_g, relative to max k")
    unit_speed: PositiveFloat = Field(1e-8, description="Allowed deviation of |T| from 1")
    length_match: PositiveFloat = Field(1e-8, description="Relative foldline/ridge length mismatch")
    tangent_hit: PositiveFloat = Field(1e-6, description="Ruling/foldline incidence sine treated as tangential")
    regression_margin: PositiveFloat = Field(1e-3, description="Strip extents keep this fraction of |d| from the regression curve")
    seam: PositiveFloat = Field(1e-6, description="Sector seam gap and congruence tolerance")
    audit_threshold: PositiveFloat = Field(1e-3, description="Normalized max |K| above which a mesh is flagged")
    newton: PositiveFloat = Field(1e-13, description="Newton step size at which inversions stop")
    min_speed: PositiveFloat = Field(1e-12, description="Parametric speed treated as vanishing")
    degenerate_area: PositiveFloat = Field(1e-14, description="Smallest admissible mesh quad area")
    next_side_agreement: PositiveFloat = Field(1e-8, description="Allowed relative gap between the two next-side formulas")


# -----------------------------
# Global defaults
# -----------------------------

class Settings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    resolution: PositiveInt = Field(2048, description="Samples per closed curve")
    spline_degree: PositiveInt = Field(5, description="Odd degree of ScalarField interpolants")
    derivative_depth: int = Field(4, ge=0, description="Trusted derivative orders of freshly sampled data")
    strict_depth: bool = Field(False, description="Raise instead of refitting when derivative depth runs out")
    oversample: PositiveInt = Field(8, description="Quadrature intervals per output sample in reparametrization")
    newton_iterations: PositiveInt = Field(8)
    mesh_res_u: PositiveInt = 2048
    mesh_res_t: PositiveInt = 17
    intersection_chunk: PositiveInt = Field(256, description="Rays per vectorized polyline intersection batch")
    tolerances: Tolerances = Field(default_factory=Tolerances)


class BumpDefaults(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    order: int = Field(3, ge=0, le=3)
    width: PositiveFloat = 1e-2
    rho: PositiveFloat = 1e-3
    epsilon: PositiveFloat = 1e-2
    position: float = 0.0
    resolution: PositiveInt = 16384
    magnitude_start: PositiveFloat = 1.0
    magnitude_max: PositiveFloat = 1e6
    bisection_steps: PositiveInt = 30
    width_halvings: int = Field(4, ge=0, description="Times the bump may be made steeper when no magnitude triggers")


DEFAULT_SETTINGS = Settings()
DEFAULT_BUMP = BumpDefaults()


# -----------------------------
# Builtin profiles
# -----------------------------

# Radii are relative to the seed foldline (seed radius 1 before rescaling).
PROFILES: Dict[str, Dict[str, Any]] = {
    "fig1": {
        "name": "fig1",
        "ridge": {"kind": "sphere-paraboloid"},
        "foldlines": {"radii": [0.905, 1.0, 1.095, 1.19], "seed_index": 1},
        "symmetry": "reflect:4",
    },
    "fig1-third-strip": {
        "name": "fig1-third-strip",
        "ridge": {"kind": "sphere-paraboloid"},
        "foldlines": {"radii": [0.905, 1.0, 1.095, 1.19, 1.285], "seed_index": 1},
        "symmetry": "reflect:4",
    },
    "fig2": {
        "name": "fig2",
        "ridge": {"kind": "torus", "a": 3.0, "p": 9, "q": 2},
        "foldlines": {"radii": [0.86, 0.93, 1.0, 1.07, 1.14], "seed_index": 2},
        "symmetry": "rotate:2",
    },
    "fig3": {
        "name": "fig3",
        "ridge": {"kind": "torus", "a": 3.0, "p": 9, "q": 2},
        "foldlines": {"radii": [0.9, 1.0, 1.1], "seed_index": 1},
        "symmetry": "rotate:2",
    },
}


def show_defaults() -> Dict[str, Any]:
    return {
        "settings": DEFAULT_SETTINGS.model_dump(),
        "bump": DEFAULT_BUMP.model_dump(),
        "profiles": PROFILES,
    }
