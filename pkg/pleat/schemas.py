# pleat/schemas.py

from __future__ import annotations

import hashlib
import json
import re
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, field_validator, model_validator

from pleat.config import DEFAULT_BUMP, DEFAULT_SETTINGS, BumpDefaults, Settings, Tolerances

_SYMMETRY = re.compile(r"^(none|(rotate|reflect):[1-9][0-9]*)$")

Artifact = Literal["mesh", "fields", "report", "developed-svg"]


# -----------------------------
# Job configuration
# -----------------------------

class RidgePreset(BaseModel):
    """
    Seed ridge source. Strings are accepted as shorthand:
    "sphere-paraboloid", "torus:a,p,q", "sphere-file:<path>", "curve-file:<path>".
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["sphere-paraboloid", "torus", "sphere-file", "curve-file"]
    a: Optional[float] = Field(default=None, gt=1.0)
    p: Optional[PositiveInt] = None
    q: Optional[PositiveInt] = None
    path: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _from_string(cls, data):
        if not isinstance(data, str):
            return data
        kind, _, rest = data.partition(":")
        if kind == "torus":
            parts = rest.split(",")
            if len(parts) != 3:
                raise ValueError("torus preset must read 'torus:a,p,q'")
            return {"kind": "torus", "a": float(parts[0]), "p": int(parts[1]), "q": int(parts[2])}
        if kind in ("sphere-file", "curve-file"):
            return {"kind": kind, "path": rest}
        return {"kind": kind}

    @model_validator(mode="after")
    def _check_parameters(self):
        if self.kind == "torus" and None in (self.a, self.p, self.q):
            raise ValueError("torus preset needs a, p and q")
        if self.kind.endswith("-file") and not self.path:
            raise ValueError(f"{self.kind} preset needs a path")
        return self

    def label(self) -> str:
        if self.kind == "torus":
            return f"torus:{self.a:g},{self.p},{self.q}"
        if self.path:
            return f"{self.kind}:{self.path}"
        return self.kind


class FoldlineFamily(BaseModel):
    """Concentric circles given by radii relative to the seed foldline, or planar curve files."""

    model_config = ConfigDict(extra="forbid")

    radii: Optional[List[PositiveFloat]] = None
    files: Optional[List[str]] = None
    seed_index: int = Field(default=0, ge=0)
    rescale: Literal["foldline", "ridge"] = "foldline"

    @model_validator(mode="after")
    def _check_family(self):
        if (self.radii is None) == (self.files is None):
            raise ValueError("give exactly one of radii or files")
        members = self.radii if self.radii is not None else self.files
        if len(members) < 2:
            raise ValueError("a foldline family needs at least two members")
        if self.seed_index >= len(members):
            raise ValueError(f"seed_index {self.seed_index} outside a family of {len(members)}")
        if self.radii is not None:
            if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
                raise ValueError("radii must be strictly increasing")
        return self

    def __len__(self) -> int:
        return len(self.radii if self.radii is not None else self.files)


class JobConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "custom"
    ridge: RidgePreset
    foldlines: FoldlineFamily
    side: Literal["alternate", "reversed"] = "alternate"
    symmetry: str = "none"
    resolution: PositiveInt = DEFAULT_SETTINGS.resolution
    mesh_res_t: int = Field(default=DEFAULT_SETTINGS.mesh_res_t, ge=2)
    strict_depth: bool = DEFAULT_SETTINGS.strict_depth
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output_dir: str = "out"
    artifacts: List[Artifact] = Field(default_factory=lambda: ["mesh", "fields", "report", "developed-svg"])

    @field_validator("symmetry")
    @classmethod
    def _check_symmetry(cls, value: str) -> str:
        if not _SYMMETRY.match(value):
            raise ValueError("symmetry must be 'none', 'rotate:n' or 'reflect:n'")
        return value

    def settings(self) -> Settings:
        return DEFAULT_SETTINGS.model_copy(
            update={
                "resolution": self.resolution,
                "mesh_res_u": self.resolution,
                "mesh_res_t": self.mesh_res_t,
                "strict_depth": self.strict_depth,
                "tolerances": self.tolerances,
            }
        )

    def digest(self) -> str:
        """sha256 of the canonical JSON form, independent of output location."""
        payload = self.model_dump(mode="json", exclude={"output_dir"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class BumpExperimentRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    job: JobConfig
    params: BumpDefaults = Field(default_factory=lambda: DEFAULT_BUMP)


# -----------------------------
# Ridge / fold summaries
# -----------------------------

class RidgeSummary(BaseModel):
    preset: str
    samples: int
    length: float
    total_curvature: Optional[float]
    min_curvature: float
    max_curvature: float
    foldline_lengths: List[float]


class FoldSummary(BaseModel):
    side: int
    alpha_min: float
    alpha_max: float
    min_abs_regression: float
    proper: bool


# -----------------------------
# Chain summaries
# -----------------------------

class RegularitySummary(BaseModel):
    verdict: str
    worst_s: Optional[float] = None
    margin: Optional[float] = Field(default=None, description="min |d| - |v_bar| over same-side samples; null when none")
    failing_samples: int = 0


class StripSummary(BaseModel):
    label: str
    direction: str
    index: int
    side: int
    regularity: RegularitySummary
    v_bar_min: Optional[float] = None
    v_bar_max: Optional[float] = None
    crease_angle_max: Optional[float] = None


class ChainSummary(BaseModel):
    seed_side: int
    regular: bool
    strips: List[StripSummary]
    halted: Optional[str] = None


# -----------------------------
# Mesh summaries
# -----------------------------

class AuditSummary(BaseModel):
    label: str
    max_abs_curvature: float
    normalized: float
    flagged: bool


class MeshSummary(BaseModel):
    symmetry: str
    sectors: int
    seam_gap: float
    meshes: int
    audits: List[AuditSummary]

    @property
    def flagged(self) -> bool:
        return any(a.flagged for a in self.audits)


# -----------------------------
# Experiments / run
# -----------------------------

class BumpExperimentSummary(BaseModel):
    order: int
    width: float
    position: float
    epsilon: float
    found: bool
    magnitude: Optional[float] = None
    verdict: Optional[str] = None
    max_deviation: Optional[float] = None
    last_ridge_deviation: Optional[float] = None
    evaluations: int = 0
    message: str = ""


class RunSummary(BaseModel):
    profile: str
    command: str
    config_digest: str
    exit_code: int
    status: Literal["ok", "config-error", "singular", "audit-flagged"]
    ridge: Optional[RidgeSummary] = None
    fold: Optional[FoldSummary] = None
    chain: Optional[ChainSummary] = None
    mesh: Optional[MeshSummary] = None
    bump: Optional[BumpExperimentSummary] = None
    artifacts: List[str] = Field(default_factory=list)
    message: Optional[str] = None
