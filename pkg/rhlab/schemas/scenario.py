"""Scenario file schemas."""

from __future__ import annotations

from typing import Annotated, Any, Literal

from pydantic import Field, model_validator

from rhlab.config import get_settings
from rhlab.schemas.common import ScenarioModel, Verdict
from rhlab.types import OdeKind

Matrix = list[list[float]]


class InstanceBase(ScenarioModel):
    """Fields shared by every instance table.

    ``expect`` and ``options`` are keyed by check name and take precedence
    over the scenario-level maps.
    """

    label: str | None = Field(default=None, min_length=1)
    expect: dict[str, Verdict] = Field(default_factory=dict)
    options: dict[str, dict[str, Any]] = Field(default_factory=dict)


class CatalogInstance(InstanceBase):
    """Catalog entry, or a space and solution named directly.

    ``scale`` multiplies the metric by ``scale**2`` and keeps ``f``.
    """

    kind: Literal["catalog"]
    entry: str | None = None
    space: str | None = None
    solution: str | None = None
    space_params: dict[str, Any] = Field(default_factory=dict)
    solution_params: dict[str, Any] = Field(default_factory=dict)
    scale: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _named(self) -> CatalogInstance:
        if self.entry is None and (self.space is None or self.solution is None):
            raise ValueError("catalog instance needs 'entry' or 'space' + 'solution'")
        if self.entry is not None and (self.space or self.solution):
            raise ValueError("use either 'entry' or 'space' + 'solution', not both")
        return self


class WarpedInstance(InstanceBase):
    """Named warped product preset."""

    kind: Literal["warped"]
    preset: str = Field(min_length=1)
    params: dict[str, Any] = Field(default_factory=dict)


class FamilySpec(ScenarioModel):
    """Closed-form family of the line-warp equation."""

    kind: Literal["a1", "b1", "c1", "d1", "e1"]
    A: float = Field(default=1.0, gt=0.0)
    phi: float = 0.0
    mu1: float


class LogLawSpec(ScenarioModel):
    """Constants fed to the logarithmic law check."""

    mu1: float
    C: float


class OdeInstance(InstanceBase):
    """Integrated or sampled one-dimensional reduction.

    With ``family`` set the closed form is integrated from its own initial
    data (or sampled on a grid when ``sampled`` is true); otherwise
    ``system`` is integrated from ``initial``. ``rebuild`` turns the profile
    into a warped surface so that point checks can run on it.
    """

    kind: Literal["ode"]
    system: OdeKind | None = None
    params: dict[str, Any] = Field(default_factory=dict)
    initial: list[float] = Field(default_factory=list)
    t_span: tuple[float, float]
    tol: float | None = Field(default=None, ge=1e-12, le=1e-6)
    family: FamilySpec | None = None
    sampled: bool = False
    rebuild: bool = False
    fiber_dim: int = Field(default=1, ge=1)
    sigma: Literal["line", "circle"] = "line"
    log_law: LogLawSpec | None = None

    @model_validator(mode="after")
    def _source(self) -> OdeInstance:
        if self.family is None:
            if self.system is None:
                raise ValueError("ode instance needs 'system' or 'family'")
            if not self.initial:
                raise ValueError("ode instance needs 'initial' data")
        elif self.system not in (None, OdeKind.LINE_WARP, OdeKind.CLOSED_FAMILY):
            raise ValueError("closed families integrate the line-warp system")
        return self


class ExtensionInstance(InstanceBase):
    """Matrix data of a one-dimensional extension.

    ``solve = true`` replaces ``ric_N`` by the base Ricci tensor that solves
    the second condition exactly.
    """

    kind: Literal["extension"]
    S: Matrix
    A: Matrix | None = None
    ric_N: Matrix | None = None
    solve: bool = False
    div_S: list[float] | None = None
    epsilon: Literal[-1, 1] = -1
    scale: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _ricci(self) -> ExtensionInstance:
        if self.solve and self.ric_N is not None:
            raise ValueError("'solve' and 'ric_N' are mutually exclusive")
        return self


InstanceSpec = Annotated[
    CatalogInstance | WarpedInstance | OdeInstance | ExtensionInstance,
    Field(discriminator="kind"),
]


class SampleSpec(ScenarioModel):
    """Deterministic sample set."""

    count: int = Field(
        default_factory=lambda: get_settings().default_samples, ge=1, le=100_000
    )
    seed: int = Field(default_factory=lambda: get_settings().default_seed)
    margin: float = Field(default=0.0, ge=0.0, lt=0.5)


class OutputSpec(ScenarioModel):
    """Report file to write."""

    format: Literal["json", "csv", "md"]
    path: str = Field(min_length=1)


class Scenario(ScenarioModel):
    """Declarative batch of instances and checks.

    Attributes
    ----------
    name : str
        Scenario name.
    instances : list[InstanceSpec]
        Instances to verify; a single ``instance`` table is also accepted.
    checks : list[str]
        Check names, each run on every instance of a kind it supports.
    samples : SampleSpec
        Sample count, seed and box inset.
    tolerances : dict[str, float]
        Overrides keyed by ``check`` or ``check.value``.
    expect : dict[str, Verdict]
        Expected verdict per check for all instances.
    outputs : list[OutputSpec]
        Reports to write.
    options : dict[str, dict[str, Any]]
        Per-check options.
    """

    name: str = Field(min_length=1)
    instances: list[InstanceSpec] = Field(min_length=1)
    checks: list[str] = Field(min_length=1)
    samples: SampleSpec = Field(default_factory=SampleSpec)
    tolerances: dict[str, float] = Field(default_factory=dict)
    expect: dict[str, Verdict] = Field(default_factory=dict)
    outputs: list[OutputSpec] = Field(default_factory=list)
    options: dict[str, dict[str, Any]] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _single_instance(cls, data: Any) -> Any:
        if isinstance(data, dict) and "instance" in data:
            data = dict(data)
            if "instances" in data:
                raise ValueError("use either 'instance' or 'instances'")
            data["instances"] = [data.pop("instance")]
        return data

    @model_validator(mode="after")
    def _positive_tolerances(self) -> Scenario:
        for key, value in self.tolerances.items():
            if not value > 0.0:
                raise ValueError(f"tolerance {key!r} must be positive")
        return self
