"""Turn scenario instance specs into verifiable objects."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any

from rhlab.exceptions import (
    BadParams,
    ConfigError,
    IncompatiblePair,
    SignMismatch,
    UnknownEntry,
)
from rhlab.geometry.fields import ChartDomain, Exclusion, RHInstance, Space
from rhlab.schemas.scenario import (
    CatalogInstance,
    ExtensionInstance,
    InstanceSpec,
    OdeInstance,
    WarpedInstance,
)
from rhlab.services import catalog, homogeneous, odelab, warped
from rhlab.services.warped import WarpedSpec
from rhlab.types import ExtensionData, OdeProfile

logger = logging.getLogger(__name__)

_CONFIG_ERRORS = (UnknownEntry, BadParams, IncompatiblePair, SignMismatch)


@dataclass(frozen=True, slots=True)
class BuiltInstance:
    """A scenario instance ready for checks.

    Attributes
    ----------
    label : str
        Unique label within the run.
    kind : str
        ``catalog``, ``warped``, ``ode`` or ``extension``.
    rh : RHInstance | None
        Metric and function for pointwise checks.
    warped : WarpedSpec | None
        Warped data, for presets and rebuilt profiles.
    profile : OdeProfile | None
        Integrated or sampled profile.
    extension : ExtensionData | None
        Extension matrices.
    space : Space | None
        Catalog space, kept for product splitting.
    solution : str | None
        Catalog solution name.
    solution_params : dict[str, Any]
        Catalog solution parameters.
    exclusions : tuple[Exclusion, ...]
        Extra sampling exclusions.
    expected : dict[str, str]
        Documented verdicts from the catalog.
    options : dict[str, Any]
        Instance data some checks read (closed family, log-law constants,
        reconstruction coefficient).
    """

    label: str
    kind: str
    rh: RHInstance | None = None
    warped: WarpedSpec | None = None
    profile: OdeProfile | None = None
    extension: ExtensionData | None = None
    space: Space | None = None
    solution: str | None = None
    solution_params: dict[str, Any] = field(default_factory=dict)
    exclusions: tuple[Exclusion, ...] = ()
    expected: dict[str, str] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)

    @property
    def domain(self) -> ChartDomain | None:
        """Return the chart domain to sample, if the instance has one."""
        return self.rh.domain if self.rh is not None else None


def _catalog(spec: CatalogInstance) -> BuiltInstance:
    expected: dict[str, str] = {}
    if spec.entry is not None:
        entry = catalog.get_entry(spec.entry)
        space = entry.build_space()
        solution, params = entry.solution, dict(entry.solution_params)
        expected = dict(entry.expected)
        label = entry.name
    else:
        space = catalog.make_space(str(spec.space), spec.space_params)
        solution, params = str(spec.solution), dict(spec.solution_params)
        label = f"{spec.space}:{spec.solution}"
    f = catalog.make_solution(solution, params, space)
    rh = RHInstance(
        space.metric, f, complex_structure=space.complex_structure, label=label
    )
    if spec.scale != 1.0:
        rh = rh.scaled(spec.scale)
    return BuiltInstance(
        label=spec.label or rh.label,
        kind="catalog",
        rh=rh,
        space=space,
        solution=solution,
        solution_params=params,
        expected=expected,
    )


def _warped(spec: WarpedInstance) -> BuiltInstance:
    data = warped.make_preset(spec.preset, spec.params)
    return BuiltInstance(
        label=spec.label or data.label,
        kind="warped",
        rh=warped.instance(data),
        warped=data,
        exclusions=warped.sampling_exclusions(data),
    )


def _ode(spec: OdeInstance) -> BuiltInstance:
    options: dict[str, Any] = {}
    if spec.family is not None:
        family = spec.family
        args = (family.kind, family.A, family.phi, family.mu1, spec.t_span)
        if spec.sampled:
            profile = odelab.sample_closed_family(*args)
        else:
            profile = odelab.integrate_closed_family(*args, tol=spec.tol)
        options["family"] = family.model_dump()
        label = f"family_{family.kind}"
    else:
        profile = odelab.integrate(
            spec.system, spec.params, spec.initial, spec.t_span, spec.tol
        )
        label = str(spec.system)
    if spec.log_law is not None:
        options["log_law"] = spec.log_law.model_dump()
    label = spec.label or label
    if not spec.rebuild:
        return BuiltInstance(label, "ode", profile=profile, options=options)
    data = odelab.profile_to_warped(profile, spec.fiber_dim, spec.sigma)
    options["coefficient"] = odelab.reconstruction_coefficient(profile)
    return BuiltInstance(
        label,
        "ode",
        rh=warped.instance(data),
        warped=data,
        profile=profile,
        exclusions=warped.sampling_exclusions(data),
        options=options,
    )


def _extension(spec: ExtensionInstance) -> BuiltInstance:
    data = homogeneous.make_extension(
        spec.S, spec.A, spec.ric_N, spec.div_S, spec.epsilon
    )
    if spec.scale != 1.0:
        data = homogeneous.scaled_extension(data, spec.scale)
    if spec.solve:
        data = replace(data, ric_N=homogeneous.solved_base_ricci(data))
    return BuiltInstance(
        label=spec.label or f"extension_m{data.dim}", kind="extension", extension=data
    )


_BUILDERS = {
    "catalog": _catalog,
    "warped": _warped,
    "ode": _ode,
    "extension": _extension,
}


def build_instance(spec: InstanceSpec, index: int = 0) -> BuiltInstance:
    """Build one scenario instance.

    Parameters
    ----------
    spec : InstanceSpec
        Validated instance table.
    index : int, default=0
        Position in the scenario, used in diagnostics.

    Returns
    -------
    BuiltInstance
        Instance with whatever the checks of its kind need.

    Raises
    ------
    ConfigError
        If a name or parameter does not resolve.
    RicciHessianError
        If building fails numerically, e.g. an integration leaving its
        admissible region.
    """
    try:
        built = _BUILDERS[spec.kind](spec)
    except _CONFIG_ERRORS as exc:
        raise ConfigError(str(exc), field=f"instances.{index}") from exc
    logger.debug("built instance", extra={"instance": built.label, "kind": built.kind})
    return built
