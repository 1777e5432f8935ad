"""Registry of runnable checks.

A check is either pointwise (a function of one sample point, run
concurrently by the runner and reduced by taking the worst value of each
residual) or aggregate (a function of the whole instance). Each check names
the values it judges and their default tolerances; every other value it
returns is informational.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from rhlab.exceptions import (
    CriticalPoint,
    PointExcluded,
    PreconditionViolated,
    RicciHessianError,
)
from rhlab.geometry.curvature import curvature_invariants, curvature_pack
from rhlab.geometry.fields import Exclusion, RHInstance
from rhlab.schemas.common import Verdict, verdict_of
from rhlab.schemas.report import PointRecord
from rhlab.services import catalog, homogeneous, odelab, verifier, warped
from rhlab.services.instances import BuiltInstance
from rhlab.services.sampling import sample_points
from rhlab.types import LevelSetProbe, OdeProfile

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

SKIPPED_ERRORS = (CriticalPoint, PointExcluded)
POINT_ERRORS = (RicciHessianError, ArithmeticError, np.linalg.LinAlgError)

CHART_KINDS = frozenset({"catalog", "warped", "ode"})
WARPED_KINDS = frozenset({"warped", "ode"})


@dataclass(frozen=True, slots=True)
class CheckContext:
    """What a check sees.

    Attributes
    ----------
    built : BuiltInstance
        Instance under test.
    points : Sequence[numpy.ndarray]
        Sample points, empty for instances without a chart.
    options : Mapping[str, Any]
        Scenario options for this check, merged with prepared values.
    seed : int
        Scenario seed, for checks that draw their own probes.
    """

    built: BuiltInstance
    points: Sequence[FloatArray] = ()
    options: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    @property
    def rh(self) -> RHInstance:
        """Return the chart instance or fail."""
        if self.built.rh is None:
            raise PreconditionViolated(
                f"{self.built.label} has no chart; ODE instances need rebuild = true"
            )
        return self.built.rh

    @property
    def spec(self) -> warped.WarpedSpec:
        """Return the warped data or fail."""
        if self.built.warped is None:
            raise PreconditionViolated(f"{self.built.label} is not a warped product")
        return self.built.warped

    @property
    def profile(self) -> OdeProfile:
        """Return the profile or fail."""
        if self.built.profile is None:
            raise PreconditionViolated(f"{self.built.label} has no profile")
        return self.built.profile

    def option(self, key: str, default: Any) -> Any:
        """Return a check option."""
        return self.options.get(key, default)


@dataclass(frozen=True, slots=True)
class Outcome:
    """Result of an aggregate check."""

    values: dict[str, float]
    records: list[PointRecord] = field(default_factory=list)


PointFn = Callable[[CheckContext, FloatArray], dict[str, float]]
AggregateFn = Callable[[CheckContext], Outcome]
PrepareFn = Callable[[CheckContext], dict[str, Any]]


@dataclass(frozen=True, slots=True)
class Check:
    """A named check.

    Attributes
    ----------
    name : str
        Name used in scenarios.
    description : str
        One-line description for ``list-checks``.
    kinds : frozenset[str]
        Instance kinds the check applies to.
    tolerances : dict[str, float]
        Judged values and their default tolerances.
    point : PointFn | None
        Pointwise evaluation.
    aggregate : AggregateFn | None
        Whole-instance evaluation.
    prepare : PrepareFn | None
        Runs once before a pointwise check and adds options.
    """

    name: str
    description: str
    kinds: frozenset[str]
    tolerances: dict[str, float]
    point: PointFn | None = None
    aggregate: AggregateFn | None = None
    prepare: PrepareFn | None = None

    @property
    def pointwise(self) -> bool:
        """Return whether the runner maps the check over points."""
        return self.point is not None


def evaluate_point(
    fn: Callable[[FloatArray], dict[str, float]], point: FloatArray
) -> PointRecord:
    """Evaluate a pointwise function and record failures instead of raising."""
    coords = [float(v) for v in np.asarray(point).reshape(-1)]
    try:
        residuals = fn(point)
    except SKIPPED_ERRORS as exc:
        return PointRecord(point=coords, status="skipped", error=str(exc))
    except POINT_ERRORS as exc:
        return PointRecord(
            point=coords, status="error", error=f"{type(exc).__name__}: {exc}"
        )
    return PointRecord(
        point=coords, residuals={key: float(value) for key, value in residuals.items()}
    )


def worst_values(records: Sequence[PointRecord]) -> dict[str, float]:
    """Return the largest value of every residual over evaluated points."""
    values: dict[str, float] = {}
    for record in records:
        if record.status != "ok":
            continue
        for key, value in record.residuals.items():
            values[key] = max(values.get(key, value), value)
    return values


def resolve_tolerances(
    check: Check, values: Mapping[str, float], overrides: Mapping[str, float]
) -> dict[str, float]:
    """Return the tolerances that apply to the values a check produced.

    ``overrides`` may hold ``check`` (all judged values) or ``check.value``
    (one value, which becomes judged even without a default).
    """
    resolved = {}
    for key in values:
        specific = overrides.get(f"{check.name}.{key}")
        if specific is not None:
            resolved[key] = float(specific)
        elif key in check.tolerances:
            resolved[key] = float(overrides.get(check.name, check.tolerances[key]))
    return resolved


def judge(
    values: Mapping[str, float], tolerances: Mapping[str, float]
) -> dict[str, Verdict]:
    """Compare values with tolerances; ``NaN`` never passes."""
    return {
        key: verdict_of(bool(values[key] < tol)) for key, tol in tolerances.items()
    }


# Pointwise checks on charts


def _rh_residual(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    return {"rh_residual": verifier.rh_residual(ctx.rh, point)}


def _static(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    return {"static_residual": verifier.static_residual(ctx.rh, point)}


def _scalar_flat(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    values = ctx.rh.domain.require(point)
    return {"scalar": abs(curvature_pack(ctx.rh.metric, values, order=2).scal)}


def _identities(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    return verifier.identity_suite(ctx.rh, point)


def _invariants(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    return curvature_invariants(ctx.rh.metric, ctx.rh.domain.require(point))


def _conformal(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    rh = ctx.rh
    return verifier.conformal_check(rh.metric, rh.f, rh.dim, point)


def _probe_values(probe: LevelSetProbe) -> dict[str, float]:
    return {
        "scalar_curvature": abs(probe.scalar_curvature),
        "ric_N": probe.ric_N_residual,
        "normal_error": probe.normal_error,
        "weingarten_asymmetry": probe.weingarten_asymmetry,
        "weingarten_norm": probe.weingarten_norm,
    }


def _level_set(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    return _probe_values(verifier.level_set_probe(ctx.rh, point))


def _prepare_spectrum(ctx: CheckContext) -> dict[str, Any]:
    if "epsilon" in ctx.options:
        return {}
    return {"epsilon": verifier.detect_epsilon(ctx.rh, ctx.points)}


def _spectrum(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    result = verifier.ricci_spectrum_check(ctx.rh, point, float(ctx.options["epsilon"]))
    return {
        "spectrum": result.spectrum_error,
        "tangential": abs(result.tangential_norm_squared - 1.0),
    }


def _codazzi(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    result = verifier.codazzi_and_traces(ctx.rh.metric, point, s_max=1)
    return {"codazzi": result.codazzi}


def _traces(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    s_max = int(ctx.option("s_max", 4))
    result = verifier.codazzi_and_traces(ctx.rh.metric, point, s_max=s_max)
    return {
        "trace_error": max(result.trace_errors),
        "divergence": max(result.divergences),
        "epsilon": result.epsilon,
    }


def _kahler(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    return {"kahler": verifier.kahler_j_check(ctx.rh, point)}


def _besse(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    return {"besse": warped.besse_residual(ctx.spec, point)}


def _reconstruction(ctx: CheckContext, point: FloatArray) -> dict[str, float]:
    coefficient = ctx.built.options.get("coefficient")
    if coefficient is None:
        raise PreconditionViolated(f"{ctx.built.label} is not a rebuilt profile")
    rh = ctx.rh
    values = rh.domain.require(point)
    residual = verifier.hessian_ricci_residual(rh.metric, rh.f, values, coefficient)
    return {"reconstruction": residual}


# Aggregate checks


def _records(
    points: Sequence[FloatArray], rows: Sequence[Mapping[str, float]]
) -> list[PointRecord]:
    return [
        PointRecord(
            point=[float(v) for v in np.asarray(point).reshape(-1)],
            residuals={key: float(value) for key, value in row.items()},
        )
        for point, row in zip(points, rows)
    ]


def _mu(ctx: CheckContext) -> Outcome:
    stats = verifier.mu_constancy(ctx.rh, ctx.points)
    values = {
        "mean": stats.mean,
        "spread": stats.spread,
        "relative_spread": stats.spread / (1.0 + abs(stats.mean)),
    }
    expected = ctx.options.get("expected")
    if expected is not None:
        values["deviation"] = max(abs(s - float(expected)) for s in stats.samples)
    rows = [{"mu": sample} for sample in stats.samples]
    return Outcome(values, _records(ctx.points, rows))


def _zero_set(ctx: CheckContext) -> Outcome:
    rh = ctx.rh
    band = float(ctx.option("band", 0.05))
    probes = int(ctx.option("probes", 16))
    f = rh.f
    outside = Exclusion(f"|f| >= {band:g}", lambda p: abs(f(p)) >= band)
    starts = sample_points(
        rh.domain,
        probes,
        ctx.seed,
        extra=(*ctx.built.exclusions, outside),
        max_rejection_ratio=float(ctx.option("max_rejection_ratio", 0.999)),
    )

    def probe(start: FloatArray) -> dict[str, float]:
        snapped = verifier.snap_to_level(rh, start, 0.0)
        result = verifier.level_set_probe(rh, snapped)
        return {**_probe_values(result), "level": abs(result.level)}

    records = [evaluate_point(probe, start) for start in starts]
    values = worst_values(records)
    values["probes"] = float(sum(record.status == "ok" for record in records))
    return Outcome(values, records)


def _warped_case(ctx: CheckContext) -> Outcome:
    threshold = float(ctx.option("threshold", 1e-7))
    rows = warped.equivalence_records(ctx.spec, ctx.points, threshold)
    records = _records(ctx.points, rows)
    return Outcome(worst_values(records), records)


def _mu_relation(ctx: CheckContext) -> Outcome:
    result = warped.mu_relation_check(ctx.spec, ctx.points)
    return Outcome(dict(result["summary"]), _records(ctx.points, result["records"]))


def _product_split(ctx: CheckContext) -> Outcome:
    built = ctx.built
    if built.space is None or built.solution != "extend":
        raise PreconditionViolated(f"{built.label} is not a trivial extension")
    threshold = float(ctx.option("threshold", 1e-7))
    side, inner = catalog.extension_factor(built.space, built.solution_params)
    left, right = built.space.factors
    points = [np.asarray(p, dtype=np.float64) for p in ctx.points]
    if side == "left":
        split = left.dim
        swapped = [np.concatenate([p[split:], p[:split]]) for p in points]
        rows = warped.product_split_check(right, left, inner, swapped)
    else:
        rows = warped.product_split_check(left, right, inner, points)
    for row in rows:
        factors_ok = row["factor"] < threshold and row["base_ricci"] < threshold
        row["mismatch"] = float(factors_ok != (row["rh_residual"] < threshold))
    records = _records(points, rows)
    return Outcome(worst_values(records), records)


def _ode_residual(ctx: CheckContext) -> Outcome:
    profile = ctx.profile
    return Outcome(
        {
            "ode_residual": odelab.ode_residual(profile),
            "t_end": float(profile.stats.get("t_end", profile.grid[-1])),
            "steps": float(profile.stats.get("steps", profile.grid.size - 1)),
        }
    )


def _closed_form(ctx: CheckContext) -> Outcome:
    deviation = odelab.closed_form_deviation(ctx.profile)
    if deviation is None:
        raise PreconditionViolated(f"{ctx.built.label} has no closed form")
    return Outcome({"closed_form": deviation})


def _first_integral(ctx: CheckContext) -> Outcome:
    return Outcome({"first_integral": odelab.first_integral_deviation(ctx.profile)})


def _log_law(ctx: CheckContext) -> Outcome:
    profile = ctx.profile
    constants = ctx.built.options.get("log_law") or profile.params
    try:
        mu1, constant = float(constants["mu1"]), float(constants["C"])
    except KeyError as exc:
        raise PreconditionViolated(f"log law needs {exc.args[0]!r}") from exc
    return Outcome(odelab.log_law_check(profile, mu1, constant))


def _closed_families(ctx: CheckContext) -> Outcome:
    family = ctx.built.options.get("family")
    if family is None:
        raise PreconditionViolated(f"{ctx.built.label} is not a closed family")
    grid = ctx.profile.grid
    stride = max(1, grid.size // int(ctx.option("nodes", 200)))
    args = (family["kind"], family["A"], family["phi"], family["mu1"])
    residual = max(
        odelab.closed_family_residual(*args, float(t)) for t in grid[::stride]
    )
    return Outcome({"family_residual": residual})


def _extension(ctx: CheckContext) -> Outcome:
    data = ctx.built.extension
    if data is None:
        raise PreconditionViolated(f"{ctx.built.label} carries no extension data")
    conditions = homogeneous.extension_conditions(data)
    ricci = homogeneous.extension_ricci(data, conditions.alpha)
    signs = homogeneous.both_signs(data)
    values = {
        "alpha": conditions.alpha,
        "res_div": conditions.res_div,
        "res_ric": conditions.res_ric,
        "rh_residual": ricci.rh_residual,
        "ric_xi_xi": ricci.ric_xi_xi,
        "ric_mixed": float(np.linalg.norm(ricci.ric_mixed)),
        "scalar": ricci.scalar,
        "mu": ricci.mu,
        "signs_passing": float(sum(result.passed for result in signs.values())),
    }
    for key, name in (("expected_scalar", "scalar"), ("expected_mu", "mu")):
        if key in ctx.options:
            values[f"{name}_deviation"] = abs(values[name] - float(ctx.options[key]))
    return Outcome(values)


_CHECKS: tuple[Check, ...] = (
    Check(
        "rh_residual",
        "operator norm of nabla^2 f + f Ric",
        CHART_KINDS,
        {"rh_residual": 1e-8},
        point=_rh_residual,
    ),
    Check(
        "static_equation",
        "operator norm of nabla^2 f - f Ric",
        CHART_KINDS,
        {"static_residual": 1e-7},
        point=_static,
    ),
    Check(
        "scalar_flat",
        "absolute scalar curvature",
        CHART_KINDS,
        {"scalar": 1e-8},
        point=_scalar_flat,
    ),
    Check(
        "mu",
        "constancy of f Lap f + 2 |grad f|^2",
        CHART_KINDS,
        {"relative_spread": 1e-8, "deviation": 1e-8},
        aggregate=_mu,
    ),
    Check(
        "identity_suite",
        "identities implied by the equation",
        CHART_KINDS,
        dict.fromkeys(
            ("ricci_gradient", "trace_law", "ricci_norm", "curvature_gradient"), 1e-7
        ),
        point=_identities,
    ),
    Check(
        "curvature_invariants",
        "symmetries and Bianchi identities of the curvature",
        CHART_KINDS,
        {
            "antisymmetry": 1e-9,
            "bianchi_first": 1e-9,
            "ricci_trace": 1e-10,
            "contracted_bianchi": 1e-7,
        },
        point=_invariants,
    ),
    Check(
        "conformal",
        "conformal reformulation for positive f",
        CHART_KINDS,
        dict.fromkeys(("conformal_ricci", "conformal_laplacian", "einstein"), 1e-6),
        point=_conformal,
    ),
    Check(
        "level_set",
        "Gauss-equation data of the level set through each point",
        CHART_KINDS,
        {
            "scalar_curvature": 1e-7,
            "ric_N": 1e-7,
            "normal_error": 1e-10,
            "weingarten_asymmetry": 1e-8,
        },
        point=_level_set,
    ),
    Check(
        "zero_set",
        "zero set is totally geodesic and scalar flat",
        CHART_KINDS,
        {"weingarten_norm": 1e-6, "scalar_curvature": 1e-6},
        aggregate=_zero_set,
    ),
    Check(
        "ricci_spectrum",
        "Ricci eigenvalues {eps, eps, 0, ...} at regular points",
        CHART_KINDS,
        {"spectrum": 1e-6, "tangential": 1e-6},
        point=_spectrum,
        prepare=_prepare_spectrum,
    ),
    Check(
        "codazzi",
        "Ricci tensor is Codazzi",
        CHART_KINDS,
        {"codazzi": 1e-7},
        point=_codazzi,
    ),
    Check(
        "ricci_traces",
        "tr Ric^s = 2 eps^s and div Ric^s = 0",
        CHART_KINDS,
        {"trace_error": 1e-7, "divergence": 1e-7},
        point=_traces,
    ),
    Check(
        "kahler",
        "Hessian commutes with J",
        CHART_KINDS,
        {"kahler": 1e-8},
        point=_kahler,
    ),
    Check(
        "product_split",
        "trivial extension solves iff factor solves and base is Ricci-flat",
        frozenset({"catalog"}),
        {"mismatch": 0.5},
        aggregate=_product_split,
    ),
    Check(
        "warped_case",
        "reduction residuals agree with the assembled equation",
        WARPED_KINDS,
        {"mismatch": 0.5},
        aggregate=_warped_case,
    ),
    Check(
        "besse",
        "closed-form warped Ricci against the numeric one",
        WARPED_KINDS,
        {"besse": 1e-7},
        point=_besse,
    ),
    Check(
        "mu_relation",
        "mu of the product against mu2 of the fiber factor",
        WARPED_KINDS,
        {"corrected": 1e-7, "mu1_spread": 1e-7},
        aggregate=_mu_relation,
    ),
    Check(
        "reconstruction",
        "rebuilt surface satisfies its Hessian-Ricci equation",
        frozenset({"ode"}),
        {"reconstruction": 1e-6},
        point=_reconstruction,
    ),
    Check(
        "ode_residual",
        "defect of the profile interpolant",
        frozenset({"ode"}),
        {"ode_residual": 1e-8},
        aggregate=_ode_residual,
    ),
    Check(
        "closed_form",
        "profile against its closed form",
        frozenset({"ode"}),
        {"closed_form": 1e-8},
        aggregate=_closed_form,
    ),
    Check(
        "first_integral",
        "conserved quantity of a gradient profile",
        frozenset({"ode"}),
        {"first_integral": 1e-9},
        aggregate=_first_integral,
    ),
    Check(
        "log_law",
        "logarithmic scalar curvature law of a fiber profile",
        frozenset({"ode"}),
        {"scalar_law": 1e-7, "second_derivative": 1e-7},
        aggregate=_log_law,
    ),
    Check(
        "closed_families",
        "closed families solve -u u'' + u'^2 = -mu1",
        frozenset({"ode"}),
        {"family_residual": 1e-10},
        aggregate=_closed_families,
    ),
    Check(
        "extension",
        "conditions for e^t on a one-dimensional extension",
        frozenset({"extension"}),
        {
            "res_div": 1e-10,
            "res_ric": 1e-10,
            "rh_residual": 1e-10,
            "scalar_deviation": 1e-10,
            "mu_deviation": 1e-10,
        },
        aggregate=_extension,
    ),
)

CHECKS: dict[str, Check] = {check.name: check for check in _CHECKS}


def get_check(name: str) -> Check:
    """Return a check by name.

    Raises
    ------
    KeyError
        If the name is unknown.
    """
    return CHECKS[name]


def list_checks() -> list[Check]:
    """Return all checks in registry order."""
    return list(_CHECKS)
