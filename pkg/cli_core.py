import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

from src.comparison.bounds import (
    chi_ratio,
    entropy_bounds,
    funk_ratio_closed_form,
    mean_curvature_bounds,
    mean_curvature_interval,
)
from src.comparison.harness import default_entropy_window, entropy_estimate, theorem4_check, verify_ratio_bounds
from src.comparison.views import BoundParams, CheckResult, ComparisonReport, VerifyReport
from src.curvature.curvature import FlagInput, distortion, flag_curvature, riemann_curvature, s_curvature
from src.geodesic.connection import integrate_geodesic
from src.geodesic.views import GeodesicPath, StepControl
from src.measure.area import zeta_factor
from src.measure.measure import ball_volume, ball_volume_profile, mean_curvature_sphere, sphere_area
from src.measure.oracle import mc_ball_volume
from src.measure.quadrature import direction_quadrature
from src.measure.views import AreaFrame, DirectionQuadrature
from src.metric.models import MetricModel, bound_params_from_model, make_model
from src.metric.norms import fundamental_tensor
from src.metric.views import ModelConfig
from src.utils.default_config_settings import RunOptions, Tolerances
from src.utils.errors import FinslerError, InadmissibleModel
from src.utils.utils import orthonormal_complement, substream

RATIO_GRID = tuple(np.linspace(0.5, 10.0, 20))
ISOPERIMETRIC_GRID = tuple(float(r) for r in range(1, 11))
MEAN_CURVATURE_TIMES = (0.5, 1.0, 2.0)
# flag-curvature certification allows 10x the Funk tolerance on the other models
_LOOSE_CURVATURE = 10.0


def build_model(config: ModelConfig, tolerances: Tolerances) -> MetricModel:
    return make_model(config, margin=tolerances.epsilon_boundary)


def base_point(model: MetricModel, options: RunOptions) -> np.ndarray:
    """--point if given, else the body center or the origin."""
    if options.point is not None:
        return model.require_point(np.asarray(options.point, dtype=float))
    if model.body is not None:
        return model.body.center.copy()
    return np.zeros(model.dim)


def sample_point(model: MetricModel, rng: np.random.Generator, reach: float = 0.5) -> np.ndarray:
    """Random chart point at gauge below ``reach``."""
    direction = rng.standard_normal(model.dim)
    radius = reach * rng.uniform()
    if model.body is not None:
        center = model.body.center
        return center + radius * direction / float(model.body.gauge(center + direction))
    if model.kind == "hyperbolic":
        return radius * direction / np.linalg.norm(direction)
    return direction


def unit_direction(model: MetricModel, p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    y = rng.standard_normal(model.dim)
    return y / float(model.norm(p, y))


def radius_grid(options: RunOptions) -> np.ndarray:
    return options.r_max * np.arange(1, options.steps + 1) / options.steps


def quadrature_for(model: MetricModel, p: np.ndarray, options: RunOptions) -> DirectionQuadrature:
    return direction_quadrature(model, p, options.resolution, options.seed)


def model_params(model: MetricModel) -> Optional[BoundParams]:
    return bound_params_from_model(model) if model.facts.has_bounds else None


# ---- commands -----------------------------------------------------------------


def run_info(model: MetricModel) -> dict:
    info = {"model": model.model_id, "dim": model.dim, "kind": model.kind, "facts": model.facts.to_dict()}
    if model.facts.has_bounds:
        params = bound_params_from_model(model)
        info["params"] = params.to_dict()
        info["entropy_bounds"] = list(entropy_bounds(params))
    return info


def run_geodesic(model: MetricModel, options: RunOptions, direction: Optional[Sequence[float]] = None) -> GeodesicPath:
    """Integrate the unit-speed geodesic from the base point over [0, r_max]."""
    p = base_point(model, options)
    if direction is None:
        y = unit_direction(model, p, substream(options.seed, 21))
    else:
        y = np.asarray(direction, dtype=float)
    path = integrate_geodesic(model, p, y, options.r_max, StepControl(), options.tolerances.tol_geo)
    logger.info(
        f"Geodesic of {model.model_id}: {path.accepted_steps} steps, drift {path.speed_drift:.3e}, "
        f"truncated={path.truncated}"
    )
    return path


def curvature_header(dim: int) -> List[str]:
    return ["sample", *(f"x{i}" for i in range(dim)), *(f"y{i}" for i in range(dim)), "flag", "s_coefficient", "ricci"]


def curvature_scan(model: MetricModel, options: RunOptions) -> List[tuple]:
    """Flag curvature, S/F and Ricci at ``samples`` seeded (x, y, u)."""
    tol = options.tolerances
    rows = []
    for index in range(options.samples):
        rng = substream(options.seed, 31, index)
        x = sample_point(model, rng)
        y = unit_direction(model, x, rng)
        u = rng.standard_normal(model.dim)
        R = riemann_curvature(model, x, y, tol.tol_curv)
        K = flag_curvature(FlagInput(x, y, u), model, riemann=R)
        S = s_curvature(model, x, y, tol=tol.tol_curv, samples=tol.density_samples, seed=options.seed)
        rows.append((index, *x, *y, K, S / float(model.norm(x, y)), float(np.trace(R))))
    logger.info(f"Scanned {len(rows)} flags on {model.model_id}")
    return rows


def ball_ratio(model: MetricModel, options: RunOptions) -> ComparisonReport:
    """Ratio report over --r-max / --steps; inadmissible models keep their rows."""
    tol = options.tolerances
    p = base_point(model, options)
    quad = quadrature_for(model, p, options)
    try:
        return verify_ratio_bounds(
            model, model_params(model), radius_grid(options), quad, tol.ratio_slack,
            tol.eta_step, tol.volume_rtol, tol.eta_halving, seeds={"quadrature": options.seed}, method=options.geodesic_method,
        )
    except InadmissibleModel as e:
        logger.warning(f"{e}; writing rows with suppressed bound checks")
        return e.report


def entropy_window(model: MetricModel, options: RunOptions) -> Tuple[float, float]:
    if options.t_window is not None:
        return tuple(options.t_window)
    if model.facts.has_bounds:
        return default_entropy_window(bound_params_from_model(model))
    return 1.0, 4.0


def entropy(model: MetricModel, options: RunOptions) -> Tuple[float, float, Tuple[float, float]]:
    tol = options.tolerances
    p = base_point(model, options)
    window = entropy_window(model, options)
    slope, stderr = entropy_estimate(
        model, window, quadrature_for(model, p, options), h=tol.eta_step, rtol=tol.volume_rtol,
        halving_tol=tol.eta_halving, method=options.geodesic_method,
    )
    return slope, stderr, window


ORACLE_HEADER = ("r", "mc_volume", "mc_stderr", "coarea_volume", "combined_stderr", "z", "agree")


def oracle_comparison(model: MetricModel, p: np.ndarray, r: float, quad: DirectionQuadrature, options: RunOptions) -> tuple:
    """Monte Carlo against co-area volume; agreement means within 3 combined standard errors."""
    tol = options.tolerances
    estimate, mc_stderr = mc_ball_volume(model, p, r, options.mc_samples, options.seed)
    volume = ball_volume(model, p, r, quad, tol.eta_step, tol.volume_rtol, options.geodesic_method)
    relative = 0.0 if quad.stderr is None else quad.stderr / quad.total_weight
    combined = math.sqrt(mc_stderr**2 + (relative * volume) ** 2 + (tol.volume_rtol * volume) ** 2)
    z = abs(estimate - volume) / combined
    return r, estimate, mc_stderr, volume, combined, z, bool(z <= 3.0)


def oracle_mc(model: MetricModel, options: RunOptions) -> tuple:
    p = base_point(model, options)
    return oracle_comparison(model, p, options.r_max, quadrature_for(model, p, options), options)


# ---- verification suite -------------------------------------------------------


def _run_check(name: str, func: Callable[[], CheckResult]) -> CheckResult:
    try:
        result = func()
    except InadmissibleModel as e:
        result = CheckResult(name=name, status="inadmissible", detail=str(e))
    except FinslerError as e:
        result = CheckResult(name=name, status="fail", detail=f"{type(e).__name__}: {e}")
    logger.info(f"[{result.status}] {name} {result.detail}")
    return result


def _bounded(name: str, worst: float, tolerance: float, expected: Optional[float] = None, detail: str = "") -> CheckResult:
    return CheckResult(
        name=name,
        status="pass" if worst <= tolerance else "fail",
        value=float(worst),
        expected=expected,
        tolerance=tolerance,
        detail=detail,
    )


def _samples(model: MetricModel, options: RunOptions, stream: int):
    for index in range(options.samples):
        rng = substream(options.seed, stream, index)
        x = sample_point(model, rng)
        yield rng, x, unit_direction(model, x, rng)


def check_norm(model: MetricModel, options: RunOptions) -> CheckResult:
    tol = options.tolerances
    worst_scale, worst_identity, smallest = 0.0, 0.0, np.inf
    for rng, x, y in _samples(model, options, 41):
        scale = rng.uniform(0.1, 10.0)
        worst_scale = max(worst_scale, abs(float(model.norm(x, scale * y)) - scale) / scale)
        data = fundamental_tensor(model, x, y, tol.tol_pd, tol.tol_identity, tol.epsilon_zero)
        worst_identity = max(worst_identity, abs(float(y @ data.g @ y) - data.F**2) / data.F**2)
        smallest = min(smallest, data.min_eigenvalue)
    ok = worst_scale <= tol.tol_fd and worst_identity <= tol.tol_identity and smallest > tol.tol_pd
    return CheckResult(
        name="norm_properties",
        status="pass" if ok else "fail",
        value=max(worst_scale, worst_identity),
        tolerance=min(tol.tol_fd, tol.tol_identity),
        detail=f"homogeneity {worst_scale:.3e}, identity {worst_identity:.3e}, min eigenvalue {smallest:.6g}",
    )


def check_flag_curvature(model: MetricModel, options: RunOptions) -> CheckResult:
    tol = options.tolerances
    expected = model.facts.expected_flag_curvature
    tolerance = tol.tol_curv if model.kind == "funk" else _LOOSE_CURVATURE * tol.tol_curv
    worst = 0.0
    for rng, x, y in _samples(model, options, 42):
        u = rng.standard_normal(model.dim)
        worst = max(worst, abs(flag_curvature(FlagInput(x, y, u), model) - expected))
    return _bounded("flag_curvature", worst, tolerance, expected)


def check_s_curvature(model: MetricModel, options: RunOptions) -> CheckResult:
    tol = options.tolerances
    expected = model.facts.expected_s_curvature
    worst = 0.0
    for _, x, y in _samples(model, options, 43):
        worst = max(worst, abs(s_curvature(model, x, y, tol=tol.tol_curv, samples=tol.density_samples, seed=options.seed) - expected))
    return _bounded("s_curvature", worst, tol.tol_curv, expected)


def check_riemannian_degeneracies(model: MetricModel, options: RunOptions) -> CheckResult:
    """S = 0, tau = 0 and zeta = 1 on Riemannian models."""
    tol = options.tolerances
    worst_tau, worst_zeta = 0.0, 0.0
    for _, x, y in _samples(model, options, 44):
        worst_tau = max(worst_tau, abs(distortion(model, x, y, tol.density_samples, options.seed)))
        g = fundamental_tensor(model, x, y).g
        frame = AreaFrame(q=x, normal=y, tangent_basis=orthonormal_complement(g @ y))
        zeta = zeta_factor(model, frame, tol.density_samples, options.seed, method="containment")
        worst_zeta = max(worst_zeta, abs(zeta - 1.0))
    ok = worst_tau <= 1e-2 and worst_zeta <= 1e-2
    return CheckResult(
        name="riemannian_degeneracies",
        status="pass" if ok else "fail",
        value=max(worst_tau, worst_zeta),
        expected=0.0,
        tolerance=1e-2,
        detail=f"|tau| {worst_tau:.3e}, |zeta - 1| {worst_zeta:.3e}",
    )


def check_straightness(model: MetricModel, options: RunOptions) -> CheckResult:
    """Transverse deviation of integrated geodesics from their initial line."""
    worst = 0.0
    for _, x, y in _samples(model, options, 45):
        path = integrate_geodesic(model, x, y, 1.0, tol_geo=options.tolerances.tol_geo)
        line = y / np.linalg.norm(y)
        offsets = path.points - x
        transverse = offsets - np.outer(offsets @ line, line)
        worst = max(worst, float(np.max(np.linalg.norm(transverse, axis=-1))))
    return _bounded("geodesic_straightness", worst, 1e-8, 0.0)


def check_mean_curvature(model: MetricModel, options: RunOptions, params: Optional[BoundParams]) -> CheckResult:
    p = base_point(model, options)
    y = unit_direction(model, p, substream(options.seed, 46))
    worst = 0.0
    for t in MEAN_CURVATURE_TIMES:
        if params is not None:
            lower, upper = mean_curvature_interval(t, params)
        else:
            lower, upper = mean_curvature_bounds(t, 0.0, 0.0, model.dim)
        value = mean_curvature_sphere(model, p, y, t, options.tolerances.eta_step, method=options.geodesic_method)
        excess = max(lower - value, value - upper, 0.0) / max(1.0, abs(lower), abs(upper))
        worst = max(worst, excess)
    return _bounded("mean_curvature", worst, 1e-2, 0.0)


def check_ratio_bounds(model: MetricModel, options: RunOptions, params: Optional[BoundParams], quad: DirectionQuadrature) -> CheckResult:
    tol = options.tolerances
    report = verify_ratio_bounds(
        model, params, RATIO_GRID, quad, tol.ratio_slack, tol.eta_step, tol.volume_rtol, tol.eta_halving,
        method=options.geodesic_method,
    )
    failed = [row.r for row in report.rows if not row.within]
    return CheckResult(
        name="ratio_bounds",
        status="pass" if not failed else "fail",
        value=float(len(failed)),
        expected=0.0,
        tolerance=tol.ratio_slack,
        detail=f"radii outside the sandwich: {failed}",
    )


def check_ratio_exactness(model: MetricModel, options: RunOptions, params: BoundParams, quad: DirectionQuadrature) -> CheckResult:
    """Measured ratio against the closed form for constant curvature and constant S."""
    tol = options.tolerances
    grid = np.array([0.5, 1.0, 2.0, 5.0])
    volumes = ball_volume_profile(model, quad.p, grid, quad, tol.eta_step, tol.volume_rtol, tol.eta_halving, options.geodesic_method)
    worst = 0.0
    for r, volume in zip(grid, volumes):
        if model.kind == "funk":
            exact = funk_ratio_closed_form(params.n, r)
        else:
            exact = chi_ratio(r, params.k1, params.delta1, params.n)
        ratio = volume / sphere_area(model, quad.p, r, quad, tol.eta_step, tol.eta_halving, options.geodesic_method)
        worst = max(worst, abs(ratio / exact - 1.0))
    return _bounded("ratio_closed_form", worst, 1e-2, 0.0)


def check_isoperimetric(model: MetricModel, options: RunOptions, params: BoundParams, quad: DirectionQuadrature) -> CheckResult:
    tol = options.tolerances
    rows = theorem4_check(model, params.k1, params.delta1, ISOPERIMETRIC_GRID, quad, tol.ratio_slack,
                          tol.eta_step, tol.volume_rtol, tol.eta_halving, options.geodesic_method)
    failed = [row.r for row in rows if not row.passed]
    return CheckResult(
        name="isoperimetric",
        status="pass" if not failed else "fail",
        value=float(len(failed)),
        expected=0.0,
        tolerance=tol.ratio_slack,
        detail=f"radii violating Vol <= Area / (n (k1 - delta1)): {failed}",
    )


def check_entropy(model: MetricModel, options: RunOptions, params: BoundParams, quad: DirectionQuadrature) -> CheckResult:
    tol = options.tolerances
    window = entropy_window(model, options)
    slope, stderr = entropy_estimate(
        model, window, quad, h=tol.eta_step, rtol=tol.volume_rtol, halving_tol=tol.eta_halving, method=options.geodesic_method
    )
    if params.admissible:
        lower, upper = entropy_bounds(params)
        relative = 0.1 if model.kind == "hilbert" else 0.05
        excess = max(lower * (1.0 - relative) - slope, slope - upper * (1.0 + relative), 0.0)
        return CheckResult(
            name="entropy",
            status="pass" if excess == 0.0 else "fail",
            value=slope,
            expected=0.5 * (lower + upper),
            tolerance=relative,
            detail=f"slope {slope:.6g} +/- {stderr:.2g} on [{window[0]:g}, {window[1]:g}]",
        )
    # the Funk volume stays finite, so its growth rate vanishes
    return _bounded("entropy", abs(slope), 0.05, 0.0, detail=f"slope {slope:.6g} +/- {stderr:.2g}")


def check_oracle(model: MetricModel, options: RunOptions, quad: DirectionQuadrature) -> CheckResult:
    r = 2.0 if model.kind == "funk" else 1.0
    _, estimate, _, volume, combined, z, agree = oracle_comparison(model, quad.p, r, quad, options)
    return CheckResult(
        name="oracle_equivalence",
        status="pass" if agree else "fail",
        value=z,
        expected=0.0,
        tolerance=3.0,
        detail=f"r={r:g}: Monte Carlo {estimate:.6g}, co-area {volume:.6g}, combined stderr {combined:.3g}",
    )


def check_funk_divergence(model: MetricModel, options: RunOptions, quad: DirectionQuadrature) -> CheckResult:
    tol = options.tolerances
    grid = np.array([10.0, 20.0])
    volumes = ball_volume_profile(model, quad.p, grid, quad, tol.eta_step, tol.volume_rtol, tol.eta_halving, options.geodesic_method)
    areas = [sphere_area(model, quad.p, r, quad, tol.eta_step, tol.eta_halving, options.geodesic_method) for r in grid]
    near, far = volumes[0] / areas[0], volumes[1] / areas[1]
    return CheckResult(
        name="funk_divergence",
        status="pass" if far > 2.0 * near else "fail",
        value=float(far / near),
        expected=2.0,
        detail=f"ratio {near:.6g} at r=10, {far:.6g} at r=20",
    )


def verify(model: MetricModel, options: RunOptions) -> VerifyReport:
    """Run every check the model facts allow; a failed check never stops the suite."""
    facts = model.facts
    params = model_params(model)
    p = base_point(model, options)
    quad = quadrature_for(model, p, options)
    checks = [_run_check("norm_properties", lambda: check_norm(model, options))]
    if facts.expected_flag_curvature is not None:
        checks.append(_run_check("flag_curvature", lambda: check_flag_curvature(model, options)))
    if facts.expected_s_curvature is not None:
        checks.append(_run_check("s_curvature", lambda: check_s_curvature(model, options)))
    if facts.is_riemannian:
        checks.append(_run_check("riemannian_degeneracies", lambda: check_riemannian_degeneracies(model, options)))
    if facts.geodesics_are_lines:
        checks.append(_run_check("geodesic_straightness", lambda: check_straightness(model, options)))
    checks.append(_run_check("mean_curvature", lambda: check_mean_curvature(model, options, params)))
    if params is not None:
        checks.append(_run_check("ratio_bounds", lambda: check_ratio_bounds(model, options, params, quad)))
        collapsed = params.k1 == params.k2 and params.delta1 == params.delta2
        if collapsed:
            checks.append(_run_check("ratio_closed_form", lambda: check_ratio_exactness(model, options, params, quad)))
        checks.append(_run_check("isoperimetric", lambda: check_isoperimetric(model, options, params, quad)))
        checks.append(_run_check("entropy", lambda: check_entropy(model, options, params, quad)))
    checks.append(_run_check("oracle_equivalence", lambda: check_oracle(model, options, quad)))
    if model.kind == "funk":
        checks.append(_run_check("funk_divergence", lambda: check_funk_divergence(model, options, quad)))

    report = VerifyReport(
        model=model.model_id,
        config=model.config.model_dump() if model.config is not None else {},
        seed=options.seed,
        checks=checks,
        tolerances=options.tolerances.model_dump(),
    )
    failed = [check.name for check in checks if check.failed]
    if failed:
        logger.warning(f"Verification of {model.model_id} failed: {failed}")
    else:
        logger.info(f"Verification of {model.model_id} passed {len(checks)} checks")
    return report
