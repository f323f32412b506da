"""Frequency-response analysis of the swarm's dynamic coverage.

Orchestrates sweeps over the normalized shape-change frequency
w_bar = omega * r0 / v (v being the base or mean collective speed), averages
the two performance metrics over the measured cycles of each run, and fits
the four-parameter response model

    P(w_bar) = (P0 * wc^lam + Pinf * w_bar^lam) / (wc^lam + w_bar^lam),

a logistic in log-frequency with plateau P0, floor Pinf, cutoff wc and
steepness lam.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from swarmcover.control import stable_sigmoid
from swarmcover.engine import SimConfig, Trajectory, mean_speed, run
from swarmcover.metrics import (
    EmptyRegionError,
    MetricsConfig,
    default_sensor_radius,
    snapshot_metrics,
)

# Curves whose total P span is below this are flagged cutoff-unidentifiable.
FLAT_CURVE_SPAN = 0.02
# Every sweep run gets at least this many boundary-crossing times r0/<v> of
# warmup and of measurement, so high-frequency points (short periods) are
# not dominated by the deployment transient.
MIN_WARMUP_CROSSINGS = 10.0
MIN_MEASURE_CROSSINGS = 5.0

METRIC_NAMES = ("P_T", "P_C")


def metrics_config_for(config: SimConfig, grid_resolution: int = 256,
                       sensor_radius: float | None = None) -> MetricsConfig:
    """MetricsConfig matched to a run: default equal-share R_s, resolution
    bumped until the cell size resolves both R_s and the agent spacing."""
    params = config.resolved_params()
    r_s = sensor_radius
    if r_s is None:
        r_s = default_sensor_radius(config.area_s, config.composition.n)
    needed = int(np.ceil(16.0 * config.r0 / min(r_s, params.a_r))) + 1
    resolution = max(grid_resolution, needed, 256)
    return MetricsConfig(
        r0=config.r0, sensor_radius=r_s, grid_resolution=resolution, a_r=params.a_r
    )


@dataclass(frozen=True)
class TimeAveragedPerformance:
    mean_p_t: float
    mean_p_c: float
    n_samples: int
    n_excluded: int


def time_average_performance(trajectory: Trajectory,
                             metrics_config: MetricsConfig | None = None
                             ) -> TimeAveragedPerformance:
    """Arithmetic mean of both metrics over the recorded snapshots.

    Undefined samples (empty rasterized region) are excluded and counted.
    """
    if metrics_config is None:
        metrics_config = metrics_config_for(trajectory.config)
    p_t, p_c, excluded = [], [], 0
    for snap in trajectory.snapshots:
        spec = trajectory.config.area_spec(snap.alpha)
        try:
            sample = snapshot_metrics(snap.positions, spec, metrics_config, t=snap.t)
        except EmptyRegionError:
            excluded += 1
            continue
        p_t.append(sample.p_t)
        p_c.append(sample.p_c)
    if not p_t:
        raise EmptyRegionError("no defined metric samples in trajectory")
    return TimeAveragedPerformance(
        mean_p_t=float(np.mean(p_t)),
        mean_p_c=float(np.mean(p_c)),
        n_samples=len(p_t),
        n_excluded=excluded,
    )


@dataclass(frozen=True)
class ResponsePoint:
    omega_bar: float
    mean_p_t: float
    mean_p_c: float
    std_p_t: float
    std_p_c: float
    n_seeds: int

    def mean(self, metric: str) -> float:
        return self.mean_p_t if metric == "P_T" else self.mean_p_c


@dataclass(frozen=True, eq=False)
class ResponseCurve:
    points: tuple[ResponsePoint, ...]
    normalization_speed: float
    failures: tuple[tuple[float, int, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "failures", tuple(self.failures))
        obs = [p.omega_bar for p in self.points]
        if any(b <= a for a, b in zip(obs, obs[1:])):
            raise ValueError("omega_bar values must be strictly increasing")
        for p in self.points:
            if not (0.0 < p.mean_p_t <= 1.0 and 0.0 < p.mean_p_c <= 1.0):
                raise ValueError(f"P values out of (0, 1] at omega_bar={p.omega_bar}")

    def omega_bars(self) -> np.ndarray:
        return np.array([p.omega_bar for p in self.points])

    def means(self, metric: str) -> np.ndarray:
        _check_metric(metric)
        return np.array([p.mean(metric) for p in self.points])

    def renormalized(self, new_speed: float) -> "ResponseCurve":
        """Same physical data relabeled with omega_bar = omega * r0 / new_speed."""
        if new_speed <= 0.0:
            raise ValueError("normalization speed must be positive")
        factor = self.normalization_speed / new_speed
        points = tuple(
            replace(p, omega_bar=p.omega_bar * factor) for p in self.points
        )
        failures = tuple((ob * factor, seed, msg) for ob, seed, msg in self.failures)
        return ResponseCurve(points, new_speed, failures)


def _check_metric(metric: str) -> None:
    if metric not in METRIC_NAMES:
        raise ValueError(f"metric must be one of {METRIC_NAMES}, got {metric!r}")


def _sweep_run_config(base: SimConfig, omega: float, seed: int, v_phys: float) -> SimConfig:
    period = 2.0 * np.pi / omega
    crossing = base.r0 / v_phys
    warmup = max(base.warmup_cycles, int(np.ceil(MIN_WARMUP_CROSSINGS * crossing / period)))
    measure = max(base.measure_cycles, int(np.ceil(MIN_MEASURE_CROSSINGS * crossing / period)))
    return replace(
        base, omega=omega, seed=seed, warmup_cycles=warmup, measure_cycles=measure
    )


def _sweep_job(job) -> tuple[float, int, tuple[float, float] | None, str]:
    omega_bar, seed, config, metrics_config = job
    try:
        perf = time_average_performance(run(config), metrics_config)
        return omega_bar, seed, (perf.mean_p_t, perf.mean_p_c), ""
    except Exception as exc:  # recorded per (omega_bar, seed); the sweep goes on
        return omega_bar, seed, None, f"{type(exc).__name__}: {exc}"


def frequency_sweep(base: SimConfig, omega_bars, seeds,
                    metrics_config: MetricsConfig | None = None, *,
                    normalize: str = "mean-speed", workers: int = 1) -> ResponseCurve:
    """Run the swarm at each normalized frequency and seed; aggregate.

    omega = omega_bar * v_norm / r0, with v_norm the composition's mean speed
    ("mean-speed", default) or base speed ("base-speed").  Failures are
    recorded per (omega_bar, seed) without aborting the sweep.
    """
    if normalize not in ("mean-speed", "base-speed"):
        raise ValueError(f"normalize must be 'mean-speed' or 'base-speed', got {normalize!r}")
    omega_bars = sorted(set(float(ob) for ob in omega_bars))
    if not omega_bars or omega_bars[0] <= 0.0:
        raise ValueError("omega_bar values must be positive")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")

    v_phys = mean_speed(base.composition)
    v_norm = base.composition.v0 if normalize == "base-speed" else v_phys
    if metrics_config is None:
        metrics_config = metrics_config_for(base)

    jobs = []
    for ob in omega_bars:
        omega = ob * v_norm / base.r0
        for seed in seeds:
            jobs.append((ob, seed, _sweep_run_config(base, omega, seed, v_phys), metrics_config))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(job) for job in jobs]

    by_ob: dict[float, list[tuple[float, float]]] = {ob: [] for ob in omega_bars}
    failures: list[tuple[float, int, str]] = []
    for ob, seed, values, message in sorted(results, key=lambda r: (r[0], r[1])):
        if values is None:
            failures.append((ob, seed, message))
        else:
            by_ob[ob].append(values)

    points = []
    for ob in omega_bars:
        vals = np.array(by_ob[ob])
        if vals.size == 0:
            continue
        ddof = 1 if len(vals) > 1 else 0
        points.append(
            ResponsePoint(
                omega_bar=ob,
                mean_p_t=float(vals[:, 0].mean()),
                mean_p_c=float(vals[:, 1].mean()),
                std_p_t=float(vals[:, 0].std(ddof=ddof)),
                std_p_c=float(vals[:, 1].std(ddof=ddof)),
                n_seeds=len(vals),
            )
        )
    return ResponseCurve(tuple(points), v_norm, tuple(failures))


def response_model(omega_bar, p0: float, p_inf: float, omega_bar_c: float,
                   lam: float) -> float | np.ndarray:
    """P(w) = (P0 wc^lam + Pinf w^lam) / (wc^lam + w^lam), evaluated stably
    as a logistic in log-frequency."""
    z = lam * (np.log(np.asarray(omega_bar, dtype=float)) - np.log(omega_bar_c))
    out = p_inf + (p0 - p_inf) * stable_sigmoid(-z)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class FitResult:
    p0: float
    p_inf: float
    omega_bar_c: float
    lambda_: float
    residual: float
    identifiable: bool = True
    note: str = ""

    @property
    def inverted(self) -> bool:
        """True when the fit violates P0 >= Pinf (performance improving
        with frequency), which flags a suspect sweep."""
        return self.p0 < self.p_inf


def fit_response(curve: ResponseCurve, metric: str = "P_T") -> FitResult:
    """Least-squares fit of the response model in log-frequency.

    Multi-start local optimization over a coarse (cutoff, steepness) grid;
    curves flatter than FLAT_CURVE_SPAN are flagged cutoff-unidentifiable
    instead of yielding an arbitrary cutoff.
    """
    _check_metric(metric)
    x = curve.omega_bars()
    y = curve.means(metric)
    if len(np.unique(x)) < 5:
        raise ValueError("fit requires at least 5 distinct frequencies")

    span = float(y.max() - y.min())
    if span < FLAT_CURVE_SPAN:
        return FitResult(
            p0=float(y.max()), p_inf=float(y.min()),
            omega_bar_c=float("nan"), lambda_=float("nan"),
            residual=float(np.std(y)), identifiable=False, note="flat-curve",
        )

    log_x = np.log(x)
    lo = np.array([1e-6, 1e-6, np.log(x.min() / 1e3), np.log(0.05)])
    hi = np.array([1.0, 1.0, np.log(x.max() * 1e3), np.log(20.0)])

    def residuals(theta):
        p0, p_inf, log_wc, log_lam = theta
        z = np.exp(log_lam) * (log_x - log_wc)
        return p_inf + (p0 - p_inf) * stable_sigmoid(-z) - y

    order = np.argsort(x)
    p0_init = float(np.mean(y[order[:2]]))
    p_inf_init = float(np.mean(y[order[-2:]]))
    best = None
    for wc in np.geomspace(x.min() / 10.0, x.max() * 10.0, 7):
        for lam in (0.25, 0.5, 1.0, 2.0, 4.0):
            theta0 = np.clip(
                [p0_init, p_inf_init, np.log(wc), np.log(lam)], lo + 1e-12, hi - 1e-12
            )
            sol = least_squares(residuals, theta0, bounds=(lo, hi), method="trf")
            if best is None or sol.cost < best.cost:
                best = sol

    p0, p_inf, log_wc, log_lam = best.x
    rms = float(np.sqrt(np.mean(residuals(best.x) ** 2)))
    note = "inverted" if p0 < p_inf else ""
    return FitResult(
        p0=float(p0), p_inf=float(p_inf), omega_bar_c=float(np.exp(log_wc)),
        lambda_=float(np.exp(log_lam)), residual=rms, identifiable=True, note=note,
    )


@dataclass(frozen=True)
class CutoffScaling:
    ratio: float
    predicted: float


def cutoff_scaling_check(fit_hom: FitResult, fit_het: FitResult, rho_f: float,
                         speed_ratio: float = 2.0) -> CutoffScaling:
    """Measured heterogeneous/homogeneous cutoff ratio vs the mean-speed
    prediction 1 + rho_f (v_F/v0 - 1); both fits must be identifiable and
    normalized by the same (base) speed."""
    if not (fit_hom.identifiable and fit_het.identifiable):
        raise ValueError("cutoff scaling needs two identifiable fits")
    return CutoffScaling(
        ratio=fit_het.omega_bar_c / fit_hom.omega_bar_c,
        predicted=1.0 + rho_f * (speed_ratio - 1.0),
    )


def write_sweep_csv(fh, curve: ResponseCurve) -> None:
    """CSV `omega_bar,metric,mean,std,n_seeds` (two rows per frequency)."""
    fh.write("omega_bar,metric,mean,std,n_seeds\n")
    for p in curve.points:
        fh.write(f"{p.omega_bar:.12g},P_T,{p.mean_p_t:.12g},{p.std_p_t:.12g},{p.n_seeds}\n")
        fh.write(f"{p.omega_bar:.12g},P_C,{p.mean_p_c:.12g},{p.std_p_c:.12g},{p.n_seeds}\n")


def format_fit_record(fit: FitResult, metric: str) -> str:
    """Structured text record for one fitted metric."""
    lines = [
        f"metric = {metric}",
        f"P0 = {fit.p0:.12g}",
        f"P_inf = {fit.p_inf:.12g}",
        f"omega_bar_c = {fit.omega_bar_c:.12g}",
        f"lambda = {fit.lambda_:.12g}",
        f"residual = {fit.residual:.12g}",
        f"identifiable = {'true' if fit.identifiable else 'false'}",
    ]
    if fit.note:
        lines.append(f"note = {fit.note}")
    return "\n".join(lines) + "\n"
