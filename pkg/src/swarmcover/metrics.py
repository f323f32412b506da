"""Dynamic-coverage performance metrics on rasterized regions.

Both metrics discretize the instantaneous region {A < 0} on a uniform grid
over [-2 r0, 2 r0]^2 and work on cell centers:

* tessellation performance P_T = A / (A_LVC * N), the inverse relative size
  of the largest nearest-agent cell (a weakest-link measure);
* coverage performance P_C, the fraction of the region within the sensing
  radius R_s of at least one agent (an average, system-level measure).

Grid error is controlled by the resolution-convergence property tests, not
by exact polygon clipping against the curved boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from swarmcover.area import TargetAreaSpec, cell_centers, signed_field


class EmptyRegionError(ValueError):
    """The rasterized region contains no cells; the metric sample is undefined."""


def default_sensor_radius(area_s: float, n_agents: int) -> float:
    """Equal-share sensing radius sqrt(S / (pi N)): N such disks total S."""
    if area_s <= 0.0:
        raise ValueError(f"area must be positive, got {area_s}")
    if n_agents < 1:
        raise ValueError(f"need at least one agent, got {n_agents}")
    return float(np.sqrt(area_s / (np.pi * n_agents)))


@dataclass(frozen=True)
class MetricsConfig:
    """Raster settings: sensing radius, grid resolution, and the region
    scale r0 fixing the bounding box [-2 r0, 2 r0]^2."""

    r0: float
    sensor_radius: float
    grid_resolution: int = 256
    a_r: float | None = None  # when known, checked against the cell size

    def __post_init__(self):
        if self.r0 <= 0.0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if self.sensor_radius <= 0.0:
            raise ValueError(f"sensor_radius must be positive, got {self.sensor_radius}")
        if self.grid_resolution < 256:
            raise ValueError(f"grid_resolution must be >= 256, got {self.grid_resolution}")
        h = self.cell_size
        if not h < self.sensor_radius / 4.0:
            raise ValueError(
                f"cell size {h:g} too coarse for sensor radius {self.sensor_radius:g}"
            )
        if self.a_r is not None and not h < self.a_r / 4.0:
            raise ValueError(f"cell size {h:g} too coarse for agent spacing {self.a_r:g}")

    @property
    def cell_size(self) -> float:
        return 4.0 * self.r0 / self.grid_resolution


@dataclass(frozen=True)
class MetricSample:
    """One timestamped metric evaluation."""

    t: float
    p_t: float
    p_c: float
    a_lvc: float

    def __post_init__(self):
        if not 0.0 < self.p_t <= 1.0:
            raise ValueError(f"P_T must lie in (0, 1], got {self.p_t}")
        if not 0.0 <= self.p_c <= 1.0:
            raise ValueError(f"P_C must lie in [0, 1], got {self.p_c}")


def _region_cells(spec: TargetAreaSpec, config: MetricsConfig) -> np.ndarray:
    """Centers of grid cells inside the region, shape (C, 2)."""
    axis = cell_centers(config.r0, config.grid_resolution)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    inside = signed_field(spec, pts) < 0.0
    return pts[inside]


def _cell_distances(positions, spec: TargetAreaSpec, config: MetricsConfig) -> np.ndarray:
    cells = _region_cells(spec, config)
    if cells.shape[0] == 0:
        raise EmptyRegionError("rasterized region is empty; metrics undefined")
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    return cdist(cells, positions)


def _tessellation_from_distances(dists: np.ndarray, h: float) -> tuple[float, float]:
    n_cells, n_agents = dists.shape
    owner = np.argmin(dists, axis=1)  # argmin ties resolve to the lowest agent id
    counts = np.bincount(owner, minlength=n_agents)
    largest = int(counts.max())
    a_lvc = largest * h * h
    p_t = n_cells / (largest * n_agents)
    return float(p_t), float(a_lvc)


def tessellation_performance(positions, spec: TargetAreaSpec,
                             config: MetricsConfig) -> tuple[float, float]:
    """(P_T, A_LVC): nearest-agent partition of the rasterized region.

    P_T = A / (A_LVC * N) with A the grid area of the region at the same
    resolution; always in (0, 1].
    """
    dists = _cell_distances(positions, spec, config)
    return _tessellation_from_distances(dists, config.cell_size)


def coverage_performance(positions, spec: TargetAreaSpec, config: MetricsConfig) -> float:
    """Fraction of in-region cells within sensor_radius of some agent."""
    dists = _cell_distances(positions, spec, config)
    covered = np.count_nonzero(dists.min(axis=1) <= config.sensor_radius)
    return covered / dists.shape[0]


def snapshot_metrics(positions, spec: TargetAreaSpec, config: MetricsConfig,
                     t: float = 0.0) -> MetricSample:
    """Both metrics from one shared distance computation."""
    dists = _cell_distances(positions, spec, config)
    p_t, a_lvc = _tessellation_from_distances(dists, config.cell_size)
    covered = np.count_nonzero(dists.min(axis=1) <= config.sensor_radius)
    return MetricSample(t=t, p_t=p_t, p_c=covered / dists.shape[0], a_lvc=a_lvc)


def write_metrics_csv(fh, rows) -> None:
    """Rows of (alpha, MetricSample) to CSV `t,alpha,P_T,P_C,A_LVC`."""
    fh.write("t,alpha,P_T,P_C,A_LVC\n")
    for alpha, sample in rows:
        fh.write(
            f"{sample.t:.12g},{alpha:.12g},{sample.p_t:.12g},"
            f"{sample.p_c:.12g},{sample.a_lvc:.12g}\n"
        )
