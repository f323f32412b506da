"""Deterministic forward integration of the swarm under a shape schedule.

Explicit Euler with synchronous updates: all targets for a step are computed
from the same pre-step snapshot.  Runs are bit-reproducible for a given
(config, seed).  Optional degradation knobs perturb what agents perceive of
their neighbors (Gaussian position noise, stale state), never the true
dynamics.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from swarmcover.area import ShapeSchedule, TargetAreaSpec, alpha_at, field_gradient, signed_field
from swarmcover.control import (
    AgentState,
    ControlParams,
    default_params,
    neighbor_mask,
    pair_geometry,
    swarm_targets,
)

# Default timestep: cap per-step displacement at this fraction of the
# equilibrium spacing a_R, keeping the power-6 repulsion stable.
DT_SPACING_FRACTION = 0.05
# Fixed horizon for omega = 0 runs, in units of r0 / v0 (boundary crossings).
ZERO_OMEGA_HORIZON_CROSSINGS = 20.0
# Auto record_interval targets about this many snapshots per measure window.
TARGET_SNAPSHOTS = 256


class SimulationBlowupError(RuntimeError):
    """Raised when integration produces non-finite positions."""

    def __init__(self, step_index: int):
        super().__init__(f"non-finite agent positions at step {step_index}")
        self.step_index = step_index


@dataclass(frozen=True)
class SwarmComposition:
    """Population mix: N agents, a fraction rho_f of which move at v_f
    instead of the base speed v0."""

    n: int
    rho_f: float = 0.0
    v0: float = 1.0
    v_f: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one agent, got n={self.n}")
        if not 0.0 <= self.rho_f <= 1.0:
            raise ValueError(f"rho_f must lie in [0, 1], got {self.rho_f}")
        if self.v0 <= 0.0:
            raise ValueError(f"v0 must be positive, got {self.v0}")
        if self.v_f is not None and self.v_f < self.v0:
            raise ValueError(f"v_f must be >= v0, got v_f={self.v_f} < v0={self.v0}")

    @property
    def fast_speed(self) -> float:
        return self.v0 if self.v_f is None else self.v_f

    @property
    def n_fast(self) -> int:
        return int(round(self.rho_f * self.n))

    @property
    def max_speed(self) -> float:
        return self.fast_speed if self.n_fast > 0 else self.v0

    def speeds(self) -> np.ndarray:
        """Per-agent maximum speeds; the fast agents are the first n_fast ids."""
        out = np.full(self.n, self.v0)
        out[: self.n_fast] = self.fast_speed
        return out


def mean_speed(composition: SwarmComposition) -> float:
    """Collective mean speed using the realized (rounded) fast-agent count."""
    nf = composition.n_fast
    return ((composition.n - nf) * composition.v0 + nf * composition.fast_speed) / composition.n


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Everything a run needs; unset dt / record_interval / params resolve to
    the documented defaults."""

    composition: SwarmComposition
    r0: float
    omega: float
    e_hat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))
    dt: float | None = None
    warmup_cycles: int = 1
    measure_cycles: int = 2
    record_interval: int | None = None
    seed: int = 0
    neighbor_rule: str = "all-to-all"
    neighbor_radius: float | None = None
    position_noise_sigma: float = 0.0
    state_staleness: float = 0.0
    params: ControlParams | None = None

    def __post_init__(self):
        object.__setattr__(self, "e_hat", np.array(self.e_hat, dtype=float).reshape(2))
        if self.r0 <= 0.0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if self.omega < 0.0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.warmup_cycles < 1 or self.measure_cycles < 1:
            raise ValueError("warmup_cycles and measure_cycles must be >= 1")
        if self.record_interval is not None and self.record_interval < 1:
            raise ValueError("record_interval must be >= 1")
        if self.position_noise_sigma < 0.0 or self.state_staleness < 0.0:
            raise ValueError("noise sigma and staleness must be >= 0")
        if self.neighbor_rule not in ("all-to-all", "metric"):
            raise ValueError(f"unknown neighbor rule {self.neighbor_rule!r}")
        if self.neighbor_rule == "metric" and (
            self.neighbor_radius is None or self.neighbor_radius <= 0.0
        ):
            raise ValueError("metric neighbor rule needs a positive neighbor_radius")

    @property
    def schedule(self) -> ShapeSchedule:
        return ShapeSchedule(self.omega, self.e_hat)

    @property
    def area_s(self) -> float:
        return float(np.pi * self.r0**2)

    def resolved_params(self) -> ControlParams:
        if self.params is not None:
            return self.params
        return default_params(self.area_s, self.composition.n)

    def resolved_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        return DT_SPACING_FRACTION * self.resolved_params().a_r / self.composition.max_speed

    def area_spec(self, alpha: float) -> TargetAreaSpec:
        return TargetAreaSpec(self.r0, alpha, self.e_hat)

    def spans(self) -> tuple[float, float]:
        """(warmup span, measured span) in seconds.

        For omega > 0 these are whole periods; for omega = 0 a fixed horizon
        of 20 r0 / v0 is split in the warmup:measure cycle proportion.
        """
        if self.omega > 0.0:
            period = 2.0 * np.pi / self.omega
            return self.warmup_cycles * period, self.measure_cycles * period
        horizon = ZERO_OMEGA_HORIZON_CROSSINGS * self.r0 / self.composition.v0
        total = self.warmup_cycles + self.measure_cycles
        return horizon * self.warmup_cycles / total, horizon * self.measure_cycles / total


@dataclass(frozen=True, eq=False)
class Snapshot:
    t: float
    positions: np.ndarray  # (N, 2)
    alpha: float


@dataclass(eq=False)
class Trajectory:
    config: SimConfig
    speeds: np.ndarray  # (N,) per-agent max speeds
    snapshots: list[Snapshot]

    @property
    def n_agents(self) -> int:
        return len(self.speeds)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def write_csv(self, fh) -> None:
        """Rows `t,agent_id,x,y,alpha,v0`, one per agent per snapshot."""
        fh.write("t,agent_id,x,y,alpha,v0\n")
        for snap in self.snapshots:
            for i in range(self.n_agents):
                fh.write(
                    f"{snap.t:.12g},{i},{snap.positions[i, 0]:.12g},"
                    f"{snap.positions[i, 1]:.12g},{snap.alpha:.12g},{self.speeds[i]:.12g}\n"
                )


def init_swarm(config: SimConfig, rng: np.random.Generator) -> list[AgentState]:
    """Agents placed i.i.d. uniform on the disk of radius r0; the first
    round(rho_f * N) ids are the fast ones."""
    n = config.composition.n
    radii = config.r0 * np.sqrt(rng.random(n))
    angles = 2.0 * np.pi * rng.random(n)
    positions = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    speeds = config.composition.speeds()
    return [AgentState(i, positions[i], speeds[i]) for i in range(n)]


def _saturate(targets: np.ndarray, speeds: np.ndarray) -> np.ndarray:
    """Velocity commands v0 * T / max(1, |T|), clamped so |v| <= v0 holds
    exactly despite rounding."""
    tn = np.linalg.norm(targets, axis=1)
    v = targets * (speeds / np.maximum(1.0, tn))[:, None]
    vn = np.linalg.norm(v, axis=1)
    for _ in range(8):
        over = vn > speeds
        if not np.any(over):
            break
        v[over] *= (speeds[over] / vn[over])[:, None]
        vn = np.linalg.norm(v, axis=1)
    return v


def _advance(positions: np.ndarray, speeds: np.ndarray, t: float, perceived: np.ndarray,
             dt: float, config: SimConfig, params: ControlParams) -> np.ndarray:
    spec = config.area_spec(alpha_at(config.schedule, t))
    values = signed_field(spec, positions)
    grads = field_gradient(spec, positions)
    disp, dist = pair_geometry(positions, perceived, params.a_r)
    mask = neighbor_mask(dist, config.neighbor_rule, config.neighbor_radius)
    targets = swarm_targets(values, grads, params, disp, dist, mask)
    return positions + dt * _saturate(targets, speeds)


def step(states: list[AgentState], t: float, config: SimConfig, *,
         perceived: np.ndarray | None = None,
         rng: np.random.Generator | None = None) -> list[AgentState]:
    """One synchronous Euler step over a list of AgentStates.

    `perceived` carries the neighbor positions agents act on (stale or noisy
    variants); by default agents see the true snapshot, plus Gaussian noise
    when position_noise_sigma > 0 and an rng is supplied.
    """
    positions = np.array([s.position for s in states])
    speeds = np.array([s.v0 for s in states])
    if perceived is None:
        perceived = positions
        if config.position_noise_sigma > 0.0:
            if rng is None:
                raise ValueError("position noise requires an rng")
            perceived = positions + rng.normal(0.0, config.position_noise_sigma, positions.shape)
    new_positions = _advance(
        positions, speeds, t, perceived, config.resolved_dt(), config, config.resolved_params()
    )
    return [replace(s, position=new_positions[i]) for i, s in enumerate(states)]


def run(config: SimConfig) -> Trajectory:
    """Integrate warmup + measure spans, recording snapshots every
    record_interval steps during the measure span only."""
    params = config.resolved_params()
    dt = config.resolved_dt()
    rng = np.random.default_rng(config.seed)
    states = init_swarm(config, rng)
    positions = np.array([s.position for s in states])
    speeds = np.array([s.v0 for s in states])

    t_warm, t_meas = config.spans()
    n_steps = max(1, int(round((t_warm + t_meas) / dt)))
    k_warm = int(np.ceil(t_warm / dt - 1e-9))
    if config.record_interval is not None:
        rec = config.record_interval
    else:
        rec = max(1, round((n_steps - k_warm) / TARGET_SNAPSHOTS))

    delay = int(round(config.state_staleness / dt))
    history: deque[np.ndarray] = deque(maxlen=delay + 1)
    sigma = config.position_noise_sigma

    snapshots: list[Snapshot] = []
    schedule = config.schedule
    for k in range(n_steps + 1):
        t = k * dt
        if k >= k_warm and (k - k_warm) % rec == 0:
            snapshots.append(Snapshot(t, positions.copy(), float(alpha_at(schedule, t))))
        if k == n_steps:
            break
        history.append(positions)
        perceived = history[0]
        if sigma > 0.0:
            perceived = perceived + rng.normal(0.0, sigma, positions.shape)
        positions = _advance(positions, speeds, t, perceived, dt, config, params)
        if not np.all(np.isfinite(positions)):
            raise SimulationBlowupError(k)

    return Trajectory(config=config, speeds=speeds, snapshots=snapshots)
