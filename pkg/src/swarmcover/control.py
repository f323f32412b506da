"""Cooperative control rule: geofencing attraction plus pairwise repulsion.

Each agent steers toward a dimensionless target vector T built from two
parts: a sigmoid-gated pull down the gradient of the signed region field
(strong outside the region, vanishing deep inside) and a steep power-law
repulsion from every neighbor.  The velocity command saturates the target
at the agent's maximum speed.

The scalar functions are the per-agent contract; `swarm_targets` is the
equivalent vectorized form used by the simulation loop (the two are held
consistent by tests).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Distances below COINCIDENT_FRACTION * a_R are treated as coincident and
# clamped, with a deterministic direction when the true direction is lost.
COINCIDENT_FRACTION = 1e-6


def default_params(area_s: float, n_agents: int) -> "ControlParams":
    """Tuned control constants for a region of area S covered by N agents.

    d = 6, a_R = 0.38 sqrt(S/N), beta = 40/S.
    """
    if area_s <= 0.0:
        raise ValueError(f"area must be positive, got {area_s}")
    if n_agents < 1:
        raise ValueError(f"need at least one agent, got {n_agents}")
    return ControlParams(d=6.0, a_r=0.38 * np.sqrt(area_s / n_agents), beta=40.0 / area_s)


@dataclass(frozen=True)
class ControlParams:
    """Control-law constants: repulsion power d, repulsion strength a_R (m),
    and field-transition steepness beta (1/m^2)."""

    d: float
    a_r: float
    beta: float

    def __post_init__(self):
        if self.d < 2.0:
            raise ValueError(f"repulsion power d must be >= 2, got {self.d}")
        if self.a_r <= 0.0:
            raise ValueError(f"repulsion strength a_r must be positive, got {self.a_r}")
        if self.beta <= 0.0:
            raise ValueError(f"steepness beta must be positive, got {self.beta}")


@dataclass(frozen=True, eq=False)
class AgentState:
    """One agent: ordinal id, 2D position (m), maximum speed v0 (m/s)."""

    id: int
    position: np.ndarray
    v0: float

    def __post_init__(self):
        object.__setattr__(self, "position", np.array(self.position, dtype=float).reshape(2))
        object.__setattr__(self, "v0", float(self.v0))
        if not self.v0 > 0.0:
            raise ValueError(f"agent {self.id}: v0 must be positive, got {self.v0}")
        if not np.all(np.isfinite(self.position)):
            raise ValueError(f"agent {self.id}: non-finite position {self.position}")


@dataclass(frozen=True, eq=False)
class NeighborView:
    """Relative displacements r_ij = r_j - r_i and distances to the neighbors
    of one agent.  Coincident pairs must be resolved before construction, so
    distances are strictly positive."""

    offsets: np.ndarray    # (M, 2)
    distances: np.ndarray  # (M,)

    def __post_init__(self):
        object.__setattr__(self, "offsets", np.atleast_2d(np.asarray(self.offsets, dtype=float)))
        object.__setattr__(self, "distances", np.atleast_1d(np.asarray(self.distances, dtype=float)))
        if self.offsets.shape != (len(self.distances), 2):
            raise ValueError("offsets and distances disagree in shape")
        if np.any(self.distances <= 0.0):
            raise ValueError("neighbor distances must be strictly positive")

    @classmethod
    def empty(cls) -> "NeighborView":
        return cls(np.empty((0, 2)), np.empty(0))


def stable_sigmoid(x) -> float | np.ndarray:
    """1 / (1 + exp(-x)) without overflow for large |x|."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def coverage_target(field_value: float, field_grad, params: ControlParams,
                    view: NeighborView) -> np.ndarray:
    """Area-coverage target vector for one agent.

    T = sigmoid(beta A) * (-grad A / |grad A|) - sum_j (a_R / r_ij)^d r_ij_hat.
    The attraction term is zero where the gradient vanishes (region center
    convention).
    """
    g = np.asarray(field_grad, dtype=float).reshape(2)
    gn = float(np.linalg.norm(g))
    if gn > 0.0:
        attract = stable_sigmoid(params.beta * field_value) * (-g / gn)
    else:
        attract = np.zeros(2)
    if len(view.distances) == 0:
        return attract
    w = (params.a_r / view.distances) ** params.d / view.distances
    return attract - view.offsets.T @ w


def velocity_command(agent: AgentState, target) -> np.ndarray:
    """Speed-saturated velocity: v0 * T / max(1, |T|), so |v| <= v0 always."""
    t = np.asarray(target, dtype=float).reshape(2)
    tn = float(np.linalg.norm(t))
    v = agent.v0 * t / max(1.0, tn)
    # guard against |v| creeping past v0 by a rounding ulp
    vn = float(np.linalg.norm(v))
    while vn > agent.v0:
        v *= agent.v0 / vn
        vn = float(np.linalg.norm(v))
    return v


def _fix_coincident(disp: np.ndarray, dist: np.ndarray, a_r: float) -> None:
    """Clamp near-zero pair separations in place, deterministically.

    Pairs closer than COINCIDENT_FRACTION * a_R are moved to that clamp
    distance; pairs at exactly zero separation get a direction at angle
    2*pi*min(i, j)/N so results stay reproducible.
    """
    n = dist.shape[0]
    eps = COINCIDENT_FRACTION * a_r
    off = ~np.eye(n, dtype=bool)
    close = off & (dist < eps)
    if not np.any(close):
        return
    for i, j in zip(*np.nonzero(close)):
        if i > j:
            continue  # handled with its mirror below
        if dist[i, j] > 0.0:
            direction = disp[i, j] / dist[i, j]
        else:
            angle = 2.0 * np.pi * min(i, j) / n
            direction = np.array([np.cos(angle), np.sin(angle)])
        disp[i, j] = eps * direction
        disp[j, i] = -eps * direction
        dist[i, j] = eps
        dist[j, i] = eps


def pair_geometry(positions: np.ndarray, perceived: np.ndarray | None,
                  a_r: float) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs displacements disp[i, j] = perceived[j] - positions[i] and
    distances, with coincident pairs clamped."""
    positions = np.asarray(positions, dtype=float)
    if perceived is None:
        perceived = positions
    disp = np.asarray(perceived, dtype=float)[None, :, :] - positions[:, None, :]
    dist = np.linalg.norm(disp, axis=-1)
    _fix_coincident(disp, dist, a_r)
    return disp, dist


def neighbor_mask(dist: np.ndarray, rule: str = "all-to-all",
                  radius: float | None = None) -> np.ndarray:
    """Boolean (N, N) adjacency under the chosen neighborhood rule."""
    n = dist.shape[0]
    off = ~np.eye(n, dtype=bool)
    if rule == "all-to-all":
        return off
    if rule == "metric":
        if radius is None or radius <= 0.0:
            raise ValueError("metric neighbor rule needs a positive radius")
        return off & (dist <= radius)
    raise ValueError(f"unknown neighbor rule {rule!r}")


def build_neighbor_views(positions, params: ControlParams, perceived=None,
                         rule: str = "all-to-all", radius: float | None = None
                         ) -> list[NeighborView]:
    """Per-agent NeighborViews from a position snapshot (sanitized)."""
    disp, dist = pair_geometry(positions, perceived, params.a_r)
    mask = neighbor_mask(dist, rule, radius)
    views = []
    for i in range(dist.shape[0]):
        sel = mask[i]
        if np.any(sel):
            views.append(NeighborView(disp[i, sel], dist[i, sel]))
        else:
            views.append(NeighborView.empty())
    return views


def swarm_targets(field_values: np.ndarray, field_grads: np.ndarray,
                  params: ControlParams, disp: np.ndarray, dist: np.ndarray,
                  mask: np.ndarray) -> np.ndarray:
    """Vectorized coverage targets for all agents from one snapshot.

    field_values (N,), field_grads (N, 2): signed field and gradient at each
    agent's own position; disp/dist/mask from pair_geometry/neighbor_mask.
    """
    gn = np.linalg.norm(field_grads, axis=-1)
    safe = np.where(gn > 0.0, gn, 1.0)
    gate = stable_sigmoid(params.beta * np.asarray(field_values, dtype=float))
    attract = -field_grads * (np.where(gn > 0.0, gate, 0.0) / safe)[:, None]
    safe_dist = np.where(mask, dist, 1.0)
    w = np.where(mask, (params.a_r / safe_dist) ** params.d / safe_dist, 0.0)
    repulse = np.einsum("ij,ijk->ik", w, disp)
    return attract - repulse
