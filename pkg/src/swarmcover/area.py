"""Analytic family of cyclically deforming target regions.

The region to cover is the sublevel set ``A(r) < 0`` of a quartic surface
whose boundary radius depends on the angle between the position and a fixed
principal axis.  A single shape parameter ``alpha`` morphs the region from a
disk (alpha = 0) through a two-lobed oval (alpha = 1) to a dumbbell that
pinches to a nodal point at the origin (alpha = 2).  The normalization is
chosen so the enclosed area stays pi * r0**2 for every alpha in [0, 2].

All field functions broadcast over trailing point dimensions: they accept a
single 2D point of shape (2,) or a stack of points of shape (..., 2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# |e_hat| must be 1 to this tolerance (construction-time check).
AXIS_UNIT_TOL = 1e-12
# boundary_radius rejects direction vectors farther than this from unit norm.
DIRECTION_UNIT_TOL = 1e-9


def unit_vector(v) -> np.ndarray:
    """Normalize a 2D vector, rejecting the zero vector."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


@dataclass(frozen=True, eq=False)
class TargetAreaSpec:
    """Snapshot of the target region: radius scale, shape parameter, axis."""

    r0: float
    alpha: float
    e_hat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "r0", float(self.r0))
        object.__setattr__(self, "alpha", float(self.alpha))
        e = np.array(self.e_hat, dtype=float).reshape(2)
        object.__setattr__(self, "e_hat", e)
        if not self.r0 > 0.0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if not 0.0 <= self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in [0, 2], got {self.alpha}")
        if abs(np.linalg.norm(e) - 1.0) > AXIS_UNIT_TOL:
            raise ValueError(f"e_hat must be a unit vector, |e_hat| = {np.linalg.norm(e)!r}")

    @property
    def area(self) -> float:
        """Nominal enclosed area S = pi * r0**2 (alpha-independent)."""
        return np.pi * self.r0**2

    @property
    def norm_factor(self) -> float:
        """Denominator sqrt(1 + alpha/2 + 11 alpha^2/32) keeping the area constant."""
        a = self.alpha
        return float(np.sqrt(1.0 + a / 2.0 + 11.0 * a**2 / 32.0))


@dataclass(frozen=True, eq=False)
class ShapeSchedule:
    """Cyclic shape drive alpha(t) = 1 - cos(omega * t)."""

    omega: float
    e_hat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        e = np.array(self.e_hat, dtype=float).reshape(2)
        object.__setattr__(self, "e_hat", e)
        if self.omega < 0.0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if abs(np.linalg.norm(e) - 1.0) > AXIS_UNIT_TOL:
            raise ValueError(f"e_hat must be a unit vector, |e_hat| = {np.linalg.norm(e)!r}")

    @property
    def period(self) -> float:
        if self.omega == 0.0:
            return np.inf
        return 2.0 * np.pi / self.omega


def alpha_at(schedule: ShapeSchedule, t) -> float | np.ndarray:
    """Shape parameter at time t: alpha(t) = 1 - cos(omega t), in [0, 2]."""
    out = 1.0 - np.cos(schedule.omega * np.asarray(t, dtype=float))
    if out.ndim == 0:
        return float(out)
    return out


def _radius_from_axis_cos(spec: TargetAreaSpec, u) -> np.ndarray:
    """Boundary radius as a function of u = r_hat . e_hat."""
    a = spec.alpha
    u = np.asarray(u, dtype=float)
    return (spec.r0 / 2.0) * (2.0 - a + 3.0 * a * u**2) / spec.norm_factor


def boundary_radius(spec: TargetAreaSpec, r_hat) -> float | np.ndarray:
    """Distance from the origin to the region boundary along direction r_hat.

    r_hat must be a unit vector (checked to 1e-9); broadcasts over (..., 2).
    """
    r_hat = np.asarray(r_hat, dtype=float)
    norms = np.linalg.norm(r_hat, axis=-1)
    if np.any(np.abs(norms - 1.0) > DIRECTION_UNIT_TOL):
        raise ValueError("r_hat must be a unit vector (|r_hat| within 1e-9 of 1)")
    u = r_hat @ spec.e_hat
    out = _radius_from_axis_cos(spec, u)
    if out.ndim == 0:
        return float(out)
    return out


def _max_boundary_radius(spec: TargetAreaSpec) -> float:
    # The boundary radius is maximal along the principal axis (u^2 = 1)
    # for every alpha in [0, 2].
    return float(_radius_from_axis_cos(spec, 1.0))


def signed_field(spec: TargetAreaSpec, r) -> float | np.ndarray:
    """Signed region field A(r) = r^2 - R(r_hat)^2; negative inside.

    At the origin, where the direction r_hat is undefined, the value is
    -max_rhat R(r_hat)^2 (the most-inside of the direction-dependent limits).
    """
    r = np.asarray(r, dtype=float)
    rr = np.linalg.norm(r, axis=-1)
    safe = np.where(rr > 0.0, rr, 1.0)
    u = (r @ spec.e_hat) / safe
    radius = _radius_from_axis_cos(spec, u)
    out = rr**2 - radius**2
    out = np.where(rr > 0.0, out, -_max_boundary_radius(spec) ** 2)
    if out.ndim == 0:
        return float(out)
    return out


def field_gradient(spec: TargetAreaSpec, r) -> np.ndarray:
    """Gradient of the signed field; zero at the origin by convention.

    grad A = 2 r - 6 alpha (r0 / c) (R(r_hat) / r) (r_hat . e_hat) e_perp
    with e_perp = e_hat - (r_hat . e_hat) r_hat and c the area-preserving
    normalization factor, so the gradient is the exact derivative of
    signed_field everywhere away from the origin.
    """
    r = np.asarray(r, dtype=float)
    rr = np.linalg.norm(r, axis=-1)
    safe = np.where(rr > 0.0, rr, 1.0)
    r_hat = r / safe[..., None]
    u = r_hat @ spec.e_hat
    radius = _radius_from_axis_cos(spec, u)
    e_perp = spec.e_hat - u[..., None] * r_hat
    scale = 6.0 * spec.alpha * (spec.r0 / spec.norm_factor) * (radius / safe) * u
    grad = 2.0 * r - scale[..., None] * e_perp
    grad = np.where(rr[..., None] > 0.0, grad, 0.0)
    return grad


def cell_centers(r0: float, resolution: int) -> np.ndarray:
    """Cell-center coordinates of a resolution^2 grid over [-2 r0, 2 r0]^2.

    Returns the shared 1D axis (cell centers along x and y are identical).
    The box contains the region for every alpha: the largest boundary radius
    is 2 sqrt(2/3) r0 < 2 r0, attained at alpha = 2 along the axis.
    """
    h = 4.0 * r0 / resolution
    return -2.0 * r0 + (np.arange(resolution) + 0.5) * h


def region_area(spec: TargetAreaSpec, resolution: int = 1024) -> float:
    """Grid-counted area of {A < 0} over [-2 r0, 2 r0]^2.

    Converges to pi * r0**2 as the resolution grows, for any alpha.
    """
    resolution = int(resolution)
    if resolution < 64:
        raise ValueError(f"resolution must be >= 64, got {resolution}")
    axis = cell_centers(spec.r0, resolution)
    h = 4.0 * spec.r0 / resolution
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xx, yy], axis=-1)
    inside = signed_field(spec, pts) < 0.0
    return float(np.count_nonzero(inside)) * h * h
