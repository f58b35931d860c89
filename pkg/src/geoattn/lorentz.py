"""Lorentz hyperboloid model of hyperbolic space with curvature -c.

Points live on the upper sheet of <x, x>_L = -1/c in Minkowski space,
where <x, y>_L = x_space . y_space - x_time * y_time.  All exponential and
logarithmic maps go through the origin O = [0, 1/sqrt(c)]; base points
elsewhere are out of scope.

Numerical conventions:

* The sinc-like factor sinh(t)/t is evaluated by its Taylor series for
  small t, avoiding 0/0.
* The log map uses the identity arcosh(sqrt(1 + s^2)) = asinh(s) with
  s = sqrt(c) * ||x_space||, which is accurate near the origin where the
  printed arcosh/sqrt form loses digits.  Under this curvature-normalized
  reading, log(exp(u)) = u for every c.
* The time component is always recomputed from the space component, never
  trusted from input arithmetic.
* Geodesic distance clips the arcosh argument to [1 + eps, inf) with
  eps = 1e-15, so self-distance is arcosh(1 + 1e-15)/sqrt(c) ~ 4.47e-8/sqrt(c)
  (the clip floor), never NaN.
* Hyperboloid membership is checked with a scale-normalized residual
  |<x,x>_L + 1/c| / max(1, x_time^2).  Far from the origin x_time^2 can
  exceed 1e50 and an absolute residual below rounding error of x_time is
  not representable in float64; the normalized residual coincides with the
  absolute one for points near the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_vector

__all__ = [
    "MIN_CURVATURE",
    "DEFAULT_EPS_CLIP",
    "LorentzPoint",
    "TangentAtOrigin",
    "check_curvature",
    "origin",
    "lorentz_inner",
    "hyperboloid_residual",
    "exp_origin",
    "log_origin",
    "geodesic_distance",
    "pairwise_distances",
    "volume_growth",
    "distance_gradient",
    "lift_rows",
    "pairwise_distance_matrix",
    "save_points_csv",
    "load_points_csv",
]

MIN_CURVATURE = 1e-3
DEFAULT_EPS_CLIP = 1e-15

# Off-manifold tolerance on the (normalized) constraint residual: roomy
# enough for serialized round-trips, tight enough to catch construction bugs.
_MEMBERSHIP_TOL = 1e-6


def check_curvature(c: float) -> float:
    """Validate a curvature parameter (the manifold has curvature -c)."""
    c = float(c)
    if not math.isfinite(c) or c < MIN_CURVATURE:
        raise ValueError(f"curvature must satisfy c >= {MIN_CURVATURE}, got {c}")
    return c


@dataclass(frozen=True)
class LorentzPoint:
    """A point on the hyperboloid, split into space and time components."""

    space: np.ndarray
    time: float

    def __post_init__(self):
        object.__setattr__(self, "space", as_vector(self.space, name="space part"))
        object.__setattr__(self, "time", float(self.time))

    @property
    def dim(self) -> int:
        return self.space.shape[0]


@dataclass(frozen=True)
class TangentAtOrigin:
    """A tangent vector at the origin: Euclidean part ``enc`` times ``scale``."""

    enc: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "enc", as_vector(self.enc, name="tangent enc"))
        if not (self.scale > 0):
            raise ValueError(f"tangent scale must be positive, got {self.scale}")

    @property
    def vector(self) -> np.ndarray:
        return self.scale * self.enc


def origin(n: int, c: float) -> LorentzPoint:
    """The hyperboloid origin O = [0, 1/sqrt(c)]."""
    c = check_curvature(c)
    return LorentzPoint(np.zeros(n), 1.0 / math.sqrt(c))


def lorentz_inner(x: LorentzPoint, y: LorentzPoint) -> float:
    """Lorentzian inner product: space dot product minus time product."""
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    return float(np.dot(x.space, y.space) - x.time * y.time)


def hyperboloid_residual(x: LorentzPoint, c: float) -> float:
    """Scale-normalized membership residual |<x,x>_L + 1/c| / max(1, time^2)."""
    c = check_curvature(c)
    raw = abs(float(np.dot(x.space, x.space)) - x.time * x.time + 1.0 / c)
    return raw / max(1.0, x.time * x.time)


def _require_on_manifold(x: LorentzPoint, c: float, what: str) -> None:
    res = hyperboloid_residual(x, c)
    if res > _MEMBERSHIP_TOL or x.time <= 0:
        raise ValueError(
            f"{what}: point off the hyperboloid (normalized residual {res:.3e}, "
            f"time {x.time:.6g})"
        )


def _sinhc(t: float) -> float:
    """sinh(t)/t with the t -> 0 limit handled by Taylor series."""
    if t < 1e-4:
        t2 = t * t
        return 1.0 + t2 / 6.0 + t2 * t2 / 120.0
    return math.sinh(t) / t


def _asinhc(s: float) -> float:
    """asinh(s)/s with the s -> 0 limit handled by Taylor series."""
    if s < 1e-4:
        s2 = s * s
        return 1.0 - s2 / 6.0 + 3.0 * s2 * s2 / 40.0
    return math.asinh(s) / s


def exp_origin(u, c: float) -> LorentzPoint:
    """Exponential map at the origin.

    space = sinh(sqrt(c) r) / (sqrt(c) r) * v with v the effective tangent
    vector (scale * enc) and r = ||v||; time is recomputed from space.
    Accepts a :class:`TangentAtOrigin` or a plain array (scale 1).
    """
    c = check_curvature(c)
    v = u.vector if isinstance(u, TangentAtOrigin) else as_vector(u, name="tangent")
    r = float(np.linalg.norm(v))
    space = _sinhc(math.sqrt(c) * r) * v
    time = math.sqrt(1.0 / c + float(np.dot(space, space)))
    return LorentzPoint(space, time)


def log_origin(x: LorentzPoint, c: float) -> TangentAtOrigin:
    """Logarithmic map at the origin, inverse of :func:`exp_origin`.

    enc = asinh(s)/s * x_space with s = sqrt(c) ||x_space||, returned with
    scale 1.  Equals the arcosh form since -c <x, O>_L = sqrt(1 + s^2).
    """
    c = check_curvature(c)
    _require_on_manifold(x, c, "log_origin")
    s = math.sqrt(c) * float(np.linalg.norm(x.space))
    return TangentAtOrigin(_asinhc(s) * x.space, 1.0)


def geodesic_distance(x: LorentzPoint, y: LorentzPoint, c: float,
                      eps_clip: float = DEFAULT_EPS_CLIP) -> float:
    """(1/sqrt(c)) arcosh(max(-c <x,y>_L, 1 + eps_clip)).

    The clip keeps the arcosh argument strictly >= 1, so coincident points
    get the floor distance arcosh(1 + eps)/sqrt(c) instead of NaN.
    """
    c = check_curvature(c)
    _require_on_manifold(x, c, "geodesic_distance (first argument)")
    _require_on_manifold(y, c, "geodesic_distance (second argument)")
    arg = max(-c * lorentz_inner(x, y), 1.0 + eps_clip)
    return math.acosh(arg) / math.sqrt(c)


def pairwise_distance_matrix(space_x: np.ndarray, time_x: np.ndarray,
                             space_y: np.ndarray, time_y: np.ndarray,
                             c: float,
                             eps_clip: float = DEFAULT_EPS_CLIP) -> np.ndarray:
    """Pairwise geodesic distances from stacked space/time components."""
    c = check_curvature(c)
    beta = -c * (space_x @ space_y.T - np.outer(time_x, time_y))
    return np.arccosh(np.maximum(beta, 1.0 + eps_clip)) / math.sqrt(c)


def pairwise_distances(xs, ys, c: float,
                       eps_clip: float = DEFAULT_EPS_CLIP) -> np.ndarray:
    """Pairwise geodesic distances between two sequences of points."""
    c = check_curvature(c)
    xs = list(xs)
    ys = list(ys)
    dims = {p.dim for p in xs} | {p.dim for p in ys}
    if len(dims) != 1:
        raise ValueError(f"inconsistent point dimensions: {sorted(dims)}")
    for p in xs + ys:
        _require_on_manifold(p, c, "pairwise_distances")
    sx = np.stack([p.space for p in xs])
    sy = np.stack([p.space for p in ys])
    tx = np.array([p.time for p in xs])
    ty = np.array([p.time for p in ys])
    return pairwise_distance_matrix(sx, tx, sy, ty, c, eps_clip)


def volume_growth(r: float, n: int, c: float) -> float:
    """Volume-growth kernel sinh^(n-1)(sqrt(c) r), unnormalized."""
    c = check_curvature(c)
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    return math.sinh(math.sqrt(c) * r) ** (n - 1)


def lift_rows(m: np.ndarray, c: float, scale: float = 1.0):
    """Lift each row of ``m`` through the exponential map at the origin.

    Returns (space, time) arrays; ``scale`` plays the role of the tangent
    scale alpha.  Vectorized counterpart of mapping each row separately.
    """
    c = check_curvature(c)
    v = np.asarray(m, dtype=np.float64) * scale
    r = np.sqrt((v * v).sum(axis=1))
    factor = np.array([_sinhc(t) for t in math.sqrt(c) * r])
    space = factor[:, None] * v
    time = np.sqrt(1.0 / c + (space * space).sum(axis=1))
    return space, time


def _sinhc_deriv_over_r(r: float, a: float) -> float:
    """(d/dr sinh(a r)/r) / r = (a r cosh(a r) - sinh(a r)) / r^3."""
    t = a * r
    if t < 1e-4:
        return a ** 3 * (1.0 / 3.0 + t * t / 30.0)
    return (a * r * math.cosh(t) - math.sinh(t)) / r ** 3


def distance_gradient(x_tangent, y_tangent, c: float) -> np.ndarray:
    """Gradient of d(exp_O(u), exp_O(w)) with respect to u.

    Writes the arcosh argument as
    beta(u, w) = cosh(a r_u) cosh(a r_w) - (u . w) a^2 S(a r_u) S(a r_w)
    with a = sqrt(c), S(t) = sinh(t)/t, then differentiates
    d = arcosh(beta)/a by the chain rule.  All sinc-like factors keep their
    r -> 0 limits finite.  Undefined at coincident points (the clip floor),
    which raise.
    """
    c = check_curvature(c)
    u = x_tangent.vector if isinstance(x_tangent, TangentAtOrigin) else as_vector(x_tangent)
    w = y_tangent.vector if isinstance(y_tangent, TangentAtOrigin) else as_vector(y_tangent)
    if u.shape != w.shape:
        raise ValueError(f"tangent shape mismatch: {u.shape} vs {w.shape}")
    a = math.sqrt(c)
    ru = float(np.linalg.norm(u))
    rw = float(np.linalg.norm(w))
    cu, cw = math.cosh(a * ru), math.cosh(a * rw)
    sc_u = _sinhc(a * ru)  # sinh(a r_u) / (a r_u)
    sc_w = _sinhc(a * rw)
    dot = float(np.dot(u, w))
    beta = cu * cw - dot * a * a * sc_u * sc_w
    if beta <= 1.0 + 1e-12:
        raise ValueError(
            f"distance gradient undefined at (near-)coincident points (beta = {beta!r})"
        )
    grad_beta = (
        a * a * sc_u * cw * u
        - a * a * sc_u * sc_w * w
        - dot * a * sc_w * _sinhc_deriv_over_r(ru, a) * u
    )
    return grad_beta / (a * math.sqrt(beta * beta - 1.0))


def save_points_csv(points, c: float, path) -> None:
    """Serialize points as CSV rows ``c, time, space_1, ..., space_n``."""
    c = check_curvature(c)
    with open(path, "w", encoding="utf-8") as f:
        for p in points:
            vals = [c, p.time] + list(p.space)
            f.write(",".join(f"{v:.17g}" for v in vals) + "\n")


def load_points_csv(path):
    """Read points written by :func:`save_points_csv`, re-verifying membership.

    Returns (points, c).
    """
    points = []
    c = None
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            vals = [float(t) for t in line.strip().split(",")]
            row_c, time, space = vals[0], vals[1], np.array(vals[2:])
            if c is None:
                c = check_curvature(row_c)
            elif row_c != c:
                raise ValueError(f"mixed curvatures in {path}: {c} vs {row_c}")
            p = LorentzPoint(space, time)
            _require_on_manifold(p, c, f"load_points_csv({path})")
            points.append(p)
    return points, c
