"""Desk-scale geometric studies.

Two experiments:

* Tree embedding - embed a rooted b-ary tree into Euclidean space or the
  Lorentz hyperboloid by stress minimization, and compare distortions.
  Hyperbolic volume grows like sinh^(n-1)(sqrt(c) r), so deep hierarchies
  fit a 2-D hyperbolic plane far better than a 2-D Euclidean one; only the
  inequality between arms is asserted, never absolute values.
* Descent demo - minimize x^T A x with A = diag(1, kappa) once with plain
  gradient descent, once restricted to the unit circle via the oblique
  projection/tangent/retract pipeline.  The sphere restriction isotropizes
  the landscape, giving a near-straight descent path; the demo claims only
  this qualitative effect.

Both experiments are deterministic given their seed.  Stress gradients for
the Lorentz arm are evaluated in vectorized form (the per-pair formula is
identical to lorentz.distance_gradient, which the tests cross-check).
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
import numpy as np

from . import oblique
from .lorentz import _sinhc, _sinhc_deriv_over_r, check_curvature

__all__ = [
    "TreeSpec",
    "EmbeddingRun",
    "DescentRun",
    "tree_distance_matrix",
    "embed_tree",
    "descent_demo",
    "export_trajectories",
]


@dataclass(frozen=True)
class TreeSpec:
    branching: int = 2
    depth: int = 5
    edge_length: float = 1.0

    def __post_init__(self):
        if self.branching < 2:
            raise ValueError(f"branching must be >= 2, got {self.branching}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")


@dataclass
class EmbeddingRun:
    """Parameters and results of one tree-embedding arm."""

    space: str = "lorentz"  # "euclidean" or "lorentz"
    curvature: float = 1.0
    dim: int = 2
    steps: int = 3000
    step_size: float = 0.05
    seed: int = 0
    backtracking: bool = True
    final_distortion: Optional[float] = None
    worst_ratio: Optional[float] = None
    final_stress: Optional[float] = None


@dataclass
class DescentRun:
    """Parameters and results of the constrained-descent demo."""

    condition_number: float = 100.0
    tol: float = 1e-6
    step_size: Optional[float] = None  # default 1 / (2 * condition_number)
    seed: int = 0
    max_iters: int = 100_000
    iters_unconstrained: Optional[int] = None
    iters_oblique: Optional[int] = None
    converged_unconstrained: bool = False
    converged_oblique: bool = False
    trajectory_unconstrained: list = field(default_factory=list)  # (x, y, f)
    trajectory_oblique: list = field(default_factory=list)


def _build_tree(spec: TreeSpec) -> nx.Graph:
    g = nx.Graph()
    g.add_node(0)
    frontier = [0]
    next_id = 1
    for _ in range(spec.depth):
        new_frontier = []
        for parent in frontier:
            for _ in range(spec.branching):
                g.add_edge(parent, next_id)
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    return g


def tree_distance_matrix(spec: TreeSpec) -> np.ndarray:
    """Hop-count distances scaled by edge_length, for all node pairs."""
    g = _build_tree(spec)
    n = g.number_of_nodes()
    t = np.zeros((n, n))
    for src, lengths in nx.all_pairs_shortest_path_length(g):
        for dst, hops in lengths.items():
            t[src, dst] = spec.edge_length * hops
    return t


def _euclidean_distances(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _euclidean_stress_grad(x, t):
    d = _euclidean_distances(x)
    err = d - t
    np.fill_diagonal(err, 0.0)
    stress = 0.5 * float((err * err).sum())  # each unordered pair once
    safe = np.where(d > 1e-12, d, 1.0)
    coef = np.where(d > 1e-12, 2.0 * err / safe, 0.0)
    diff = x[:, None, :] - x[None, :, :]
    grad = (coef[:, :, None] * diff).sum(axis=1)
    return stress, grad


def _lorentz_parts(u, c):
    a = math.sqrt(c)
    r = np.sqrt((u * u).sum(axis=1))
    cosh = np.cosh(a * r)
    sc = np.array([_sinhc(t) for t in a * r])          # sinh(a r)/(a r)
    g = np.array([_sinhc_deriv_over_r(t, a) for t in r])
    return a, r, cosh, sc, g


def _lorentz_distances(u, c, eps_clip=1e-15):
    a, _, cosh, sc, _ = _lorentz_parts(u, c)
    dots = u @ u.T
    beta = np.outer(cosh, cosh) - dots * a * a * np.outer(sc, sc)
    return np.arccosh(np.maximum(beta, 1.0 + eps_clip)) / a


def _lorentz_stress_grad(u, t, c):
    a, _, cosh, sc, g = _lorentz_parts(u, c)
    dots = u @ u.T
    beta = np.outer(cosh, cosh) - dots * a * a * np.outer(sc, sc)
    clipped = np.maximum(beta, 1.0 + 1e-15)
    d = np.arccosh(clipped) / a
    err = d - t
    np.fill_diagonal(err, 0.0)
    stress = 0.5 * float((err * err).sum())
    # dD/dbeta = 1 / (a sqrt(beta^2 - 1)); zero out the (clipped) diagonal.
    denom = a * np.sqrt(np.maximum(clipped * clipped - 1.0, 1e-300))
    w = 2.0 * err / denom
    np.fill_diagonal(w, 0.0)
    # grad_i beta_ij = (a^2 sc_i cosh_j - a g_i dots_ij sc_j) u_i
    #                 - a^2 sc_i sc_j u_j
    coef_ui = a * a * sc * (w @ cosh) - a * g * ((w * dots) @ sc)
    grad = coef_ui[:, None] * u - (a * a * sc)[:, None] * ((w * sc[None, :]) @ u)
    return stress, grad


def _distortion(d: np.ndarray, t: np.ndarray):
    iu = np.triu_indices_from(t, k=1)
    ds, ts = d[iu], t[iu]
    mean_rel = float(np.mean(np.abs(ds - ts) / ts))
    with np.errstate(divide="ignore"):
        worst = float(np.max(np.maximum(ds / ts, ts / np.maximum(ds, 1e-300))))
    return mean_rel, worst


# Target distances are ramped up in phases so the layout untangles while
# still small; direct descent on the full-scale targets strands deep trees
# in crossed-branch local minima.
_EXPANSION_PHASES = (0.25, 0.5, 0.75, 1.0)


def embed_tree(spec: TreeSpec, run: EmbeddingRun) -> EmbeddingRun:
    """Minimize stress sum_(i<j) (d_space - d_tree)^2 by gradient descent.

    Node coordinates (ambient for Euclidean, tangent-at-origin for Lorentz)
    start from a seeded Gaussian.  The step budget is split evenly over a
    progressive-expansion schedule: each phase descends against scaled-down
    target distances, ending at the true targets.  With backtracking
    enabled the stress is non-increasing within a phase.  Deterministic
    given the seed.
    """
    if run.dim < 2:
        raise ValueError(f"embedding dim must be >= 2, got {run.dim}")
    if run.space not in ("euclidean", "lorentz"):
        raise ValueError(f"unknown space {run.space!r}")
    if run.space == "lorentz":
        check_curvature(run.curvature)
    t = tree_distance_matrix(spec)
    rng = np.random.default_rng(run.seed)
    x = rng.normal(scale=0.1, size=(t.shape[0], run.dim))

    def stress_grad(pts, targets):
        if run.space == "euclidean":
            return _euclidean_stress_grad(pts, targets)
        return _lorentz_stress_grad(pts, targets, run.curvature)

    def stress_only(pts, targets):
        if run.space == "euclidean":
            d = _euclidean_distances(pts)
        else:
            d = _lorentz_distances(pts, run.curvature)
        err = d - targets
        np.fill_diagonal(err, 0.0)
        return 0.5 * float((err * err).sum())

    steps_per_phase = -(-run.steps // len(_EXPANSION_PHASES))  # ceil; 0 stays 0
    stress = None
    for lam in _EXPANSION_PHASES:
        targets = lam * t
        step = run.step_size
        stress, grad = stress_grad(x, targets)
        for _ in range(steps_per_phase):
            if not math.isfinite(stress):
                raise ValueError(
                    "stress diverged to NaN/Inf; try a smaller step_size"
                )
            trial = x - step * grad
            trial_stress = stress_only(trial, targets)
            if run.backtracking:
                backoffs = 0
                while trial_stress > stress and backoffs < 40:
                    step *= 0.5
                    trial = x - step * grad
                    trial_stress = stress_only(trial, targets)
                    backoffs += 1
                if trial_stress > stress:
                    break  # no descent direction progress left
                if backoffs == 0:
                    step = min(step * 1.2, run.step_size)
            x = trial
            stress, grad = stress_grad(x, targets)

    d = (_euclidean_distances(x) if run.space == "euclidean"
         else _lorentz_distances(x, run.curvature))
    mean_rel, worst = _distortion(d, t)
    return dataclasses.replace(
        run, final_distortion=mean_rel, worst_ratio=worst, final_stress=stress
    )


def descent_demo(run: DescentRun) -> DescentRun:
    """Run both descent arms on f(x) = x^T diag(1, kappa) x.

    The unconstrained arm descends in the plane until f <= tol.  The
    oblique arm restricts the direction variable to the unit circle and
    descends h(w) = w^T A w via tangent projection + retraction until
    h - lambda_min <= tol (the restricted objective's minimum is
    lambda_min = 1, not 0).  Non-convergence at the iteration cap is
    flagged, not raised.
    """
    kappa = run.condition_number
    if kappa < 1:
        raise ValueError(f"condition number must be >= 1, got {kappa}")
    a_diag = np.array([1.0, kappa])
    step = run.step_size if run.step_size is not None else 1.0 / (2.0 * kappa)
    rng = np.random.default_rng(run.seed)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    x0 = 2.0 * np.array([math.cos(theta), math.sin(theta)])

    out = dataclasses.replace(run)

    # Unconstrained arm.
    x = x0.copy()
    traj = []
    iters = None
    for it in range(run.max_iters + 1):
        f = float(x @ (a_diag * x))
        traj.append((float(x[0]), float(x[1]), f))
        if f <= run.tol:
            iters = it
            break
        x = x - step * 2.0 * a_diag * x
    out.trajectory_unconstrained = traj
    out.converged_unconstrained = iters is not None
    out.iters_unconstrained = iters if iters is not None else run.max_iters

    # Oblique arm: direction variable on the unit circle.
    w = oblique.project(x0.reshape(2, 1))
    traj = []
    iters = None
    fmin = float(a_diag.min())
    for it in range(run.max_iters + 1):
        wv = w.inner[:, 0]
        f = float(wv @ (a_diag * wv))
        traj.append((float(wv[0]), float(wv[1]), f))
        if f - fmin <= run.tol:
            iters = it
            break
        grad = (2.0 * a_diag * wv).reshape(2, 1)
        tangent = oblique.tangent_project(w, -grad)
        w = oblique.retract(tangent, step)
    out.trajectory_oblique = traj
    out.converged_oblique = iters is not None
    out.iters_oblique = iters if iters is not None else run.max_iters
    return out


def export_trajectories(run: DescentRun, out_dir) -> list:
    """Write one ``iter,x,y,f`` CSV per arm into ``out_dir``.

    Returns the written paths.  Values round-trip at 17 significant digits.
    """
    if not os.path.isdir(out_dir):
        raise ValueError(f"output directory does not exist: {out_dir}")
    paths = []
    for name, traj in (
        ("descent_unconstrained.csv", run.trajectory_unconstrained),
        ("descent_oblique.csv", run.trajectory_oblique),
    ):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write("iter,x,y,f\n")
            for it, (x, y, fv) in enumerate(traj):
                f.write(f"{it},{x:.17g},{y:.17g},{fv:.17g}\n")
        paths.append(path)
    return paths
