"""Mirror geometries: norm/regularizer pairs, Bregman machinery, mirror steps.

Two geometries are supported:

  euclidean  F(w) = ||w||_2^2 / 2 over the ball ||w||_2 <= sqrt(2) B,
             so that feasibility is exactly F(w) <= B^2; F_max = B^2.
  entropy    F(w) = B sum_i w_i log(d w_i) + B^2 / e over
             {w >= 0, ||w||_1 <= B}; requires B >= 1 (otherwise F dips
             negative on the set); F_max = B^2 log(B d) + B^2 / e, the
             exact supremum, attained at a single-coordinate vertex.

Both regularizers are 1-strongly convex w.r.t. their primal norm (l2 and
l1 respectively), which is what the step-size and lambda formulas assume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EUCLIDEAN = "euclidean"
ENTROPY = "entropy"

# exp() argument cap for multiplicative updates; keeps extreme gradients
# from overflowing without changing any realistic step
_EXP_CLIP = 700.0

_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class MirrorSetup:
    """A geometry, its dimension, the norm budget B, and sup F over the set."""

    geometry: str
    dim: int
    budget: float
    f_max: float


def euclidean_setup(dim: int, budget: float) -> MirrorSetup:
    if dim < 1 or budget <= 0:
        raise ValueError("euclidean setup needs dim >= 1 and budget > 0")
    return MirrorSetup(EUCLIDEAN, dim, float(budget), float(budget) ** 2)


def entropy_setup(dim: int, budget: float) -> MirrorSetup:
    if dim < 1:
        raise ValueError("entropy setup needs dim >= 1")
    if budget < 1.0:
        raise ValueError(f"entropy geometry requires budget >= 1, got {budget}")
    b = float(budget)
    f_max = b * b * math.log(b * dim) + b * b / math.e
    return MirrorSetup(ENTROPY, dim, b, f_max)


def ball_radius(setup: MirrorSetup) -> float:
    """Euclidean constraint radius sqrt(2) B."""
    if setup.geometry != EUCLIDEAN:
        raise ValueError("ball_radius is a euclidean-only notion")
    return math.sqrt(2.0) * setup.budget


def is_feasible(setup: MirrorSetup, w: np.ndarray, tol: float = _FEAS_TOL) -> bool:
    w = np.asarray(w, dtype=float)
    if w.shape != (setup.dim,):
        return False
    if setup.geometry == EUCLIDEAN:
        r = ball_radius(setup)
        return float(np.linalg.norm(w)) <= r * (1.0 + tol)
    if np.min(w) < -tol * setup.budget:
        return False
    return float(np.sum(w)) <= setup.budget * (1.0 + tol)


def check_feasible(setup: MirrorSetup, w: np.ndarray) -> None:
    if not is_feasible(setup, w):
        raise ValueError(
            f"infeasible point for {setup.geometry} setup "
            f"(dim={setup.dim}, budget={setup.budget})"
        )


def regularizer_value(setup: MirrorSetup, w: np.ndarray) -> float:
    """F(w); nonnegative on the constraint set."""
    w = np.asarray(w, dtype=float)
    if setup.geometry == EUCLIDEAN:
        check_feasible(setup, w)
        return 0.5 * float(w @ w)
    if np.any(w < 0):
        raise ValueError("negative coordinate in entropy geometry")
    check_feasible(setup, w)
    b, d = setup.budget, setup.dim
    pos = w[w > 0]
    return b * float(np.sum(pos * np.log(d * pos))) + b * b / math.e


def regularizer_grad(setup: MirrorSetup, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if setup.geometry == EUCLIDEAN:
        return w.copy()
    if np.any(w <= 0):
        raise ValueError("gradient undefined at boundary of entropy geometry")
    return setup.budget * (np.log(setup.dim * w) + 1.0)


def dual_norm(setup: MirrorSetup, v: np.ndarray) -> float:
    """l2 for the euclidean geometry, l-infinity for the entropy (l1) one."""
    v = np.asarray(v, dtype=float)
    if setup.geometry == EUCLIDEAN:
        return float(np.linalg.norm(v))
    return float(np.max(np.abs(v))) if v.size else 0.0


def primal_norm(setup: MirrorSetup, v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    if setup.geometry == EUCLIDEAN:
        return float(np.linalg.norm(v))
    return float(np.sum(np.abs(v)))


def default_start(setup: MirrorSetup) -> np.ndarray:
    """Zero vector (euclidean) or the uniform vector B/d (entropy).

    The uniform start keeps every entropy coordinate live: multiplicative
    updates never revive a zeroed coordinate.
    """
    if setup.geometry == EUCLIDEAN:
        return np.zeros(setup.dim)
    return np.full(setup.dim, setup.budget / setup.dim)


def mirror_step(setup: MirrorSetup, w: np.ndarray, g: np.ndarray, eta: float) -> np.ndarray:
    """One mirror-descent step from w along gradient g with step size eta.

    euclidean: radial projection of w - eta g onto the ball.
    entropy:   multiplicative update w_i exp(-eta g_i / B), then rescale to
               l1 norm B if the update left the set (this conditional
               rescaling is the exact entropy-Bregman projection onto
               {w >= 0, ||w||_1 <= B}).
    """
    if eta <= 0:
        raise ValueError(f"step size must be positive, got {eta}")
    w = np.asarray(w, dtype=float)
    g = np.asarray(g, dtype=float)
    check_feasible(setup, w)
    if setup.geometry == EUCLIDEAN:
        v = w - eta * g
        r = float(np.linalg.norm(v))
        radius = ball_radius(setup)
        if r > radius:
            v *= radius / r
        return v
    h = w * np.exp(np.clip(-eta * g / setup.budget, -_EXP_CLIP, _EXP_CLIP))
    s = float(np.sum(h))
    if s > setup.budget:
        h *= setup.budget / s
    return h


def bregman_divergence(setup: MirrorSetup, w: np.ndarray, wp: np.ndarray) -> float:
    """F(w) - F(wp) - <grad F(wp), w - wp>; nonnegative by convexity.

    For the entropy geometry this is B times the generalized KL divergence,
    computed in that form directly (no cancellation of log terms); wp must
    be strictly positive.
    """
    w = np.asarray(w, dtype=float)
    wp = np.asarray(wp, dtype=float)
    check_feasible(setup, w)
    check_feasible(setup, wp)
    if setup.geometry == EUCLIDEAN:
        d = w - wp
        return 0.5 * float(d @ d)
    if np.any(wp <= 0):
        raise ValueError("gradient undefined at boundary of entropy geometry")
    if np.any(w < 0):
        raise ValueError("negative coordinate in entropy geometry")
    terms = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0) / wp), 0.0)
    return setup.budget * float(np.sum(terms) - np.sum(w) + np.sum(wp))


def random_feasible(
    setup: MirrorSetup, rng: np.random.Generator, positive: bool = False
) -> np.ndarray:
    """A random point of the constraint set; positive=True keeps coordinates
    strictly positive (entropy interior, where grad F exists)."""
    if setup.geometry == EUCLIDEAN:
        direction = rng.standard_normal(setup.dim)
        direction /= max(float(np.linalg.norm(direction)), 1e-300)
        radius = ball_radius(setup) * rng.uniform() ** (1.0 / setup.dim)
        return radius * direction
    raw = rng.exponential(size=setup.dim)
    raw /= float(np.sum(raw))
    scale = setup.budget * (rng.uniform(0.05, 1.0) if positive else rng.uniform())
    return scale * raw


def probe_strong_convexity(setup: MirrorSetup, trials: int, seed: int) -> float:
    """Minimum of D_F(w, w') - ||w - w'||^2 / 2 over random feasible pairs.

    The primal norm of the setup is used; 1-strong convexity of F says the
    minimum is nonnegative (zero identically in the euclidean case).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(trials):
        w = random_feasible(setup, rng)
        wp = random_feasible(setup, rng, positive=True)
        gap = bregman_divergence(setup, w, wp)
        dist = primal_norm(setup, w - wp)
        worst = min(worst, gap - 0.5 * dist * dist)
    return worst
