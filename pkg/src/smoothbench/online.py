"""Online mirror descent: game loop, theory step sizes, regret accounting.

The game is the standard n-round protocol: the player reveals w_i, the
adversary answers with an instance z_i = (x_i, y_i), and the player pays
phi(<w_i, x_i>, y_i). Gradients of the round objective are analytic,
phi'(<w, x>, y) x, never finite differences, so runs are bit-reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import MirrorSetup, check_feasible, default_start, mirror_step
from .losses import LossSpec

FIXED = "fixed_sequence"
IID = "iid_sampler"
ADAPTIVE = "adaptive"


def stepsize_for(smoothness_H: float, f_max: float, n: int, lbar: float) -> float:
    """eta = 1 / (H F + sqrt(H^2 F^2 + H F n Lbar)), with F = sup of the
    regularizer over the set and Lbar a bound on the comparator's average
    loss in hindsight."""
    _check_formula_args(smoothness_H, f_max, n, lbar)
    hf = smoothness_H * f_max
    return 1.0 / (hf + math.sqrt(hf * hf + hf * n * lbar))


def regret_bound(smoothness_H: float, f_max: float, n: int, lbar: float) -> float:
    """Average-regret guarantee 4 H F / n + 2 sqrt(H F Lbar / n) for mirror
    descent run at stepsize_for(H, F, n, Lbar)."""
    _check_formula_args(smoothness_H, f_max, n, lbar)
    hf = smoothness_H * f_max
    return 4.0 * hf / n + 2.0 * math.sqrt(hf * lbar / n)


def _check_formula_args(smoothness_H, f_max, n, lbar) -> None:
    if smoothness_H <= 0 or f_max <= 0:
        raise ValueError("smoothness and regularizer bound must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if lbar < 0:
        raise ValueError("lbar must be nonnegative")


def linear_smoothness(loss: LossSpec, x_dual_bound: float) -> float:
    """Smoothness of w -> phi(<w, x>, y) w.r.t. the primal norm, given a
    bound on ||x|| in the dual norm: H_phi * bound^2."""
    return loss.smoothness_H * x_dual_bound**2


@dataclass(frozen=True)
class InstanceStream:
    """Per-round instance supplier.

    fixed_sequence: xs/ys arrays consumed in order.
    iid_sampler:    sampler(rng, n) -> (xs, ys) drawn once per run from a
                    generator seeded with `seed`; reruns are bit-identical.
    adaptive:       callback(i, w_i) -> (x, y) sees only the current iterate
                    (never the RNG state), so adversaries stay reproducible.
    """

    mode: str
    length: int
    xs: np.ndarray | None = None
    ys: np.ndarray | None = None
    sampler: Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray]] | None = None
    seed: int | None = None
    callback: Callable[[int, np.ndarray], tuple[np.ndarray, float]] | None = None


def fixed_stream(xs: np.ndarray, ys: np.ndarray) -> InstanceStream:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 2 or ys.ndim != 1 or xs.shape[0] != ys.shape[0]:
        raise ValueError("fixed stream needs xs of shape (n, d) and ys of shape (n,)")
    if xs.shape[0] < 1:
        raise ValueError("empty stream")
    return InstanceStream(FIXED, xs.shape[0], xs=xs, ys=ys)


def iid_stream(sampler, length: int, seed: int) -> InstanceStream:
    if length < 1:
        raise ValueError("stream length must be >= 1")
    return InstanceStream(IID, length, sampler=sampler, seed=seed)


def adaptive_stream(callback, length: int) -> InstanceStream:
    if length < 1:
        raise ValueError("stream length must be >= 1")
    return InstanceStream(ADAPTIVE, length, callback=callback)


@dataclass
class OnlineTrace:
    """Per-round record of one mirror-descent run.

    iterates[i] is the vector that played round i (w_1 .. w_n; the
    post-final update is not stored), losses[i] the loss it incurred.
    """

    iterates: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    losses: np.ndarray
    setup: MirrorSetup
    loss: LossSpec
    eta: float

    @property
    def n(self) -> int:
        return self.iterates.shape[0]

    def to_json(self) -> str:
        """JSON debug dump: {"geometry", "loss", "eta", "rounds": [
        {"w": [...], "x": [...], "y": float, "loss": float}, ...]}."""
        rounds = [
            {
                "w": self.iterates[i].tolist(),
                "x": self.xs[i].tolist(),
                "y": float(self.ys[i]),
                "loss": float(self.losses[i]),
            }
            for i in range(self.n)
        ]
        return json.dumps(
            {
                "geometry": self.setup.geometry,
                "loss": self.loss.name,
                "eta": self.eta,
                "rounds": rounds,
            }
        )


def run_mirror_descent(
    setup: MirrorSetup,
    loss: LossSpec,
    stream: InstanceStream,
    eta: float,
    w_start: np.ndarray | None = None,
) -> OnlineTrace:
    """Play the stream with mirror descent at fixed step size eta.

    w_{i+1} depends only on (w_i, z_i, eta); the trace is deterministic
    given the stream and the start point (default: geometry's start).
    """
    if eta <= 0:
        raise ValueError(f"step size must be positive, got {eta}")
    w = default_start(setup) if w_start is None else np.asarray(w_start, dtype=float).copy()
    check_feasible(setup, w)

    n, d = stream.length, setup.dim
    if stream.mode == FIXED:
        xs, ys = stream.xs, stream.ys
        if xs.shape[0] < n:
            raise ValueError("stream exhausted before n rounds")
        if xs.shape[1] != d:
            raise ValueError(f"stream dimension {xs.shape[1]} != setup dimension {d}")
    elif stream.mode == IID:
        rng = np.random.default_rng(stream.seed)
        xs, ys = stream.sampler(rng, n)
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.shape != (n, d) or ys.shape != (n,):
            raise ValueError("sampler returned arrays of the wrong shape")
    elif stream.mode == ADAPTIVE:
        xs = np.empty((n, d))
        ys = np.empty(n)
    else:
        raise ValueError(f"unknown stream mode: {stream.mode}")

    iterates = np.empty((n, d))
    losses = np.empty(n)
    for i in range(n):
        if stream.mode == ADAPTIVE:
            x, y = stream.callback(i, w.copy())
            x = np.asarray(x, dtype=float)
            xs[i] = x
            ys[i] = y
        else:
            x, y = xs[i], ys[i]
        pred = float(x @ w)
        iterates[i] = w
        losses[i] = float(loss.value(pred, y))
        g = float(loss.derivative(pred, y)) * x
        w = mirror_step(setup, w, g, eta)
    return OnlineTrace(iterates, xs, ys, losses, setup, loss, eta)


def average_regret(trace: OnlineTrace, w_star: np.ndarray) -> float:
    """Player's average loss minus the fixed comparator's on the same
    instances; may be negative."""
    w_star = np.asarray(w_star, dtype=float)
    try:
        check_feasible(trace.setup, w_star)
    except ValueError as exc:
        raise ValueError(f"infeasible comparator: {exc}") from exc
    comparator = float(np.mean(trace.loss.value(trace.xs @ w_star, trace.ys)))
    return float(np.mean(trace.losses)) - comparator


def hindsight_average_loss(trace: OnlineTrace, w: np.ndarray) -> float:
    """Average loss of a fixed vector on the realized instance sequence."""
    w = np.asarray(w, dtype=float)
    return float(np.mean(trace.loss.value(trace.xs @ w, trace.ys)))


def averaged_iterate(trace: OnlineTrace) -> np.ndarray:
    """Coordinate-wise mean of the played iterates (feasible by convexity)."""
    if trace.n == 0:
        raise ValueError("empty trace")
    return trace.iterates.mean(axis=0)
