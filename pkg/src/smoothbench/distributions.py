"""Hard distributions with exact samplers, closed-form risks, and exact ERMs.

Three lower-bound families over basis-vector designs, plus the synthetic
generators the harness uses for fast-rate, sparse, and ridge-regime runs.
All expose the same duck-typed surface: .sample(n, seed) -> Dataset,
.true_risk(w), .l_star, .w_star, .loss, .x_dual_bound(geometry).

Family overview (d standard basis vectors, Y conditioned on X = e_i):

  absolute_separable  d = 2 n_design, Y = r_i / sqrt(n_design) with hidden
                      signs r; absolute loss; any sample reveals at most
                      n of the 2n signs, so every learner carries risk
                      >= 1/(2 sqrt(n)). Reference risk L* = 0.
  gaussian_squared    d = ceil(sqrt(n)/sigma), Y ~ Normal(r_i/(2 sqrt(d)),
                      sigma); plain squared loss; L* = sigma^2 and
                      L(w) = sigma^2 + ||w - w*||^2 / d exactly.
  onedim_quadlin      scalar X in {0, 1}, P(X=1) = q, Y|X=1 = +1 with
                      probability p = 1/2 + 0.2/sqrt(q n); quadratic-then-
                      linear loss on w in [-1, 1]; L* from a 1-d oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .batch import Dataset
from .losses import (
    LossSpec,
    make_absolute,
    make_piecewise_quadlin,
    make_squared,
    make_squared_unhalved,
)

ABSOLUTE_SEPARABLE = "absolute_separable"
GAUSSIAN_SQUARED = "gaussian_squared"
ONEDIM_QUADLIN = "onedim_quadlin"


def golden_section(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Minimize a unimodal scalar function on [lo, hi] to bracket width tol."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class HardDistribution:
    kind: str
    dim: int
    loss: LossSpec
    w_star: np.ndarray
    l_star: float
    signs: np.ndarray | None = None
    sigma: float | None = None
    n_design: int | None = None
    q: float | None = None
    p: float | None = None

    def x_dual_bound(self, geometry: str) -> float:
        # basis vectors (and the scalar {0,1} design) have unit dual norm
        return 1.0

    def sample(self, n: int, seed: int) -> Dataset:
        return sample(self, n, seed)

    def true_risk(self, w: np.ndarray) -> float:
        return true_risk(self, w)


def hard_absolute(n_design: int, seed: int) -> HardDistribution:
    """Separable absolute-loss family; the hidden-sign vector is drawn once
    from the seed and then treated as fixed by nature."""
    if n_design < 1:
        raise ValueError("n_design must be >= 1")
    d = 2 * n_design
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=d)
    w_star = signs / math.sqrt(n_design)
    return HardDistribution(
        kind=ABSOLUTE_SEPARABLE,
        dim=d,
        loss=make_absolute(),
        w_star=w_star,
        l_star=0.0,
        signs=signs,
        n_design=n_design,
    )


def hard_gaussian(
    n_design: int, sigma: float, seed: int, dim: int | None = None
) -> HardDistribution:
    """Noisy orthogonal-design squared-loss family.

    dim defaults to ceil(sqrt(n_design)/sigma); sigma = 0 is allowed only
    with an explicit dim (the default would be undefined).
    """
    if n_design < 1:
        raise ValueError("n_design must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if dim is None:
        if sigma == 0:
            raise ValueError("sigma = 0 needs an explicit dim")
        dim = math.ceil(math.sqrt(n_design) / sigma)
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=dim)
    w_star = signs / (2.0 * math.sqrt(dim))
    return HardDistribution(
        kind=GAUSSIAN_SQUARED,
        dim=dim,
        loss=make_squared_unhalved(),
        w_star=w_star,
        l_star=sigma**2,
        signs=signs,
        sigma=sigma,
        n_design=n_design,
    )


def hard_quadlin(n_design: int, q: float) -> HardDistribution:
    """Scalar quadratic-then-linear family with label bias p = 1/2
    + 0.2/sqrt(q n). The population minimizer and L* come from a golden-
    section oracle on the exact risk (the closed form 3/2 - 1/(2p) is
    cross-checked in tests, not assumed)."""
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    if n_design < 1:
        raise ValueError("n_design must be >= 1")
    p = 0.5 + 0.2 / math.sqrt(q * n_design)
    if p > 1:
        raise ValueError(f"bias p = {p:.4f} > 1; increase q*n (needs q n >= 0.16)")
    loss = make_piecewise_quadlin()

    def risk(w):
        return q * (
            p * float(loss.value(w, 1.0)) + (1.0 - p) * float(loss.value(w, -1.0))
        )

    w_opt = golden_section(risk, -1.0, 1.0, tol=1e-12)
    return HardDistribution(
        kind=ONEDIM_QUADLIN,
        dim=1,
        loss=loss,
        w_star=np.array([w_opt]),
        l_star=risk(w_opt),
        n_design=n_design,
        q=q,
        p=p,
    )


def quadlin_minimizer_closed_form(p: float) -> float:
    """The candidate population minimizer 3/2 - 1/(2p) for label bias p."""
    return 1.5 - 1.0 / (2.0 * p)


def sample(dist: HardDistribution, n: int, seed: int) -> Dataset:
    """n i.i.d. draws; deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    tag = f"{dist.kind}:seed={seed}"
    if dist.kind == ABSOLUTE_SEPARABLE:
        idx = rng.integers(dist.dim, size=n)
        ys = dist.signs[idx] / math.sqrt(dist.n_design)
        return Dataset(ys=ys, basis_idx=idx, dim=dist.dim, provenance=tag)
    if dist.kind == GAUSSIAN_SQUARED:
        idx = rng.integers(dist.dim, size=n)
        means = dist.signs[idx] / (2.0 * math.sqrt(dist.dim))
        ys = means if dist.sigma == 0 else rng.normal(means, dist.sigma)
        return Dataset(ys=ys, basis_idx=idx, dim=dist.dim, provenance=tag)
    if dist.kind == ONEDIM_QUADLIN:
        xs = (rng.random(n) < dist.q).astype(float)
        flips = rng.random(n)
        ys = np.where(xs > 0, np.where(flips < dist.p, 1.0, -1.0), 0.0)
        return Dataset(ys=ys, xs=xs[:, None], provenance=tag)
    raise ValueError(f"unknown distribution kind: {dist.kind}")


def true_risk(dist: HardDistribution, w: np.ndarray) -> float:
    """Exact risk of a fixed predictor; no sampling."""
    w = np.asarray(w, dtype=float)
    if dist.kind == ABSOLUTE_SEPARABLE:
        targets = dist.signs / math.sqrt(dist.n_design)
        return float(np.mean(np.abs(w - targets)))
    if dist.kind == GAUSSIAN_SQUARED:
        diff = w - dist.w_star
        return dist.sigma**2 + float(diff @ diff) / dist.dim
    if dist.kind == ONEDIM_QUADLIN:
        wv = float(w[0]) if w.ndim else float(w)
        return dist.q * (
            dist.p * float(dist.loss.value(wv, 1.0))
            + (1.0 - dist.p) * float(dist.loss.value(wv, -1.0))
        )
    raise ValueError(f"unknown distribution kind: {dist.kind}")


def erm_exact(dist: HardDistribution, data: Dataset) -> np.ndarray:
    """An exact empirical minimizer, specialized per family.

    absolute_separable: match every seen coordinate (observations agree),
    leave unseen coordinates at zero — the minimal-support minimizer, with
    empirical loss exactly 0 and norm at most 1.
    gaussian_squared: per-coordinate sample means, radially corrected by a
    Lagrangian bisection when the unit-ball constraint binds.
    onedim_quadlin: golden-section search on the empirical objective over
    [-1, 1].
    """
    if data.n < 1:
        raise ValueError("empty dataset")
    if dist.kind == ABSOLUTE_SEPARABLE:
        w = np.zeros(dist.dim)
        w[data.basis_idx] = data.ys
        return w
    if dist.kind == GAUSSIAN_SQUARED:
        counts = np.bincount(data.basis_idx, minlength=dist.dim).astype(float)
        sums = np.bincount(data.basis_idx, weights=data.ys, minlength=dist.dim)
        ybar = np.divide(sums, counts, out=np.zeros(dist.dim), where=counts > 0)
        if float(np.linalg.norm(ybar)) <= 1.0:
            return ybar
        n = float(data.n)

        def norm_at(mu):
            return float(np.linalg.norm(counts * ybar / (counts + mu * n)))

        hi = 1.0
        while norm_at(hi) > 1.0:
            hi *= 2.0
        lo = 0.0
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if norm_at(mid) > 1.0:
                lo = mid
            else:
                hi = mid
        mu = 0.5 * (lo + hi)
        return counts * ybar / (counts + mu * n)
    if dist.kind == ONEDIM_QUADLIN:
        on = data.xs[:, 0] > 0
        n_pos = float(np.sum(data.ys[on] > 0))
        n_neg = float(np.sum(on) - n_pos)
        n = float(data.n)

        def emp(w):
            return (
                n_pos * float(dist.loss.value(w, 1.0))
                + n_neg * float(dist.loss.value(w, -1.0))
            ) / n

        return np.array([golden_section(emp, -1.0, 1.0, tol=1e-10)])
    raise ValueError(f"unknown distribution kind: {dist.kind}")


def lower_bound_value(dist: HardDistribution, n: int) -> float:
    """The theoretical risk floor quoted for each family, for report columns."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if dist.kind == ABSOLUTE_SEPARABLE:
        return 0.5 / math.sqrt(n)
    if dist.kind == GAUSSIAN_SQUARED:
        return math.sqrt(dist.l_star / n)
    if dist.kind == ONEDIM_QUADLIN:
        return math.sqrt(0.32 * dist.l_star / n)
    raise ValueError(f"unknown distribution kind: {dist.kind}")


@dataclass(frozen=True)
class SeparableSynthetic:
    """Noiseless orthogonal design: X uniform over basis vectors,
    y = <w*, x> exactly, half-squared loss, so L* = 0 and
    L(w) = ||w - w*||^2 / (2 d)."""

    dim: int
    w_star: np.ndarray
    loss: LossSpec
    l_star: float = 0.0
    kind: str = "separable_smooth"

    def x_dual_bound(self, geometry: str) -> float:
        return 1.0

    def sample(self, n: int, seed: int) -> Dataset:
        rng = np.random.default_rng(seed)
        idx = rng.integers(self.dim, size=n)
        return Dataset(
            ys=self.w_star[idx],
            basis_idx=idx,
            dim=self.dim,
            provenance=f"{self.kind}:seed={seed}",
        )

    def true_risk(self, w: np.ndarray) -> float:
        diff = np.asarray(w, dtype=float) - self.w_star
        return 0.5 * float(diff @ diff) / self.dim


def separable_synthetic(dim: int, seed: int) -> SeparableSynthetic:
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(dim)
    w /= float(np.linalg.norm(w))
    return SeparableSynthetic(dim=dim, w_star=w, loss=make_squared())


@dataclass(frozen=True)
class SparseGenerator:
    """Sparse linear target over mutually uncorrelated sign features.

    X has i.i.d. +-1 coordinates (so ||x||_inf = 1 and all features are
    uncorrelated with unit variance), y = <w0, x> plus optional bounded
    uniform noise; w0 has k nonzeros scaled so |y| <= 1 and
    ||w0||_1 <= 2 sqrt(k). Doubled samples append the negated features so
    nonnegative weight vectors can represent signed ones.
    """

    dim0: int
    k: int
    w0: np.ndarray
    noise: float
    loss: LossSpec
    kind: str = "sparse_linear"

    @property
    def l_star(self) -> float:
        # risk of w0 itself under half-squared loss
        return 0.5 * self.noise**2 / 3.0

    @property
    def w_star(self) -> np.ndarray:
        return self.w0

    def x_dual_bound(self, geometry: str) -> float:
        if geometry == "entropy":
            return 1.0
        return math.sqrt(self.dim0)

    def _draw(self, n: int, seed: int):
        rng = np.random.default_rng(seed)
        xs = rng.choice([-1.0, 1.0], size=(n, self.dim0))
        ys = xs @ self.w0
        if self.noise > 0:
            ys = ys + rng.uniform(-self.noise, self.noise, size=n)
        return xs, ys

    def sample_signed(self, n: int, seed: int) -> Dataset:
        xs, ys = self._draw(n, seed)
        return Dataset(ys=ys, xs=xs, provenance=f"{self.kind}:seed={seed}")

    def sample_doubled(self, n: int, seed: int) -> Dataset:
        xs, ys = self._draw(n, seed)
        return Dataset(
            ys=ys,
            xs=np.hstack([xs, -xs]),
            provenance=f"{self.kind}:doubled:seed={seed}",
        )

    def sample(self, n: int, seed: int) -> Dataset:
        return self.sample_doubled(n, seed)

    def fold(self, w_doubled: np.ndarray) -> np.ndarray:
        """Collapse a doubled-feature weight vector back to signed space."""
        return np.asarray(w_doubled)[: self.dim0] - np.asarray(w_doubled)[self.dim0 :]

    def true_risk_signed(self, w: np.ndarray) -> float:
        diff = np.asarray(w, dtype=float) - self.w0
        return 0.5 * (float(diff @ diff) + self.noise**2 / 3.0)

    def true_risk(self, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=float)
        if w.shape[0] == 2 * self.dim0:
            return self.true_risk_signed(self.fold(w))
        return self.true_risk_signed(w)


def sparse_generator(dim0: int, k: int, seed: int, noise: float = 0.0) -> SparseGenerator:
    if not 1 <= k <= dim0:
        raise ValueError(f"invalid sparsity: k={k}, dim={dim0}")
    if not 0 <= noise < 1:
        raise ValueError("noise half-width must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    support = rng.choice(dim0, size=k, replace=False)
    w0 = np.zeros(dim0)
    w0[support] = rng.choice([-1.0, 1.0], size=k) * (1.0 - noise) / k
    return SparseGenerator(dim0=dim0, k=k, w0=w0, noise=noise, loss=make_squared())


@dataclass(frozen=True)
class RegimeGenerator:
    """Isotropic Gaussian design for the ridge regime study.

    X ~ Normal(0, (x_scale^2 / d) I) so E||X||^2 = x_scale^2;
    y = <w*, x> + Normal(0, sigma^2) with ||w*|| = 1; plain squared loss,
    so L* = sigma^2 and the excess of any w is (x_scale^2/d) ||w - w*||^2.
    """

    dim: int
    x_scale: float
    sigma: float
    w_star: np.ndarray
    loss: LossSpec
    kind: str = "gaussian_regime"

    @property
    def l_star(self) -> float:
        return self.sigma**2

    def sample(self, n: int, seed: int) -> Dataset:
        rng = np.random.default_rng(seed)
        xs = rng.normal(0.0, self.x_scale / math.sqrt(self.dim), size=(n, self.dim))
        ys = xs @ self.w_star + rng.normal(0.0, self.sigma, size=n)
        return Dataset(ys=ys, xs=xs, provenance=f"{self.kind}:seed={seed}")

    def true_risk(self, w: np.ndarray) -> float:
        diff = np.asarray(w, dtype=float) - self.w_star
        return self.sigma**2 + (self.x_scale**2 / self.dim) * float(diff @ diff)

    def x_dual_bound(self, geometry: str) -> float:
        raise ValueError("gaussian design has no a-priori x bound; use the sample")

    def envelope(self, n: int) -> tuple[float, str]:
        """min(B^2, B^2/n + B sigma/sqrt(n), d sigma^2/n) and the active term."""
        b2 = self.x_scale**2
        terms = {
            "random": b2,
            "low_noise": b2 / n + self.x_scale * self.sigma / math.sqrt(n),
            "asymptotic": self.dim * self.sigma**2 / n,
        }
        name = min(terms, key=terms.get)
        return terms[name], name


def regime_generator(dim: int, x_scale: float, sigma: float, seed: int) -> RegimeGenerator:
    if dim < 1 or x_scale <= 0 or sigma < 0:
        raise ValueError("regime generator needs dim >= 1, x_scale > 0, sigma >= 0")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(dim)
    w /= float(np.linalg.norm(w))
    return RegimeGenerator(dim=dim, x_scale=x_scale, sigma=sigma, w_star=w, loss=make_squared_unhalved())
