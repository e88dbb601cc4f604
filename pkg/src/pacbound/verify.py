"""Monte Carlo checks of the stability and concentration inequalities.

These quantities are proved but never measured by the certificate
pipeline, so this module simulates them on synthetic data:

* estimate_beta          -- max ||W - W'|| over single-example
                            replacements, against the 2/(lam n) bound.
* check_weight_concentration -- the (1-delta) quantile of ||W - mean W||
                            against the 2B/(lam sqrt(n)) * (1 + ...) radius.
* check_vector_mcdiarmid -- norm deviations of a bounded-difference map
                            into R^16 with analytically known mean,
                            against sqrt(sum c_i^2) * (1 + sqrt(log(1/delta)/2)).

All Hilbert-space norms are evaluated in Gram coordinates over the union
of sampled points, so nothing depends on an explicit feature map.

The synthetic distribution is two spherical Gaussian clusters in R^4
with the label equal to the cluster; the separation parameter controls
the overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import concentration_radius, mcdiarmid_vector_bound
from .data import Dataset
from .kernel import KernelSpec, gram
from .svm import (OURS_LAMBDA, SvmFormulation, SmoConvergenceError,
                  span_norm_sq, train)


class VerifyError(ValueError):
    pass


@dataclass(frozen=True)
class StabilityProbe:
    n: int
    trials: int
    seed: int = 0
    d: int = 4
    separation: float = 2.0
    replacements: int = 1      # single-example substitutions per trial

    def __post_init__(self):
        if self.n < 2:
            raise VerifyError("probe needs n >= 2")
        if self.replacements != 1:
            raise VerifyError("each trial replaces exactly one example")


def two_cluster_sample(rng, n: int, d: int = 4, separation: float = 2.0):
    """Two spherical Gaussian clusters, label = cluster, iid rows."""
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    center = np.full(d, separation / (2.0 * math.sqrt(d)))
    x = rng.standard_normal((n, d)) + y[:, None] * center
    return x, y


def two_cluster_dataset(seed: int, n: int, d: int = 4,
                        separation: float = 2.0, name: str = "two-cluster") -> Dataset:
    rng = np.random.default_rng(seed)
    x, y = two_cluster_sample(rng, n, d, separation)
    return Dataset(x, y, name=name)


@dataclass(frozen=True)
class CheckReport:
    quantity: str
    measured: float
    bound: float
    trials: int
    seed: int
    passed: bool
    details: dict

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "measured": self.measured,
                "bound": self.bound, "trials": self.trials,
                "seed": self.seed, "pass": self.passed, **self.details}


def _train_coeffs(x, y, lam, kernel, kkt_tol):
    model = train(Dataset(x, y), kernel, SvmFormulation(OURS_LAMBDA, lam),
                  kkt_tol=kkt_tol)
    return model.alphas * y


def estimate_beta(probe: StabilityProbe, lam: float, kernel: KernelSpec,
                  kkt_tol: float = 1e-5) -> CheckReport:
    """Largest observed ||W - W'|| over single-example replacements.

    Any Monte Carlo estimate lower-bounds the true sensitivity
    coefficient, so only the direction measured <= 2/(lam n) is checked.
    """
    rng = np.random.default_rng(probe.seed)
    bound = 2.0 / (lam * probe.n)
    beta_hat = 0.0
    skipped = 0
    for _ in range(probe.trials):
        x, y = two_cluster_sample(rng, probe.n, probe.d, probe.separation)
        i = int(rng.integers(probe.n))
        xr, yr = two_cluster_sample(rng, 1, probe.d, probe.separation)
        try:
            a = _train_coeffs(x, y, lam, kernel, kkt_tol)
            x2 = x.copy()
            y2 = y.copy()
            x2[i] = xr[0]
            y2[i] = yr[0]
            a2 = _train_coeffs(x2, y2, lam, kernel, kkt_tol)
        except SmoConvergenceError:
            skipped += 1
            continue
        # coefficients of W - W' over the n + 1 distinct points
        pts = np.vstack([x, xr])
        coeffs = np.concatenate([a - a2, [0.0]])
        coeffs[i] = a[i]
        coeffs[probe.n] = -a2[i]
        d2 = span_norm_sq(coeffs, gram(kernel, pts))
        beta_hat = max(beta_hat, math.sqrt(max(d2, 0.0)))
    return CheckReport(
        quantity="hypothesis_sensitivity", measured=beta_hat, bound=bound,
        trials=probe.trials, seed=probe.seed, passed=beta_hat <= bound,
        details={"lambda": lam, "n": probe.n, "skipped": skipped,
                 "sigma_rbf": kernel.sigma_rbf})


def _quantile_index(trials: int, delta: float) -> int:
    """0-based order statistic for the empirical (1-delta) quantile."""
    return min(trials - 1, math.ceil((1.0 - delta) * trials) - 1)


def check_weight_concentration(probe: StabilityProbe, lam: float, delta: float,
                               kernel: KernelSpec | None = None,
                               kkt_tol: float = 1e-4) -> CheckReport:
    """Empirical (1-delta) quantile of ||W_t - mean_s W_s|| over iid
    training samples, against the concentration radius (B = 1).

    The expected weight is not available in closed form; the trial mean
    over the shared landmark set (the union of all sampled points, in
    Gram coordinates) stands in for it, and the assertion is slackened
    by twice the mean's own standard error.
    """
    if probe.trials < 200:
        raise VerifyError("need at least 200 trials for a stable quantile")
    if kernel is None:
        kernel = KernelSpec(2.0)
    rng = np.random.default_rng(probe.seed)
    n, T = probe.n, probe.trials

    xs = np.empty((T, n, probe.d))
    coeffs = np.empty((T, n))
    skipped = 0
    for t in range(T):
        while True:
            x, y = two_cluster_sample(rng, n, probe.d, probe.separation)
            try:
                a = _train_coeffs(x, y, lam, kernel, kkt_tol)
            except SmoConvergenceError:
                skipped += 1
                continue
            xs[t] = x
            coeffs[t] = a
            break

    # M[t, s] = <W_t, W_s>, batched over the stacked landmark set
    pts = xs.reshape(T * n, probe.d)
    pts_sq = (pts**2).sum(axis=1)[:, None]
    inv = 1.0 / (2.0 * kernel.sigma_rbf**2)
    u = np.empty((T, T, n))
    block = np.empty((T * n, n))
    for t in range(T):
        np.matmul(pts, xs[t].T, out=block)
        block *= -2.0
        block += pts_sq
        block += (xs[t] ** 2).sum(axis=1)[None, :]
        np.maximum(block, 0.0, out=block)
        block *= -inv
        np.exp(block, out=block)
        u[t] = (block @ coeffs[t]).reshape(T, n)
    M = np.einsum("tsk,sk->ts", u, coeffs)

    row_mean = M.mean(axis=1)
    grand_mean = float(M.mean())
    dev_sq = np.maximum(np.diag(M) - 2.0 * row_mean + grand_mean, 0.0)
    dev = np.sort(np.sqrt(dev_sq))
    quantile = float(dev[_quantile_index(T, delta)])

    radius = concentration_radius(n, lam, 1.0, delta)
    mean_se = math.sqrt(float(np.mean(dev_sq)) / T)
    slack = 2.0 * mean_se
    return CheckReport(
        quantity="weight_concentration", measured=quantile,
        bound=radius, trials=T, seed=probe.seed,
        passed=quantile <= radius + slack,
        details={"lambda": lam, "n": n, "delta": delta, "slack": slack,
                 "mean_deviation": float(np.mean(dev)), "skipped": skipped,
                 "sigma_rbf": kernel.sigma_rbf})


@dataclass(frozen=True)
class BoundedMeanMap:
    """Testbed map z -> (1/n) sum_i phihat(z_i) into R^dim.

    phihat(x) = cos(W x + b) / sqrt(dim) has norm at most 1, so the map
    has bounded differences c_i = 2/n, and its mean under a Gaussian
    mixture is available in closed form:
    E cos(w.X + b) = cos(w.c + b) exp(-||w||^2 / 2) for X ~ N(c, I).
    """
    d: int = 4
    dim: int = 16
    map_seed: int = 12345

    def weights(self):
        rng = np.random.default_rng(self.map_seed)
        w = rng.standard_normal((self.dim, self.d))
        b = rng.uniform(0.0, 2.0 * math.pi, self.dim)
        return w, b

    def feature(self, x: np.ndarray) -> np.ndarray:
        w, b = self.weights()
        return np.cos(x @ w.T + b) / math.sqrt(self.dim)

    def exact_mean(self, separation: float) -> np.ndarray:
        w, b = self.weights()
        center = np.full(self.d, separation / (2.0 * math.sqrt(self.d)))
        damp = np.exp(-0.5 * (w**2).sum(axis=1))
        plus = np.cos(w @ center + b) * damp
        minus = np.cos(-w @ center + b) * damp
        return 0.5 * (plus + minus) / math.sqrt(self.dim)


def check_vector_mcdiarmid(probe: StabilityProbe, delta: float,
                           f_spec: BoundedMeanMap | None = None) -> CheckReport:
    """Norm deviations of the bounded-difference testbed map against the
    vector bounded-differences bound, plus the mean-deviation check
    E||f - Ef|| <= sqrt(sum c_i^2)."""
    if f_spec is None:
        f_spec = BoundedMeanMap(d=probe.d)
    rng = np.random.default_rng(probe.seed)
    n, T = probe.n, probe.trials
    mean_vec = f_spec.exact_mean(probe.separation)
    sum_c_sq = n * (2.0 / n) ** 2

    devs = np.empty(T)
    for t in range(T):
        x, _ = two_cluster_sample(rng, n, probe.d, probe.separation)
        f = f_spec.feature(x).mean(axis=0)
        devs[t] = np.linalg.norm(f - mean_vec)
    devs.sort()

    quantile = float(devs[_quantile_index(T, delta)])
    bound = mcdiarmid_vector_bound(sum_c_sq, delta)
    mean_dev = float(devs.mean())
    mean_bound = math.sqrt(sum_c_sq)
    return CheckReport(
        quantity="vector_mcdiarmid", measured=quantile, bound=bound,
        trials=T, seed=probe.seed,
        passed=quantile <= bound and mean_dev <= mean_bound,
        details={"n": n, "delta": delta, "mean_deviation": mean_dev,
                 "mean_bound": mean_bound, "dim": f_spec.dim})
