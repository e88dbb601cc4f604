"""Risk of the Gaussian-randomized classifier N(W, sigma2 * I).

For a single example (x, y) the randomized margin y<W + xi, phi(x)> is a
one-dimensional Gaussian with mean y*f(x) and standard deviation
sigma_noise * ||phi(x)||, so the per-example error probability has the
closed form Ftilde(y f(x) / (sigma_noise ||phi(x)||)) with
Ftilde = 1 - F and F the standard normal cdf.  The average risk over a
dataset is the mean of these terms; Monte Carlo sampling exists only as
an oracle to cross-check the closed form.

||phi(x)|| = sqrt(kappa(x, x)) is kept in the formulas even though it is
identically 1 for the RBF kernel; a non-normalized kernel trips an
assertion instead of silently producing a wrong risk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .data import Dataset
from .svm import SvmModel, margins


class RandRiskError(ValueError):
    pass


def gaussian_cdf(x):
    """Standard normal cdf via the complementary error function."""
    if np.isscalar(x):
        return float(ndtr(x))
    return ndtr(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class RandomizedClassifier:
    center: SvmModel
    noise_var: float  # sigma^2 of the Gaussian around the weight vector

    def __post_init__(self):
        if not self.noise_var > 0:
            raise RandRiskError("noise_var must be positive")
        if not self.center.kernel.normalized:
            raise AssertionError("randomized risk formulas assume kappa(x,x)=1")

    @property
    def noise_std(self) -> float:
        return float(np.sqrt(self.noise_var))


def average_risk_from_margins(signed_margins, noise_var) -> float:
    """mean Ftilde(y f(x) / sigma) given precomputed y*f(x) values.

    Ftilde(t) is evaluated as F(-t) to avoid cancellation at large margins.
    """
    sigma = float(np.sqrt(noise_var))
    return float(np.mean(ndtr(-np.asarray(signed_margins) / sigma)))


def average_risk(q: RandomizedClassifier, data: Dataset) -> float:
    """Closed-form average error of the randomized classifier on data."""
    if data.n == 0:
        raise RandRiskError("average risk over an empty dataset")
    ym = data.labels * margins(q.center, data.features)
    return average_risk_from_margins(ym, q.noise_var)


def _predict_draws(q: RandomizedClassifier, f_x: float, rng, draws: int) -> np.ndarray:
    # kappa(x, x) = 1 for the RBF kernel, so the noise scale is just sigma
    noisy = f_x + q.noise_std * rng.standard_normal(draws)
    return np.where(noisy > 0.0, 1.0, -1.0)


def sample_predict(q: RandomizedClassifier, x, rng_seed) -> int:
    """One randomized prediction; every call uses a fresh weight draw."""
    f_x = float(margins(q.center, np.asarray(x, dtype=np.float64)[None, :])[0])
    rng = np.random.default_rng(rng_seed)
    return int(_predict_draws(q, f_x, rng, 1)[0])


def mc_average_risk(q: RandomizedClassifier, data: Dataset, draws: int,
                    rng_seed) -> tuple[float, float]:
    """Monte Carlo estimate of the average risk plus its binomial
    standard error.  One seed-derived stream per row, so the result does
    not depend on evaluation order."""
    if draws < 1:
        raise RandRiskError("draws must be >= 1")
    f = margins(q.center, data.features)
    streams = np.random.SeedSequence(rng_seed).spawn(data.n)
    errors = 0
    for i in range(data.n):
        rng = np.random.default_rng(streams[i])
        preds = _predict_draws(q, float(f[i]), rng, draws)
        errors += int(np.count_nonzero(preds != data.labels[i]))
    total = data.n * draws
    p_hat = errors / total
    std_err = float(np.sqrt(p_hat * (1.0 - p_hat) / total))
    return p_hat, std_err
