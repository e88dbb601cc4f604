"""Shared test helpers: brute-force QP oracle and dataset builders."""

import numpy as np
import pytest

from pacbound import Dataset, KernelSpec, SvmModel
from pacbound.kernel import gram


def box_qp_oracle(Q, C, max_iters=1_000_000):
    """Projected gradient ascent for max sum(a) - 0.5 a'Qa over [0, C]^n.

    Independent of the SMO path: fixed step 1/L, stops at a fixpoint.
    """
    Q = np.asarray(Q, dtype=np.float64)
    n = Q.shape[0]
    L = float(np.linalg.eigvalsh(Q)[-1])
    eta = 1.0 / L
    a = np.zeros(n)
    for _ in range(max_iters):
        a_new = np.clip(a + eta * (1.0 - Q @ a), 0.0, C)
        # 1e-14 sits above ulp-level limit cycles yet keeps the dual gap
        # orders of magnitude below the 1e-6 comparison tolerance
        if np.max(np.abs(a_new - a)) < 1e-14:
            return a_new
        a = a_new
    return a


def dual_value(Q, a):
    return float(a.sum() - 0.5 * a @ Q @ a)


def dual_matrix(ds: Dataset, spec: KernelSpec):
    y = ds.labels
    return (y[:, None] * y[None, :]) * gram(spec, ds.features)


def random_dataset(seed, n, d=3, scale=1.0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d)) * scale
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    if np.all(y == y[0]):  # keep both classes present
        y[0] = -y[0]
    return Dataset(x, y, name=f"rand-{seed}")


def manual_model(features, labels, alphas, sigma_rbf=1.0, lam=1.0):
    """Assemble an SvmModel directly from its fields (no training)."""
    ds = Dataset(np.asarray(features, dtype=float), np.asarray(labels, dtype=float))
    alphas = np.asarray(alphas, dtype=float)
    return SvmModel(
        alphas=alphas, train=ds, kernel=KernelSpec(sigma_rbf),
        lambda_ours=lam, c_equiv=1.0 / (lam * ds.n), n_train=ds.n,
        dual_objective=float("nan"), kkt_residual=0.0)


@pytest.fixture
def two_points():
    return Dataset(np.array([[0.0, 0.0], [3.0, 4.0]]), np.array([1.0, -1.0]))
