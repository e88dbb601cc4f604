"""RBF kernel evaluation and the width / regularization heuristics.

The kernel is kappa(x, y) = exp(-||x - y||^2 / (2 sigma_rbf^2)), so the
diagonal is exactly 1 and the feature vectors have unit norm.  The two
heuristics used to anchor the hyperparameter grid are

* sigma0 -- the (lower) median of all pairwise Euclidean distances, and
* C0     -- the reciprocal of the empirical feature-space variance
            1 - mean(G) under the sigma0-width kernel.

Gram matrices are assembled row by row through ``kernel_row`` so that a
cached matrix, a lazily computed row and a scalar ``rbf_eval`` all agree
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    sigma_rbf: float

    def __post_init__(self):
        if not self.sigma_rbf > 0:
            raise KernelError("sigma_rbf must be positive")

    @property
    def normalized(self) -> bool:
        # kappa(x, x) = 1 for every x; bound modules rely on this (B = 1)
        return True


def rbf_eval(spec: KernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise KernelError(f"dimension mismatch: {x.shape} vs {y.shape}")
    d2 = np.sum((x - y) ** 2)
    return float(np.exp(-d2 / (2.0 * spec.sigma_rbf**2)))


def kernel_row(spec: KernelSpec, X: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One kernel row kappa(X[j], x); the shared code path for gram()."""
    d2 = ((X - x) ** 2).sum(axis=1)
    return np.exp(-d2 / (2.0 * spec.sigma_rbf**2))


def gram(spec: KernelSpec, X) -> np.ndarray:
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    g = np.empty((n, n))
    for i in range(n):
        g[i] = kernel_row(spec, X, X[i])
    return g


def cross_gram(spec: KernelSpec, A, B) -> np.ndarray:
    """kappa(A[i], B[j]) as an (len(A), len(B)) matrix."""
    A = np.asarray(A, dtype=np.float64)
    B = np.ascontiguousarray(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise KernelError("dimension mismatch between point sets")
    out = np.empty((A.shape[0], B.shape[0]))
    for i in range(A.shape[0]):
        out[i] = kernel_row(spec, B, A[i])
    return out


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    """All ||x_i - x_j|| for i < j, in lexicographic pair order."""
    n = X.shape[0]
    chunks = []
    for i in range(n - 1):
        d2 = ((X[i + 1:] - X[i]) ** 2).sum(axis=1)
        chunks.append(np.sqrt(d2))
    return np.concatenate(chunks) if chunks else np.empty(0)


def median_heuristic(X, max_rows: int = 20000, seed: int = 0) -> float:
    """Lower median of the pairwise Euclidean distances.

    For n > max_rows the rows are subsampled with the given seed; the
    heuristic aims at a good width, not an exact order statistic.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise KernelError("median heuristic needs at least 2 rows")
    if n > max_rows:
        idx = np.random.default_rng(seed).choice(n, size=max_rows, replace=False)
        X = X[np.sort(idx)]
    d = np.sort(pairwise_distances(X))
    sigma0 = float(d[(len(d) - 1) // 2])  # lower median for even counts
    if sigma0 <= 0.0:
        raise KernelError("all points identical; median distance is 0")
    return sigma0


def c0_heuristic(spec: KernelSpec, X) -> float:
    """1 / Var_phi with Var_phi = mean kappa(x,x) - mean(G) = 1 - mean(G)."""
    g = gram(spec, X)
    var_phi = 1.0 - float(g.mean())
    if var_phi <= 1e-12:
        raise KernelError("feature-space variance is zero (coincident points)")
    return 1.0 / var_phi
