"""Offset-free soft-margin RBF SVM trained by SMO.

The primal regularizes (lambda/2)||w||^2 plus the mean hinge loss; its
dual is

    max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j kappa(x_i, x_j)
    s.t.   0 <= a_i <= C,          C = 1/(lambda * n)

with box constraints only -- no equality constraint, because there is no
bias term.  Three equivalent parameterizations are supported and
convertible: the C-style total-loss multiplier, our lambda, and the
"half" lambda convention used by some stability literature
(lambda_half = lambda/2, i.e. C = 1/(2 n lambda_half)).

Termination: every coordinate satisfies its KKT condition within
kkt_tol on margins recomputed exactly from alpha (not just on the
incrementally maintained ones).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._backend import backend_name, get_backend
from .data import Dataset, Standardizer
from .kernel import KernelSpec, gram, kernel_row

C_STYLE = "C_STYLE"
OURS_LAMBDA = "OURS_LAMBDA"
BE_LAMBDA = "BE_LAMBDA"
_STYLES = (C_STYLE, OURS_LAMBDA, BE_LAMBDA)

MODEL_FORMAT_VERSION = 1


class SvmError(RuntimeError):
    pass


class SmoConvergenceError(SvmError):
    """SMO ran out of budget; carries the best iterate and its residual."""

    def __init__(self, msg, alpha, residual, steps):
        super().__init__(msg)
        self.alpha = alpha
        self.residual = residual
        self.steps = steps


@dataclass(frozen=True)
class SvmFormulation:
    style: str
    value: float

    def __post_init__(self):
        if self.style not in _STYLES:
            raise SvmError(f"unknown formulation style {self.style!r}")
        if not self.value > 0:
            raise SvmError("formulation value must be positive")


def convert(f: SvmFormulation, target_style: str, n: int) -> SvmFormulation:
    """Convert between the three equivalent SVM parameterizations."""
    if target_style not in _STYLES:
        raise SvmError(f"unknown formulation style {target_style!r}")
    if n < 1:
        raise SvmError("sample size must be >= 1")
    if f.style == target_style:
        return f
    v = f.value
    if f.style == OURS_LAMBDA:
        out = 1.0 / (n * v) if target_style == C_STYLE else v / 2.0
    elif f.style == BE_LAMBDA:
        out = 1.0 / (2.0 * n * v) if target_style == C_STYLE else 2.0 * v
    else:  # C_STYLE
        out = 1.0 / (n * v) if target_style == OURS_LAMBDA else 1.0 / (2.0 * n * v)
    return SvmFormulation(target_style, out)


@dataclass(frozen=True)
class SvmModel:
    alphas: np.ndarray       # (n_train,) in [0, C]
    train: Dataset
    kernel: KernelSpec
    lambda_ours: float
    c_equiv: float           # exactly 1 / (lambda_ours * n_train)
    n_train: int
    dual_objective: float
    kkt_residual: float
    standardizer: Standardizer | None = None
    backend: str = "py"

    @property
    def support_mask(self) -> np.ndarray:
        return self.alphas > 0.0


def train(train_ds: Dataset, kernel: KernelSpec, f: SvmFormulation,
          kkt_tol: float = 1e-3, max_passes: int | None = None,
          backend: str | None = None, cache_rows: bool | None = None,
          standardizer: Standardizer | None = None) -> SvmModel:
    """Solve the offset-free dual with maximal-violating-pair SMO.

    max_passes counts full sweeps of n pair updates; default 10*n sweeps.
    cache_rows=True computes kernel rows on demand instead of building
    the full Gram matrix (automatic above 8192 rows); results do not
    depend on the caching mode.
    """
    n = train_ds.n
    y = train_ds.labels.copy()  # writable, for the memoryview interface
    lam = convert(f, OURS_LAMBDA, n).value
    C = convert(f, C_STYLE, n).value
    if max_passes is None:
        max_passes = 10 * n
    max_steps = max_passes * n

    if cache_rows is None:
        cache_rows = n > 8192
    if cache_rows:
        K = _LazyKernelRows(kernel, train_ds.features)
        impl = get_backend("py")  # compiled core needs the dense matrix
    else:
        K = gram(kernel, train_ds.features)
        impl = get_backend(backend)

    alpha = np.zeros(n)
    m = np.zeros(n)
    total_steps = 0
    while True:
        info = impl.solve(K, y, C, kkt_tol, max_steps - total_steps, alpha, m)
        total_steps += info.steps
        # verify on exactly recomputed margins; incremental m accumulates
        # rounding over many steps
        m = _margins_from_rows(K, alpha, y, n)
        residual = _kkt_residual(alpha, y * m, C)
        if residual <= kkt_tol:
            break
        if total_steps >= max_steps or info.steps == 0:
            raise SmoConvergenceError(
                f"SMO did not converge within {max_passes} sweeps "
                f"(residual {residual:.3e} > {kkt_tol:.1e})",
                alpha=alpha, residual=residual, steps=total_steps)

    dual = float(alpha.sum() - 0.5 * np.dot(alpha * y, m))
    return SvmModel(
        alphas=alpha, train=train_ds, kernel=kernel, lambda_ours=lam,
        c_equiv=C, n_train=n, dual_objective=dual, kkt_residual=residual,
        standardizer=standardizer, backend=backend_name(impl) if not cache_rows else "py",
    )


class _LazyKernelRows:
    """Row-on-demand kernel access; rows are memoized once computed."""

    def __init__(self, spec: KernelSpec, X: np.ndarray):
        self.spec = spec
        self.X = X
        self._rows: dict[int, np.ndarray] = {}

    def __getitem__(self, i: int) -> np.ndarray:
        row = self._rows.get(i)
        if row is None:
            row = kernel_row(self.spec, self.X, self.X[i])
            self._rows[i] = row
        return row


def _margins_from_rows(K, alpha, y, n):
    v = alpha * y
    m = np.empty(n)
    for i in range(n):
        m[i] = np.dot(K[i], v)
    return m


def _kkt_residual(alpha, g, C):
    """Largest violated KKT gap: max feasible directional gain of the dual."""
    up = 1.0 - g
    worst = 0.0
    worst = max(worst, float(np.max(up[alpha < C], initial=-np.inf)))
    worst = max(worst, float(np.max(-up[alpha > 0.0], initial=-np.inf)))
    return max(worst, 0.0)


def margins(model: SvmModel, X) -> np.ndarray:
    """f(x) = sum_i a_i y_i kappa(x_i, x) for each row x of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.train.d:
        raise SvmError(f"dimension mismatch: model has d={model.train.d}, "
                       f"input has d={X.shape[1]}")
    v = model.alphas * model.train.labels
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        out[i] = np.dot(kernel_row(model.kernel, model.train.features, X[i]), v)
    return out


def margin(model: SvmModel, x) -> float:
    return float(margins(model, np.asarray(x, dtype=np.float64)[None, :])[0])


def weight_norm_sq(model: SvmModel) -> float:
    """||W||^2 = a^T (Y G Y) a, computed as sum_i a_i y_i f(x_i)."""
    m = margins(model, model.train.features)
    return float(np.dot(model.alphas * model.train.labels, m))


@dataclass(frozen=True)
class LossSummary:
    err01: float
    hinge: float
    clipped_hinge: float


def losses(model: SvmModel, data: Dataset) -> LossSummary:
    """Mean 0-1 / hinge / clipped-hinge losses of the deterministic
    classifier on ``data``.  A zero margin counts as an error."""
    if data.n == 0:
        raise SvmError("losses over an empty dataset")
    ym = data.labels * margins(model, data.features)
    err01 = float(np.mean(ym <= 0.0))
    h = np.maximum(0.0, 1.0 - ym)
    return LossSummary(err01, float(h.mean()), float(np.minimum(1.0, h).mean()))


def span_norm_sq(coeffs, gram_matrix) -> float:
    """||sum_k c_k phi(p_k)||^2 = c^T G c over an explicit point set."""
    c = np.asarray(coeffs, dtype=np.float64)
    return float(c @ np.asarray(gram_matrix) @ c)


def save_model(model: SvmModel, path) -> None:
    """JSON-serialize the support expansion; round-trips margins to 1e-12."""
    mask = model.support_mask
    st = model.standardizer
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "n_train": model.n_train,
        "lambda_ours": model.lambda_ours,
        "c_equiv": model.c_equiv,
        "sigma_rbf": model.kernel.sigma_rbf,
        "dual_objective": model.dual_objective,
        "kkt_residual": model.kkt_residual,
        "alphas": model.alphas[mask].tolist(),
        "labels": model.train.labels[mask].tolist(),
        "support_rows": model.train.features[mask].tolist(),
        "standardization": None if st is None else
            {"mean": st.mean.tolist(), "scale": st.scale.tolist()},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> SvmModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise SvmError(f"unsupported model format {doc.get('format_version')!r}")
    x = np.array(doc["support_rows"], dtype=np.float64)
    y = np.array(doc["labels"], dtype=np.float64)
    if x.shape[0] < 2:
        # keep Dataset's n >= 2 invariant for degenerate support sets
        x = np.vstack([x, np.zeros((2 - x.shape[0], x.shape[1] if x.ndim == 2 else 1))])
        y = np.concatenate([y, [1.0, -1.0][:2 - len(y)]])
        alphas = np.concatenate([np.array(doc["alphas"]), np.zeros(x.shape[0] - len(doc["alphas"]))])
    else:
        alphas = np.array(doc["alphas"], dtype=np.float64)
    st = doc.get("standardization")
    return SvmModel(
        alphas=alphas,
        train=Dataset(x, y, name="support", standardized=st is not None),
        kernel=KernelSpec(doc["sigma_rbf"]),
        lambda_ours=doc["lambda_ours"],
        c_equiv=doc["c_equiv"],
        n_train=doc["n_train"],
        dual_objective=doc["dual_objective"],
        kkt_residual=doc["kkt_residual"],
        standardizer=None if st is None else Standardizer(
            mean=np.array(st["mean"]), scale=np.array(st["scale"])),
    )
