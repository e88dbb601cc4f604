"""Noise-variance optimization with union-bound accounting, and the
(C, sigma_rbf) grid experiment driver.

optimize_sigma minimizes the inverted risk estimate over sigma2 on a log
scale: a coarse 9-point scan (the bound surface can be flat, so a pure
local search is unsafe) followed by golden-section refinement around the
best scanned point, spending exactly tau bound evaluations.

delta accounting: the PEW certificate is re-evaluated tau times during
the search, so each evaluation runs at delta' = delta/(tau*(tau+1)); a
union bound over the tau evaluations then keeps the returned certificate
valid at the original confidence regardless of tau.  The PO bound is
simultaneously valid for every sigma2, so its optimization is free.  The
union penalty reported is bound(delta') - bound(delta) at the selected
sigma2, in KL-budget units and in inverted-risk units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import bounds as bnd
from .bounds import BoundReport
from .data import Dataset, SplitSpec, split, standardize
from .kernel import KernelSpec, c0_heuristic, median_heuristic
from .rand_risk import average_risk_from_margins
from .svm import (OURS_LAMBDA, SvmFormulation, SmoConvergenceError, losses,
                  margins, train, weight_norm_sq)

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0
_COARSE_POINTS = 9

GRID_FORMAT_VERSION = 1

CSV_HEADER = ("c,sigma_rbf,lambda,train_err01,test_err01,hinge,clipped_hinge,"
              "pew_bound,pew_sigma2,pew_gap,po_bound,po_sigma2,po_gap,"
              "liu_bound,be_bound,rand_test_err_pew,rand_test_err_po,"
              "union_penalty,status")


class TuningError(ValueError):
    pass


@dataclass(frozen=True)
class SigmaSearchSpec:
    sigma2_min: float = 1e-4
    sigma2_max: float = 1e4
    tau: int = 60                  # evaluation budget, fixed before the search
    target_bound: str = bnd.PEW

    def __post_init__(self):
        if not 0 < self.sigma2_min < self.sigma2_max:
            raise TuningError("need 0 < sigma2_min < sigma2_max")
        if self.tau < 1:
            raise TuningError("tau must be >= 1")
        if self.target_bound not in (bnd.PEW, bnd.PO):
            raise TuningError("sigma2 search targets PEW or PO")


@dataclass(frozen=True)
class GridSpec:
    """Geometric grid anchored at the heuristics (C0, sigma0):
    C = 2^e * C0 with c_count exponents spanning [c_exp_min, c_exp_max],
    and likewise for sigma_rbf around sigma0."""
    c_exp_min: float = -8.0
    c_exp_max: float = 2.0
    c_count: int = 7
    sigma_exp_min: float = -3.0
    sigma_exp_max: float = 3.0
    sigma_count: int = 7

    def __post_init__(self):
        if self.c_count < 1 or self.sigma_count < 1:
            raise TuningError("grid needs at least one point per axis")

    def c_values(self, c0: float) -> np.ndarray:
        return c0 * 2.0 ** np.linspace(self.c_exp_min, self.c_exp_max, self.c_count)

    def sigma_values(self, sigma0: float) -> np.ndarray:
        return sigma0 * 2.0 ** np.linspace(self.sigma_exp_min, self.sigma_exp_max,
                                           self.sigma_count)


@dataclass(frozen=True)
class SigmaOptResult:
    sigma2_opt: float
    report: BoundReport            # the certificate actually valid after the search
    evals: int
    flat: bool                     # objective indistinguishable from constant
    bracket_found: bool
    union_penalty_kl: float        # budget(delta') - budget(delta) at sigma2_opt
    union_penalty_risk: float      # inverted-risk difference at sigma2_opt
    emp_risk_randomized: float


def optimize_sigma(model, train_ds: Dataset, spec: SigmaSearchSpec,
                   delta_total: float) -> SigmaOptResult:
    """Pick sigma2 minimizing the inverted risk estimate of the target
    bound, spending exactly spec.tau bound evaluations."""
    ym = train_ds.labels * margins(model, train_ds.features)
    n = model.n_train
    lam = model.lambda_ours
    tau = spec.tau

    delta = bnd.split_delta(delta_total, spec.target_bound)
    if spec.target_bound == bnd.PEW:
        delta_eval = delta / (tau * (tau + 1))

        def make_report(sigma2, d):
            emp = average_risk_from_margins(ym, sigma2)
            rep = bnd.bound_pew(n, lam, sigma2, d, emp, tau=tau)
            rep.inputs["delta_before_tau_adjustment"] = delta
            # after the union bound over tau evaluations the certificate
            # holds at the original confidence, not the per-evaluation one
            return replace(rep, confidence=1.0 - 2.0 * delta)
    else:
        delta_eval = delta  # uniform over sigma2: no adjustment
        w2 = weight_norm_sq(model)

        def make_report(sigma2, d):
            emp = average_risk_from_margins(ym, sigma2)
            rep = bnd.bound_po(n, sigma2, d, w2, emp)
            rep.inputs["delta_before_tau_adjustment"] = delta
            return rep

    evaluated: dict[float, BoundReport] = {}

    def objective(t):  # t = log sigma2
        sigma2 = math.exp(t)
        rep = make_report(sigma2, delta_eval)
        evaluated[t] = rep
        return rep.risk_bound

    t_lo = math.log(spec.sigma2_min)
    t_hi = math.log(spec.sigma2_max)

    n_scan = min(_COARSE_POINTS, tau)
    ts = np.linspace(t_lo, t_hi, n_scan) if n_scan > 1 else np.array([t_hi])
    vals = [objective(t) for t in ts]
    evals = n_scan

    spread = max(vals) - min(vals)
    flat = spread <= 1e-15 * max(1.0, abs(max(vals)))
    best_i = int(np.argmin(vals))
    best_t, best_v = float(ts[best_i]), vals[best_i]

    bracket_found = n_scan >= 3 and tau - evals >= 2
    if bracket_found and not flat:
        a = float(ts[max(best_i - 1, 0)])
        b = float(ts[min(best_i + 1, n_scan - 1)])
        x1 = b - _GOLD * (b - a)
        x2 = a + _GOLD * (b - a)
        f1, f2 = objective(x1), objective(x2)
        evals += 2
        while evals < tau:
            if f1 <= f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - _GOLD * (b - a)
                f1 = objective(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + _GOLD * (b - a)
                f2 = objective(x2)
            evals += 1
        for t, rep in evaluated.items():
            if rep.risk_bound < best_v:
                best_v, best_t = rep.risk_bound, t

    if flat:
        best_t = t_hi  # unconstrained optimum: report the range boundary

    sigma2_opt = math.exp(best_t)
    report = evaluated[best_t]
    if spec.target_bound == bnd.PEW:
        unadjusted = make_report(sigma2_opt, delta)
        pen_kl = report.kl_budget - unadjusted.kl_budget
        pen_risk = report.risk_bound - unadjusted.risk_bound
    else:
        pen_kl = 0.0
        pen_risk = 0.0
    return SigmaOptResult(sigma2_opt, report, evals, flat, bracket_found,
                          pen_kl, pen_risk, report.inputs["emp_risk_randomized"])


def test_confidence_correction(test_risk: float, n_test: int, delta: float) -> float:
    """One-sided binomial tail correction for the randomness of a small
    test set: risk + sqrt(log(1/delta) / (2 n_test)), capped at 1."""
    if n_test < 1:
        raise TuningError("n_test must be >= 1")
    if not 0 < delta <= 1:
        raise TuningError("delta must lie in (0, 1]")
    return min(1.0, test_risk + math.sqrt(math.log(1.0 / delta) / (2.0 * n_test)))


@dataclass(frozen=True)
class GridCell:
    c: float
    sigma_rbf: float
    lam: float
    status: str = "ok"
    train_err01: float = math.nan
    test_err01: float = math.nan
    hinge: float = math.nan
    clipped_hinge: float = math.nan
    pew: BoundReport | None = None
    po: BoundReport | None = None
    liu: BoundReport | None = None
    be: BoundReport | None = None
    pew_sigma2: float = math.nan
    po_sigma2: float = math.nan
    rand_train_err_pew: float = math.nan
    rand_train_err_po: float = math.nan
    rand_test_err_pew: float = math.nan
    rand_test_err_po: float = math.nan
    union_penalty: float = math.nan        # PEW inverted-risk penalty
    union_penalty_kl: float = math.nan

    def gap(self, name: str) -> float:
        rep = self.pew if name == bnd.PEW else self.po
        terr = self.rand_test_err_pew if name == bnd.PEW else self.rand_test_err_po
        return rep.risk_bound - terr if rep is not None else math.nan


@dataclass(frozen=True)
class GridResult:
    sigma0: float
    c0: float
    n_train: int
    n_test: int
    delta_total: float
    cells: list      # row-major: C index outer, sigma index inner
    config: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for cell in self.cells:
                fh.write(_csv_row(cell) + "\n")

    def to_json_dict(self) -> dict:
        return {
            "format_version": GRID_FORMAT_VERSION,
            "config": self.config,
            "sigma0": self.sigma0,
            "c0": self.c0,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "delta_total": self.delta_total,
            "cells": [_cell_dict(c) for c in self.cells],
        }


def _csv_row(cell: GridCell) -> str:
    def r(v):
        return repr(float(v))

    fields = [r(cell.c), r(cell.sigma_rbf), r(cell.lam),
              r(cell.train_err01), r(cell.test_err01), r(cell.hinge),
              r(cell.clipped_hinge)]
    if cell.status == "ok":
        fields += [r(cell.pew.risk_bound), r(cell.pew_sigma2), r(cell.gap(bnd.PEW)),
                   r(cell.po.risk_bound), r(cell.po_sigma2), r(cell.gap(bnd.PO)),
                   r(cell.liu.risk_bound), r(cell.be.risk_bound),
                   r(cell.rand_test_err_pew), r(cell.rand_test_err_po),
                   r(cell.union_penalty)]
    else:
        fields += [r(math.nan)] * 11
    fields.append(cell.status)
    return ",".join(fields)


def _cell_dict(cell: GridCell) -> dict:
    out = {
        "c": cell.c, "sigma_rbf": cell.sigma_rbf, "lambda": cell.lam,
        "status": cell.status,
        "train_err01": cell.train_err01, "test_err01": cell.test_err01,
        "hinge": cell.hinge, "clipped_hinge": cell.clipped_hinge,
        "pew_sigma2": cell.pew_sigma2, "po_sigma2": cell.po_sigma2,
        "rand_train_err_pew": cell.rand_train_err_pew,
        "rand_train_err_po": cell.rand_train_err_po,
        "rand_test_err_pew": cell.rand_test_err_pew,
        "rand_test_err_po": cell.rand_test_err_po,
        "union_penalty": cell.union_penalty,
        "union_penalty_kl": cell.union_penalty_kl,
    }
    for name, rep in (("pew", cell.pew), ("po", cell.po),
                      ("liu", cell.liu), ("be", cell.be)):
        out[name] = rep.to_dict() if rep is not None else None
    if cell.status == "ok":
        out["pew_gap"] = cell.gap(bnd.PEW)
        out["po_gap"] = cell.gap(bnd.PO)
        # advantage surface: positive where the stability-based bound wins
        out["advantage_po_minus_pew"] = cell.po.risk_bound - cell.pew.risk_bound
    return out


def _run_cell(args):
    (c, sigma_rbf, train_ds, test_ds, delta_total, sigma_spec, kkt_tol) = args
    n = train_ds.n
    lam = 1.0 / (c * n)
    try:
        model = train(train_ds, KernelSpec(sigma_rbf),
                      SvmFormulation(OURS_LAMBDA, lam), kkt_tol=kkt_tol)
    except SmoConvergenceError as exc:
        return GridCell(c=c, sigma_rbf=sigma_rbf, lam=lam,
                        status=f"smo-failure: residual {exc.residual:.3e}")

    tr_loss = losses(model, train_ds)
    te_loss = losses(model, test_ds)

    pew_spec = SigmaSearchSpec(sigma_spec.sigma2_min, sigma_spec.sigma2_max,
                               sigma_spec.tau, bnd.PEW)
    po_spec = SigmaSearchSpec(sigma_spec.sigma2_min, sigma_spec.sigma2_max,
                              sigma_spec.tau, bnd.PO)
    pew_opt = optimize_sigma(model, train_ds, pew_spec, delta_total)
    po_opt = optimize_sigma(model, train_ds, po_spec, delta_total)

    liu = bnd.bound_liu(n, lam, bnd.split_delta(delta_total, bnd.LIU),
                        tr_loss.clipped_hinge)
    be = bnd.bound_be(n, lam, bnd.split_delta(delta_total, bnd.BE),
                      tr_loss.clipped_hinge)

    te_ym = test_ds.labels * margins(model, test_ds.features)
    return GridCell(
        c=c, sigma_rbf=sigma_rbf, lam=lam, status="ok",
        train_err01=tr_loss.err01, test_err01=te_loss.err01,
        hinge=tr_loss.hinge, clipped_hinge=tr_loss.clipped_hinge,
        pew=pew_opt.report, po=po_opt.report, liu=liu, be=be,
        pew_sigma2=pew_opt.sigma2_opt, po_sigma2=po_opt.sigma2_opt,
        rand_train_err_pew=pew_opt.emp_risk_randomized,
        rand_train_err_po=po_opt.emp_risk_randomized,
        rand_test_err_pew=average_risk_from_margins(te_ym, pew_opt.sigma2_opt),
        rand_test_err_po=average_risk_from_margins(te_ym, po_opt.sigma2_opt),
        union_penalty=pew_opt.union_penalty_risk,
        union_penalty_kl=pew_opt.union_penalty_kl,
    )


def run_grid(data: Dataset, split_spec: SplitSpec, grid: GridSpec,
             delta_total: float, sigma_spec: SigmaSearchSpec | None = None,
             do_standardize: bool = True, kkt_tol: float = 1e-3,
             jobs: int = 1, config: dict | None = None) -> GridResult:
    """Train one SVM per (C, sigma_rbf) grid cell and certify it with all
    four bounds.  Per-cell failures are recorded in the row's status and
    the sweep continues.

    Certificates are per cell; a guarantee simultaneous over the whole
    grid would need an extra log(n_cells)/n in every budget (not applied).
    """
    if sigma_spec is None:
        sigma_spec = SigmaSearchSpec()
    train_ds, test_ds = split(data, split_spec)
    if do_standardize:
        train_ds, test_ds = standardize(train_ds, test_ds)

    sigma0 = median_heuristic(train_ds.features)
    c0 = c0_heuristic(KernelSpec(sigma0), train_ds.features)

    tasks = [(c, s, train_ds, test_ds, delta_total, sigma_spec, kkt_tol)
             for c in grid.c_values(c0) for s in grid.sigma_values(sigma0)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell, tasks))
    else:
        cells = [_run_cell(t) for t in tasks]

    return GridResult(sigma0=sigma0, c0=c0, n_train=train_ds.n,
                      n_test=test_ds.n, delta_total=delta_total,
                      cells=cells, config=config or {})
