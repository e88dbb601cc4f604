"""Command-line entry point.

Subcommands: train, certify, grid, verify, invert-kl.  Every output file
embeds the resolved run configuration and a format-version field so runs
can be replayed.  Exit codes: 0 success, 1 a verification assertion
failed, 2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass

from . import bounds as bnd
from .data import (DataError, SplitSpec, apply_standardizer, fit_standardizer,
                   load_dataset, split)
from .kernel import KernelError, KernelSpec, c0_heuristic, median_heuristic
from .rand_risk import average_risk_from_margins
from .svm import (OURS_LAMBDA, SvmError, SvmFormulation, load_model, losses,
                  margins, save_model, train, weight_norm_sq)
from .tuning import (GridSpec, SigmaSearchSpec, TuningError, optimize_sigma,
                     run_grid, test_confidence_correction)
from .verify import (StabilityProbe, VerifyError, check_vector_mcdiarmid,
                     check_weight_concentration, estimate_beta)

FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


@dataclass
class RunConfig:
    command: str
    data: str | None = None
    format: str = "csv"
    header: bool = False
    seed: int = 0
    train_fraction: float = 0.8
    delta: float = 0.05
    tau: int = 60
    grid_rows: int = 7
    grid_cols: int = 7
    c_range: tuple = (-8.0, 2.0)
    sigma_range: tuple = (-3.0, 3.0)
    sigma2_noise_range: tuple = (1e-4, 1e4)
    standardize: bool = True
    kkt_tol: float = 1e-3
    jobs: int = 1
    trials: int | None = None
    out: str = "."
    model: str | None = None
    c: float | None = None
    sigma_rbf: float | None = None


def _parse_range(text, what):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must look like LO:HI") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pacbound",
                                description="Offset-free RBF SVM with self-computed risk certificates")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, data_required=True):
        sp.add_argument("--data", required=data_required, help="dataset path")
        sp.add_argument("--format", choices=("csv", "libsvm"), default="csv")
        sp.add_argument("--header", action="store_true", help="skip one header line")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--delta", type=float, default=0.05,
                        help="total failure budget shared by every certificate")
        sp.add_argument("--tau", type=int, default=60,
                        help="sigma2 search evaluation budget")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--no-standardize", dest="standardize", action="store_false")
        sp.add_argument("--kkt-tol", type=float, default=1e-3)

    sp = sub.add_parser("train", help="train one SVM and report its losses")
    add_common(sp)
    sp.add_argument("--c", type=float, default=None,
                    help="C-style regularization (default: the C0 heuristic)")
    sp.add_argument("--sigma-rbf", type=float, default=None,
                    help="RBF width (default: the median heuristic)")

    sp = sub.add_parser("certify", help="compute all four certificates for a model")
    add_common(sp)
    sp.add_argument("--model", required=True, help="model JSON from `train`")
    sp.add_argument("--sigma2-range", type=lambda s: _parse_range(s, "--sigma2-range"),
                    default=(1e-4, 1e4), help="noise-variance search range LO:HI")

    sp = sub.add_parser("grid", help="run the (C, sigma_rbf) grid experiment")
    add_common(sp)
    sp.add_argument("--grid", default="7x7", help="RxS grid size, e.g. 7x7")
    sp.add_argument("--c-range", type=lambda s: _parse_range(s, "--c-range"),
                    default=(-8.0, 2.0), help="log2 exponent range around C0")
    sp.add_argument("--sigma-range", type=lambda s: _parse_range(s, "--sigma-range"),
                    default=(-3.0, 3.0), help="log2 exponent range around sigma0")

    sp = sub.add_parser("verify", help="Monte Carlo checks of the stability results")
    add_common(sp, data_required=False)
    sp.add_argument("--trials", type=int, default=None,
                    help="trial count for every check (defaults: 200/500/2000)")

    sp = sub.add_parser("invert-kl", help="largest q with KL(p||q) <= budget")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--budget", type=float, required=True)
    return p


def _resolve_seed(args) -> int:
    env = os.environ.get("PACBOUND_SEED")
    return int(env) if env is not None else args.seed


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.seed = _resolve_seed(args)
    for name in ("data", "format", "header", "delta", "tau", "out", "jobs",
                 "standardize", "model", "c", "sigma_rbf", "trials"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "kkt_tol"):
        cfg.kkt_tol = args.kkt_tol
    if hasattr(args, "grid"):
        try:
            rows, cols = args.grid.lower().split("x")
            cfg.grid_rows, cfg.grid_cols = int(rows), int(cols)
        except ValueError:
            raise DataError(f"--grid must look like RxS, got {args.grid!r}") from None
        cfg.c_range = args.c_range
        cfg.sigma_range = args.sigma_range
    if hasattr(args, "sigma2_range"):
        cfg.sigma2_noise_range = args.sigma2_range
    return cfg


def _write_json(path, payload, cfg: RunConfig):
    doc = {"format_version": FORMAT_VERSION, "config": asdict(cfg)}
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_splits(cfg: RunConfig):
    ds = load_dataset(cfg.data, cfg.format, header=cfg.header)
    tr, te = split(ds, SplitSpec(train_fraction=cfg.train_fraction, seed=cfg.seed))
    st = None
    if cfg.standardize:
        st = fit_standardizer(tr)
        tr, te = apply_standardizer(tr, st), apply_standardizer(te, st)
    return tr, te, st


def cmd_train(cfg: RunConfig) -> int:
    tr, te, st = _load_splits(cfg)
    sigma_rbf = cfg.sigma_rbf if cfg.sigma_rbf else median_heuristic(tr.features)
    kernel = KernelSpec(sigma_rbf)
    c = cfg.c if cfg.c else c0_heuristic(kernel, tr.features)
    lam = 1.0 / (c * tr.n)
    model = train(tr, kernel, SvmFormulation(OURS_LAMBDA, lam),
                  kkt_tol=cfg.kkt_tol, standardizer=st)

    os.makedirs(cfg.out, exist_ok=True)
    model_path = os.path.join(cfg.out, "model.json")
    save_model(model, model_path)
    tr_loss, te_loss = losses(model, tr), losses(model, te)
    _write_json(os.path.join(cfg.out, "train_summary.json"), {
        "model_file": model_path,
        "n_train": tr.n, "n_test": te.n,
        "sigma_rbf": sigma_rbf, "c": c, "lambda": lam,
        "dual_objective": model.dual_objective,
        "kkt_residual": model.kkt_residual,
        "train": asdict(tr_loss), "test": asdict(te_loss),
    }, cfg)
    print(f"trained n={tr.n} C={c:.6g} sigma_rbf={sigma_rbf:.6g} "
          f"train_err01={tr_loss.err01:.4f} test_err01={te_loss.err01:.4f}")
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    model = load_model(cfg.model)
    ds = load_dataset(cfg.data, cfg.format, header=cfg.header)
    tr, te = split(ds, SplitSpec(train_fraction=cfg.train_fraction, seed=cfg.seed))
    if model.standardizer is not None:
        tr = apply_standardizer(tr, model.standardizer)
        te = apply_standardizer(te, model.standardizer)
    if tr.n != model.n_train:
        raise DataError(f"split produced n={tr.n} but the model was trained "
                        f"on n={model.n_train}; check --seed and --data")

    lo, hi = cfg.sigma2_noise_range
    delta = cfg.delta
    tr_loss, te_loss = losses(model, tr), losses(model, te)
    te_ym = te.labels * margins(model, te.features)

    reports = {}
    sigma_opts = {}
    rand_test = {}
    for name in (bnd.PEW, bnd.PO):
        opt = optimize_sigma(model, tr, SigmaSearchSpec(lo, hi, cfg.tau, name), delta)
        reports[name] = opt.report
        sigma_opts[name] = opt
        rand_test[name] = average_risk_from_margins(te_ym, opt.sigma2_opt)
    reports[bnd.LIU] = bnd.bound_liu(model.n_train, model.lambda_ours,
                                     bnd.split_delta(delta, bnd.LIU),
                                     tr_loss.clipped_hinge)
    reports[bnd.BE] = bnd.bound_be(model.n_train, model.lambda_ours,
                                   bnd.split_delta(delta, bnd.BE),
                                   tr_loss.clipped_hinge)

    os.makedirs(cfg.out, exist_ok=True)
    payload = {
        "delta_total": delta,
        "n_train": model.n_train,
        "lambda": model.lambda_ours,
        "weight_norm_sq": weight_norm_sq(model),
        "train_losses": asdict(tr_loss),
        "test_losses": asdict(te_loss),
        "bounds": {k: v.to_dict() for k, v in reports.items()},
        "sigma2_opt": {k: sigma_opts[k].sigma2_opt for k in sigma_opts},
        "rand_train_risk": {k: sigma_opts[k].emp_risk_randomized for k in sigma_opts},
        "rand_test_risk": rand_test,
        "rand_test_risk_corrected": {
            k: test_confidence_correction(v, te.n, delta) for k, v in rand_test.items()},
        "union_penalty": sigma_opts[bnd.PEW].union_penalty_risk,
        "union_penalty_kl": sigma_opts[bnd.PEW].union_penalty_kl,
        "sigma_search": {k: {"evals": sigma_opts[k].evals, "flat": sigma_opts[k].flat}
                         for k in sigma_opts},
    }
    path = _write_json(os.path.join(cfg.out, "certificates.json"), payload, cfg)
    for name in (bnd.PEW, bnd.PO, bnd.LIU, bnd.BE):
        print(f"{name}: risk_bound={reports[name].risk_bound:.6f} "
              f"confidence={reports[name].confidence:.4f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_grid(cfg: RunConfig) -> int:
    ds = load_dataset(cfg.data, cfg.format, header=cfg.header)
    grid = GridSpec(c_exp_min=cfg.c_range[0], c_exp_max=cfg.c_range[1],
                    c_count=cfg.grid_rows,
                    sigma_exp_min=cfg.sigma_range[0], sigma_exp_max=cfg.sigma_range[1],
                    sigma_count=cfg.grid_cols)
    lo, hi = cfg.sigma2_noise_range
    result = run_grid(ds, SplitSpec(train_fraction=cfg.train_fraction, seed=cfg.seed),
                      grid, cfg.delta,
                      sigma_spec=SigmaSearchSpec(lo, hi, cfg.tau),
                      do_standardize=cfg.standardize, kkt_tol=cfg.kkt_tol,
                      jobs=cfg.jobs, config=asdict(cfg))
    os.makedirs(cfg.out, exist_ok=True)
    csv_path = os.path.join(cfg.out, "grid.csv")
    result.to_csv(csv_path)
    _write_json(os.path.join(cfg.out, "grid.json"), result.to_json_dict(), cfg)
    n_ok = sum(1 for c in result.cells if c.status == "ok")
    print(f"grid {cfg.grid_rows}x{cfg.grid_cols}: {n_ok}/{len(result.cells)} cells ok; "
          f"sigma0={result.sigma0:.6g} C0={result.c0:.6g}; wrote {csv_path}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    t_beta, t_conc, t_mcd = 200, 500, 2000
    if cfg.trials is not None:
        if cfg.trials < 200:
            raise VerifyError(f"--trials {cfg.trials} is insufficient; the "
                              "quantile checks need at least 200 trials")
        t_beta = t_conc = t_mcd = cfg.trials
    seed = cfg.seed
    checks = [
        estimate_beta(StabilityProbe(n=50, trials=t_beta, seed=seed),
                      lam=1.0, kernel=KernelSpec(2.0)),
        check_weight_concentration(StabilityProbe(n=100, trials=t_conc, seed=seed),
                                   lam=1.0, delta=0.1),
        check_vector_mcdiarmid(StabilityProbe(n=100, trials=t_mcd, seed=seed),
                               delta=0.05),
    ]
    os.makedirs(cfg.out, exist_ok=True)
    path = _write_json(os.path.join(cfg.out, "verify.json"),
                       {"checks": [c.to_dict() for c in checks]}, cfg)
    ok = True
    for c in checks:
        print(f"{c.quantity}: measured={c.measured:.6f} bound={c.bound:.6f} "
              f"trials={c.trials} -> {'pass' if c.passed else 'FAIL'}")
        ok = ok and c.passed
    print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_invert_kl(args) -> int:
    q = bnd.kl_inverse_upper(args.p, args.budget)
    print(repr(q))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "invert-kl":
            return cmd_invert_kl(args)
        cfg = _config_from_args(args)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "certify":
            return cmd_certify(cfg)
        if args.command == "grid":
            return cmd_grid(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        parser.error(f"unknown command {args.command!r}")
    except (DataError, KernelError, SvmError, TuningError, VerifyError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
