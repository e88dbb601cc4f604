"""KL machinery and the four risk certificates.

All four bounds consume quantities computed on the training sample only:

PEW   kl_budget = (2 / (sigma2 lam^2 n^2)) (1 + sqrt(log(1/delta)/2))^2
                  + log((n+1)/delta) / n             holds w.p. >= 1-2*delta
PO    kl_budget = ||W||^2 / (2 sigma2 n)
                  + log((n+1)/delta) / n             holds w.p. >= 1-delta,
                                                     simultaneously for all sigma2
LIU   risk <= R_hinge + (8/(lam n)) sqrt(2 log(2/delta))
              + sqrt(log(1/delta) / (2n))            holds w.p. >= 1-2*delta
BE    risk <= R_hinge + 2/(lam n)
              + (1 + 4/lam) sqrt(log(1/delta)/(2n))  holds w.p. >= 1-delta

The KL-based certificates bound KL+(empirical randomized risk || true
randomized risk); inverting the Bernoulli KL turns the budget into a risk
bound.  lam is the "ours" regularization (C = 1/(lam n)); the hinge
bounds use the clipped hinge loss, with the stability constant written
for a kernel with unit-norm features (B = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PEW = "PEW"
PO = "PO"
LIU = "LIU"
BE = "BE"

_BISECT_ITERS = 200


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    delta_nominal: float           # the delta inserted into the formula
    confidence: float              # 1-2*delta for PEW/LIU, 1-delta for PO/BE
    kl_budget: float | None        # absent for the hinge bounds
    risk_bound: float
    inputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "delta_nominal": self.delta_nominal,
            "confidence": self.confidence,
            "kl_budget": self.kl_budget,
            "risk_bound": self.risk_bound,
            "inputs": self.inputs,
        }


def kl_bernoulli(q: float, q0: float) -> float:
    """KL(q || q0) between Bernoulli parameters, with 0 log 0 = 0.

    q0 in {0, 1} with a mismatching q yields math.inf (a saturating
    sentinel, not an exception), so grid sweeps never abort.
    """
    if not 0.0 <= q <= 1.0 or not 0.0 <= q0 <= 1.0:
        raise ValueError("Bernoulli parameters must lie in [0, 1]")
    if q == q0:
        return 0.0
    acc = 0.0
    if q > 0.0:
        if q0 == 0.0:
            return math.inf
        acc += q * math.log(q / q0)
    if q < 1.0:
        if q0 == 1.0:
            return math.inf
        acc += (1.0 - q) * math.log((1.0 - q) / (1.0 - q0))
    return acc


def kl_inverse_upper(p: float, budget: float) -> float:
    """Largest q in [p, 1] with KL(p || q) <= budget, by bisection.

    Bisection runs on t = log(1 - q); the KL is 1-Lipschitz in t, so the
    returned point satisfies the budget with a uniform gap of about
    1e-13 regardless of how close q* sits to 1.  Returns 1.0 when every
    representable q < 1 satisfies the budget (p = 1, or a budget beyond
    ~700 nats).
    """
    if budget < 0.0:
        raise ValueError("budget must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if budget == 0.0:
        return p
    if p >= 1.0 or math.isinf(budget):
        return 1.0
    t_lo = math.log(1e-300)      # infeasible end (q -> 1)
    t_hi = math.log(1.0 - p)     # feasible end   (q = p, KL = 0)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (t_lo + t_hi)
        if mid >= t_hi or mid <= t_lo:
            break
        if kl_bernoulli(p, 1.0 - math.exp(mid)) <= budget:
            t_hi = mid
        else:
            t_lo = mid
    eps = math.exp(t_hi)
    if eps < 1e-6 * (1.0 - p):
        # closer to 1 than the double grid can resolve to budget accuracy
        return 1.0
    return max(1.0 - eps, p)


def _pac_bayes_log_term(n: int, delta: float) -> float:
    return math.log((n + 1) / delta) / n


def _conf_factor_sq(delta: float) -> float:
    return (1.0 + math.sqrt(0.5 * math.log(1.0 / delta))) ** 2


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")


def bound_pew(n: int, lam: float, sigma2_noise: float, delta: float,
              emp_risk_randomized: float, tau: int | None = None) -> BoundReport:
    """Instance-dependent PAC-Bayes certificate from hypothesis stability.

    The stability coefficient of the offset-free SVM is at most
    2/(lam n), which controls the distance between the learned weight and
    its expectation, hence the KL between the posterior and a Gaussian
    prior centered at the expected weight."""
    _check_delta(delta)
    budget = (2.0 / (sigma2_noise * lam**2 * n**2)) * _conf_factor_sq(delta) \
        + _pac_bayes_log_term(n, delta)
    risk = kl_inverse_upper(emp_risk_randomized, budget)
    return BoundReport(PEW, delta, 1.0 - 2.0 * delta, budget, risk, {
        "n": n, "lambda": lam, "sigma2_noise": sigma2_noise,
        "emp_risk_randomized": emp_risk_randomized, "tau": tau,
    })


def bound_po(n: int, sigma2_noise: float, delta: float, weight_norm_sq: float,
             emp_risk_randomized: float) -> BoundReport:
    """Prior-at-the-origin PAC-Bayes certificate; simultaneously valid
    for every noise variance, so sigma2 may be optimized for free."""
    _check_delta(delta)
    budget = weight_norm_sq / (2.0 * sigma2_noise * n) + _pac_bayes_log_term(n, delta)
    risk = kl_inverse_upper(emp_risk_randomized, budget)
    return BoundReport(PO, delta, 1.0 - delta, budget, risk, {
        "n": n, "sigma2_noise": sigma2_noise, "weight_norm_sq": weight_norm_sq,
        "emp_risk_randomized": emp_risk_randomized,
    })


def bound_liu(n: int, lam: float, delta: float, emp_clipped_hinge: float) -> BoundReport:
    _check_delta(delta)
    raw = emp_clipped_hinge \
        + (8.0 / (lam * n)) * math.sqrt(2.0 * math.log(2.0 / delta)) \
        + math.sqrt(math.log(1.0 / delta) / (2.0 * n))
    return BoundReport(LIU, delta, 1.0 - 2.0 * delta, None, min(raw, 1.0), {
        "n": n, "lambda": lam, "emp_clipped_hinge": emp_clipped_hinge,
        "raw_bound": raw,
    })


def bound_be(n: int, lam: float, delta: float, emp_clipped_hinge: float) -> BoundReport:
    _check_delta(delta)
    raw = emp_clipped_hinge + 2.0 / (lam * n) \
        + (1.0 + 4.0 / lam) * math.sqrt(math.log(1.0 / delta) / (2.0 * n))
    return BoundReport(BE, delta, 1.0 - delta, None, min(raw, 1.0), {
        "n": n, "lambda": lam, "emp_clipped_hinge": emp_clipped_hinge,
        "raw_bound": raw,
    })


def concentration_radius(n: int, lam: float, B: float, delta: float) -> float:
    """High-probability radius of ||W - E[W]|| for the lam-regularized SVM
    with features bounded by B: (2B/(lam sqrt(n))) (1 + sqrt(log(1/delta)/2)).

    delta = 1 is allowed and reduces the radius to its mean bound."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    return (2.0 * B / (lam * math.sqrt(n))) * (1.0 + math.sqrt(0.5 * math.log(1.0 / delta)))


def mcdiarmid_vector_bound(sum_c_sq: float, delta: float) -> float:
    """Norm deviation bound for a Hilbert-space map with bounded
    differences c_i: sqrt(sum c_i^2) * (1 + sqrt(log(1/delta)/2))."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    root = math.sqrt(sum_c_sq)
    return root + math.sqrt(0.5 * sum_c_sq * math.log(1.0 / delta))


def kl_gaussian_shift(distance_sq: float, sigma2: float) -> float:
    """KL between two isotropic Gaussians differing only in mean:
    ||mu - mu0||^2 / (2 sigma^2)."""
    if distance_sq < 0 or not sigma2 > 0:
        raise ValueError("need distance_sq >= 0 and sigma2 > 0")
    return distance_sq / (2.0 * sigma2)


def split_delta(delta_total: float, bound_name: str) -> float:
    """Per-bound delta so every report shares one confidence level:
    bounds holding w.p. 1-2*delta get delta_total/2, the rest delta_total."""
    _check_delta(delta_total)
    return delta_total / 2.0 if bound_name in (PEW, LIU) else delta_total
