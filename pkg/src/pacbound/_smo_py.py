"""Pure-numpy SMO core for the offset-free dual.

The dual has box constraints only (no equality constraint, since there is
no bias term), so any pair of coordinates can be optimized jointly in
closed form.  Each step picks the two coordinates with the largest KKT
violations and solves the 2-d box QP exactly: the candidate set
{interior stationary point} + {four edge optima} always contains a box
maximizer of a concave quadratic.

The compiled backend in ``_smo_cy`` mirrors these operations expression
for expression; keep the two in sync.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_NEG = -np.inf


@dataclass
class SolveInfo:
    steps: int
    residual: float
    converged: bool
    deltas: list | None = None


def _pair_step(gi, gj, qii, qjj, qij, lo_a, hi_a, lo_b, hi_b):
    """Maximize gi*da + gj*db - 0.5*(qii*da^2 + 2*qij*da*db + qjj*db^2)
    over the box [lo_a, hi_a] x [lo_b, hi_b].  Returns (da, db, gain)."""

    def gain(da, db):
        return gi * da + gj * db - 0.5 * (qii * da * da + 2.0 * qij * da * db + qjj * db * db)

    best_da = 0.0
    best_db = 0.0
    best = 0.0

    det = qii * qjj - qij * qij
    if det > 1e-14:
        da = (gi * qjj - gj * qij) / det
        db = (gj * qii - gi * qij) / det
        if lo_a <= da <= hi_a and lo_b <= db <= hi_b:
            g = gain(da, db)
            if g > best:
                best, best_da, best_db = g, da, db

    for da in (lo_a, hi_a):
        if qjj > 1e-14:
            db = (gj - qij * da) / qjj
            db = min(max(db, lo_b), hi_b)
        else:
            db = hi_b if gj - qij * da > 0.0 else lo_b
        g = gain(da, db)
        if g > best:
            best, best_da, best_db = g, da, db
    for db in (lo_b, hi_b):
        if qii > 1e-14:
            da = (gi - qij * db) / qii
            da = min(max(da, lo_a), hi_a)
        else:
            da = hi_a if gi - qij * db > 0.0 else lo_a
        g = gain(da, db)
        if g > best:
            best, best_da, best_db = g, da, db

    return best_da, best_db, best


def solve(K, y, C, kkt_tol, max_steps, alpha, m, trace=False):
    """Run pair updates in place on (alpha, m) until the KKT residual on
    the maintained margins drops to kkt_tol or max_steps is exhausted.

    K may be a dense (n, n) array or any object where K[i] yields row i.
    """
    n = y.shape[0]
    deltas = [] if trace else None
    steps = 0
    residual = np.inf

    while True:
        g = y * m
        up = 1.0 - g
        viol = np.where(alpha < C, up, _NEG)
        viol = np.maximum(viol, np.where(alpha > 0.0, -up, _NEG))

        i = int(np.argmax(viol))
        residual = max(float(viol[i]), 0.0)
        if residual <= kkt_tol:
            return SolveInfo(steps, residual, True, deltas)
        if steps >= max_steps:
            return SolveInfo(steps, residual, False, deltas)

        if n > 1:
            vi = viol[i]
            viol[i] = _NEG
            j = int(np.argmax(viol))
            viol[i] = vi
        else:
            j = i

        yi = y[i]
        gi = 1.0 - yi * m[i]
        lo_a, hi_a = -alpha[i], C - alpha[i]
        if j != i:
            yj = y[j]
            gj = 1.0 - yj * m[j]
            qij = yi * yj * K[i][j]
            da, db, gained = _pair_step(gi, gj, K[i][i], K[j][j], qij,
                                        lo_a, hi_a, -alpha[j], C - alpha[j])
        else:
            da = min(max(gi / K[i][i], lo_a), hi_a)
            db = 0.0
            gained = gi * da - 0.5 * K[i][i] * da * da

        if gained < -1e-9:
            raise ArithmeticError("dual objective decreased in a pair update")
        if gained <= 0.0:
            # no representable progress left at this tolerance; let the
            # driver re-check the residual on exactly recomputed margins
            return SolveInfo(steps, residual, False, deltas)
        if trace:
            deltas.append(gained)

        alpha[i] = min(max(alpha[i] + da, 0.0), C)
        m += (da * yi) * K[i]
        if j != i and db != 0.0:
            alpha[j] = min(max(alpha[j] + db, 0.0), C)
            m += (db * y[j]) * K[j]
        steps += 1
