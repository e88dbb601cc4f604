# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled SMO core.

Expression-for-expression mirror of ``_smo_py.solve`` (dense-matrix case);
the pure-Python module is the reference, this one only removes the
interpreter from the hot loop.  Compiled with -ffp-contract=off so both
backends produce identical floating point trajectories.
"""

from libc.math cimport INFINITY

from pacbound._smo_py import SolveInfo


cdef inline double _gain(double gi, double gj, double qii, double qjj,
                         double qij, double da, double db) noexcept nogil:
    return gi * da + gj * db - 0.5 * (qii * da * da + 2.0 * qij * da * db + qjj * db * db)


cdef inline double _clip(double v, double lo, double hi) noexcept nogil:
    return min(max(v, lo), hi)


def solve(double[:, ::1] K, double[::1] y, double C, double kkt_tol,
          long max_steps, double[::1] alpha, double[::1] m):
    cdef Py_ssize_t n = y.shape[0]
    cdef long steps = 0
    cdef double residual = INFINITY
    cdef Py_ssize_t i, j, k
    cdef double gk, upk, vk, best
    cdef double yi, yj, gi, gj, qii, qjj, qij, det
    cdef double lo_a, hi_a, lo_b, hi_b, da, db, cand_a, cand_b, g, gained, s
    cdef bint converged = False

    with nogil:
        while True:
            # most violating coordinate (first occurrence wins ties)
            best = -INFINITY
            i = 0
            for k in range(n):
                gk = y[k] * m[k]
                upk = 1.0 - gk
                vk = upk if alpha[k] < C else -INFINITY
                if alpha[k] > 0.0 and -upk > vk:
                    vk = -upk
                if vk > best:
                    best = vk
                    i = k
            residual = best if best > 0.0 else 0.0
            if residual <= kkt_tol:
                converged = True
                break
            if steps >= max_steps:
                break

            # second most violating coordinate, skipping i
            j = i
            if n > 1:
                best = -INFINITY
                for k in range(n):
                    if k == i:
                        continue
                    gk = y[k] * m[k]
                    upk = 1.0 - gk
                    vk = upk if alpha[k] < C else -INFINITY
                    if alpha[k] > 0.0 and -upk > vk:
                        vk = -upk
                    if vk > best:
                        best = vk
                        j = k

            yi = y[i]
            gi = 1.0 - yi * m[i]
            lo_a = -alpha[i]
            hi_a = C - alpha[i]
            da = 0.0
            db = 0.0
            gained = 0.0
            if j != i:
                yj = y[j]
                gj = 1.0 - yj * m[j]
                qii = K[i, i]
                qjj = K[j, j]
                qij = yi * yj * K[i, j]
                lo_b = -alpha[j]
                hi_b = C - alpha[j]

                det = qii * qjj - qij * qij
                if det > 1e-14:
                    cand_a = (gi * qjj - gj * qij) / det
                    cand_b = (gj * qii - gi * qij) / det
                    if lo_a <= cand_a <= hi_a and lo_b <= cand_b <= hi_b:
                        g = _gain(gi, gj, qii, qjj, qij, cand_a, cand_b)
                        if g > gained:
                            gained = g
                            da = cand_a
                            db = cand_b
                # four edges of the box, each a clipped 1-d optimum
                cand_a = lo_a
                if qjj > 1e-14:
                    cand_b = _clip((gj - qij * cand_a) / qjj, lo_b, hi_b)
                else:
                    cand_b = hi_b if gj - qij * cand_a > 0.0 else lo_b
                g = _gain(gi, gj, qii, qjj, qij, cand_a, cand_b)
                if g > gained:
                    gained = g
                    da = cand_a
                    db = cand_b
                cand_a = hi_a
                if qjj > 1e-14:
                    cand_b = _clip((gj - qij * cand_a) / qjj, lo_b, hi_b)
                else:
                    cand_b = hi_b if gj - qij * cand_a > 0.0 else lo_b
                g = _gain(gi, gj, qii, qjj, qij, cand_a, cand_b)
                if g > gained:
                    gained = g
                    da = cand_a
                    db = cand_b
                cand_b = lo_b
                if qii > 1e-14:
                    cand_a = _clip((gi - qij * cand_b) / qii, lo_a, hi_a)
                else:
                    cand_a = hi_a if gi - qij * cand_b > 0.0 else lo_a
                g = _gain(gi, gj, qii, qjj, qij, cand_a, cand_b)
                if g > gained:
                    gained = g
                    da = cand_a
                    db = cand_b
                cand_b = hi_b
                if qii > 1e-14:
                    cand_a = _clip((gi - qij * cand_b) / qii, lo_a, hi_a)
                else:
                    cand_a = hi_a if gi - qij * cand_b > 0.0 else lo_a
                g = _gain(gi, gj, qii, qjj, qij, cand_a, cand_b)
                if g > gained:
                    gained = g
                    da = cand_a
                    db = cand_b
            else:
                da = _clip(gi / K[i, i], lo_a, hi_a)
                gained = gi * da - 0.5 * K[i, i] * da * da

            if gained < -1e-9:
                with gil:
                    raise ArithmeticError("dual objective decreased in a pair update")
            if gained <= 0.0:
                break

            alpha[i] = _clip(alpha[i] + da, 0.0, C)
            s = da * yi
            for k in range(n):
                m[k] = m[k] + s * K[i, k]
            if j != i and db != 0.0:
                alpha[j] = _clip(alpha[j] + db, 0.0, C)
                s = db * y[j]
                for k in range(n):
                    m[k] = m[k] + s * K[j, k]
            steps += 1

    return SolveInfo(int(steps), float(residual), bool(converged), None)
