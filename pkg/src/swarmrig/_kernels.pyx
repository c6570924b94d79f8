# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernels.

Mirrors ``_kernels_py`` operation for operation (same loop order, same
expression shapes, compiled with contraction disabled) so both backends
produce bit-identical float64 results.
"""

from libc.math cimport sqrt

import numpy as np

BACKEND = "compiled"


def jacobi_sweeps(double[:, ::1] A, double[:, ::1] V, double tol_off, int max_sweeps):
    """Diagonalize the symmetric matrix A in place by cyclic plane rotations.

    V accumulates the rotations; started at the identity its columns end as
    the eigenvectors matching diag(A). Sweeps stop once the off-diagonal
    Frobenius norm is at most tol_off. Returns the number of sweeps run.
    """
    cdef int n = A.shape[0]
    cdef int sweeps = 0
    cdef int i, j, p, q, k
    cdef double off_sq, apq, app, aqq, theta, t, c, s
    cdef double akp, akq, vkp, vkq
    if n < 2:
        return 0
    while sweeps < max_sweeps:
        off_sq = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off_sq += A[i, j] * A[i, j]
        if sqrt(off_sq) <= tol_off:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                theta = 0.5 * (aqq - app) / apq
                if theta > 1.0e150:
                    t = 0.5 / theta
                elif theta < -1.0e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = 1.0 / (theta - sqrt(1.0 + theta * theta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                    A[p, k] = A[k, p]
                    A[q, k] = A[k, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
        sweeps += 1
    return sweeps


def consensus_rounds(
    double[:, ::1] z,
    double[:, ::1] w,
    double[:, ::1] alpha,
    int[::1] ptr,
    int[::1] idx,
    double rho,
    double kp,
    double ki,
    double h,
    int nrounds,
):
    """Run synchronous Euler rounds of PI average consensus, in place.

    z, w, alpha are (n, B) arrays of B parallel banks: z the estimates,
    w the integral states, alpha the (static) local inputs. Each round
    every agent reads only previous-round neighbor values.
    """
    cdef int n = z.shape[0]
    cdef int nb = z.shape[1]
    cdef int r, i, k, b, j
    zn_arr = np.empty((n, nb))
    wn_arr = np.empty((n, nb))
    accz_arr = np.empty(nb)
    accw_arr = np.empty(nb)
    cdef double[:, ::1] zn = zn_arr
    cdef double[:, ::1] wn = wn_arr
    cdef double[::1] accz = accz_arr
    cdef double[::1] accw = accw_arr
    for r in range(nrounds):
        for i in range(n):
            for b in range(nb):
                accz[b] = 0.0
                accw[b] = 0.0
            for k in range(ptr[i], ptr[i + 1]):
                j = idx[k]
                for b in range(nb):
                    accz[b] = accz[b] + (z[i, b] - z[j, b])
                    accw[b] = accw[b] + (w[i, b] - w[j, b])
            for b in range(nb):
                zn[i, b] = z[i, b] + h * (rho * (alpha[i, b] - z[i, b]) - kp * accz[b] + ki * accw[b])
                wn[i, b] = w[i, b] + h * (-(ki) * accz[b])
        for i in range(n):
            for b in range(nb):
                z[i, b] = zn[i, b]
                w[i, b] = wn[i, b]


def jor_round(
    double[:, ::1] r_in,
    double[:, ::1] r_out,
    double[:, ::1] rhs,
    double[:, :, ::1] blocks,
    double[:, :, ::1] minv,
    int[::1] ptr,
    int[::1] idx,
    double gamma,
):
    """One synchronous block-overrelaxation round of the linear solver.

    Per agent i: acc = rhs[i] + sum_j blocks[k] @ r_in[j] over the CSR
    neighborhood, then r_out[i] = (1-gamma) r_in[i] + gamma minv[i] @ acc.
    blocks holds one d-by-d coupling block per directed CSR entry.
    """
    cdef int n = r_in.shape[0]
    cdef int d = r_in.shape[1]
    cdef int i, k, a, b, j
    cdef double t
    cdef double acc[4]
    if d > 4:
        raise ValueError(f"block dimension {d} not supported")
    for i in range(n):
        for a in range(d):
            acc[a] = rhs[i, a]
        for k in range(ptr[i], ptr[i + 1]):
            j = idx[k]
            for a in range(d):
                for b in range(d):
                    acc[a] = acc[a] + blocks[k, a, b] * r_in[j, b]
        for a in range(d):
            t = 0.0
            for b in range(d):
                t = t + minv[i, a, b] * acc[b]
            r_out[i, a] = (1.0 - gamma) * r_in[i, a] + gamma * t
