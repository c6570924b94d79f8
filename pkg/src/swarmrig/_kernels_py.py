"""Pure-Python reference kernels.

These mirror the compiled kernels in ``_kernels.pyx`` operation for
operation: same loop order, same expression shapes, no fused or reordered
accumulation, so both backends produce bit-identical float64 results.
numpy is used only for element-wise work here; reductions (dot products,
neighbor sums) are written as explicit sequential loops because numpy's
pairwise summation would round differently from the compiled code.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"


def jacobi_sweeps(A: np.ndarray, V: np.ndarray, tol_off: float, max_sweeps: int) -> int:
    """Diagonalize the symmetric matrix A in place by cyclic plane rotations.

    V accumulates the rotations; started at the identity its columns end as
    the eigenvectors matching diag(A). Sweeps stop once the off-diagonal
    Frobenius norm is at most tol_off. Returns the number of sweeps run.
    """
    n = A.shape[0]
    if n < 2:
        return 0
    sweeps = 0
    while sweeps < max_sweeps:
        off_sq = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off_sq += A[i, j] * A[i, j]
        if math.sqrt(off_sq) <= tol_off:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                theta = 0.5 * (aqq - app) / apq
                # tan of the annihilating rotation, smaller root for stability
                if theta > 1.0e150:
                    t = 0.5 / theta
                elif theta < -1.0e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = 1.0 / (theta - math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
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
    z: np.ndarray,
    w: np.ndarray,
    alpha: np.ndarray,
    ptr: np.ndarray,
    idx: np.ndarray,
    rho: float,
    kp: float,
    ki: float,
    h: float,
    nrounds: int,
) -> None:
    """Run synchronous Euler rounds of PI average consensus, in place.

    z, w, alpha are (n, B) arrays of B parallel banks: z the estimates,
    w the integral states, alpha the (static) local inputs. Each round
    every agent reads only previous-round neighbor values.
    """
    n, nb = z.shape
    zn = np.empty_like(z)
    wn = np.empty_like(w)
    accz = np.empty(nb)
    accw = np.empty(nb)
    for _ in range(nrounds):
        for i in range(n):
            accz[:] = 0.0
            accw[:] = 0.0
            for k in range(ptr[i], ptr[i + 1]):
                j = idx[k]
                accz += z[i] - z[j]
                accw += w[i] - w[j]
            zn[i] = z[i] + h * (rho * (alpha[i] - z[i]) - kp * accz + ki * accw)
            wn[i] = w[i] + h * (-(ki) * accz)
        z[:] = zn
        w[:] = wn


def jor_round(
    r_in: np.ndarray,
    r_out: np.ndarray,
    rhs: np.ndarray,
    blocks: np.ndarray,
    minv: np.ndarray,
    ptr: np.ndarray,
    idx: np.ndarray,
    gamma: float,
) -> None:
    """One synchronous block-overrelaxation round of the linear solver.

    Per agent i: acc = rhs[i] + sum_j blocks[k] @ r_in[j] over the CSR
    neighborhood, then r_out[i] = (1-gamma) r_in[i] + gamma minv[i] @ acc.
    blocks holds one d-by-d coupling block per directed CSR entry.
    """
    n, d = r_in.shape
    acc = np.empty(d)
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
