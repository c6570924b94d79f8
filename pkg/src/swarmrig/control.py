"""Barrier-gradient control that keeps the rigidity index above a floor.

The potential coth(lambda - eps) blows up as the rigidity index lambda
approaches the floor eps from above, so following its (negated) gradient,
csch^2(lambda - eps) times the index gradient, pushes the formation away
from losing rigidity while fading to zero when rigidity is ample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import ProximityParams
from .rigidity import Framework

__all__ = [
    "BarrierBreach",
    "ControlParams",
    "ControlOutput",
    "barrier_value",
    "barrier_gain",
    "index_gradient",
    "control_step",
    "clip_velocity",
    "leader_velocity",
]

# ||v| - 1| beyond this rejects an eigenvector input
_UNIT_TOL = 1.0e-8


class BarrierBreach(ValueError):
    """The rigidity index fell to or below the barrier floor."""

    def __init__(self, lam: float, eps: float):
        super().__init__(f"rigidity index {lam:.6g} is not above the floor {eps:.6g}")
        self.lam = lam
        self.eps = eps


@dataclass(frozen=True)
class ControlParams:
    """Barrier floor, saturation margin, and per-agent speed limit.

    Inside (eps, eps + guard) the barrier slope is evaluated at eps + guard
    so the commanded speed stays finite; the norm clip at u_max then takes
    over. guard only tempers numerics, it never masks a breach: at or
    below eps the controller still refuses to act.
    """

    eps: float = 2.0
    guard: float = 1.0e-6
    u_max: float = 2.0

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.guard > 0.0:
            raise ValueError(f"guard must be positive, got {self.guard}")
        if not self.u_max > 0.0:
            raise ValueError(f"u_max must be positive, got {self.u_max}")


@dataclass(frozen=True)
class ControlOutput:
    """One controller evaluation: velocities plus the logged scalars."""

    velocities: np.ndarray
    energy: float
    gradient_norm: float


def barrier_value(lam: float, eps: float) -> float:
    """coth(lam - eps); +inf at or below the floor."""
    x = lam - eps
    if x <= 0.0:
        return math.inf
    # coth(x) = (1 + e^(-2x)) / (1 - e^(-2x)), safe for large x
    t = math.exp(-2.0 * x)
    if t == 1.0:
        return math.inf
    return (1.0 + t) / (1.0 - t)


def barrier_gain(lam: float, eps: float, guard: float = 0.0) -> float:
    """csch^2(lam - eps), the magnitude of the barrier's slope.

    With a positive guard the slope saturates at its eps + guard value.
    Raises BarrierBreach at or below the floor, where the barrier is
    undefined and the controller has no valid action.
    """
    x = lam - eps
    if x <= 0.0:
        raise BarrierBreach(lam, eps)
    x = max(x, guard)
    t = math.exp(-2.0 * x)
    denom = 1.0 - t
    if denom == 0.0:
        raise BarrierBreach(lam, eps)
    return 4.0 * t / (denom * denom)


def index_gradient(f: Framework, eigvec: np.ndarray, sigma_sq: float) -> np.ndarray:
    """Gradient of the rigidity index with respect to every position.

    eigvec must be the unit eigenvector of the rigidity Laplacian at a
    simple eigenvalue; then row i is d(lambda)/d(p_i). Each edge (i, j)
    contributes 2 w s (v_i - v_j) - (w / sigma_sq) s^2 (p_i - p_j) at node
    i (mirrored at j), where s = (v_i - v_j)^T (p_i - p_j); the second
    term is the Gaussian weight's own dependence on the edge length.

    Args:
        f: weighted framework.
        eigvec: (d*n,) or (n, d) unit eigenvector (within 1e-8).
        sigma_sq: squared Gaussian scale of the weight profile.

    Raises:
        ValueError: if eigvec is not unit-norm or sigma_sq is not positive.
    """
    p = f.positions
    n, d = p.shape
    v = np.asarray(eigvec, dtype=float).reshape(n, d)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValueError(f"eigvec must be unit-norm, got |v| = {norm:.12g}")
    if not sigma_sq > 0.0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    grad = np.zeros((n, d))
    for k, (i, j) in enumerate(f.graph.edges):
        w = f.weights[k]
        z = p[i] - p[j]
        dv = v[i] - v[j]
        s = float(dv @ z)
        term = 2.0 * w * s * dv - (w / sigma_sq) * (s * s) * z
        grad[i] += term
        grad[j] -= term
    return grad


def clip_velocity(u: np.ndarray, u_max: float) -> np.ndarray:
    """Scale each row of u down to norm u_max when it exceeds it."""
    u = np.asarray(u, dtype=float)
    out = u.copy()
    for i in range(out.shape[0]):
        norm = float(np.linalg.norm(out[i]))
        if norm > u_max:
            out[i] *= u_max / norm
    return out


def control_step(
    f: Framework,
    lam,
    eigvec: np.ndarray,
    prox: ProximityParams,
    params: ControlParams,
) -> ControlOutput:
    """Per-agent barrier-ascent velocities, speed-limited.

    u_i = csch^2(lam - eps) * d(lam)/d(p_i), then norm-clipped to u_max.
    The eigenvector is renormalized before use so estimates carrying a
    small norm error (e.g. from distributed averaging) are accepted.

    lam may be one shared value or one estimate per agent (shape (n,));
    per-agent estimates give each row its own barrier gain, which is how
    a formation runs on distributed estimation. The logged energy is then
    taken at the mean estimate.

    Raises:
        BarrierBreach: when lam (any agent's, if per-agent) is at or
            below the floor.
    """
    lam_arr = np.asarray(lam, dtype=float)
    v = np.asarray(eigvec, dtype=float).ravel()
    norm = float(np.linalg.norm(v))
    if norm <= 0.0 or not np.isfinite(norm):
        raise ValueError("eigvec must be a nonzero finite vector")
    grad = index_gradient(f, v / norm, prox.sigma_sq)
    if lam_arr.ndim == 0:
        gain = barrier_gain(float(lam_arr), params.eps, params.guard)
        scaled = gain * grad
        energy = barrier_value(float(lam_arr), params.eps)
    else:
        if lam_arr.shape != (f.n,):
            raise ValueError(
                f"per-agent lam must have shape ({f.n},), got {lam_arr.shape}"
            )
        scaled = np.empty_like(grad)
        for i in range(f.n):
            gain_i = barrier_gain(float(lam_arr[i]), params.eps, params.guard)
            scaled[i] = gain_i * grad[i]
        energy = barrier_value(float(np.mean(lam_arr)), params.eps)
    return ControlOutput(
        velocities=clip_velocity(scaled, params.u_max),
        energy=energy,
        gradient_norm=float(np.linalg.norm(grad)),
    )


def leader_velocity(position: np.ndarray) -> np.ndarray:
    """Exogenous planar leader velocity [0.5, 0.3 + 0.4 cos(x)]."""
    pos = np.asarray(position, dtype=float)
    if pos.shape != (2,):
        raise ValueError(f"leader law is planar, got position shape {pos.shape}")
    return np.array([0.5, 0.3 + 0.4 * math.cos(pos[0])])
