import math

import numpy as np
import pytest

from swarmrig.control import (
    BarrierBreach,
    ControlParams,
    barrier_gain,
    barrier_value,
    clip_velocity,
    control_step,
    index_gradient,
    leader_velocity,
)
from swarmrig.graphs import ProximityParams, reweight
from swarmrig.rigidity import Framework, rigidity_index, rigidity_pair

from conftest import oracle_rigidity_pair, random_rigid_framework


def reweighted(f: Framework, p: np.ndarray, prox: ProximityParams) -> Framework:
    return Framework(reweight(f.graph, p, prox), p)


def fd_index_gradient(f: Framework, prox: ProximityParams, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of the rigidity index, fixed topology."""
    p = f.positions
    grad = np.zeros_like(p)
    flat = p.ravel()
    for k in range(flat.size):
        dp = np.zeros(flat.size)
        dp[k] = h
        qp = (flat + dp).reshape(p.shape)
        qm = (flat - dp).reshape(p.shape)
        lp = rigidity_index(reweighted(f, qp, prox))
        lm = rigidity_index(reweighted(f, qm, prox))
        grad.ravel()[k] = (lp - lm) / (2 * h)
    return grad


def test_barrier_value_shape():
    # strictly decreasing in lambda, exploding at the floor
    eps = 2.0
    vals = [barrier_value(lam, eps) for lam in (2.01, 2.5, 3.0, 5.0, 10.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert barrier_value(2.0, eps) == math.inf
    assert barrier_value(1.0, eps) == math.inf
    assert barrier_value(50.0, eps) == pytest.approx(1.0, abs=1e-12)
    # known points of the hyperbolic cotangent
    assert barrier_value(eps + 1.0, eps) == pytest.approx(1.3130352854993312, rel=1e-12)
    assert barrier_value(eps + 0.01, eps) == pytest.approx(100.00333330000018, rel=1e-9)
    x = 0.7
    assert barrier_value(eps + x, eps) == pytest.approx(math.cosh(x) / math.sinh(x), rel=1e-12)


def test_barrier_gain_matches_identity():
    eps = 2.0
    for x in (0.05, 0.3, 1.0, 4.0):
        assert barrier_gain(eps + x, eps) == pytest.approx(1.0 / math.sinh(x) ** 2, rel=1e-12)
    assert barrier_gain(eps + 400.0, eps) == 0.0
    with pytest.raises(BarrierBreach):
        barrier_gain(2.0, eps)
    with pytest.raises(BarrierBreach):
        barrier_gain(1.5, eps)


def test_barrier_gain_guard_saturates():
    eps = 2.0
    guard = 1e-3
    # inside the guard band the slope is pinned at its guard-point value
    assert barrier_gain(eps + 1e-9, eps, guard) == barrier_gain(eps + guard, eps, guard)
    # outside the band the guard has no effect
    assert barrier_gain(eps + 0.5, eps, guard) == barrier_gain(eps + 0.5, eps)
    with pytest.raises(BarrierBreach):
        barrier_gain(eps, eps, guard)


def test_barrier_gain_is_minus_barrier_slope():
    eps = 2.0
    h = 1e-6
    for lam in (2.2, 3.0, 4.5):
        slope = (barrier_value(lam + h, eps) - barrier_value(lam - h, eps)) / (2 * h)
        assert -slope == pytest.approx(barrier_gain(lam, eps), rel=1e-8)


def test_index_gradient_matches_finite_differences(rng):
    prox = ProximityParams()
    for trial in range(6):
        n = int(rng.integers(4, 8))
        d = 2 if trial % 2 == 0 else 3
        f = random_rigid_framework(rng, n, d)
        pair = rigidity_pair(f)
        assert not pair.degenerate
        grad = index_gradient(f, pair.vector, prox.sigma_sq)
        ref = fd_index_gradient(f, prox)
        scale = max(1.0, float(np.max(np.abs(ref))))
        assert np.max(np.abs(grad - ref)) / scale < 1e-5


def test_weight_derivative_matches_finite_differences(rng):
    # d(w_ij)/d(p_i) = -(w/sigma^2) (p_i - p_j), checked against the profile
    prox = ProximityParams()
    p_i = np.array([1.0, -2.0])
    p_j = np.array([3.5, 0.5])
    h = 1e-6
    for axis in range(2):
        dp = np.zeros(2)
        dp[axis] = h
        wp = prox.weight(float(np.sum((p_i + dp - p_j) ** 2)))
        wm = prox.weight(float(np.sum((p_i - dp - p_j) ** 2)))
        fd = (wp - wm) / (2 * h)
        w = prox.weight(float(np.sum((p_i - p_j) ** 2)))
        analytic = -(w / prox.sigma_sq) * (p_i - p_j)[axis]
        assert fd == pytest.approx(analytic, rel=1e-7)


def test_index_gradient_sign_convention(rng):
    # stepping along the gradient increases the index
    prox = ProximityParams()
    f = random_rigid_framework(rng, 6, 2)
    lam0 = rigidity_index(f)
    pair = rigidity_pair(f)
    grad = index_gradient(f, pair.vector, prox.sigma_sq)
    step = 1e-4 / max(1.0, float(np.max(np.abs(grad))))
    p2 = f.positions + step * grad
    lam1 = rigidity_index(reweighted(f, p2, prox))
    assert lam1 > lam0


def test_index_gradient_eigvec_sign_invariant(rng):
    prox = ProximityParams()
    f = random_rigid_framework(rng, 5, 2)
    v = rigidity_pair(f).vector
    a = index_gradient(f, v, prox.sigma_sq)
    b = index_gradient(f, -v, prox.sigma_sq)
    assert np.array_equal(a, b)


def test_index_gradient_translation_invariant(rng):
    prox = ProximityParams()
    f = random_rigid_framework(rng, 6, 2)
    v = rigidity_pair(f).vector
    a = index_gradient(f, v, prox.sigma_sq)
    shifted = Framework(f.wg, f.positions + np.array([17.0, -4.0]))
    b = index_gradient(shifted, v, prox.sigma_sq)
    assert np.max(np.abs(a - b)) < 1e-10


def test_index_gradient_zero_for_translation_direction(rng):
    prox = ProximityParams()
    f = random_rigid_framework(rng, 5, 2)
    v = np.zeros((5, 2))
    v[:, 0] = 1.0 / math.sqrt(5.0)
    grad = index_gradient(f, v, prox.sigma_sq)
    assert np.array_equal(grad, np.zeros((5, 2)))


def test_index_gradient_rejects_non_unit(rng):
    prox = ProximityParams()
    f = random_rigid_framework(rng, 5, 2)
    v = rigidity_pair(f).vector
    with pytest.raises(ValueError):
        index_gradient(f, 1.5 * v, prox.sigma_sq)
    with pytest.raises(ValueError):
        index_gradient(f, v, 0.0)


def test_index_gradient_accepts_oracle_eigvec(rng):
    # same numbers independent of which eigensolver produced the vector
    prox = ProximityParams()
    f = random_rigid_framework(rng, 6, 2)
    v_pkg = rigidity_pair(f).vector
    _, v_ora = oracle_rigidity_pair(f)
    a = index_gradient(f, v_pkg, prox.sigma_sq)
    b = index_gradient(f, v_ora, prox.sigma_sq)
    assert np.max(np.abs(a - b)) < 1e-6 * max(1.0, np.max(np.abs(a)))


def test_clip_velocity():
    u = np.array([[3.0, 4.0], [0.1, 0.0], [0.0, 0.0]])
    out = clip_velocity(u, 2.0)
    assert np.linalg.norm(out[0]) == pytest.approx(2.0)
    assert np.allclose(out[0], [1.2, 1.6])
    assert np.array_equal(out[1], u[1])
    assert np.array_equal(out[2], u[2])


def test_control_step_outputs(rng):
    prox = ProximityParams()
    f = random_rigid_framework(rng, 6, 2)
    pair = rigidity_pair(f)
    # floor chosen close below lambda so the barrier is steep but defined
    params = ControlParams(eps=0.9 * pair.value, u_max=2.0)
    out = control_step(f, pair.value, pair.vector, prox, params)
    assert out.velocities.shape == f.positions.shape
    assert float(np.max(np.linalg.norm(out.velocities, axis=1))) <= params.u_max + 1e-12
    assert out.energy == barrier_value(pair.value, params.eps)
    assert out.gradient_norm > 0.0
    # far above the floor the barrier is flat and the action tiny
    out_far = control_step(f, pair.value + 50.0, pair.vector, prox, params)
    assert np.max(np.abs(out_far.velocities)) < 1e-12
    with pytest.raises(BarrierBreach):
        control_step(f, params.eps, pair.vector, prox, params)


def test_control_step_accepts_slightly_off_norm_estimates(rng):
    prox = ProximityParams()
    f = random_rigid_framework(rng, 5, 2)
    pair = rigidity_pair(f)
    params = ControlParams(eps=0.5 * pair.value)
    a = control_step(f, pair.value, pair.vector, prox, params)
    b = control_step(f, pair.value, (1.0 + 3e-5) * pair.vector, prox, params)
    assert np.max(np.abs(a.velocities - b.velocities)) < 1e-9


def test_single_euler_step_raises_index(rng):
    # one small closed-loop step from a rigid formation must not lower the index
    prox = ProximityParams()
    f = random_rigid_framework(rng, 5, 2)
    pair = rigidity_pair(f)
    params = ControlParams(eps=0.9 * pair.value, u_max=2.0)
    out = control_step(f, pair.value, pair.vector, prox, params)
    h = 1e-4
    p2 = f.positions + h * out.velocities
    lam2 = rigidity_index(reweighted(f, p2, prox))
    assert lam2 >= pair.value - 1e-12


def test_control_params_validation():
    with pytest.raises(ValueError):
        ControlParams(eps=0.0)
    with pytest.raises(ValueError):
        ControlParams(u_max=-1.0)
    with pytest.raises(ValueError):
        ControlParams(guard=0.0)


def test_leader_velocity_law():
    u = leader_velocity(np.array([0.0, 7.0]))
    assert u == pytest.approx([0.5, 0.7])
    u = leader_velocity(np.array([math.pi / 2.0, 1.0]))
    assert u == pytest.approx([0.5, 0.3], abs=1e-12)
    u = leader_velocity(np.array([math.pi, -3.0]))
    assert u == pytest.approx([0.5, 0.3 - 0.4])
    with pytest.raises(ValueError):
        leader_velocity(np.zeros(3))
