"""Classical Newton-Euler dynamics integrated by fixed-step RK4.

This is the cross-validation oracle for the variational stepper: same
physics, entirely different discretization. The state is the classical
triple (orientation quaternion, translation, body twist) and the equations
of motion are the body-frame momentum balance for the full 6x6 generalized
inertia:

    qdot = 0.5 q x omega_hat
    ldot = R(q) v
    pi = M chi
    pidot_ang = pi_ang x omega + pi_lin x v + torque
    pidot_lin = pi_lin x omega + force

The coupling terms are fixed by requiring the world momentum R pi_lin and
R pi_ang + l x (R pi_lin) to be constant for a free body; for a diagonal
inertia they reduce to the textbook Euler equations J omegadot = (J omega)
x omega + torque.

Unlike the variational stepper, the quaternion is renormalized after every
step: this integrator's only job is trajectory accuracy, not structure
preservation. Intermediate RK4 stages live slightly off the unit sphere
and the vector field is evaluated on its smooth ambient extension.

The continuous coupling term for an arbitrary raw 6x6 matrix (added-mass
models) is model-dependent; cross-validation against this oracle should
stick to inertias built from (mass, inertia tensor, center-of-mass offset).
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._compat import njit
from .dynamics import InertiaMatrix6, total_wrench
from .errors import ValidationError
from .integrator import SolverSettings
from .kinematics import check_pose, pose_to_rotation_translation, rotate_vector
from .quat import Array, pure_quaternion, quat_conjugate, quat_mul
from .trajectory import Trajectory


@dataclass(frozen=True)
class ContinuousState:
    """Classical rigid-body state; also used for state rates."""

    orientation: Array  # quaternion (w, x, y, z)
    translation: Array
    twist: Array  # [omega; v], body frame


def _pack(state: ContinuousState) -> Array:
    q = np.asarray(state.orientation, dtype=np.float64)
    l = np.asarray(state.translation, dtype=np.float64)
    chi = np.asarray(state.twist, dtype=np.float64)
    if q.shape != (4,) or l.shape != (3,) or chi.shape != (6,):
        raise ValidationError(
            f"state shapes must be (4,), (3,), (6,); got {q.shape}, {l.shape}, {chi.shape}"
        )
    return np.concatenate([q, l, chi])


def _unpack(y: Array) -> ContinuousState:
    return ContinuousState(orientation=y[:4].copy(), translation=y[4:7].copy(), twist=y[7:].copy())


def _pose_of(q: Array, l: Array) -> Array:
    """Dual quaternion of (q, l) without unit validation (RK4 stages drift)."""
    dual = 0.5 * quat_mul(pure_quaternion(l), q)
    return np.concatenate([q, dual])


def _deriv_general(y: Array, M: InertiaMatrix6, forces, t: float) -> Array:
    q = y[:4]
    l = y[4:7]
    chi = y[7:]
    qdot = 0.5 * quat_mul(q, pure_quaternion(chi[:3]))
    ldot = rotate_vector(q, chi[3:])
    pi = M.matrix @ chi
    pidot = np.empty(6)
    pidot[:3] = np.cross(pi[:3], chi[:3]) + np.cross(pi[3:], chi[3:])
    pidot[3:] = np.cross(pi[3:], chi[:3])
    if forces:
        pidot += total_wrench(forces, _pose_of(q, l), chi, t)
    return np.concatenate([qdot, ldot, M.inverse @ pidot])


def state_derivative(state: ContinuousState, M: InertiaMatrix6, forces: Sequence = (), t: float = 0.0) -> ContinuousState:
    """Time derivative of the classical state under the given force models."""
    d = _deriv_general(_pack(state), M, list(forces), t)
    return _unpack(d)


def _rk4_step_general(y: Array, M: InertiaMatrix6, forces, t: float, h: float) -> Array:
    k1 = _deriv_general(y, M, forces, t)
    k2 = _deriv_general(y + 0.5 * h * k1, M, forces, t + 0.5 * h)
    k3 = _deriv_general(y + 0.5 * h * k2, M, forces, t + 0.5 * h)
    k4 = _deriv_general(y + h * k3, M, forces, t + h)
    out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out[:4] /= np.sqrt(out[:4] @ out[:4])
    return out


def rk4_step(state: ContinuousState, M: InertiaMatrix6, forces: Sequence = (), t: float = 0.0, h: float = 1e-3) -> ContinuousState:
    """One classical RK4 step; the quaternion is renormalized afterwards."""
    return _unpack(_rk4_step_general(_pack(state), M, list(forces), float(t), float(h)))


@njit(cache=True)
def _deriv_free(y, mat, minv):
    q = y[:4]
    chi = y[7:]
    omega_q = np.zeros(4)
    omega_q[1] = chi[0]
    omega_q[2] = chi[1]
    omega_q[3] = chi[2]
    v_q = np.zeros(4)
    v_q[1] = chi[3]
    v_q[2] = chi[4]
    v_q[3] = chi[5]
    qdot = 0.5 * quat_mul(q, omega_q)
    ldot = quat_mul(quat_mul(q, v_q), quat_conjugate(q))[1:]
    pi = mat @ chi
    pidot = np.empty(6)
    pidot[0] = pi[1] * chi[2] - pi[2] * chi[1] + pi[4] * chi[5] - pi[5] * chi[4]
    pidot[1] = pi[2] * chi[0] - pi[0] * chi[2] + pi[5] * chi[3] - pi[3] * chi[5]
    pidot[2] = pi[0] * chi[1] - pi[1] * chi[0] + pi[3] * chi[4] - pi[4] * chi[3]
    pidot[3] = pi[4] * chi[2] - pi[5] * chi[1]
    pidot[4] = pi[5] * chi[0] - pi[3] * chi[2]
    pidot[5] = pi[3] * chi[1] - pi[4] * chi[0]
    chidot = minv @ pidot
    out = np.empty(13)
    out[:4] = qdot
    out[4:7] = ldot
    out[7:] = chidot
    return out


@njit(cache=True)
def _rk4_free(y0, mat, minv, h, n_steps):
    ys = np.empty((n_steps + 1, 13))
    ys[0] = y0
    y = y0.copy()
    for k in range(n_steps):
        k1 = _deriv_free(y, mat, minv)
        k2 = _deriv_free(y + 0.5 * h * k1, mat, minv)
        k3 = _deriv_free(y + 0.5 * h * k2, mat, minv)
        k4 = _deriv_free(y + h * k3, mat, minv)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        qn = np.sqrt(y[0] ** 2 + y[1] ** 2 + y[2] ** 2 + y[3] ** 2)
        for i in range(4):
            y[i] /= qn
        ys[k + 1] = y
    return ys


def _poses_from_orientation_translation(qs: Array, ls: Array) -> Array:
    w = qs[:, :1]
    qv = qs[:, 1:]
    dual_w = -0.5 * np.einsum("ni,ni->n", ls, qv)[:, None]
    dual_v = 0.5 * (w * ls + np.cross(ls, qv))
    return np.concatenate([qs, dual_w, dual_v], axis=1)


def rk4_simulate(
    pose0,
    twist0,
    M: InertiaMatrix6,
    forces: Sequence = (),
    settings: SolverSettings = SolverSettings(h=1e-3),
    n_steps: int = 1000,
) -> Trajectory:
    """Integrate with classical RK4; same call shape and trajectory schema
    as the variational simulate. Only ``settings.h`` is used here.

    The stored twists are synchronous with the poses (continuous state), so
    the energy diagnostics need no staggering correction.
    """
    p0 = check_pose(pose0)
    q0, l0 = pose_to_rotation_translation(p0)
    chi0 = np.ascontiguousarray(twist0, dtype=np.float64)
    if chi0.shape != (6,):
        raise ValidationError(f"twist must have shape (6,), got {chi0.shape}")
    if not np.all(np.isfinite(chi0)):
        raise ValidationError("twist contains non-finite entries")
    n_steps = int(n_steps)
    if n_steps < 0:
        raise ValidationError(f"n_steps must be >= 0, got {n_steps}")
    h = settings.h
    force_models = list(forces)
    y0 = np.concatenate([q0, l0, chi0])
    if not force_models:
        ys = _rk4_free(y0, M.matrix, M.inverse, h, n_steps)
    else:
        ys = np.empty((n_steps + 1, 13))
        ys[0] = y0
        y = y0
        for k in range(n_steps):
            y = _rk4_step_general(y, M, force_models, k * h, h)
            ys[k + 1] = y
    poses = _poses_from_orientation_translation(ys[:, :4], ys[:, 4:7])
    twists = ys[:, 7:]
    times = np.arange(n_steps + 1) * h
    return Trajectory.from_raw(
        times=times,
        poses=poses,
        twists=twists,
        inertia=M,
        force_models=force_models,
    )
