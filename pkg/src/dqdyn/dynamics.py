"""Inertia, potentials, force models, and momentum/energy diagnostics.

The generalized inertia is the full 6x6 matrix about an arbitrary body-fixed
reference point:

    M = [[ J,        m S(r) ],
         [-m S(r),   m I    ]]

with J the rotational inertia about the reference point, r the body-frame
position of the center of mass, and S the skew (cross product) matrix. With
twists ordered [omega; v] this gives the kinetic energy
T = 0.5 [omega; v] . M [omega; v]. The off-diagonal blocks vanish when the
reference point is the center of mass.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import SingularMatrixError, ValidationError
from .kinematics import (
    FRAME_BODY,
    FRAME_WORLD,
    Wrench,
    body_wrench,
    pose_to_rotation_translation,
    rotate_vector,
    transform_point,
)
from .quat import (
    Array,
    dq_mul,
    dq_quat_conjugate,
    dq_dual_transpose,
    quat_conjugate,
)

COND_LIMIT = 1e12


def skew(v) -> Array:
    v = np.asarray(v, dtype=np.float64)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


@dataclass(frozen=True)
class InertiaMatrix6:
    """Generalized 6x6 inertia with cached blocks and inverse.

    ``coupled`` is True when the off-diagonal blocks are nonzero (reference
    point away from the center of mass, or a raw matrix with coupling); the
    integrator Jacobian takes a cheaper path when it is False.
    """

    matrix: Array
    inverse: Array
    m11: Array
    m12: Array
    m21: Array
    m22: Array
    coupled: bool


def _assemble(matrix: Array) -> InertiaMatrix6:
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(
            f"inertia matrix is singular or near singular (condition estimate {cond:.3e})"
        )
    inverse = np.linalg.inv(matrix)
    m11 = np.ascontiguousarray(matrix[:3, :3])
    m12 = np.ascontiguousarray(matrix[:3, 3:])
    m21 = np.ascontiguousarray(matrix[3:, :3])
    m22 = np.ascontiguousarray(matrix[3:, 3:])
    coupled = bool(np.any(m12 != 0.0) or np.any(m21 != 0.0))
    return InertiaMatrix6(
        matrix=matrix,
        inverse=inverse,
        m11=m11,
        m12=m12,
        m21=m21,
        m22=m22,
        coupled=coupled,
    )


def build_inertia(mass: float, inertia, com_offset=(0.0, 0.0, 0.0)) -> InertiaMatrix6:
    """Standard rigid-body inertia about an arbitrary reference point.

    ``inertia`` is the 3x3 rotational inertia about that reference point (not
    about the center of mass); ``com_offset`` is the body-frame position of
    the center of mass relative to the reference point.
    """
    mass = float(mass)
    if not mass > 0.0:
        raise ValidationError(f"mass must be positive, got {mass}")
    J = np.asarray(inertia, dtype=np.float64)
    if J.shape != (3, 3):
        raise ValidationError(f"inertia must have shape (3, 3), got {J.shape}")
    if not np.allclose(J, J.T, rtol=0.0, atol=1e-9 * max(1.0, float(np.abs(J).max()))):
        raise ValidationError("inertia tensor must be symmetric")
    if np.any(np.linalg.eigvalsh(J) <= 0.0):
        raise ValidationError("inertia tensor must be positive definite")
    r = np.asarray(com_offset, dtype=np.float64)
    if r.shape != (3,):
        raise ValidationError(f"com_offset must have shape (3,), got {r.shape}")
    S = skew(r)
    matrix = np.zeros((6, 6))
    matrix[:3, :3] = J
    matrix[:3, 3:] = mass * S
    matrix[3:, :3] = -mass * S
    matrix[3:, 3:] = mass * np.eye(3)
    return _assemble(matrix)


def build_inertia_raw(matrix) -> InertiaMatrix6:
    """Wrap an arbitrary invertible 6x6 generalized inertia."""
    matrix = np.array(matrix, dtype=np.float64)
    if matrix.shape != (6, 6):
        raise ValidationError(f"generalized inertia must have shape (6, 6), got {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValidationError("generalized inertia contains non-finite entries")
    return _assemble(matrix)


def kinetic_energy(M: InertiaMatrix6, chi) -> float:
    chi = np.asarray(chi, dtype=np.float64)
    return 0.5 * float(chi @ (M.matrix @ chi))


def momentum(M: InertiaMatrix6, chi) -> Array:
    """Body-frame generalized momentum [angular; linear] = M chi."""
    return M.matrix @ np.asarray(chi, dtype=np.float64)


def world_momentum(p, M: InertiaMatrix6, chi) -> tuple[Array, Array]:
    """(angular momentum about the world origin, linear momentum), world frame.

    Both are first integrals of a free body regardless of where the body
    reference point sits.
    """
    p = np.asarray(p, dtype=np.float64)
    pi = momentum(M, chi)
    q = p[:4]
    _, l = pose_to_rotation_translation(p)
    P = rotate_vector(q, pi[3:])
    L = rotate_vector(q, pi[:3]) + np.cross(l, P)
    return L, P


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialField:
    """Scalar potential of the pose, smooth in the 8 ambient coordinates.

    ``body_wrench`` is the analytic gradient route when available; the
    numeric route below works for any field.
    """

    evaluate: Callable[[Array], float]
    body_wrench: Optional[Callable[[Array], Wrench]] = None


def gravity_potential(mass: float, g_world, com_offset=(0.0, 0.0, 0.0)) -> PotentialField:
    """Uniform gravity acting at the center of mass: U = -m g . x_cm."""
    mass = float(mass)
    g = np.asarray(g_world, dtype=np.float64)
    r = np.asarray(com_offset, dtype=np.float64)
    if g.shape != (3,) or r.shape != (3,):
        raise ValidationError("g_world and com_offset must each have shape (3,)")

    def evaluate(pose) -> float:
        return -mass * float(g @ transform_point(pose, r))

    def wrench(pose) -> Wrench:
        f_body = rotate_vector(quat_conjugate(np.asarray(pose)[:4]), mass * g)
        return body_wrench(np.cross(r, f_body), f_body)

    return PotentialField(evaluate=evaluate, body_wrench=wrench)


def spring_potential(
    anchor_world, attachment_body, stiffness: float, rest_length: float = 0.0
) -> PotentialField:
    """Linear spring from a world anchor to a body-fixed attachment point."""
    anchor = np.asarray(anchor_world, dtype=np.float64)
    attach = np.asarray(attachment_body, dtype=np.float64)
    if anchor.shape != (3,) or attach.shape != (3,):
        raise ValidationError("anchor and attachment must each have shape (3,)")
    k = float(stiffness)
    if k < 0.0:
        raise ValidationError(f"stiffness must be non-negative, got {k}")
    rest = float(rest_length)

    def evaluate(pose) -> float:
        d = transform_point(pose, attach) - anchor
        return 0.5 * k * (float(np.linalg.norm(d)) - rest) ** 2

    def wrench(pose) -> Wrench:
        d = transform_point(pose, attach) - anchor
        dist = float(np.linalg.norm(d))
        if dist < 1e-12:
            # force magnitude k*rest with undefined direction; zero is the
            # symmetric choice (matches the subgradient of the potential)
            f_world = np.zeros(3)
        else:
            f_world = -k * (dist - rest) * (d / dist)
        f_body = rotate_vector(quat_conjugate(np.asarray(pose)[:4]), f_world)
        return body_wrench(np.cross(attach, f_body), f_body)

    return PotentialField(evaluate=evaluate, body_wrench=wrench)


def numeric_conservative_wrench(field, pose, relative_step: float = 1e-6) -> Wrench:
    """Body wrench of a potential by central differences in the 8 ambient
    pose coordinates, contracted back through the pose.

    The gradient G = dU/dp is an ambient row vector; the wrench readout is
    the vector slots of -0.5 * conj(p) * G^T (dual-transposed product), the
    same contraction the variational force term uses. Scalar slots are
    discarded: they are the constraint-multiplier directions.
    """
    evaluate = field.evaluate if isinstance(field, PotentialField) else field
    p = np.asarray(pose, dtype=np.float64).copy()
    grad = np.empty(8)
    for i in range(8):
        step = relative_step * max(1.0, abs(float(p[i])))
        orig = p[i]
        p[i] = orig + step
        up = float(evaluate(p))
        p[i] = orig - step
        um = float(evaluate(p))
        p[i] = orig
        grad[i] = (up - um) / (2.0 * step)
    tau_star = -0.5 * dq_mul(dq_quat_conjugate(p), dq_dual_transpose(grad))
    return Wrench(torque=tau_star[5:8].copy(), force=tau_star[1:4].copy(), frame=FRAME_BODY)


# ---------------------------------------------------------------------------
# force models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForceModel:
    """A wrench source evaluated once per step at (pose, twist, time).

    ``energy`` is the scalar potential for conservative models (used by the
    energy diagnostics); non-conservative models leave it None.
    """

    evaluate: Callable[[Array, Array, float], Wrench]
    conservative: bool = False
    energy: Optional[Callable[[Array], float]] = None


def force_model_from_potential(field: PotentialField, numeric: bool = False) -> ForceModel:
    """Conservative force model from a potential.

    Uses the analytic wrench when the field carries one (unless ``numeric``
    forces the finite-difference route).
    """
    if field.body_wrench is not None and not numeric:
        def evaluate(pose, chi, t):
            return field.body_wrench(pose)
    else:
        def evaluate(pose, chi, t):
            return numeric_conservative_wrench(field, pose)
    return ForceModel(evaluate=evaluate, conservative=True, energy=field.evaluate)


def constant_wrench_model(wrench: Wrench) -> ForceModel:
    """Constant torque and force in the tagged frame."""
    if not isinstance(wrench, Wrench):
        raise ValidationError("constant_wrench_model needs a Wrench")

    def evaluate(pose, chi, t):
        return wrench

    return ForceModel(evaluate=evaluate, conservative=False)


def damping_model(angular, linear) -> ForceModel:
    """Linear viscous damping: wrench = [-c_a * omega; -c_l * v], body frame.

    Coefficients may be scalars or per-axis 3-vectors; negative values are
    rejected (that would pump energy in).
    """
    c_a = np.broadcast_to(np.asarray(angular, dtype=np.float64), (3,)).copy()
    c_l = np.broadcast_to(np.asarray(linear, dtype=np.float64), (3,)).copy()
    if np.any(c_a < 0.0) or np.any(c_l < 0.0):
        raise ValidationError("damping coefficients must be non-negative")

    def evaluate(pose, chi, t):
        return body_wrench(-c_a * chi[:3], -c_l * chi[3:])

    return ForceModel(evaluate=evaluate, conservative=False)


def total_wrench(models: Sequence[ForceModel], pose, chi, t: float) -> Array:
    """Sum of all model wrenches as a body-frame 6-vector [torque; force].

    World-tagged wrenches are rotated through the pose; unknown tags raise.
    """
    pose = np.asarray(pose, dtype=np.float64)
    chi = np.asarray(chi, dtype=np.float64)
    out = np.zeros(6)
    if not models:
        return out
    qc = quat_conjugate(pose[:4])
    for model in models:
        w = model.evaluate(pose, chi, t)
        if not isinstance(w, Wrench):
            raise ValidationError(f"force model returned {type(w).__name__}, expected Wrench")
        if w.frame == FRAME_BODY:
            out[:3] += w.torque
            out[3:] += w.force
        elif w.frame == FRAME_WORLD:
            out[:3] += rotate_vector(qc, w.torque)
            out[3:] += rotate_vector(qc, w.force)
        else:
            raise ValidationError(f"unknown wrench frame {w.frame!r}")
    return out


def potential_energy(models: Sequence[ForceModel], pose) -> float:
    """Sum of the potentials of the conservative models."""
    total = 0.0
    for model in models:
        if model.conservative and model.energy is not None:
            total += float(model.energy(pose))
    return total
