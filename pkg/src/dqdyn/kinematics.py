"""Rigid-body kinematics on unit dual quaternions.

Ordering conventions (everywhere in this package):

* twists are 6-vectors ``[omega; v]``, angular part first;
* wrenches are 6-vectors ``[torque; force]``, angular part first;
* a pose ``p = q + eps * 0.5 * l_hat * q`` maps body coordinates to world
  coordinates, where ``q`` rotates body axes into world axes and ``l`` is the
  world-frame position of the body reference point.

The body reference point is wherever the user put it; nothing here assumes it
is the center of mass. Body twists ``[omega_B; v_B]`` hold the angular rate
and the reference-point velocity, both in body axes. A body wrench holds the
torque about the reference point and the force, both in body axes; a world
wrench holds the same two vectors rotated into world axes (torque still about
the body reference point).

Poses are never renormalized here. Constraint drift is reported by
``pose_constraint_errors`` and it is the caller's business to care.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .quat import (
    Array,
    dq_exp,
    dq_log,
    dq_mul,
    dq_quat_conjugate,
    dq_dual_transpose,
    pure_dual_quaternion,
    pure_quaternion,
    quat_conjugate,
    quat_mul,
    unit_quaternion,
)

FRAME_BODY = "body"
FRAME_WORLD = "world"

Z_AXIS = np.array([0.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# poses
# ---------------------------------------------------------------------------

def pose_from_rotation_translation(q, l, tol: float = 1e-9) -> Array:
    """Unit dual quaternion for rotation q and reference-point position l."""
    q = unit_quaternion(q, tol=tol)
    l = np.asarray(l, dtype=np.float64)
    if l.shape != (3,):
        raise ValidationError(f"translation must have shape (3,), got {l.shape}")
    out = np.empty(8)
    out[:4] = q
    out[4:] = 0.5 * quat_mul(pure_quaternion(l), q)
    return out


def pose_identity() -> Array:
    out = np.zeros(8)
    out[0] = 1.0
    return out


def pose_constraint_errors(p) -> tuple[float, float]:
    """(unit-norm error of the real part, |real . dual| orthogonality error)."""
    p = np.asarray(p, dtype=np.float64)
    unit_err = abs(float(np.linalg.norm(p[:4])) - 1.0)
    orth_err = abs(float(p[:4] @ p[4:]))
    return unit_err, orth_err


def check_pose(p, tol: float = 1e-9) -> Array:
    """Validate the two unit-group constraints of a pose."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (8,):
        raise ValidationError(f"pose must have shape (8,), got {p.shape}")
    unit_err, orth_err = pose_constraint_errors(p)
    if unit_err > tol:
        raise ValidationError(f"pose real part norm off unity by {unit_err:.3e} (tol {tol})")
    if orth_err > tol:
        raise ValidationError(f"pose real/dual orthogonality violated by {orth_err:.3e} (tol {tol})")
    return p


def pose_to_rotation_translation(p, tol: float = 1e-9) -> tuple[Array, Array]:
    """Split a pose into (q, l); rejects inputs that drifted off the group."""
    p = check_pose(p, tol=tol)
    q = p[:4].copy()
    l = 2.0 * quat_mul(p[4:], quat_conjugate(q))[1:]
    return q, l


def rotate_vector(q, v) -> Array:
    """Rotate a 3-vector by a unit quaternion (sandwich product)."""
    q = np.asarray(q, dtype=np.float64)
    res = quat_mul(quat_mul(q, pure_quaternion(v)), quat_conjugate(q))
    return res[1:]


def transform_point(p, r) -> Array:
    """Map a body-frame point r to world coordinates: R r + l.

    Implemented as the dual quaternion sandwich p * (1 + eps r_hat) * p_bar
    with p_bar the quaternion-conjugate, dual-negated pose. The formula is a
    polynomial in the 8 pose coordinates, so it extends smoothly to ambient
    (slightly off-group) poses; the numeric potential-gradient pipeline
    relies on that.
    """
    p = np.asarray(p, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3,):
        raise ValidationError(f"point must have shape (3,), got {r.shape}")
    point = np.zeros(8)
    point[0] = 1.0
    point[5:] = r
    pbar = np.empty(8)
    pbar[:4] = quat_conjugate(p[:4])
    pbar[4:] = -quat_conjugate(p[4:])
    res = dq_mul(dq_mul(p, point), pbar)
    return res[5:].copy()


# ---------------------------------------------------------------------------
# twists
# ---------------------------------------------------------------------------

def twist(omega, v) -> Array:
    """Assemble the 6-vector [omega; v] (angular first)."""
    omega = np.asarray(omega, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if omega.shape != (3,) or v.shape != (3,):
        raise ValidationError("omega and v must each have shape (3,)")
    return np.concatenate([omega, v])


def pose_rate_from_body_twist(p, chi) -> Array:
    """Tangent vector of the pose under a body twist: pdot = 0.5 p * chi_hat."""
    p = np.asarray(p, dtype=np.float64)
    chi = np.asarray(chi, dtype=np.float64)
    return 0.5 * dq_mul(p, pure_dual_quaternion(chi[:3], chi[3:]))


def body_twist_from_pose_rate(p, pdot, scalar_tol: float = 1e-9) -> Array:
    """Recover the body twist from a pose rate: chi_hat = 2 p_conj * pdot.

    The product must come out pure for a rate that respects the unit
    constraints; scalar parts above scalar_tol raise (a secant direction from
    finite differencing carries O(h |omega|^2) scalar parts, so loosen the
    gate when feeding one in).
    """
    p = np.asarray(p, dtype=np.float64)
    pdot = np.asarray(pdot, dtype=np.float64)
    res = 2.0 * dq_mul(dq_quat_conjugate(p), pdot)
    if abs(float(res[0])) > scalar_tol or abs(float(res[4])) > scalar_tol:
        raise ValidationError(
            "pose rate is inconsistent with the unit constraints: "
            f"scalar parts ({res[0]:.3e}, {res[4]:.3e}) exceed {scalar_tol:.1e}"
        )
    return np.concatenate([res[1:4], res[5:8]])


def twist_world_from_body(p, chi_b) -> Array:
    """World twist [omega_W; l_dot]: both body vectors rotated by the pose.

    Note this is the translation-rate convention. The dual quaternion product
    2 pdot * p_conj instead carries l_dot - omega_W x l in its dual slot (the
    world-origin moment); tests pin both facts.
    """
    p = np.asarray(p, dtype=np.float64)
    chi_b = np.asarray(chi_b, dtype=np.float64)
    q = p[:4]
    return np.concatenate([rotate_vector(q, chi_b[:3]), rotate_vector(q, chi_b[3:])])


# ---------------------------------------------------------------------------
# wrenches and dual forces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Wrench:
    """Torque (about the body reference point) and force, with a frame tag."""

    torque: Array
    force: Array
    frame: str = FRAME_BODY

    def __post_init__(self):
        torque = np.asarray(self.torque, dtype=np.float64)
        force = np.asarray(self.force, dtype=np.float64)
        if torque.shape != (3,) or force.shape != (3,):
            raise ValidationError("wrench torque and force must each have shape (3,)")
        if self.frame not in (FRAME_BODY, FRAME_WORLD):
            raise ValidationError(f"unknown wrench frame {self.frame!r}")
        object.__setattr__(self, "torque", torque)
        object.__setattr__(self, "force", force)

    @property
    def vector6(self) -> Array:
        return np.concatenate([self.torque, self.force])


def body_wrench(torque, force) -> Wrench:
    return Wrench(torque=torque, force=force, frame=FRAME_BODY)


def world_wrench(torque, force) -> Wrench:
    return Wrench(torque=torque, force=force, frame=FRAME_WORLD)


def wrench_body_from_world(p, wrench: Wrench) -> Wrench:
    """Rotate a world-frame wrench into body axes (same reference point)."""
    if wrench.frame == FRAME_BODY:
        return wrench
    qc = quat_conjugate(np.asarray(p, dtype=np.float64)[:4])
    return Wrench(
        torque=rotate_vector(qc, wrench.torque),
        force=rotate_vector(qc, wrench.force),
        frame=FRAME_BODY,
    )


def wrench_to_dual_force(p, wrench: Wrench) -> Array:
    """Dual force 8-vector F of a wrench at pose p.

    Body route: F^T = 2 p * (tau_check)^T. World route: shift the torque to
    the world origin (tau_o = tau_W + l x f_W), then F^T = 2 tau_check_W^T * p.
    The two produce the identical 8-vector; only the 2nd-4th and 6th-8th
    components carry physics (the scalar slots are the undetermined
    multiplier directions of the constrained variational principle).
    """
    p = np.asarray(p, dtype=np.float64)
    if wrench.frame == FRAME_BODY:
        tau_star = pure_dual_quaternion(wrench.force, wrench.torque)
        return dq_dual_transpose(2.0 * dq_mul(p, tau_star))
    if wrench.frame == FRAME_WORLD:
        _, l = pose_to_rotation_translation(p)
        tau_origin = wrench.torque + np.cross(l, wrench.force)
        tau_star = pure_dual_quaternion(wrench.force, tau_origin)
        return dq_dual_transpose(2.0 * dq_mul(tau_star, p))
    raise ValidationError(f"unknown wrench frame {wrench.frame!r}")


def dual_force_to_body_wrench(p, dual_force) -> Wrench:
    """Contract a dual force back to the body wrench: tau_check = 0.5 p_conj * F^T.

    Only the vector slots of the contraction are read; whatever representative
    of the dual force equivalence class comes in, the same body wrench comes
    out.
    """
    p = np.asarray(p, dtype=np.float64)
    F = np.asarray(dual_force, dtype=np.float64)
    if F.shape != (8,):
        raise ValidationError(f"dual force must have shape (8,), got {F.shape}")
    tau_star = 0.5 * dq_mul(dq_quat_conjugate(p), dq_dual_transpose(F))
    return Wrench(torque=tau_star[5:8].copy(), force=tau_star[1:4].copy(), frame=FRAME_BODY)


# ---------------------------------------------------------------------------
# screws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScrewParameters:
    """Unit axis, orthogonal moment, rotation angle, translation along axis."""

    axis: Array
    moment: Array
    angle: float
    slide: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=np.float64)
        moment = np.asarray(self.moment, dtype=np.float64)
        if axis.shape != (3,) or moment.shape != (3,):
            raise ValidationError("screw axis and moment must each have shape (3,)")
        if abs(float(np.linalg.norm(axis)) - 1.0) > 1e-12:
            raise ValidationError("screw axis must be a unit vector")
        if abs(float(axis @ moment)) > 1e-12:
            raise ValidationError("screw moment must be orthogonal to the axis")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "moment", moment)
        object.__setattr__(self, "angle", float(self.angle))
        object.__setattr__(self, "slide", float(self.slide))


_ZERO_ANGLE = 1e-10
_ZERO_SLIDE = 1e-12


def screw_decompose(p) -> ScrewParameters:
    """Screw parameters of a pose, canonicalized to angle in [0, pi].

    Pure translations come back with angle 0 and the axis along the
    translation; the identity maps to the zero screw with axis z_hat.
    """
    p = check_pose(p)
    eta = dq_log(p)
    a = eta[1:4]
    b = eta[5:8]
    half_angle = float(np.linalg.norm(a))
    angle = 2.0 * half_angle
    if angle < _ZERO_ANGLE:
        translation = 2.0 * b
        d = float(np.linalg.norm(translation))
        if d < _ZERO_SLIDE:
            return ScrewParameters(axis=Z_AXIS.copy(), moment=np.zeros(3), angle=0.0, slide=0.0)
        return ScrewParameters(axis=translation / d, moment=np.zeros(3), angle=0.0, slide=d)
    axis = a / half_angle
    slide = 4.0 * float(a @ b) / angle
    moment = (2.0 * b - slide * axis) / angle
    # remove roundoff components of the moment along the axis
    moment = moment - float(moment @ axis) * axis
    return ScrewParameters(axis=axis, moment=moment, angle=angle, slide=slide)


def screw_compose(screw: ScrewParameters) -> Array:
    """Pose of a screw: exp of 0.5*(angle + eps slide)(axis + eps moment)."""
    a = 0.5 * screw.angle * screw.axis
    b = 0.5 * (screw.angle * screw.moment + screw.slide * screw.axis)
    return dq_exp(pure_dual_quaternion(a, b))


def pose_difference_magnitude(p_a, p_b) -> float:
    """Screw magnitude of the relative pose: 2 |log(conj(p_a) * p_b)|.

    Zero iff the two poses coincide (as transforms; the double cover sign is
    canonicalized away). Mixes radians and length units on purpose: it is the
    single scalar used to report pose discrepancies.
    """
    rel = dq_mul(dq_quat_conjugate(np.asarray(p_a, dtype=np.float64)), np.asarray(p_b, dtype=np.float64))
    eta = dq_log(rel)
    return 2.0 * float(np.sqrt(eta[1:4] @ eta[1:4] + eta[5:8] @ eta[5:8]))
