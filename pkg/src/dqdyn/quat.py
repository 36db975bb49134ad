"""Quaternion and dual quaternion algebra on raw float64 arrays.

Conventions used across the whole package:

* quaternion: shape (4,), scalar first, ``[w, x, y, z]``
* dual quaternion: shape (8,), real part in ``[0:4]``, dual part in ``[4:8]``
* a "pure" (dual) quaternion has zero scalar slot(s)

Nothing in this module renormalizes. Constraint drift of unit dual
quaternions produced by long products is a quantity callers measure, not
something the algebra hides.

The hot functions are numba-jitted when numba is available; they run as
plain Python otherwise with identical results.
"""

import math

import numpy as np

from ._compat import njit
from .errors import ValidationError

Array = np.ndarray

# Below this angle the sinc-like series switch to 2-term Taylor expansions.
SMALL_ANGLE = 1e-8


# ---------------------------------------------------------------------------
# constructors / validators (plain Python; allocate fresh float64 arrays)
# ---------------------------------------------------------------------------

def quaternion(w: float, x: float, y: float, z: float) -> Array:
    """Quaternion [w, x, y, z] as a float64 array."""
    return np.array([w, x, y, z], dtype=np.float64)


def pure_quaternion(v) -> Array:
    """Quaternion with zero scalar part and vector part v."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,):
        raise ValidationError(f"vector part must have shape (3,), got {v.shape}")
    return np.array([0.0, v[0], v[1], v[2]])


def quat_identity() -> Array:
    return np.array([1.0, 0.0, 0.0, 0.0])


def unit_quaternion(q, tol: float = 1e-9) -> Array:
    """Validate and return q as a float64 unit quaternion (no renormalizing)."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (4,):
        raise ValidationError(f"quaternion must have shape (4,), got {q.shape}")
    n = math.sqrt(float(q @ q))
    if abs(n - 1.0) > tol:
        raise ValidationError(f"quaternion norm {n!r} differs from 1 by more than {tol}")
    return q


def dual_quaternion(real, dual) -> Array:
    """Dual quaternion from its real and dual quaternion parts."""
    real = np.asarray(real, dtype=np.float64)
    dual = np.asarray(dual, dtype=np.float64)
    if real.shape != (4,) or dual.shape != (4,):
        raise ValidationError("real and dual parts must each have shape (4,)")
    out = np.empty(8)
    out[:4] = real
    out[4:] = dual
    return out


def pure_dual_quaternion(a, b) -> Array:
    """Pure dual quaternion [0, a, 0, b] from two 3-vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != (3,) or b.shape != (3,):
        raise ValidationError("a and b must each have shape (3,)")
    out = np.zeros(8)
    out[1:4] = a
    out[5:8] = b
    return out


def dq_identity() -> Array:
    out = np.zeros(8)
    out[0] = 1.0
    return out


def check_pure_dual(eta, tol: float = 0.0) -> Array:
    """Validate the two scalar slots of eta are zero (within tol)."""
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape != (8,):
        raise ValidationError(f"dual quaternion must have shape (8,), got {eta.shape}")
    if abs(eta[0]) > tol or abs(eta[4]) > tol:
        raise ValidationError(
            f"expected a pure dual quaternion, scalar slots are ({eta[0]!r}, {eta[4]!r})"
        )
    return eta


# ---------------------------------------------------------------------------
# quaternion algebra
# ---------------------------------------------------------------------------

@njit(cache=True)
def quat_mul(q1: Array, q2: Array) -> Array:
    """Hamilton product q1 ∘ q2 (scalar-first)."""
    out = np.empty(4)
    out[0] = q1[0] * q2[0] - q1[1] * q2[1] - q1[2] * q2[2] - q1[3] * q2[3]
    out[1] = q1[0] * q2[1] + q1[1] * q2[0] + q1[2] * q2[3] - q1[3] * q2[2]
    out[2] = q1[0] * q2[2] - q1[1] * q2[3] + q1[2] * q2[0] + q1[3] * q2[1]
    out[3] = q1[0] * q2[3] + q1[1] * q2[2] - q1[2] * q2[1] + q1[3] * q2[0]
    return out


@njit(cache=True)
def quat_conjugate(q: Array) -> Array:
    """q† : negate the vector part."""
    out = np.empty(4)
    out[0] = q[0]
    out[1] = -q[1]
    out[2] = -q[2]
    out[3] = -q[3]
    return out


@njit(cache=True)
def quat_norm(q: Array) -> float:
    return math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


@njit(cache=True)
def _sinc(theta: float) -> float:
    # sin(theta)/theta, Taylor branch below SMALL_ANGLE
    if theta < SMALL_ANGLE:
        return 1.0 - theta * theta / 6.0
    return math.sin(theta) / theta


@njit(cache=True)
def _dsinc_over_theta(theta: float) -> float:
    # g(theta) = (theta*cos(theta) - sin(theta)) / theta^3, the derivative
    # term of the dual-number expansion; Taylor branch below SMALL_ANGLE
    if theta < SMALL_ANGLE:
        return -1.0 / 3.0 + theta * theta / 30.0
    return (theta * math.cos(theta) - math.sin(theta)) / (theta * theta * theta)


@njit(cache=True)
def quat_exp(q: Array) -> Array:
    """Quaternion exponential exp(w) * [cos|v|, sinc(|v|) v]."""
    theta = math.sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    s = _sinc(theta)
    ew = math.exp(q[0])
    out = np.empty(4)
    out[0] = ew * math.cos(theta)
    out[1] = ew * s * q[1]
    out[2] = ew * s * q[2]
    out[3] = ew * s * q[3]
    return out


# ---------------------------------------------------------------------------
# dual quaternion algebra
# ---------------------------------------------------------------------------

@njit(cache=True)
def dq_mul(p1: Array, p2: Array) -> Array:
    """Dual quaternion product: (a1 + eps b1)(a2 + eps b2)."""
    out = np.empty(8)
    a1 = p1[:4]
    b1 = p1[4:]
    a2 = p2[:4]
    b2 = p2[4:]
    out[:4] = quat_mul(a1, a2)
    out[4:] = quat_mul(a1, b2) + quat_mul(b1, a2)
    return out


@njit(cache=True)
def dq_quat_conjugate(p: Array) -> Array:
    """p† : quaternion-conjugate both parts (reverses products)."""
    out = np.empty(8)
    out[:4] = quat_conjugate(p[:4])
    out[4:] = quat_conjugate(p[4:])
    return out


@njit(cache=True)
def dq_dual_transpose(p: Array) -> Array:
    """p* : swap real and dual parts (an involution; distributes over ∘)."""
    out = np.empty(8)
    out[:4] = p[4:]
    out[4:] = p[:4]
    return out


@njit(cache=True)
def _dq_exp_parts(a: Array, b: Array) -> Array:
    # exp of the pure dual quaternion [0, a, 0, b], closed form.
    # real = [cos t, sinc(t) a], t = |a|
    # dual = [-(a.b) sinc(t), (a.b) g(t) a + sinc(t) b]
    t = math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
    s = _sinc(t)
    g = _dsinc_over_theta(t)
    ab = a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    out = np.empty(8)
    out[0] = math.cos(t)
    out[1] = s * a[0]
    out[2] = s * a[1]
    out[3] = s * a[2]
    out[4] = -ab * s
    out[5] = ab * g * a[0] + s * b[0]
    out[6] = ab * g * a[1] + s * b[1]
    out[7] = ab * g * a[2] + s * b[2]
    return out


def dq_exp(eta) -> Array:
    """Exponential of a pure dual quaternion; always lands on the unit group.

    The result satisfies |real| = 1 and real · dual = 0 identically (up to
    roundoff), for any input magnitude.
    """
    eta = check_pure_dual(eta)
    return _dq_exp_parts(np.ascontiguousarray(eta[1:4]), np.ascontiguousarray(eta[5:8]))


def dq_log(p) -> Array:
    """Principal logarithm of a unit dual quaternion, as a pure dual quaternion.

    The sign ambiguity of the double cover is resolved toward a non-negative
    real scalar, so dq_exp(dq_log(p)) reproduces p (or -p when p[0] < 0) and
    the rotation half-angle |log real part| stays in [0, pi/2].
    """
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (8,):
        raise ValidationError(f"dual quaternion must have shape (8,), got {p.shape}")
    if p[0] < 0.0:
        p = -p
    vnorm = math.sqrt(float(p[1] ** 2 + p[2] ** 2 + p[3] ** 2))
    theta = math.atan2(vnorm, float(p[0]))
    s = _sinc(theta)
    g = _dsinc_over_theta(theta)
    a = p[1:4] / s
    ab = -float(p[4]) / s
    b = (p[5:8] - ab * g * a) / s
    return pure_dual_quaternion(a, b)
