"""One-step variational integrator for a rigid body on unit dual quaternions.

The incremental pose over one step is parametrized by six step variables
f = [Phi; Psi]. The corresponding unit dual quaternion is

    real = [sqrt(1 - Phi.Phi); Phi]
    dual = [-(Psi.Phi)/sqrt(1 - Phi.Phi); Psi]

which satisfies both unit-group constraints identically for any |Phi| < 1,
so poses advanced by p_{k+1} = p_k x f_k stay on the group to roundoff and
are never renormalized. |Phi| = 1 is a half-turn in one step, the hard
ceiling of the parametrization.

Each step solves the discrete momentum balance

    A(f_k) = alpha_k,    B(f_k) = beta_k

for f_k by Newton iteration with the analytic 6x6 Jacobian. A and B are the
rotational and translational components of the step momentum; alpha/beta
transport the previous step's momentum into the current frame and add the
wrench impulse (h^2/2) [torque; force]. The body twist is retrieved from
the solved step variables afterwards, chi = (2/h) M^-1 [A; B].

Conventions: twists are [omega; v] body frame, wrenches [torque; force],
M is the 6x6 generalized inertia about the body reference point.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._compat import njit
from .dynamics import InertiaMatrix6, total_wrench
from .errors import (
    SingularMatrixError,
    SolverDivergenceError,
    StepTooLargeError,
    ValidationError,
)
from .kinematics import FRAME_BODY, Wrench, check_pose
from .linsolve import COND_LIMIT, solve_full_pivot
from .quat import Array, dq_mul
from .trajectory import Trajectory

# Newton statuses used by the kernels (kept numeric for the compiled paths)
_STATUS_OK = 0
_STATUS_NO_CONVERGENCE = 1
_STATUS_SINGULAR = 2
_STATUS_INFEASIBLE = 3

_MAX_BACKTRACK = 60


@dataclass(frozen=True)
class SolverSettings:
    """Time step and Newton controls for the implicit solve."""

    h: float
    tolerance: float = 1e-12
    max_iterations: int = 20

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValidationError(f"time step h must be positive, got {self.h}")
        if not self.tolerance > 0.0:
            raise ValidationError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")


@njit(cache=True)
def _cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit(cache=True)
def _skew3(v):
    S = np.zeros((3, 3))
    S[0, 1] = -v[2]
    S[0, 2] = v[1]
    S[1, 0] = v[2]
    S[1, 2] = -v[0]
    S[2, 0] = -v[1]
    S[2, 1] = v[0]
    return S


@njit(cache=True)
def _residual_ab(f, m11, m12, m21, m22):
    """Step momentum [A; B] of the step variables f = [Phi; Psi]."""
    phi = f[:3]
    psi = f[3:]
    gamma = np.sqrt(1.0 - phi @ phi)
    c = psi @ phi
    u = m21 @ phi + m22 @ psi
    w = m11 @ phi + m12 @ psi
    out = np.empty(6)
    out[:3] = (-(c / gamma)) * u + _cross(psi, u) + gamma * w + _cross(phi, w)
    out[3:] = gamma * u + _cross(phi, u)
    return out


@njit(cache=True)
def _transported_ab(f, m11, m12, m21, m22):
    """Previous step momentum carried into the next frame.

    Same terms as the residual with the cross-product signs flipped: the
    frame change conjugates by the step, which reverses its vector parts.
    """
    phi = f[:3]
    psi = f[3:]
    gamma = np.sqrt(1.0 - phi @ phi)
    c = psi @ phi
    u = m21 @ phi + m22 @ psi
    w = m11 @ phi + m12 @ psi
    out = np.empty(6)
    out[:3] = gamma * w - _cross(phi, w) - (c / gamma) * u - _cross(psi, u)
    out[3:] = gamma * u - _cross(phi, u)
    return out


@njit(cache=True)
def _jacobian_general(f, m11, m12, m21, m22):
    """d[A; B]/d[Phi; Psi] for an arbitrary 6x6 inertia."""
    phi = f[:3]
    psi = f[3:]
    g = np.sqrt(1.0 - phi @ phi)
    c = psi @ phi
    u = m21 @ phi + m22 @ psi
    w = m11 @ phi + m12 @ psi
    rot = g * np.eye(3) + _skew3(phi)
    t1 = (g * g) * psi + c * phi
    J = np.empty((6, 6))
    J[:3, :3] = (
        -np.outer(u, t1) / g**3
        - (c / g) * m21
        + _skew3(psi) @ m21
        - np.outer(w, phi) / g
        - _skew3(w)
        + rot @ m11
    )
    J[:3, 3:] = (
        -np.outer(u, phi) / g
        - (c / g) * m22
        - _skew3(u)
        + _skew3(psi) @ m22
        + rot @ m12
    )
    J[3:, :3] = -np.outer(u, phi) / g - _skew3(u) + rot @ m21
    J[3:, 3:] = rot @ m22
    return J


@njit(cache=True)
def _jacobian_simple(f, m11, mass):
    """Jacobian for the center-of-mass case M12 = M21 = 0, M22 = mass * I.

    The isotropy of M22 cancels the -S(u) + S(Psi) M22 pair of the general
    form, which is what makes this block structure cheaper.
    """
    phi = f[:3]
    psi = f[3:]
    g = np.sqrt(1.0 - phi @ phi)
    c = psi @ phi
    w = m11 @ phi
    rot = g * np.eye(3) + _skew3(phi)
    t1 = (g * g) * psi + c * phi
    J = np.empty((6, 6))
    J[:3, :3] = (
        -mass * np.outer(psi, t1) / g**3
        - np.outer(w, phi) / g
        - _skew3(w)
        + rot @ m11
    )
    J[:3, 3:] = -mass * (np.outer(psi, phi) / g + (c / g) * np.eye(3))
    J[3:, :3] = -mass * (np.outer(psi, phi) / g + _skew3(psi))
    J[3:, 3:] = mass * rot
    return J


@njit(cache=True)
def _newton(f0, m11, m12, m21, m22, simple, mass, target, tol, max_iterations, cond_limit):
    """Newton iteration on [A; B](f) = target from the warm start f0.

    Returns (f, iterations, residual_norm, status). Every iteration solves
    the 6x6 system with full pivoting and backtracks the update (halving)
    until the iterate keeps |Phi| < 1. Convergence is checked after the
    update, so even a solved warm start reports one iteration.
    """
    f = f0.copy()
    resnorm = np.inf
    for it in range(1, max_iterations + 1):
        r = _residual_ab(f, m11, m12, m21, m22) - target
        pre = np.max(np.abs(r))
        if simple:
            J = _jacobian_simple(f, m11, mass)
        else:
            J = _jacobian_general(f, m11, m12, m21, m22)
        dx, cond, ok = solve_full_pivot(J, -r)
        if (not ok) or cond > cond_limit:
            return f, it, pre, _STATUS_SINGULAR
        scale = 1.0
        trial = f + dx
        nphi = trial[:3] @ trial[:3]
        hops = 0
        while nphi >= 1.0 and hops < _MAX_BACKTRACK:
            scale *= 0.5
            hops += 1
            trial = f + scale * dx
            nphi = trial[:3] @ trial[:3]
        if nphi >= 1.0:
            return f, it, pre, _STATUS_INFEASIBLE
        f = trial
        r = _residual_ab(f, m11, m12, m21, m22) - target
        resnorm = np.max(np.abs(r))
        if resnorm <= tol:
            return f, it, resnorm, _STATUS_OK
    return f, max_iterations, resnorm, _STATUS_NO_CONVERGENCE


@njit(cache=True)
def _step_dq(f):
    """Unit dual quaternion of the step variables."""
    phi = f[:3]
    psi = f[3:]
    gamma = np.sqrt(1.0 - phi @ phi)
    out = np.empty(8)
    out[0] = gamma
    out[1:4] = phi
    out[4] = -(psi @ phi) / gamma
    out[5:8] = psi
    return out


@njit(cache=True)
def _simulate_free(p0, chi0, mat, minv, m11, m12, m21, m22, simple, mass, h, tol, max_iterations, n_steps, cond_limit):
    """Whole-run kernel for the force-free case.

    Same per-step semantics as the python loop in simulate (momentum-match
    start, warm starts, closure solve at the final state), minus the wrench
    evaluation. On solver failure at step k the arrays carry the failing
    iteration count and residual at index k and status/k are returned.
    """
    n = n_steps + 1
    poses = np.empty((n, 8))
    steps = np.empty((n, 6))
    twists = np.empty((n, 6))
    iters = np.zeros(n, dtype=np.int64)
    resnorms = np.zeros(n)
    poses[0] = p0
    target = 0.5 * h * (mat @ chi0)
    guess = 0.5 * h * chi0
    f, it, rn, status = _newton(guess, m11, m12, m21, m22, simple, mass, target, tol, max_iterations, cond_limit)
    iters[0] = it
    resnorms[0] = rn
    if status != _STATUS_OK:
        return poses, steps, twists, iters, resnorms, status, 0
    steps[0] = f
    twists[0] = (2.0 / h) * (minv @ _residual_ab(f, m11, m12, m21, m22))
    for k in range(1, n):
        poses[k] = dq_mul(poses[k - 1], _step_dq(steps[k - 1]))
        target = _transported_ab(steps[k - 1], m11, m12, m21, m22)
        f, it, rn, status = _newton(steps[k - 1], m11, m12, m21, m22, simple, mass, target, tol, max_iterations, cond_limit)
        iters[k] = it
        resnorms[k] = rn
        if status != _STATUS_OK:
            return poses, steps, twists, iters, resnorms, status, k
        steps[k] = f
        twists[k] = (2.0 / h) * (minv @ _residual_ab(f, m11, m12, m21, m22))
    return poses, steps, twists, iters, resnorms, _STATUS_OK, -1


def _as_step(step) -> Array:
    f = np.ascontiguousarray(step, dtype=np.float64)
    if f.shape != (6,):
        raise ValidationError(f"step variables must have shape (6,), got {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValidationError("step variables contain non-finite entries")
    n2 = float(f[:3] @ f[:3])
    if n2 >= 1.0:
        raise StepTooLargeError(
            f"|Phi| = {np.sqrt(n2):.6g} >= 1: the incremental rotation reaches 180 degrees; "
            "reduce the time step"
        )
    return f


def _fast_path(M: InertiaMatrix6) -> tuple[bool, float]:
    """Whether the simplified center-of-mass Jacobian applies, and the mass."""
    if M.coupled:
        return False, 0.0
    mass = float(M.m22[0, 0])
    if mass > 0.0 and np.array_equal(M.m22, mass * np.eye(3)):
        return True, mass
    return False, 0.0


def _wrench_body_vector(wrench) -> Array:
    if wrench is None:
        return np.zeros(6)
    if isinstance(wrench, Wrench):
        if wrench.frame != FRAME_BODY:
            raise ValidationError(
                "wrench must be in the body frame here; rotate a world wrench through the pose first"
            )
        return wrench.vector6
    arr = np.ascontiguousarray(wrench, dtype=np.float64)
    if arr.shape != (6,):
        raise ValidationError(f"wrench must be a Wrench or a 6-vector, got shape {arr.shape}")
    return arr


def step_to_dual_quaternion(step) -> Array:
    """Unit dual quaternion of step variables [Phi; Psi].

    Unit norm and orthogonality hold as algebraic identities of this
    parametrization, not approximately.
    """
    return _step_dq(_as_step(step))


def residual(step, M: InertiaMatrix6) -> tuple[Array, Array]:
    """Step momentum (A, B): rotational and translational components."""
    f = _as_step(step)
    out = _residual_ab(f, M.m11, M.m12, M.m21, M.m22)
    return out[:3], out[3:]


def rhs(prev_step, M: InertiaMatrix6, wrench, h: float) -> tuple[Array, Array]:
    """Newton target (alpha, beta): transported previous momentum plus the
    wrench impulse (h^2/2) [torque; force], body frame."""
    f = _as_step(prev_step)
    tau = _wrench_body_vector(wrench)
    out = _transported_ab(f, M.m11, M.m12, M.m21, M.m22) + (0.5 * h * h) * tau
    return out[:3], out[3:]


def jacobian(step, M: InertiaMatrix6, method: str = "auto") -> Array:
    """Analytic d[A; B]/d[Phi; Psi].

    ``method`` picks "general" or "simplified" explicitly; "auto" uses the
    simplified form exactly when the inertia qualifies (center-of-mass
    reference, isotropic mass block). Both forms agree there.
    """
    f = _as_step(step)
    simple, mass = _fast_path(M)
    if method == "auto":
        method = "simplified" if simple else "general"
    if method == "simplified":
        if not simple:
            raise ValidationError(
                "simplified Jacobian needs M12 = M21 = 0 and an isotropic mass block"
            )
        return _jacobian_simple(f, M.m11, mass)
    if method != "general":
        raise ValidationError(f"unknown Jacobian method {method!r}")
    return _jacobian_general(f, M.m11, M.m12, M.m21, M.m22)


def initial_guess(chi, h: float) -> Array:
    """Warm start (h/2) * [omega; v] for the first step's Newton solve."""
    chi = np.ascontiguousarray(chi, dtype=np.float64)
    if chi.shape != (6,):
        raise ValidationError(f"twist must have shape (6,), got {chi.shape}")
    f = 0.5 * float(h) * chi
    if float(f[:3] @ f[:3]) >= 1.0:
        raise StepTooLargeError(
            f"h*|omega|/2 = {0.5 * h * np.linalg.norm(chi[:3]):.6g} >= 1: one step would "
            "rotate 180 degrees or more; reduce the time step"
        )
    return f


def solve_step(prev_step, M: InertiaMatrix6, wrench, settings: SolverSettings):
    """Solve one implicit step from the previous step variables.

    Returns (step, iterations, residual_norm). The warm start is the
    previous step itself.
    """
    f_prev = _as_step(prev_step)
    alpha, beta = rhs(f_prev, M, wrench, settings.h)
    target = np.concatenate([alpha, beta])
    simple, mass = _fast_path(M)
    f, it, rn, status = _newton(
        f_prev, M.m11, M.m12, M.m21, M.m22, simple, mass, target,
        settings.tolerance, settings.max_iterations, COND_LIMIT,
    )
    _raise_for_status(status, it, rn)
    return f, it, rn


def _raise_for_status(status: int, iterations: int, residual_norm: float, step_index: Optional[int] = None) -> None:
    where = "" if step_index is None else f" at step {step_index}"
    if status == _STATUS_OK:
        return
    if status == _STATUS_SINGULAR:
        raise SingularMatrixError(
            f"Newton Jacobian is singular or too ill-conditioned{where} "
            f"(iteration {iterations})"
        )
    if status == _STATUS_INFEASIBLE:
        raise SolverDivergenceError(
            f"Newton update could not keep |Phi| < 1{where}: the step rotation "
            "is reaching 180 degrees; reduce the time step",
            residual_norm=residual_norm,
            iterations=iterations,
            step_index=step_index,
        )
    raise SolverDivergenceError(
        f"Newton did not reach tolerance within {iterations} iterations{where} "
        f"(last residual norm {residual_norm:.3e})",
        residual_norm=residual_norm,
        iterations=iterations,
        step_index=step_index,
    )


def advance_pose(pose, step) -> Array:
    """p_{k+1} = p_k x step, staying on the unit group by construction."""
    p = np.ascontiguousarray(pose, dtype=np.float64)
    return dq_mul(p, step_to_dual_quaternion(step))


def retrieve_twist(step, M: InertiaMatrix6, h: float) -> Array:
    """Body twist consistent with the step momentum: (2/h) M^-1 [A; B]."""
    f = _as_step(step)
    return (2.0 / float(h)) * (M.inverse @ _residual_ab(f, M.m11, M.m12, M.m21, M.m22))


def simulate(
    pose0,
    twist0,
    M: InertiaMatrix6,
    forces: Sequence = (),
    settings: SolverSettings = SolverSettings(h=1e-3),
    n_steps: int = 1000,
) -> Trajectory:
    """Integrate n_steps steps from (pose0, twist0); returns states 0..n_steps.

    State 0 solves the momentum-match system [A; B](f_0) = (h/2) M chi_0
    (no wrench: f_0 encodes the starting momentum itself) warm-started from
    (h/2) chi_0. Step k >= 1 advances the pose by the previous step, samples
    the force models once at (p_k, chi_{k-1}, k*h), and solves for f_k warm-
    started from f_{k-1}. The final state's step variables are solved too,
    which is what retrieves its twist; they are never applied to the pose.

    Velocity-dependent forces see the previous retrieved twist because the
    current one does not exist until its step is solved.
    """
    p0 = np.ascontiguousarray(check_pose(pose0))
    chi0 = np.ascontiguousarray(twist0, dtype=np.float64)
    if chi0.shape != (6,):
        raise ValidationError(f"twist must have shape (6,), got {chi0.shape}")
    if not np.all(np.isfinite(chi0)):
        raise ValidationError("twist contains non-finite entries")
    n_steps = int(n_steps)
    if n_steps < 0:
        raise ValidationError(f"n_steps must be >= 0, got {n_steps}")
    h = settings.h
    initial_guess(chi0, h)  # fail fast on a step rotation >= 180 degrees
    simple, mass = _fast_path(M)
    force_models = list(forces)

    wrenches = np.zeros((n_steps + 1, 6))
    if not force_models:
        poses, steps, twists, iters, resnorms, status, bad_k = _simulate_free(
            p0, chi0, M.matrix, M.inverse, M.m11, M.m12, M.m21, M.m22,
            simple, mass, h, settings.tolerance, settings.max_iterations,
            n_steps, COND_LIMIT,
        )
        if status != _STATUS_OK:
            _raise_for_status(status, int(iters[bad_k]), float(resnorms[bad_k]), bad_k)
    else:
        n = n_steps + 1
        poses = np.empty((n, 8))
        steps = np.empty((n, 6))
        twists = np.empty((n, 6))
        iters = np.zeros(n, dtype=np.int64)
        resnorms = np.zeros(n)
        poses[0] = p0
        target = 0.5 * h * (M.matrix @ chi0)
        f, it, rn, status = _newton(
            0.5 * h * chi0, M.m11, M.m12, M.m21, M.m22, simple, mass, target,
            settings.tolerance, settings.max_iterations, COND_LIMIT,
        )
        iters[0] = it
        resnorms[0] = rn
        _raise_for_status(status, it, rn, 0)
        steps[0] = f
        twists[0] = (2.0 / h) * (M.inverse @ _residual_ab(f, M.m11, M.m12, M.m21, M.m22))
        for k in range(1, n):
            poses[k] = dq_mul(poses[k - 1], _step_dq(steps[k - 1]))
            tau = total_wrench(force_models, poses[k], twists[k - 1], k * h)
            wrenches[k] = tau
            target = _transported_ab(steps[k - 1], M.m11, M.m12, M.m21, M.m22)
            target += (0.5 * h * h) * tau
            f, it, rn, status = _newton(
                steps[k - 1], M.m11, M.m12, M.m21, M.m22, simple, mass, target,
                settings.tolerance, settings.max_iterations, COND_LIMIT,
            )
            iters[k] = it
            resnorms[k] = rn
            _raise_for_status(status, it, rn, k)
            steps[k] = f
            twists[k] = (2.0 / h) * (M.inverse @ _residual_ab(f, M.m11, M.m12, M.m21, M.m22))

    times = np.arange(n_steps + 1) * h
    return Trajectory.from_raw(
        times=times,
        poses=poses,
        twists=twists,
        inertia=M,
        force_models=force_models,
        steps=steps,
        iterations=iters,
        residual_norms=resnorms,
        applied_wrenches=wrenches,
        h=h,
    )
