"""Trajectory container: file round trips, comparison, summaries."""

import numpy as np
import pytest

from dqdyn.dynamics import build_inertia
from dqdyn.errors import ValidationError
from dqdyn.integrator import SolverSettings, simulate
from dqdyn.kinematics import pose_identity
from dqdyn.newton_euler import rk4_simulate
from dqdyn.trajectory import (
    FIELD_GROUPS,
    Trajectory,
    compare_trajectories,
    read_trajectory,
    summarize,
    write_trajectory,
)


@pytest.fixture(scope="module")
def spinning_run():
    M = build_inertia(1.0, np.diag([1.0, 2.0, 3.0]))
    chi0 = np.array([0.9, -0.3, 0.4, 0.2, 0.0, -0.1])
    return simulate(pose_identity(), chi0, M, (), SolverSettings(h=1e-3), 50)


def test_write_read_round_trip_is_lossless(spinning_run, tmp_path):
    path = tmp_path / "traj.tsv"
    write_trajectory(spinning_run, path)
    back = read_trajectory(path)
    np.testing.assert_array_equal(back.times, spinning_run.times)
    np.testing.assert_array_equal(back.poses, spinning_run.poses)
    np.testing.assert_array_equal(back.twists, spinning_run.twists)
    np.testing.assert_array_equal(back.kinetic, spinning_run.kinetic)
    np.testing.assert_array_equal(back.potential, spinning_run.potential)
    np.testing.assert_array_equal(back.angular_momentum, spinning_run.angular_momentum)
    np.testing.assert_array_equal(back.iterations, spinning_run.iterations)
    np.testing.assert_array_equal(back.residual_norms, spinning_run.residual_norms)
    np.testing.assert_array_equal(back.unit_norm_errors, spinning_run.unit_norm_errors)
    np.testing.assert_array_equal(
        back.orthogonality_errors, spinning_run.orthogonality_errors
    )


def test_write_full_schema_header(spinning_run, tmp_path):
    path = tmp_path / "traj.tsv"
    write_trajectory(spinning_run, path)
    header = path.read_text().splitlines()[0].split("\t")
    assert header == [
        "t",
        "p_rw", "p_rx", "p_ry", "p_rz", "p_dw", "p_dx", "p_dy", "p_dz",
        "omega_x", "omega_y", "omega_z", "v_x", "v_y", "v_z",
        "energy", "kinetic_energy", "potential_energy",
        "L_x", "L_y", "L_z",
        "newton_iterations", "residual_norm",
        "unit_norm_error", "orthogonality_error",
    ]


def test_stride_thins_but_keeps_final_row(spinning_run, tmp_path):
    path = tmp_path / "thin.tsv"
    write_trajectory(spinning_run, path, stride=7)
    back = read_trajectory(path)
    # states 0, 7, ..., 49 plus the final state 50
    assert back.n_states == 9
    assert back.times[-1] == spinning_run.times[-1]
    np.testing.assert_array_equal(back.poses[-1], spinning_run.poses[-1])


def test_field_subset(spinning_run, tmp_path):
    path = tmp_path / "subset.tsv"
    write_trajectory(spinning_run, path, fields=("twist", "pose"))
    back = read_trajectory(path)
    np.testing.assert_array_equal(back.poses, spinning_run.poses)
    assert back.kinetic is None
    assert back.iterations is None
    assert back.angular_momentum is None
    header = path.read_text().splitlines()[0]
    # canonical column order is kept even when the request lists twist first
    assert header.startswith("t\tp_rw")
    with pytest.raises(ValidationError):
        write_trajectory(spinning_run, path, fields=("pose", "nonsense"))


def test_rk4_file_has_same_schema(tmp_path):
    M = build_inertia(1.0, np.diag([1.0, 2.0, 3.0]))
    chi0 = np.array([0.9, -0.3, 0.4, 0.0, 0.0, 0.0])
    traj = rk4_simulate(pose_identity(), chi0, M, (), SolverSettings(h=1e-3), 20)
    path = tmp_path / "rk4.tsv"
    write_trajectory(traj, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 22
    back = read_trajectory(path)
    # solver columns exist for schema stability; the fills mark "no data"
    assert np.all(back.iterations == 0)
    assert np.all(np.isnan(back.residual_norms))


def test_read_rejects_missing_required_columns(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("t\tp_rw\n0.0\t1.0\n")
    with pytest.raises(ValidationError):
        read_trajectory(path)
    path.write_text("t\tx\n")
    with pytest.raises(ValidationError):
        read_trajectory(path)


def test_compare_identical_is_zero(spinning_run):
    report = compare_trajectories(spinning_run, spinning_run)
    assert report.n_common == spinning_run.n_states
    assert report.max_pose_error == 0.0
    assert report.max_twist_error == 0.0


def test_compare_shifted_equals_one_step_displacement():
    # pure z spin at rate 2: every step displaces the pose by exactly h*|omega|
    M = build_inertia(1.0, np.diag([1.0, 2.0, 3.0]))
    chi0 = np.array([0.0, 0.0, 2.0, 0.0, 0.0, 0.0])
    traj = simulate(pose_identity(), chi0, M, (), SolverSettings(h=1e-3), 30)
    shifted = Trajectory(
        times=traj.times[:-1],
        poses=traj.poses[1:],
        twists=traj.twists[1:],
    )
    report = compare_trajectories(traj, shifted)
    assert report.n_common == 30
    from dqdyn.kinematics import pose_difference_magnitude

    d01 = pose_difference_magnitude(traj.poses[0], traj.poses[1])
    np.testing.assert_allclose(report.pose_errors, d01, rtol=1e-12)
    # the discrete step angle is 2*asin(phi), h*|omega| + O(h^3)
    assert d01 == pytest.approx(2e-3, rel=1e-5)


def test_compare_disjoint_grids_raises(spinning_run):
    other = Trajectory(
        times=spinning_run.times + 0.5,
        poses=spinning_run.poses,
        twists=spinning_run.twists,
    )
    with pytest.raises(ValidationError):
        compare_trajectories(spinning_run, other)


def test_summarize_keys(spinning_run):
    stats = summarize(spinning_run)
    assert stats["states"] == 51
    assert stats["duration"] == pytest.approx(0.05)
    for key in (
        "energy_drift",
        "relative_energy_drift",
        "momentum_drift",
        "relative_momentum_drift",
        "max_unit_norm_error",
        "max_orthogonality_error",
        "mean_newton_iterations",
        "max_newton_iterations",
        "max_residual_norm",
    ):
        assert key in stats
    assert stats["mean_newton_iterations"] >= 1.0


def test_field_groups_frozen():
    assert FIELD_GROUPS == ("pose", "twist", "energy", "momentum", "solver", "constraints")
