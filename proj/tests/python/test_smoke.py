"""End-to-end smoke checks of the python bindings and the CLI binary.

The heavy numerical guarantees live in the C++ unit and acceptance suites;
here we only confirm the surface is usable from python and that the CLI
honors its exit-code contract.
"""

import math
import os
import subprocess

import numpy as np
import pytest

import serpa

CLI = os.environ.get("SERPA_CLI")


def test_tasks_have_expected_shapes():
    pp = serpa.predator_prey_task()
    assert (pp.num_worlds(), pp.num_actions(), pp.input_dim()) == (15, 13, 4)
    mug = serpa.mug_task()
    assert (mug.num_worlds(), mug.num_actions(), mug.input_dim()) == (4, 4, 192)
    assert np.isclose(np.asarray(mug.prior).sum(), 1.0)
    templates = np.asarray(serpa.mug_templates())
    assert templates.shape == (4, 192)
    assert set(np.unique(templates)) == {0.0, 1.0}


def test_metrics_match_mutual_information():
    mug = serpa.mug_task()
    pxw = np.full((4, 4), 0.25)
    pax = np.eye(4)
    m = serpa.metrics(mug.prior, mug.utility, pxw, pax, 2.0, 3.0)
    assert m.I_wx == pytest.approx(0.0, abs=1e-12)
    joint = np.diag(np.asarray(mug.prior).ravel()) @ pxw
    assert serpa.mutual_information(joint) == pytest.approx(0.0, abs=1e-12)
    assert m.J == pytest.approx(m.expected_utility - m.I_xa / 3.0)


def test_solver_reaches_a_fixed_point():
    mug = serpa.mug_task()
    report = serpa.solve_serial(mug, 2.0, 3.0, num_percepts=4, restarts=3)
    sol = report.best
    assert sol.converged
    assert len(report.J_values) == 3
    rows = np.asarray(sol.p_x_given_w).sum(axis=1)
    assert np.allclose(rows, 1.0, atol=1e-12)
    assert sol.J == pytest.approx(5.8457248963, abs=1e-6)


def test_training_is_deterministic():
    mug = serpa.mug_task()
    cfg = serpa.TrainingConfig()
    cfg.beta1, cfg.beta2 = 2.0, 3.0
    cfg.alpha_vw, cfg.alpha_eta = 0.035, 0.7
    cfg.iterations, cfg.stride, cfg.seed = 500, 100, 23
    cfg.hidden, cfg.num_percepts = 4, 4
    a = serpa.train(mug, cfg)
    b = serpa.train(mug, cfg)
    assert [s.iteration for s in a.snapshots] == [0, 100, 200, 300, 400, 500]
    assert all(math.isfinite(s.J) for s in a.snapshots)
    assert a.snapshots[-1].J == b.snapshots[-1].J
    assert np.array_equal(np.asarray(a.net.V), np.asarray(b.net.V))
    assert np.array_equal(np.asarray(a.channel.eta), np.asarray(b.channel.eta))


def test_run_writes_artifacts(tmp_path):
    spec = serpa.RunSpec()
    spec.task, spec.mode = "mug", "analytic"
    spec.beta1, spec.beta2 = 2.0, 3.0
    spec.out = str(tmp_path / "out")
    result = serpa.run(spec)
    assert result.converged
    for name in ("config.txt", "convergence.csv", "behavior.csv", "summary.txt"):
        assert (tmp_path / "out" / name).is_file()


def test_config_error_is_a_python_exception():
    spec = serpa.RunSpec()
    spec.task = "no_such_task"
    spec.out = "unused"
    with pytest.raises(serpa.ConfigError):
        serpa.run(spec)


@pytest.mark.skipif(CLI is None, reason="SERPA_CLI not set")
class TestCli:
    def test_help_exits_zero(self):
        proc = subprocess.run([CLI, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "run" in proc.stdout and "reproduce" in proc.stdout

    def test_bad_flag_exits_two(self):
        proc = subprocess.run([CLI, "run", "--no-such-flag"], capture_output=True)
        assert proc.returncode == 2

    def test_unknown_task_exits_two(self, tmp_path):
        proc = subprocess.run(
            [CLI, "run", "--task", "bogus", "--out", str(tmp_path / "x")],
            capture_output=True,
        )
        assert proc.returncode == 2

    def test_analytic_run_writes_artifacts(self, tmp_path):
        out = tmp_path / "cli_out"
        proc = subprocess.run(
            [CLI, "run", "--task", "mug", "--mode", "analytic", "--beta1", "2",
             "--beta2", "3", "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "final_J=" in proc.stdout
        assert (out / "summary.txt").is_file()
