import json
import math

import numpy as np
import pytest

import patchlab


def test_circle_frame_and_velocity():
    c = patchlab.circle(64, 1.0)
    f = patchlab.build_frame(c)
    assert np.allclose(f.kappa, 1.0, atol=1e-12)
    bv = patchlab.boundary_velocity(c)
    speed = np.hypot(bv["vx"], bv["vy"])
    assert np.allclose(speed, math.pi, atol=1e-12)
    assert np.max(np.abs(bv["a"])) < 1e-11
    assert patchlab.arc_chord_ratio(c) == pytest.approx(math.pi / 2)


def test_invariants_of_ellipse():
    inv = patchlab.invariants(patchlab.ellipse(256, 2.0, 1.0))
    assert inv["area"] == pytest.approx(2 * math.pi, rel=1e-13)
    assert inv["turning"] == pytest.approx(2 * math.pi, rel=1e-13)


def test_hilbert_and_group():
    n = 128
    xi = 2 * np.pi * np.arange(n) / n
    f = np.cos(3 * xi)
    assert np.allclose(patchlab.hilbert(f), np.sin(3 * xi), atol=1e-13)
    assert np.allclose(patchlab.dispersion_group(f, 1.0), -f, atol=1e-14)


def test_norms():
    n = 256
    g = np.ones(n)
    norms = patchlab.lp_norms(np.full(n, 2.0), g, [1.0, 8.0, math.inf])
    assert np.allclose(norms, 2.0)
    assert patchlab.holder_seminorm(np.ones(n), 0.5) == 0.0


def test_curve_round_trip(tmp_path):
    c = patchlab.ellipse(64, 2.0, 1.0)
    path = str(tmp_path / "e.json")
    patchlab.save_curve(c, path)
    back = patchlab.load_curve(path)
    assert np.array_equal(back.x, c.x)
    assert "kind        curve" in patchlab.describe_snapshot(path)


def test_illposed_data():
    curve, state = patchlab.build_illposed_data(epsilon=0.1, n_nodes=1024)
    assert len(curve) == 1024
    assert state.kappa[0] == 0.0
    with pytest.raises(patchlab.FeatureUnresolved):
        patchlab.build_illposed_data(epsilon=0.001, n_nodes=1024)


def test_short_simulation():
    snaps = patchlab.simulate(patchlab.circle(32), dt=0.01, t_end=0.05, formulation="both", snapshot_stride=5)
    assert len(snaps) == 2
    assert snaps[-1]["time"] == pytest.approx(0.05)
    assert snaps[-1]["intrinsic"] is not None


def test_experiment_and_errors(tmp_path):
    out = tmp_path / "h"
    summary = patchlab.run_experiment({"kind": "hilbert_check", "output_dir": str(out)})
    assert "hilbert_check.csv" in summary["files"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    with pytest.raises(patchlab.ConfigError):
        patchlab.validate_config({"kind": "simulate", "bogus": 1})
    with pytest.raises(ValueError):
        patchlab.validate_config({"kind": "nope"})
    resolved = patchlab.validate_config({"kind": "simulate"})
    assert resolved["simulation"]["n_nodes"] == 256
