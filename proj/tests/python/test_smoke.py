"""Smoke tests for the dnls_py extension module."""

import json
import math

import dnls_py


def test_classify_and_ray():
    assert dnls_py.classify(1 + 0.75j, 0.25) == "InD"
    assert dnls_py.classify(1j, 0.5) == "InCOnly"
    assert dnls_py.classify(1 - 1j, 0.5) == "Outside"
    a = dnls_py.make_dm_coefficient(0.25, 1.0)
    assert abs(a - (1 + 0.75j)) < 1e-14
    assert dnls_py.classify(a, 0.25) == "InD"


def test_delta_and_eps_star():
    assert math.isclose(dnls_py.delta(1, 1, 0.3), (3 + 0.3) / 4)
    assert dnls_py.delta(2, 1, 0.7) == 1.0
    assert math.isclose(dnls_py.eps_star(1.0, 0.75), 0.012457715459165616, rel_tol=1e-12)


def test_pointwise_maps():
    assert dnls_py.g_eps(0j, 0.5, 0.0) == 0j
    assert abs(dnls_py.g_eps(2 + 0j, 0.5) - math.sqrt(2)) < 1e-14
    w = dnls_py.accretivity_witness(1 + 1j, -0.5j, 1j, 0.5)
    assert w >= 0.0


def test_envelope():
    assert math.isclose(dnls_py.envelope_extinction_time(1.0, 1.0, 0.75), 2.0)
    assert dnls_py.envelope_eval(1.0, 1.0, 0.75, 0.0, 3.0) == 0.0
    assert math.isinf(dnls_py.envelope_extinction_time(1.0, 1.0, 1.0))


def test_run_simulation_ledger():
    config = {
        "grid": {"counts": [32], "lengths": [1.0]},
        "m": 0.5,
        "a": {"ray_re": 1.0},
        "initial": {"kind": "sine", "amplitude": 1.0},
        "time": {"dt": 0.001, "steps": 200},
    }
    out = dnls_py.run_simulation(json.dumps(config), ["mass-identity"])
    assert out["exit_code"] == 0
    ledger = out["ledger"]
    mass = ledger["mass"]
    assert len(mass) == 201
    # strictly dissipative while the state is alive
    assert all(b < a for a, b in zip(mass, mass[1:]) if a > 0)
    assert max(ledger["identity_residual"]) <= 1e-9
    report = json.loads(out["report_json"])
    assert report["schema_version"] == 1
    assert report["classification"] == "InD"


def test_detect_extinction_roundtrip():
    t = [0.1 * i for i in range(50)]
    mass = [1.0 if ti < 2.0 else 0.0 for ti in t]
    assert dnls_py.detect_extinction(t, mass) == 2.0
    assert dnls_py.detect_extinction(t, [1.0] * 50) is None


def test_presets_listed():
    names = {p["name"] for p in dnls_py.presets()}
    assert "extinction-1d" in names
    assert "decay-2d" in names
