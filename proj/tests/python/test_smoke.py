import math

import numpy as np
import pytest

import mkrf


def test_fs_state_is_a_soliton():
    s = mkrf.state("cp1", 65)
    assert np.allclose(s["h"], 1.0, atol=1e-12)
    assert np.allclose(s["R"], 1.0, atol=1e-9)
    assert s["Y_X"] < 1e-20


def test_inadmissible_potential_raises():
    tau = mkrf.state("cp1", 65)["tau"]
    with pytest.raises(mkrf.DegenerateMetric):
        mkrf.state("cp1", 65, psi=-3.0 * tau**2)


def test_koiso_constant():
    # root of int_1^3 (tau - 2) tau e^{-c tau} dtau, independent of the solver
    def g(c):
        s = -c
        F = lambda x: math.exp(s * x) * (x * x / s - 2 * x / s**2 + 2 / s**3 - 2 * (x / s - 1 / s**2))
        return F(3.0) - F(1.0)

    lo, hi = 0.1, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert mkrf.soliton_constant("f1", 129) == pytest.approx(0.5 * (lo + hi), abs=1e-9)
    assert mkrf.soliton_constant("cp1", 65) == pytest.approx(0.0, abs=1e-10)


def test_short_run_decays():
    tr = mkrf.run({"background": "cp1", "perturbation": "p2", "amplitude": 0.1, "grid": 33, "T": 2})
    assert tr.termination == "reached_horizon"
    assert tr.exit_code == 0
    cols = tr.columns()
    assert list(cols) == mkrf.trace_header.split(",")
    y = np.array(cols["Y_X"])
    assert y[-1] < 0.2 * y[0]
    assert mkrf.classify(tr)["verdict"] in {"Convergent", "NonConvergent", "Undecided"}


def test_unknown_key_rejected():
    with pytest.raises(ValueError):
        mkrf.run({"foo": "1"})


def test_cli_roundtrip(tmp_path):
    out = str(tmp_path)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("background = cp1\nc = 0\ngrid = 33\nT = 1\namplitude = 0.05\n")
    code = mkrf.cli(["--out-dir", out, "simulate", "--config", str(cfg)])
    assert code == 0
    tr = mkrf.read_trace(str(tmp_path / "trace.csv"))
    assert len(tr) > 10
    assert mkrf.cli(["classify"]) == 1
