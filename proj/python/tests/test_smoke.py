import json
import math
from pathlib import Path

import numpy as np
import pytest

import oogrisk

DATA = Path(__file__).resolve().parents[2] / "data"


def test_guarantee_arithmetic():
    assert oogrisk.hoeffding_sample_count(0.1, 0.05) == 185
    assert round(oogrisk.campi_epsilon(21, 1, 0.01), 4) == 0.4142
    assert oogrisk.min_samples_for_epsilon(0.4142 + 5e-5, 0.01) == 21


def test_static_gain():
    one = np.ones((1, 1))
    zero = np.zeros((1, 1))
    r = oogrisk.make_realization(zero, one, zero, 2 * one, zero, one)
    assert oogrisk.oog_gain(r) == pytest.approx(4.0, abs=1e-6)
    assert oogrisk.finite_horizon_oracle(r, 10) == pytest.approx(4.0)


def test_unbounded_gain_is_none():
    a = 0.5
    r = oogrisk.make_realization(
        np.array([[a]]), np.ones((1, 1)), np.ones((1, 1)), np.zeros((1, 1)),
        np.array([[a - 1.0]]), np.ones((1, 1)))
    assert oogrisk.boundedness(r) == "Unbounded"
    assert oogrisk.oog_gain(r) is None


def test_coupled_single_scenario_matches_single():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3, 3))
    A *= 0.6 / max(abs(np.linalg.eigvals(A)))
    r = oogrisk.make_realization(A, rng.standard_normal((3, 1)), rng.standard_normal((2, 3)),
                                 rng.standard_normal((2, 1)), rng.standard_normal((1, 3)),
                                 rng.standard_normal((1, 1)))
    single = oogrisk.oog_gain(r)
    total, gamma = oogrisk.coupled_gain([r])
    assert total == pytest.approx(single, rel=1e-6)
    assert gamma.shape == (1,)


def test_hydro_reports():
    spec = oogrisk.load_config(str(DATA / "hydro_turbine.json"))
    assert spec.params == ["Th"]
    deltas = oogrisk.sample_scenarios(spec, 3)
    assert [d[0] for d in deltas] == [4.0, 5.0, 6.0]

    el = oogrisk.assess_expected_loss(spec, 3, 0.01, threads=2)
    assert el["mode"] == "expected-loss"
    assert el["support_count"] == 1
    assert math.isfinite(el["gamma_ra"])

    var = oogrisk.assess_var(spec, 3, 0.0)
    assert var["var"] == max(s["gamma"] for s in var["per_scenario"])

    r = oogrisk.build_realization(spec, deltas[1])
    assert r.A.shape == (6, 6)
    assert json.loads(spec.to_json())["name"] == "hydro_turbine"


def test_errors_carry_code_and_path():
    with pytest.raises(oogrisk.OogriskError) as info:
        oogrisk.load_config("no/such/file.json")
    assert info.value.code == "Io"
    assert info.value.path == "no/such/file.json"
    with pytest.raises(oogrisk.OogriskError):
        oogrisk.hoeffding_sample_count(0.1, 2.0)
