import json
import math

import numpy as np
import pytest
from scipy import integrate

from mcve.engines import EngineConfig, run_jcgm101, run_mc_ve
from mcve.model import check_affine, extract_affine
from mcve.randkit import Gaussian, Uniform
from mcve.scenarios import (
    BUILTINS,
    ScenarioError,
    fixture_path,
    generic_example,
    generic_true_moments,
    get_scenario,
    load_scenario,
    mass_calibration,
    parse_scenario,
    serialize,
)


def write(tmp_path, obj, name="s.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_generic_definition():
    s = generic_example()
    assert s.kernel == "(1+z)*y"
    assert s.typeb.entries == (("z", Uniform(5.0, 10.0)),)
    assert (s.data.mean, s.data.count, s.data.variance) == (50.0, 1, 1.0)
    assert s.default_y0 == 50 / 8.5
    assert s.ve.noise_variance == 1.0


def test_generic_extract_at_9():
    parts = extract_affine(generic_example().ve, {"z": 9.0})
    assert (parts.delta1, parts.delta2) == (10.0, 0.0)


def test_true_moments_closed_form_by_quadrature():
    # independent oracle: integrate y = x/(1+z) against U(5, 10) and N(50, 1)
    ew, _ = integrate.quad(lambda z: 1 / (1 + z) / 5, 5, 10)
    ew2, _ = integrate.quad(lambda z: 1 / (1 + z) ** 2 / 5, 5, 10)
    ex2 = 50**2 + 1
    mean, std = generic_true_moments()
    assert mean == pytest.approx(50 * ew, rel=1e-12)
    assert std == pytest.approx(math.sqrt(ex2 * ew2 - (50 * ew) ** 2), rel=1e-10)
    assert round(mean, 4) == 6.0614
    assert round(std, 4) == 1.0742


def test_true_moments_match_published_three_sig_figs():
    mean, std = generic_true_moments()
    assert f"{mean:.3g}" == "6.06"
    assert f"{std:.3g}" == "1.07"


def test_mass_definition():
    s = mass_calibration()
    assert dict(s.typeb.entries) == {
        "m_Rc": Gaussian(1e5, 0.0025),
        "rho_a": Uniform(1.1, 1.3),
        "rho_W": Uniform(7000.0, 9000.0),
        "rho_R": Uniform(7950.0, 8050.0),
    }
    assert (s.data.mean, s.data.count, s.data.variance) == (1.2345, 5, 0.001)
    assert s.default_y0 == 1.0 and s.units == "mg"
    assert "(y - 100000)" in s.notes


@pytest.mark.parametrize("rho_w,rho_r", [(7000.0, 7950.0), (9000.0, 8050.0)])
def test_mass_delta1_is_one_at_reference_air(rho_w, rho_r):
    z = {"m_Rc": 100000.01, "rho_a": 1.2, "rho_W": rho_w, "rho_R": rho_r}
    assert extract_affine(mass_calibration().ve, z).delta1 == 1.0


def _mass_std_oracle():
    # Var[(rho_a - 1.2) * (1/rho_W - 1/rho_R)] by quadrature of the uniform moments
    e_a2, _ = integrate.quad(lambda a: (a - 1.2) ** 2 / 0.2, 1.1, 1.3)
    e_iw, _ = integrate.quad(lambda w: 1 / w / 2000, 7000, 9000)
    e_iw2, _ = integrate.quad(lambda w: 1 / w**2 / 2000, 7000, 9000)
    e_ir, _ = integrate.quad(lambda r: 1 / r / 100, 7950, 8050)
    e_ir2, _ = integrate.quad(lambda r: 1 / r**2 / 100, 7950, 8050)
    e_b2 = e_iw2 - 2 * e_iw * e_ir + e_ir2
    var_prod = e_a2 * e_b2  # E[a] = 0, independent factors
    return math.sqrt(0.0025 + 0.001 / 5 + (1.2345 + 1e5) ** 2 * var_prod)


def test_mass_std_oracle_value():
    assert _mass_std_oracle() == pytest.approx(0.0741, abs=5e-4)


@pytest.mark.parametrize("engine", [run_jcgm101, run_mc_ve])
def test_mass_engines_against_moment_oracle(engine):
    s = mass_calibration()
    out = engine(s.ve, s.data, s.typeb, EngineConfig(n=200_000, master_seed=12, y0=s.default_y0))
    assert out.values.std(ddof=1) == pytest.approx(_mass_std_oracle(), rel=0.01)
    assert abs(out.values.mean() - 1.2345) < 5 * 0.0741 / math.sqrt(2e5)


@pytest.mark.parametrize("factory", list(BUILTINS.values()))
def test_builtins_satisfy_invariants(factory):
    s = factory()
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = {name: float(d.from_words(rng.integers(0, 2**63, 1, dtype=np.uint64))[0]) for name, d in s.typeb.entries}
        assert check_affine(s.ve, z, (0, 1, 2)).ok


@pytest.mark.parametrize("factory", list(BUILTINS.values()))
def test_serialize_round_trip(tmp_path, factory):
    s = factory()
    assert load_scenario(write(tmp_path, serialize(s))) == s


def test_shipped_fixtures_equal_builtins():
    assert load_scenario(fixture_path("generic_example.json")) == generic_example()
    assert load_scenario(fixture_path("mass_calibration.json")) == mass_calibration()


def test_get_scenario_by_id_and_path():
    assert get_scenario("generic") == generic_example()
    assert get_scenario(str(fixture_path("mass_calibration.json"))) == mass_calibration()
    with pytest.raises(ScenarioError):
        get_scenario("nope")


def test_load_square_kernel_is_affinity_error(tmp_path):
    obj = serialize(generic_example())
    obj["kernel"] = "y*y"
    with pytest.raises(ScenarioError) as err:
        load_scenario(write(tmp_path, obj))
    assert err.value.kind == "affinity"


def test_load_unbound_identifier(tmp_path):
    obj = serialize(generic_example())
    obj["kernel"] = "(1+z)*y + rho_X"
    with pytest.raises(ScenarioError, match="rho_X") as err:
        load_scenario(write(tmp_path, obj))
    assert err.value.kind == "free_variables"


def test_load_kernel_without_measurand(tmp_path):
    obj = serialize(generic_example())
    obj["kernel"] = "1+z"
    with pytest.raises(ScenarioError) as err:
        load_scenario(write(tmp_path, obj))
    assert err.value.kind == "free_variables"


def test_load_parse_error_has_location(tmp_path):
    with pytest.raises(ScenarioError, match=r":2:") as err:
        load_scenario(write(tmp_path, '{"id": "x",\n "kernel": }'))
    assert err.value.kind == "parse"


def test_load_unknown_distribution(tmp_path):
    obj = serialize(generic_example())
    obj["type_b"][0]["dist"] = {"lognormal": {"mu": 0, "sigma": 1}}
    with pytest.raises(ScenarioError) as err:
        load_scenario(write(tmp_path, obj))
    assert err.value.kind == "distribution"


def test_load_bad_uniform_bounds(tmp_path):
    obj = serialize(generic_example())
    obj["type_b"][0]["dist"] = {"uniform": {"lower": 10, "upper": 5}}
    with pytest.raises(ScenarioError) as err:
        load_scenario(write(tmp_path, obj))
    assert err.value.kind == "distribution"


@pytest.mark.parametrize(
    "mutate",
    [
        lambda o: o.update(extra=1),
        lambda o: o["data"].update(stdev=1),
        lambda o: o["type_b"][0].update(unit="mm"),
        lambda o: o.pop("default_y0"),
        lambda o: o["data"].update(count=1.5),
    ],
)
def test_strict_schema(tmp_path, mutate):
    obj = serialize(generic_example())
    mutate(obj)
    with pytest.raises(ScenarioError) as err:
        load_scenario(write(tmp_path, obj))
    assert err.value.kind == "schema"


def test_units_optional(tmp_path):
    obj = serialize(generic_example())
    del obj["units"]
    del obj["description"]
    assert parse_scenario(obj) == generic_example()


def test_missing_file():
    with pytest.raises(ScenarioError):
        load_scenario("/nonexistent/scenario.json")
