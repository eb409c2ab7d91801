import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcve.model import (
    AffineParts,
    MeasurementData,
    ModelError,
    NearSingularError,
    StochasticVE,
    TypeBSpec,
    VirtualExperiment,
    check_affine,
    default_probes,
    eval_forward,
    extract_affine,
    invert_measurement,
)
from mcve.randkit import Uniform
from mcve.scenarios import MASS_KERNEL

GENERIC = VirtualExperiment.from_expression("(1+z)*y", 1.0)
MASS = VirtualExperiment.from_expression(MASS_KERNEL, 0.001)
MASS_Z = {"m_Rc": 1e5, "rho_a": 1.2, "rho_W": 8000.0, "rho_R": 8000.0}


def test_eval_forward_generic():
    assert eval_forward(GENERIC, 2.0, {"z": 5.0}) == 12


def test_eval_forward_mass_identity_point():
    assert eval_forward(MASS, 0.0, MASS_Z) == 0


def test_eval_forward_deterministic():
    z = {"m_Rc": 100000.03, "rho_a": 1.17, "rho_W": 7300.0, "rho_R": 8011.0}
    assert eval_forward(MASS, 0.7, z) == eval_forward(MASS, 0.7, z)


def test_eval_forward_missing_binding():
    with pytest.raises(ValueError, match="rho_a"):
        eval_forward(MASS, 0.0, {"m_Rc": 1e5})


def test_extract_generic():
    assert extract_affine(GENERIC, {"z": 5.0}) == AffineParts(6.0, 0.0)


@pytest.mark.parametrize("rho_w,rho_r", [(7000.0, 8050.0), (9000.0, 7950.0), (8000.0, 8000.0)])
def test_extract_mass_at_reference_air_density(rho_w, rho_r):
    parts = extract_affine(MASS, {"m_Rc": 1e5, "rho_a": 1.2, "rho_W": rho_w, "rho_R": rho_r})
    assert parts.delta1 == 1.0
    assert parts.delta2 == 0.0


def test_extract_no_z():
    ve = VirtualExperiment(lambda y, z: 2 * y + 3)
    for a, b in [(0, 1), (-7, 13), (2.5, 100)]:
        assert extract_affine(ve, {}, a, b) == AffineParts(2.0, 3.0)


def test_extract_equal_probes_rejected():
    with pytest.raises(ModelError):
        extract_affine(GENERIC, {"z": 5.0}, 1.0, 1.0)


def test_extract_near_singular_carries_z():
    ve = VirtualExperiment.from_expression("(1+z)*y + 5", 1.0)
    with pytest.raises(NearSingularError) as err:
        extract_affine(ve, {"z": -1.0})
    assert err.value.z == {"z": -1.0}


def test_extract_near_singular_array_reports_index():
    with pytest.raises(NearSingularError) as err:
        extract_affine(GENERIC, {"z": np.array([5.0, 6.0, -1.0, 7.0])})
    assert err.value.index == 2
    assert err.value.z == {"z": -1.0}


def test_check_affine_generic():
    for z in (5.0, 7.3, 10.0):
        assert check_affine(GENERIC, {"z": z}, (0, 1, 2)).ok


def test_check_affine_rejects_square():
    ve = VirtualExperiment(lambda y, z: y * y)
    res = check_affine(ve, {}, (0, 1, 2))
    assert not res.ok
    assert res.worst_probe == 2
    assert res.residual == 2


def test_check_affine_offset_in_z():
    ve = VirtualExperiment(lambda y, z: (1 + z["z"]) * y + z["z"] ** 2)
    assert check_affine(ve, {"z": 3.0}, (-1, 0, 3)).ok


@pytest.mark.parametrize(
    "kernel",
    [lambda y, z: y * y, lambda y, z: np.exp(y), lambda y, z: abs(y), lambda y, z: y**3],
)
def test_check_affine_rejects_nonlinear(kernel):
    assert not check_affine(VirtualExperiment(kernel), {}, (-1.0, 0.5, 2.0, -3.0)).ok


def test_check_affine_needs_three_probes():
    with pytest.raises(ModelError):
        check_affine(GENERIC, {"z": 5.0}, (0, 1))


def test_default_probes_scale_with_y0():
    assert default_probes(0.3) == (0.0, 1.0, 2.0)
    assert default_probes(-100) == (0.0, 100.0, 200.0)


PROBE_SETS = [(0, 1, 2), (-1, 0, 3), (0, 100, 200), (-7, 13, 0.5, 42)]


@pytest.mark.parametrize("probes", PROBE_SETS)
def test_check_affine_accepts_builtin_kernels(probes):
    rng = np.random.default_rng(3)
    for _ in range(50):
        assert check_affine(GENERIC, {"z": rng.uniform(5, 10)}, probes).ok
        z = {
            "m_Rc": rng.normal(1e5, 0.05),
            "rho_a": rng.uniform(1.1, 1.3),
            "rho_W": rng.uniform(7000, 9000),
            "rho_R": rng.uniform(7950, 8050),
        }
        assert check_affine(MASS, z, probes).ok


def test_invert_examples():
    assert invert_measurement(50.0, AffineParts(6.0, 0.0)) == pytest.approx(8.333333333333334, rel=1e-15)
    assert invert_measurement(3.7, AffineParts(-2.5, 3.7)) == 0
    parts = extract_affine(MASS, MASS_Z)
    assert invert_measurement(1.2345, parts) == 1.2345


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(
    a=st.floats(0.01, 100).flatmap(lambda m: st.sampled_from([m, -m])),
    b=finite,
    y=finite,
)
def test_round_trip_affine(a, b, y):
    ve = VirtualExperiment(lambda yy, z: z["a"] * yy + z["b"])
    z = {"a": a, "b": b}
    back = invert_measurement(eval_forward(ve, y, z), extract_affine(ve, z))
    assert math.isclose(back, y, rel_tol=1e-10, abs_tol=1e-10 * (1 + abs(b) / abs(a)))


@given(z=st.floats(5, 10), y=st.floats(-1e3, 1e3))
def test_round_trip_generic(z, y):
    back = invert_measurement(eval_forward(GENERIC, y, {"z": z}), extract_affine(GENERIC, {"z": z}))
    assert math.isclose(back, y, rel_tol=1e-10, abs_tol=1e-12)


@given(z=st.floats(5, 10))
def test_extract_probe_invariance(z):
    p1 = extract_affine(GENERIC, {"z": z}, 0, 1)
    p2 = extract_affine(GENERIC, {"z": z}, -7, 13)
    assert math.isclose(p1.delta1, p2.delta1, rel_tol=1e-9)
    assert abs(p1.delta2 - p2.delta2) <= 1e-9 * max(1.0, abs(p1.delta1))


def test_extract_probe_invariance_mass():
    z = {"m_Rc": 100000.02, "rho_a": 1.28, "rho_W": 7100.0, "rho_R": 8040.0}
    p1 = extract_affine(MASS, z, 0, 1)
    p2 = extract_affine(MASS, z, -7, 13)
    assert math.isclose(p1.delta1, p2.delta1, rel_tol=1e-9)


def test_measurement_data_invariants():
    with pytest.raises(ModelError):
        MeasurementData(1.0, 0, 1.0)
    with pytest.raises(ModelError):
        MeasurementData(1.0, 1, 0.0)


def test_typeb_rejects_duplicates_and_bad_names():
    with pytest.raises(ModelError):
        TypeBSpec((("z", Uniform(0, 1)), ("z", Uniform(0, 1))))
    with pytest.raises(ModelError):
        TypeBSpec((("1z", Uniform(0, 1)),))


def test_stochastic_ve_forward_sets_noise_to_zero():
    ve = StochasticVE(lambda y, z, w: (1 + z["z"]) * y * (1 + w), "lognormal", (0.1,))
    assert ve.forward(2.0, {"z": 5.0}) == 12.0
