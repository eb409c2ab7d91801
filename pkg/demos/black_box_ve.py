"""
A black-box virtual experiment
==============================

MC-VE only needs to run the VE and its slope in ``y``; the offset term is
never identified. Here the VE is an ordinary Python function.
"""

# %%
import numpy as np

from mcve import EngineConfig, MeasurementData, TypeBSpec, Uniform, VirtualExperiment, check_affine
from mcve import run_jcgm101, run_mc_ve, summarize
from mcve.randkit import Gaussian


def sensor(y, z):
    # gain and a temperature-dependent offset
    gain = 2.0 + 0.05 * (z["temp"] - 20.0)
    return gain * y + np.sin(z["temp"] / 10.0) + z["bias"]


typeb = TypeBSpec((("temp", Uniform(18.0, 24.0)), ("bias", Gaussian(0.0, 0.01))))
data = MeasurementData(mean=9.3, count=4, variance=0.04)
ve = VirtualExperiment(sensor, noise_variance=data.variance)

# %%
# The procedure is exact only for VEs affine in y; check a few points first.
print(check_affine(ve, {"temp": 21.0, "bias": 0.0}, probes=(-5.0, 0.0, 5.0, 50.0)))

# %%
a = run_jcgm101(ve, data, typeb, EngineConfig(n=200_000, master_seed=1))
b = run_mc_ve(ve, data, typeb, EngineConfig(n=200_000, master_seed=2, y0=123.0))
for label, s in [("JCGM 101", a), ("MC-VE", b)]:
    r = summarize(s)
    print(f"{label:>9}: {r.mean:.4f} +- {r.std:.4f}  [{r.ci_low:.3f}, {r.ci_high:.3f}]")

# %%
# A VE that is not affine in y is caught before sampling.
bad = VirtualExperiment(lambda y, z: y * y + z["bias"], noise_variance=data.variance)
try:
    run_mc_ve(bad, data, typeb, EngineConfig(n=10))
except ValueError as exc:
    print("rejected:", exc)
