"""
Mass calibration with air buoyancy
==================================

Deviation of a 100 g weight from its nominal mass, with the conventional
mass of the reference, the air density and both material densities as
Type B inputs. Both engines should agree to the reported precision.
"""

# %%
import numpy as np

from mcve import EngineConfig, mass_calibration, run_jcgm101, run_mc_ve, summarize
from mcve.stats import compare_samples

scenario = mass_calibration()
print(scenario.kernel)
print(scenario.notes)

# %%
cfg = EngineConfig(n=1_000_000, master_seed=7, y0=scenario.default_y0)
jcgm = run_jcgm101(scenario.ve, scenario.data, scenario.typeb, cfg)
mcve = run_mc_ve(scenario.ve, scenario.data, scenario.typeb, cfg)

for label, s in [("JCGM 101", jcgm), ("MC-VE", mcve)]:
    r = summarize(s)
    print(f"{label:>9}: mean {r.mean:.3g} mg, std {r.std:.3g} mg, 95% [{r.ci_low:.3g}, {r.ci_high:.3g}] mg")

# %%
# Two-sample check on independent sub-samples.
report = compare_samples(jcgm.values[:100_000], mcve.values[500_000:600_000])
print(report)

# %%
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

bins = np.linspace(0.9, 1.6, 201)
plt.hist(jcgm.values, bins=bins, density=True, histtype="step", label="JCGM 101")
plt.hist(mcve.values, bins=bins, density=True, histtype="step", label="MC-VE")
plt.xlabel("deviation from nominal mass / mg")
plt.legend()
plt.savefig("mass_calibration.png", dpi=120)
