"""Monte Carlo measurement-uncertainty evaluation with virtual experiments.

Two engines produce samples of a univariate measurand:

* :func:`run_jcgm101` propagates the data mean and the Type B inputs
  through the measurement model obtained by inverting the VE kernel;
* :func:`run_mc_ve` runs the VE itself at an arbitrary hypothetical
  measurand value and corrects every simulated mean.

For VEs affine in the measurand both give the same distribution.
"""

from .engines import EngineConfig, SampleSet, run_jcgm101, run_mc_ve, run_mc_ve_given_z, sample_conditional
from .model import (
    AffineParts,
    MeasurementData,
    TypeBSpec,
    VirtualExperiment,
    check_affine,
    eval_forward,
    extract_affine,
    invert_measurement,
)
from .randkit import Gaussian, Uniform, derive_substream
from .scenarios import Scenario, generic_example, generic_true_moments, get_scenario, load_scenario, mass_calibration
from .stats import compare_samples, shortest_coverage_interval, summarize

__version__ = "0.1.0"
