"""Monte Carlo engines: JCGM 101 propagation and the MC-VE procedure.

Both engines give iteration ``i`` its own substream ``(master_seed, i)`` and
read it in a fixed order:

* ``jcgm101``: word 0 -> ``x'``, words ``1..q`` -> Type B values ``z``;
* ``mc_ve``: words ``0..q-1`` -> ``z``, then ``m`` words -> noise
  ``eps_1..eps_m`` (literal inner loop) or one word -> the noise mean
  (fast path, ``literal_inner_loop=False``).

``q`` is the number of Type B inputs and ``m`` the observation count.
Nothing in the ``mc_ve`` layout depends on ``y0``, so two runs with the same
seed and different ``y0`` share all random numbers. Iterations are processed
in fixed-size chunks, optionally on a thread pool; the values are identical
for any worker count.

The linear MC-VE procedure is the special case where ``delta1`` does not
depend on ``z``; it needs no separate code path.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .model import (
    AffineParts,
    AffinityError,
    MeasurementData,
    NearSingularError,
    TypeBSpec,
    VirtualExperiment,
    check_affine,
    default_probes,
    extract_affine,
    invert_measurement,
)
from .randkit import RandomStream, gaussian_from_words, raw_words

__all__ = [
    "EngineError",
    "SampleSet",
    "EngineConfig",
    "run_jcgm101",
    "run_mc_ve",
    "run_mc_ve_given_z",
    "sample_conditional",
    "pilot_check",
    "PILOT_STREAM",
]

#: substream reserved for the pilot draw of the affinity check
PILOT_STREAM = (1 << 64) - 1
CHUNK_SIZE = 1 << 16


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class SampleSet:
    """Measurand draws with their provenance."""

    values: np.ndarray = field(repr=False)
    engine: str
    master_seed: int
    scenario_id: str
    n: int
    y0: Optional[float] = None

    def __post_init__(self):
        if len(self.values) != self.n:
            raise EngineError(f"SampleSet has {len(self.values)} values but n = {self.n}")
        if not np.all(np.isfinite(self.values)):
            raise EngineError("SampleSet contains non-finite values")


@dataclass(frozen=True)
class EngineConfig:
    n: int = 1_000_000
    master_seed: int = 0
    y0: float = 0.0
    literal_inner_loop: bool = True
    workers: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise EngineError(f"n must be an integer >= 1, got {self.n!r}")
        if self.workers < 1:
            raise EngineError(f"workers must be >= 1, got {self.workers!r}")


def pilot_check(ve: VirtualExperiment, typeb: TypeBSpec, master_seed: int, y0: float = 0.0) -> dict[str, float]:
    """Affinity check at one z drawn from the reserved pilot substream.

    Returns the pilot z; raises :class:`AffinityError` on a violation.
    """
    words = raw_words(master_seed, PILOT_STREAM, 0, len(typeb))
    z = {k: float(v[0]) for k, v in typeb.from_words(words).items()}
    result = check_affine(ve, z, default_probes(y0))
    if not result.ok:
        raise AffinityError(result, z)
    return z


def _as_batch(value, size: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=np.float64), (size,))


def _extract(
    ve: VirtualExperiment, z: Mapping[str, np.ndarray], offset: int, size: int, spread: float = 1.0
) -> AffineParts:
    try:
        parts = extract_affine(ve, z, 0.0, spread)
    except NearSingularError as exc:
        if exc.index is None:
            raise
        raise NearSingularError(exc.delta1, exc.z, exc.index + offset) from None
    return AffineParts(_as_batch(parts.delta1, size), _as_batch(parts.delta2, size))


def _run_chunks(fn, n: int, workers: int) -> np.ndarray:
    bounds = [(lo, min(lo + CHUNK_SIZE, n)) for lo in range(0, n, CHUNK_SIZE)]
    if workers == 1 or len(bounds) == 1:
        parts = [fn(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    return np.concatenate(parts)


def run_jcgm101(
    ve: VirtualExperiment,
    data: MeasurementData,
    typeb: TypeBSpec,
    cfg: EngineConfig,
    scenario_id: str = "",
) -> SampleSet:
    """Propagate ``x' ~ N(xbar, s2/m)`` and ``z ~ pi(Z)`` through the inversion.

    The measurement model is ``y' = (x' - delta2(z)) / delta1(z)`` with both
    coefficients read off the kernel at ``z``.
    """
    pilot_check(ve, typeb, cfg.master_seed)
    q = len(typeb)
    var_mean = data.variance / data.count

    def chunk(lo: int, hi: int) -> np.ndarray:
        words = raw_words(cfg.master_seed, np.arange(lo, hi, dtype=np.uint64), 0, 1 + q)
        x = gaussian_from_words(words[:, 0], data.mean, var_mean)
        z = typeb.from_words(words[:, 1:])
        parts = _extract(ve, z, lo, hi - lo)
        return invert_measurement(x, parts)

    values = _run_chunks(chunk, cfg.n, cfg.workers)
    return SampleSet(values, "jcgm101", cfg.master_seed, scenario_id, cfg.n)


def _mc_ve_values(ve, data, z, noise_words, y0, literal, offset, size):
    m = data.count
    h0 = _as_batch(ve.kernel(y0, z), size)
    if literal:
        eps = gaussian_from_words(noise_words, 0.0, data.variance)
        acc = h0 + eps[:, 0]
        for j in range(1, m):
            acc = acc + (h0 + eps[:, j])
        xbar_ve = acc / m
    else:
        xbar_ve = h0 + gaussian_from_words(noise_words[:, 0], 0.0, data.variance / m)
    # probe spread grows with |y0|: rounding in delta1 is amplified by |y - y0|
    parts = _extract(ve, z, offset, size, default_probes(y0)[1])
    return (data.mean - xbar_ve) / parts.delta1 + y0


def _check_noise(ve: VirtualExperiment, data: MeasurementData):
    if ve.noise_variance != data.variance:
        raise EngineError(
            f"VE noise variance {ve.noise_variance!r} differs from the data variance {data.variance!r}"
        )


def run_mc_ve(
    ve: VirtualExperiment,
    data: MeasurementData,
    typeb: TypeBSpec,
    cfg: EngineConfig,
    scenario_id: str = "",
) -> SampleSet:
    """Run the VE at ``cfg.y0`` and correct each simulated mean.

    For every iteration the VE is run ``m`` times at ``(y0, z_i)``; the
    sample is ``(xbar - xbar_ve_i) / delta1(z_i) + y0``. ``delta2`` is never
    used, so ``ve.kernel`` may be a black box.
    """
    _check_noise(ve, data)
    pilot_check(ve, typeb, cfg.master_seed, cfg.y0)
    q = len(typeb)
    n_noise = data.count if cfg.literal_inner_loop else 1

    def chunk(lo: int, hi: int) -> np.ndarray:
        words = raw_words(cfg.master_seed, np.arange(lo, hi, dtype=np.uint64), 0, q + n_noise)
        z = typeb.from_words(words[:, :q])
        return _mc_ve_values(ve, data, z, words[:, q:], cfg.y0, cfg.literal_inner_loop, lo, hi - lo)

    values = _run_chunks(chunk, cfg.n, cfg.workers)
    return SampleSet(values, "mc_ve", cfg.master_seed, scenario_id, cfg.n, float(cfg.y0))


def run_mc_ve_given_z(
    ve: VirtualExperiment,
    data: MeasurementData,
    z: Mapping[str, float],
    cfg: EngineConfig,
    scenario_id: str = "",
) -> SampleSet:
    """MC-VE with the Type B values held at ``z`` for every iteration.

    Noise is read from the same substream positions as in :func:`run_mc_ve`
    (after ``len(z)`` skipped words), so this is the conditional path of the
    full engine.
    """
    _check_noise(ve, data)
    q = len(z)
    n_noise = data.count if cfg.literal_inner_loop else 1

    def chunk(lo: int, hi: int) -> np.ndarray:
        words = raw_words(cfg.master_seed, np.arange(lo, hi, dtype=np.uint64), q, n_noise)
        zb = {k: _as_batch(v, hi - lo) for k, v in z.items()}
        return _mc_ve_values(ve, data, zb, words, cfg.y0, cfg.literal_inner_loop, lo, hi - lo)

    values = _run_chunks(chunk, cfg.n, cfg.workers)
    return SampleSet(values, "mc_ve", cfg.master_seed, scenario_id, cfg.n, float(cfg.y0))


def sample_conditional(
    z: Mapping[str, float],
    ve: VirtualExperiment,
    data: MeasurementData,
    k: int,
    stream: RandomStream,
    scenario_id: str = "",
) -> SampleSet:
    """``k`` draws of ``y | z ~ N((xbar - delta2)/delta1, s2 / (m delta1**2))``."""
    parts = extract_affine(ve, z)
    d1, d2 = float(parts.delta1), float(parts.delta2)
    loc = (data.mean - d2) / d1
    var = data.variance / (data.count * d1 * d1)
    seed = stream.master_seed
    values = gaussian_from_words(stream.words(k), loc, var)
    return SampleSet(values, "conditional", seed, scenario_id, k)
