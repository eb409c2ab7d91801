"""Virtual experiments, the affine-in-measurand class and its inversion.

A virtual experiment (VE) here is a deterministic kernel ``h(y, z)`` plus
additive Gaussian noise with known variance. The noise is applied by the
engines, never by the kernel. For VEs of the form

    h(y, z) = delta1(z) * y + delta2(z)

the two coefficients can be recovered exactly from two kernel evaluations,
and the measurement model is the inversion ``y = (x - delta2) / delta1``.

Kernels receive ``y`` and a mapping of Type B values. Both may be floats or
equally shaped numpy arrays; all functions in this module are written so a
kernel that supports arrays is evaluated once per batch.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from . import exprlang
from .randkit import Distribution

__all__ = [
    "ModelError",
    "AffinityError",
    "NearSingularError",
    "MeasurementData",
    "TypeBSpec",
    "VirtualExperiment",
    "StochasticVE",
    "AffineParts",
    "AffineCheck",
    "eval_forward",
    "extract_affine",
    "check_affine",
    "default_probes",
    "invert_measurement",
]

TOL_ZERO = 1e-12
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

Kernel = Callable[[Any, Mapping[str, Any]], Any]


class ModelError(ValueError):
    pass


class AffinityError(ModelError):
    """The kernel is not affine in ``y`` at the probed ``z``."""

    def __init__(self, check: "AffineCheck", z: Mapping[str, float]):
        super().__init__(
            f"kernel is not affine in y: residual {check.residual:.6g} at probe y = {check.worst_probe!r} "
            f"exceeds {check.tolerance:.3g} for z = {dict(z)!r}"
        )
        self.check = check
        self.z = dict(z)


class NearSingularError(ModelError):
    """delta1(z) is zero to working precision.

    ``index`` is the position within a batch (``None`` for scalar calls) and
    ``z`` the offending Type B values.
    """

    def __init__(self, delta1: float, z: Mapping[str, float], index: Optional[int] = None):
        where = "" if index is None else f" at iteration {index}"
        super().__init__(f"near-singular model{where}: delta1 = {delta1!r} for z = {dict(z)!r}")
        self.delta1 = delta1
        self.z = dict(z)
        self.index = index


@dataclass(frozen=True)
class MeasurementData:
    """Mean of ``count`` real observations with known ``variance``."""

    mean: float
    count: int
    variance: float

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ModelError(f"count must be an integer >= 1, got {self.count!r}")
        if not self.variance > 0:
            raise ModelError(f"variance must be > 0, got {self.variance!r}")
        if not np.isfinite(self.mean):
            raise ModelError(f"mean must be finite, got {self.mean!r}")


@dataclass(frozen=True)
class TypeBSpec:
    """Ordered, named Type B inputs with their state-of-knowledge laws."""

    entries: tuple[tuple[str, Distribution], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((str(n), d) for n, d in self.entries))
        names = self.names
        for name in names:
            if not _NAME.match(name):
                raise ModelError(f"invalid Type B name {name!r}")
        if len(set(names)) != len(names):
            raise ModelError(f"duplicate Type B names in {names!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def __len__(self):
        return len(self.entries)

    def from_words(self, words: np.ndarray) -> dict[str, np.ndarray]:
        """Map a ``(n, len(self))`` block of raw words to named draws."""
        return {name: dist.from_words(words[:, j]) for j, (name, dist) in enumerate(self.entries)}

    def means(self) -> dict[str, float]:
        return {name: float(dist.mean) for name, dist in self.entries}


@dataclass(frozen=True)
class VirtualExperiment:
    """Deterministic kernel ``h(y, z)``; the full output is ``h(y, z) + eps``.

    ``expression`` holds the source text when the kernel was compiled from
    the expression language.
    """

    kernel: Kernel
    noise_variance: float = 0.0
    expression: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.noise_variance < 0:
            raise ModelError(f"noise_variance must be >= 0, got {self.noise_variance!r}")

    @classmethod
    def from_expression(cls, text: str, noise_variance: float = 0.0) -> "VirtualExperiment":
        tree = exprlang.parse(text)

        def kernel(y, z, _tree=tree):
            return exprlang.evaluate(_tree, {**z, "y": y})

        return cls(kernel, noise_variance, text)

    @property
    def tree(self) -> Optional[exprlang.Expr]:
        return None if self.expression is None else exprlang.parse(self.expression)


@dataclass(frozen=True)
class StochasticVE:
    """General VE ``x = G(y, z, w)`` with ``w ~ F_v``.

    Declared for completeness only: no engine evaluates it. ``noise_law``
    describes ``F_v`` and ``noise_params`` holds ``v``.
    """

    kernel: Callable[[Any, Mapping[str, Any], Any], Any]
    noise_law: str
    noise_params: tuple[float, ...] = ()

    def forward(self, y, z):
        """The forward model, i.e. the kernel with ``w = 0``."""
        return self.kernel(y, z, 0.0)


@dataclass(frozen=True)
class AffineParts:
    delta1: Any
    delta2: Any


@dataclass(frozen=True)
class AffineCheck:
    ok: bool
    worst_probe: Optional[float] = None
    residual: float = 0.0
    tolerance: float = 0.0

    def __bool__(self):
        return self.ok


def eval_forward(ve: VirtualExperiment, y, z: Mapping[str, Any]):
    return ve.kernel(y, z)


def _z_at(z: Mapping[str, Any], index: Optional[int]) -> dict[str, float]:
    if index is None:
        return {k: float(v) for k, v in z.items()}
    return {k: float(np.ravel(v)[index]) if np.ndim(v) else float(v) for k, v in z.items()}


def extract_affine(
    ve: VirtualExperiment, z: Mapping[str, Any], probe_a: float = 0.0, probe_b: float = 1.0
) -> AffineParts:
    """Two-point recovery of ``(delta1, delta2)`` at ``z``.

    Exact (up to rounding) for kernels in the affine class. Raises
    :class:`NearSingularError` when
    ``|delta1| < 1e-12 * max(1, |delta2|, |h(probe_a, z)|)``.
    """
    if probe_a == probe_b:
        raise ModelError("probe_a and probe_b must differ")
    ha = ve.kernel(probe_a, z)
    hb = ve.kernel(probe_b, z)
    delta1 = (hb - ha) / (probe_b - probe_a)
    delta2 = ha - probe_a * delta1
    scale = np.maximum(1.0, np.maximum(np.abs(delta2), np.abs(ha)))
    bad = np.abs(delta1) < TOL_ZERO * scale
    if np.any(bad):
        if np.ndim(bad):
            i = int(np.argmax(bad))
            raise NearSingularError(float(np.ravel(delta1)[i]), _z_at(z, i), i)
        raise NearSingularError(float(delta1), _z_at(z, None))
    return AffineParts(delta1, delta2)


def default_probes(y0: float = 0.0) -> tuple[float, float, float]:
    s = max(1.0, abs(float(y0)))
    return (0.0, s, 2.0 * s)


def check_affine(
    ve: VirtualExperiment,
    z: Mapping[str, float],
    probes: Optional[Sequence[float]] = None,
    rel_tol: float = 1e-9,
) -> AffineCheck:
    """Check that ``h(., z)`` is affine on ``probes``.

    A line through the first two probes must reproduce every other probe to
    within ``rel_tol * max(1, max |h|)``. A violation is returned, not raised.
    """
    probes = default_probes() if probes is None else tuple(float(p) for p in probes)
    if len(probes) < 3 or len(set(probes)) != len(probes):
        raise ModelError("check_affine needs at least 3 distinct probes")
    values = [float(ve.kernel(p, z)) for p in probes]
    a, b = probes[0], probes[1]
    slope = (values[1] - values[0]) / (b - a)
    tol = rel_tol * max(1.0, max(abs(v) for v in values))
    residuals = [(abs(v - (values[0] + slope * (p - a))), p) for p, v in zip(probes[2:], values[2:])]
    worst_res, worst = max(residuals, key=lambda r: r[0] if np.isfinite(r[0]) else np.inf)
    ok = bool(np.isfinite(worst_res) and worst_res <= tol)
    return AffineCheck(ok, worst, worst_res, tol)


def invert_measurement(x, parts: AffineParts):
    return (x - parts.delta2) / parts.delta1
