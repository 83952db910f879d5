"""Frequency grids and single-pass absorption profiles.

The central object is :class:`AbsorptionProfile`: a dimensionless single-pass
optical depth ``d(nu)`` sampled on a uniform frequency grid.  Frequencies are
detunings in Hz from the lab zero-detuning reference; the grid carries a
``center_offset`` so that hole-burning bookkeeping (absolute pit positions)
and echo simulation (everything relative to the comb center) can share one
representation.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

GAUSSIAN_PERIOD_AVERAGE = math.sqrt(math.pi / (4.0 * math.log(2.0)))
"""Mean of a unit-peak Gaussian tooth of FWHM w over an interval of width F*w."""

TOOTH_SHAPES = ("gaussian", "square", "lorentzian")
FEATURE_KINDS = ("pit", "antihole", "background")


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency grid of ``n_points`` bins covering ``span_hz``.

    Bin k sits at ``center_offset_hz + (k - n_points/2) * span_hz / n_points``.
    The conjugate time record has step ``1/span_hz`` and length
    ``n_points/span_hz``.
    """

    span_hz: float
    n_points: int
    center_offset_hz: float = 0.0

    def __post_init__(self):
        if self.span_hz <= 0:
            raise ValueError(f"span must be positive, got {self.span_hz}")
        if not _is_power_of_two(self.n_points):
            raise ValueError(f"n_points must be a power of two, got {self.n_points}")
        if self.n_points < 4096:
            raise ValueError(f"n_points must be >= 4096, got {self.n_points}")

    @property
    def resolution_hz(self) -> float:
        return self.span_hz / self.n_points

    @property
    def time_step_s(self) -> float:
        return 1.0 / self.span_hz

    @property
    def record_length_s(self) -> float:
        return self.n_points / self.span_hz

    def frequencies(self) -> np.ndarray:
        k = np.arange(self.n_points)
        return self.center_offset_hz + (k - self.n_points // 2) * self.resolution_hz

    def detunings(self) -> np.ndarray:
        """Frequencies relative to the grid center."""
        k = np.arange(self.n_points)
        return (k - self.n_points // 2) * self.resolution_hz

    def times(self) -> np.ndarray:
        return np.arange(self.n_points) * self.time_step_s

    def contains_band(self, band: tuple[float, float]) -> bool:
        lo, hi = band
        f = self.frequencies()
        return lo >= f[0] and hi <= f[-1]


def build_grid(span_hz: float, n_points: int, center_offset_hz: float = 0.0) -> FrequencyGrid:
    return FrequencyGrid(span_hz=span_hz, n_points=n_points, center_offset_hz=center_offset_hz)


@dataclass(frozen=True)
class SpectralFeature:
    """A pit (depth forced down), antihole (depth forced up) or background patch."""

    kind: str
    range_hz: tuple[float, float]
    depth: float = 0.0

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        lo, hi = self.range_hz
        if not hi > lo:
            raise ValueError(f"feature range must be nonempty, got {self.range_hz}")
        if self.depth < 0:
            raise ValueError(f"feature depth must be >= 0, got {self.depth}")

    @property
    def width_hz(self) -> float:
        return self.range_hz[1] - self.range_hz[0]


@dataclass(frozen=True)
class CombSpec:
    """Atomic-frequency-comb parameters.

    ``finesse`` is the ratio of tooth spacing to tooth FWHM.  The comb has
    ``floor(bandwidth/spacing) + 1`` teeth centred on the grid center.
    """

    spacing_hz: float
    finesse: float
    bandwidth_hz: float
    peak_depth: float
    tooth_shape: str = "gaussian"
    floor_depth: float = 0.0

    def __post_init__(self):
        if self.spacing_hz <= 0:
            raise ValueError("spacing must be positive")
        if self.finesse <= 1:
            raise ValueError(f"comb finesse must exceed 1, got {self.finesse}")
        if self.bandwidth_hz < self.spacing_hz:
            raise ValueError("bandwidth must be at least one tooth spacing")
        if not self.peak_depth >= self.floor_depth >= 0:
            raise ValueError("need peak_depth >= floor_depth >= 0")
        if self.tooth_shape not in TOOTH_SHAPES:
            raise ValueError(f"unknown tooth shape {self.tooth_shape!r}")

    @property
    def n_teeth(self) -> int:
        return int(math.floor(self.bandwidth_hz / self.spacing_hz)) + 1

    @property
    def tooth_fwhm_hz(self) -> float:
        return self.spacing_hz / self.finesse

    def tooth_centers_hz(self, center_offset_hz: float = 0.0) -> np.ndarray:
        k = np.arange(self.n_teeth) - (self.n_teeth - 1) / 2.0
        return center_offset_hz + k * self.spacing_hz

    def period_average_depth(self) -> float:
        """Closed-form period average of the comb depth (floor included)."""
        amp = self.peak_depth - self.floor_depth
        if self.tooth_shape == "gaussian":
            duty = GAUSSIAN_PERIOD_AVERAGE / self.finesse
        elif self.tooth_shape == "square":
            duty = 1.0 / self.finesse
        else:  # lorentzian: integral of w^2/4/(w^2/4+x^2) over one period ~ pi*w/2
            duty = (math.pi / 2.0) / self.finesse
        return self.floor_depth + amp * duty


@dataclass
class AbsorptionProfile:
    """Single-pass optical depth d(nu) on a grid.  Arrays are frozen on construction."""

    grid: FrequencyGrid
    depth: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.depth, dtype=float)
        if d.shape != (self.grid.n_points,):
            raise ValueError(f"depth must have shape ({self.grid.n_points},), got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("depth contains non-finite entries")
        if np.any(d < 0):
            raise ValueError("depth must be non-negative")
        d.setflags(write=False)
        self.depth = d

    def integrated_depth(self) -> float:
        return float(np.trapezoid(self.depth, dx=self.grid.resolution_hz))

    def to_csv(self, path) -> None:
        freqs = self.grid.frequencies()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["freq_hz", "depth"])
            for f, d in zip(freqs, self.depth):
                w.writerow([repr(float(f)), repr(float(d))])


def _band_mask(grid: FrequencyGrid, band: tuple[float, float]) -> np.ndarray:
    lo, hi = band
    if not grid.contains_band(band):
        raise ValueError(f"band {band} lies outside grid [{grid.frequencies()[0]}, {grid.frequencies()[-1]}]")
    f = grid.frequencies()
    return (f >= lo) & (f <= hi)


def _check_feature_fits(grid: FrequencyGrid, width_hz: float, what: str) -> None:
    # grid span must dominate any feature placed on it, else the Hilbert
    # transform and the time record are polluted by wrap-around
    if grid.span_hz < 10.0 * width_hz:
        raise ValueError(
            f"{what} of width {width_hz:g} Hz needs a span of at least {10 * width_hz:g} Hz, "
            f"grid has {grid.span_hz:g} Hz"
        )


def synthesize_profile(
    features: Sequence[SpectralFeature],
    base_depth: float,
    grid: FrequencyGrid,
) -> AbsorptionProfile:
    """Apply features in order (last wins) on top of a flat background.

    Pits force the depth down to ``feature.depth`` inside their range,
    antiholes force it up, background patches set it outright.  Overlaps are
    resolved last-wins; contradictory overlaps are reported as a warning.
    """
    if base_depth < 0:
        raise ValueError("base depth must be >= 0")
    d = np.full(grid.n_points, float(base_depth))
    f = grid.frequencies()
    covered: list[tuple[SpectralFeature, np.ndarray]] = []
    overlaps: list[str] = []
    for feat in features:
        _check_feature_fits(grid, feat.width_hz, f"feature {feat.kind!r}")
        lo, hi = feat.range_hz
        if not grid.contains_band((lo, hi)):
            raise ValueError(f"feature range {feat.range_hz} outside grid")
        m = (f >= lo) & (f <= hi)
        for prev, pm in covered:
            if prev.kind != feat.kind and np.any(pm & m):
                overlaps.append(f"{feat.kind} {feat.range_hz} overrides {prev.kind} {prev.range_hz}")
        d[m] = feat.depth
        covered.append((feat, m))
    if overlaps:
        warnings.warn("overlapping features applied last-wins: " + "; ".join(overlaps))
    return AbsorptionProfile(grid=grid, depth=d)


def _tooth(shape: str, x: np.ndarray, fwhm: float) -> np.ndarray:
    if shape == "gaussian":
        sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
        return np.exp(-0.5 * (x / sigma) ** 2)
    if shape == "square":
        return ((x >= -fwhm / 2.0) & (x < fwhm / 2.0)).astype(float)
    half = fwhm / 2.0
    return half**2 / (half**2 + x**2)


def _comb_depth(spec: CombSpec, grid: FrequencyGrid, comb_center_hz: float) -> np.ndarray:
    _check_feature_fits(grid, spec.bandwidth_hz, "comb")
    centers = spec.tooth_centers_hz(comb_center_hz)
    f = grid.frequencies()
    margin = 3.0 * spec.tooth_fwhm_hz
    if centers[0] - margin < f[0] or centers[-1] + margin > f[-1]:
        raise ValueError("comb teeth extend beyond the grid")
    teeth = np.zeros(grid.n_points)
    for c in centers:
        teeth += _tooth(spec.tooth_shape, f - c, spec.tooth_fwhm_hz)
    if spec.tooth_shape == "square":
        teeth = np.clip(teeth, 0.0, 1.0)
    return spec.floor_depth + (spec.peak_depth - spec.floor_depth) * teeth


def comb_profile(spec: CombSpec, grid: FrequencyGrid) -> AbsorptionProfile:
    """Sum of teeth at spacing ``spec.spacing_hz`` centred on the grid center."""
    return AbsorptionProfile(grid=grid, depth=_comb_depth(spec, grid, grid.center_offset_hz))


def effective_depth(profile: AbsorptionProfile, band: tuple[float, float]) -> float:
    """Mean optical depth over the band (the d-tilde of the cavity formulas)."""
    m = _band_mask(profile.grid, band)
    if not np.any(m):
        raise ValueError(f"band {band} contains no grid points")
    return float(profile.depth[m].mean())


def double_comb(
    spec1: CombSpec,
    spec2: CombSpec,
    relative_detuning_hz: float,
    grid: FrequencyGrid,
    depth_ceiling: float | None = None,
    center_shift_hz: float = 0.0,
) -> AbsorptionProfile:
    """Pointwise sum of two combs, the second shifted by ``relative_detuning_hz``.

    ``center_shift_hz`` detunes the common center of both combs away from the
    grid center (the knob the double-AFC qubit analyzer sweeps).
    """
    c = grid.center_offset_hz + center_shift_hz
    d = _comb_depth(spec1, grid, c) + _comb_depth(spec2, grid, c + relative_detuning_hz)
    if depth_ceiling is not None and np.any(d > depth_ceiling):
        warnings.warn(
            f"double comb exceeds depth ceiling {depth_ceiling:g} "
            f"(max {d.max():g}); clipping"
        )
        d = np.minimum(d, depth_ceiling)
    return AbsorptionProfile(grid=grid, depth=d)


def overlay(base: AbsorptionProfile, other: AbsorptionProfile, band: tuple[float, float]) -> AbsorptionProfile:
    """Pointwise maximum of two profiles inside ``band`` (comb laid into a pit)."""
    if base.grid != other.grid:
        raise ValueError("profiles must share a grid")
    m = _band_mask(base.grid, band)
    d = base.depth.copy()
    d[m] = np.maximum(d[m], other.depth[m])
    return AbsorptionProfile(grid=base.grid, depth=d)


def resample(profile: AbsorptionProfile, n_points: int) -> AbsorptionProfile:
    """Resample by linear interpolation onto a grid with ``n_points`` bins.

    Piecewise-linear interpolation preserves the trapezoid integral exactly on
    refinement, which is what keeps the integrated depth conserved.
    """
    new_grid = FrequencyGrid(
        span_hz=profile.grid.span_hz,
        n_points=n_points,
        center_offset_hz=profile.grid.center_offset_hz,
    )
    d = np.interp(new_grid.frequencies(), profile.grid.frequencies(), profile.depth)
    return AbsorptionProfile(grid=new_grid, depth=d)


def flat_profile(grid: FrequencyGrid, depth: float) -> AbsorptionProfile:
    return AbsorptionProfile(grid=grid, depth=np.full(grid.n_points, float(depth)))
