"""Impedance-matching solvers, comb-parameter optimization, bandwidth sweeps
and dispersion-compensation diagnostics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import memory
from .response import CavityParams, kk_phase
from .spectral import (
    AbsorptionProfile,
    CombSpec,
    FrequencyGrid,
    SpectralFeature,
    comb_profile,
    overlay,
    synthesize_profile,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

SWEEP_SCHEMES = ("enhanced", "natural_same_crystal", "natural_high_absorption")


@dataclass(frozen=True)
class MatchResult:
    matched_depth: float
    eps: float
    eps_over_4d: float
    implied_f_afc: float | None
    predicted_eta: float | None


def matched_depth(
    cavity: CavityParams,
    peak_depth: float | None = None,
    eta_m: float = 1.0,
    tooth_shape: str = "gaussian",
) -> MatchResult:
    """Effective depth that impedance-matches the cavity: R1 = R2' e^(-2 d).

    With a peak depth the result also carries the comb finesse whose
    period-averaged depth equals the matched value, and the ideal-chain
    efficiency at that operating point.
    """
    r2e = cavity.r2_eff
    if cavity.r1 >= r2e:
        raise ValueError(
            f"no positive matched depth: R1 = {cavity.r1} must be below "
            f"R2' = {r2e:.6f}"
        )
    d_star = -0.5 * math.log(cavity.r1 / r2e)
    eps = cavity.intracavity_loss
    implied_f = None
    predicted = None
    if peak_depth is not None:
        implied_f = _finesse_for_average(peak_depth, d_star, tooth_shape)
        predicted = memory.analytic_efficiency(eta_m, implied_f, eps, d_star).eta
    return MatchResult(
        matched_depth=d_star,
        eps=eps,
        eps_over_4d=eps / (4.0 * d_star),
        implied_f_afc=implied_f,
        predicted_eta=predicted,
    )


def _shape_duty(tooth_shape: str) -> float:
    if tooth_shape == "gaussian":
        return math.sqrt(math.pi / (4.0 * math.log(2.0)))
    if tooth_shape == "square":
        return 1.0
    return math.pi / 2.0


def _finesse_for_average(peak_depth: float, target_average: float, tooth_shape: str) -> float:
    """Comb finesse whose period-averaged depth equals ``target_average``."""
    f = peak_depth * _shape_duty(tooth_shape) / target_average
    if f < 1.0:
        raise ValueError(
            f"peak depth {peak_depth:g} cannot reach the matched average "
            f"{target_average:g}: best achievable is "
            f"{peak_depth * _shape_duty(tooth_shape):g} at F_AFC = 1"
        )
    return f


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Maximize a unimodal function on [lo, hi] by golden-section search."""
    a, b = min(lo, hi), max(lo, hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class CombOptimum:
    f_afc: float
    f_afc_seed: float
    predicted_eta: float
    simulated_eta: float
    at_boundary: bool


def _storage_profile(
    grid: FrequencyGrid,
    base_depth: float,
    pit_width_hz: float,
    spec: CombSpec,
) -> AbsorptionProfile:
    """Comb inside a pit on a flat background, all centred on the grid center."""
    c = grid.center_offset_hz
    feats = []
    if pit_width_hz > 0:
        feats.append(SpectralFeature("pit", (c - pit_width_hz / 2, c + pit_width_hz / 2), 0.0))
    base = synthesize_profile(feats, base_depth, grid)
    comb = comb_profile(spec, grid)
    half = pit_width_hz / 2 if pit_width_hz > 0 else spec.bandwidth_hz / 2 + 2 * spec.spacing_hz
    return overlay(base, comb, (c - half, c + half))


def _echo_efficiency(
    grid: FrequencyGrid,
    profile: AbsorptionProfile,
    cavity: CavityParams,
    eta_m: float,
    storage_time_s: float,
    pulse_fwhm_s: float,
    window_half_s: float | None = None,
) -> float:
    t0 = max(4.0 * pulse_fwhm_s, 2e-6)
    train = memory.single_pulse_train(t0, pulse_fwhm_s)
    half = window_half_s or 0.5 * storage_time_s
    windows = [(t0 + storage_time_s - half, t0 + storage_time_s + half)]
    res = memory.simulate_storage(profile, cavity, train, eta_m, windows)
    return float(res.efficiencies[0])


def optimize_comb(
    cavity: CavityParams,
    peak_depth: float,
    spacing_hz: float,
    bandwidth_hz: float,
    tooth_shape: str = "gaussian",
    eta_m: float = 1.0,
    grid: FrequencyGrid | None = None,
    base_depth: float = 0.0,
    pit_width_hz: float = 20e6,
    pulse_fwhm_s: float | None = None,
    refine: bool = True,
    tol: float = 0.05,
) -> CombOptimum:
    """Choose the comb finesse that maximizes the simulated echo efficiency.

    Seeds at the closed-form finesse whose period average equals the matched
    depth, then (optionally) refines within +-30% by golden-section search
    against :func:`memory.simulate_storage`.
    """
    grid = grid or FrequencyGrid(200e6, 2**15)
    match = matched_depth(cavity, peak_depth=peak_depth, eta_m=eta_m, tooth_shape=tooth_shape)
    seed = match.implied_f_afc
    storage_time = 1.0 / spacing_hz
    fwhm = pulse_fwhm_s or 0.45 * storage_time / 4.0

    def simulated(f_afc: float) -> float:
        spec = CombSpec(
            spacing_hz=spacing_hz,
            finesse=f_afc,
            bandwidth_hz=bandwidth_hz,
            peak_depth=peak_depth,
            tooth_shape=tooth_shape,
        )
        profile = _storage_profile(grid, base_depth, pit_width_hz, spec)
        return _echo_efficiency(grid, profile, cavity, eta_m, storage_time, fwhm)

    at_boundary = seed <= 1.0 + 1e-9
    if refine and not at_boundary:
        lo, hi = max(1.01, 0.7 * seed), 1.3 * seed
        best = golden_section_max(simulated, lo, hi, tol)
    else:
        best = max(seed, 1.01)
    return CombOptimum(
        f_afc=best,
        f_afc_seed=seed,
        predicted_eta=memory.analytic_efficiency(eta_m, best, match.eps, match.matched_depth).eta,
        simulated_eta=simulated(best),
        at_boundary=at_boundary,
    )


@dataclass
class SweepResult:
    parameter: str
    values: np.ndarray
    efficiencies: np.ndarray
    scheme: str

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["param_value", "efficiency", "scheme"])
            for v, e in zip(self.values, self.efficiencies):
                w.writerow([repr(float(v)), repr(float(e)), self.scheme])


def sweep_bandwidth(
    scheme: str,
    bandwidths_hz: Sequence[float],
    cavity: CavityParams,
    base_depth: float,
    enhanced_depth: float,
    spacing_hz: float,
    f_afc: float,
    eta_m: float,
    pit_width_hz: float = 20e6,
    grid: FrequencyGrid | None = None,
) -> SweepResult:
    """Echo efficiency vs comb bandwidth for one preparation scheme.

    The input pulse's spectral FWHM tracks half the comb bandwidth, and the
    analysis window follows the (possibly slow-light-delayed) first echo.
    ``enhanced``: boosted comb in an emptied pit; ``natural_same_crystal``:
    unboosted comb in the pit, finesse rescaled to stay impedance-matched;
    ``natural_high_absorption``: boosted comb with the surroundings at the
    boosted depth (nothing outside the pit is emptied below it).
    """
    if scheme not in SWEEP_SCHEMES:
        raise ValueError(f"unknown sweep scheme {scheme!r}; pick one of {SWEEP_SCHEMES}")
    grid = grid or FrequencyGrid(200e6, 2**15)
    storage_time = 1.0 / spacing_hz
    match = matched_depth(cavity)

    effs = []
    for bw in bandwidths_hz:
        if bw > pit_width_hz:
            raise ValueError(f"comb bandwidth {bw:g} Hz exceeds the pit width {pit_width_hz:g} Hz")
        if scheme == "enhanced":
            depth, background = enhanced_depth, base_depth
            finesse = f_afc
        elif scheme == "natural_same_crystal":
            depth, background = base_depth, base_depth
            finesse = max(_finesse_for_average(depth, match.matched_depth, "gaussian"), 1.01)
        else:
            depth, background = enhanced_depth, enhanced_depth
            finesse = f_afc
        spec = CombSpec(spacing_hz, finesse, bw, depth)
        profile = _storage_profile(grid, background, pit_width_hz, spec)

        spectral_fwhm = bw / 2.0
        fwhm_t = 2.0 * math.log(2.0) / math.pi / spectral_fwhm
        t0 = max(6.0 * fwhm_t, 3e-6)
        train = memory.single_pulse_train(t0, fwhm_t)
        t = grid.times()
        search_lo = t0 + max(0.3 * storage_time, 1.05 * fwhm_t)
        search_hi = t0 + 2.2 * storage_time
        res = memory.simulate_storage(profile, cavity, train, eta_m, [(search_lo, search_hi)])
        # slow light can delay the echo well past 1/spacing; window on the peak
        m = (t >= search_lo) & (t < search_hi)
        t_peak = t[m][int(np.argmax(res.intensity[m]))]
        half = 0.45 * storage_time
        window = [(t_peak - half, t_peak + half)]
        effs.append(
            float(memory.simulate_storage(profile, cavity, train, eta_m, window).efficiencies[0])
        )
    return SweepResult(
        parameter="bandwidth_hz",
        values=np.asarray(list(bandwidths_hz), dtype=float),
        efficiencies=np.asarray(effs),
        scheme=scheme,
    )


@dataclass(frozen=True)
class DispersionDiagnostics:
    slope_per_period_rad: float
    period_swing_rad: float
    slope_fraction: float | None
    compensation_residual: float | None


def dispersion_diagnostics(
    profile: AbsorptionProfile,
    comb_band: tuple[float, float],
    pit_band: tuple[float, float],
    spacing_hz: float,
) -> DispersionDiagnostics:
    """Linear trend of the single-pass phase across the comb band.

    The trend is fitted to period-averaged phases; the swing is the
    peak-to-peak excursion of the detrended phase inside the band.  The
    residual compares the comb's average depth over its band against the
    pit-compensation condition d_comb/d_pit = bw_comb/bw_pit.
    """
    f = profile.grid.frequencies()
    phi = kk_phase(profile)
    lo, hi = comb_band
    edges = np.arange(lo, hi + spacing_hz / 2.0, spacing_hz)
    centers, means = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (f >= a) & (f < b)
        if np.any(m):
            centers.append(0.5 * (a + b))
            means.append(float(phi[m].mean()))
    if len(centers) < 2:
        raise ValueError("comb band too narrow for a trend fit")
    centers = np.asarray(centers)
    means = np.asarray(means)
    design = np.vstack([centers, np.ones_like(centers)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, means, rcond=None)

    band = (f >= lo) & (f <= hi)
    detrended = phi[band] - (slope * f[band] + intercept)
    swing = float(detrended.max() - detrended.min())
    slope_per_period = abs(float(slope)) * spacing_hz

    plo, phi_hi = pit_band
    outside = ((f >= plo - 0.5 * (phi_hi - plo)) & (f < plo)) | (
        (f > phi_hi) & (f <= phi_hi + 0.5 * (phi_hi - plo))
    )
    d_pit = float(profile.depth[outside].mean()) if np.any(outside) else 0.0
    d_comb = float(profile.depth[band].mean())
    residual = None
    if d_pit > 1e-12:
        residual = d_comb / d_pit - (hi - lo) / (phi_hi - plo)

    fraction = slope_per_period / swing if swing > 1e-15 else None
    return DispersionDiagnostics(
        slope_per_period_rad=slope_per_period,
        period_swing_rad=swing,
        slope_fraction=fraction,
        compensation_residual=residual,
    )
