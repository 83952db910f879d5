"""Complex spectral responses: Kramers-Kronig phase, single-pass and cavity
transfer functions, closed-form cavity analytics and inverse fits.

Sign conventions (fixed once, used everywhere):

* Spectra are analyzed with ``numpy.fft.fft`` and synthesized with
  ``numpy.fft.ifft``, so a pure delay by T multiplies a spectrum by
  ``exp(-2j*pi*nu*T)``.
* ``kk_phase`` returns the phase phi(nu) such that the single-pass field
  transmission is ``t(nu) = exp(-d(nu)/2 - 1j*phi(nu))``.  For an isolated
  Lorentzian absorption line ``d = d0*g^2/(g^2+nu^2)`` this yields
  ``phi = -(d0/2)*g*nu/(g^2+nu^2)``, i.e. anomalous (fast-light) dispersion
  at the line center and slow light inside a spectral pit, which is what
  makes the impulse response causal and the comb echo appear at +1/spacing.
* ``cavity_reflection`` absorbs the fast free-space phase into the length
  detuning: ``length_detuning_m = 0`` puts a cavity resonance exactly at the
  grid (comb) center.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.signal import hilbert

from .spectral import AbsorptionProfile, FrequencyGrid

C_LIGHT = 299792458.0


@dataclass(frozen=True)
class CavityParams:
    """Mirrors, loss and geometry of one memory cavity.

    ``r1`` is the coupling mirror (input/output), ``r2`` the second mirror.
    ``d_loss`` is the single-pass propagation optical depth; the lossy second
    mirror appears everywhere as ``r2_eff = r2 * exp(-2*d_loss)``.  The
    optical path length is ``n0 * geometric_length + air_gap`` (monolithic
    cavities have ``air_gap = 0``).
    """

    r1: float
    r2: float
    d_loss: float = 0.0
    geometric_length_m: float = 0.0
    refractive_index: float = 1.8
    air_gap_m: float = 0.0
    length_detuning_m: float = 0.0
    wavelength_m: float = 580e-9

    def __post_init__(self):
        if not 0.0 <= self.r1 <= 1.0 or not 0.0 <= self.r2 <= 1.0:
            raise ValueError("mirror reflectivities must lie in [0, 1]")
        if self.d_loss < 0:
            raise ValueError("propagation loss must be >= 0")
        if self.wavelength_m <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def r2_eff(self) -> float:
        return self.r2 * math.exp(-2.0 * self.d_loss)

    @property
    def intracavity_loss(self) -> float:
        """Round-trip loss depth: 2*d_loss plus the second mirror transmission."""
        return 2.0 * self.d_loss + (1.0 - self.r2)

    @property
    def optical_path_m(self) -> float:
        return self.refractive_index * self.geometric_length_m + self.air_gap_m

    @property
    def round_trip_time_s(self) -> float:
        return 2.0 * self.optical_path_m / C_LIGHT

    def detuning_phase(self) -> float:
        """Extra round-trip phase from the length detuning (one-way path shift)."""
        return 4.0 * math.pi * self.length_detuning_m / self.wavelength_m


@dataclass
class ComplexResponse:
    """Complex reflection or transmission coefficient r(nu) on a grid."""

    grid: FrequencyGrid
    amplitude: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.amplitude, dtype=complex)
        if a.shape != (self.grid.n_points,):
            raise ValueError("amplitude shape does not match grid")
        mag2 = np.abs(a) ** 2
        if mag2.max() > 1.0 + 1e-12:
            raise ValueError(f"response is not passive: max |r|^2 = {mag2.max()}")
        a.setflags(write=False)
        self.amplitude = a

    def magnitude_squared(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def to_csv(self, path) -> None:
        freqs = self.grid.frequencies()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["freq_hz", "re", "im", "mag2"])
            for f, a in zip(freqs, self.amplitude):
                w.writerow([repr(float(f)), repr(a.real), repr(a.imag), repr(abs(a) ** 2)])


@dataclass(frozen=True)
class Susceptibility:
    """Depth per pass (imaginary part) and phase per pass (real part)."""

    grid: FrequencyGrid
    phase_per_pass: np.ndarray
    depth_per_pass: np.ndarray


@dataclass(frozen=True)
class CavityAnalytics:
    finesse: float
    fsr_hz: float
    linewidth_hz: float


def kk_phase(profile: AbsorptionProfile, pad_factor: int = 2) -> np.ndarray:
    """Single-pass Kramers-Kronig phase of an absorption profile.

    FFT Hilbert transform with the edge value subtracted and zero padding by
    ``pad_factor`` times the record on each side; the profile should have
    decayed to a constant at the grid edges.
    """
    d = profile.depth
    n = len(d)
    edge = 0.5 * (d[0] + d[-1])
    tail = max(8, n // 64)
    wobble = max(np.abs(d[:tail] - edge).max(), np.abs(d[-tail:] - edge).max())
    if wobble > 1e-9 + 1e-6 * max(edge, 1.0):
        warnings.warn(
            "profile does not decay to a constant at the grid edges; "
            "padding with the edge mean anyway"
        )
    pad = np.zeros(pad_factor * n)
    x = np.concatenate([pad, d - edge, pad])
    phi = -np.imag(hilbert(0.5 * x))
    return phi[pad_factor * n : pad_factor * n + n]


def susceptibility(profile: AbsorptionProfile) -> Susceptibility:
    return Susceptibility(
        grid=profile.grid,
        phase_per_pass=kk_phase(profile),
        depth_per_pass=profile.depth.copy(),
    )


def single_pass_response(profile: AbsorptionProfile) -> ComplexResponse:
    """Field transmission t(nu) = exp(-d/2 - i*phi) of one pass."""
    phi = kk_phase(profile)
    t = np.exp(-0.5 * profile.depth - 1j * phi)
    return ComplexResponse(grid=profile.grid, amplitude=t)


def _round_trip(profile: AbsorptionProfile, cavity: CavityParams) -> np.ndarray:
    """Round-trip amplitude factor: two medium passes plus the cavity phase."""
    phi = kk_phase(profile)
    nu = profile.grid.detunings()
    phase = 2.0 * math.pi * nu * cavity.round_trip_time_s + cavity.detuning_phase()
    return np.exp(-profile.depth - 2j * phi - 1j * phase)


def cavity_reflection(profile: AbsorptionProfile, cavity: CavityParams) -> ComplexResponse:
    """Reflection coefficient of the one-sided cavity containing the medium."""
    analytics = cavity_analytics(cavity)
    if cavity.optical_path_m > 0 and profile.grid.resolution_hz > analytics.linewidth_hz / 10.0:
        raise ValueError(
            f"grid resolution {profile.grid.resolution_hz:g} Hz too coarse for "
            f"cavity linewidth {analytics.linewidth_hz:g} Hz"
        )
    m = _round_trip(profile, cavity)
    sr1 = math.sqrt(cavity.r1)
    sr2 = math.sqrt(cavity.r2_eff)
    r = (-sr1 + sr2 * m) / (1.0 - sr1 * sr2 * m)
    return ComplexResponse(grid=profile.grid, amplitude=r)


def resonance_rt(
    r1: float, r2: float, d_loss: float, d_eff: float = 0.0, eta_m: float = 1.0
) -> tuple[float, float]:
    """On-resonance cavity reflectivity and transmissivity with loss."""
    for name, v in (("r1", r1), ("r2", r2), ("eta_m", eta_m)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    if d_loss < 0 or d_eff < 0:
        raise ValueError("optical depths must be >= 0")
    a = math.exp(-(d_loss + d_eff))
    denom = (1.0 - math.sqrt(r1 * r2) * a) ** 2
    refl = 1.0 - (1.0 - r1) * (1.0 - r2 * a * a) / denom * eta_m
    trans = (1.0 - r1) * (1.0 - r2) / denom * eta_m
    return refl, trans


def infer_loss(
    r_measured: float,
    r1: float,
    r2: float,
    eta_m: float = 1.0,
    branch: str = "under",
    tol: float = 1e-9,
) -> tuple[float, float]:
    """Invert the on-resonance reflectivity for the propagation loss.

    The reflectivity is not monotonic in the loss (it dips to 1 - eta_m at
    the impedance-matching point), so the root is bracketed on one side of
    the match: ``branch="under"`` (default) takes the low-loss side.
    Returns ``(d_loss, epsilon)`` with ``epsilon = 2*d_loss + (1 - r2)``.
    """
    if not 0.0 < r_measured < 1.0:
        raise ValueError("measured reflectivity must lie in (0, 1)")
    d_match = -0.5 * math.log(r1 / r2)
    lo, hi = (0.0, d_match) if branch == "under" else (d_match, 1.0)

    def f(d):
        return resonance_rt(r1, r2, d, 0.0, eta_m)[0] - r_measured

    if f(lo) * f(hi) > 0:
        raise ValueError(
            f"reflectivity {r_measured} is unreachable on the {branch} branch "
            f"(range [{min(f(lo), f(hi)) + r_measured:.4f}, "
            f"{max(f(lo), f(hi)) + r_measured:.4f}])"
        )
    d_loss = float(brentq(f, lo, hi, xtol=tol))
    return d_loss, 2.0 * d_loss + (1.0 - r2)


def infer_mode_matching(r_at_impedance_match: float) -> float:
    """eta_M = 1 - R at the impedance-matched point."""
    if not 0.0 <= r_at_impedance_match <= 1.0:
        raise ValueError("reflectivity must lie in [0, 1]")
    return 1.0 - r_at_impedance_match


def cavity_analytics(cavity: CavityParams) -> CavityAnalytics:
    """Finesse, free spectral range and linewidth of the bare (no-absorber) cavity."""
    x = cavity.r1 * cavity.r2_eff
    if x >= 1.0:
        raise ValueError("round-trip reflectivity product must be < 1")
    if x <= 0.0:
        finesse = 0.0
    else:
        finesse = math.pi * x**0.25 / (1.0 - math.sqrt(x))
    if cavity.optical_path_m <= 0:
        return CavityAnalytics(finesse=finesse, fsr_hz=math.inf, linewidth_hz=math.inf)
    fsr = C_LIGHT / (2.0 * cavity.optical_path_m)
    lw = fsr / finesse if finesse > 0 else math.inf
    return CavityAnalytics(finesse=finesse, fsr_hz=fsr, linewidth_hz=lw)


def gaussian_mode(
    wavelength_m: float,
    membrane_thickness_m: float,
    refractive_index: float,
    air_gap_m: float,
    roc_m: float,
) -> tuple[float, float]:
    """Cavity-mode waist and effective length of a plano-concave microcavity.

    The effective length folds the membrane's refraction into an equivalent
    air path: ``L_eff = thickness/n0 + air_gap``.
    """
    l_eff = membrane_thickness_m / refractive_index + air_gap_m
    if l_eff >= roc_m:
        raise ValueError(
            f"unstable cavity: effective length {l_eff:g} m >= mirror ROC {roc_m:g} m"
        )
    w0 = math.sqrt(wavelength_m / math.pi) * (l_eff * (roc_m - l_eff)) ** 0.25
    return w0, l_eff


def mode_match(w0_m: float, wc_m: float) -> float:
    """Overlap of two co-axial Gaussian waists."""
    if w0_m <= 0 or wc_m <= 0:
        raise ValueError("waists must be positive")
    return (2.0 * w0_m * wc_m / (w0_m**2 + wc_m**2)) ** 2
