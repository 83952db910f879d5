"""Hole-burning planner for site-1 151Eu3+ in Y2SiO5.

Enumerates the nine ion classes of the 7F0 -> 5D0 transition under rightward
inhomogeneous broadening, works out which ground states a set of chirped pump
ranges empties, and converts the resulting population redistribution into
piecewise absorption-enhancement ratios for a target band.

All interval arithmetic is exact (``fractions.Fraction`` endpoints in Hz) so
that sub-band breakpoints come out as exact rationals rather than grid bins.

Level ordering convention (resolved against the class-IV pump bookkeeping and
frozen into the default model): ground energies ascend |5/2>g < |3/2>g <
|1/2>g with gaps 46.2 and 34.5 MHz; excited energies ascend |1/2>e < |3/2>e <
|5/2>e with gaps 75 and 102 MHz.

Population redistribution uses the coarse steady-state rule: one ground state
emptied -> the other two carry 1.5x their initial population; two emptied ->
the remaining one carries 3x.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .spectral import AbsorptionProfile

GROUND_LEVELS = ("1/2", "3/2", "5/2")
EXCITED_LEVELS = ("1/2", "3/2", "5/2")

#: (ground, excited) pairs in class order: class I is |5/2>g -> |5/2>e,
#: class IV is |3/2>g -> |5/2>e (grounds 5/2, 3/2, 1/2; excited 5/2, 3/2, 1/2
#: within each ground).
CLASS_TRANSITIONS = tuple(
    (g, e) for g in ("5/2", "3/2", "1/2") for e in ("5/2", "3/2", "1/2")
)

ROMAN = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX")

ALLOWED_FACTORS = (Fraction(0), Fraction(1), Fraction(3, 2), Fraction(3))

Interval = tuple[Fraction, Fraction]


def _fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if x != round(x):
            # keep exactness for integer-Hz inputs, fall back to binary floats
            return Fraction(x)
        return Fraction(int(round(x)))
    raise TypeError(f"cannot convert {x!r} to a rational frequency")


def _intersect(a: Interval, b: Interval) -> Interval | None:
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo < hi else None


@dataclass(frozen=True)
class HyperfineModel:
    """Hyperfine splittings and broadening window, all in Hz.

    ``ground_splittings`` is (|1/2>g-|3/2>g, |3/2>g-|5/2>g) and
    ``excited_splittings`` is (|1/2>e-|3/2>e, |3/2>e-|5/2>e).  The orderings
    give the level sequence from lowest to highest energy.
    """

    ground_splittings: tuple = (34_500_000, 46_200_000)
    excited_splittings: tuple = (75_000_000, 102_000_000)
    broadening_hz: int = 102_000_000
    ground_order: tuple = ("5/2", "3/2", "1/2")
    excited_order: tuple = ("1/2", "3/2", "5/2")

    def __post_init__(self):
        for s in (*self.ground_splittings, *self.excited_splittings):
            if _fr(s) <= 0:
                raise ValueError("splittings must be positive")
        if _fr(self.broadening_hz) <= 0:
            raise ValueError("broadening must be positive")
        for order in (self.ground_order, self.excited_order):
            if sorted(order) != sorted(GROUND_LEVELS) or order[1] != "3/2":
                raise ValueError(f"level order must keep 3/2 in the middle, got {order}")

    def _energies(self, order, splittings) -> dict[str, Fraction]:
        # splittings are keyed by the level pair they separate, not by position
        gap = {
            frozenset(("1/2", "3/2")): _fr(splittings[0]),
            frozenset(("3/2", "5/2")): _fr(splittings[1]),
        }
        e = {order[0]: Fraction(0)}
        e[order[1]] = e[order[0]] + gap[frozenset(order[:2])]
        e[order[2]] = e[order[1]] + gap[frozenset(order[1:])]
        return e

    def ground_energies(self) -> dict[str, Fraction]:
        return self._energies(self.ground_order, self.ground_splittings)

    def excited_energies(self) -> dict[str, Fraction]:
        return self._energies(self.excited_order, self.excited_splittings)

    def transition_frequency(self, ground: str, excited: str) -> Fraction:
        """Optical transition frequency relative to an arbitrary common origin."""
        return self.excited_energies()[excited] - self.ground_energies()[ground]


@dataclass(frozen=True)
class PumpPlan:
    """Chirped pump ranges and the target band, in lab-frame Hz."""

    chirp_ranges: tuple
    target_band: tuple

    def __post_init__(self):
        lo, hi = self.target_band
        if not _fr(hi) > _fr(lo):
            raise ValueError("target band must be nonempty")
        for a, b in self.chirp_ranges:
            if not _fr(b) > _fr(a):
                raise ValueError(f"chirp range ({a}, {b}) is empty")

    def chirps(self) -> list[Interval]:
        return [(_fr(a), _fr(b)) for a, b in self.chirp_ranges]

    def target(self) -> Interval:
        return (_fr(self.target_band[0]), _fr(self.target_band[1]))


def paper_pump_plan() -> PumpPlan:
    """P2 and P3 chirps targeting the P1 antihole band."""
    mhz = 1_000_000
    return PumpPlan(
        chirp_ranges=((0, 46_200_000), (55_800_000, 102 * mhz)),
        target_band=(46_200_000, 55_800_000),
    )


@dataclass
class PopulationFactorMap:
    """Piecewise-constant population factors per transition over the target band."""

    target_band: Interval
    pieces: dict  # (ground, excited) -> list[(lo, hi, Fraction factor)]

    def factor_at(self, transition: tuple[str, str], freq_hz) -> Fraction:
        f = _fr(freq_hz)
        for lo, hi, fac in self.pieces[transition]:
            if lo <= f <= hi:
                return fac
        raise ValueError(f"{freq_hz} outside target band {self.target_band}")

    def breakpoints(self) -> list[Fraction]:
        pts = {self.target_band[0], self.target_band[1]}
        for segs in self.pieces.values():
            for lo, hi, _ in segs:
                pts.update((lo, hi))
        return sorted(pts)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["transition", "low_hz", "high_hz", "factor"])
            for (g, e), segs in self.pieces.items():
                for lo, hi, fac in segs:
                    w.writerow([f"{g}g->{e}e", float(lo), float(hi), float(fac)])


def class_offsets(model: HyperfineModel) -> dict[str, dict[tuple[str, str], Fraction]]:
    """Per class, the translation mapping lab pump ranges onto its detuning axis.

    For class c (resonant transition c at zero lab detuning) and transition T,
    the returned offset is ``nu(c) - nu(T)``; a lab pump range [a, b] empties
    the class-c sub-ensemble on the detuning interval [a, b] + offset,
    clipped to the broadening window [0, broadening].
    """
    out: dict[str, dict[tuple[str, str], Fraction]] = {}
    for name, cls in zip(ROMAN, CLASS_TRANSITIONS):
        ref = model.transition_frequency(*cls)
        out[name] = {
            (g, e): ref - model.transition_frequency(g, e)
            for g in GROUND_LEVELS
            for e in EXCITED_LEVELS
        }
    return out


def pumped_intervals(
    model: HyperfineModel, plan: PumpPlan, class_name: str, transition: tuple[str, str]
) -> list[Interval]:
    """Detuning intervals of one class where a transition is driven by the chirps."""
    offsets = class_offsets(model)[class_name]
    off = offsets[transition]
    window = (Fraction(0), _fr(model.broadening_hz))
    out = []
    for a, b in plan.chirps():
        iv = _intersect((a + off, b + off), window)
        if iv:
            out.append(iv)
    return out


def apply_pump_plan(model: HyperfineModel, plan: PumpPlan) -> PopulationFactorMap:
    """Work out the per-transition population factors over the target band.

    The absorption at lab frequency f inside the target band via transition T
    comes from the ions whose T sits at f.  For those ions each ground state
    g' is emptied iff one of its three transitions falls in a chirp; the
    number of emptied *other* ground states sets the factor (1, 1.5 or 3),
    and the factor drops to 0 if T's own ground state was emptied.
    """
    target = plan.target()
    for ch in plan.chirps():
        if _intersect(ch, target):
            raise ValueError(f"target band {plan.target_band} overlaps chirp {ch}")

    eg = model.ground_energies()
    ee = model.excited_energies()
    chirps = plan.chirps()

    pieces: dict[tuple[str, str], list] = {}
    for g in GROUND_LEVELS:
        for e in EXCITED_LEVELS:
            # emptied(g') holds at lab frequency f iff f + shift lies in a
            # chirp, where shift repositions T = (g, e) onto (g', e')
            emptied: dict[str, list[Interval]] = {}
            for gp in GROUND_LEVELS:
                ivs = []
                for ep in EXCITED_LEVELS:
                    shift = (ee[ep] - ee[e]) - (eg[gp] - eg[g])
                    for a, b in chirps:
                        iv = _intersect((a - shift, b - shift), target)
                        if iv:
                            ivs.append(iv)
                emptied[gp] = ivs

            cuts = {target[0], target[1]}
            for ivs in emptied.values():
                for lo, hi in ivs:
                    cuts.update((lo, hi))
            pts = sorted(cuts)

            segs = []
            for lo, hi in zip(pts[:-1], pts[1:]):
                mid = (lo + hi) / 2
                own = any(a <= mid <= b for a, b in emptied[g])
                others = sum(
                    1
                    for gp in GROUND_LEVELS
                    if gp != g and any(a <= mid <= b for a, b in emptied[gp])
                )
                if own:
                    fac = Fraction(0)
                else:
                    fac = (Fraction(1), Fraction(3, 2), Fraction(3))[others]
                if segs and segs[-1][2] == fac:
                    segs[-1] = (segs[-1][0], hi, fac)
                else:
                    segs.append((lo, hi, fac))
            pieces[(g, e)] = segs

    return PopulationFactorMap(target_band=target, pieces=pieces)


@dataclass(frozen=True)
class BranchingTable:
    """3x3 relative oscillator strengths, rows = ground, columns = excited."""

    values: tuple = (
        (0.03, 0.21, 0.76),
        (0.12, 0.67, 0.21),
        (0.85, 0.12, 0.03),
    )

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != (3, 3):
            raise ValueError(f"branching table must be 3x3, got {arr.shape}")
        if np.any(arr < 0) or np.any(arr > 1):
            raise ValueError("branching ratios must lie in [0, 1]")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError(f"branching rows must sum to 1, got {sums}")

    def ratio(self, ground: str, excited: str) -> float:
        return self.values[GROUND_LEVELS.index(ground)][EXCITED_LEVELS.index(excited)]


@dataclass
class EnhancementRatios:
    """Piecewise absorption-enhancement ratios over a band."""

    segments: list  # [(lo, hi, ratio)]

    def ratio_at(self, freq_hz) -> float:
        f = _fr(freq_hz)
        for lo, hi, r in self.segments:
            if lo <= f <= hi:
                return r
        raise ValueError(f"{freq_hz} outside ratio band")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["low_hz", "high_hz", "ratio"])
            for lo, hi, r in self.segments:
                w.writerow([float(lo), float(hi), repr(r)])


def enhancement_ratios(
    factors: PopulationFactorMap,
    branching: BranchingTable | None = None,
    target_band: tuple | None = None,
) -> EnhancementRatios:
    """Sum of branching-weighted factors over the unpumped baseline (= 3)."""
    branching = branching or BranchingTable()
    band = (
        (_fr(target_band[0]), _fr(target_band[1]))
        if target_band is not None
        else factors.target_band
    )
    if band[0] < factors.target_band[0] or band[1] > factors.target_band[1]:
        raise ValueError("requested band exceeds the factor map's coverage")
    pts = [p for p in factors.breakpoints() if band[0] <= p <= band[1]]
    if pts[0] != band[0]:
        pts.insert(0, band[0])
    if pts[-1] != band[1]:
        pts.append(band[1])
    segs = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = (lo + hi) / 2
        total = sum(
            branching.ratio(g, e) * float(factors.factor_at((g, e), mid))
            for g in GROUND_LEVELS
            for e in EXCITED_LEVELS
        )
        r = total / 3.0
        if segs and abs(segs[-1][2] - r) < 1e-12:
            segs[-1] = (segs[-1][0], hi, segs[-1][2])
        else:
            segs.append((lo, hi, r))
    return EnhancementRatios(segments=segs)


def enhance_profile(
    base: AbsorptionProfile,
    ratios: EnhancementRatios,
    band: tuple[float, float],
) -> AbsorptionProfile:
    """Multiply the depth by the piecewise ratio inside ``band``."""
    f = base.grid.frequencies()
    lo, hi = band
    if lo < f[0] or hi > f[-1]:
        raise ValueError(f"band {band} outside grid")
    d = base.depth.copy()
    for slo, shi, r in ratios.segments:
        a, b = max(float(slo), lo), min(float(shi), hi)
        if b <= a:
            continue
        m = (f >= a) & (f <= b)
        d[m] *= r
    return AbsorptionProfile(grid=base.grid, depth=d)
