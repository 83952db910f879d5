from fractions import Fraction

import numpy as np
import pytest

from afc_sim.ions import (
    CLASS_TRANSITIONS,
    BranchingTable,
    HyperfineModel,
    PumpPlan,
    apply_pump_plan,
    class_offsets,
    enhance_profile,
    enhancement_ratios,
    paper_pump_plan,
    pumped_intervals,
)
from afc_sim.spectral import build_grid, flat_profile

MHZ = 1_000_000


@pytest.fixture
def model():
    return HyperfineModel()


@pytest.fixture
def plan():
    return paper_pump_plan()


def test_class_enumeration_matches_diagram():
    assert CLASS_TRANSITIONS[0] == ("5/2", "5/2")  # class I
    assert CLASS_TRANSITIONS[3] == ("3/2", "5/2")  # class IV


def test_class_offsets_resonant_is_zero(model):
    offs = class_offsets(model)
    for name, cls in zip(offs, CLASS_TRANSITIONS):
        assert offs[name][cls] == 0


def test_class_iv_offset_is_ground_splitting(model):
    offs = class_offsets(model)
    assert offs["IV"][("5/2", "5/2")] == Fraction(-46_200_000)


def test_zero_splittings_collapse_all_offsets():
    degenerate = HyperfineModel(
        ground_splittings=(1, 1), excited_splittings=(1, 1)
    )
    # splittings must be positive; emulate the degenerate limit with tiny ones
    offs = class_offsets(degenerate)
    for table in offs.values():
        for v in table.values():
            assert abs(v) <= 4  # offsets are sums of at most four 1-Hz gaps


def test_class_iv_pumped_ranges_reproduce_bookkeeping(model, plan):
    """Step-1 detuning ranges for class IV under the P2/P3 chirps."""
    got = pumped_intervals(model, plan, "IV", ("3/2", "5/2"))
    assert got == [(Fraction(0), Fraction(46_200_000)), (Fraction(55_800_000), Fraction(102_000_000))]
    got = pumped_intervals(model, plan, "IV", ("5/2", "5/2"))
    assert got == [(Fraction(9_600_000), Fraction(55_800_000))]
    got = pumped_intervals(model, plan, "IV", ("1/2", "5/2"))
    assert got == [
        (Fraction(34_500_000), Fraction(80_700_000)),
        (Fraction(90_300_000), Fraction(102_000_000)),
    ]


def test_empty_plan_gives_unit_factors(model):
    plan = PumpPlan(chirp_ranges=(), target_band=(46_200_000, 55_800_000))
    factors = apply_pump_plan(model, plan)
    for segs in factors.pieces.values():
        assert len(segs) == 1
        assert segs[0][2] == Fraction(1)


def test_target_inside_chirp_rejected(model):
    plan = PumpPlan(chirp_ranges=((40 * MHZ, 60 * MHZ),), target_band=(46_200_000, 55_800_000))
    with pytest.raises(ValueError, match="overlaps"):
        apply_pump_plan(model, plan)


def test_paper_plan_factor_map_matches_published_table(model, plan):
    factors = apply_pump_plan(model, plan)
    lo, m1, m2, hi = (
        Fraction(46_200_000),
        Fraction(50_100_000),
        Fraction(51_900_000),
        Fraction(55_800_000),
    )
    full3 = [(lo, hi, Fraction(3))]
    full15 = [(lo, hi, Fraction(3, 2))]
    expected = {
        ("1/2", "1/2"): full15,
        ("1/2", "3/2"): [(lo, m1, Fraction(3, 2)), (m1, hi, Fraction(3))],
        ("1/2", "5/2"): full3,
        ("3/2", "1/2"): full3,
        ("3/2", "3/2"): full3,
        ("3/2", "5/2"): full3,
        ("5/2", "1/2"): [(lo, m2, Fraction(3)), (m2, hi, Fraction(3, 2))],
        ("5/2", "3/2"): full3,
        ("5/2", "5/2"): full15,
    }
    assert factors.pieces == expected


def test_factor_map_breakpoints_exact(model, plan):
    factors = apply_pump_plan(model, plan)
    assert factors.breakpoints() == [
        Fraction(46_200_000),
        Fraction(50_100_000),
        Fraction(51_900_000),
        Fraction(55_800_000),
    ]


def test_chirp_order_does_not_matter(model):
    fwd = PumpPlan(
        chirp_ranges=((0, 46_200_000), (55_800_000, 102 * MHZ)),
        target_band=(46_200_000, 55_800_000),
    )
    rev = PumpPlan(
        chirp_ranges=((55_800_000, 102 * MHZ), (0, 46_200_000)),
        target_band=(46_200_000, 55_800_000),
    )
    assert apply_pump_plan(model, fwd).pieces == apply_pump_plan(model, rev).pieces


def test_enhancement_ratios_match_published_values(model, plan):
    # Independent arithmetic for the middle band: every transition at 3x
    # except (1/2->1/2), (5/2->5/2) at 1.5x gives sum(BR * factor) = 8.91
    factors = apply_pump_plan(model, plan)
    ratios = enhancement_ratios(factors, BranchingTable())
    segs = ratios.segments
    assert len(segs) == 3
    (a, b, r1), (_, _, r2), (_, _, r3) = segs
    assert (a, b) == (Fraction(46_200_000), Fraction(50_100_000))
    assert r1 == pytest.approx(2.87, abs=0.01)
    assert r2 == pytest.approx(8.91 / 3.0, abs=1e-9)
    assert r2 == pytest.approx(2.97, abs=0.01)
    assert r3 == pytest.approx(2.55, abs=0.01)


def test_ratios_all_unity_without_pumping(model):
    plan = PumpPlan(chirp_ranges=(), target_band=(46_200_000, 55_800_000))
    ratios = enhancement_ratios(apply_pump_plan(model, plan))
    assert len(ratios.segments) == 1
    assert ratios.segments[0][2] == pytest.approx(1.0)


def test_ratios_bounded_by_full_concentration(model, plan):
    ratios = enhancement_ratios(apply_pump_plan(model, plan))
    for _, _, r in ratios.segments:
        assert 0.0 <= r <= 3.0


def test_enhance_profile_scales_band_only(model, plan):
    grid = build_grid(200 * MHZ, 2**14, 51 * MHZ)
    base = flat_profile(grid, 0.97)
    ratios = enhancement_ratios(apply_pump_plan(model, plan))
    out = enhance_profile(base, ratios, (46_200_000, 55_800_000))
    f = grid.frequencies()
    mid = int(np.argmin(np.abs(f - 51 * MHZ)))
    outside = int(np.argmin(np.abs(f - 80 * MHZ)))
    assert out.depth[mid] == pytest.approx(0.97 * 2.97, rel=1e-9)
    assert out.depth[outside] == 0.97
    # WGC: 0.97 boosted to about 2.6 in the heart of the band
    assert 2.5 < out.depth[mid] < 2.9


def test_enhance_profile_fbc_inferred_depth(model, plan):
    grid = build_grid(200 * MHZ, 2**14, 51 * MHZ)
    base = flat_profile(grid, 0.052)
    ratios = enhancement_ratios(apply_pump_plan(model, plan))
    out = enhance_profile(base, ratios, (46_200_000, 55_800_000))
    f = grid.frequencies()
    mid = int(np.argmin(np.abs(f - 51 * MHZ)))
    assert out.depth[mid] == pytest.approx(0.14, abs=0.02)


def test_enhance_with_unit_ratio_is_identity(model):
    plan = PumpPlan(chirp_ranges=(), target_band=(46_200_000, 55_800_000))
    ratios = enhancement_ratios(apply_pump_plan(model, plan))
    grid = build_grid(200 * MHZ, 2**14, 51 * MHZ)
    base = flat_profile(grid, 0.7)
    out = enhance_profile(base, ratios, (46_200_000, 55_800_000))
    assert np.array_equal(out.depth, base.depth)


def test_branching_table_row_stochasticity_enforced():
    with pytest.raises(ValueError, match="sum to 1"):
        BranchingTable(values=((0.5, 0.5, 0.1), (0.12, 0.67, 0.21), (0.85, 0.12, 0.03)))
    with pytest.raises(ValueError):
        BranchingTable(values=((1.2, -0.1, -0.1), (0.12, 0.67, 0.21), (0.85, 0.12, 0.03)))


def test_factor_map_csv_export(tmp_path, model, plan):
    factors = apply_pump_plan(model, plan)
    path = tmp_path / "factors.csv"
    factors.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "transition,low_hz,high_hz,factor"


def test_ratios_csv_export(tmp_path, model, plan):
    ratios = enhancement_ratios(apply_pump_plan(model, plan))
    path = tmp_path / "ratios.csv"
    ratios.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "low_hz,high_hz,ratio"
