"""Execution of the scenario kinds behind the command-line runner.

Every scenario is deterministic: same config, same bytes out.  Each run
writes ``result.json`` (keys: scenario, inputs, efficiencies, analytic,
checks) plus scenario-specific CSV and SVG artifacts into its own directory.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import ions, memory, optimize, report, response
from .config import ScenarioConfig, validate
from .presets import FBC_INPUT_WAIST_M, FBC_ROC_M, MemoryPreset
from .spectral import CombSpec, SpectralFeature, double_comb, overlay, synthesize_profile

MHZ = 1e6


def run_scenario(config: ScenarioConfig) -> dict:
    errors = validate(config)
    if errors:
        raise ValueError("invalid config:\n" + "\n".join("  " + e for e in errors))
    os.makedirs(config.out_dir, exist_ok=True)
    runner = {
        "storage": _run_storage,
        "stark_readout": _run_stark,
        "qubit": _run_qubit,
        "sweep": _run_sweep,
        "holeburn": _run_holeburn,
        "analytics": _run_analytics,
        "fit": _run_fit,
    }[config.scenario]
    payload = runner(config)
    payload["scenario"] = config.scenario
    payload.setdefault("inputs", {})["preset"] = config.preset
    payload["inputs"]["overrides"] = dict(config.overrides)
    report.write_result_json(os.path.join(config.out_dir, "result.json"), payload)
    return payload


def _analytic_block(preset: MemoryPreset) -> dict:
    match = optimize.matched_depth(preset.cavity)
    chain = memory.analytic_efficiency(
        preset.eta_m, preset.comb.finesse, match.eps, match.matched_depth
    )
    return {
        "eta_m": preset.eta_m,
        "f_afc": preset.comb.finesse,
        "eps": match.eps,
        "matched_depth": match.matched_depth,
        "eps_over_4d": match.eps_over_4d,
        "eta_deph": chain.eta_deph,
        "cavity_factor": chain.cavity_factor,
        "eta": chain.eta,
    }


def _apply_lifetime(effs: np.ndarray, windows, config: ScenarioConfig, t0: float) -> np.ndarray:
    if config.afc_lifetime_s is None:
        return effs
    centers = np.array([0.5 * (a + b) - t0 for a, b in windows])
    factors = np.exp(-4.0 * centers / config.afc_lifetime_s)
    return effs * factors


def _run_storage(config: ScenarioConfig) -> dict:
    preset = config.build_preset()
    grid = preset.grid(config.grid_points, config.grid_span_hz)
    profile = preset.profile(grid)
    train = preset.input_train(config.input_time_s, config.modes, config.mode_spacing_s)
    windows = preset.echo_windows(train)
    result = memory.simulate_storage(profile, preset.cavity, train, preset.eta_m, windows)
    effs = _apply_lifetime(result.efficiencies, windows, config, config.input_time_s)

    result.to_csv(os.path.join(config.out_dir, "trace.csv"))
    t = result.times_s
    keep = t <= windows[-1][1] + 2 * preset.storage_time_s
    report.write_svg_lines(
        os.path.join(config.out_dir, "plot.svg"),
        [("intensity", (t[keep] * 1e6).tolist(), result.intensity[keep].tolist())],
        x_label="time (us)",
        y_label="intensity",
    )
    return {
        "inputs": {
            "modes": config.modes,
            "pulse_fwhm_s": preset.pulse_fwhm_s,
            "storage_time_s": preset.storage_time_s,
            "mean_photon_number": preset.mean_photon_number,
            "afc_lifetime_s": config.afc_lifetime_s,
        },
        "efficiencies": [float(e) for e in effs],
        "mean_efficiency": float(np.mean(effs)),
        "transfer_ratios": [float(x) for x in result.transfer_ratios],
        "analytic": _analytic_block(preset),
        "checks": {
            "parseval_error": result.parseval_error,
            "max_reflectivity_sq": result.max_reflectivity_sq,
        },
    }


def _run_stark(config: ScenarioConfig) -> dict:
    preset = config.build_preset()
    grid = preset.grid(config.grid_points, config.grid_span_hz)
    profile = preset.profile(grid)
    train = preset.input_train(config.input_time_s, 1)
    t0 = config.input_time_s
    ts = preset.storage_time_s
    n = config.stark_order
    pulse_times = [] if n == 1 else [t0 + 0.5 * ts, t0 + (n - 0.5) * ts]
    schedule = memory.StarkSchedule(
        pulse_times=tuple(pulse_times),
        per_pulse_phase=2.0 * math.pi * config.stark_phase_turns,
    )
    windows = preset.echo_windows(train, orders=range(1, n + 1))
    result = memory.simulate_stark_readout(
        profile, preset.cavity, train, schedule, preset.eta_m, windows, storage_time_s=ts
    )
    effs = _apply_lifetime(result.efficiencies, windows, config, t0)
    result.to_csv(os.path.join(config.out_dir, "trace.csv"))
    t = result.times_s
    keep = t <= windows[-1][1] + 2 * ts
    report.write_svg_lines(
        os.path.join(config.out_dir, "plot.svg"),
        [("intensity", (t[keep] * 1e6).tolist(), result.intensity[keep].tolist())],
        x_label="time (us)",
        y_label="intensity",
    )
    match = optimize.matched_depth(preset.cavity)
    return {
        "inputs": {
            "stark_order": n,
            "pulse_times_s": list(pulse_times),
            "per_pulse_phase_rad": schedule.per_pulse_phase,
            "storage_time_s": ts,
        },
        "efficiencies": [float(e) for e in effs],
        "restored_order_efficiency": float(effs[-1]),
        "analytic": {
            **_analytic_block(preset),
            "stark_eta_cav_n": memory.stark_echo_efficiency(
                match.matched_depth, preset.cavity.r1, preset.cavity.r2_eff,
                preset.comb.finesse, n,
            ),
        },
        "checks": {"parseval_error": result.parseval_error},
    }


def _qubit_pole_run(preset: MemoryPreset, grid, which: str, t0: float) -> tuple[float, float, float]:
    """Store a lone pole state; return (signal, crosstalk, efficiency)."""
    sep = preset.qubit_separation_s
    profile = preset.profile(grid)
    center = t0 if which == "early" else t0 + sep
    train = memory.PulseTrain(
        pulses=(memory.Pulse(center, preset.pulse_fwhm_s),),
        mean_photon_number=preset.mean_photon_number,
    )
    half = min(0.45 * sep, 3.0 * preset.pulse_fwhm_s)
    ts = preset.storage_time_s
    w_early = (t0 + ts - half, t0 + ts + half)
    w_late = (t0 + sep + ts - half, t0 + sep + ts + half)
    result = memory.simulate_storage(profile, preset.cavity, train, preset.eta_m, [w_early, w_late])
    t = result.times_s
    sig_w, cross_w = (w_early, w_late) if which == "early" else (w_late, w_early)
    sig = float(np.sum(result.intensity[(t >= sig_w[0]) & (t < sig_w[1])]))
    cross = float(np.sum(result.intensity[(t >= cross_w[0]) & (t < cross_w[1])]))
    eff = float(result.efficiencies[0 if which == "early" else 1])
    return sig, cross, eff


def _qubit_visibility_fbc(preset: MemoryPreset, grid, t0: float, rel_phase: float) -> float:
    """Two-path (unbalanced-MZI) analyzer after the memory echo."""
    sep = preset.qubit_separation_s
    train = memory.PulseTrain(
        pulses=(
            memory.Pulse(t0, preset.pulse_fwhm_s),
            memory.Pulse(t0 + sep, preset.pulse_fwhm_s, amplitude=np.exp(1j * rel_phase)),
        ),
        mean_photon_number=preset.mean_photon_number,
    )
    profile = preset.profile(grid)
    r = response.cavity_reflection(profile, preset.cavity)
    t = grid.times()
    e_in = train.field(t)
    nu_bins = np.fft.ifftshift(grid.detunings())
    e_nu = np.fft.fft(e_in) * np.fft.ifftshift(r.amplitude)
    e_nu = memory.analyzer_two_path(e_nu, nu_bins, sep)
    intensity = np.abs(np.fft.ifft(e_nu)) ** 2
    half = min(0.45 * sep, 3.0 * preset.pulse_fwhm_s)
    center = t0 + preset.storage_time_s + sep  # echo(early)+T meets echo(late)
    m = (t >= center - half) & (t < center + half)
    return float(np.sum(intensity[m]))


def _qubit_visibility_wgc(preset: MemoryPreset, grid, t0: float, rel_phase: float, df: float) -> float:
    """Double-AFC analyzer: two superimposed combs, storage times 1/Delta and
    1/Delta + qubit separation, with the common comb center detuned by df."""
    sep = preset.qubit_separation_s
    ts1 = preset.storage_time_s
    ts2 = ts1 + sep
    match = optimize.matched_depth(preset.cavity)
    half_peak = preset.comb.peak_depth / 2.0
    finesse = optimize._finesse_for_average(half_peak, match.matched_depth / 2.0, "gaussian")
    spec1 = CombSpec(1.0 / ts1, finesse, preset.comb.bandwidth_hz, half_peak)
    spec2 = CombSpec(1.0 / ts2, finesse, preset.comb.bandwidth_hz, half_peak)
    comb = double_comb(spec1, spec2, 0.0, grid, center_shift_hz=df)
    pit = (
        grid.center_offset_hz - preset.pit_width_hz / 2,
        grid.center_offset_hz + preset.pit_width_hz / 2,
    )
    background = synthesize_profile([SpectralFeature("pit", pit, 0.0)], preset.base_depth, grid)
    profile = overlay(background, comb, pit)
    train = memory.PulseTrain(
        pulses=(
            memory.Pulse(t0, preset.pulse_fwhm_s),
            memory.Pulse(t0 + sep, preset.pulse_fwhm_s, amplitude=np.exp(1j * rel_phase)),
        ),
        mean_photon_number=preset.mean_photon_number,
    )
    result = memory.simulate_storage(
        profile, preset.cavity, train, preset.eta_m,
        [(t0 + ts2 - 0.2 * sep, t0 + ts2 + 0.2 * sep)],
    )
    t = result.times_s
    m = (t >= t0 + ts2 - 0.2 * sep) & (t < t0 + ts2 + 0.2 * sep)
    return float(np.sum(result.intensity[m]))


def _visibility_from_sweep(values: list[float]) -> float:
    hi, lo = max(values), min(values)
    return (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0


def _run_qubit(config: ScenarioConfig) -> dict:
    preset = config.build_preset()
    grid = preset.grid(config.grid_points, config.grid_span_hz)
    t0 = config.input_time_s

    s_e, n_e, eff_e = _qubit_pole_run(preset, grid, "early", t0)
    s_l, n_l, eff_l = _qubit_pole_run(preset, grid, "late", t0)

    visibilities = []
    for base_phase in (0.0, math.pi / 2.0):  # |e>+|l> and |e>+i|l>
        if preset.name == "fbc":
            samples = [
                _qubit_visibility_fbc(preset, grid, t0, base_phase + p)
                for p in (0.0, math.pi)
            ]
        else:
            ts1 = preset.storage_time_s
            period = 1.0 / preset.qubit_separation_s  # relative phase period in df
            dfs = [k * period / 8.0 for k in range(8)]
            samples = [
                _qubit_visibility_wgc(preset, grid, t0, base_phase, df) for df in dfs
            ]
        visibilities.append(_visibility_from_sweep(samples))

    fid = memory.qubit_fidelity(
        pole_counts=[(s_e, n_e), (s_l, n_l)], visibilities=tuple(visibilities)
    )
    eta_bar = 0.5 * (eff_e + eff_l)
    bound = memory.classical_bound_report(preset.mean_photon_number, eta_bar)
    return {
        "inputs": {
            "mu_q": preset.mean_photon_number,
            "qubit_separation_s": preset.qubit_separation_s,
            "analyzer": "two_path" if preset.name == "fbc" else "double_afc",
        },
        "efficiencies": [eff_e, eff_l],
        "fidelities": {
            "f_early": fid.f_early,
            "f_late": fid.f_late,
            "f_plus": fid.f_plus,
            "f_plus_i": fid.f_plus_i,
            "f_total": fid.f_total,
        },
        "classical_bound": bound,
        "analytic": _analytic_block(preset),
        "checks": {"mean_pole_efficiency": eta_bar},
    }


def _run_sweep(config: ScenarioConfig) -> dict:
    preset = config.build_preset()
    grid = preset.grid(config.grid_points, config.grid_span_hz)
    curves = {}
    series = []
    for scheme in config.sweep_schemes:
        sweep = optimize.sweep_bandwidth(
            scheme,
            config.sweep_bandwidths_hz,
            preset.cavity,
            base_depth=preset.base_depth,
            enhanced_depth=preset.comb.peak_depth,
            spacing_hz=preset.comb.spacing_hz,
            f_afc=preset.comb.finesse,
            eta_m=preset.eta_m,
            pit_width_hz=preset.pit_width_hz,
            grid=grid,
        )
        sweep.to_csv(os.path.join(config.out_dir, f"sweep_{scheme}.csv"))
        curves[scheme] = [float(e) for e in sweep.efficiencies]
        series.append(
            (scheme, (sweep.values / MHZ).tolist(), sweep.efficiencies.tolist())
        )
    report.write_svg_lines(
        os.path.join(config.out_dir, "plot.svg"),
        series,
        x_label="AFC bandwidth (MHz)",
        y_label="efficiency",
    )
    return {
        "inputs": {"bandwidths_hz": list(config.sweep_bandwidths_hz)},
        "efficiencies": curves.get("enhanced", []),
        "curves": curves,
        "analytic": _analytic_block(preset),
        "checks": {},
    }


def _run_holeburn(config: ScenarioConfig) -> dict:
    preset = config.build_preset()
    factors = ions.apply_pump_plan(preset.hyperfine, preset.pump_plan)
    ratios = ions.enhancement_ratios(factors, preset.branching)
    factors.to_csv(os.path.join(config.out_dir, "factor_map.csv"))
    ratios.to_csv(os.path.join(config.out_dir, "ratios.csv"))
    return {
        "inputs": {
            "chirp_ranges_hz": [[float(a), float(b)] for a, b in preset.pump_plan.chirp_ranges],
            "target_band_hz": [float(x) for x in preset.pump_plan.target_band],
        },
        "efficiencies": [],
        "ratios": [
            {"low_hz": float(lo), "high_hz": float(hi), "ratio": r}
            for lo, hi, r in ratios.segments
        ],
        "analytic": {},
        "checks": {},
    }


def _run_analytics(config: ScenarioConfig) -> dict:
    preset = config.build_preset()
    cav = response.cavity_analytics(preset.cavity)
    match = optimize.matched_depth(
        preset.cavity, peak_depth=preset.comb.peak_depth, eta_m=preset.eta_m
    )
    block = _analytic_block(preset)
    payload = {
        "inputs": {},
        "efficiencies": [],
        "analytic": block,
        "cavity": {
            "finesse": cav.finesse,
            "fsr_hz": cav.fsr_hz,
            "linewidth_hz": cav.linewidth_hz,
            "implied_f_afc": match.implied_f_afc,
        },
        "checks": {},
    }
    if preset.name == "fbc":
        w0, l_eff = response.gaussian_mode(
            preset.cavity.wavelength_m,
            preset.cavity.geometric_length_m,
            preset.cavity.refractive_index,
            preset.cavity.air_gap_m,
            FBC_ROC_M,
        )
        payload["cavity"]["mode_waist_m"] = w0
        payload["cavity"]["effective_length_m"] = l_eff
        payload["cavity"]["mode_matching"] = response.mode_match(w0, FBC_INPUT_WAIST_M)
    return payload


def _run_fit(config: ScenarioConfig) -> dict:
    preset = config.build_preset()
    r_measured = config.fit_r_measured if config.fit_r_measured is not None else 0.841
    eta_m = config.fit_eta_m if config.fit_eta_m is not None else preset.eta_m
    d_loss, eps = response.infer_loss(r_measured, preset.cavity.r1, preset.cavity.r2, eta_m)
    return {
        "inputs": {"r_measured": r_measured, "eta_m": eta_m, "r1": preset.cavity.r1, "r2": preset.cavity.r2},
        "efficiencies": [],
        "fit": {"d_loss": d_loss, "eps": eps, "eps_ppm": eps * 1e6},
        "analytic": {},
        "checks": {},
    }
