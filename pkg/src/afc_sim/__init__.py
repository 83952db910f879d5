"""Cavity-enhanced atomic-frequency-comb memory simulator and design toolkit."""

from .spectral import (
    AbsorptionProfile,
    CombSpec,
    FrequencyGrid,
    SpectralFeature,
    build_grid,
    comb_profile,
    double_comb,
    effective_depth,
    flat_profile,
    overlay,
    resample,
    synthesize_profile,
)
from .ions import (
    BranchingTable,
    HyperfineModel,
    PumpPlan,
    apply_pump_plan,
    class_offsets,
    enhance_profile,
    enhancement_ratios,
    paper_pump_plan,
)
from .response import (
    CavityAnalytics,
    CavityParams,
    ComplexResponse,
    cavity_analytics,
    cavity_reflection,
    gaussian_mode,
    infer_loss,
    infer_mode_matching,
    kk_phase,
    mode_match,
    resonance_rt,
    single_pass_response,
)
from .memory import (
    AnalyticEfficiency,
    EchoResult,
    Pulse,
    PulseTrain,
    StarkSchedule,
    analytic_efficiency,
    classical_bound,
    classical_bound_report,
    dephasing_factor,
    qubit_fidelity,
    simulate_stark_readout,
    simulate_storage,
    stark_echo_efficiency,
)
from .optimize import (
    CombOptimum,
    MatchResult,
    SweepResult,
    dispersion_diagnostics,
    matched_depth,
    optimize_comb,
    sweep_bandwidth,
)
from .presets import MemoryPreset, fbc_preset, get_preset, wgc_preset
from .config import ScenarioConfig, validate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
