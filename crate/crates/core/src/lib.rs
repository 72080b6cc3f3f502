//! Spontaneous emission of a two-level atom near an optical nanofiber
//! enclosed by two fiber-Bragg-grating (FBG) mirrors.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] - cylinder functions (J, Y, I, K, Hankel) with derivatives.
//! * [`quadrature`] - adaptive composite Gauss-Legendre integration.
//! * [`fiber_modes`] - the fundamental HE11 guided mode: eigenvalue,
//!   normalized profile, group velocity and effective mode area.
//! * [`radiation_modes`] - normalized radiation-mode profiles.
//! * [`emission_rates`] - cavity-free emission rates into guided and
//!   radiation modes, in units of the free-space rate `γ0`.
//! * [`cavity_response`] - cavity impact factor, channeling efficiency and
//!   resonance tuning in the overdamped (Born-Markov) regime.
//! * [`decay_engine`] - the multiple-reflection delay-differential equation
//!   for the upper-state amplitude and its exact partition-sum solution.
//! * [`single_mode`] - single-mode reduction, coupling constants, regimes
//!   and critical cavity lengths.
//!
//! All rates are reported in units of `γ0`; times in the decay engine are in
//! units of `1/γ0`. Geometry is given in nanometres for the fiber and atom and
//! in metres for the cavity length.

pub mod cavity_response;
pub mod constants;
pub mod decay_engine;
pub mod emission_rates;
mod error;
pub mod fiber_modes;
pub mod quadrature;
pub mod radiation_modes;
pub mod single_mode;
pub mod specfun;

pub use cavity_response::{
    finesse, g_max, g_min, impact_factor, impact_series, overdamped_report, phase_per_crossing,
    tune_length, CavityReport, CavitySpec, ResonanceParity,
};
pub use constants::{Constants, SI};
pub use decay_engine::{
    analytic_center_solution, detect_oscillations, fit_decay_rate, simulate_decay, DecayTrace,
    DelayParams, OscillationReport,
};
pub use emission_rates::{
    gamma_guided, gamma_nonrad_ratio, gamma_rad, rate_report, AtomSpec, NonradRatio, RadOptions,
    RateReport,
};
pub use error::{Error, Result};
pub use fiber_modes::{
    effective_area, group_velocity, guided_profile, solve_fundamental, EVec, FiberSpec,
    GuidedModeSolution, Sign,
};
pub use radiation_modes::{rad_coeffs, radiation_profile, RadModeCoeffs};
pub use single_mode::{
    classify_regime, compare_with_dde, critical_lengths, overdamped_impact, resonant_solution,
    single_mode_params, CriticalLengths, DdeComparison, Regime, RegimeDiagnostics,
    SingleModeReport,
};

/// Complex amplitude type used throughout the crate.
pub type Complex = num_complex::Complex64;
