//! Single-mode reduction of the cavity.
//!
//! Near the cavity resonance closest to the atomic line the multiple-
//! reflection dynamics reduce to an atom coupled to one damped mode with
//! coupling `Ω`, damping `κ` and detuning `Δ`. Rates are in units of `γ0`
//! unless a field says otherwise.

use serde::Serialize;
use std::f64::consts::PI;

use crate::cavity_response::{product_mod_2pi, resonance_order, CavitySpec};
use crate::decay_engine::{detect_oscillations, DecayTrace};
use crate::emission_rates::{AtomSpec, RateReport};
use crate::fiber_modes::GuidedModeSolution;
use crate::{Complex, Error, Result};

/// Default separation factor standing in for "much greater than".
pub const DEFAULT_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    StrongCoupling,
    Overdamped,
    FreeDecay,
    Intermediate,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::StrongCoupling => "strong_coupling",
            Regime::Overdamped => "overdamped",
            Regime::FreeDecay => "free_decay",
            Regime::Intermediate => "intermediate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeDiagnostics {
    pub regime: Regime,
    pub threshold: f64,
    /// `2Ω / max(κ, γ)`
    pub coupling_ratio: f64,
    /// `κ / max(2Ω, γ)`
    pub cavity_ratio: f64,
    /// `γ / max(2Ω, κ)`
    pub free_ratio: f64,
}

pub fn classify_regime(omega: f64, kappa: f64, gamma: f64, threshold: f64) -> RegimeDiagnostics {
    let coupling_ratio = 2.0 * omega / kappa.max(gamma);
    let cavity_ratio = kappa / (2.0 * omega).max(gamma);
    let free_ratio = gamma / (2.0 * omega).max(kappa);
    let regime = if coupling_ratio >= threshold {
        Regime::StrongCoupling
    } else if cavity_ratio >= threshold {
        Regime::Overdamped
    } else if free_ratio >= threshold {
        Regime::FreeDecay
    } else {
        Regime::Intermediate
    };
    RegimeDiagnostics {
        regime,
        threshold,
        coupling_ratio,
        cavity_ratio,
        free_ratio,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalLengths {
    /// Below `l1` the cavity damping outruns the coupling, m; infinite at a node.
    pub l1: f64,
    /// Above `l2` the coupling falls below the free decay, m.
    pub l2: f64,
    /// Above `l3` the cavity damping falls below the free decay, m.
    pub l3: f64,
}

/// Critical cavity lengths for coupling factor `cos2 = cos²(β_c z + mπ/2)`
/// (one at an antinode).
pub fn critical_lengths(
    rates: &RateReport,
    mode: &GuidedModeSolution,
    r_mag: f64,
    cos2: f64,
    gamma0_phys: f64,
) -> Result<CriticalLengths> {
    if !(r_mag > 0.0 && r_mag < 1.0) {
        return Err(Error::invalid("cavity.R2", "needs 0 < |R| < 1"));
    }
    if !(0.0..=1.0).contains(&cos2) {
        return Err(Error::invalid("cos2", "must lie in [0, 1]"));
    }
    let vg = mode.v_g / gamma0_phys;
    let ln_r = r_mag.ln().abs();
    let gyd = rates.gamma_gyd;
    let gamma = rates.gamma_total_free;
    let l1 = if cos2 == 0.0 {
        f64::INFINITY
    } else {
        vg * ln_r * ln_r / (4.0 * gyd * cos2)
    };
    Ok(CriticalLengths {
        l1,
        l2: 16.0 * vg * gyd * cos2 / (gamma * gamma),
        l3: 2.0 * vg * ln_r / gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverdampedImpact {
    pub g0: f64,
    pub g_max: f64,
    pub g_min: f64,
}

/// Impact factor of the overdamped single-mode limit.
pub fn overdamped_impact(r_mag: f64, beta0_z: f64, m_index: i64) -> Result<OverdampedImpact> {
    if !(r_mag > 0.0 && r_mag < 1.0) {
        return Err(Error::invalid("cavity.R2", "needs 0 < |R| < 1"));
    }
    let ln_r = r_mag.ln().abs();
    let c = (beta0_z + m_index.rem_euclid(4) as f64 * PI / 2.0).cos();
    Ok(OverdampedImpact {
        g0: 1.0 + 2.0 / ln_r * c * c,
        g_max: 1.0 + 2.0 / ln_r,
        g_min: 1.0,
    })
}

/// Amplitude at exact resonance,
/// `e^{-(κ+γ)t/4} [cosh(Λt/2) + (κ-γ)/(2Λ) sinh(Λt/2)]`.
pub fn resonant_solution(omega: f64, kappa: f64, gamma: f64, t: f64) -> Complex {
    let a = 0.5 * (kappa - gamma);
    let lambda = Complex::new(a * a - omega * omega, 0.0).sqrt();
    let x = 0.5 * lambda * t;
    let (cosh, sinhc) = if x.norm() < 1e-6 {
        let x2 = x * x;
        (1.0 + 0.5 * x2, 1.0 + x2 / 6.0)
    } else {
        (x.cosh(), x.sinh() / x)
    };
    // sinh(Λt/2)/Λ = (t/2) sinh(x)/x
    (cosh + a * 0.5 * t * sinhc) * (-(kappa + gamma) * t / 4.0).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleModeReport {
    /// Resonance order `m` of `Φ0 ≈ mπ`.
    pub m_index: i64,
    /// Mode-minus-atom detuning `ω_c - ω0`, rad/s.
    pub delta_rad_s: f64,
    /// Same detuning in units of `γ0`.
    pub delta: f64,
    pub kappa: f64,
    pub omega: f64,
    /// `Λ = sqrt((κ-γ)²/4 - Ω²)`.
    pub lambda: Complex,
    pub finesse: f64,
    /// Crossing time in units of `1/γ0`.
    pub tau_l: f64,
    pub gamma: f64,
    /// `cos²(β_c z + mπ/2)`.
    pub coupling_factor: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub regime: Regime,
    pub diagnostics: RegimeDiagnostics,
    /// `γ0 / 2π` in MHz.
    pub gamma0_mhz: f64,
}

impl SingleModeReport {
    /// Converts a rate in units of `γ0` to MHz (cycles per second).
    pub fn to_mhz(&self, rate: f64) -> f64 {
        rate * self.gamma0_mhz
    }

    /// Period of population oscillations, `2π/Ω`, units of `1/γ0`.
    pub fn rabi_period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

pub fn single_mode_params(
    mode: &GuidedModeSolution,
    atom: &AtomSpec,
    cavity: &CavitySpec,
    rates: &RateReport,
) -> Result<SingleModeReport> {
    single_mode_params_with(mode, atom, cavity, rates, DEFAULT_THRESHOLD)
}

pub fn single_mode_params_with(
    mode: &GuidedModeSolution,
    atom: &AtomSpec,
    cavity: &CavitySpec,
    rates: &RateReport,
    threshold: f64,
) -> Result<SingleModeReport> {
    cavity.validate()?;
    atom.validate()?;
    cavity.check_inside(atom)?;
    if cavity.r_mag == 0.0 {
        return Err(Error::invalid("cavity.R2", "single-mode reduction needs |R| > 0"));
    }
    let gamma0_phys = atom
        .gamma0_phys
        .ok_or_else(|| Error::invalid("atom.gamma0_phys", "needed to express the crossing time"))?;
    let vg = mode.v_g / gamma0_phys;
    let length = cavity.length_m;
    let tau_l = length / vg;
    let (m, offset) = resonance_order(mode, cavity, atom.q);
    let delta = -offset / tau_l;
    let z = atom.z_nm * 1e-9;
    let theta = product_mod_2pi(mode.beta, z) + delta / vg * z;
    // Quarter turns applied exactly, so that nodes give a coupling of exactly zero.
    let cos_phase = match m.rem_euclid(4) {
        0 => theta.cos(),
        1 => -theta.sin(),
        2 => -theta.cos(),
        _ => theta.sin(),
    };
    let cos2 = cos_phase * cos_phase;
    let gyd = rates.gamma_gyd;
    let omega = 2.0 * (gyd / tau_l).sqrt() * cos_phase.abs();
    let ln_r = cavity.r_mag.ln().abs();
    let kappa = 2.0 * ln_r / tau_l;
    let gamma = rates.gamma_total_free;
    let a = 0.5 * (kappa - gamma);
    let lambda = Complex::new(a * a - omega * omega, 0.0).sqrt();
    let lengths = critical_lengths(rates, mode, cavity.r_mag, cos2, gamma0_phys)?;
    let diagnostics = classify_regime(omega, kappa, gamma, threshold);
    Ok(SingleModeReport {
        m_index: m,
        delta_rad_s: delta * gamma0_phys,
        delta,
        kappa,
        omega,
        lambda,
        finesse: PI / (2.0 * ln_r),
        tau_l,
        gamma,
        coupling_factor: cos2,
        l1: lengths.l1,
        l2: lengths.l2,
        l3: lengths.l3,
        regime: diagnostics.regime,
        diagnostics,
        gamma0_mhz: gamma0_phys / (2.0 * PI) / 1e6,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DdeComparison {
    /// `2π/Ω` from the single-mode model.
    pub model_period: f64,
    /// Mean spacing of population minima in the delay-equation trace.
    pub dde_period: Option<f64>,
    pub rabi_period_error: Option<f64>,
    /// Largest `|P_model - P_trace|` over the trace.
    pub pointwise_max_error: f64,
    /// Set when `2Ω < max(κ, γ)`, where no Rabi oscillation is expected.
    pub regime_mismatch: bool,
    pub warning: Option<String>,
}

/// Checks the resonant single-mode solution against a delay-equation trace.
pub fn compare_with_dde(report: &SingleModeReport, trace: &DecayTrace, floor: f64) -> DdeComparison {
    let osc = detect_oscillations(trace, floor);
    let model_period = report.rabi_period();
    let rabi_period_error = osc.period.map(|p| (p - model_period).abs() / model_period);
    let pointwise_max_error = trace
        .times
        .iter()
        .zip(&trace.population)
        .map(|(&t, &p)| (resonant_solution(report.omega, report.kappa, report.gamma, t).norm_sqr() - p).abs())
        .fold(0.0, f64::max);
    let regime_mismatch = 2.0 * report.omega < report.kappa.max(report.gamma);
    let warning = if regime_mismatch {
        Some(format!(
            "configuration is not strongly coupled (2Ω = {:.3}, κ = {:.3}, γ = {:.3}); no Rabi period to compare",
            2.0 * report.omega,
            report.kappa,
            report.gamma
        ))
    } else {
        osc.warning
    };
    DdeComparison {
        model_period,
        dde_period: osc.period,
        rabi_period_error,
        pointwise_max_error,
        regime_mismatch,
        warning,
    }
}
