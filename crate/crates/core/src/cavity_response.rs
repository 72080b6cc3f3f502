//! Cavity-modified emission in the overdamped (Born-Markov) regime.
//!
//! Two lossless fiber-Bragg-grating mirrors with reflection coefficient
//! `R = |R| e^{i phi_R}` sit at `z = ±L/2`. Only the guided mode is
//! reflected; radiation modes pass through.

use serde::Serialize;
use std::f64::consts::PI;

use crate::emission_rates::{AtomSpec, RateReport};
use crate::fiber_modes::GuidedModeSolution;
use crate::{Complex, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavitySpec {
    /// Mirror separation, m.
    pub length_m: f64,
    /// Reflection amplitude `|R|`.
    pub r_mag: f64,
    /// Reflection phase, rad.
    pub phi_r: f64,
    /// Intensity absorption coefficient of the fiber, 1/cm.
    pub alpha_per_cm: f64,
}

impl Default for CavitySpec {
    fn default() -> Self {
        Self {
            length_m: 0.2,
            r_mag: 0.9f64.sqrt(),
            phi_r: 0.0,
            alpha_per_cm: 0.0,
        }
    }
}

impl CavitySpec {
    pub fn from_r2(length_m: f64, r2: f64) -> Result<Self> {
        let c = Self {
            length_m,
            r_mag: r2.max(0.0).sqrt(),
            ..Default::default()
        };
        if !(0.0..1.0).contains(&r2) {
            return Err(Error::invalid("cavity.R2", "must lie in [0, 1)"));
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_m.is_finite() && self.length_m > 0.0) {
            return Err(Error::invalid("cavity.L_m", "must be positive"));
        }
        if !(self.r_mag.is_finite() && (0.0..1.0).contains(&self.r_mag)) {
            return Err(Error::invalid("cavity.R2", "|R| must lie in [0, 1)"));
        }
        if !self.phi_r.is_finite() {
            return Err(Error::invalid("cavity.phi_R", "must be finite"));
        }
        if !(self.alpha_per_cm.is_finite() && self.alpha_per_cm >= 0.0) {
            return Err(Error::invalid("cavity.alpha_per_cm", "must be non-negative"));
        }
        Ok(())
    }

    /// Transmission amplitude of a lossless mirror.
    pub fn t_mag(&self) -> f64 {
        (1.0 - self.r_mag * self.r_mag).sqrt()
    }

    pub fn r2(&self) -> f64 {
        self.r_mag * self.r_mag
    }

    /// Amplitude absorption rate `alpha/2`, 1/m.
    pub fn half_alpha_per_m(&self) -> f64 {
        0.5 * self.alpha_per_cm * 100.0
    }

    /// Rejects atoms outside the mirrors.
    pub fn check_inside(&self, atom: &AtomSpec) -> Result<()> {
        if atom.z_nm.abs() * 1e-9 > 0.5 * self.length_m {
            return Err(Error::OutsideCavity {
                z_nm: atom.z_nm,
                length_m: self.length_m,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResonanceParity {
    Even,
    Odd,
}

/// `x y mod 2π`, using the exact rounding error of the product.
pub(crate) fn product_mod_2pi(x: f64, y: f64) -> f64 {
    let p = x * y;
    let e = x.mul_add(y, -p);
    reduce_phase(reduce_phase(p) + e)
}

/// Phase per crossing `Φ(ω) = β(ω) L + φ_R + (1+q)π` with linear dispersion,
/// real part reduced to `[0, 2π)`. Absorption adds the imaginary part `αL/2`.
pub fn phase_per_crossing(mode: &GuidedModeSolution, cavity: &CavitySpec, q: i32, omega: f64) -> Complex {
    let re = product_mod_2pi(mode.beta, cavity.length_m)
        + (omega - mode.omega) / mode.v_g * cavity.length_m
        + cavity.phi_r
        + (1.0 + q as f64) * PI;
    Complex::new(reduce_phase(re), cavity.half_alpha_per_m() * cavity.length_m)
}

/// Reduces a phase to `[0, 2π)`.
pub fn reduce_phase(phi: f64) -> f64 {
    phi.rem_euclid(2.0 * PI)
}

/// Closed-form impact factor `G(Φ)` at local phase `β z`.
pub fn impact_factor(phi: f64, r_mag: f64, beta_z: f64) -> f64 {
    let r2 = r_mag * r_mag;
    let num = 1.0 + r2 + 2.0 * r_mag * phi.cos() * (2.0 * beta_z).cos();
    let den = 1.0 - r2 + 4.0 * r2 / (1.0 - r2) * phi.sin().powi(2);
    num / den
}

/// Multiple-reflection expansion of `G` truncated after order `n`.
pub fn impact_series(phi: f64, r_mag: f64, beta_z: f64, n: usize) -> f64 {
    let mut g = 0.0;
    for j in 0..=n {
        let jf = j as f64;
        let even = r_mag.powi(2 * j as i32) * (2.0 * jf * phi).cos();
        g += if j == 0 { even } else { 2.0 * even };
        let odd_phase = (2.0 * jf + 1.0) * phi;
        g += r_mag.powi(2 * j as i32 + 1)
            * ((odd_phase + 2.0 * beta_z).cos() + (odd_phase - 2.0 * beta_z).cos());
    }
    g
}

pub fn g_max(r_mag: f64) -> f64 {
    (1.0 + r_mag) / (1.0 - r_mag)
}

pub fn g_min(r_mag: f64) -> f64 {
    (1.0 - r_mag) / (1.0 + r_mag)
}

pub fn finesse(r_mag: f64) -> f64 {
    PI * r_mag / (1.0 - r_mag * r_mag)
}

/// Length nearest `cavity.length_m` at which `Φ0 = mπ` with `m` of the
/// requested parity.
pub fn tune_length(cavity: &CavitySpec, mode: &GuidedModeSolution, q: i32, parity: ResonanceParity) -> f64 {
    // Work with the reduced phase; an even target is 0 or 2π, an odd one π.
    let phi = phase_per_crossing(mode, cavity, q, mode.omega).re;
    let want = match parity {
        ResonanceParity::Even => 0,
        ResonanceParity::Odd => 1,
    };
    let mut best = f64::NAN;
    for t in -1i32..=3 {
        if t.rem_euclid(2) != want {
            continue;
        }
        let dl = (t as f64 * PI - phi) / mode.beta;
        let l = cavity.length_m + dl;
        if l > 0.0 && (best.is_nan() || dl.abs() < (best - cavity.length_m).abs()) {
            best = l;
        }
    }
    best
}

/// Resonance order `m` of `Φ0 ≈ mπ` with the unreduced phase, and the
/// reduced offset `Φ0 - mπ` in `(-π/2, π/2]`.
pub fn resonance_order(mode: &GuidedModeSolution, cavity: &CavitySpec, q: i32) -> (i64, f64) {
    let unreduced = mode.beta * cavity.length_m + cavity.phi_r + (1.0 + q as f64) * PI;
    let phi = phase_per_crossing(mode, cavity, q, mode.omega).re;
    let k = (phi / PI).round();
    let offset = phi - k * PI;
    // Unreduced and reduced phases differ by an even multiple of π, which
    // fixes the parity of m; its magnitude comes from the unreduced value.
    let mut m = ((unreduced - offset) / PI).round() as i64;
    if (m - k as i64).rem_euclid(2) != 0 {
        m += 1;
    }
    (m, offset)
}

/// Cavity with its length tuned to the requested resonance.
pub fn tuned_cavity(cavity: &CavitySpec, mode: &GuidedModeSolution, q: i32, parity: ResonanceParity) -> CavitySpec {
    CavitySpec {
        length_m: tune_length(cavity, mode, q, parity),
        ..*cavity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityReport {
    /// Resonant phase per crossing reduced to `[0, 2π)`.
    pub phi0: f64,
    pub g0: f64,
    pub gamma_cavgyd: f64,
    pub gamma_total: f64,
    pub eta: f64,
    pub finesse: f64,
    pub g_max: f64,
    pub g_min: f64,
}

/// Overdamped-regime rates for an atom at `atom.z_nm`, given the cavity-free rates.
pub fn overdamped_report(
    mode: &GuidedModeSolution,
    atom: &AtomSpec,
    cavity: &CavitySpec,
    rates: &RateReport,
) -> Result<CavityReport> {
    cavity.validate()?;
    atom.validate()?;
    cavity.check_inside(atom)?;
    let phi0 = phase_per_crossing(mode, cavity, atom.q, mode.omega).re;
    let g0 = impact_factor(phi0, cavity.r_mag, mode.beta * atom.z_nm * 1e-9);
    let gamma_cavgyd = rates.gamma_gyd * g0;
    let gamma_total = gamma_cavgyd + rates.gamma_rad;
    Ok(CavityReport {
        phi0: reduce_phase(phi0),
        g0,
        gamma_cavgyd,
        gamma_total,
        eta: gamma_cavgyd / gamma_total,
        finesse: finesse(cavity.r_mag),
        g_max: g_max(cavity.r_mag),
        g_min: g_min(cavity.r_mag),
    })
}
