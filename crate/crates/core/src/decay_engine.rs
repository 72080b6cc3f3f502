//! Time evolution of the upper-state amplitude `C_a(t)` inside the cavity.
//!
//! Light emitted into the guided mode returns to the atom after bouncing off
//! the mirrors, so `C_a` obeys a delay-differential equation with one term
//! per round trip:
//!
//! ```text
//! dC/dt = -γ/2 C(t)
//!         - γ_gyd Σ_{n≥1} |R|^{2n} e^{2inΦ0} C(t - 2nτ_L)
//!         - γ_gyd/2 Σ_{n≥0} |R|^{2n+1} e^{(2n+1)iΦ0} e^{±2iβ0z} C(t - 2nτ_L - τ_±)
//! ```
//!
//! with `C(t) = 0` for `t < 0` and `C(0) = 1`. Times are in units of `1/γ0`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::cavity_response::{phase_per_crossing, product_mod_2pi, CavitySpec};
use crate::emission_rates::{AtomSpec, RateReport};
use crate::fiber_modes::GuidedModeSolution;
use crate::{Complex, Error, Result};

/// Reflection terms lighter than this are dropped.
pub const TERM_CUTOFF: f64 = 1e-15;
/// Largest order for which the partition sum is enumerated explicitly.
pub const PARTITION_ENUM_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayParams {
    pub gamma_gyd: f64,
    pub gamma_rad: f64,
    /// One-way crossing time `L/v_g`, in units of `1/γ0`.
    pub tau_l: f64,
    /// Round-trip delays `(L ± 2z)/v_g` via the two mirrors, in units of `1/γ0`.
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// Phase per crossing; the imaginary part carries absorption.
    pub phi0: Complex,
    /// Local phase `β0 z`; complex with absorption.
    pub beta0_z: Complex,
    pub r_mag: f64,
}

impl DelayParams {
    /// Atom at the cavity center.
    pub fn at_center(gamma_gyd: f64, gamma_rad: f64, tau_l: f64, phi0: f64, r_mag: f64) -> Self {
        Self {
            gamma_gyd,
            gamma_rad,
            tau_l,
            tau_plus: tau_l,
            tau_minus: tau_l,
            phi0: Complex::new(phi0, 0.0),
            beta0_z: Complex::new(0.0, 0.0),
            r_mag,
        }
    }

    /// Builds the delay parameters of a physical configuration; `gamma0_phys`
    /// (rad/s) sets the time unit.
    pub fn from_setup(
        mode: &GuidedModeSolution,
        atom: &AtomSpec,
        cavity: &CavitySpec,
        rates: &RateReport,
        gamma0_phys: f64,
    ) -> Result<Self> {
        cavity.validate()?;
        atom.validate()?;
        cavity.check_inside(atom)?;
        if !(gamma0_phys.is_finite() && gamma0_phys > 0.0) {
            return Err(Error::invalid("atom.gamma0_phys", "must be positive"));
        }
        let z = atom.z_nm * 1e-9;
        let scale = gamma0_phys / mode.v_g;
        let ha = cavity.half_alpha_per_m();
        let p = Self {
            gamma_gyd: rates.gamma_gyd,
            gamma_rad: rates.gamma_rad,
            tau_l: cavity.length_m * scale,
            tau_plus: (cavity.length_m + 2.0 * z) * scale,
            tau_minus: (cavity.length_m - 2.0 * z) * scale,
            phi0: phase_per_crossing(mode, cavity, atom.q, mode.omega),
            beta0_z: Complex::new(product_mod_2pi(mode.beta, z), ha * z),
            r_mag: cavity.r_mag,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_gyd + self.gamma_rad
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_mag.is_finite() && (0.0..1.0).contains(&self.r_mag)) {
            return Err(Error::invalid("cavity.R2", "|R| must lie in [0, 1)"));
        }
        if !(self.gamma_gyd >= 0.0 && self.gamma_rad >= 0.0) {
            return Err(Error::invalid("rates", "must be non-negative"));
        }
        if !(self.tau_l.is_finite() && self.tau_l > 0.0) {
            return Err(Error::invalid("tau_l", "must be positive"));
        }
        if self.tau_plus < 0.0 || self.tau_minus < 0.0 {
            return Err(Error::invalid("atom.z_nm", "atom must sit between the mirrors"));
        }
        if (self.tau_plus + self.tau_minus - 2.0 * self.tau_l).abs() > 1e-12 * self.tau_l {
            return Err(Error::invalid("tau_plus", "tau_plus + tau_minus must equal 2 tau_l"));
        }
        Ok(())
    }

    /// `|R| e^{iΦ0}` raised to `n`, with absorption.
    fn reflection_power(&self, n: u32) -> Complex {
        let nf = n as f64;
        Complex::from_polar(
            self.r_mag.powi(n as i32) * (-nf * self.phi0.im).exp(),
            nf * self.phi0.re,
        )
    }

    fn is_centered(&self) -> bool {
        (self.tau_plus - self.tau_minus).abs() <= 1e-12 * self.tau_l
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct DelayTerm {
    coef: Complex,
    delay: f64,
}

/// Reflection terms whose delay does not exceed `t_max`.
fn delay_terms(p: &DelayParams, t_max: f64) -> Vec<DelayTerm> {
    let mut terms = Vec::new();
    if p.r_mag == 0.0 || p.gamma_gyd == 0.0 {
        return terms;
    }
    let g = p.gamma_gyd;
    let local = |sign: f64| (Complex::i() * 2.0 * sign * p.beta0_z).exp();
    for n in 0u32.. {
        let even = 2 * n + 2;
        let odd = 2 * n + 1;
        let base = 2.0 * n as f64 * p.tau_l;
        let w_odd = p.reflection_power(odd);
        let w_even = p.reflection_power(even);
        if w_odd.norm() < TERM_CUTOFF || base > t_max {
            break;
        }
        for (sign, tau) in [(1.0, p.tau_plus), (-1.0, p.tau_minus)] {
            let delay = base + tau;
            if delay <= t_max {
                terms.push(DelayTerm {
                    coef: -0.5 * g * w_odd * local(sign),
                    delay,
                });
            }
        }
        let delay = base + 2.0 * p.tau_l;
        if w_even.norm() >= TERM_CUTOFF && delay <= t_max {
            terms.push(DelayTerm {
                coef: -g * w_even,
                delay,
            });
        }
    }
    terms.sort_by(|a, b| a.delay.total_cmp(&b.delay));
    terms
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTrace {
    /// Sample instants, units of `1/γ0`.
    pub times: Vec<f64>,
    pub amplitude: Vec<Complex>,
    pub population: Vec<f64>,
    /// Integration step, units of `1/γ0`.
    pub step: f64,
}

impl DecayTrace {
    fn from_amplitude(times: Vec<f64>, amplitude: Vec<Complex>, step: f64) -> Self {
        let population = amplitude.iter().map(|c| c.norm_sqr()).collect();
        Self {
            times,
            amplitude,
            population,
            step,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Every `stride`-th sample, always keeping the last one.
    pub fn decimate(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let mut idx: Vec<usize> = (0..self.len()).step_by(stride).collect();
        if let Some(&last) = idx.last() {
            if last + 1 != self.len() {
                idx.push(self.len() - 1);
            }
        }
        Self {
            times: idx.iter().map(|&i| self.times[i]).collect(),
            amplitude: idx.iter().map(|&i| self.amplitude[i]).collect(),
            population: idx.iter().map(|&i| self.population[i]).collect(),
            step: self.step,
        }
    }
}

/// Step used when none is given.
pub fn auto_step(p: &DelayParams, t_max: f64) -> f64 {
    let gamma = p.gamma();
    let rm = p.r_mag;
    let gamma_est = p.gamma_gyd * (1.0 + rm) / (1.0 - rm) + p.gamma_rad;
    let h_rate = 0.002 / gamma.max(gamma_est).max(1e-12);
    let terms = delay_terms(p, t_max);
    match terms.iter().map(|t| t.delay).reduce(f64::min) {
        None => h_rate.min(t_max / 16.0),
        Some(tau_min) => {
            let h0 = h_rate.min(tau_min / 8.0);
            // Put the crossing instants on the grid.
            p.tau_l / (p.tau_l / h0).ceil()
        }
    }
}

struct History {
    h: f64,
    c: Vec<Complex>,
    /// Right-limit derivative at each grid point.
    dp: Vec<Complex>,
    /// Left-limit derivative at each grid point.
    dm: Vec<Complex>,
}

impl History {
    fn at(&self, u: f64, eps: f64) -> Complex {
        if u < -eps {
            return Complex::new(0.0, 0.0);
        }
        if u <= 0.0 {
            return self.c[0];
        }
        let x = u / self.h;
        let mut i = x.floor() as usize;
        let last = self.c.len() - 1;
        if i >= last {
            i = last - 1;
        }
        let th = x - i as f64;
        if th.abs() * self.h <= eps {
            return self.c[i];
        }
        if (1.0 - th).abs() * self.h <= eps {
            return self.c[i + 1];
        }
        let (t2, t3) = (th * th, th * th * th);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + th;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.c[i] * h00 + self.dp[i] * (h10 * self.h) + self.c[i + 1] * h01 + self.dm[i + 1] * (h11 * self.h)
    }
}

/// Integrates the delay equation to `t_max` with fixed step `h` (automatic when `None`).
pub fn simulate_decay(p: &DelayParams, t_max: f64, h: Option<f64>) -> Result<DecayTrace> {
    p.validate()?;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid("sim.t_max_gamma0", "must be positive"));
    }
    let terms = delay_terms(p, t_max);
    let tau_min = terms.iter().map(|t| t.delay).reduce(f64::min);
    let step = match h {
        Some(h) => {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::invalid("sim.h_override", "must be positive"));
            }
            if let Some(tm) = tau_min {
                if h > tm / 4.0 {
                    return Err(Error::StepTooLarge { h, tau_min: tm });
                }
            }
            h
        }
        None => auto_step(p, t_max),
    };
    let n_steps = ((t_max / step) - 1e-9).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=n_steps).map(|i| i as f64 * step).collect();
    let half_gamma = 0.5 * p.gamma();

    // No reflection reaches the atom before t_max: free decay.
    if terms.is_empty() {
        let amp = times
            .iter()
            .map(|&t| Complex::new((-half_gamma * t).exp(), 0.0))
            .collect();
        return Ok(DecayTrace::from_amplitude(times, amp, step));
    }

    let eps = 1e-9 * step;
    let mut hist = History {
        h: step,
        c: Vec::with_capacity(n_steps + 1),
        dp: Vec::with_capacity(n_steps + 1),
        dm: Vec::with_capacity(n_steps + 1),
    };
    let one = Complex::new(1.0, 0.0);
    hist.c.push(one);
    hist.dm.push(-half_gamma * one);

    // Delay sum at time s; `right` includes terms switching on exactly at s.
    let delayed = |hist: &History, s: f64, right: bool| -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        for t in &terms {
            let u = s - t.delay;
            if u > eps || (right && u > -eps) {
                acc += t.coef * hist.at(u, eps);
            } else {
                // Sorted by delay: nothing further is active.
                break;
            }
        }
        acc
    };

    for n in 0..n_steps {
        let t = times[n];
        let y = hist.c[n];
        let k1 = -half_gamma * y + delayed(&hist, t, true);
        hist.dp.push(k1);
        let th = t + 0.5 * step;
        let k2 = -half_gamma * (y + 0.5 * step * k1) + delayed(&hist, th, false);
        let k3 = -half_gamma * (y + 0.5 * step * k2) + delayed(&hist, th, false);
        let t1 = times[n + 1];
        let k4 = -half_gamma * (y + step * k3) + delayed(&hist, t1, false);
        let y1 = y + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        hist.c.push(y1);
        hist.dm.push(-half_gamma * y1 + delayed(&hist, t1, false));
    }
    Ok(DecayTrace::from_amplitude(times, hist.c, step))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for i in 1..=n {
        v[i] = v[i - 1] + (i as f64).ln();
    }
    v
}

/// `c[p] = Σ 1/(k_1!…k_n!)` over partitions of `n` with `p = Σ k_i` parts,
/// by enumeration.
pub fn partition_coefficients(n: usize) -> Vec<f64> {
    let mut inv_fact = vec![1.0; n + 1];
    for i in 1..=n {
        inv_fact[i] = inv_fact[i - 1] / i as f64;
    }
    let mut out = vec![0.0; n + 1];
    if n == 0 {
        out[0] = 1.0;
        return out;
    }
    // Descend over part sizes from largest to smallest.
    fn descend(part: usize, remaining: usize, parts: usize, weight: f64, inv_fact: &[f64], out: &mut [f64]) {
        if remaining == 0 {
            out[parts] += weight;
            return;
        }
        if part == 1 {
            out[parts + remaining] += weight * inv_fact[remaining];
            return;
        }
        for k in 0..=remaining / part {
            descend(part - 1, remaining - k * part, parts + k, weight * inv_fact[k], inv_fact, out);
        }
    }
    descend(n, n, 0, 1.0, &inv_fact, &mut out);
    out
}

/// Same coefficients in closed form, `C(n-1, p-1)/p!`.
pub fn composition_coefficients(n: usize) -> Vec<f64> {
    let lf = ln_factorials(n.max(1));
    let mut out = vec![0.0; n + 1];
    if n == 0 {
        out[0] = 1.0;
        return out;
    }
    for p in 1..=n {
        out[p] = (lf[n - 1] - lf[p - 1] - lf[n - p] - lf[p]).exp();
    }
    out
}

/// Exact solution at the cavity center as a sum over crossing orders.
pub struct CenterOracle {
    params: DelayParams,
    coeffs: Vec<Vec<f64>>,
}

impl CenterOracle {
    pub fn new(params: &DelayParams, t_max: f64) -> Result<Self> {
        params.validate()?;
        if !params.is_centered() {
            return Err(Error::OffCenter);
        }
        let n_max = (t_max / params.tau_l + 1e-9).floor().max(0.0) as usize;
        let coeffs = (0..=n_max)
            .map(|n| {
                if n <= PARTITION_ENUM_MAX {
                    partition_coefficients(n)
                } else {
                    composition_coefficients(n)
                }
            })
            .collect();
        Ok(Self {
            params: *params,
            coeffs,
        })
    }

    pub fn eval(&self, t: f64) -> Result<Complex> {
        let p = &self.params;
        if t < 0.0 {
            return Err(Error::invalid("t", "must be non-negative"));
        }
        let half_gamma = 0.5 * p.gamma();
        let mut sum = Complex::new(0.0, 0.0);
        for (n, c) in self.coeffs.iter().enumerate() {
            let u = t - n as f64 * p.tau_l;
            if u < -1e-12 * p.tau_l {
                break;
            }
            let u = u.max(0.0);
            let x = -p.gamma_gyd * u;
            let (mut poly, mut bound, mut pow) = (0.0, 0.0, 1.0);
            for &cp in c {
                poly += cp * pow;
                bound += cp * pow.abs();
                pow *= x;
            }
            let w = p.reflection_power(n as u32);
            let damp = (-half_gamma * u).exp();
            if n > 0 && w.norm() * damp * bound < 1e-14 {
                break;
            }
            sum += w * damp * poly;
        }
        Ok(sum)
    }
}

pub fn analytic_center_solution(params: &DelayParams, t: f64) -> Result<Complex> {
    CenterOracle::new(params, t)?.eval(t)
}

/// Least-squares decay rate of the population over `[t1, t2]`.
pub fn fit_decay_rate(trace: &DecayTrace, t1: f64, t2: f64) -> Result<f64> {
    let (first, last) = match (trace.times.first(), trace.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::WindowOutOfRange { t1, t2 }),
    };
    let tol = 1e-9 * trace.step;
    if !(t1 < t2) || t1 < first - tol || t2 > last + tol {
        return Err(Error::WindowOutOfRange { t1, t2 });
    }
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &p) in trace.times.iter().zip(&trace.population) {
        if t < t1 - tol || t > t2 + tol {
            continue;
        }
        if !(p > 0.0) {
            return Err(Error::NonPositivePopulation { t, value: p });
        }
        let y = p.ln();
        n += 1.0;
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    if n < 2.0 {
        return Err(Error::WindowOutOfRange { t1, t2 });
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(-slope)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub count: usize,
    pub first_minimum: Option<f64>,
    /// Mean spacing of successive minima.
    pub period: Option<f64>,
    pub samples_per_period: Option<f64>,
    pub warning: Option<String>,
}

/// A minimum counts only if it lies below this fraction of the lower of
/// its two flanking peaks; shallower dips are delay ripples, not Rabi cycles.
const MIN_DEPTH: f64 = 0.5;

/// Counts population minima up to the last time the population exceeds `floor`.
pub fn detect_oscillations(trace: &DecayTrace, floor: f64) -> OscillationReport {
    let p = &trace.population;
    let end = match p.iter().rposition(|&v| v > floor) {
        Some(i) => i,
        None => 0,
    };
    let mut minima = Vec::new();
    let mut since = 0;
    let mut i = 1;
    while i + 1 <= end {
        if p[i] < p[i - 1] {
            // Walk over a flat bottom.
            let mut j = i;
            while j + 1 <= end && p[j + 1] == p[j] {
                j += 1;
            }
            if j + 1 <= end && p[j + 1] > p[j] {
                let left = p[since..j].iter().cloned().fold(f64::MIN, f64::max);
                let right = p[j + 1..=end].iter().cloned().fold(f64::MIN, f64::max);
                let peak = left.min(right);
                if peak - p[j] > MIN_DEPTH * peak {
                    minima.push(trace.times[j]);
                    since = j;
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let period = if minima.len() >= 2 {
        Some((minima[minima.len() - 1] - minima[0]) / (minima.len() - 1) as f64)
    } else {
        None
    };
    let samples = period.map(|t| t / trace.step);
    let warning = match samples {
        Some(s) if s < 16.0 => Some(format!(
            "only {s:.1} samples per oscillation period; refine the step"
        )),
        _ => None,
    };
    OscillationReport {
        count: minima.len(),
        first_minimum: minima.first().copied(),
        period,
        samples_per_period: samples,
        warning,
    }
}

/// Rabi angular frequency implied by an oscillation period.
pub fn period_to_frequency(period: f64) -> f64 {
    2.0 * PI / period
}
