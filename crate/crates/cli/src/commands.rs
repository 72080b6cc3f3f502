//! Subcommand implementations. Each returns a [`Table`]; writing is the caller's job.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nanofiber_cavity::cavity_response::tuned_cavity;
use nanofiber_cavity::decay_engine::auto_step;
use nanofiber_cavity::fiber_modes::{effective_area, guided_profile, solve_fundamental, Sign};
use nanofiber_cavity::single_mode::single_mode_params_with;
use nanofiber_cavity::{
    detect_oscillations, fit_decay_rate, overdamped_report, rate_report, simulate_decay, AtomSpec,
    CavitySpec, DecayTrace, DelayParams, FiberSpec, GuidedModeSolution, RadOptions, RateReport,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

const RATE: &str = "gamma0";
const TIME: &str = "1/gamma0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    A,
    R,
    Z,
    R2,
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "a" => Ok(SweepParam::A),
            "r" => Ok(SweepParam::R),
            "z" => Ok(SweepParam::Z),
            "R2" => Ok(SweepParam::R2),
            _ => Err(format!("unknown sweep parameter `{s}`; expected a, r, z or R2")),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::A => "a",
            SweepParam::R => "r",
            SweepParam::Z => "z",
            SweepParam::R2 => "R2",
        })
    }
}

impl SweepParam {
    fn column(self) -> (&'static str, &'static str) {
        match self {
            SweepParam::A => ("a_nm", "nm"),
            SweepParam::R => ("r_nm", "nm"),
            SweepParam::Z => ("z_nm", "nm"),
            SweepParam::R2 => ("R2", "1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Sweep {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.points < 2 {
            return Err(CliError::config("--points", "a sweep needs at least 2 points"));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(CliError::config("--from", "sweep bounds must be finite"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == n {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

/// Table pre-filled with every configuration entry.
pub fn base_table(title: &str, cfg: &RunConfig) -> Table {
    let mut t = Table::new(title);
    for (k, v) in cfg.entries() {
        t.param(k, v);
    }
    t
}

pub fn solve_mode(cfg: &RunConfig, fiber: &FiberSpec) -> Result<GuidedModeSolution, CliError> {
    Ok(solve_fundamental(fiber, cfg.atom_lambda0_nm)?)
}

/// Cavity of the configuration, tuned with dipole index `tune_q` when requested.
pub fn cavity_for(cfg: &RunConfig, mode: &GuidedModeSolution, tune_q: i32) -> CavitySpec {
    let raw = cfg.raw_cavity();
    match cfg.cavity_tune.parity() {
        Some(p) => tuned_cavity(&raw, mode, tune_q, p),
        None => raw,
    }
}

fn rates_at(fiber: &FiberSpec, mode: &GuidedModeSolution, atom: &AtomSpec) -> Result<RateReport, CliError> {
    Ok(rate_report(fiber, mode, atom, &RadOptions::default())?)
}

pub fn modes(cfg: &RunConfig, profile: Option<(usize, f64)>) -> Result<Table, CliError> {
    let fiber = cfg.fiber()?;
    let mode = solve_mode(cfg, &fiber)?;
    let ea = effective_area(&mode, &fiber)?;
    let mut t = base_table("modes", cfg);
    let summary: [(&str, &str, f64); 7] = [
        ("beta_over_k", "1", mode.effective_index()),
        ("beta", "1/m", mode.beta),
        ("v_g", "m/s", mode.v_g),
        ("A_eff", "um^2", ea.area_um2),
        ("r_eff", "nm", ea.r_eff_nm),
        ("h", "1/m", mode.h),
        ("q_out", "1/m", mode.q_out),
    ];
    match profile {
        None => {
            for (name, unit, _) in &summary {
                t.column(name, unit);
            }
            t.push(summary.iter().map(|&(_, _, v)| Cell::Num(v)).collect());
        }
        Some((points, r_max_nm)) => {
            if points < 2 {
                return Err(CliError::config("--profile-points", "needs at least 2 samples"));
            }
            if !(r_max_nm.is_finite() && r_max_nm > 0.0) {
                return Err(CliError::config("--r-max-nm", "must be positive"));
            }
            for (name, unit, v) in &summary {
                t.param(format!("mode.{name} [{unit}]"), v);
            }
            t.column("r_nm", "nm");
            t.column("abs_e_r", "1/m");
            t.column("abs_e_phi", "1/m");
            t.column("abs_e_z", "1/m");
            for i in 0..points {
                let r = r_max_nm * i as f64 / (points - 1) as f64;
                let e = guided_profile(&mode, &fiber, Sign::Plus, Sign::Plus, r)?;
                t.push(vec![Cell::Num(r), e.r.norm().into(), e.phi.norm().into(), e.z.norm().into()]);
            }
            t.note("profile of the normalized mode f = +, l = +; the surface r = a is sampled on the clad side");
        }
    }
    Ok(t)
}

/// Overdamped-regime rates over a sweep. `tune_q` is the dipole index the
/// cavity length is tuned for.
pub fn rates_table(cfg: &RunConfig, sweep: Option<Sweep>, tune_q: i32) -> Result<Table, CliError> {
    let fiber = cfg.fiber()?;
    let mode = solve_mode(cfg, &fiber)?;
    let mut t = base_table("rates", cfg);
    let sweep = match sweep {
        Some(s) => {
            s.validate()?;
            t.param("sweep.param", s.param);
            t.param("sweep.from", s.from);
            t.param("sweep.to", s.to);
            t.param("sweep.points", s.points);
            Some(s)
        }
        None => None,
    };
    t.param("cavity.tuned_for_q", tune_q);
    let (name, unit) = sweep.map_or(("point", "1"), |s| s.param.column());
    t.column(name, unit);
    for c in ["gamma_gyd", "gamma_rad", "gamma_cavgyd", "Gamma"] {
        t.column(c, RATE);
    }
    t.column("eta", "1");
    t.column("G0", "1");

    let values = sweep.map_or(vec![0.0], |s| s.values());
    // Rates that do not change along the sweep are computed once.
    let shared = match sweep.map(|s| s.param) {
        Some(SweepParam::A) | Some(SweepParam::R) => None,
        _ => Some(rates_at(&fiber, &mode, &cfg.atom())?),
    };
    if sweep.map(|s| s.param) == Some(SweepParam::A) {
        t.note("the atom keeps its distance r - a from the surface while a is swept");
    }
    let rows: Vec<Result<Vec<Cell>, CliError>> = values
        .par_iter()
        .map(|&x| {
            let mut c = cfg.clone();
            match sweep.map(|s| s.param) {
                Some(SweepParam::A) => {
                    c.atom_r_nm = x + (cfg.atom_r_nm - cfg.fiber_radius_nm);
                    c.fiber_radius_nm = x;
                }
                Some(SweepParam::R) => c.atom_r_nm = x,
                Some(SweepParam::Z) => c.atom_z_nm = x,
                Some(SweepParam::R2) => c.cavity_r2 = x,
                None => {}
            }
            c.validate()?;
            let (fiber, mode) = if sweep.map(|s| s.param) == Some(SweepParam::A) {
                let f = c.fiber()?;
                let m = solve_mode(&c, &f)?;
                (f, m)
            } else {
                (fiber, mode)
            };
            let atom = c.atom();
            let rates = match shared {
                Some(r) => r,
                None => rates_at(&fiber, &mode, &atom)?,
            };
            let cav = cavity_for(&c, &mode, tune_q);
            let rep = overdamped_report(&mode, &atom, &cav, &rates)?;
            let first = if sweep.is_some() { Cell::Num(x) } else { Cell::Int(0) };
            Ok(vec![
                first,
                rates.gamma_gyd.into(),
                rates.gamma_rad.into(),
                rep.gamma_cavgyd.into(),
                rep.gamma_total.into(),
                rep.eta.into(),
                rep.g0.into(),
            ])
        })
        .collect();
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

pub fn rates(cfg: &RunConfig, sweep: Option<Sweep>) -> Result<Table, CliError> {
    rates_table(cfg, sweep, cfg.atom_q)
}

/// Delay parameters of the configuration with the cavity tuned for `tune_q`.
pub fn delay_params(cfg: &RunConfig, tune_q: i32) -> Result<(DelayParams, RateReport, CavitySpec), CliError> {
    let fiber = cfg.fiber()?;
    let mode = solve_mode(cfg, &fiber)?;
    let atom = cfg.atom();
    let rates = rates_at(&fiber, &mode, &atom)?;
    let cav = cavity_for(cfg, &mode, tune_q);
    let p = DelayParams::from_setup(&mode, &atom, &cav, &rates, cfg.gamma0_phys())?;
    Ok((p, rates, cav))
}

pub fn run_trace(p: &DelayParams, t_max: f64, h: Option<f64>) -> Result<DecayTrace, CliError> {
    simulate_decay(p, t_max, h).map_err(CliError::integrator)
}

/// Every `stride`-th index, always keeping the last.
pub fn thinned(len: usize, max_rows: usize) -> Vec<usize> {
    let stride = len.div_ceil(max_rows).max(1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

/// Oscillation and decay-rate diagnostics of one trace, keys prefixed by `tag`.
pub fn trace_diagnostics(t: &mut Table, tag: &str, trace: &DecayTrace, floor: f64) {
    let osc = detect_oscillations(trace, floor);
    t.diagnostic(&format!("{tag}oscillation.count"), osc.count);
    t.diagnostic(&format!("{tag}oscillation.first_minimum [1/gamma0]"), osc.first_minimum);
    t.diagnostic(&format!("{tag}oscillation.period [1/gamma0]"), osc.period);
    t.diagnostic(&format!("{tag}oscillation.samples_per_period"), osc.samples_per_period);
    if let Some(w) = osc.warning {
        t.diagnostic(&format!("{tag}oscillation.warning"), w.as_str());
    }
    let t_end = *trace.times.last().expect("traces are never empty");
    let fit = fit_decay_rate(trace, 0.5 * t_end, t_end).ok();
    t.diagnostic(&format!("{tag}decay.fit_rate_second_half [gamma0]"), fit);
    t.diagnostic(&format!("{tag}integrator.step [1/gamma0]"), trace.step);
}

pub fn decay(cfg: &RunConfig) -> Result<Table, CliError> {
    let (p, rates, cav) = delay_params(cfg, cfg.atom_q)?;
    let trace = run_trace(&p, cfg.sim_t_max_gamma0, cfg.step())?;
    let mut t = base_table("decay", cfg);
    t.param("cavity.tuned_L_m", cav.length_m);
    t.param("rates.gamma_gyd [gamma0]", rates.gamma_gyd);
    t.param("rates.gamma_rad [gamma0]", rates.gamma_rad);
    t.param("delay.tau_L [1/gamma0]", p.tau_l);
    t.column("t", TIME);
    t.column("t_s", "s");
    t.column("re_Ca", "1");
    t.column("im_Ca", "1");
    t.column("P", "1");
    t.column("P_free", "1");
    let g0 = cfg.gamma0_phys();
    let gamma = rates.gamma_total_free;
    for i in thinned(trace.len(), cfg.sim_max_rows) {
        let (time, c) = (trace.times[i], trace.amplitude[i]);
        t.push(vec![
            time.into(),
            (time / g0).into(),
            c.re.into(),
            c.im.into(),
            trace.population[i].into(),
            (-gamma * time).exp().into(),
        ]);
    }
    trace_diagnostics(&mut t, "", &trace, cfg.sim_oscillation_floor);
    Ok(t)
}

pub fn singlemode(cfg: &RunConfig, threshold: f64) -> Result<Table, CliError> {
    if !(threshold.is_finite() && threshold > 1.0) {
        return Err(CliError::config("--threshold", "must exceed 1"));
    }
    let fiber = cfg.fiber()?;
    let mode = solve_mode(cfg, &fiber)?;
    let atom = cfg.atom();
    let rates = rates_at(&fiber, &mode, &atom)?;
    let cav = cavity_for(cfg, &mode, cfg.atom_q);
    let r = single_mode_params_with(&mode, &atom, &cav, &rates, threshold)?;
    let mut t = base_table("singlemode", cfg);
    t.param("cavity.tuned_L_m", cav.length_m);
    t.param("regime.threshold", threshold);
    let cols: [(&str, &str, Cell); 24] = [
        ("m_index", "1", Cell::Int(r.m_index)),
        ("delta", RATE, r.delta.into()),
        ("delta_rad_s", "rad/s", r.delta_rad_s.into()),
        ("kappa", RATE, r.kappa.into()),
        ("omega", RATE, r.omega.into()),
        ("gamma", RATE, r.gamma.into()),
        ("lambda_re", RATE, r.lambda.re.into()),
        ("lambda_im", RATE, r.lambda.im.into()),
        ("finesse", "1", r.finesse.into()),
        ("tau_L", TIME, r.tau_l.into()),
        ("tau_L_s", "s", (r.tau_l / cfg.gamma0_phys()).into()),
        ("coupling_factor", "1", r.coupling_factor.into()),
        ("L1", "m", Cell::finite(r.l1)),
        ("L2", "m", r.l2.into()),
        ("L3", "m", r.l3.into()),
        ("regime", "-", r.regime.as_str().into()),
        ("coupling_ratio", "1", Cell::finite(r.diagnostics.coupling_ratio)),
        ("cavity_ratio", "1", Cell::finite(r.diagnostics.cavity_ratio)),
        ("free_ratio", "1", Cell::finite(r.diagnostics.free_ratio)),
        ("omega_MHz", "MHz", r.to_mhz(r.omega).into()),
        ("kappa_MHz", "MHz", r.to_mhz(r.kappa).into()),
        ("gamma_MHz", "MHz", r.to_mhz(r.gamma).into()),
        ("delta_MHz", "MHz", r.to_mhz(r.delta).into()),
        ("rabi_period", TIME, Cell::finite(r.rabi_period())),
    ];
    let mut row = Vec::new();
    for (name, unit, v) in cols {
        t.column(name, unit);
        row.push(v);
    }
    t.push(row);
    t.note("MHz values are cycle frequencies, rate * gamma0 / 2pi");
    if !r.l1.is_finite() {
        t.note("L1 is null: the atom sits at a node, the coupling vanishes and strong coupling cannot be reached at any length");
    }
    if r.omega == 0.0 {
        t.note("rabi_period is null: no coupling at a node");
    }
    Ok(t)
}

/// Common integration step for several configurations sharing one cavity.
pub fn shared_step(params: &[DelayParams], t_max: f64) -> f64 {
    params
        .iter()
        .map(|p| auto_step(p, t_max))
        .fold(f64::INFINITY, f64::min)
}

/// Axial period `π/β0` of the cavity field pattern, nm.
pub fn axial_period_nm(mode: &GuidedModeSolution) -> f64 {
    PI / mode.beta * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_values_hit_both_ends() {
        let s = Sweep {
            param: SweepParam::R2,
            from: 0.0,
            to: 0.95,
            points: 20,
        };
        let v = s.values();
        assert_eq!(v.len(), 20);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[19], 0.95);
    }

    #[test]
    fn thinning_keeps_ends() {
        assert_eq!(thinned(10, 100), (0..10).collect::<Vec<_>>());
        let idx = thinned(1001, 100);
        assert!(idx.len() <= 101);
        assert_eq!(idx[0], 0);
        assert_eq!(*idx.last().unwrap(), 1000);
    }

    #[test]
    fn single_point_rates_match_library() {
        let cfg = RunConfig::default();
        let t = rates(&cfg, None).unwrap();
        assert_eq!(t.rows.len(), 1);
        match t.rows[0][5] {
            Cell::Num(eta) => assert!((eta - 0.935).abs() < 0.01),
            ref c => panic!("{c:?}"),
        }
    }
}
