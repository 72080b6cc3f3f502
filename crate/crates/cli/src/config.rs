//! Run configuration: flat `key = value` files with dotted keys.

use std::fmt;
use std::str::FromStr;

use nanofiber_cavity::cavity_response::ResonanceParity;
use nanofiber_cavity::{AtomSpec, CavitySpec, FiberSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tune {
    None,
    Even,
    Odd,
}

impl Tune {
    pub fn parity(self) -> Option<ResonanceParity> {
        match self {
            Tune::None => None,
            Tune::Even => Some(ResonanceParity::Even),
            Tune::Odd => Some(ResonanceParity::Odd),
        }
    }
}

impl FromStr for Tune {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Tune::None),
            "even" => Ok(Tune::Even),
            "odd" => Ok(Tune::Odd),
            _ => Err("expected none, even or odd".into()),
        }
    }
}

impl fmt::Display for Tune {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tune::None => "none",
            Tune::Even => "even",
            Tune::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err("expected csv or json".into()),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fiber_radius_nm: f64,
    pub fiber_n1: f64,
    pub fiber_n2: f64,
    pub atom_r_nm: f64,
    pub atom_z_nm: f64,
    pub atom_q: i32,
    pub atom_lambda0_nm: f64,
    /// `γ0 / 2π` in MHz.
    pub atom_gamma0_mhz: f64,
    pub cavity_l_m: f64,
    pub cavity_r2: f64,
    pub cavity_phi_r: f64,
    pub cavity_alpha_per_cm: f64,
    pub cavity_tune: Tune,
    pub sim_t_max_gamma0: f64,
    pub sim_h_auto: bool,
    pub sim_h_override: Option<f64>,
    pub sim_oscillation_floor: f64,
    /// Largest number of trace rows written; longer traces are thinned.
    pub sim_max_rows: usize,
    pub output_format: Format,
    pub output_path: Option<String>,
    pub output_precision: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fiber_radius_nm: 200.0,
            fiber_n1: 1.45,
            fiber_n2: 1.0,
            atom_r_nm: 200.0,
            atom_z_nm: 0.0,
            atom_q: 1,
            atom_lambda0_nm: 852.0,
            atom_gamma0_mhz: 5.2,
            cavity_l_m: 0.2,
            cavity_r2: 0.9,
            cavity_phi_r: 0.0,
            cavity_alpha_per_cm: 0.0,
            cavity_tune: Tune::Even,
            sim_t_max_gamma0: 5.0,
            sim_h_auto: true,
            sim_h_override: None,
            sim_oscillation_floor: 1e-6,
            sim_max_rows: 2000,
            output_format: Format::Csv,
            output_path: None,
            output_precision: 9,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| CliError::config(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::config(key, format!("cannot parse `{value}` as a flag"))),
    }
}

fn opt_str(v: &Option<String>) -> String {
    v.clone().unwrap_or_else(|| "stdout".into())
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "fiber.radius_nm" => self.fiber_radius_nm = parse(key, v)?,
            "fiber.n1" => self.fiber_n1 = parse(key, v)?,
            "fiber.n2" => self.fiber_n2 = parse(key, v)?,
            "atom.r_nm" => self.atom_r_nm = parse(key, v)?,
            "atom.z_nm" => self.atom_z_nm = parse(key, v)?,
            "atom.q" => self.atom_q = parse(key, v)?,
            "atom.lambda0_nm" => self.atom_lambda0_nm = parse(key, v)?,
            "atom.gamma0_MHz" => self.atom_gamma0_mhz = parse(key, v)?,
            "cavity.L_m" => self.cavity_l_m = parse(key, v)?,
            "cavity.R2" => self.cavity_r2 = parse(key, v)?,
            "cavity.phi_R" => self.cavity_phi_r = parse(key, v)?,
            "cavity.alpha_per_cm" => self.cavity_alpha_per_cm = parse(key, v)?,
            "cavity.tune" => self.cavity_tune = parse(key, v)?,
            "sim.t_max_gamma0" => self.sim_t_max_gamma0 = parse(key, v)?,
            "sim.h_auto" => self.sim_h_auto = parse_bool(key, v)?,
            "sim.h_override" => {
                self.sim_h_override = if v == "none" { None } else { Some(parse(key, v)?) }
            }
            "sim.oscillation_floor" => self.sim_oscillation_floor = parse(key, v)?,
            "sim.max_rows" => self.sim_max_rows = parse(key, v)?,
            "output.format" => self.output_format = parse(key, v)?,
            "output.path" => {
                self.output_path = if v.is_empty() || v == "stdout" {
                    None
                } else {
                    Some(v.to_string())
                }
            }
            "output.precision" => self.output_precision = parse(key, v)?,
            _ => return Err(CliError::config(key, "unknown configuration key")),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn assign(&mut self, kv: &str) -> Result<(), CliError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::config("--set", format!("expected key=value, got `{kv}`")))?;
        self.set(k.trim(), v)
    }

    /// Reads a config file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::config("config", format!("line {}: expected key = value", no + 1))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("fiber.radius_nm", self.fiber_radius_nm.to_string()),
            ("fiber.n1", self.fiber_n1.to_string()),
            ("fiber.n2", self.fiber_n2.to_string()),
            ("atom.r_nm", self.atom_r_nm.to_string()),
            ("atom.z_nm", self.atom_z_nm.to_string()),
            ("atom.q", self.atom_q.to_string()),
            ("atom.lambda0_nm", self.atom_lambda0_nm.to_string()),
            ("atom.gamma0_MHz", self.atom_gamma0_mhz.to_string()),
            ("cavity.L_m", self.cavity_l_m.to_string()),
            ("cavity.R2", self.cavity_r2.to_string()),
            ("cavity.phi_R", self.cavity_phi_r.to_string()),
            ("cavity.alpha_per_cm", self.cavity_alpha_per_cm.to_string()),
            ("cavity.tune", self.cavity_tune.to_string()),
            ("sim.t_max_gamma0", self.sim_t_max_gamma0.to_string()),
            ("sim.h_auto", self.sim_h_auto.to_string()),
            (
                "sim.h_override",
                self.sim_h_override.map_or("none".into(), |h| h.to_string()),
            ),
            ("sim.oscillation_floor", self.sim_oscillation_floor.to_string()),
            ("sim.max_rows", self.sim_max_rows.to_string()),
            ("output.format", self.output_format.to_string()),
            ("output.path", opt_str(&self.output_path)),
            ("output.precision", self.output_precision.to_string()),
        ]
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.fiber()?;
        let bad = |field: &str, reason: &str| Err(CliError::config(field, reason));
        if !(-1..=1).contains(&self.atom_q) {
            return bad("atom.q", "must be -1, 0 or 1");
        }
        if !(self.atom_r_nm.is_finite() && self.atom_r_nm >= self.fiber_radius_nm) {
            return bad("atom.r_nm", "atom must sit on or outside the fiber surface");
        }
        if !self.atom_z_nm.is_finite() {
            return bad("atom.z_nm", "must be finite");
        }
        if !(self.atom_lambda0_nm.is_finite() && self.atom_lambda0_nm > 0.0) {
            return bad("atom.lambda0_nm", "must be positive");
        }
        if !(self.atom_gamma0_mhz.is_finite() && self.atom_gamma0_mhz > 0.0) {
            return bad("atom.gamma0_MHz", "must be positive");
        }
        if !(self.cavity_l_m.is_finite() && self.cavity_l_m > 0.0) {
            return bad("cavity.L_m", "must be positive");
        }
        if !(self.cavity_r2.is_finite() && (0.0..1.0).contains(&self.cavity_r2)) {
            return bad("cavity.R2", "must lie in [0, 1)");
        }
        if !self.cavity_phi_r.is_finite() {
            return bad("cavity.phi_R", "must be finite");
        }
        if !(self.cavity_alpha_per_cm.is_finite() && self.cavity_alpha_per_cm >= 0.0) {
            return bad("cavity.alpha_per_cm", "must be non-negative");
        }
        if self.atom_z_nm.abs() * 1e-9 > 0.5 * self.cavity_l_m {
            return bad("atom.z_nm", "atom must sit between the mirrors");
        }
        if !(self.sim_t_max_gamma0.is_finite() && self.sim_t_max_gamma0 > 0.0) {
            return bad("sim.t_max_gamma0", "must be positive");
        }
        if let Some(h) = self.sim_h_override {
            if !(h.is_finite() && h > 0.0) {
                return bad("sim.h_override", "must be positive");
            }
        }
        if !self.sim_h_auto && self.sim_h_override.is_none() {
            return bad("sim.h_override", "required when sim.h_auto is false");
        }
        if !(self.sim_oscillation_floor.is_finite() && self.sim_oscillation_floor >= 0.0) {
            return bad("sim.oscillation_floor", "must be non-negative");
        }
        if self.sim_max_rows < 2 {
            return bad("sim.max_rows", "must be at least 2");
        }
        if !(1..=17).contains(&self.output_precision) {
            return bad("output.precision", "must lie in 1..=17");
        }
        Ok(())
    }

    pub fn fiber(&self) -> Result<FiberSpec, CliError> {
        Ok(FiberSpec::new(self.fiber_radius_nm, self.fiber_n1, self.fiber_n2)?)
    }

    /// Free-space rate in rad/s.
    pub fn gamma0_phys(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.atom_gamma0_mhz * 1e6
    }

    pub fn atom(&self) -> AtomSpec {
        AtomSpec {
            r_nm: self.atom_r_nm,
            phi: 0.0,
            z_nm: self.atom_z_nm,
            q: self.atom_q,
            lambda0_nm: self.atom_lambda0_nm,
            gamma0_phys: Some(self.gamma0_phys()),
        }
    }

    /// Cavity before resonance tuning.
    pub fn raw_cavity(&self) -> CavitySpec {
        CavitySpec {
            length_m: self.cavity_l_m,
            r_mag: self.cavity_r2.sqrt(),
            phi_r: self.cavity_phi_r,
            alpha_per_cm: self.cavity_alpha_per_cm,
        }
    }

    /// Step handed to the integrator.
    pub fn step(&self) -> Option<f64> {
        if self.sim_h_auto {
            None
        } else {
            self.sim_h_override
        }
    }
}
