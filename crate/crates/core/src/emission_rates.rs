//! Spontaneous-emission rates of a two-level atom near the bare nanofiber.
//!
//! All rates are in units of the free-space rate `γ0`, so the dipole
//! magnitude cancels. The atom carries a single spherical dipole component
//! `q ∈ {-1, 0, 1}`.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::fiber_modes::{guided_profile, FiberSpec, GuidedModeSolution, Sign};
use crate::quadrature::AdaptiveGauss;
use crate::radiation_modes::{rad_coeffs_with, radiation_profile_with};
use crate::specfun::MAX_ORDER;
use crate::{Complex, Constants, Error, Result, SI};

/// Free-space decay rate of the cesium D2 line, rad/s.
pub const CESIUM_D2_GAMMA0: f64 = 2.0 * PI * 5.2e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomSpec {
    /// Radial distance from the fiber axis, nm.
    pub r_nm: f64,
    /// Azimuth, rad. Rates do not depend on it.
    pub phi: f64,
    /// Axial position measured from the cavity center, nm.
    pub z_nm: f64,
    /// Spherical index of the dipole.
    pub q: i32,
    pub lambda0_nm: f64,
    /// Free-space decay rate, rad/s.
    pub gamma0_phys: Option<f64>,
}

impl Default for AtomSpec {
    /// Cesium D2 atom on the surface of the default 200 nm fiber.
    fn default() -> Self {
        Self {
            r_nm: 200.0,
            phi: 0.0,
            z_nm: 0.0,
            q: 1,
            lambda0_nm: 852.0,
            gamma0_phys: Some(CESIUM_D2_GAMMA0),
        }
    }
}

impl AtomSpec {
    pub fn validate(&self) -> Result<()> {
        if !(-1..=1).contains(&self.q) {
            return Err(Error::invalid("atom.q", "must be -1, 0 or 1"));
        }
        if !(self.r_nm.is_finite() && self.r_nm > 0.0) {
            return Err(Error::invalid("atom.r_nm", "must be positive"));
        }
        if !(self.lambda0_nm.is_finite() && self.lambda0_nm > 0.0) {
            return Err(Error::invalid("atom.lambda0_nm", "must be positive"));
        }
        if !self.z_nm.is_finite() || !self.phi.is_finite() {
            return Err(Error::invalid("atom.z_nm", "must be finite"));
        }
        if let Some(g) = self.gamma0_phys {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::invalid("atom.gamma0_phys", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        SI.omega_from_wavelength_nm(self.lambda0_nm)
    }

    pub fn k0(&self) -> f64 {
        self.omega0() / SI.c
    }

    fn require_outside(&self, fiber: &FiberSpec) -> Result<()> {
        if self.r_nm < fiber.radius_nm {
            return Err(Error::invalid("atom.r_nm", "atom must sit outside the fiber core"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub gamma_gyd: f64,
    pub gamma_rad: f64,
    pub gamma_total_free: f64,
}

impl RateReport {
    pub fn new(gamma_gyd: f64, gamma_rad: f64) -> Self {
        Self {
            gamma_gyd,
            gamma_rad,
            gamma_total_free: gamma_gyd + gamma_rad,
        }
    }

    /// Rates in s^-1 given the free-space rate in the same unit.
    pub fn scaled(&self, gamma0: f64) -> Self {
        Self::new(self.gamma_gyd * gamma0, self.gamma_rad * gamma0)
    }
}

/// `|e_{-q}|² + |e_q|²` of a profile.
fn dipole_weight(e: &crate::EVec, q: i32) -> f64 {
    e.spherical(-q).norm_sqr() + e.spherical(q).norm_sqr()
}

/// Emission rate into the guided mode (both directions and polarizations).
pub fn gamma_guided(fiber: &FiberSpec, mode: &GuidedModeSolution, atom: &AtomSpec) -> Result<f64> {
    atom.validate()?;
    atom.require_outside(fiber)?;
    let e = guided_profile(mode, fiber, Sign::Plus, Sign::Plus, atom.r_nm)?;
    let w0 = mode.omega;
    Ok(3.0 * PI * SI.c.powi(3) / (w0 * w0 * mode.v_g) * dipole_weight(&e, atom.q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadOptions {
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Relative tolerance of panel doubling.
    pub rel_tol: f64,
    /// Absolute tolerance per shell, in units of `γ0`.
    pub abs_tol: f64,
    pub min_panels: usize,
    /// A shell is quiet when it adds less than this fraction of the total.
    pub shell_tol: f64,
    /// Consecutive quiet shells needed to stop.
    pub quiet_shells: usize,
    pub max_order: u32,
    pub parallel: bool,
}

impl Default for RadOptions {
    fn default() -> Self {
        Self {
            nodes: 64,
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            min_panels: 2,
            shell_tol: 1e-8,
            quiet_shells: 2,
            max_order: MAX_ORDER,
            parallel: true,
        }
    }
}

/// Per-shell contributions of the radiation rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadBreakdown {
    pub gamma_rad: f64,
    /// Contribution of `|m| = 0, 1, 2, ...`.
    pub shells: Vec<f64>,
    /// Largest panel count any shell needed.
    pub max_panels: usize,
}

/// Angular spectrum `Σ_{l} |e_q|²` of order `m` at `beta`, times the rate prefactor.
fn order_density(
    fiber: &FiberSpec,
    atom: &AtomSpec,
    omega: f64,
    beta: f64,
    m: i32,
    consts: &Constants,
) -> Result<f64> {
    let k = omega / consts.c;
    let q = (fiber.n2 * fiber.n2 * k * k - beta * beta).max(0.0).sqrt();
    let negligible = (m.unsigned_abs() as f64) > 2.0 * q * atom.r_nm * 1e-9 + 20.0;
    let mut sum = 0.0;
    for l in Sign::BOTH {
        let e = rad_coeffs_with(fiber, omega, beta, m, l, consts)
            .and_then(|c| radiation_profile_with(fiber, &c, atom.r_nm, consts));
        match e {
            Ok(e) => sum += e.spherical(atom.q).norm_sqr(),
            // Y_m overflows only for orders far beyond q r, where the mode
            // does not reach the atom.
            Err(Error::Degenerate { .. }) if negligible => {}
            Err(e) => return Err(e),
        }
    }
    Ok(3.0 * PI * consts.c.powi(3) / (2.0 * omega * omega) * sum)
}

/// Spectral density of the radiation rate at `beta`, summed over both signs
/// of `m` for shell `|m|` and over `l`.
pub fn shell_density(fiber: &FiberSpec, atom: &AtomSpec, beta: f64, shell: u32) -> Result<f64> {
    let omega = atom.omega0();
    let m = shell as i32;
    let mut v = order_density(fiber, atom, omega, beta, m, &SI)?;
    if m != 0 {
        v += order_density(fiber, atom, omega, beta, -m, &SI)?;
    }
    Ok(v)
}

/// Integral of one `|m|` shell over the radiation band.
fn shell_integral(fiber: &FiberSpec, atom: &AtomSpec, shell: u32, opts: &RadOptions) -> Result<(f64, usize)> {
    let k = atom.k0();
    let quad = AdaptiveGauss::new(opts.nodes, opts.rel_tol)
        .with_min_panels(opts.min_panels)
        .with_abs_tol(opts.abs_tol);
    // beta = k sin(theta) removes the inverse-square-root edge behaviour;
    // the integrand is even in beta, so only half the band is integrated.
    let theta_max = FRAC_PI_2 * (1.0 - 1e-9);
    let r = quad.try_integrate(0.0, theta_max, |t| {
        let beta = k * t.sin();
        Ok(k * t.cos() * shell_density(fiber, atom, beta, shell)?)
    })?;
    Ok((2.0 * r.value, r.panels))
}

pub fn gamma_rad_detailed(fiber: &FiberSpec, atom: &AtomSpec, opts: &RadOptions) -> Result<RadBreakdown> {
    fiber.validate()?;
    atom.validate()?;
    atom.require_outside(fiber)?;
    let batch = if opts.parallel {
        rayon::current_num_threads().clamp(1, 16)
    } else {
        1
    };
    let mut shells = Vec::new();
    let mut total = 0.0;
    let mut quiet = 0;
    let mut max_panels = 0;
    let mut next: u32 = 0;
    while next <= opts.max_order {
        let end = (next + batch as u32).min(opts.max_order + 1);
        let orders: Vec<u32> = (next..end).collect();
        let results: Vec<Result<(f64, usize)>> = if opts.parallel {
            orders.par_iter().map(|&s| shell_integral(fiber, atom, s, opts)).collect()
        } else {
            orders.iter().map(|&s| shell_integral(fiber, atom, s, opts)).collect()
        };
        for res in results {
            let (v, panels) = res?;
            shells.push(v);
            total += v;
            max_panels = max_panels.max(panels);
            if v.abs() < opts.shell_tol * total.abs() {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= opts.quiet_shells {
                return Ok(RadBreakdown {
                    gamma_rad: total,
                    shells,
                    max_panels,
                });
            }
        }
        next = end;
    }
    Err(Error::NonConvergence {
        what: "radiation-mode order sum",
        iterations: opts.max_order as usize + 1,
    })
}

/// Emission rate into radiation modes.
pub fn gamma_rad(fiber: &FiberSpec, atom: &AtomSpec, opts: &RadOptions) -> Result<f64> {
    Ok(gamma_rad_detailed(fiber, atom, opts)?.gamma_rad)
}

pub fn rate_report(
    fiber: &FiberSpec,
    mode: &GuidedModeSolution,
    atom: &AtomSpec,
    opts: &RadOptions,
) -> Result<RateReport> {
    Ok(RateReport::new(
        gamma_guided(fiber, mode, atom)?,
        gamma_rad(fiber, atom, opts)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonradRatio {
    pub ratio: f64,
    /// Set when the atom touches the surface and the estimate diverges.
    pub at_surface: bool,
}

/// Near-field estimate `γ_nonrad/γ0 = ε_I / (2 |ε + 1|² k0³ d³)` at distance
/// `d = r - a` from a dielectric surface.
pub fn gamma_nonrad_ratio(fiber: &FiberSpec, atom: &AtomSpec, eps_real: f64, eps_imag: f64) -> Result<NonradRatio> {
    atom.validate()?;
    if eps_imag < 0.0 {
        return Err(Error::invalid("eps_imag", "must be non-negative"));
    }
    let d = (atom.r_nm - fiber.radius_nm) * 1e-9;
    if d < 0.0 {
        return Err(Error::invalid("atom.r_nm", "atom must sit outside the fiber core"));
    }
    if eps_imag == 0.0 {
        return Ok(NonradRatio {
            ratio: 0.0,
            at_surface: d == 0.0,
        });
    }
    if d == 0.0 {
        return Ok(NonradRatio {
            ratio: f64::INFINITY,
            at_surface: true,
        });
    }
    let eps1 = Complex::new(eps_real + 1.0, eps_imag);
    let k0 = atom.k0();
    Ok(NonradRatio {
        ratio: eps_imag / (2.0 * eps1.norm_sqr() * (k0 * d).powi(3)),
        at_surface: false,
    })
}

/// Surface distance (m) at which the nonradiative estimate equals `ratio`.
pub fn nonrad_distance(lambda0_nm: f64, eps_real: f64, eps_imag: f64, ratio: f64) -> f64 {
    let k0 = SI.omega_from_wavelength_nm(lambda0_nm) / SI.c;
    let eps1 = Complex::new(eps_real + 1.0, eps_imag);
    (eps_imag / (2.0 * eps1.norm_sqr() * ratio)).cbrt() / k0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber_modes::solve_fundamental;

    fn setup() -> (FiberSpec, GuidedModeSolution) {
        let f = FiberSpec::default();
        let m = solve_fundamental(&f, 852.0).unwrap();
        (f, m)
    }

    #[test]
    fn guided_rate_on_surface() {
        let (f, m) = setup();
        let g = gamma_guided(&f, &m, &AtomSpec::default()).unwrap();
        assert!((g - 0.48).abs() < 0.01, "{g}");
    }

    #[test]
    fn guided_rate_independent_of_sign_and_azimuth() {
        let (f, m) = setup();
        let p = gamma_guided(&f, &m, &AtomSpec { q: 1, ..Default::default() }).unwrap();
        let n = gamma_guided(&f, &m, &AtomSpec { q: -1, phi: 1.3, ..Default::default() }).unwrap();
        assert!((p - n).abs() <= 1e-12 * p);
    }

    #[test]
    fn axial_dipole_couples_less() {
        let (f, m) = setup();
        let g1 = gamma_guided(&f, &m, &AtomSpec::default()).unwrap();
        let g0 = gamma_guided(&f, &m, &AtomSpec { q: 0, ..Default::default() }).unwrap();
        assert!(g0 / g1 < 1.0);
    }

    #[test]
    fn guided_rate_decreases_away_from_surface() {
        let (f, m) = setup();
        let rates: Vec<f64> = (0..20)
            .map(|i| {
                let atom = AtomSpec { r_nm: 200.0 + 40.0 * i as f64, ..Default::default() };
                gamma_guided(&f, &m, &atom).unwrap()
            })
            .collect();
        assert!(rates.windows(2).all(|w| w[1] < w[0]));
        let far = AtomSpec { r_nm: 200.0 + 10.0 * 852.0, ..Default::default() };
        assert!(gamma_guided(&f, &m, &far).unwrap() < 0.01);
    }

    #[test]
    fn radiation_integrand_even_in_beta() {
        let f = FiberSpec::default();
        let atom = AtomSpec::default();
        let k = atom.k0();
        for shell in [0, 1, 3] {
            for bk in [0.1, 0.45, 0.9] {
                let p = shell_density(&f, &atom, bk * k, shell).unwrap();
                let n = shell_density(&f, &atom, -bk * k, shell).unwrap();
                assert!((p - n).abs() <= 1e-9 * p.abs(), "shell={shell} b={bk}");
            }
        }
    }

    #[test]
    fn radiation_rate_on_surface() {
        let f = FiberSpec::default();
        let r = gamma_rad_detailed(&f, &AtomSpec::default(), &RadOptions::default()).unwrap();
        assert!((r.gamma_rad - 1.25).abs() < 0.01, "{}", r.gamma_rad);
        let n = r.shells.len();
        assert!(r.shells[n - 1] < 1e-8 * r.gamma_rad && r.shells[n - 2] < 1e-8 * r.gamma_rad);
    }

    #[test]
    fn radiation_rate_refinement_stable() {
        let f = FiberSpec::default();
        let atom = AtomSpec::default();
        let coarse = gamma_rad(&f, &atom, &RadOptions::default()).unwrap();
        let fine = gamma_rad(&f, &atom, &RadOptions { min_panels: 8, ..Default::default() }).unwrap();
        assert!(((coarse - fine) / fine).abs() < 1e-6);
    }

    #[test]
    fn serial_and_parallel_sums_identical() {
        let f = FiberSpec::default();
        let atom = AtomSpec { r_nm: 300.0, q: 0, ..Default::default() };
        let a = gamma_rad(&f, &atom, &RadOptions::default()).unwrap();
        let b = gamma_rad(&f, &atom, &RadOptions { parallel: false, ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vanishing_fiber_gives_free_space() {
        let f = FiberSpec::new(1.0, 1.45, 1.0).unwrap();
        let atom = AtomSpec { r_nm: 100.0, ..Default::default() };
        let g = gamma_rad(&f, &atom, &RadOptions::default()).unwrap();
        assert!((g - 1.0).abs() < 0.01, "{g}");
    }

    #[test]
    fn rejects_atom_inside_core() {
        let (f, m) = setup();
        let atom = AtomSpec { r_nm: 150.0, ..Default::default() };
        assert!(gamma_guided(&f, &m, &atom).is_err());
        assert!(gamma_rad(&f, &atom, &RadOptions::default()).is_err());
    }

    #[test]
    fn nonradiative_estimate() {
        let f = FiberSpec::default();
        let eps_r = 1.45f64.powi(2);
        let d = nonrad_distance(852.0, eps_r, 1e-10, 1.0);
        assert!((d * 1e10 - 0.2).abs() < 0.05, "{} A", d * 1e10);
        let at = |d_nm: f64| {
            let atom = AtomSpec { r_nm: 200.0 + d_nm, ..Default::default() };
            gamma_nonrad_ratio(&f, &atom, eps_r, 1e-10).unwrap()
        };
        let r1 = at(0.01).ratio;
        let r2 = at(0.02).ratio;
        assert!((r1 / r2 - 8.0).abs() < 1e-9);
        assert!((at(d * 1e9).ratio - 1.0).abs() < 1e-9);
        let lossless = gamma_nonrad_ratio(&f, &AtomSpec { r_nm: 201.0, ..Default::default() }, eps_r, 0.0).unwrap();
        assert_eq!(lossless.ratio, 0.0);
        let surf = gamma_nonrad_ratio(&f, &AtomSpec::default(), eps_r, 1e-10).unwrap();
        assert!(surf.at_surface && surf.ratio.is_infinite());
    }

    #[test]
    fn report_sums_exactly() {
        let r = RateReport::new(0.4717, 1.2475);
        assert_eq!(r.gamma_total_free, r.gamma_gyd + r.gamma_rad);
        let s = r.scaled(2.0);
        assert_eq!(s.gamma_total_free, s.gamma_gyd + s.gamma_rad);
    }
}
