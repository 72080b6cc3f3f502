//! Fundamental (HE11) guided mode of a step-index nanofiber.
//!
//! The fiber is a silica core of radius `a` and index `n1` in an infinite
//! clad of index `n2`. Geometry is specified in nanometres; all internal
//! quantities (`k`, `beta`, `h`, `q`) are SI.

use serde::Serialize;

use crate::quadrature::AdaptiveGauss;
use crate::specfun::{bessel_ik, bessel_jy};
use crate::{Complex, Constants, Error, Result, SI};

/// Number of scan points used to bracket the eigenvalue.
const SCAN_POINTS: usize = 512;
/// Relative frequency step of the centered group-velocity difference.
pub const VG_STEP: f64 = 1e-6;
/// Radial cutoff beyond the surface, in units of the decay length `1/q`.
pub const TAIL_DECAY_LENGTHS: f64 = 12.0;
const QUAD_NODES: usize = 32;
const QUAD_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberSpec {
    pub radius_nm: f64,
    pub n1: f64,
    pub n2: f64,
}

impl Default for FiberSpec {
    /// 200 nm silica nanofiber in vacuum.
    fn default() -> Self {
        Self {
            radius_nm: 200.0,
            n1: 1.45,
            n2: 1.0,
        }
    }
}

impl FiberSpec {
    pub fn new(radius_nm: f64, n1: f64, n2: f64) -> Result<Self> {
        let f = Self { radius_nm, n1, n2 };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_nm.is_finite() && self.radius_nm > 0.0) {
            return Err(Error::invalid("fiber.radius_nm", "must be positive"));
        }
        if !(self.n2.is_finite() && self.n2 >= 1.0) {
            return Err(Error::invalid("fiber.n2", "must be >= 1"));
        }
        if !(self.n1.is_finite() && self.n1 > self.n2) {
            return Err(Error::invalid("fiber.n1", "must exceed fiber.n2"));
        }
        Ok(())
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_nm * 1e-9
    }

    /// Refractive index at radius `r` (metres); the surface belongs to the clad.
    pub fn index_at(&self, r_m: f64) -> f64 {
        if r_m < self.radius_m() {
            self.n1
        } else {
            self.n2
        }
    }
}

/// Propagation direction `f` or polarization rotation `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// Cylindrical components of a mode profile function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EVec {
    pub r: Complex,
    pub phi: Complex,
    pub z: Complex,
}

impl EVec {
    pub fn norm_sqr(&self) -> f64 {
        self.r.norm_sqr() + self.phi.norm_sqr() + self.z.norm_sqr()
    }

    /// Spherical component `e_q`, with `e_0 = e_z` and
    /// `e_{±1} = ∓(e_x ± i e_y)/√2` taken at azimuth zero, where
    /// `(e_x, e_y) = (e_r, e_phi)`.
    pub fn spherical(&self, q: i32) -> Complex {
        let i = Complex::i();
        match q {
            0 => self.z,
            1 => -(self.r + i * self.phi) * std::f64::consts::FRAC_1_SQRT_2,
            -1 => (self.r - i * self.phi) * std::f64::consts::FRAC_1_SQRT_2,
            _ => panic!("spherical index must be -1, 0 or 1, got {q}"),
        }
    }
}

/// Everything the HE11 eigenvalue problem yields at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuidedModeSolution {
    pub lambda_nm: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Vacuum wave number, rad/m.
    pub k: f64,
    /// Propagation constant, rad/m.
    pub beta: f64,
    /// Transverse wave number inside the core, rad/m.
    pub h: f64,
    /// Decay constant outside the core, rad/m.
    pub q_out: f64,
    pub s: f64,
    /// Normalization amplitude, 1/m.
    pub norm_c: f64,
    /// Group velocity, m/s.
    pub v_g: f64,
}

impl GuidedModeSolution {
    pub fn effective_index(&self) -> f64 {
        self.beta / self.k
    }
}

/// Dimensionless residual `LHS - RHS` of the HE11 eigenvalue equation.
pub fn eigen_residual(fiber: &FiberSpec, k: f64, beta: f64) -> Result<f64> {
    let (n1, n2) = (fiber.n1, fiber.n2);
    let a = fiber.radius_m();
    let h = (n1 * n1 * k * k - beta * beta).sqrt();
    let q = (beta * beta - n2 * n2 * k * k).sqrt();
    let (ha, qa) = (h * a, q * a);
    let j0 = bessel_jy(0, ha)?.j;
    let j1 = bessel_jy(1, ha)?.j;
    let kk = bessel_ik(1, qa)?;
    let kratio = kk.kp / (qa * kk.k);
    let n1sq = n1 * n1;
    let lhs = j0 / (ha * j1);
    let inv = 1.0 / (qa * qa) + 1.0 / (ha * ha);
    let t1 = (n1sq - n2 * n2) / (2.0 * n1sq) * kratio;
    let t2 = beta * beta / (n1sq * k * k) * inv * inv;
    let rhs = -(n1sq + n2 * n2) / (2.0 * n1sq) * kratio + 1.0 / (ha * ha) - (t1 * t1 + t2).sqrt();
    Ok(lhs - rhs)
}

/// One bisection step record: bracket and residuals at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionStep {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Propagation constant at vacuum wave number `k`, with the bisection history.
pub fn solve_beta_traced(fiber: &FiberSpec, k: f64) -> Result<(f64, Vec<BisectionStep>)> {
    fiber.validate()?;
    let lo = fiber.n2 * k * (1.0 + 1e-9);
    let hi = fiber.n1 * k * (1.0 - 1e-9);
    let f = |b: f64| eigen_residual(fiber, k, b);

    let xs: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let fs: Vec<Option<f64>> = xs
        .iter()
        .map(|&x| f(x).ok().filter(|v| v.is_finite()))
        .collect();

    // The fundamental mode is the root with the largest beta; scan downward.
    for i in (0..SCAN_POINTS - 1).rev() {
        let (Some(fa), Some(fb)) = (fs[i], fs[i + 1]) else {
            continue;
        };
        if fa == 0.0 {
            return Ok((xs[i], Vec::new()));
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        let (beta, trace) = bisect(&f, xs[i], xs[i + 1], fa, fb)?;
        // A sign change through a pole leaves a large residual.
        if f(beta)?.abs() < 1e-6 {
            return Ok((beta, trace));
        }
    }
    Err(Error::NoRoot)
}

fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64, mut f_hi: f64) -> Result<(f64, Vec<BisectionStep>)>
where
    F: Fn(f64) -> Result<f64>,
{
    const MAX_ITER: usize = 200;
    let mut trace = vec![BisectionStep { lo, hi, f_lo, f_hi }];
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let beta = if f_lo.abs() <= f_hi.abs() { lo } else { hi };
            return Ok((beta, trace));
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            trace.push(BisectionStep { lo: mid, hi: mid, f_lo: 0.0, f_hi: 0.0 });
            return Ok((mid, trace));
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
        trace.push(BisectionStep { lo, hi, f_lo, f_hi });
    }
    Err(Error::NonConvergence {
        what: "eigenvalue bisection",
        iterations: MAX_ITER,
    })
}

pub fn solve_beta(fiber: &FiberSpec, k: f64) -> Result<f64> {
    Ok(solve_beta_traced(fiber, k)?.0)
}

/// Group velocity by a centered frequency difference with relative step `delta`.
pub fn group_velocity_with_step(fiber: &FiberSpec, lambda_nm: f64, delta: f64) -> Result<f64> {
    let omega = SI.omega_from_wavelength_nm(lambda_nm);
    let k = omega / SI.c;
    let bp = solve_beta(fiber, k * (1.0 + delta))?;
    let bm = solve_beta(fiber, k * (1.0 - delta))?;
    Ok(2.0 * delta * omega / (bp - bm))
}

pub fn group_velocity(fiber: &FiberSpec, lambda_nm: f64) -> Result<f64> {
    group_velocity_with_step(fiber, lambda_nm, VG_STEP)
}

pub fn solve_fundamental(fiber: &FiberSpec, lambda_nm: f64) -> Result<GuidedModeSolution> {
    solve_fundamental_with(fiber, lambda_nm, &SI)
}

pub fn solve_fundamental_with(
    fiber: &FiberSpec,
    lambda_nm: f64,
    consts: &Constants,
) -> Result<GuidedModeSolution> {
    fiber.validate()?;
    if !(lambda_nm.is_finite() && lambda_nm > 0.0) {
        return Err(Error::invalid("lambda_nm", "must be positive"));
    }
    let omega = consts.omega_from_wavelength_nm(lambda_nm);
    let k = omega / consts.c;
    let beta = solve_beta(fiber, k)?;
    let (n1, n2) = (fiber.n1, fiber.n2);
    let a = fiber.radius_m();
    let h = (n1 * n1 * k * k - beta * beta).sqrt();
    let q = (beta * beta - n2 * n2 * k * k).sqrt();
    let (ha, qa) = (h * a, q * a);
    let j1 = bessel_jy(1, ha)?;
    let k1 = bessel_ik(1, qa)?;
    let s = (1.0 / (qa * qa) + 1.0 / (ha * ha)) / (j1.jp / (ha * j1.j) + k1.kp / (qa * k1.k));

    let mut mode = GuidedModeSolution {
        lambda_nm,
        omega,
        k,
        beta,
        h,
        q_out: q,
        s,
        norm_c: 1.0,
        v_g: f64::NAN,
    };
    let power = weighted_power(&mode, fiber, tail_cutoff(&mode, fiber))?;
    mode.norm_c = 1.0 / power.sqrt();
    mode.v_g = group_velocity(fiber, lambda_nm)?;
    Ok(mode)
}

/// Unnormalized magnitudes `(X_r, X_phi, X_z)` with
/// `e_r = i C X_r`, `e_phi = -l C X_phi`, `e_z = f C X_z`.
fn unit_profile(mode: &GuidedModeSolution, fiber: &FiberSpec, r_m: f64) -> Result<[f64; 3]> {
    let a = fiber.radius_m();
    let (h, q, beta, s) = (mode.h, mode.q_out, mode.beta, mode.s);
    if r_m < a {
        let j1a = bessel_jy(1, h * a)?.j;
        let k1a = bessel_ik(1, q * a)?.k;
        let pref = q * k1a / (h * j1a);
        if r_m == 0.0 {
            // J0(0) = 1, J1(0) = J2(0) = 0
            return Ok([pref * (1.0 - s), pref * (1.0 - s), 0.0]);
        }
        let hr = h * r_m;
        let j0 = bessel_jy(0, hr)?.j;
        let j1 = bessel_jy(1, hr)?.j;
        let j2 = bessel_jy(2, hr)?.j;
        Ok([
            pref * ((1.0 - s) * j0 - (1.0 + s) * j2),
            pref * ((1.0 - s) * j0 + (1.0 + s) * j2),
            2.0 * q * k1a / (beta * j1a) * j1,
        ])
    } else {
        let qr = q * r_m;
        let k0 = bessel_ik(0, qr)?.k;
        let k1 = bessel_ik(1, qr)?.k;
        let k2 = bessel_ik(2, qr)?.k;
        Ok([
            (1.0 - s) * k0 + (1.0 + s) * k2,
            (1.0 - s) * k0 - (1.0 + s) * k2,
            2.0 * q / beta * k1,
        ])
    }
}

/// Normalized profile `e^{(f,l)}` at radius `r_nm`; the surface `r = a`
/// evaluates on the clad side.
pub fn guided_profile(
    mode: &GuidedModeSolution,
    fiber: &FiberSpec,
    f: Sign,
    l: Sign,
    r_nm: f64,
) -> Result<EVec> {
    if !(r_nm.is_finite() && r_nm >= 0.0) {
        return Err(Error::invalid("r_nm", "must be non-negative"));
    }
    if !mode.norm_c.is_finite() {
        return Err(Error::invalid("mode", "normalization has not been computed"));
    }
    let [xr, xp, xz] = unit_profile(mode, fiber, r_nm * 1e-9)?;
    let c = mode.norm_c;
    Ok(EVec {
        r: Complex::new(0.0, c * xr),
        phi: Complex::new(-l.value() * c * xp, 0.0),
        z: Complex::new(f.value() * c * xz, 0.0),
    })
}

fn tail_cutoff(mode: &GuidedModeSolution, fiber: &FiberSpec) -> f64 {
    fiber.radius_m() + TAIL_DECAY_LENGTHS / mode.q_out
}

/// `∫ w(r) g(|e|²) 2πr dr` split at the core surface.
fn radial_integral<G>(mode: &GuidedModeSolution, fiber: &FiberSpec, r_max: f64, g: G) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    let a = fiber.radius_m();
    let quad = AdaptiveGauss::new(QUAD_NODES, QUAD_REL_TOL);
    let c2 = mode.norm_c * mode.norm_c;
    let integrand = |r: f64| -> Result<f64> {
        let [xr, xp, xz] = unit_profile(mode, fiber, r)?;
        let e2 = c2 * (xr * xr + xp * xp + xz * xz);
        Ok(2.0 * std::f64::consts::PI * r * g(fiber.index_at(r), e2))
    };
    let inner = quad.try_integrate(0.0, a, integrand)?.value;
    let outer = if r_max > a {
        quad.try_integrate(a, r_max, integrand)?.value
    } else {
        0.0
    };
    Ok(inner + outer)
}

fn weighted_power(mode: &GuidedModeSolution, fiber: &FiberSpec, r_max: f64) -> Result<f64> {
    radial_integral(mode, fiber, r_max, |n, e2| n * n * e2)
}

/// `∫ n² |e|² dA` up to `r_max_nm`; equals one for a normalized mode.
pub fn normalization_integral(mode: &GuidedModeSolution, fiber: &FiberSpec, r_max_nm: f64) -> Result<f64> {
    weighted_power(mode, fiber, r_max_nm * 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveArea {
    pub area_um2: f64,
    pub r_eff_nm: f64,
}

pub fn effective_area(mode: &GuidedModeSolution, fiber: &FiberSpec) -> Result<EffectiveArea> {
    effective_area_with_cutoff(mode, fiber, tail_cutoff(mode, fiber) * 1e9)
}

/// `A_eff = (∫|e|² dA)² / ∫|e|⁴ dA` with the radial integral cut at `r_max_nm`.
pub fn effective_area_with_cutoff(
    mode: &GuidedModeSolution,
    fiber: &FiberSpec,
    r_max_nm: f64,
) -> Result<EffectiveArea> {
    let r_max = r_max_nm * 1e-9;
    let i2 = radial_integral(mode, fiber, r_max, |_, e2| e2)?;
    let i4 = radial_integral(mode, fiber, r_max, |_, e2| e2 * e2)?;

    // Remaining tail of ∫|e|² beyond r_max, asymptotically f(r_max)/(2q).
    let [xr, xp, xz] = unit_profile(mode, fiber, r_max)?;
    let e2 = mode.norm_c * mode.norm_c * (xr * xr + xp * xp + xz * xz);
    let tail = 2.0 * std::f64::consts::PI * r_max * e2 / (2.0 * mode.q_out);
    if tail > 1e-6 * i2 {
        return Err(Error::Quadrature(format!(
            "evanescent tail not converged at r = {r_max_nm} nm (remaining fraction {:.2e})",
            tail / i2
        )));
    }
    let area = i2 * i2 / i4;
    Ok(EffectiveArea {
        area_um2: area * 1e12,
        r_eff_nm: (area / std::f64::consts::PI).sqrt() * 1e9,
    })
}
