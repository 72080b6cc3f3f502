//! Radiation modes of the nanofiber, labelled by `(omega, beta, m, l)`.
//!
//! Outside the core the field is a combination of outgoing and incoming
//! Hankel waves, `C1 H1 + C2 H2`. For large `m` that sum cancels
//! catastrophically, so the outside field is evaluated in the equivalent
//! standing-wave form `cJ J_m(qr) + cY Y_m(qr)`. The boundary-matching
//! auxiliaries are split the same way (`V = V_J -/+ i V_Y`, etc.) and are
//! divided by a common scale `s = |J_m(ha), J'_m(ha)| * |J_m(qa), Y_m(qa)|`
//! so that high orders do not overflow. Every normalized field quantity is
//! invariant under that scale.

use serde::Serialize;
use std::f64::consts::PI;

use crate::fiber_modes::{EVec, FiberSpec, Sign};
use crate::specfun::{bessel_jy, BesselJY};
use crate::{Complex, Constants, Error, Result, SI};

/// Smallest admissible `q a`.
pub const BAND_EDGE_QA: f64 = 1e-6;
/// Tolerance on the agreement of the two normalization expressions.
pub const NORM_CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadModeCoeffs {
    pub omega: f64,
    pub beta: f64,
    pub m: i32,
    pub l: Sign,
    /// Transverse wave numbers inside and outside the core, rad/m.
    pub h: f64,
    pub q: f64,
    /// Core amplitudes; `B = ±i eta A`.
    pub a: Complex,
    pub b: Complex,
    /// Hankel-form outside coefficients.
    pub c1: Complex,
    pub c2: Complex,
    pub d1: Complex,
    pub d2: Complex,
    /// Standing-wave outside coefficients: `e_z = cJ J + cY Y`, and the
    /// magnetic potential `dJ J + dY Y`.
    pub c_j: Complex,
    pub c_y: Complex,
    pub d_j: Complex,
    pub d_y: Complex,
    pub eta: f64,
    /// Normalization recomputed from `C1, D1` (one after normalization).
    pub norm: f64,
    /// Normalization recomputed from `C2, D2`.
    pub norm_alt: f64,
    /// Boundary auxiliaries divided by `scale`.
    pub v1: Complex,
    pub v2: Complex,
    pub m1: Complex,
    pub m2: Complex,
    pub l1c: Complex,
    pub l2c: Complex,
    pub scale: f64,
}

/// `J_m, Y_m` and derivatives for signed order.
pub(crate) fn jy_signed(m: i32, x: f64) -> Result<BesselJY> {
    let v = bessel_jy(m.unsigned_abs(), x)?;
    if m < 0 && m % 2 != 0 {
        Ok(BesselJY {
            j: -v.j,
            y: -v.y,
            jp: -v.jp,
            yp: -v.yp,
        })
    } else {
        Ok(v)
    }
}

pub fn rad_coeffs(fiber: &FiberSpec, omega: f64, beta: f64, m: i32, l: Sign) -> Result<RadModeCoeffs> {
    rad_coeffs_with(fiber, omega, beta, m, l, &SI)
}

pub fn rad_coeffs_with(
    fiber: &FiberSpec,
    omega: f64,
    beta: f64,
    m: i32,
    l: Sign,
    consts: &Constants,
) -> Result<RadModeCoeffs> {
    fiber.validate()?;
    let (n1, n2) = (fiber.n1, fiber.n2);
    let (n1sq, n2sq) = (n1 * n1, n2 * n2);
    let k = omega / consts.c;
    if !(beta.abs() < n2 * k) {
        return Err(Error::Band { ratio: beta.abs() / k });
    }
    let a = fiber.radius_m();
    let h = (n1sq * k * k - beta * beta).sqrt();
    let q = (n2sq * k * k - beta * beta).sqrt();
    let (ha, qa) = (h * a, q * a);
    if qa <= BAND_EDGE_QA {
        return Err(Error::Degenerate {
            m,
            qa,
            reason: "too close to the band edge",
        });
    }

    let inner = jy_signed(m, ha)?;
    let outer = jy_signed(m, qa)?;
    if !(outer.y.is_finite() && outer.yp.is_finite()) {
        return Err(Error::Degenerate {
            m,
            qa,
            reason: "Y_m overflows",
        });
    }
    let s_in = inner.j.hypot(inner.jp);
    let s_out = outer.j.hypot(outer.y);
    let (jh, jph) = (inner.j / s_in, inner.jp / s_in);

    let mf = m as f64;
    let parts = |z: f64, zp: f64| {
        let (z, zp) = (z / s_out, zp / s_out);
        let v = mf * k * beta / (a * h * h * q * q) * (n2sq - n1sq) * jh * z;
        let mm = jph * z / h - jh * zp / q;
        let ll = n1sq * jph * z / h - n2sq * jh * zp / q;
        (v, mm, ll)
    };
    let (vj, mj, lj) = parts(outer.j, outer.jp);
    let (vy, my, ly) = parts(outer.y, outer.yp);

    let v_abs = vj.hypot(vy);
    let m_abs = mj.hypot(my);
    let l_abs = lj.hypot(ly);
    let eta = consts.eps0 * consts.c * (n2 * v_abs).hypot(l_abs) / v_abs.hypot(n2 * m_abs);

    let i = Complex::i();
    let p = i * PI * q * q * a / (4.0 * n2sq);
    let pp = i * PI * q * q * a / 4.0;
    let z0 = consts.mu0 * consts.c;

    let build = |amp: Complex| {
        let bb = i * l.value() * eta * amp;
        let xj = amp * lj + i * z0 * bb * vj;
        let xy = amp * ly + i * z0 * bb * vy;
        let wj = i * consts.eps0 * consts.c * amp * vj - bb * mj;
        let wy = i * consts.eps0 * consts.c * amp * vy - bb * my;
        (bb, xj, xy, wj, wy)
    };
    let norm_of = |c: Complex, d: Complex| {
        8.0 * PI * omega / (q * q) * (n2sq * c.norm_sqr() + consts.mu0 / consts.eps0 * d.norm_sqr())
    };

    // Fix A from N = 1 with a unit trial amplitude, then rebuild.
    let (_, xj, xy, wj, wy) = build(Complex::new(1.0, 0.0));
    let c1_unit = -p * (xj - i * xy);
    let d1_unit = pp * (wj - i * wy);
    let n_unit = norm_of(c1_unit, d1_unit);
    if !(n_unit.is_finite() && n_unit > 0.0) {
        return Err(Error::Degenerate {
            m,
            qa,
            reason: "normalization is not a finite positive number",
        });
    }
    let amp = Complex::new(1.0 / n_unit.sqrt(), 0.0);
    let (bb, xj, xy, wj, wy) = build(amp);
    let c1 = -p * (xj - i * xy);
    let c2 = p * (xj + i * xy);
    let d1 = pp * (wj - i * wy);
    let d2 = -pp * (wj + i * wy);
    let norm = norm_of(c1, d1);
    let norm_alt = norm_of(c2, d2);
    if (norm - norm_alt).abs() > NORM_CONSISTENCY_TOL * norm {
        return Err(Error::Consistency(format!(
            "radiation-mode normalization differs between Hankel kinds: {norm} vs {norm_alt} (m = {m}, beta = {beta})"
        )));
    }

    let scale = s_in * s_out;
    Ok(RadModeCoeffs {
        omega,
        beta,
        m,
        l,
        h,
        q,
        a: amp / scale,
        b: bb / scale,
        c1,
        c2,
        d1,
        d2,
        c_j: 2.0 * i * p * xy,
        c_y: -2.0 * i * p * xj,
        d_j: -2.0 * i * pp * wy,
        d_y: 2.0 * i * pp * wj,
        eta,
        norm,
        norm_alt,
        v1: Complex::new(vj, -vy),
        v2: Complex::new(vj, vy),
        m1: Complex::new(mj, -my),
        m2: Complex::new(mj, my),
        l1c: Complex::new(lj, -ly),
        l2c: Complex::new(lj, ly),
        scale,
    })
}

/// Profile function of the mode at radius `r_nm` and azimuth zero.
pub fn radiation_profile(fiber: &FiberSpec, coeffs: &RadModeCoeffs, r_nm: f64) -> Result<EVec> {
    radiation_profile_with(fiber, coeffs, r_nm, &SI)
}

pub fn radiation_profile_with(
    fiber: &FiberSpec,
    c: &RadModeCoeffs,
    r_nm: f64,
    consts: &Constants,
) -> Result<EVec> {
    if !(r_nm.is_finite() && r_nm > 0.0) {
        return Err(Error::invalid("r_nm", "must be positive"));
    }
    let r = r_nm * 1e-9;
    let i = Complex::i();
    let (beta, m) = (c.beta, c.m as f64);
    let wmu = c.omega * consts.mu0;
    if r < fiber.radius_m() {
        let v = jy_signed(c.m, c.h * r)?;
        let h = c.h;
        Ok(EVec {
            r: i / (h * h) * (beta * h * c.a * v.jp + i * m * wmu / r * c.b * v.j),
            phi: i / (h * h) * (i * m * beta / r * c.a * v.j - h * wmu * c.b * v.jp),
            z: c.a * v.j,
        })
    } else {
        let v = jy_signed(c.m, c.q * r)?;
        if !(v.y.is_finite() && v.yp.is_finite()) {
            return Err(Error::Degenerate {
                m: c.m,
                qa: c.q * fiber.radius_m(),
                reason: "Y_m overflows at the observation radius",
            });
        }
        let q = c.q;
        let z = c.c_j * v.j + c.c_y * v.y;
        let zp = c.c_j * v.jp + c.c_y * v.yp;
        let w = c.d_j * v.j + c.d_y * v.y;
        let wp = c.d_j * v.jp + c.d_y * v.yp;
        Ok(EVec {
            r: i / (q * q) * (beta * q * zp + i * m * wmu / r * w),
            phi: i / (q * q) * (i * m * beta / r * z - q * wmu * wp),
            z,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup() -> (FiberSpec, f64, f64) {
        let fiber = FiberSpec::default();
        let omega = SI.omega_from_wavelength_nm(852.0);
        (fiber, omega, omega / SI.c)
    }

    fn rel(x: Complex, y: Complex) -> f64 {
        (x - y).norm() / x.norm().max(y.norm()).max(1e-300)
    }

    #[test]
    fn tangential_continuity_grid() {
        let (fiber, omega, k) = setup();
        let a = fiber.radius_nm;
        for bk in [-0.9, -0.5, 0.0, 0.5, 0.9] {
            for m in 0..=5 {
                for l in Sign::BOTH {
                    let c = rad_coeffs(&fiber, omega, bk * k, m, l).unwrap();
                    let inn = radiation_profile(&fiber, &c, a * (1.0 - 1e-13)).unwrap();
                    let out = radiation_profile(&fiber, &c, a).unwrap();
                    assert!(rel(inn.z, out.z) < 1e-8, "ez b={bk} m={m}");
                    assert!(rel(inn.phi, out.phi) < 1e-8, "ephi b={bk} m={m}");
                }
            }
        }
    }

    #[test]
    fn normal_component_jump() {
        let (fiber, omega, k) = setup();
        let a = fiber.radius_nm;
        for (bk, m) in [(0.3, 1), (-0.7, 2), (0.1, 0), (0.8, 4)] {
            let c = rad_coeffs(&fiber, omega, bk * k, m, Sign::Plus).unwrap();
            let inn = radiation_profile(&fiber, &c, a * (1.0 - 1e-13)).unwrap();
            let out = radiation_profile(&fiber, &c, a).unwrap();
            assert!(rel(inn.r * fiber.n1.powi(2), out.r * fiber.n2.powi(2)) < 1e-8);
        }
    }

    #[test]
    fn normalization_is_unity_and_consistent() {
        let (fiber, omega, k) = setup();
        for m in [-7, -1, 0, 1, 3, 12, 40] {
            for bk in [-0.95, -0.2, 0.0, 0.6, 0.999] {
                let c = rad_coeffs(&fiber, omega, bk * k, m, Sign::Minus).unwrap();
                assert!((c.norm - 1.0).abs() < 1e-10, "m={m} b={bk} N={}", c.norm);
                assert!((c.norm_alt - 1.0).abs() < 1e-9);
                assert!(c.eta >= 0.0);
                let q2 = c.q * c.q;
                let recomputed = 8.0 * PI * omega / q2
                    * (fiber.n2.powi(2) * c.c1.norm_sqr() + SI.mu0 / SI.eps0 * c.d1.norm_sqr());
                assert!((recomputed - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn companion_amplitude_follows_polarization() {
        let (fiber, omega, k) = setup();
        for l in Sign::BOTH {
            let c = rad_coeffs(&fiber, omega, 0.4 * k, 2, l).unwrap();
            let want = Complex::i() * l.value() * c.eta * c.a;
            assert!(rel(c.b, want) < 1e-14);
        }
    }

    #[test]
    fn hankel_and_standing_forms_agree() {
        let (fiber, omega, k) = setup();
        let c = rad_coeffs(&fiber, omega, 0.3 * k, 2, Sign::Plus).unwrap();
        let x = c.q * 400e-9;
        let v = jy_signed(2, x).unwrap();
        let h1 = Complex::new(v.j, v.y);
        let hankel = c.c1 * h1 + c.c2 * h1.conj();
        let out = radiation_profile(&fiber, &c, 400.0).unwrap();
        assert!(rel(hankel, out.z) < 1e-10);
    }

    #[test]
    fn mirror_order_magnitudes() {
        // Reflecting m with the polarization label flipped maps the mode onto
        // itself up to phases and the sign of e_phi.
        let (fiber, omega, k) = setup();
        for m in 1..5 {
            for bk in [-0.6, 0.2, 0.7] {
                let p = rad_coeffs(&fiber, omega, bk * k, m, Sign::Plus).unwrap();
                let n = rad_coeffs(&fiber, omega, bk * k, -m, Sign::Minus).unwrap();
                for r in [200.0, 350.0, 1200.0] {
                    let ep = radiation_profile(&fiber, &p, r).unwrap();
                    let en = radiation_profile(&fiber, &n, r).unwrap();
                    for (x, y) in [(ep.r, en.r), (ep.phi, en.phi), (ep.z, en.z)] {
                        assert!((x.norm() - y.norm()).abs() <= 1e-9 * ep.norm_sqr().sqrt());
                    }
                }
            }
        }
    }

    #[test]
    fn beta_zero_m_zero_splits_te_tm() {
        let (fiber, omega, _) = setup();
        let c = rad_coeffs(&fiber, omega, 0.0, 0, Sign::Plus).unwrap();
        let e = radiation_profile(&fiber, &c, 300.0).unwrap();
        // e_r needs beta or m; both vanish.
        assert!(e.r.norm() < 1e-12 * e.norm_sqr().sqrt());
    }

    #[test]
    fn high_order_stays_finite() {
        let (fiber, omega, k) = setup();
        let c = rad_coeffs(&fiber, omega, 0.5 * k, 150, Sign::Plus).unwrap();
        let e = radiation_profile(&fiber, &c, 200.0).unwrap();
        assert!(e.norm_sqr().is_finite());
        assert!(e.norm_sqr() < 1e-30);
    }

    #[test]
    fn band_and_edge_errors() {
        let (fiber, omega, k) = setup();
        assert!(matches!(
            rad_coeffs(&fiber, omega, 1.01 * k, 0, Sign::Plus),
            Err(Error::Band { .. })
        ));
        assert!(matches!(
            rad_coeffs(&fiber, omega, k * (1.0 - 1e-30), 0, Sign::Plus),
            Err(Error::Band { .. }) | Err(Error::Degenerate { .. })
        ));
        let edge = k * (1.0 - 1e-16);
        assert!(rad_coeffs(&fiber, omega, edge, 0, Sign::Plus).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn continuity_random(bk in -0.99f64..0.99, m in -20i32..20, plus in any::<bool>()) {
            let (fiber, omega, k) = setup();
            let l = if plus { Sign::Plus } else { Sign::Minus };
            let c = rad_coeffs(&fiber, omega, bk * k, m, l).unwrap();
            let inn = radiation_profile(&fiber, &c, fiber.radius_nm * (1.0 - 1e-13)).unwrap();
            let out = radiation_profile(&fiber, &c, fiber.radius_nm).unwrap();
            let scale = out.norm_sqr().sqrt();
            prop_assert!((inn.z - out.z).norm() <= 1e-8 * scale);
            prop_assert!((inn.phi - out.phi).norm() <= 1e-8 * scale);
            prop_assert!((c.norm - 1.0).abs() < 1e-10);
        }
    }
}
