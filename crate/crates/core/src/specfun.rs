//! Cylinder functions of integer order and real positive argument.
//!
//! Values and first derivatives come from the continued-fraction / Temme
//! routines in `puruspe` (`besseljy`, `besselik`), which return both in a
//! single call. Hankel functions are assembled as `H1 = J + iY`,
//! `H2 = J - iY`.
//!
//! Negative orders are the caller's business: use `Z_{-m} = (-1)^m Z_m` for
//! `Z in {J, Y, H1, H2}` and `I_{-m} = I_m`, `K_{-m} = K_m`.

use crate::{Complex, Error, Result};

/// Largest supported order.
pub const MAX_ORDER: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylKind {
    J,
    Y,
    I,
    K,
    H1,
    H2,
}

/// A cylinder function value together with its derivative with respect to
/// the argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylValue {
    pub value: Complex,
    pub derivative: Complex,
}

/// `J_m(x), Y_m(x)` and their derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselJY {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

/// `I_m(x), K_m(x)` and their derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselIK {
    pub i: f64,
    pub k: f64,
    pub ip: f64,
    pub kp: f64,
}

fn check(order: u32, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "cylinder functions need a finite positive argument, got {x}"
        )));
    }
    if order > MAX_ORDER {
        return Err(Error::OrderOverflow {
            order,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// Bessel functions of the first and second kind with derivatives.
///
/// `Y` may overflow to `-inf` for large orders at small arguments; callers
/// that care check `is_finite`.
pub fn bessel_jy(order: u32, x: f64) -> Result<BesselJY> {
    check(order, x)?;
    let (j, y, jp, yp) = puruspe::besseljy(order as f64, x);
    Ok(BesselJY { j, y, jp, yp })
}

/// Modified Bessel functions with derivatives.
pub fn bessel_ik(order: u32, x: f64) -> Result<BesselIK> {
    check(order, x)?;
    let (i, k, ip, kp) = puruspe::besselik(order as f64, x);
    Ok(BesselIK { i, k, ip, kp })
}

/// Bessel function of the first kind only.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    Ok(bessel_jy(order, x)?.j)
}

/// Modified Bessel function of the second kind and its derivative.
pub fn bessel_k(order: u32, x: f64) -> Result<(f64, f64)> {
    let v = bessel_ik(order, x)?;
    Ok((v.k, v.kp))
}

pub fn eval_cyl(kind: CylKind, order: u32, x: f64) -> Result<CylValue> {
    let real = |v: f64, d: f64| CylValue {
        value: Complex::new(v, 0.0),
        derivative: Complex::new(d, 0.0),
    };
    Ok(match kind {
        CylKind::J => {
            let v = bessel_jy(order, x)?;
            real(v.j, v.jp)
        }
        CylKind::Y => {
            let v = bessel_jy(order, x)?;
            real(v.y, v.yp)
        }
        CylKind::I => {
            let v = bessel_ik(order, x)?;
            real(v.i, v.ip)
        }
        CylKind::K => {
            let v = bessel_ik(order, x)?;
            real(v.k, v.kp)
        }
        CylKind::H1 => {
            let v = bessel_jy(order, x)?;
            CylValue {
                value: Complex::new(v.j, v.y),
                derivative: Complex::new(v.jp, v.yp),
            }
        }
        CylKind::H2 => {
            let v = bessel_jy(order, x)?;
            CylValue {
                value: Complex::new(v.j, -v.y),
                derivative: Complex::new(v.jp, -v.yp),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> impl Iterator<Item = (u32, f64)> {
        (0..=10u32).flat_map(|m| (0..=200).map(move |i| (m, 0.1 + (50.0 - 0.1) * i as f64 / 200.0)))
    }

    #[test]
    fn wronskian_jy() {
        for (m, x) in grid() {
            let v = bessel_jy(m, x).unwrap();
            let w = v.j * v.yp - v.jp * v.y;
            let want = 2.0 / (PI * x);
            assert!(((w - want) / want).abs() < 1e-10, "m={m} x={x} w={w}");
        }
    }

    #[test]
    fn wronskian_ik() {
        for (m, x) in grid() {
            let v = bessel_ik(m, x).unwrap();
            let w = v.i * v.kp - v.ip * v.k;
            let want = -1.0 / x;
            assert!(((w - want) / want).abs() < 1e-10, "m={m} x={x} w={w}");
        }
    }

    #[test]
    fn three_term_recurrences() {
        for (m, x) in grid().filter(|&(m, _)| m >= 1) {
            let lo = bessel_jy(m - 1, x).unwrap();
            let mid = bessel_jy(m, x).unwrap();
            let hi = bessel_jy(m + 1, x).unwrap();
            let s = 2.0 * m as f64 / x;
            let rel = |a: f64, b: f64, c: f64| (a + b - s * c).abs() / a.abs().max(b.abs()).max((s * c).abs());
            assert!(rel(lo.j, hi.j, mid.j) < 1e-9, "J m={m} x={x}");
            assert!(rel(lo.y, hi.y, mid.y) < 1e-9, "Y m={m} x={x}");

            // I_{m-1} - I_{m+1} = (2m/x) I_m ; K_{m-1} - K_{m+1} = -(2m/x) K_m
            let lo = bessel_ik(m - 1, x).unwrap();
            let mid = bessel_ik(m, x).unwrap();
            let hi = bessel_ik(m + 1, x).unwrap();
            let ei = (lo.i - hi.i - s * mid.i).abs() / (s * mid.i).abs();
            let ek = (lo.k - hi.k + s * mid.k).abs() / (s * mid.k).abs();
            assert!(ei < 1e-9, "I m={m} x={x} {ei}");
            assert!(ek < 1e-9, "K m={m} x={x} {ek}");
        }
    }

    #[test]
    fn derivative_identity_for_j() {
        for (m, x) in grid().filter(|&(m, _)| m >= 1) {
            let lo = bessel_j(m - 1, x).unwrap();
            let hi = bessel_j(m + 1, x).unwrap();
            let d = bessel_jy(m, x).unwrap().jp;
            assert!((d - 0.5 * (lo - hi)).abs() < 1e-9, "m={m} x={x}");
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        for kind in [CylKind::J, CylKind::Y, CylKind::I, CylKind::K, CylKind::H1, CylKind::H2] {
            for m in [0u32, 1, 2, 5] {
                for x in [0.3f64, 1.0, 2.5, 7.0, 20.0] {
                    let d = 1e-5 * x.max(1.0);
                    let fp = eval_cyl(kind, m, x + d).unwrap().value;
                    let fm = eval_cyl(kind, m, x - d).unwrap().value;
                    let v = eval_cyl(kind, m, x).unwrap();
                    let fd = (fp - fm) / (2.0 * d);
                    let tol = 1e-7 * v.derivative.norm().max(v.value.norm()).max(1.0);
                    assert!((fd - v.derivative).norm() < tol, "{kind:?} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn hankel_is_j_plus_i_y() {
        for x in [0.2, 1.0, 4.0, 33.0] {
            let j = eval_cyl(CylKind::J, 0, x).unwrap().value.re;
            let y = eval_cyl(CylKind::Y, 0, x).unwrap().value.re;
            let h1 = eval_cyl(CylKind::H1, 0, x).unwrap().value;
            let h2 = eval_cyl(CylKind::H2, 0, x).unwrap().value;
            assert_eq!(h1, Complex::new(j, y));
            assert_eq!(h2, h1.conj());
        }
    }

    #[test]
    fn j0_small_argument_limit() {
        let v = eval_cyl(CylKind::J, 0, 1e-9).unwrap();
        assert!((v.value.re - 1.0).abs() < 1e-15);
        assert!(v.derivative.re.abs() < 1e-9);
    }

    /// Ascending power series of J0, independent of the library path.
    fn j0_series(x: f64) -> f64 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn first_zero_of_j0() {
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if j0_series(lo) * j0_series(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let zero = 0.5 * (lo + hi);
        assert!((zero - 2.404_825_557_695_773).abs() < 1e-13, "{zero}");
        let v = eval_cyl(CylKind::J, 0, 2.404_825_557_695_773).unwrap();
        assert!(v.value.norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(eval_cyl(CylKind::J, 0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(eval_cyl(CylKind::K, 1, -1.0), Err(Error::Domain(_))));
        assert!(matches!(eval_cyl(CylKind::Y, 1, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(
            eval_cyl(CylKind::J, MAX_ORDER + 1, 1.0),
            Err(Error::OrderOverflow { .. })
        ));
    }
}
