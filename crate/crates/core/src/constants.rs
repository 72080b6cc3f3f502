//! Physical constants (SI).

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Speed of light in vacuum, m/s.
    pub c: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
    /// Vacuum permeability, H/m.
    pub mu0: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
}

const C: f64 = 299_792_458.0;
const EPS0: f64 = 8.854_187_8128e-12;

/// CODATA 2018 values. `mu0` is derived from `c` and `eps0` so that
/// `c^2 eps0 mu0 = 1` holds to rounding.
pub const SI: Constants = Constants {
    c: C,
    eps0: EPS0,
    mu0: 1.0 / (EPS0 * C * C),
    hbar: 1.054_571_817e-34,
};

impl Default for Constants {
    fn default() -> Self {
        SI
    }
}

impl Constants {
    /// Vacuum impedance `mu0 c`.
    pub fn z0(&self) -> f64 {
        self.mu0 * self.c
    }

    pub fn omega_from_wavelength_nm(&self, lambda_nm: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.c / (lambda_nm * 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxwell_relation_holds() {
        let x = SI.c * SI.c * SI.eps0 * SI.mu0;
        assert!((x - 1.0).abs() < 1e-12, "{x}");
    }

    #[test]
    fn impedance_of_free_space() {
        assert!((SI.z0() - 376.730_313_668).abs() < 1e-6);
    }
}
