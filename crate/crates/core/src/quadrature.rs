//! Adaptive composite Gauss-Legendre quadrature.
//!
//! The interval is split into `n` equal panels, each integrated with a fixed
//! Gauss-Legendre rule. The panel count doubles until two successive
//! estimates agree to the requested relative tolerance. Nodes never touch
//! the interval end points.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Panel count of the accepted estimate.
    pub panels: usize,
    /// `|I_n - I_{n/2}|` at acceptance.
    pub error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct AdaptiveGauss {
    pairs: Vec<(f64, f64)>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
}

impl AdaptiveGauss {
    pub fn new(nodes: usize, rel_tol: f64) -> Self {
        let degree = NonZeroUsize::new(nodes.max(1)).expect("nonzero");
        let rule = GaussLegendre::new(degree);
        Self {
            pairs: rule.as_node_weight_pairs().to_vec(),
            rel_tol,
            abs_tol: 0.0,
            min_panels: 1,
            max_panels: 1 << 12,
        }
    }

    pub fn with_min_panels(mut self, n: usize) -> Self {
        self.min_panels = n.max(1);
        self
    }

    pub fn with_max_panels(mut self, n: usize) -> Self {
        self.max_panels = n.max(1);
        self
    }

    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.pairs.len()
    }

    /// Fixed composite rule with `panels` equal panels.
    pub fn composite<F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            let mut s = 0.0;
            for &(x, w) in &self.pairs {
                s += w * f(mid + half * x)?;
            }
            total += half * s;
        }
        Ok(total)
    }

    /// Panel-doubling integration of a fallible integrand.
    pub fn try_integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<QuadResult>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut panels = self.min_panels;
        let mut prev = self.composite(a, b, panels, &mut f)?;
        while panels < self.max_panels {
            panels *= 2;
            let cur = self.composite(a, b, panels, &mut f)?;
            if !cur.is_finite() {
                return Err(Error::Quadrature(format!("non-finite estimate {cur}")));
            }
            let err = (cur - prev).abs();
            if err <= self.rel_tol * cur.abs() || err <= self.abs_tol {
                return Ok(QuadResult {
                    value: cur,
                    panels,
                    error_estimate: err,
                });
            }
            prev = cur;
        }
        Err(Error::NonConvergence {
            what: "adaptive Gauss-Legendre quadrature",
            iterations: self.max_panels,
        })
    }

    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<QuadResult>
    where
        F: FnMut(f64) -> f64,
    {
        self.try_integrate(a, b, |x| Ok(f(x)))
    }
}
