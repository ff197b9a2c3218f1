use alloc::format;

use crate::{Error, Result};

/// Composite Simpson rule with interval doubling until two successive
/// estimates agree to `rel_tol`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quadrature {
    pub initial_intervals: usize,
    pub max_intervals: usize,
    pub rel_tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            initial_intervals: 256,
            max_intervals: 1 << 22,
            rel_tol: 1e-6,
        }
    }
}

impl Quadrature {
    /// `∫_a^b f`. `min_intervals` lets the caller raise the starting grid
    /// for oscillatory integrands.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, min_intervals: usize) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::input(format!("integration limits must be finite, got [{a}, {b}]")));
        }
        if a == b {
            return Ok(0.0);
        }
        let mut n = self.initial_intervals.max(min_intervals).max(2);
        n += n % 2;
        let width = b - a;

        let ends = f(a) + f(b);
        let mut step = width / n as f64;
        let mut odd = 0.0;
        let mut even = 0.0;
        for i in 1..n {
            let y = f(a + i as f64 * step);
            if i % 2 == 1 {
                odd += y;
            } else {
                even += y;
            }
        }
        let mut estimate = step / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        loop {
            if 2 * n > self.max_intervals {
                return Err(Error::Numeric(format!(
                    "quadrature did not settle to {} within {} intervals",
                    self.rel_tol, self.max_intervals
                )));
            }
            // Old odd and even nodes are all even nodes of the doubled grid.
            even += odd;
            n *= 2;
            step = width / n as f64;
            odd = 0.0;
            for i in (1..n).step_by(2) {
                odd += f(a + i as f64 * step);
            }
            let refined = step / 3.0 * (ends + 4.0 * odd + 2.0 * even);
            let diff = (refined - estimate).abs();
            if diff <= self.rel_tol * refined.abs() || diff == 0.0 {
                if !refined.is_finite() {
                    return Err(Error::Numeric("quadrature produced a non-finite value".into()));
                }
                return Ok(refined);
            }
            estimate = refined;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomials_and_trig() {
        let q = Quadrature::default();
        let v = q.integrate(|x| x * x * x, 0.0, 2.0, 0).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = q.integrate(|x| libm::cos(x).powi(2), -PI, PI, 0).unwrap();
        assert!((v - PI).abs() < 1e-9);
        assert_eq!(q.integrate(|_| 0.0, 0.0, 1.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn refuses_to_run_forever() {
        let q = Quadrature {
            initial_intervals: 4,
            max_intervals: 16,
            rel_tol: 1e-14,
        };
        let r = q.integrate(|x| libm::sin(50.0 * x).abs(), 0.0, 1.0, 0);
        assert!(matches!(r, Err(Error::Numeric(_))));
    }
}
