//! Rosenzweig-MacArthur predator-prey model with Holling type II response.
//!
//! The carrying capacity p is the bifurcation parameter: the coexistence
//! equilibrium loses stability in a supercritical Hopf bifurcation at p = 2
//! (for the fixed choice m = 1, beta = 3).

use serde::{Deserialize, Serialize};

use super::numeric_jacobian;
use crate::error::{Error, Result};

/// Parameters of the predator-prey system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RMParams {
    /// Conversion factor of consumed prey into predators.
    pub beta: f64,
    /// Predator mortality.
    pub m: f64,
    /// Prey carrying capacity (the switched parameter).
    pub p: f64,
}

impl RMParams {
    /// The standard parameter slice m = 1, beta = 3 with carrying capacity p.
    pub fn with_p(p: f64) -> Self {
        Self { beta: 3.0, m: 1.0, p }
    }
}

/// Right-hand side: x' = x(1 - x/p) - xy/(1+x), y' = beta*xy/(1+x) - m*y.
pub fn rm_field(params: &RMParams, state: (f64, f64)) -> (f64, f64) {
    let (x, y) = state;
    let predation = x * y / (1.0 + x);
    (
        x * (1.0 - x / params.p) - predation,
        params.beta * predation - params.m * y,
    )
}

/// Interior equilibrium (1/2, 3(2p-1)/(4p)) of the m = 1, beta = 3 slice.
pub fn rm_coexistence_equilibrium(p: f64) -> Result<(f64, f64)> {
    if !(p > 0.5) {
        return Err(Error::Domain(format!(
            "no interior coexistence equilibrium for p = {p} <= 1/2"
        )));
    }
    Ok((0.5, 3.0 * (2.0 * p - 1.0) / (4.0 * p)))
}

/// Trace of the Jacobian at the coexistence equilibrium, by central
/// differences; analytically (p-2)/(3p), so its root marks the Hopf point.
pub fn rm_hopf_trace(p: f64) -> Result<f64> {
    let eq = rm_coexistence_equilibrium(p)?;
    let params = RMParams::with_p(p);
    let jac = numeric_jacobian(
        |v| {
            let (dx, dy) = rm_field(&params, (v[0], v[1]));
            Ok(vec![dx, dy])
        },
        &[eq.0, eq.1],
    )?;
    Ok(jac[0][0] + jac[1][1])
}

/// Root of the trace in (lo, hi) by bisection, to absolute tolerance `tol`.
pub fn rm_hopf_point(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = rm_hopf_trace(a)?;
    let fb = rm_hopf_trace(b)?;
    if fa * fb > 0.0 {
        return Err(Error::Domain(format!(
            "trace does not change sign on ({lo}, {hi})"
        )));
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = rm_hopf_trace(mid)?;
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_equilibria() {
        let params = RMParams::with_p(2.0);
        assert_eq!(rm_field(&params, (0.0, 0.0)), (0.0, 0.0));
        let (dx, dy) = rm_field(&params, (2.0, 0.0));
        assert_eq!(dx, 0.0);
        assert_eq!(dy, 0.0);
    }

    #[test]
    fn coexistence_equilibrium_values() {
        let (x, y) = rm_coexistence_equilibrium(2.0).unwrap();
        assert_eq!(x, 0.5);
        assert_eq!(y, 1.125);
        assert!(rm_coexistence_equilibrium(0.5).is_err());
        assert!(rm_coexistence_equilibrium(0.2).is_err());
    }

    #[test]
    fn coexistence_point_is_an_equilibrium() {
        for p in [0.6, 1.0, 2.0, 4.0, 10.0] {
            let eq = rm_coexistence_equilibrium(p).unwrap();
            let (dx, dy) = rm_field(&RMParams::with_p(p), eq);
            assert!(dx.abs() <= 1e-14, "p={p}: dx={dx}");
            assert!(dy.abs() <= 1e-14, "p={p}: dy={dy}");
        }
    }

    #[test]
    fn hopf_trace_matches_closed_form() {
        // symbolic differentiation gives trace = (p-2)/(3p) on this slice
        for (p, expect) in [(2.0, 0.0), (1.0, -1.0 / 3.0), (4.0, 1.0 / 6.0)] {
            let tr = rm_hopf_trace(p).unwrap();
            assert!((tr - expect).abs() <= 1e-8, "p={p}: {tr} vs {expect}");
        }
    }

    #[test]
    fn hopf_point_is_isolated_at_two() {
        let root = rm_hopf_point(1.9, 2.1, 1e-6).unwrap();
        assert!((root - 2.0).abs() <= 2e-6, "{root}");
        // scan (0.6, 10): the trace changes sign exactly once
        let mut crossings = 0;
        let mut prev = rm_hopf_trace(0.6).unwrap();
        let mut p = 0.6_f64;
        while p < 10.0 {
            p += 0.01;
            let cur = rm_hopf_trace(p.min(10.0)).unwrap();
            if prev * cur < 0.0 {
                crossings += 1;
            }
            prev = cur;
        }
        assert_eq!(crossings, 1);
    }
}
