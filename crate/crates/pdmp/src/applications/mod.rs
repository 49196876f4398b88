//! Application models in the plane and beyond: predator-prey cycles, the
//! van der Pol fast subsystem, an adaptive swarming closure, and a general
//! fixed-step switched integrator for vector fields without closed-form flows.

pub mod rm;
pub mod swarm;
pub mod switched;
pub mod vdp;

use crate::error::Result;

/// Jacobian of `f` at `x` by central differences with per-coordinate step
/// h = 1e-6 * (1 + |x_j|). Row i holds the partials of component i.
pub fn numeric_jacobian<F>(f: F, x: &[f64]) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let m = f(x)?.len();
    let mut jac = vec![vec![0.0; n]; m];
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for j in 0..n {
        let h = 1e-6 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        let fp = f(&xp)?;
        let fm = f(&xm)?;
        for i in 0..m {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    Ok(jac)
}
