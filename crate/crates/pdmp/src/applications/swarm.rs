//! Moment-closure ODE of an adaptive network model for swarming locusts.
//!
//! States: x1, x2 are the fractions of right- and left-moving nodes; y1, y2,
//! y3 the RR, LL and RL link densities. The link-formation rate a0 drives a
//! supercritical pitchfork: below a0* the disordered state x1 = x2 = 1/2 is
//! stable, above it two ordered majority branches appear.
//!
//! The printed y1' equation contains an undefined symbol L; `Verbatim` mode
//! refuses to evaluate rather than guess, and `Symmetrized` applies the
//! left/right relabeling symmetry to fill the gap (L -> x1, and the y2' line
//! mirrored accordingly).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmParams {
    /// Spontaneous direction-switching rate.
    pub q: f64,
    /// Two-neighbor induced switching rate.
    pub w2: f64,
    /// Three-neighbor induced switching rate.
    pub w3: f64,
    /// Link creation rate between equal-direction nodes.
    pub ae: f64,
    /// Link deletion rate between equal-direction nodes.
    pub de: f64,
    /// Link creation rate between opposite-direction nodes (the switched parameter).
    pub a0: f64,
    /// Link deletion rate between opposite-direction nodes.
    pub d0: f64,
}

impl SwarmParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("q", self.q),
            ("w2", self.w2),
            ("w3", self.w3),
            ("ae", self.ae),
            ("de", self.de),
            ("a0", self.a0),
            ("d0", self.d0),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "swarm parameter {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Which reading of the printed equations to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwarmVariant {
    /// The equations exactly as printed; unusable because the y1' line
    /// references an undefined symbol L.
    Verbatim,
    /// The left/right-symmetric reading: L -> x1 in y1', the y2' line as
    /// the mirror image (indices 1 <-> 2) of the y1' line, and the
    /// spontaneous-switching terms oriented so that they drain the majority
    /// (the orientation consistent with the stated threshold).
    Symmetrized,
}

/// Five-dimensional right-hand side at state (x1, x2, y1, y2, y3).
///
/// y3' is defined by subtracting y1' and y2' from the conservation law for
/// (y1+y2+y3)', the only closure consistent with it.
pub fn swarm_field(
    params: &SwarmParams,
    variant: SwarmVariant,
    state: [f64; 5],
) -> Result<[f64; 5]> {
    params.validate()?;
    let [x1, x2, y1, y2, y3] = state;
    if x1 <= 1e-9 || x2 <= 1e-9 {
        return Err(Error::Domain(format!(
            "swarm field requires x1, x2 > 1e-9 (divisions by node fractions); got x1 = {x1}, x2 = {x2}"
        )));
    }
    if variant == SwarmVariant::Verbatim {
        return Err(Error::Domain(
            "the printed y1' equation references an undefined symbol L; \
             use the symmetrized variant to evaluate the field"
                .into(),
        ));
    }
    let SwarmParams { q, w2, w3, ae, de, a0, d0 } = *params;

    // Spontaneous switching must drain the majority (q(x2-x1) in the x1'
    // line): that is the only sign for which the disordered state is stable
    // exactly up to a0* = 2 d0 sqrt(2q/w3). The linearized antisymmetric
    // eigenvalue is -2q + 4 w3 y3^2, which vanishes at that threshold.
    let dx1 = q * (x2 - x1) + w3 * (y3 * y3 / (2.0 * x2) - y3 * y3 / (2.0 * x1));
    let dx2 = q * (x1 - x2) + w3 * (y3 * y3 / (2.0 * x1) - y3 * y3 / (2.0 * x2));
    let dy1 = q * (y3 - 2.0 * y1)
        + w2 * (y3 + y3 * y3 / x1 - 2.0 * y3 * y1 / x1)
        + w3 * (y3 * y3 / x2 + y3 * y3 * y3 / (2.0 * x2 * x2) - y3 * y3 * y1 / (x1 * x1))
        + ae * x1 * x1
        - de * y1;
    let dy2 = q * (y3 - 2.0 * y2)
        + w2 * (y3 + y3 * y3 / x2 - 2.0 * y3 * y2 / x2)
        + w3 * (y3 * y3 / x1 + y3 * y3 * y3 / (2.0 * x1 * x1) - y3 * y3 * y2 / (x2 * x2))
        + ae * x2 * x2
        - de * y2;
    let conservation = a0 * x1 * x2 - d0 * y3 + ae * (x1 * x1 + x2 * x2) - de * (y1 + y2);
    let dy3 = conservation - dy1 - dy2;
    Ok([dx1, dx2, dy1, dy2, dy3])
}

/// Pitchfork threshold a0* = 2 d0 sqrt(2q / w3) of the disordered state.
pub fn swarm_pitchfork_threshold(q: f64, w3: f64, d0: f64) -> Result<f64> {
    if !(q > 0.0 && w3 > 0.0 && d0 > 0.0) {
        return Err(Error::Domain(format!(
            "threshold needs q, w3, d0 > 0; got q = {q}, w3 = {w3}, d0 = {d0}"
        )));
    }
    Ok(2.0 * d0 * (2.0 * q / w3).sqrt())
}

/// Ordered node-fraction branches (x1)+- = 1/2 +- (1/2) sqrt(1 - 8 q d0^2 / (w3 a0^2)),
/// valid for ae = de = 0 and a0 at or above the threshold.
pub fn swarm_ordered_branch(params: &SwarmParams) -> Result<(f64, f64)> {
    params.validate()?;
    if params.ae != 0.0 || params.de != 0.0 {
        return Err(Error::Domain(
            "the closed-form branches require ae = de = 0".into(),
        ));
    }
    let radicand =
        1.0 - 8.0 * params.q * params.d0 * params.d0 / (params.w3 * params.a0 * params.a0);
    if radicand < 0.0 {
        return Err(Error::Domain(format!(
            "a0 = {} lies below the pitchfork threshold; no ordered branch exists",
            params.a0
        )));
    }
    let half_width = 0.5 * radicand.sqrt();
    Ok((0.5 + half_width, 0.5 - half_width))
}

/// Disordered equilibrium x1 = x2 = 1/2 with the link densities solved
/// consistently (ae = de = 0): y3 from the conservation law, y1 = y2 from
/// the (linear-in-y1) symmetric stationarity condition.
pub fn swarm_disordered_state(params: &SwarmParams) -> Result<[f64; 5]> {
    params.validate()?;
    if params.ae != 0.0 || params.de != 0.0 {
        return Err(Error::Domain(
            "the closed-form disordered state requires ae = de = 0".into(),
        ));
    }
    if !(params.d0 > 0.0) {
        return Err(Error::Domain("d0 must be positive to solve for y3".into()));
    }
    let y3 = params.a0 / (4.0 * params.d0);
    // stationarity of y1 at x1 = x2 = 1/2, y1 = y2 is linear in y1:
    // q(y3 - 2y1) + w2(y3 + 2y3^2 - 4y3y1) + w3(2y3^2 + 2y3^3 - 4y3^2y1) = 0
    let numer = params.q * y3
        + params.w2 * (y3 + 2.0 * y3 * y3)
        + params.w3 * (2.0 * y3 * y3 + 2.0 * y3 * y3 * y3);
    let denom = 2.0 * params.q + 4.0 * params.w2 * y3 + 4.0 * params.w3 * y3 * y3;
    if denom == 0.0 {
        return Err(Error::Domain(
            "degenerate parameters: the link-density equation has no unique solution".into(),
        ));
    }
    let y1 = numer / denom;
    Ok([0.5, 0.5, y1, y1, y3])
}
