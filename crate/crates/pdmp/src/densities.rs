//! Closed-form invariant densities of the supercritical pitchfork and
//! transcritical switching regimes.
//!
//! Everything is derived from the probability flux of the mode -1 component.
//! On the support, phi_minus has a single closed form (a product of powers),
//! phi_plus = -phi_minus identically, and the densities are the quotients
//! rho_minus = phi_minus / f_minus and rho_plus = -phi_minus / f_plus. One
//! shared constant normalizes both modes jointly; the per-mode masses are
//! then predictions, not constraints.

use serde::{Deserialize, Serialize};

use crate::engine::{Histogram, Mode, SwitchingSpec};
use crate::error::{Error, Result};
use crate::normal_forms::{self, NormalFormKind, NormalFormSpec};
use crate::quadrature::{gauss5_average, tanh_sinh_with_dist};
use crate::regimes::{comparison, Comparison};

/// Which mode component of the invariant measure to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeSelect {
    Minus,
    Plus,
    Marginal,
}

/// Flux pair at one point; the components cancel identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxValue {
    pub phi_minus: f64,
    pub phi_plus: f64,
}

/// Analytic invariant density family for a supercritical-regime spec.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    spec: SwitchingSpec,
    /// 2 for the pitchfork family (factors in x^2), 1 for the transcritical.
    factor_power: i32,
    support_hi: f64,
    /// Exponent of x in the flux.
    x_exp: f64,
    /// Exponent of (-p_minus + x^k) in the flux.
    left_exp: f64,
    /// Exponent of (p_plus - x^k) in the flux.
    right_exp: f64,
    /// Shared normalization constant C.
    norm: f64,
    mass_minus: f64,
    mass_plus: f64,
    tol: f64,
}

impl DensityModel {
    /// Builds the density family and computes its normalization constant.
    ///
    /// Fails with a regime error unless the spec is strictly supercritical;
    /// at the critical ratio the candidate density behaves like 1/x near 0
    /// and is not integrable.
    pub fn new(spec: &SwitchingSpec, tol: f64) -> Result<Self> {
        spec.validate()?;
        if !(tol > 0.0) {
            return Err(Error::InvalidSpec(format!("tolerance must be positive, got {tol}")));
        }
        let (factor_power, support_hi) = match spec.kind {
            NormalFormKind::SupPitchfork | NormalFormKind::SupHopfRadial => {
                (2, spec.p_plus.sqrt())
            }
            NormalFormKind::Transcritical => (1, spec.p_plus),
            other => {
                return Err(Error::Domain(format!(
                    "no invariant density exists for the {} normal form",
                    other.name()
                )))
            }
        };
        match comparison(spec) {
            Comparison::Super => {}
            Comparison::Critical => {
                return Err(Error::Regime(
                    "critical rate ratio: the candidate density decays like 1/x near 0 and is not normalizable"
                        .into(),
                ))
            }
            Comparison::Sub => {
                return Err(Error::Regime(
                    "subcritical regime: the trivial measure is the only invariant measure"
                        .into(),
                ))
            }
        }

        let x_exp = -spec.lambda_minus / spec.p_minus - spec.lambda_plus / spec.p_plus;
        let (left_exp, right_exp) = if factor_power == 2 {
            (
                spec.lambda_minus / (2.0 * spec.p_minus),
                spec.lambda_plus / (2.0 * spec.p_plus),
            )
        } else {
            (spec.lambda_minus / spec.p_minus, spec.lambda_plus / spec.p_plus)
        };

        let mut model = Self {
            spec: *spec,
            factor_power,
            support_hi,
            x_exp,
            left_exp,
            right_exp,
            norm: 1.0,
            mass_minus: 0.0,
            mass_plus: 0.0,
            tol,
        };
        // the endpoint distances keep the vanishing factor p_plus - x^k
        // accurate where computing it from the abscissa would cancel
        let raw_minus = tanh_sinh_with_dist(
            |x, _, db| model.unnormalized_density_dist(Mode::Minus, x, Some(db)),
            0.0,
            support_hi,
            tol,
        )?;
        let raw_plus = tanh_sinh_with_dist(
            |x, _, db| model.unnormalized_density_dist(Mode::Plus, x, Some(db)),
            0.0,
            support_hi,
            tol,
        )?;
        let total = raw_minus + raw_plus;
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Quadrature(format!("degenerate total mass {total}")));
        }
        model.norm = 1.0 / total;
        model.mass_minus = raw_minus / total;
        model.mass_plus = raw_plus / total;
        Ok(model)
    }

    pub fn spec(&self) -> &SwitchingSpec {
        &self.spec
    }

    /// Open support (0, sqrt(p_plus)) or (0, p_plus).
    pub fn support(&self) -> (f64, f64) {
        (0.0, self.support_hi)
    }

    /// The shared normalization constant.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Probability the measure assigns to each mode, (minus, plus).
    ///
    /// These emerge from the joint normalization; they are expected to match
    /// the chain marginal (lambda_plus, lambda_minus)/(lambda_plus+lambda_minus).
    pub fn mode_masses(&self) -> (f64, f64) {
        (self.mass_minus, self.mass_plus)
    }

    /// ln of the vanishing right factor p_plus - x^k; `dist` is the exact
    /// distance to the right endpoint when the caller has it (near the
    /// endpoint the difference of rounded quantities loses every digit).
    fn log_right_factor(&self, x: f64, dist: Option<f64>) -> f64 {
        match dist {
            Some(d) if self.factor_power == 2 => d.ln() + (self.support_hi + x).ln(),
            Some(d) => d.ln(),
            None => {
                let xk = if self.factor_power == 2 { x * x } else { x };
                (self.spec.p_plus - xk).ln()
            }
        }
    }

    /// ln of the flux magnitude shape x^a (-p_minus + x^k)^b (p_plus - x^k)^c.
    fn log_shape_dist(&self, x: f64, dist: Option<f64>) -> f64 {
        let xk = if self.factor_power == 2 { x * x } else { x };
        self.x_exp * x.ln()
            + self.left_exp * (-self.spec.p_minus + xk).ln()
            + self.right_exp * self.log_right_factor(x, dist)
    }

    fn log_shape(&self, x: f64) -> f64 {
        self.log_shape_dist(x, None)
    }

    fn field(&self, mode: Mode, x: f64) -> f64 {
        let nf = NormalFormSpec {
            kind: self.spec.kind,
            p: match mode {
                Mode::Minus => self.spec.p_minus,
                Mode::Plus => self.spec.p_plus,
            },
        };
        normal_forms::eval_field(&nf, x).expect("support is inside the domain")
    }

    /// Unnormalized density in log space: the fields factor as
    /// -f_minus = x(-p_minus + x^k) and f_plus = x(p_plus - x^k), so the
    /// quotient only shifts the three exponents by one.
    fn unnormalized_density_dist(&self, mode: Mode, x: f64, dist: Option<f64>) -> f64 {
        let xk = if self.factor_power == 2 { x * x } else { x };
        let log = match mode {
            Mode::Minus => {
                (self.x_exp - 1.0) * x.ln()
                    + (self.left_exp - 1.0) * (-self.spec.p_minus + xk).ln()
                    + self.right_exp * self.log_right_factor(x, dist)
            }
            Mode::Plus => {
                (self.x_exp - 1.0) * x.ln()
                    + self.left_exp * (-self.spec.p_minus + xk).ln()
                    + (self.right_exp - 1.0) * self.log_right_factor(x, dist)
            }
        };
        log.exp()
    }

    fn unnormalized_density(&self, mode: Mode, x: f64) -> f64 {
        self.unnormalized_density_dist(mode, x, None)
    }

    fn check_interior(&self, x: f64) -> Result<()> {
        if !(x > 0.0 && x < self.support_hi) {
            return Err(Error::Domain(format!(
                "x = {x} is not strictly inside the support (0, {})",
                self.support_hi
            )));
        }
        Ok(())
    }

    /// Probability flux pair at an interior point; phi_plus = -phi_minus by
    /// construction, to the last bit.
    pub fn flux(&self, x: f64) -> Result<FluxValue> {
        self.check_interior(x)?;
        let phi_minus = -self.norm * self.log_shape(x).exp();
        Ok(FluxValue {
            phi_minus,
            phi_plus: -phi_minus,
        })
    }

    /// Normalized invariant density of one mode; 0 outside the open support
    /// (including at the endpoints, where the analytic limit may be infinite).
    pub fn density(&self, mode: Mode, x: f64) -> f64 {
        if !(x > 0.0 && x < self.support_hi) {
            return 0.0;
        }
        self.norm * self.unnormalized_density(mode, x)
    }

    /// Marginal density rho_minus + rho_plus.
    pub fn density_marginal(&self, x: f64) -> f64 {
        self.density(Mode::Minus, x) + self.density(Mode::Plus, x)
    }

    /// Density of the mirror family supported on the negative half line
    /// (pitchfork kinds only): rho_i^pi(x) = rho_i^mu(-x).
    pub fn mirror_density(&self, mode: Mode, x: f64) -> Result<f64> {
        if self.factor_power != 2 {
            return Err(Error::Domain(
                "the transcritical regime has no mirror measure on the negative half line".into(),
            ));
        }
        Ok(self.density(mode, -x))
    }

    /// Residuals of the two stationary flux ODEs at an interior point, using
    /// a central difference of the flux with step 1e-6 * |support|.
    pub fn fokker_planck_residual(&self, x: f64) -> Result<(f64, f64)> {
        let margin = 1e-3 * self.support_hi;
        if !(x >= margin && x <= self.support_hi - margin) {
            return Err(Error::Domain(format!(
                "x = {x} is within 1e-3 of a support endpoint; the finite difference is unreliable there"
            )));
        }
        let h = 1e-6 * self.support_hi;
        let phi = |x: f64| -self.norm * self.log_shape(x).exp();
        let dphi = (phi(x + h) - phi(x - h)) / (2.0 * h);
        let phi_minus = phi(x);
        let phi_plus = -phi_minus;
        let f_minus = self.field(Mode::Minus, x);
        let f_plus = self.field(Mode::Plus, x);
        let r1 = dphi + (self.spec.lambda_minus / f_minus) * phi_minus
            - (self.spec.lambda_plus / f_plus) * phi_plus;
        let r2 = -dphi + (self.spec.lambda_plus / f_plus) * phi_plus
            - (self.spec.lambda_minus / f_minus) * phi_minus;
        Ok((r1, r2))
    }

    /// L1 distance between a histogram and the bin-averaged analytic density.
    ///
    /// The analytic average over each bin uses 5-point Gauss-Legendre, so the
    /// comparison does not penalize binning of a curved density.
    pub fn l1_distance(&self, hist: &Histogram, select: ModeSelect) -> Result<f64> {
        if hist.samples == 0 {
            return Err(Error::InsufficientSamples("histogram holds no samples".into()));
        }
        if hist.lo > 0.0 || hist.hi < self.support_hi {
            return Err(Error::Domain(format!(
                "histogram range [{}, {}] does not cover the support (0, {})",
                hist.lo, hist.hi, self.support_hi
            )));
        }
        let width = hist.bin_width();
        let mut dist = 0.0;
        for b in 0..hist.bins {
            let lo = hist.lo + b as f64 * width;
            let hi = lo + width;
            let (empirical, analytic) = match select {
                ModeSelect::Minus => (
                    hist.density_minus(b),
                    gauss5_average(|x| self.density(Mode::Minus, x), lo, hi),
                ),
                ModeSelect::Plus => (
                    hist.density_plus(b),
                    gauss5_average(|x| self.density(Mode::Plus, x), lo, hi),
                ),
                ModeSelect::Marginal => (
                    hist.density_marginal(b),
                    gauss5_average(|x| self.density_marginal(x), lo, hi),
                ),
            };
            dist += (empirical - analytic).abs() * width;
        }
        Ok(dist)
    }

    /// Requested normalization tolerance.
    pub fn tol(&self) -> f64 {
        self.tol
    }
}
