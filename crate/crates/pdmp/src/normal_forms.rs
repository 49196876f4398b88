//! Scalar bifurcation normal forms and their closed-form flow maps.
//!
//! Six one-parameter families are covered: the supercritical and subcritical
//! pitchfork, the transcritical and fold normal forms, and the radial parts
//! of the two Hopf normal forms. All flows are evaluated from closed-form
//! solutions (Bernoulli, logistic and Riccati structure), so finite escape
//! times are known analytically instead of being inferred from overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which normal form a scalar vector field belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalFormKind {
    /// x' = p x - x^3
    SupPitchfork,
    /// x' = p x + x^3
    SubPitchfork,
    /// x' = p x - x^2
    Transcritical,
    /// x' = p - x^2
    Fold,
    /// r' = p r - r^3 on r >= 0 (radial part of the supercritical Hopf form)
    SupHopfRadial,
    /// r' = p r + r^3 on r >= 0 (radial part of the subcritical Hopf form)
    SubHopfRadial,
}

impl NormalFormKind {
    /// Hopf radial kinds live on the half line r >= 0.
    pub fn is_radial(self) -> bool {
        matches!(self, Self::SupHopfRadial | Self::SubHopfRadial)
    }

    /// The scalar family with the same flow on the common domain.
    ///
    /// The Hopf radial dynamics are identical to the corresponding pitchfork
    /// dynamics restricted to the half line, so all flow computations share
    /// one code path.
    fn scalar_equivalent(self) -> Self {
        match self {
            Self::SupHopfRadial => Self::SupPitchfork,
            Self::SubHopfRadial => Self::SubPitchfork,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::SupPitchfork => "sup-pitchfork",
            Self::SubPitchfork => "sub-pitchfork",
            Self::Transcritical => "transcritical",
            Self::Fold => "fold",
            Self::SupHopfRadial => "sup-hopf-radial",
            Self::SubHopfRadial => "sub-hopf-radial",
        }
    }
}

/// A normal form together with its bifurcation parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormSpec {
    pub kind: NormalFormKind,
    pub p: f64,
}

impl NormalFormSpec {
    pub fn new(kind: NormalFormKind, p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidSpec(format!("parameter p must be finite, got {p}")));
        }
        Ok(Self { kind, p })
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("state must be finite, got {x}")));
        }
        if self.kind.is_radial() && x < 0.0 {
            return Err(Error::Domain(format!(
                "{} is defined on r >= 0, got r = {x}",
                self.kind.name()
            )));
        }
        Ok(())
    }
}

/// Sign of the branch along which a trajectory escapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowUpDirection {
    PlusInfinity,
    MinusInfinity,
}

/// Outcome of evaluating a flow map at a requested time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowResult {
    /// The solution exists up to the requested time and equals this value.
    Value(f64),
    /// The solution escapes to infinity at `t_star <= t`.
    BlowUp {
        t_star: f64,
        direction: BlowUpDirection,
    },
}

impl FlowResult {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Value(x) => Some(x),
            Self::BlowUp { .. } => None,
        }
    }

    pub fn unwrap_value(self) -> f64 {
        match self {
            Self::Value(x) => x,
            Self::BlowUp { t_star, .. } => panic!("flow blew up at t = {t_star}"),
        }
    }
}

/// Linear stability of an equilibrium, from the sign of f'(x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x: f64,
    pub stability: Stability,
    /// True when f'(x) = 0, i.e. the linearization is inconclusive. The
    /// stability label is then nominal and should not be trusted.
    pub degenerate: bool,
}

/// f(x, p) of the selected normal form.
pub fn eval_field(spec: &NormalFormSpec, x: f64) -> Result<f64> {
    spec.check_domain(x)?;
    let p = spec.p;
    Ok(match spec.kind.scalar_equivalent() {
        NormalFormKind::SupPitchfork => p * x - x * x * x,
        NormalFormKind::SubPitchfork => p * x + x * x * x,
        NormalFormKind::Transcritical => p * x - x * x,
        NormalFormKind::Fold => p - x * x,
        _ => unreachable!(),
    })
}

/// Finite forward escape time of the orbit through `x0`, if any, together
/// with the escape direction.
pub fn blow_up(spec: &NormalFormSpec, x0: f64) -> Result<Option<(f64, BlowUpDirection)>> {
    spec.check_domain(x0)?;
    let p = spec.p;
    Ok(match spec.kind.scalar_equivalent() {
        // All orbits of x' = px - x^3 are bounded.
        NormalFormKind::SupPitchfork => None,
        NormalFormKind::SubPitchfork => {
            let u0 = x0 * x0;
            if u0 == 0.0 {
                None
            } else if p == 0.0 {
                // u' = 2u^2
                Some(1.0 / (2.0 * u0))
            } else if p > 0.0 || u0 > -p {
                // t* = ln(1 + p/u0) / (2p); for p < 0 this is positive
                // exactly when u0 > -p (outside the trapping interval).
                Some((1.0 + p / u0).ln() / (2.0 * p))
            } else {
                None
            }
            .map(|t| {
                (
                    t,
                    if x0 > 0.0 {
                        BlowUpDirection::PlusInfinity
                    } else {
                        BlowUpDirection::MinusInfinity
                    },
                )
            })
        }
        NormalFormKind::Transcritical => {
            // Blow-up to -inf iff x0 < min(0, p).
            if x0 < f64::min(0.0, p) {
                let t = if p == 0.0 {
                    -1.0 / x0
                } else {
                    (1.0 - p / x0).ln() / p
                };
                Some((t, BlowUpDirection::MinusInfinity))
            } else {
                None
            }
        }
        NormalFormKind::Fold => {
            if p > 0.0 {
                let s = p.sqrt();
                if x0 < -s {
                    // tanh(s t*) = s / (-x0)
                    Some((atanh(s / -x0) / s, BlowUpDirection::MinusInfinity))
                } else {
                    None
                }
            } else if p == 0.0 {
                if x0 < 0.0 {
                    Some((-1.0 / x0, BlowUpDirection::MinusInfinity))
                } else {
                    None
                }
            } else {
                // p < 0: every orbit reaches -inf in finite time.
                let q = (-p).sqrt();
                Some((
                    ((x0 / q).atan() + std::f64::consts::FRAC_PI_2) / q,
                    BlowUpDirection::MinusInfinity,
                ))
            }
        }
        _ => unreachable!(),
    })
}

/// Finite forward escape time of the orbit through `x0`, if any.
pub fn blow_up_time(spec: &NormalFormSpec, x0: f64) -> Result<Option<f64>> {
    Ok(blow_up(spec, x0)?.map(|(t, _)| t))
}

/// Exact solution of the scalar ODE at time `t`.
pub fn flow(spec: &NormalFormSpec, x0: f64, t: f64) -> Result<FlowResult> {
    spec.check_domain(x0)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("flow time must be nonnegative, got {t}")));
    }
    // Equilibria are exact fixed points of the flow map. The field may be a
    // few ulp away from zero at a rounded equilibrium (e.g. sqrt(p)), so the
    // equilibrium set itself is checked as well.
    if eval_field(spec, x0)? == 0.0 || equilibria(spec).iter().any(|e| e.x == x0) {
        return Ok(FlowResult::Value(x0));
    }
    if let Some((t_star, direction)) = blow_up(spec, x0)? {
        if t_star <= t {
            return Ok(FlowResult::BlowUp { t_star, direction });
        }
    }
    let p = spec.p;
    let x = match spec.kind.scalar_equivalent() {
        NormalFormKind::SupPitchfork => {
            let u0 = x0 * x0;
            let u = if p == 0.0 {
                u0 / (1.0 + 2.0 * u0 * t)
            } else if p > 0.0 {
                // u -> p as t -> inf; written with a decaying exponential so
                // large horizons cannot overflow.
                p * u0 / (u0 + (p - u0) * (-2.0 * p * t).exp())
            } else {
                let e = (2.0 * p * t).exp();
                p * u0 * e / (p - u0 + u0 * e)
            };
            x0.signum() * u.sqrt()
        }
        NormalFormKind::SubPitchfork => {
            let u0 = x0 * x0;
            let u = if p == 0.0 {
                u0 / (1.0 - 2.0 * u0 * t)
            } else {
                let e = (2.0 * p * t).exp();
                p * u0 * e / (p + u0 - u0 * e)
            };
            x0.signum() * u.sqrt()
        }
        NormalFormKind::Transcritical => {
            if p == 0.0 {
                x0 / (1.0 + x0 * t)
            } else if p > 0.0 {
                p * x0 / (x0 + (p - x0) * (-p * t).exp())
            } else {
                let e = (p * t).exp();
                p * x0 * e / (p - x0 + x0 * e)
            }
        }
        NormalFormKind::Fold => {
            if p > 0.0 {
                let s = p.sqrt();
                let th = (s * t).tanh();
                s * (x0 + s * th) / (s + x0 * th)
            } else if p == 0.0 {
                x0 / (1.0 + x0 * t)
            } else {
                let q = (-p).sqrt();
                q * ((x0 / q).atan() - q * t).tan()
            }
        }
        _ => unreachable!(),
    };
    Ok(FlowResult::Value(x))
}

/// All real equilibria of the normal form, ordered by position.
pub fn equilibria(spec: &NormalFormSpec) -> Vec<Equilibrium> {
    let p = spec.p;
    let eq = |x: f64| {
        let deriv = field_derivative(spec, x);
        Equilibrium {
            x,
            stability: if deriv < 0.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            },
            degenerate: deriv == 0.0,
        }
    };
    let mut out: Vec<Equilibrium> = match spec.kind {
        NormalFormKind::SupPitchfork => {
            if p > 0.0 {
                vec![eq(-p.sqrt()), eq(0.0), eq(p.sqrt())]
            } else {
                vec![eq(0.0)]
            }
        }
        NormalFormKind::SubPitchfork => {
            if p < 0.0 {
                vec![eq(-(-p).sqrt()), eq(0.0), eq((-p).sqrt())]
            } else {
                vec![eq(0.0)]
            }
        }
        NormalFormKind::Transcritical => {
            if p == 0.0 {
                vec![eq(0.0)]
            } else {
                vec![eq(0.0), eq(p)]
            }
        }
        NormalFormKind::Fold => {
            if p > 0.0 {
                vec![eq(-p.sqrt()), eq(p.sqrt())]
            } else if p == 0.0 {
                vec![eq(0.0)]
            } else {
                vec![]
            }
        }
        NormalFormKind::SupHopfRadial => {
            if p > 0.0 {
                vec![eq(0.0), eq(p.sqrt())]
            } else {
                vec![eq(0.0)]
            }
        }
        NormalFormKind::SubHopfRadial => {
            if p < 0.0 {
                vec![eq(0.0), eq((-p).sqrt())]
            } else {
                vec![eq(0.0)]
            }
        }
    };
    out.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    out
}

fn field_derivative(spec: &NormalFormSpec, x: f64) -> f64 {
    let p = spec.p;
    match spec.kind.scalar_equivalent() {
        NormalFormKind::SupPitchfork => p - 3.0 * x * x,
        NormalFormKind::SubPitchfork => p + 3.0 * x * x,
        NormalFormKind::Transcritical => p - 2.0 * x,
        NormalFormKind::Fold => -2.0 * x,
        _ => unreachable!(),
    }
}

/// f'(0) for the kinds that share the equilibrium 0; equals p for all of them.
pub fn linearize_at_zero(spec: &NormalFormSpec) -> Result<f64> {
    if spec.kind == NormalFormKind::Fold {
        return Err(Error::Domain(
            "fold normal form has no equilibrium at 0".to_string(),
        ));
    }
    Ok(spec.p)
}

fn atanh(y: f64) -> f64 {
    0.5 * ((1.0 + y) / (1.0 - y)).ln()
}
