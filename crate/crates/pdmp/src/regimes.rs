//! Classification of switching regimes and Monte Carlo verification of the
//! verdicts.
//!
//! The decision procedure compares lambda_plus/p_plus against
//! -lambda_minus/p_minus; everything else (number of ergodic invariant
//! measures, blow-up behavior) follows from that comparison per kind.

use serde::{Deserialize, Serialize};

use crate::engine::{Mode, SwitchingSpec, Trajectory, TrajectoryStatus};
use crate::error::{Error, Result};
use crate::normal_forms::NormalFormKind;
use crate::rng::{derive_seed, SplitMix64};

/// Position of lambda_plus/p_plus relative to -lambda_minus/p_minus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// lambda_plus/p_plus > -lambda_minus/p_minus (growth rate negative)
    Sub,
    /// equality within tolerance (growth rate zero)
    Critical,
    /// lambda_plus/p_plus < -lambda_minus/p_minus (growth rate positive)
    Super,
}

/// The ergodic invariant probability measures a regime admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErgodicIpm {
    /// Dirac at the common equilibrium times the chain's stationary law.
    TrivialDelta,
    /// Absolutely continuous measure supported in (0, +bound).
    MuPositive,
    /// Mirror measure supported in (-bound, 0).
    PiNegative,
    /// Product of normalized arc length on the circle and the radial measure.
    RotationalProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpVerdict {
    None,
    PositiveProbability,
    AlmostSure,
    AlmostSureFromLeftOfZero,
    Dichotomy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub kind: NormalFormKind,
    pub growth_rate: f64,
    pub comparison: Comparison,
    pub ergodic_ipms: Vec<ErgodicIpm>,
    pub blowup: BlowUpVerdict,
    pub notes: String,
}

/// Average growth rate at the common equilibrium:
/// (p_minus lambda_plus + p_plus lambda_minus) / (lambda_plus + lambda_minus).
pub fn average_growth_rate(p_minus: f64, p_plus: f64, lambda_minus: f64, lambda_plus: f64) -> f64 {
    (p_minus * lambda_plus + p_plus * lambda_minus) / (lambda_plus + lambda_minus)
}

/// Regime comparison with equality detected on the cross-multiplied form
/// lambda_plus p_minus + lambda_minus p_plus, relative tolerance 1e-12.
pub fn comparison(spec: &SwitchingSpec) -> Comparison {
    let s = spec.lambda_plus * spec.p_minus + spec.lambda_minus * spec.p_plus;
    let scale = (spec.lambda_plus * spec.p_minus).abs() + (spec.lambda_minus * spec.p_plus).abs();
    if s.abs() <= 1e-12 * scale {
        Comparison::Critical
    } else if s > 0.0 {
        Comparison::Super
    } else {
        Comparison::Sub
    }
}

/// Full per-kind verdict: ergodic measure count and blow-up behavior.
pub fn classify(spec: &SwitchingSpec) -> Result<RegimeReport> {
    spec.validate()?;
    let cmp = comparison(spec);
    let growth = average_growth_rate(spec.p_minus, spec.p_plus, spec.lambda_minus, spec.lambda_plus);
    let critical_note =
        "critical rate ratio: blow-up behavior not covered by the strict-inequality theorems";

    let (ipms, blowup, notes): (Vec<ErgodicIpm>, BlowUpVerdict, String) = match spec.kind {
        NormalFormKind::SupPitchfork => match cmp {
            Comparison::Super => (
                vec![ErgodicIpm::TrivialDelta, ErgodicIpm::MuPositive, ErgodicIpm::PiNegative],
                BlowUpVerdict::None,
                "three ergodic measures: delta plus one on each half line".into(),
            ),
            _ => (
                vec![ErgodicIpm::TrivialDelta],
                BlowUpVerdict::None,
                "delta is the unique invariant measure".into(),
            ),
        },
        NormalFormKind::SupHopfRadial => match cmp {
            Comparison::Super => (
                vec![ErgodicIpm::TrivialDelta, ErgodicIpm::RotationalProduct],
                BlowUpVerdict::None,
                "delta plus the rotation-invariant product measure".into(),
            ),
            _ => (
                vec![ErgodicIpm::TrivialDelta],
                BlowUpVerdict::None,
                "delta is the unique invariant measure".into(),
            ),
        },
        NormalFormKind::Transcritical => {
            let ipms = match cmp {
                Comparison::Super => vec![ErgodicIpm::TrivialDelta, ErgodicIpm::MuPositive],
                _ => vec![ErgodicIpm::TrivialDelta],
            };
            match cmp {
                Comparison::Super => (
                    ipms,
                    BlowUpVerdict::AlmostSureFromLeftOfZero,
                    "initials charging (-inf, 0) blow up almost surely".into(),
                ),
                Comparison::Sub => (
                    ipms,
                    BlowUpVerdict::Dichotomy,
                    "from (p_minus, 0): blow-up or convergence to 0, both with positive probability"
                        .into(),
                ),
                Comparison::Critical => {
                    (ipms, BlowUpVerdict::PositiveProbability, critical_note.into())
                }
            }
        }
        NormalFormKind::SubPitchfork | NormalFormKind::SubHopfRadial => {
            let ipms = vec![ErgodicIpm::TrivialDelta];
            match cmp {
                Comparison::Super => (
                    ipms,
                    BlowUpVerdict::AlmostSure,
                    "delta unique for the stopped model; nonzero initials escape almost surely"
                        .into(),
                ),
                Comparison::Sub => (
                    ipms,
                    BlowUpVerdict::Dichotomy,
                    "delta unique for the stopped model; escape or convergence to 0, both with positive probability"
                        .into(),
                ),
                Comparison::Critical => {
                    (ipms, BlowUpVerdict::PositiveProbability, critical_note.into())
                }
            }
        }
        NormalFormKind::Fold => (
            vec![],
            BlowUpVerdict::AlmostSure,
            "divergence to -infinity in finite time almost surely, for all rates".into(),
        ),
    };

    Ok(RegimeReport {
        kind: spec.kind,
        growth_rate: growth,
        comparison: cmp,
        ergodic_ipms: ipms,
        blowup,
        notes,
    })
}

/// Monte Carlo estimate of the average growth rate at the common equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub lambda_hat: f64,
    pub std_err: f64,
    pub samples_used: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LyapunovSettings {
    /// Starting magnitude; small enough that the linearization dominates.
    pub x0: f64,
    /// Upper restart threshold (nonlinearity guard). `None` picks
    /// 0.1 sqrt(p_plus) for cubic kinds and 0.1 p_plus for the transcritical.
    pub guard: Option<f64>,
    /// Lower restart threshold, well above the underflow clamp.
    pub floor: f64,
    pub horizon: f64,
    pub n_runs: usize,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        Self {
            x0: 1e-6,
            guard: None,
            floor: 1e-250,
            horizon: 200.0,
            n_runs: 16,
        }
    }
}

/// Estimates the growth rate by following the PDMP from a tiny positive state
/// and averaging d(ln x)/dt, restarting at `x0` whenever the state leaves the
/// window (floor, guard) so the cubic/quadratic terms never contribute.
pub fn lyapunov_estimate(
    spec: &SwitchingSpec,
    settings: &LyapunovSettings,
    seed: u64,
) -> Result<GrowthEstimate> {
    spec.validate()?;
    if spec.kind == NormalFormKind::Fold {
        return Err(Error::Domain(
            "growth-rate estimation requires a common equilibrium at 0".into(),
        ));
    }
    if !(settings.x0 > 0.0) || !(settings.horizon > 0.0) || settings.n_runs == 0 {
        return Err(Error::InvalidSpec("invalid growth-estimate settings".into()));
    }
    let guard = settings.guard.unwrap_or_else(|| match spec.kind {
        NormalFormKind::Transcritical => 0.1 * spec.p_plus,
        _ => 0.1 * spec.p_plus.sqrt(),
    });
    if !(guard > settings.x0) {
        return Err(Error::InvalidSpec(format!(
            "guard radius {guard} must exceed x0 {}",
            settings.x0
        )));
    }

    // Sub-step cap keeps the per-step multiplier near 1 so overshoot past the
    // guard stays small.
    let p_max = f64::max(spec.p_minus.abs(), spec.p_plus);
    let dt_max = 0.05 / p_max.max(1e-6);

    let mut per_run = Vec::with_capacity(settings.n_runs);
    let mut segments = 0usize;
    for run in 0..settings.n_runs {
        let mut rng = SplitMix64::new(derive_seed(seed, run as u64));
        // start the chain from its stationary law
        let mut mode = if rng.next_unit() <= spec.chain_minus_mass() {
            Mode::Minus
        } else {
            Mode::Plus
        };
        let mut x = settings.x0;
        let mut t = 0.0;
        let mut log_sum = 0.0;
        segments += 1;
        while t < settings.horizon {
            let hold = crate::engine::sample_switch_time(spec.rate(mode), &mut rng);
            let seg_end = (t + hold).min(settings.horizon);
            let field = spec.field_spec(mode);
            while t < seg_end {
                let dt = dt_max.min(seg_end - t);
                let x_new = crate::normal_forms::flow(&field, x, dt)?
                    .value()
                    .ok_or_else(|| Error::Domain("blow-up inside the linearization window".into()))?;
                log_sum += (x_new / x).ln();
                t += dt;
                x = x_new;
                if x >= guard || x <= settings.floor {
                    x = settings.x0;
                    segments += 1;
                }
            }
            mode = mode.flip();
        }
        per_run.push(log_sum / settings.horizon);
    }

    if segments < 10 {
        return Err(Error::InsufficientSamples(format!(
            "only {segments} growth segments; need at least 10"
        )));
    }
    let n = per_run.len() as f64;
    let mean = per_run.iter().sum::<f64>() / n;
    let var = per_run.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(GrowthEstimate {
        lambda_hat: mean,
        std_err: (var / n).sqrt(),
        samples_used: segments,
    })
}

/// Fraction of ensemble runs that blew up, with their analytic escape times.
pub fn blowup_fraction(ensemble: &[Trajectory]) -> Result<(f64, Vec<f64>)> {
    if ensemble.is_empty() {
        return Err(Error::InvalidSpec("blow-up fraction of an empty ensemble".into()));
    }
    let times: Vec<f64> = ensemble
        .iter()
        .filter_map(|t| match t.status {
            TrajectoryStatus::BlewUp { t, .. } => Some(t),
            _ => None,
        })
        .collect();
    Ok((times.len() as f64 / ensemble.len() as f64, times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::StopCondition;

    fn spec(kind: NormalFormKind, pm: f64, pp: f64, lm: f64, lp: f64) -> SwitchingSpec {
        SwitchingSpec::new(kind, pm, pp, lm, lp).unwrap()
    }

    #[test]
    fn growth_rate_formula() {
        assert_eq!(average_growth_rate(-1.0, 1.0, 1.0, 1.0), 0.0);
        assert!((average_growth_rate(-1.0, 1.0, 2.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((average_growth_rate(-2.0, 1.0, 1.0, 3.0) - (-1.25)).abs() < 1e-15);
    }

    #[test]
    fn comparison_matches_growth_sign() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..1000 {
            let s = spec(
                NormalFormKind::SupPitchfork,
                rng.next_range(-3.0, -0.1),
                rng.next_range(0.1, 3.0),
                rng.next_range(0.1, 3.0),
                rng.next_range(0.1, 3.0),
            );
            let growth = average_growth_rate(s.p_minus, s.p_plus, s.lambda_minus, s.lambda_plus);
            match comparison(&s) {
                Comparison::Super => assert!(growth > 0.0),
                Comparison::Sub => assert!(growth < 0.0),
                Comparison::Critical => assert!(growth.abs() < 1e-11),
            }
        }
        // exact critical set from ratios
        assert_eq!(
            comparison(&spec(NormalFormKind::SupPitchfork, -1.0, 1.0, 1.0, 1.0)),
            Comparison::Critical
        );
    }

    #[test]
    fn classify_pitchfork() {
        let r = classify(&spec(NormalFormKind::SupPitchfork, -1.0, 1.0, 2.0, 1.0)).unwrap();
        assert_eq!(r.comparison, Comparison::Super);
        assert_eq!(
            r.ergodic_ipms,
            vec![ErgodicIpm::TrivialDelta, ErgodicIpm::MuPositive, ErgodicIpm::PiNegative]
        );
        assert_eq!(r.blowup, BlowUpVerdict::None);

        let r = classify(&spec(NormalFormKind::SupPitchfork, -1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(r.comparison, Comparison::Critical);
        assert_eq!(r.ergodic_ipms, vec![ErgodicIpm::TrivialDelta]);
    }

    #[test]
    fn classify_fold_and_transcritical() {
        let r = classify(&spec(NormalFormKind::Fold, -1.0, 1.0, 0.7, 2.0)).unwrap();
        assert_eq!(r.blowup, BlowUpVerdict::AlmostSure);
        assert!(r.ergodic_ipms.is_empty());

        let r = classify(&spec(NormalFormKind::Transcritical, -1.0, 1.0, 1.0, 3.0)).unwrap();
        assert_eq!(r.comparison, Comparison::Sub);
        assert_eq!(r.ergodic_ipms, vec![ErgodicIpm::TrivialDelta]);
        assert_eq!(r.blowup, BlowUpVerdict::Dichotomy);

        let r = classify(&spec(NormalFormKind::Transcritical, -1.0, 1.0, 2.0, 1.0)).unwrap();
        assert_eq!(r.ergodic_ipms, vec![ErgodicIpm::TrivialDelta, ErgodicIpm::MuPositive]);
        assert_eq!(r.blowup, BlowUpVerdict::AlmostSureFromLeftOfZero);
    }

    #[test]
    fn classify_is_pure() {
        let s = spec(NormalFormKind::SubPitchfork, -1.0, 2.0, 1.5, 0.5);
        assert_eq!(classify(&s).unwrap(), classify(&s).unwrap());
    }

    #[test]
    fn report_serializes_with_stable_names() {
        let r = classify(&spec(NormalFormKind::SupPitchfork, -1.0, 1.0, 2.0, 1.0)).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["comparison"], "super");
        assert_eq!(json["ergodic_ipms"][0], "trivial_delta");
        assert_eq!(json["blowup"], "none");
        assert!(json["growth_rate"].is_number());
    }

    #[test]
    fn lyapunov_matches_formula() {
        let cases: [(SwitchingSpec, f64); 3] = [
            (spec(NormalFormKind::SupPitchfork, -1.0, 1.0, 2.0, 1.0), 1.0 / 3.0),
            (spec(NormalFormKind::SupPitchfork, -1.0, 1.0, 1.0, 1.0), 0.0),
            (spec(NormalFormKind::SupPitchfork, -2.0, 1.0, 1.0, 3.0), -1.25),
        ];
        for (s, expect) in cases {
            let est = lyapunov_estimate(&s, &LyapunovSettings::default(), 4242).unwrap();
            let tol = f64::max(3.0 * est.std_err, 0.1 * expect.abs() + 0.02);
            assert!(
                (est.lambda_hat - expect).abs() <= tol,
                "estimate {} vs {} (tol {tol})",
                est.lambda_hat,
                expect
            );
        }
    }

    #[test]
    fn blowup_fraction_of_fold_ensemble() {
        let s = spec(NormalFormKind::Fold, -1.0, 1.0, 1.0, 1.0);
        let ens = crate::engine::simulate_ensemble(
            &s,
            &[(0.0, Mode::Plus)],
            &StopCondition::with_horizon(1e4),
            100,
            17,
        )
        .unwrap();
        let (frac, times) = blowup_fraction(&ens).unwrap();
        assert_eq!(frac, 1.0);
        assert!(times.iter().all(|t| t.is_finite() && *t > 0.0));
        assert!(blowup_fraction(&[]).is_err());
    }
}
