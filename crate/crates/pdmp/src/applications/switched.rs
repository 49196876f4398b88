//! Fixed-step RK4 integrator for switched vector fields on R^d.
//!
//! The application models have no closed-form flows, so between exponential
//! switch events the state advances by classical fourth-order Runge-Kutta.
//! Switch, record and horizon times are hit exactly by shortening the final
//! step before each event; the randomness is identical in structure to the
//! exact engine (one exponential draw per holding time).

use serde::Serialize;

use crate::engine::{sample_switch_time, Mode};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const DEFAULT_STEP_SIZE: f64 = 1e-3;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e6;

/// A switched system given by evaluable fields instead of closed forms.
pub struct GeneralSwitchedSpec<F>
where
    F: Fn(Mode, &[f64], &mut [f64]) -> Result<()>,
{
    /// Writes f_mode(x) into the output slice.
    pub field: F,
    /// Rate of leaving mode -1.
    pub lambda_minus: f64,
    /// Rate of leaving mode +1.
    pub lambda_plus: f64,
    pub step_size: f64,
    /// Euclidean-norm threshold for reporting numeric escape. This is a
    /// diagnostic cutoff, not an analytic blow-up time.
    pub escape_radius: f64,
}

impl<F> GeneralSwitchedSpec<F>
where
    F: Fn(Mode, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(field: F, lambda_minus: f64, lambda_plus: f64) -> Self {
        Self {
            field,
            lambda_minus,
            lambda_plus,
            step_size: DEFAULT_STEP_SIZE,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_minus > 0.0 && self.lambda_plus > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "switching rates must be positive, got ({}, {})",
                self.lambda_minus, self.lambda_plus
            )));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.escape_radius > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "escape radius must be positive, got {}",
                self.escape_radius
            )));
        }
        Ok(())
    }

    fn rate(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Minus => self.lambda_minus,
            Mode::Plus => self.lambda_plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GeneralStatus {
    HorizonReached,
    /// The norm exceeded the escape radius at time t.
    Escaped { t: f64 },
}

/// One recorded state, taken at a multiple of the recording interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
    pub mode: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralTrajectory {
    pub samples: Vec<Sample>,
    pub switch_times: Vec<f64>,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    pub final_mode: i8,
    pub status: GeneralStatus,
    pub rng_seed: u64,
}

fn rk4_step<F>(field: &F, mode: Mode, x: &[f64], dt: f64, t: f64) -> Result<Vec<f64>>
where
    F: Fn(Mode, &[f64], &mut [f64]) -> Result<()>,
{
    let n = x.len();
    let context = |e: Error| {
        Error::Domain(format!("field evaluation failed at t = {t}, state {x:?}: {e}"))
    };
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    field(mode, x, &mut k1).map_err(context)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    field(mode, &tmp, &mut k2).map_err(context)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    field(mode, &tmp, &mut k3).map_err(context)?;
    for i in 0..n {
        tmp[i] = x[i] + dt * k3[i];
    }
    field(mode, &tmp, &mut k4).map_err(context)?;
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Integrates the switched system from `x0` in mode `i0` up to `horizon`.
///
/// If `record_dt` is given, the state is recorded at t = 0, record_dt,
/// 2*record_dt, ... (exact times; steps are shortened to land on them).
pub fn switched_simulate_general<F>(
    spec: &GeneralSwitchedSpec<F>,
    x0: &[f64],
    i0: Mode,
    horizon: f64,
    record_dt: Option<f64>,
    seed: u64,
) -> Result<GeneralTrajectory>
where
    F: Fn(Mode, &[f64], &mut [f64]) -> Result<()>,
{
    spec.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::InvalidSpec(format!("horizon must be positive, got {horizon}")));
    }
    if let Some(dt) = record_dt {
        if !(dt > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "recording interval must be positive, got {dt}"
            )));
        }
    }

    let mut rng = SplitMix64::new(seed);
    let mut t = 0.0_f64;
    let mut x = x0.to_vec();
    let mut mode = i0;
    let mut next_switch = sample_switch_time(spec.rate(mode), &mut rng);
    let mut next_record = record_dt.map(|_| 0.0_f64);
    let mut samples = Vec::new();
    let mut switch_times = Vec::new();
    let mut status = GeneralStatus::HorizonReached;

    loop {
        if let (Some(tr), Some(dt)) = (next_record, record_dt) {
            if t == tr {
                samples.push(Sample { t, state: x.clone(), mode: mode.as_i8() });
                next_record = Some(tr + dt);
            }
        }
        if t >= horizon {
            break;
        }
        if t == next_switch {
            switch_times.push(t);
            mode = mode.flip();
            next_switch = t + sample_switch_time(spec.rate(mode), &mut rng);
            continue;
        }
        let mut target = (t + spec.step_size).min(horizon).min(next_switch);
        if let Some(tr) = next_record {
            target = target.min(tr);
        }
        x = rk4_step(&spec.field, mode, &x, target - t, t)?;
        t = target;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > spec.escape_radius {
            status = GeneralStatus::Escaped { t };
            break;
        }
    }

    Ok(GeneralTrajectory {
        samples,
        switch_times,
        final_time: t,
        final_state: x,
        final_mode: mode.as_i8(),
        status,
        rng_seed: seed,
    })
}

/// Per-mode occupation histogram of one recorded state component.
pub fn general_occupation_histogram(
    traj: &GeneralTrajectory,
    component: usize,
    bins: usize,
    lo: f64,
    hi: f64,
    burn_in: f64,
) -> Result<crate::engine::Histogram> {
    if traj.status != GeneralStatus::HorizonReached {
        return Err(Error::Domain(
            "occupation statistics require a run that reached its horizon".into(),
        ));
    }
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidSpec(format!(
            "need a nonempty range and at least one bin, got ({lo}, {hi}) with {bins} bins"
        )));
    }
    let mut counts_minus = vec![0u64; bins];
    let mut counts_plus = vec![0u64; bins];
    let mut out_of_range = 0u64;
    let mut samples = 0u64;
    let width = (hi - lo) / bins as f64;
    for s in &traj.samples {
        if s.t < burn_in {
            continue;
        }
        samples += 1;
        let v = s.state[component];
        if v < lo || v >= hi {
            out_of_range += 1;
            continue;
        }
        let b = (((v - lo) / width) as usize).min(bins - 1);
        if s.mode == -1 {
            counts_minus[b] += 1;
        } else {
            counts_plus[b] += 1;
        }
    }
    if samples < 100 {
        return Err(Error::InsufficientSamples(format!(
            "only {samples} recorded states after burn-in; need at least 100"
        )));
    }
    Ok(crate::engine::Histogram {
        lo,
        hi,
        bins,
        counts_minus,
        counts_plus,
        out_of_range,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::rm::{rm_coexistence_equilibrium, rm_field, RMParams};
    use crate::densities::{DensityModel, ModeSelect};
    use crate::engine::SwitchingSpec;
    use crate::normal_forms::NormalFormKind;

    #[test]
    fn zero_fields_give_a_constant_trajectory() {
        let spec = GeneralSwitchedSpec::new(
            |_mode, _x: &[f64], out: &mut [f64]| {
                out.fill(0.0);
                Ok(())
            },
            1.0,
            1.0,
        );
        let traj =
            switched_simulate_general(&spec, &[0.3, -0.7], Mode::Minus, 10.0, Some(1.0), 5).unwrap();
        assert_eq!(traj.status, GeneralStatus::HorizonReached);
        assert_eq!(traj.final_state, vec![0.3, -0.7]);
        assert_eq!(traj.samples.len(), 11);
        for s in &traj.samples {
            assert_eq!(s.state, vec![0.3, -0.7]);
        }
    }

    #[test]
    fn determinism() {
        let make = || {
            GeneralSwitchedSpec::new(
                |mode: Mode, x: &[f64], out: &mut [f64]| {
                    out[0] = mode.as_i8() as f64 * x[0] - x[0] * x[0] * x[0];
                    Ok(())
                },
                1.0,
                2.0,
            )
        };
        let a = switched_simulate_general(&make(), &[0.4], Mode::Plus, 50.0, Some(0.5), 77).unwrap();
        let b = switched_simulate_general(&make(), &[0.4], Mode::Plus, 50.0, Some(0.5), 77).unwrap();
        assert_eq!(a, b);
    }

    // both modes carry the same field so the path is a plain ODE solution
    fn rm_endpoint(step: f64) -> (f64, f64) {
        let params = RMParams::with_p(2.2);
        let mut spec = GeneralSwitchedSpec::new(
            move |_mode, x: &[f64], out: &mut [f64]| {
                let (dx, dy) = rm_field(&params, (x[0], x[1]));
                out[0] = dx;
                out[1] = dy;
                Ok(())
            },
            1.0,
            1.0,
        );
        spec.step_size = step;
        let traj = switched_simulate_general(&spec, &[0.8, 0.6], Mode::Minus, 10.0, None, 9).unwrap();
        (traj.final_state[0], traj.final_state[1])
    }

    #[test]
    fn rk4_is_fourth_order_on_a_smooth_orbit() {
        let reference = rm_endpoint(1e-4);
        let coarse = rm_endpoint(4e-2);
        let fine = rm_endpoint(2e-2);
        let err = |(x, y): (f64, f64)| ((x - reference.0).powi(2) + (y - reference.1).powi(2)).sqrt();
        let ratio = err(coarse) / err(fine);
        assert!(ratio >= 8.0, "halving the step only improved the error {ratio}x");
    }

    #[test]
    fn escape_is_reported() {
        let mut spec = GeneralSwitchedSpec::new(
            |_mode, x: &[f64], out: &mut [f64]| {
                out[0] = x[0] * x[0] + 1.0;
                Ok(())
            },
            1.0,
            1.0,
        );
        spec.escape_radius = 100.0;
        let traj = switched_simulate_general(&spec, &[1.0], Mode::Minus, 10.0, None, 1).unwrap();
        match traj.status {
            GeneralStatus::Escaped { t } => assert!(t < 2.0),
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn field_errors_carry_context() {
        let spec = GeneralSwitchedSpec::new(
            |_mode, _x: &[f64], _out: &mut [f64]| Err(Error::Domain("boom".into())),
            1.0,
            1.0,
        );
        let err = switched_simulate_general(&spec, &[1.0], Mode::Minus, 10.0, None, 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("t = 0") && msg.contains("boom"), "{msg}");
    }

    #[test]
    fn cubic_pair_occupation_matches_analytic_density() {
        // cross-validates RK4 against the exact closed-form engine
        let switching =
            SwitchingSpec::new(NormalFormKind::SupPitchfork, -1.0, 1.0, 2.0, 1.0).unwrap();
        let model = DensityModel::new(&switching, 1e-10).unwrap();
        let spec = GeneralSwitchedSpec::new(
            |mode: Mode, x: &[f64], out: &mut [f64]| {
                let p = mode.as_i8() as f64;
                out[0] = p * x[0] - x[0] * x[0] * x[0];
                Ok(())
            },
            2.0,
            1.0,
        );
        let traj =
            switched_simulate_general(&spec, &[0.5], Mode::Plus, 3e4, Some(0.1), 424_242).unwrap();
        let hist = general_occupation_histogram(&traj, 0, 40, 0.0, 1.0, 100.0).unwrap();
        let l1 = model.l1_distance(&hist, ModeSelect::Marginal).unwrap();
        assert!(l1 < 0.07, "L1 distance {l1}");
    }

    #[test]
    fn switched_rm_concentrates_near_coexistence() {
        // mostly below the Hopf point (p = 1.5), brief excursions above
        let below = RMParams::with_p(1.5);
        let above = RMParams::with_p(2.5);
        let spec = GeneralSwitchedSpec::new(
            move |mode: Mode, x: &[f64], out: &mut [f64]| {
                let params = match mode {
                    Mode::Minus => below,
                    Mode::Plus => above,
                };
                let (dx, dy) = rm_field(&params, (x[0], x[1]));
                out[0] = dx;
                out[1] = dy;
                Ok(())
            },
            0.1,
            10.0,
        );
        let eq = rm_coexistence_equilibrium(1.5).unwrap();
        let traj =
            switched_simulate_general(&spec, &[eq.0, eq.1], Mode::Minus, 1e4, Some(1.0), 8).unwrap();
        assert_eq!(traj.status, GeneralStatus::HorizonReached);
        let late: Vec<_> = traj.samples.iter().filter(|s| s.t >= 5e3).collect();
        let mean_dist = late
            .iter()
            .map(|s| ((s.state[0] - eq.0).powi(2) + (s.state[1] - eq.1).powi(2)).sqrt())
            .sum::<f64>()
            / late.len() as f64;
        assert!(mean_dist < 0.1, "mean distance {mean_dist}");
    }

    #[test]
    fn rm_stays_nonnegative() {
        let spec = GeneralSwitchedSpec::new(
            |mode: Mode, x: &[f64], out: &mut [f64]| {
                let p = if mode == Mode::Minus { 1.5 } else { 2.5 };
                let (dx, dy) = rm_field(&RMParams::with_p(p), (x[0], x[1]));
                out[0] = dx;
                out[1] = dy;
                Ok(())
            },
            1.0,
            1.0,
        );
        let traj =
            switched_simulate_general(&spec, &[0.5, 1.0], Mode::Minus, 1e3, Some(0.5), 13).unwrap();
        for s in &traj.samples {
            assert!(s.state[0] >= -1e-9 && s.state[1] >= -1e-9, "negative state {s:?}");
        }
    }
}
