//! Event-exact simulation of the two-mode switching process.
//!
//! Between switches the state follows the closed-form flow of the active
//! normal form, holding times are exponential with the mode's rate, and
//! blow-ups are detected from the analytic escape time of the current mode.
//! No time discretization enters anywhere.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_forms::{self, BlowUpDirection, FlowResult, NormalFormKind, NormalFormSpec};
use crate::rng::{derive_seed, SplitMix64};

/// The two states of the driving chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Minus,
    Plus,
}

impl Mode {
    pub fn flip(self) -> Self {
        match self {
            Self::Minus => Self::Plus,
            Self::Plus => Self::Minus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Self::Minus => -1,
            Self::Plus => 1,
        }
    }

    pub fn from_i8(i: i8) -> Result<Self> {
        match i {
            -1 => Ok(Self::Minus),
            1 => Ok(Self::Plus),
            other => Err(Error::InvalidSpec(format!("mode must be -1 or +1, got {other}"))),
        }
    }
}

/// Parameters of the two-mode PDMP: normal-form kind, the parameter value in
/// each mode, and the transition rates of the driving chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSpec {
    pub kind: NormalFormKind,
    pub p_minus: f64,
    pub p_plus: f64,
    /// Rate of switching -1 -> +1.
    pub lambda_minus: f64,
    /// Rate of switching +1 -> -1.
    pub lambda_plus: f64,
}

impl SwitchingSpec {
    pub fn new(
        kind: NormalFormKind,
        p_minus: f64,
        p_plus: f64,
        lambda_minus: f64,
        lambda_plus: f64,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            p_minus,
            p_plus,
            lambda_minus,
            lambda_plus,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_minus < 0.0) || !self.p_minus.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "p_minus must be negative and finite, got {}",
                self.p_minus
            )));
        }
        if !(self.p_plus > 0.0) || !self.p_plus.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "p_plus must be positive and finite, got {}",
                self.p_plus
            )));
        }
        if !(self.lambda_minus > 0.0) || !self.lambda_minus.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "lambda_minus must be a positive rate, got {}",
                self.lambda_minus
            )));
        }
        if !(self.lambda_plus > 0.0) || !self.lambda_plus.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "lambda_plus must be a positive rate, got {}",
                self.lambda_plus
            )));
        }
        Ok(())
    }

    pub fn field_spec(&self, mode: Mode) -> NormalFormSpec {
        NormalFormSpec {
            kind: self.kind,
            p: match mode {
                Mode::Minus => self.p_minus,
                Mode::Plus => self.p_plus,
            },
        }
    }

    pub fn rate(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Minus => self.lambda_minus,
            Mode::Plus => self.lambda_plus,
        }
    }

    /// Stationary probability the chain assigns to mode -1.
    pub fn chain_minus_mass(&self) -> f64 {
        self.lambda_plus / (self.lambda_plus + self.lambda_minus)
    }
}

/// Termination conditions of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopCondition {
    pub horizon: f64,
    /// Numeric escape threshold, for diagnostics only; blow-up itself is
    /// always detected from the analytic escape time.
    pub blowup_guard: f64,
    /// A run whose state drops strictly below this magnitude (coming from
    /// above) is reported as absorbed at 0. Set to 0 to disable.
    pub absorption_guard: f64,
}

impl StopCondition {
    pub fn with_horizon(horizon: f64) -> Self {
        Self {
            horizon,
            blowup_guard: 1e6,
            absorption_guard: 1e-12,
        }
    }

    fn validate(&self, spec: &SwitchingSpec) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        let needed = f64::max(f64::max(self.p_abs_max(spec), 1.0), 0.0);
        if !(self.blowup_guard > needed) {
            return Err(Error::InvalidSpec(format!(
                "blowup_guard must exceed max(|p_minus|, p_plus, 1) = {needed}, got {}",
                self.blowup_guard
            )));
        }
        if !(self.absorption_guard >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "absorption_guard must be nonnegative, got {}",
                self.absorption_guard
            )));
        }
        Ok(())
    }

    fn p_abs_max(&self, spec: &SwitchingSpec) -> f64 {
        f64::max(spec.p_minus.abs(), spec.p_plus)
    }
}

/// One flow interval of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub x_start: f64,
    pub mode: i8,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    HorizonReached,
    BlewUp { t: f64, direction: BlowUpDirection },
    Absorbed { t: f64 },
}

/// Event-exact record of one realization: the flow segments between switches
/// plus the terminal status. Memory scales with the number of switches, not
/// with the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub spec: SwitchingSpec,
    pub segments: Vec<Segment>,
    pub status: TrajectoryStatus,
    pub rng_seed: u64,
}

impl Trajectory {
    /// Time at which the record ends (horizon, blow-up, or absorption).
    pub fn end_time(&self) -> f64 {
        match self.status {
            TrajectoryStatus::HorizonReached => self
                .segments
                .last()
                .map(|s| s.t_start + s.duration)
                .unwrap_or(0.0),
            TrajectoryStatus::BlewUp { t, .. } => t,
            TrajectoryStatus::Absorbed { t } => t,
        }
    }

    /// Exact state at time `t` within the recorded span.
    pub fn state_at(&self, t: f64) -> Result<(f64, Mode)> {
        if t < 0.0 || t > self.end_time() {
            return Err(Error::Domain(format!(
                "time {t} outside recorded span [0, {}]",
                self.end_time()
            )));
        }
        let idx = match self
            .segments
            .binary_search_by(|s| s.t_start.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let seg = &self.segments[idx];
        let mode = Mode::from_i8(seg.mode)?;
        let field = self.spec.field_spec(mode);
        match normal_forms::flow(&field, seg.x_start, t - seg.t_start)? {
            FlowResult::Value(x) => Ok((x, mode)),
            FlowResult::BlowUp { t_star, .. } => Err(Error::Domain(format!(
                "state at {t} is past the blow-up time {}",
                seg.t_start + t_star
            ))),
        }
    }

    /// Checks segment contiguity, state continuity and mode alternation.
    pub fn validate(&self) -> Result<()> {
        let mut t = 0.0;
        for (k, seg) in self.segments.iter().enumerate() {
            if (seg.t_start - t).abs() > 1e-9 * (1.0 + t.abs()) {
                return Err(Error::InvalidSpec(format!(
                    "segment {k} starts at {} but previous ended at {t}",
                    seg.t_start
                )));
            }
            if k > 0 {
                let prev = &self.segments[k - 1];
                if seg.mode == prev.mode {
                    return Err(Error::InvalidSpec(format!("segment {k} repeats mode {}", seg.mode)));
                }
                let mode = Mode::from_i8(prev.mode)?;
                let field = self.spec.field_spec(mode);
                let x_end = normal_forms::flow(&field, prev.x_start, prev.duration)?
                    .value()
                    .ok_or_else(|| {
                        Error::InvalidSpec(format!("segment {} ends in blow-up", k - 1))
                    })?;
                if (x_end - seg.x_start).abs() > 1e-9 * (1.0 + x_end.abs()) {
                    return Err(Error::InvalidSpec(format!(
                        "segment {k} starts at x = {} but flow gives {x_end}",
                        seg.x_start
                    )));
                }
            }
            t = seg.t_start + seg.duration;
        }
        let expected_end = self.end_time();
        if (t - expected_end).abs() > 1e-9 * (1.0 + expected_end.abs()) {
            return Err(Error::InvalidSpec(format!(
                "segments cover [0, {t}] but status says end at {expected_end}"
            )));
        }
        Ok(())
    }
}

/// Inverse CDF of the exponential distribution: -ln(u)/rate for u in (0,1].
pub fn exp_inverse_cdf(rate: f64, u: f64) -> f64 {
    -u.ln() / rate
}

/// One Exp(rate) holding time from the generator.
pub fn sample_switch_time(rate: f64, rng: &mut SplitMix64) -> f64 {
    exp_inverse_cdf(rate, rng.next_unit())
}

// 0 is invariant for every kind that contains it; below this magnitude the
// state is clamped to exactly 0 to avoid subnormal arithmetic.
const UNDERFLOW_CLAMP: f64 = 1e-300;

/// Simulates one trajectory of the PDMP.
///
/// Event ordering inside a segment: the analytic blow-up time of the active
/// mode is computed first, and wins against the drawn switch time if it comes
/// earlier. Identical seeds give bitwise-identical trajectories.
pub fn simulate(
    spec: &SwitchingSpec,
    x0: f64,
    i0: Mode,
    stop: &StopCondition,
    seed: u64,
) -> Result<Trajectory> {
    spec.validate()?;
    stop.validate(spec)?;
    let mut rng = SplitMix64::new(seed);
    let mut segments = Vec::new();
    let mut t = 0.0;
    let mut x = x0;
    let mut mode = i0;
    let initially_below_guard = x0.abs() < stop.absorption_guard;

    let status = loop {
        let field = spec.field_spec(mode);
        // touch the domain check before any random draw
        let _ = normal_forms::eval_field(&field, x)?;
        let hold = sample_switch_time(spec.rate(mode), &mut rng);
        let remaining = stop.horizon - t;
        let step = hold.min(remaining);

        if let Some((t_star, direction)) = normal_forms::blow_up(&field, x)? {
            if t_star <= step {
                segments.push(Segment {
                    t_start: t,
                    x_start: x,
                    mode: mode.as_i8(),
                    duration: t_star,
                });
                break TrajectoryStatus::BlewUp {
                    t: t + t_star,
                    direction,
                };
            }
        }

        segments.push(Segment {
            t_start: t,
            x_start: x,
            mode: mode.as_i8(),
            duration: step,
        });
        let mut x_new = normal_forms::flow(&field, x, step)?.unwrap_value();
        if x_new != 0.0 && x_new.abs() < UNDERFLOW_CLAMP {
            x_new = 0.0;
        }
        t += step;

        let absorbed_now = x != 0.0
            && !initially_below_guard
            && (x_new == 0.0 || x_new.abs() < stop.absorption_guard);
        x = x_new;
        if absorbed_now {
            break TrajectoryStatus::Absorbed { t };
        }
        if step == remaining {
            break TrajectoryStatus::HorizonReached;
        }
        mode = mode.flip();
    };

    Ok(Trajectory {
        spec: *spec,
        segments,
        status,
        rng_seed: seed,
    })
}

/// `n` independent trajectories with per-run seeds derived from `base_seed`.
///
/// Initial conditions cycle through `initial_points`. Runs are independent,
/// so the ensemble may be produced in parallel; results are ordered by run
/// index either way. `PDMP_THREADS` caps the worker count.
pub fn simulate_ensemble(
    spec: &SwitchingSpec,
    initial_points: &[(f64, Mode)],
    stop: &StopCondition,
    n: usize,
    base_seed: u64,
) -> Result<Vec<Trajectory>> {
    if n == 0 {
        return Err(Error::InvalidSpec("ensemble size must be at least 1".into()));
    }
    if initial_points.is_empty() {
        return Err(Error::InvalidSpec("need at least one initial point".into()));
    }
    let threads = ensemble_threads(n);
    if threads <= 1 {
        return (0..n)
            .map(|k| {
                let (x0, i0) = initial_points[k % initial_points.len()];
                simulate(spec, x0, i0, stop, derive_seed(base_seed, k as u64))
            })
            .collect();
    }

    let mut out: Vec<Option<Result<Trajectory>>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (c, slot) in out.chunks_mut(chunk).enumerate() {
            let start = c * chunk;
            scope.spawn(move || {
                for (j, cell) in slot.iter_mut().enumerate() {
                    let k = start + j;
                    let (x0, i0) = initial_points[k % initial_points.len()];
                    *cell = Some(simulate(spec, x0, i0, stop, derive_seed(base_seed, k as u64)));
                }
            });
        }
    });
    out.into_iter().map(|r| r.unwrap()).collect()
}

fn ensemble_threads(n: usize) -> usize {
    let hw = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
    let cap = std::env::var("PDMP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(hw);
    cap.min(hw).min(n)
}

/// Per-mode and marginal occupation histogram of a single trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
    pub counts_minus: Vec<u64>,
    pub counts_plus: Vec<u64>,
    /// Samples that fell outside [lo, hi).
    pub out_of_range: u64,
    pub samples: u64,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    /// Density of the mode -1 component; integrates to the fraction of
    /// samples spent in that mode (not to 1).
    pub fn density_minus(&self, bin: usize) -> f64 {
        self.counts_minus[bin] as f64 / (self.samples as f64 * self.bin_width())
    }

    pub fn density_plus(&self, bin: usize) -> f64 {
        self.counts_plus[bin] as f64 / (self.samples as f64 * self.bin_width())
    }

    pub fn density_marginal(&self, bin: usize) -> f64 {
        self.density_minus(bin) + self.density_plus(bin)
    }

    /// Total probability mass inside [lo, hi).
    pub fn total_mass(&self) -> f64 {
        let in_range: u64 = self.samples - self.out_of_range;
        in_range as f64 / self.samples as f64
    }

    pub fn mode_mass_minus(&self) -> f64 {
        self.counts_minus.iter().sum::<u64>() as f64 / self.samples as f64
    }

    pub fn mode_mass_plus(&self) -> f64 {
        self.counts_plus.iter().sum::<u64>() as f64 / self.samples as f64
    }
}

/// Samples `traj` at `burn_in + k * sample_dt` using exact within-segment
/// flow evaluation and bins the values.
pub fn occupation_histogram(
    traj: &Trajectory,
    bins: usize,
    range: (f64, f64),
    burn_in: f64,
    sample_dt: f64,
) -> Result<Histogram> {
    if traj.status != TrajectoryStatus::HorizonReached {
        return Err(Error::Domain(
            "occupation histogram requires a trajectory that reached its horizon".into(),
        ));
    }
    if bins == 0 || !(range.1 > range.0) || !(sample_dt > 0.0) {
        return Err(Error::InvalidSpec("invalid histogram settings".into()));
    }
    let end = traj.end_time();
    if burn_in >= end {
        return Err(Error::InvalidSpec(format!(
            "burn-in {burn_in} is not below the horizon {end}"
        )));
    }
    let n_samples = ((end - burn_in) / sample_dt).floor() as u64 + 1;
    if n_samples < 100 {
        return Err(Error::InsufficientSamples(format!(
            "only {n_samples} occupation samples; need at least 100"
        )));
    }

    let width = (range.1 - range.0) / bins as f64;
    let mut hist = Histogram {
        lo: range.0,
        hi: range.1,
        bins,
        counts_minus: vec![0; bins],
        counts_plus: vec![0; bins],
        out_of_range: 0,
        samples: 0,
    };

    let mut seg_idx = 0usize;
    for k in 0..n_samples {
        let t = burn_in + k as f64 * sample_dt;
        if t > end {
            break;
        }
        while seg_idx + 1 < traj.segments.len()
            && traj.segments[seg_idx + 1].t_start <= t
        {
            seg_idx += 1;
        }
        let seg = &traj.segments[seg_idx];
        let mode = Mode::from_i8(seg.mode)?;
        let field = traj.spec.field_spec(mode);
        let x = normal_forms::flow(&field, seg.x_start, t - seg.t_start)?.unwrap_value();
        hist.samples += 1;
        if x >= range.0 && x < range.1 {
            let bin = (((x - range.0) / width) as usize).min(bins - 1);
            match mode {
                Mode::Minus => hist.counts_minus[bin] += 1,
                Mode::Plus => hist.counts_plus[bin] += 1,
            }
        } else {
            hist.out_of_range += 1;
        }
    }
    Ok(hist)
}

/// Default decorrelation heuristics for occupation sampling.
pub fn default_burn_in(spec: &SwitchingSpec) -> f64 {
    100.0 / f64::min(spec.lambda_minus, spec.lambda_plus)
}

pub fn default_sample_dt(spec: &SwitchingSpec) -> f64 {
    0.1 / f64::max(spec.lambda_minus, spec.lambda_plus)
}

/// Planar realization of a Hopf normal form: stochastic radius, deterministic
/// unit-speed rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarTrajectory {
    pub radial: Trajectory,
    pub theta0: f64,
}

impl PlanarTrajectory {
    /// Angle at time t, exactly (theta0 + t) mod 2 pi.
    pub fn theta_at(&self, t: f64) -> f64 {
        (self.theta0 + t).rem_euclid(2.0 * std::f64::consts::PI)
    }

    pub fn state_at(&self, t: f64) -> Result<(f64, f64, Mode)> {
        let (r, mode) = self.radial.state_at(t)?;
        Ok((self.theta_at(t), r, mode))
    }
}

/// Simulates the polar lift of a Hopf-kind PDMP.
pub fn hopf_simulate(
    spec: &SwitchingSpec,
    theta0: f64,
    r0: f64,
    i0: Mode,
    stop: &StopCondition,
    seed: u64,
) -> Result<PlanarTrajectory> {
    if !spec.kind.is_radial() {
        return Err(Error::InvalidSpec(format!(
            "hopf_simulate requires a Hopf radial kind, got {}",
            spec.kind.name()
        )));
    }
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("initial radius must be positive, got {r0}")));
    }
    Ok(PlanarTrajectory {
        radial: simulate(spec, r0, i0, stop, seed)?,
        theta0: theta0.rem_euclid(2.0 * std::f64::consts::PI),
    })
}

/// Writes a trajectory as CSV: `t_start,x_start,mode,duration` rows and a
/// final `# status,...` footer.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t_start,x_start,mode,duration")?;
    for seg in &traj.segments {
        writeln!(w, "{},{},{},{}", seg.t_start, seg.x_start, seg.mode, seg.duration)?;
    }
    match traj.status {
        TrajectoryStatus::HorizonReached => writeln!(w, "# status,horizon_reached,,"),
        TrajectoryStatus::BlewUp { t, direction } => {
            let d = match direction {
                BlowUpDirection::PlusInfinity => "+",
                BlowUpDirection::MinusInfinity => "-",
            };
            writeln!(w, "# status,blew_up,{t},{d}")
        }
        TrajectoryStatus::Absorbed { t } => writeln!(w, "# status,absorbed,{t},"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pitchfork_spec() -> SwitchingSpec {
        SwitchingSpec::new(NormalFormKind::SupPitchfork, -1.0, 1.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn exponential_inverse_cdf_values() {
        let e = std::f64::consts::E;
        assert_eq!(exp_inverse_cdf(1.0, 1.0 / e), 1.0);
        assert_eq!(exp_inverse_cdf(2.0, 1.0 / e), 0.5);
    }

    #[test]
    fn exponential_empirical_mean() {
        let mut rng = SplitMix64::new(31);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_switch_time(3.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0 / 3.0).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn common_equilibrium_pins_trajectory() {
        let traj = simulate(
            &pitchfork_spec(),
            0.0,
            Mode::Plus,
            &StopCondition::with_horizon(10.0),
            7,
        )
        .unwrap();
        assert_eq!(traj.status, TrajectoryStatus::HorizonReached);
        assert!(traj.segments.iter().all(|s| s.x_start == 0.0));
        traj.validate().unwrap();
    }

    #[test]
    fn identical_seeds_identical_trajectories() {
        let stop = StopCondition::with_horizon(50.0);
        let a = simulate(&pitchfork_spec(), 0.5, Mode::Minus, &stop, 12345).unwrap();
        let b = simulate(&pitchfork_spec(), 0.5, Mode::Minus, &stop, 12345).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trajectories_validate() {
        let stop = StopCondition::with_horizon(200.0);
        for seed in 0..50 {
            let traj = simulate(&pitchfork_spec(), 0.5, Mode::Minus, &stop, seed).unwrap();
            traj.validate().unwrap();
        }
    }

    #[test]
    fn modes_alternate_strictly() {
        let traj = simulate(
            &pitchfork_spec(),
            0.5,
            Mode::Minus,
            &StopCondition::with_horizon(100.0),
            3,
        )
        .unwrap();
        assert!(traj.segments.len() > 10);
        for pair in traj.segments.windows(2) {
            assert_eq!(pair[0].mode, -pair[1].mode);
        }
    }

    #[test]
    fn mode_occupation_matches_chain_marginal() {
        // long-run fraction of time in mode -1 -> lambda_plus / (lambda_plus + lambda_minus)
        let spec = pitchfork_spec();
        let traj = simulate(&spec, 0.5, Mode::Minus, &StopCondition::with_horizon(20_000.0), 11)
            .unwrap();
        let minus_time: f64 = traj
            .segments
            .iter()
            .filter(|s| s.mode == -1)
            .map(|s| s.duration)
            .sum();
        let frac = minus_time / traj.end_time();
        let expect = spec.chain_minus_mass();
        assert!((frac - expect).abs() < 0.02, "fraction {frac} vs {expect}");
    }

    #[test]
    fn ensemble_determinism_and_reduction() {
        let spec = pitchfork_spec();
        let stop = StopCondition::with_horizon(20.0);
        let pts = [(0.5, Mode::Minus)];
        let e1 = simulate_ensemble(&spec, &pts, &stop, 8, 99).unwrap();
        let e2 = simulate_ensemble(&spec, &pts, &stop, 8, 99).unwrap();
        assert_eq!(e1, e2);
        let single = simulate_ensemble(&spec, &pts, &stop, 1, 99).unwrap();
        assert_eq!(
            single[0],
            simulate(&spec, 0.5, Mode::Minus, &stop, derive_seed(99, 0)).unwrap()
        );
    }

    #[test]
    fn state_at_is_continuous_across_segments() {
        let traj = simulate(
            &pitchfork_spec(),
            0.5,
            Mode::Minus,
            &StopCondition::with_horizon(50.0),
            21,
        )
        .unwrap();
        for seg in traj.segments.iter().skip(1) {
            let (x, _) = traj.state_at(seg.t_start).unwrap();
            assert!((x - seg.x_start).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn histogram_of_pinned_trajectory() {
        let traj = simulate(
            &pitchfork_spec(),
            0.0,
            Mode::Plus,
            &StopCondition::with_horizon(100.0),
            5,
        )
        .unwrap();
        let hist = occupation_histogram(&traj, 10, (-1.0, 1.0), 1.0, 0.1).unwrap();
        assert_eq!(hist.total_mass(), 1.0);
        let zero_bin = 5; // [-1,1) in 10 bins: bin 5 covers [0, 0.2)
        for b in 0..10 {
            let d = hist.density_marginal(b);
            if b == zero_bin {
                assert!(d > 0.0);
            } else {
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn histogram_mass_is_normalized() {
        let traj = simulate(
            &pitchfork_spec(),
            0.5,
            Mode::Minus,
            &StopCondition::with_horizon(2_000.0),
            13,
        )
        .unwrap();
        let hist = occupation_histogram(&traj, 50, (0.0, 1.0), 10.0, 0.1).unwrap();
        assert!((hist.total_mass() - 1.0).abs() <= 1e-12);
        let mass: f64 = (0..50).map(|b| hist.density_marginal(b) * hist.bin_width()).sum();
        assert!((mass - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn histogram_requires_enough_samples() {
        let traj = simulate(
            &pitchfork_spec(),
            0.5,
            Mode::Minus,
            &StopCondition::with_horizon(5.0),
            1,
        )
        .unwrap();
        assert!(matches!(
            occupation_histogram(&traj, 10, (0.0, 1.0), 1.0, 1.0),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn hopf_angle_is_deterministic_rotation() {
        let spec = SwitchingSpec::new(NormalFormKind::SupHopfRadial, -1.0, 1.0, 2.0, 1.0).unwrap();
        let planar = hopf_simulate(&spec, 1.0, 0.5, Mode::Minus, &StopCondition::with_horizon(100.0), 8)
            .unwrap();
        for k in 0..100 {
            let t = k as f64 * 0.7;
            let expect = (1.0 + t).rem_euclid(2.0 * std::f64::consts::PI);
            assert_eq!(planar.theta_at(t), expect);
        }
        assert!(hopf_simulate(
            &pitchfork_spec(),
            0.0,
            0.5,
            Mode::Minus,
            &StopCondition::with_horizon(1.0),
            0
        )
        .is_err());
    }

    #[test]
    fn csv_export_shape() {
        let traj = simulate(
            &pitchfork_spec(),
            0.5,
            Mode::Minus,
            &StopCondition::with_horizon(5.0),
            42,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t_start,x_start,mode,duration");
        assert_eq!(lines.len(), traj.segments.len() + 2);
        assert!(lines.last().unwrap().starts_with("# status,"));
    }

    #[test]
    fn absorption_is_reported_in_contracting_regime() {
        // Lambda = (p_minus*lambda_plus + p_plus*lambda_minus)/(lambda_plus+lambda_minus) = -1/3
        let spec = SwitchingSpec::new(NormalFormKind::SupPitchfork, -1.0, 1.0, 1.0, 2.0).unwrap();
        let stop = StopCondition::with_horizon(2_000.0);
        let mut absorbed = 0;
        for seed in 0..20 {
            let traj = simulate(&spec, 0.5, Mode::Minus, &stop, seed).unwrap();
            if matches!(traj.status, TrajectoryStatus::Absorbed { .. }) {
                absorbed += 1;
            }
        }
        assert!(absorbed >= 18, "absorbed {absorbed}/20");
    }
}
