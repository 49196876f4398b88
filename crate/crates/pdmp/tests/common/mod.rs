//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here reuses the library's closed-form flows or quadrature: the
//! integrator is a plain fixed-step RK4 on the raw field, and the density
//! sampler inverts a tabulated CDF. Agreement between these and the library
//! is evidence, not tautology.

use pdmp::densities::DensityModel;
use pdmp::engine::{Histogram, Mode};
use pdmp::normal_forms::{eval_field, NormalFormSpec};
use pdmp::rng::SplitMix64;

/// Fixed-step RK4 on the scalar normal-form field.
pub fn rk4_flow(spec: &NormalFormSpec, x0: f64, t: f64, dt: f64) -> f64 {
    let f = |x: f64| eval_field(spec, x).expect("oracle stays inside the domain");
    let mut x = x0;
    let mut remaining = t;
    while remaining > 0.0 {
        let h = dt.min(remaining);
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        remaining -= h;
    }
    x
}

/// Draws from the analytic marginal density by inverting a tabulated CDF,
/// splitting each draw between the modes by the pointwise density ratio.
pub struct InverseCdfSampler {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdfSampler {
    pub fn new(model: &DensityModel, resolution: usize) -> Self {
        let (lo, hi) = model.support();
        let step = (hi - lo) / resolution as f64;
        let mut grid = Vec::with_capacity(resolution + 1);
        let mut cdf = Vec::with_capacity(resolution + 1);
        let mut acc = 0.0;
        grid.push(lo);
        cdf.push(0.0);
        for k in 0..resolution {
            let mid = lo + (k as f64 + 0.5) * step;
            acc += model.density_marginal(mid) * step;
            grid.push(lo + (k as f64 + 1.0) * step);
            cdf.push(acc);
        }
        // normalize away the discretization remainder
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Self { grid, cdf }
    }

    pub fn draw(&self, rng: &mut SplitMix64) -> f64 {
        let u = rng.next_unit();
        let idx = self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[idx - 1] + frac * (self.grid[idx] - self.grid[idx - 1])
    }
}

/// Histogram of inverse-CDF draws, with each draw assigned to a mode in
/// proportion to the per-mode densities at that point.
pub fn sampled_histogram(
    model: &DensityModel,
    draws: u64,
    bins: usize,
    seed: u64,
) -> Histogram {
    let (lo, hi) = model.support();
    let sampler = InverseCdfSampler::new(model, 1 << 14);
    let mut rng = SplitMix64::new(seed);
    let mut counts_minus = vec![0u64; bins];
    let mut counts_plus = vec![0u64; bins];
    let width = (hi - lo) / bins as f64;
    let mut out_of_range = 0;
    for _ in 0..draws {
        let x = sampler.draw(&mut rng);
        if !(x > lo && x < hi) {
            out_of_range += 1;
            continue;
        }
        let b = (((x - lo) / width) as usize).min(bins - 1);
        let dm = model.density(Mode::Minus, x);
        let dp = model.density(Mode::Plus, x);
        let share = if dm + dp > 0.0 { dm / (dm + dp) } else { 0.5 };
        if rng.next_unit() <= share {
            counts_minus[b] += 1;
        } else {
            counts_plus[b] += 1;
        }
    }
    Histogram {
        lo,
        hi,
        bins,
        counts_minus,
        counts_plus,
        out_of_range,
        samples: draws,
    }
}

/// Prints the standard acceptance line and panics on failure.
pub fn criterion(name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance] {name}: {verdict} ({detail})");
    assert!(pass, "{name} failed: {detail}");
}
