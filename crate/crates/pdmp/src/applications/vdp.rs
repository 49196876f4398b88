//! Fast subsystem of the van der Pol relaxation oscillator,
//! x' = p - x^3/3 + x, with the slow variable frozen as the parameter p.

/// Right-hand side of the fast subsystem.
pub fn vdp_fast_field(p: f64, x: f64) -> f64 {
    p - x * x * x / 3.0 + x
}

/// The two fold (saddle-node) parameter values; the folds sit at x = -+1.
pub fn vdp_fold_points() -> (f64, f64) {
    (-2.0 / 3.0, 2.0 / 3.0)
}

/// Number of equilibria of the cubic at parameter p:
/// 3 between the folds, 1 outside, 2 at a fold itself.
pub fn vdp_equilibrium_count(p: f64) -> usize {
    let fold = 2.0 / 3.0;
    if p.abs() < fold {
        3
    } else if p.abs() > fold {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_conditions_hold() {
        // at (p, x) = (2/3, -1): f = 0 and df/dx = 1 - x^2 = 0
        let f = vdp_fast_field(2.0 / 3.0, -1.0);
        assert!(f.abs() <= 1e-15, "{f}");
        let h = 1e-6;
        let df = (vdp_fast_field(2.0 / 3.0, -1.0 + h) - vdp_fast_field(2.0 / 3.0, -1.0 - h))
            / (2.0 * h);
        assert!(df.abs() <= 1e-9, "{df}");
        // mirror fold
        assert!(vdp_fast_field(-2.0 / 3.0, 1.0).abs() <= 1e-15);
    }

    #[test]
    fn origin_is_an_equilibrium_at_zero() {
        assert_eq!(vdp_fast_field(0.0, 0.0), 0.0);
    }

    // counts sign changes of x -> vdp_fast_field(p, x) on a fine grid
    fn count_roots(p: f64) -> usize {
        let lo = -4.0;
        let hi = 4.0;
        let n = 40_000;
        let mut roots = 0;
        let mut prev = vdp_fast_field(p, lo);
        for k in 1..=n {
            let x = lo + (hi - lo) * k as f64 / n as f64;
            let cur = vdp_fast_field(p, x);
            if prev == 0.0 || prev * cur < 0.0 {
                roots += 1;
            }
            prev = cur;
        }
        roots
    }

    #[test]
    fn equilibrium_count_matches_root_isolation() {
        let n = 1000;
        for k in 0..n {
            let p = -1.5 + 3.0 * k as f64 / (n - 1) as f64;
            if (p.abs() - 2.0 / 3.0).abs() < 1e-3 {
                // grid root isolation cannot resolve a near-double root
                continue;
            }
            assert_eq!(vdp_equilibrium_count(p), count_roots(p), "p = {p}");
        }
        assert_eq!(vdp_equilibrium_count(2.0 / 3.0), 2);
    }
}
