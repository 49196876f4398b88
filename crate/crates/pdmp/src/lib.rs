//! Simulation and verification toolkit for randomly switched bifurcation
//! normal forms.
//!
//! A two-state Markov chain switches between a subcritical (p < 0) and a
//! supercritical (p > 0) member of one normal-form family; between switches
//! the state follows the closed-form flow of the active field, so simulation
//! is event-exact and finite-time blow-up is detected analytically rather
//! than numerically. On top of the engine sit the regime classifier (growth
//! rate, invariant-measure count, blow-up verdicts), the closed-form
//! invariant densities with their quadrature normalization and consistency
//! checks, and a set of planar application models driven by a general
//! RK4-based switched integrator.

pub mod applications;
pub mod densities;
pub mod engine;
pub mod error;
pub mod normal_forms;
pub mod quadrature;
pub mod regimes;
pub mod rng;

pub use densities::{DensityModel, FluxValue, ModeSelect};
pub use engine::{
    hopf_simulate, occupation_histogram, simulate, simulate_ensemble, Histogram, Mode,
    PlanarTrajectory, StopCondition, SwitchingSpec, Trajectory, TrajectoryStatus,
};
pub use error::{Error, Result};
pub use normal_forms::{
    blow_up, blow_up_time, equilibria, eval_field, flow, BlowUpDirection, Equilibrium, FlowResult,
    NormalFormKind, NormalFormSpec, Stability,
};
pub use regimes::{
    average_growth_rate, blowup_fraction, classify, lyapunov_estimate, BlowUpVerdict, Comparison,
    ErgodicIpm, GrowthEstimate, LyapunovSettings, RegimeReport,
};
pub use rng::{derive_seed, SplitMix64};
