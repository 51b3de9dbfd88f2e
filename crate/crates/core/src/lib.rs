//! # minieg
//!
//! Solvers for monotone nonlinear equations
//!
//! ```text
//! F(x) = 0,   x ∈ Ω
//! ```
//!
//! where `F: ℝⁿ → ℝⁿ` is monotone and Lipschitz and `Ω` is a closed convex
//! set with a cheap Euclidean projection.
//!
//! Four iteration engines share one interface:
//!
//! * [`Method::Eg`]: two-time-scale extragradient. The prediction step uses
//!   `ρ/L`; the correction step uses the adaptive stepsize of [`beta_full`].
//! * [`Method::GreedyMini`]: the prediction step moves a single coordinate,
//!   the one with the largest `|F_i(x)|`, with stepsize `ρ/l_i` where `l_i` is
//!   the componentwise Lipschitz constant.
//! * [`Method::RandomMini`]: same, with the coordinate drawn with
//!   probability proportional to `l_i^γ`.
//! * [`Method::WatchdogMax`]: tracks a reference coordinate and challenges
//!   it every iteration with one sampled coordinate. Only two components of
//!   `F(x_k)` are evaluated per iteration.
//!
//! Problems implement [`Mapping`]. Besides a full evaluation a mapping
//! exposes a problem-specific cache so that single components and
//! single-coordinate shifts are cheap; [`EvaluationSession`] wraps that cache
//! together with a [`CostLedger`] that counts evaluations the way `NF` is
//! reported (a full evaluation is 1, a component evaluation is `1/n`).
//!
//! Three backends live in [`problems`]: regularized logistic regression,
//! LASSO via the complementarity residual `min{z, Hz + c}`, and affine
//! monotone maps used as known-root test problems.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing and
//! the command line live in the `minieg-bench` companion crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod ledger;
pub mod linalg;
mod mapping;
mod norms;
mod point;
pub mod problems;
mod projection;
pub mod rng;
mod sampler;
pub mod solver;

pub use error::{ContractError, ProblemError, SolverError};
pub use ledger::CostLedger;
pub use mapping::{EvaluationSession, Mapping};
pub use norms::{dot, inf_norm, l2_norm, l2_norm_sq, weighted_norm};
pub use point::Point;
pub use projection::Projection;
pub use sampler::{CoordinateSampler, LipschitzSampler};
pub use solver::{
    beta_component, beta_full, descent_product, greedy_index, mini_step, run_solver, Clock,
    IterationRecord, Method, MiniStep, NullClock, RunResult, RunStatus, Runner, SolverConfig,
    StepOutcome, Stepper, StepsizeFailure, TraceLevel, WatchdogSelection, WatchdogState,
};
