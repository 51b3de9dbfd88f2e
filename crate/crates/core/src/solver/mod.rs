//! Iteration engines and the run loop.

mod step;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use crate::error::StepsizeFailure;
pub use step::{
    beta_component, beta_full, descent_product, greedy_index, mini_step, IterationRecord, MiniStep,
    StepOutcome, Stepper, WatchdogSelection, WatchdogState,
};

use crate::{
    CoordinateSampler, CostLedger, LipschitzSampler, Mapping, Point, Projection, SolverError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Eg,
    GreedyMini,
    RandomMini,
    WatchdogMax,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Eg,
        Method::GreedyMini,
        Method::RandomMini,
        Method::WatchdogMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Eg => "eg",
            Method::GreedyMini => "g-mini-eg",
            Method::RandomMini => "r-mini-eg",
            Method::WatchdogMax => "watchdog-max",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Eg => "EG",
            Method::GreedyMini => "G-Mini-EG",
            Method::RandomMini => "R-Mini-EG",
            Method::WatchdogMax => "Watchdog-Max",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "eg" => Ok(Method::Eg),
            "g-mini-eg" | "gmini" | "greedy" => Ok(Method::GreedyMini),
            "r-mini-eg" | "rmini" | "random" => Ok(Method::RandomMini),
            "watchdog-max" | "watchdog" | "wm" => Ok(Method::WatchdogMax),
            other => Err(alloc::format!(
                "unknown method '{other}' (expected eg, g-mini-eg, r-mini-eg or watchdog-max)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    None,
    /// Keep only the last iteration.
    Summary,
    /// Keep every iteration.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Prediction-step scale, strictly inside (0, 1).
    pub rho: f64,
    /// Sampling exponent for R-Mini-EG and Watchdog-Max (`p_i ∝ l_i^γ`).
    pub gamma: f64,
    /// Stop once `‖F(y_k)‖ ≤ tolerance`.
    pub tolerance: f64,
    pub max_iterations: u64,
    pub seed: u64,
    pub trace_level: TraceLevel,
    /// Compute the rank of each selected component (one uncharged full
    /// evaluation per iteration).
    pub diagnostics: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 0.999,
            gamma: 0.0,
            tolerance: 1e-8,
            max_iterations: 500_000,
            seed: 0,
            trace_level: TraceLevel::None,
            diagnostics: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(SolverError::Config(alloc::format!(
                "rho must lie strictly inside (0, 1), got {}",
                self.rho
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(SolverError::Config(alloc::format!(
                "gamma must be a finite non-negative number, got {}",
                self.gamma
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(SolverError::Config(alloc::format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::Config(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    IterationCapReached,
    StepsizeFailure,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::IterationCapReached => "iteration_cap",
            RunStatus::StepsizeFailure => "stepsize_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub method: Method,
    /// The point whose residual is reported: the last `y_k`, or `x_k` when a
    /// root was detected before stepping.
    pub final_point: Point,
    pub final_residual: f64,
    pub iterations: u64,
    pub nf: f64,
    pub ledger: CostLedger,
    /// Evaluations made only for diagnostics; never part of `nf`.
    pub diagnostic_ledger: Option<CostLedger>,
    pub wall_time_seconds: f64,
    pub status: RunStatus,
    pub failure: Option<StepsizeFailure>,
    pub trace: Vec<IterationRecord>,
}

/// Monotonic time source, in seconds.
pub trait Clock {
    fn now_seconds(&self) -> f64;
}

/// Always reads zero; the default where no OS clock exists.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_seconds(&self) -> f64 {
        0.0
    }
}

static NULL_CLOCK: NullClock = NullClock;

/// Runs one method on one problem.
pub struct Runner<'a, M: Mapping> {
    mapping: &'a M,
    projection: &'a Projection,
    config: &'a SolverConfig,
    clock: &'a dyn Clock,
}

impl<'a, M: Mapping> Runner<'a, M> {
    pub fn new(mapping: &'a M, projection: &'a Projection, config: &'a SolverConfig) -> Self {
        Runner {
            mapping,
            projection,
            config,
            clock: &NULL_CLOCK,
        }
    }

    pub fn with_clock(mut self, clock: &'a dyn Clock) -> Self {
        self.clock = clock;
        self
    }

    /// Runs with the `l^γ` sampler seeded from `config.seed`.
    pub fn run(&self, method: Method, x0: &Point) -> Result<RunResult, SolverError> {
        let mut sampler = LipschitzSampler::new(
            self.mapping.componentwise_lipschitz(),
            self.config.gamma,
            self.config.seed,
        )?;
        self.run_with_sampler(method, x0, &mut sampler)
    }

    /// Runs with a caller-supplied coordinate sampler (ignored by EG and
    /// G-Mini-EG).
    pub fn run_with_sampler(
        &self,
        method: Method,
        x0: &Point,
        sampler: &mut dyn CoordinateSampler,
    ) -> Result<RunResult, SolverError> {
        let cfg = self.config;
        cfg.validate()?;
        if method == Method::Eg && self.mapping.global_lipschitz().is_none() {
            return Err(SolverError::MissingGlobalLipschitz);
        }
        let start = self.clock.now_seconds();
        let mut st = Stepper::new(self.mapping, self.projection, cfg.rho, x0)?;
        if cfg.diagnostics {
            st.enable_diagnostics();
        }
        let mut trace = Vec::new();
        let push = |rec: IterationRecord, trace: &mut Vec<IterationRecord>| match cfg.trace_level {
            TraceLevel::None => {}
            TraceLevel::Summary => {
                trace.clear();
                trace.push(rec);
            }
            TraceLevel::Full => trace.push(rec),
        };

        let mut root_at_x = false;
        let mut failure = None;
        let mut status = RunStatus::IterationCapReached;
        if method == Method::WatchdogMax {
            if let Some(StepOutcome::RootAtX) = st.watchdog_init()? {
                root_at_x = true;
                status = RunStatus::Converged;
            }
        }
        if !root_at_x {
            while st.iterations() < cfg.max_iterations {
                let outcome = match method {
                    Method::Eg => st.eg_step(),
                    Method::GreedyMini => st.gmini_step(),
                    Method::RandomMini => st.rmini_step(sampler),
                    Method::WatchdogMax => st.watchdog_step(sampler),
                };
                match outcome {
                    Ok(StepOutcome::Advanced(rec)) => {
                        push(rec, &mut trace);
                        if rec.residual_y <= cfg.tolerance {
                            status = RunStatus::Converged;
                            break;
                        }
                    }
                    Ok(StepOutcome::RootAtY(rec)) => {
                        push(rec, &mut trace);
                        status = RunStatus::Converged;
                        break;
                    }
                    Ok(StepOutcome::RootAtX) => {
                        root_at_x = true;
                        status = RunStatus::Converged;
                        break;
                    }
                    Err(SolverError::Stepsize(f)) => {
                        failure = Some(f);
                        status = RunStatus::StepsizeFailure;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let wall = self.clock.now_seconds() - start;

        let (final_point, final_residual) = if root_at_x {
            (st.point().to_vec(), 0.0)
        } else {
            (st.last_y().to_vec(), st.last_residual())
        };
        let ledger = *st.ledger();
        Ok(RunResult {
            method,
            final_point: Point::from_vec_unchecked(final_point),
            final_residual,
            iterations: st.iterations(),
            nf: ledger.nf(),
            ledger,
            diagnostic_ledger: st.diagnostic_ledger().copied(),
            wall_time_seconds: wall,
            status,
            failure,
            trace,
        })
    }
}

/// Convenience wrapper around [`Runner::run`] without timing.
pub fn run_solver<M: Mapping>(
    mapping: &M,
    projection: &Projection,
    method: Method,
    config: &SolverConfig,
    x0: &Point,
) -> Result<RunResult, SolverError> {
    Runner::new(mapping, projection, config).run(method, x0)
}
