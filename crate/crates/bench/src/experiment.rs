//! Multi-trial experiments, ρ sweeps and rank traces.

use std::path::PathBuf;
use std::time::Instant;

use minieg::linalg::PowerIterationOptions;
use minieg::problems::{
    AffineProblem, CsProblem, LogRegProblem, SyntheticCsSpec, SyntheticLogRegSpec,
};
use minieg::rng::SplitMix64;
use minieg::{
    Clock, Mapping, Method, Point, Projection, RunResult, RunStatus, Runner, SolverConfig,
    SolverError, TraceLevel,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::container::{ContainerError, CsInstance};
use crate::libsvm::{load_libsvm, LibsvmError};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Libsvm(#[from] LibsvmError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Problem(#[from] minieg::ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Wall clock measured from construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock(Instant);

impl Default for StdClock {
    fn default() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn now_seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Libsvm {
        path: PathBuf,
        n_features: Option<usize>,
        tau: f64,
    },
    /// Redrawn for every trial with the trial seed.
    SyntheticCs(SyntheticCsSpec),
    CsFile(PathBuf),
    /// Redrawn for every trial with the trial seed.
    SyntheticLogReg(SyntheticLogRegSpec),
    /// Random monotone affine map, redrawn for every trial.
    Affine {
        n: usize,
    },
}

impl ProblemSource {
    pub fn describe(&self) -> String {
        match self {
            ProblemSource::Libsvm { path, .. } => format!("libsvm:{}", path.display()),
            ProblemSource::SyntheticCs(s) => format!(
                "synthetic-cs:n={},m={},k={},snr_db={}",
                s.n,
                s.m,
                s.k,
                s.snr_db.map_or("inf".to_string(), |v| v.to_string())
            ),
            ProblemSource::CsFile(p) => format!("cs-file:{}", p.display()),
            ProblemSource::SyntheticLogReg(s) => {
                format!("synthetic-logreg:n={},N={}", s.n_features, s.n_samples)
            }
            ProblemSource::Affine { n } => format!("affine:n={n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum X0Policy {
    #[default]
    Zeros,
    Given(Point),
    /// Standard Gaussian entries drawn from the trial seed.
    GaussianSeeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemSource,
    pub methods: Vec<Method>,
    /// `config.seed` is the base seed; trial `t` uses `seed + t`.
    pub config: SolverConfig,
    pub trials: usize,
    pub x0: X0Policy,
    pub parallel: bool,
}

impl ExperimentSpec {
    pub fn new(problem: ProblemSource, methods: Vec<Method>, config: SolverConfig) -> Self {
        ExperimentSpec {
            problem,
            methods,
            config,
            trials: 10,
            x0: X0Policy::Zeros,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config("at least one method is required".into()));
        }
        self.config.validate()?;
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.config.seed.wrapping_add(trial as u64)
    }
}

/// A concrete problem with its feasible set.
#[derive(Debug, Clone)]
pub enum Instance {
    Cs(CsProblem),
    LogReg(LogRegProblem),
    Affine(AffineProblem),
}

impl Instance {
    pub fn dim(&self) -> usize {
        match self {
            Instance::Cs(p) => p.dim(),
            Instance::LogReg(p) => p.dim(),
            Instance::Affine(p) => p.dim(),
        }
    }

    pub fn projection(&self) -> Projection {
        match self {
            Instance::Cs(_) => Projection::NonnegativeOrthant,
            _ => Projection::Identity,
        }
    }

    pub fn has_global_lipschitz(&self) -> bool {
        match self {
            Instance::Cs(p) => p.global_lipschitz().is_some(),
            Instance::LogReg(p) => p.global_lipschitz().is_some(),
            Instance::Affine(p) => p.global_lipschitz().is_some(),
        }
    }

    /// Power iteration for `L`; a no-op when it is already known.
    pub fn ensure_global_lipschitz(self, seed: u64) -> Self {
        if self.has_global_lipschitz() {
            return self;
        }
        let opts = PowerIterationOptions {
            seed,
            ..Default::default()
        };
        match self {
            Instance::Cs(p) => Instance::Cs(p.with_global_lipschitz(opts).0),
            Instance::LogReg(p) => Instance::LogReg(p.with_global_lipschitz(opts).0),
            other => other,
        }
    }

    pub fn run(
        &self,
        method: Method,
        config: &SolverConfig,
        x0: &Point,
        clock: &dyn Clock,
    ) -> Result<RunResult, SolverError> {
        let proj = self.projection();
        match self {
            Instance::Cs(p) => Runner::new(p, &proj, config)
                .with_clock(clock)
                .run(method, x0),
            Instance::LogReg(p) => Runner::new(p, &proj, config)
                .with_clock(clock)
                .run(method, x0),
            Instance::Affine(p) => Runner::new(p, &proj, config)
                .with_clock(clock)
                .run(method, x0),
        }
    }
}

/// File-backed sources are loaded once; synthetic ones give `None` and are
/// drawn per trial.
fn load(source: &ProblemSource) -> Result<Option<Instance>, BenchError> {
    Ok(match source {
        ProblemSource::Libsvm {
            path,
            n_features,
            tau,
        } => Some(Instance::LogReg(
            load_libsvm(path, *n_features)?.into_problem(*tau)?,
        )),
        ProblemSource::CsFile(path) => {
            let file = std::io::BufReader::new(std::fs::File::open(path)?);
            Some(Instance::Cs(CsInstance::read_from(file)?.to_problem()?))
        }
        _ => None,
    })
}

fn instance_for_trial(source: &ProblemSource, seed: u64) -> Result<Instance, BenchError> {
    Ok(match source {
        ProblemSource::SyntheticCs(spec) => {
            let spec = SyntheticCsSpec { seed, ..*spec };
            Instance::Cs(CsProblem::synthetic(&spec)?.0)
        }
        ProblemSource::SyntheticLogReg(spec) => {
            let spec = SyntheticLogRegSpec { seed, ..*spec };
            Instance::LogReg(LogRegProblem::synthetic(&spec)?)
        }
        ProblemSource::Affine { n } => Instance::Affine(AffineProblem::random_monotone(*n, seed)?),
        _ => unreachable!("fixed sources are loaded once"),
    })
}

fn initial_point(policy: &X0Policy, n: usize, seed: u64) -> Result<Point, BenchError> {
    match policy {
        X0Policy::Zeros => Ok(Point::zeros(n)),
        X0Policy::Given(p) if p.dim() == n => Ok(p.clone()),
        X0Policy::Given(p) => Err(BenchError::Config(format!(
            "initial point has dimension {}, problem has {n}",
            p.dim()
        ))),
        X0Policy::GaussianSeeded => {
            let mut rng = SplitMix64::new(seed);
            let v = (0..n).map(|_| rng.next_gaussian()).collect();
            Ok(Point::new(v).map_err(minieg::ProblemError::from)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    #[serde(serialize_with = "ser_method")]
    pub method: Method,
    pub trial: usize,
    pub itr: u64,
    pub nf: f64,
    pub tcpu_s: f64,
    pub final_residual: f64,
    #[serde(serialize_with = "ser_status")]
    pub status: RunStatus,
    pub seed: u64,
}

fn ser_method<S: serde::Serializer>(m: &Method, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(m.name())
}

fn ser_status<S: serde::Serializer>(st: &RunStatus, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(st.name())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population standard deviation; NaN for an empty sample.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return MeanStd {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MeanStd {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateStats {
    #[serde(serialize_with = "ser_method")]
    pub method: Method,
    pub trials: usize,
    pub converged: usize,
    /// Trials that did not converge, for any reason.
    pub failed: usize,
    /// Trials stopped by a negative stepsize; left out of every mean.
    pub stepsize_failures: usize,
    pub itr: MeanStd,
    pub nf: MeanStd,
    pub tcpu_s: MeanStd,
    pub final_residual: MeanStd,
    /// Mean Tcpu of the reference method over this method's mean Tcpu.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub problem: String,
    pub dim: usize,
    pub methods: Vec<String>,
    pub rho: f64,
    pub gamma: f64,
    pub tolerance: f64,
    pub max_iterations: u64,
    pub base_seed: u64,
    pub trials: usize,
    /// Trials ran concurrently, so per-trial wall times may interfere.
    pub parallel: bool,
    pub speedup_reference: String,
    /// Seconds spent estimating `L` for EG, per trial; outside `tcpu_s`.
    pub setup_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub metadata: Metadata,
    pub trials: Vec<TrialResult>,
    pub aggregates: Vec<AggregateStats>,
}

pub fn aggregate(methods: &[Method], trials: &[TrialResult]) -> Vec<AggregateStats> {
    let mut out: Vec<AggregateStats> = methods
        .iter()
        .map(|&m| {
            let rows: Vec<&TrialResult> = trials.iter().filter(|t| t.method == m).collect();
            let kept: Vec<&&TrialResult> = rows
                .iter()
                .filter(|t| t.status != RunStatus::StepsizeFailure)
                .collect();
            let col = |f: fn(&TrialResult) -> f64| -> MeanStd {
                MeanStd::of(&kept.iter().map(|t| f(t)).collect::<Vec<_>>())
            };
            let converged = rows
                .iter()
                .filter(|t| t.status == RunStatus::Converged)
                .count();
            AggregateStats {
                method: m,
                trials: rows.len(),
                converged,
                failed: rows.len() - converged,
                stepsize_failures: rows.len() - kept.len(),
                itr: col(|t| t.itr as f64),
                nf: col(|t| t.nf),
                tcpu_s: col(|t| t.tcpu_s),
                final_residual: col(|t| t.final_residual),
                speedup: f64::NAN,
            }
        })
        .collect();
    let reference = speedup_reference(methods);
    let ref_time = out
        .iter()
        .find(|a| a.method == reference)
        .map(|a| a.tcpu_s.mean)
        .unwrap_or(f64::NAN);
    for a in &mut out {
        a.speedup = if a.method == reference {
            1.0
        } else {
            ref_time / a.tcpu_s.mean
        };
    }
    out
}

/// EG when it is part of the run, otherwise the first method.
pub fn speedup_reference(methods: &[Method]) -> Method {
    if methods.contains(&Method::Eg) {
        Method::Eg
    } else {
        methods[0]
    }
}

struct TrialOutput {
    rows: Vec<TrialResult>,
    setup_s: f64,
    dim: usize,
}

fn run_trial(
    spec: &ExperimentSpec,
    fixed: Option<&Instance>,
    trial: usize,
) -> Result<TrialOutput, BenchError> {
    let seed = spec.trial_seed(trial);
    let base = match fixed {
        Some(i) => i.clone(),
        None => instance_for_trial(&spec.problem, seed)?,
    };
    let setup = Instant::now();
    let instance = if spec.methods.contains(&Method::Eg) {
        base.ensure_global_lipschitz(seed)
    } else {
        base
    };
    let setup_s = setup.elapsed().as_secs_f64();
    let n = instance.dim();
    let x0 = initial_point(&spec.x0, n, seed)?;
    let config = SolverConfig {
        seed,
        trace_level: TraceLevel::None,
        ..spec.config.clone()
    };
    let mut rows = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let clock = StdClock::default();
        let r = instance.run(method, &config, &x0, &clock)?;
        rows.push(TrialResult {
            method,
            trial,
            itr: r.iterations,
            nf: r.nf,
            tcpu_s: r.wall_time_seconds,
            final_residual: r.final_residual,
            status: r.status,
            seed,
        });
    }
    Ok(TrialOutput {
        rows,
        setup_s,
        dim: n,
    })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, BenchError> {
    spec.validate()?;
    let fixed = load(&spec.problem)?;
    let outputs: Vec<TrialOutput> = if spec.parallel {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, fixed.as_ref(), t))
            .collect::<Result<_, _>>()?
    } else {
        (0..spec.trials)
            .map(|t| run_trial(spec, fixed.as_ref(), t))
            .collect::<Result<_, _>>()?
    };
    let dim = outputs.first().map_or(0, |o| o.dim);
    let setup_s = outputs.iter().map(|o| o.setup_s).collect();
    let mut trials: Vec<TrialResult> = outputs.into_iter().flat_map(|o| o.rows).collect();
    let order = |m: Method| {
        spec.methods
            .iter()
            .position(|&x| x == m)
            .unwrap_or(usize::MAX)
    };
    trials.sort_by_key(|t| (order(t.method), t.trial));
    let aggregates = aggregate(&spec.methods, &trials);
    Ok(ExperimentReport {
        metadata: Metadata {
            problem: spec.problem.describe(),
            dim,
            methods: spec.methods.iter().map(|m| m.name().to_string()).collect(),
            rho: spec.config.rho,
            gamma: spec.config.gamma,
            tolerance: spec.config.tolerance,
            max_iterations: spec.config.max_iterations,
            base_seed: spec.config.seed,
            trials: spec.trials,
            parallel: spec.parallel,
            speedup_reference: speedup_reference(&spec.methods).name().to_string(),
            setup_s,
        },
        trials,
        aggregates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Itr,
    Nf,
    TcpuS,
    FinalResidual,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Itr,
        Metric::Nf,
        Metric::TcpuS,
        Metric::FinalResidual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Itr => "itr",
            Metric::Nf => "nf",
            Metric::TcpuS => "tcpu_s",
            Metric::FinalResidual => "final_residual",
        }
    }

    pub fn of(self, a: &AggregateStats) -> MeanStd {
        match self {
            Metric::Itr => a.itr,
            Metric::Nf => a.nf,
            Metric::TcpuS => a.tcpu_s,
            Metric::FinalResidual => a.final_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "ser_method")]
    pub method: Method,
    pub rho: f64,
    pub metric: Metric,
    pub mean: f64,
    pub std: f64,
}

/// Runs the experiment once per `ρ` in `grid`.
pub fn sweep_rho(spec: &ExperimentSpec, grid: &[f64]) -> Result<Vec<SweepRow>, BenchError> {
    if grid.is_empty() {
        return Err(BenchError::Config("the rho grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(BenchError::Config(format!(
            "rho values must lie strictly inside (0, 1), got {bad}"
        )));
    }
    let mut rows = Vec::new();
    for &rho in grid {
        let mut s = spec.clone();
        s.config.rho = rho;
        let report = run_experiment(&s)?;
        for a in &report.aggregates {
            for metric in Metric::ALL {
                let v = metric.of(a);
                rows.push(SweepRow {
                    method: a.method,
                    rho,
                    metric,
                    mean: v.mean,
                    std: v.std,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankPoint {
    pub k: u64,
    pub selected_index: usize,
    pub rank: usize,
    /// `rank / n`; `1/n` means the selected component was the largest.
    pub normalized_rank: f64,
    pub reset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTrace {
    pub dim: usize,
    pub iterations: u64,
    #[serde(serialize_with = "ser_status")]
    pub status: RunStatus,
    pub points: Vec<RankPoint>,
}

impl RankTrace {
    pub fn median_normalized_rank(&self) -> f64 {
        let mut v: Vec<f64> = self.points.iter().map(|p| p.normalized_rank).collect();
        if v.is_empty() {
            return f64::NAN;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        if v.len() % 2 == 1 {
            v[m]
        } else {
            0.5 * (v[m - 1] + v[m])
        }
    }

    pub fn resets(&self) -> usize {
        self.points.iter().filter(|p| p.reset).count()
    }
}

/// One Watchdog-Max run (trial 0 of `spec`) with per-iteration ranks.
pub fn rank_trace(spec: &ExperimentSpec) -> Result<RankTrace, BenchError> {
    spec.config.validate()?;
    if !spec.config.diagnostics {
        return Err(BenchError::Config(
            "rank tracing needs --diagnostics: every iteration then pays one extra full \
             evaluation of F (kept off the NF count) to rank the selected component"
                .into(),
        ));
    }
    let seed = spec.trial_seed(0);
    let instance = match load(&spec.problem)? {
        Some(i) => i,
        None => instance_for_trial(&spec.problem, seed)?,
    };
    let n = instance.dim();
    let x0 = initial_point(&spec.x0, n, seed)?;
    let config = SolverConfig {
        seed,
        trace_level: TraceLevel::Full,
        ..spec.config.clone()
    };
    let r = instance.run(Method::WatchdogMax, &config, &x0, &minieg::NullClock)?;
    let points = r
        .trace
        .iter()
        .map(|t| {
            let rank = t.selected_rank.expect("diagnostics enabled");
            RankPoint {
                k: t.k,
                selected_index: t.selected_index.expect("mini step"),
                rank,
                normalized_rank: rank as f64 / n as f64,
                reset: t.window_reset,
            }
        })
        .collect();
    Ok(RankTrace {
        dim: n,
        iterations: r.iterations,
        status: r.status,
        points,
    })
}
