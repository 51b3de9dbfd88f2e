use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use minieg::problems::{SyntheticCsSpec, SyntheticLogRegSpec, DEFAULT_TAU};
use minieg::{Method, SolverConfig};
use minieg_bench::container::CsInstance;
use minieg_bench::experiment::{
    rank_trace, run_experiment, speedup_reference, sweep_rho, ExperimentSpec, ProblemSource,
    X0Policy,
};
use minieg_bench::export;

#[derive(Parser)]
#[command(
    name = "minieg-bench",
    version,
    about = "Benchmarks for monotone equation solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method over several trials and report Itr, NF, Tcpu and speedup.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.999)]
        rho: f64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Repeat the benchmark over a grid of ρ values (long-format CSV).
    SweepRho {
        #[command(flatten)]
        common: Common,
        /// Comma-separated values strictly inside (0, 1).
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.7, 0.9, 0.99, 0.999])]
        rho: Vec<f64>,
    },
    /// Record the rank of the Watchdog-Max selection at every iteration.
    RankTrace {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.999)]
        rho: f64,
    },
    /// Write a synthetic compressed-sensing instance to a binary container.
    GenCs {
        #[arg(long, default_value_t = 2048)]
        n: usize,
        #[arg(long, default_value_t = 512)]
        m: usize,
        #[arg(long, default_value_t = 32)]
        k: usize,
        /// Omit for noiseless measurements.
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Methods to run; repeat or separate with commas.
    #[arg(long, value_delimiter = ',', default_values_t = Method::ALL.map(|m| m.name().to_string()))]
    method: Vec<String>,
    /// Exponent of the sampling law p_i ∝ l_i^γ.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500_000)]
    max_iters: u64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Base seed; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file, stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compute the rank of each selected component (one uncharged full evaluation per iteration).
    #[arg(long)]
    diagnostics: bool,
    /// Run trials on all cores. Wall times then share the machine.
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_enum, default_value_t = ProblemKind::Cs)]
    problem: ProblemKind,
    /// Input file for `cs-file` and `libsvm`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Signal / feature / affine dimension for synthetic problems.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Measurements (CS) or samples (logistic regression).
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 20.0)]
    snr_db: f64,
    /// Regularization for logistic regression.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long, value_enum, default_value_t = X0Kind::Zeros)]
    x0: X0Kind,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    /// Synthetic compressed sensing, redrawn per trial.
    Cs,
    CsFile,
    Libsvm,
    /// Synthetic logistic regression, redrawn per trial.
    Logreg,
    /// Random monotone affine map, redrawn per trial.
    Affine,
}

#[derive(Clone, Copy, ValueEnum)]
enum X0Kind {
    Zeros,
    Gaussian,
}

impl Common {
    fn spec(&self, rho: f64) -> Result<ExperimentSpec> {
        let methods = self
            .method
            .iter()
            .map(|m| m.parse::<Method>().map_err(anyhow::Error::msg))
            .collect::<Result<Vec<_>>>()?;
        let data = || {
            self.data
                .clone()
                .context("--data is required for this problem")
        };
        let problem = match self.problem {
            ProblemKind::Cs => ProblemSource::SyntheticCs(SyntheticCsSpec {
                n: self.n,
                m: self.m,
                k: self.k,
                snr_db: Some(self.snr_db),
                seed: self.seed,
            }),
            ProblemKind::CsFile => ProblemSource::CsFile(data()?),
            ProblemKind::Libsvm => ProblemSource::Libsvm {
                path: data()?,
                n_features: None,
                tau: self.tau,
            },
            ProblemKind::Logreg => ProblemSource::SyntheticLogReg(SyntheticLogRegSpec {
                n_features: self.n,
                n_samples: self.m,
                tau: self.tau,
                seed: self.seed,
            }),
            ProblemKind::Affine => ProblemSource::Affine { n: self.n },
        };
        let config = SolverConfig {
            rho,
            gamma: self.gamma,
            tolerance: self.tol,
            max_iterations: self.max_iters,
            seed: self.seed,
            diagnostics: self.diagnostics,
            ..SolverConfig::default()
        };
        Ok(ExperimentSpec {
            problem,
            methods,
            config,
            trials: self.trials,
            x0: match self.x0 {
                X0Kind::Zeros => X0Policy::Zeros,
                X0Kind::Gaussian => X0Policy::GaussianSeeded,
            },
            parallel: self.parallel,
        })
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        open(self.out.as_ref())
    }
}

fn open(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench {
            common,
            rho,
            format,
        } => {
            let spec = common.spec(rho)?;
            let report = run_experiment(&spec)?;
            let mut w = common.writer()?;
            match format {
                Format::Csv => export::write_trials_csv(&report.trials, &mut w)?,
                Format::Json => export::write_json(&report, &mut w)?,
                Format::Table => {
                    let reference = speedup_reference(&spec.methods);
                    writeln!(w, "{}", report.metadata.problem)?;
                    write!(w, "{}", export::render_table(&report.aggregates, reference))?;
                }
            }
            w.flush()?;
        }
        Command::SweepRho { common, rho } => {
            let spec = common.spec(SolverConfig::default().rho)?;
            let rows = sweep_rho(&spec, &rho)?;
            let mut w = common.writer()?;
            export::write_sweep_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Command::RankTrace { common, rho } => {
            if !common.diagnostics {
                bail!(
                    "rank-trace needs --diagnostics: ranking the selected component costs one \
                     extra full evaluation of F per iteration, which is left out of NF"
                );
            }
            let spec = common.spec(rho)?;
            let trace = rank_trace(&spec)?;
            let mut w = common.writer()?;
            export::write_rank_csv(&trace, &mut w)?;
            w.flush()?;
            eprintln!(
                "n = {}, iterations = {}, status = {}, median rank/n = {:.4}, resets = {}",
                trace.dim,
                trace.iterations,
                trace.status.name(),
                trace.median_normalized_rank(),
                trace.resets()
            );
        }
        Command::GenCs {
            n,
            m,
            k,
            snr_db,
            seed,
            out,
        } => {
            let spec = SyntheticCsSpec {
                n,
                m,
                k,
                snr_db,
                seed,
            };
            let inst = CsInstance::generate(&spec)?;
            let mut w = open(Some(&out))?;
            inst.write_to(&mut w)?;
            eprintln!(
                "wrote {} (n = {n}, m = {m}, k = {k}, tau = {})",
                out.display(),
                inst.tau
            );
        }
    }
    Ok(())
}
