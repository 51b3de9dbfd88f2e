use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{
    estimate_lambda_max, CsrMatrix, LambdaEstimate, PowerIterationOptions, LAMBDA_SAFETY_FACTOR,
};
use crate::rng::SplitMix64;
use crate::{Mapping, ProblemError};

pub const DEFAULT_TAU: f64 = 0.1;

/// `F(x) = ∇f(x)` for
///
/// ```text
/// f(x) = (1/N) Σ_s log(1 + exp(-b_s a_sᵀx)) + (τ/2)‖x‖²
/// ```
///
/// with samples `a_s ∈ ℝⁿ` and labels `b_s ∈ {−1, +1}`.
///
/// The data are indexed twice: by sample, to rebuild margins, and by
/// feature, so that `F_i` and a shift along coordinate `i` only touch the
/// samples where feature `i` is non-zero.
#[derive(Debug, Clone)]
pub struct LogRegProblem {
    by_sample: CsrMatrix,
    by_feature: CsrMatrix,
    labels: Vec<f64>,
    tau: f64,
    lipschitz: Vec<f64>,
    global: Option<f64>,
}

/// Margins `t_s = a_sᵀx` and loss weights `w_s = −b_s σ(−b_s t_s) / N`.
#[derive(Debug, Clone)]
pub struct LogRegCache {
    margins: Vec<f64>,
    weights: Vec<f64>,
}

impl LogRegProblem {
    /// `samples[s]` lists the non-zero `(feature, value)` pairs of sample `s`.
    pub fn new(
        n_features: usize,
        samples: &[Vec<(usize, f64)>],
        labels: Vec<f64>,
        tau: f64,
    ) -> Result<Self, ProblemError> {
        if samples.len() != labels.len() {
            return Err(crate::ContractError::DimensionMismatch {
                expected: samples.len(),
                got: labels.len(),
            }
            .into());
        }
        if samples.is_empty() || n_features == 0 {
            return Err(crate::ContractError::Empty.into());
        }
        if !(tau > 0.0) {
            return Err(ProblemError::NonPositiveTau(tau));
        }
        for (index, &b) in labels.iter().enumerate() {
            if b != 1.0 && b != -1.0 {
                return Err(ProblemError::BadLabel { index, value: b });
            }
        }
        for row in samples {
            for &(i, v) in row {
                if i >= n_features {
                    return Err(ProblemError::FeatureOutOfRange {
                        index: i,
                        dim: n_features,
                    });
                }
                if !v.is_finite() {
                    return Err(crate::ContractError::NonFinite { index: i }.into());
                }
            }
        }
        let by_sample = CsrMatrix::from_rows(n_features, samples);
        let by_feature = by_sample.transpose();
        let n_samples = samples.len() as f64;
        let lipschitz = (0..n_features)
            .map(|i| {
                let (_, vals) = by_feature.row(i);
                let h_ii: f64 = vals.iter().map(|v| v * v).sum();
                h_ii / (4.0 * n_samples) + tau
            })
            .collect();
        Ok(LogRegProblem {
            by_sample,
            by_feature,
            labels,
            tau,
            lipschitz,
            global: None,
        })
    }

    /// Random dense instance. Features are standard Gaussian, labels are the
    /// signs of a planted sparse linear model with a little label noise.
    pub fn synthetic(spec: &SyntheticLogRegSpec) -> Result<Self, ProblemError> {
        if spec.n_features == 0 || spec.n_samples == 0 {
            return Err(ProblemError::InvalidSpec(
                "n_features and n_samples must be positive".into(),
            ));
        }
        let mut rng = SplitMix64::new(spec.seed);
        let n = spec.n_features;
        let active = (n / 20).max(1);
        let mut w = vec![0.0; n];
        for _ in 0..active {
            w[rng.next_below(n)] = rng.next_gaussian();
        }
        let mut samples = Vec::with_capacity(spec.n_samples);
        let mut labels = Vec::with_capacity(spec.n_samples);
        for _ in 0..spec.n_samples {
            let row: Vec<(usize, f64)> = (0..n).map(|i| (i, rng.next_gaussian())).collect();
            let score: f64 =
                row.iter().map(|(i, v)| w[*i] * v).sum::<f64>() + 0.1 * rng.next_gaussian();
            labels.push(if score >= 0.0 { 1.0 } else { -1.0 });
            samples.push(row);
        }
        Self::new(n, &samples, labels, spec.tau)
    }

    /// Estimates `L = λ₁(AAᵀ)/(4N) + τ` by power iteration and stores it.
    /// The eigenvalue estimate is inflated by [`LAMBDA_SAFETY_FACTOR`].
    pub fn with_global_lipschitz(mut self, opts: PowerIterationOptions) -> (Self, LambdaEstimate) {
        let est = self.estimate_lambda_max(opts);
        let n_samples = self.n_samples() as f64;
        self.global = Some(LAMBDA_SAFETY_FACTOR * est.value / (4.0 * n_samples) + self.tau);
        (self, est)
    }

    /// Sets `L` directly (e.g. from an exact eigendecomposition).
    pub fn set_global_lipschitz(&mut self, global: f64) {
        self.global = Some(global);
    }

    /// Largest eigenvalue of `H = AAᵀ`, computed through the `N × N` sample
    /// Gram matrix which has the same non-zero spectrum.
    pub fn estimate_lambda_max(&self, opts: PowerIterationOptions) -> LambdaEstimate {
        let mut tmp = vec![0.0; self.n_features()];
        estimate_lambda_max(
            self.n_samples(),
            |v, out| {
                self.by_sample.matvec_t(v, &mut tmp);
                self.by_sample.matvec(&tmp, out);
            },
            opts,
        )
    }

    pub fn n_features(&self) -> usize {
        self.by_sample.cols()
    }

    pub fn n_samples(&self) -> usize {
        self.by_sample.rows()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Samples as a sparse `N × n` matrix (one row per sample).
    pub fn samples(&self) -> &CsrMatrix {
        &self.by_sample
    }

    /// The objective `f(x)` whose gradient is `F`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let n_samples = self.n_samples() as f64;
        let loss: f64 = (0..self.n_samples())
            .map(|s| softplus(-self.labels[s] * self.by_sample.row_dot(s, x)))
            .sum();
        loss / n_samples + 0.5 * self.tau * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn weight(&self, s: usize, margin: f64) -> f64 {
        let b = self.labels[s];
        -b * sigmoid(-b * margin) / self.n_samples() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticLogRegSpec {
    pub n_features: usize,
    pub n_samples: usize,
    pub tau: f64,
    pub seed: u64,
}

impl Default for SyntheticLogRegSpec {
    // Shaped like the colon-cancer data: many more features than samples.
    fn default() -> Self {
        SyntheticLogRegSpec {
            n_features: 2000,
            n_samples: 62,
            tau: DEFAULT_TAU,
            seed: 0,
        }
    }
}

impl Mapping for LogRegProblem {
    type Cache = LogRegCache;

    fn dim(&self) -> usize {
        self.n_features()
    }

    fn componentwise_lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    fn global_lipschitz(&self) -> Option<f64> {
        self.global
    }

    fn eval_full(&self, x: &[f64], out: &mut [f64]) {
        let mut cache = self.new_cache();
        self.refresh_cache(x, &mut cache);
        self.full_from_cache(x, &cache, out);
    }

    fn new_cache(&self) -> LogRegCache {
        LogRegCache {
            margins: vec![0.0; self.n_samples()],
            weights: vec![0.0; self.n_samples()],
        }
    }

    fn refresh_cache(&self, x: &[f64], cache: &mut LogRegCache) {
        self.by_sample.matvec(x, &mut cache.margins);
        for s in 0..self.n_samples() {
            cache.weights[s] = self.weight(s, cache.margins[s]);
        }
    }

    fn component_from_cache(&self, x: &[f64], cache: &LogRegCache, i: usize) -> f64 {
        self.by_feature.row_dot(i, &cache.weights) + self.tau * x[i]
    }

    fn shift_cache(&self, cache: &mut LogRegCache, j: usize, delta: f64) {
        let (idx, vals) = self.by_feature.row(j);
        for (s, v) in idx.iter().zip(vals) {
            cache.margins[*s] += v * delta;
            cache.weights[*s] = self.weight(*s, cache.margins[*s]);
        }
    }

    fn full_from_cache(&self, x: &[f64], cache: &LogRegCache, out: &mut [f64]) {
        self.by_sample.matvec_t(&cache.weights, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += self.tau * xi;
        }
    }
}

/// `1 / (1 + e^{-t})` without overflow for large `|t|`.
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)`.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}
