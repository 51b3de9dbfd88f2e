use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{
    estimate_lambda_max, DenseMatrix, LambdaEstimate, PowerIterationOptions, LAMBDA_SAFETY_FACTOR,
};
use crate::rng::SplitMix64;
use crate::{ContractError, Mapping, Point, ProblemError};

/// Sparse recovery `min ½‖Ax − b‖² + τ‖x‖₁` as the root of
///
/// ```text
/// F(z) = min{z, Hz + c},   z = [u; v] ∈ ℝ^{2n},   x = u − v,
/// H = [ AᵀA  −AᵀA ; −AᵀA  AᵀA ],   c = τ1 + [−Aᵀb; Aᵀb].
/// ```
///
/// `Hz` is never formed: with `g = AᵀA(u − v)` it equals `[g; −g]`, and the
/// session cache holds `g`. The `n × n` Gram matrix `AᵀA` is kept so that a
/// coordinate shift costs `O(n)`.
#[derive(Debug, Clone)]
pub struct CsProblem {
    a: DenseMatrix,
    b: Vec<f64>,
    tau: f64,
    c: Vec<f64>,
    gram: DenseMatrix,
    lipschitz: Vec<f64>,
    global: Option<f64>,
}

/// `g = AᵀA(u − v)`, plus scratch space for rebuilding it.
#[derive(Debug, Clone)]
pub struct CsCache {
    g: Vec<f64>,
    x: Vec<f64>,
    ax: Vec<f64>,
}

impl CsCache {
    pub fn g(&self) -> &[f64] {
        &self.g
    }
}

impl CsProblem {
    /// Builds the problem with `τ = 0.1‖Aᵀb‖∞`.
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self, ProblemError> {
        if b.len() != a.rows() {
            return Err(ContractError::DimensionMismatch {
                expected: a.rows(),
                got: b.len(),
            }
            .into());
        }
        let mut atb = vec![0.0; a.cols()];
        a.matvec_t(&b, &mut atb);
        let tau = 0.1 * atb.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self::with_tau(a, b, tau)
    }

    pub fn with_tau(a: DenseMatrix, b: Vec<f64>, tau: f64) -> Result<Self, ProblemError> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(ContractError::Empty.into());
        }
        if b.len() != a.rows() {
            return Err(ContractError::DimensionMismatch {
                expected: a.rows(),
                got: b.len(),
            }
            .into());
        }
        if let Some(index) = a.data().iter().chain(&b).position(|v| !v.is_finite()) {
            return Err(ContractError::NonFinite { index }.into());
        }
        if !(tau > 0.0) {
            return Err(ProblemError::NonPositiveTau(tau));
        }
        let n = a.cols();
        let mut atb = vec![0.0; n];
        a.matvec_t(&b, &mut atb);
        let mut c = vec![tau; 2 * n];
        for j in 0..n {
            c[j] -= atb[j];
            c[n + j] += atb[j];
        }
        let gram = a.gram();
        let mut lipschitz: Vec<f64> = (0..n).map(|j| gram.get(j, j).max(1.0)).collect();
        lipschitz.extend_from_within(..);
        Ok(CsProblem {
            a,
            b,
            tau,
            c,
            gram,
            lipschitz,
            global: None,
        })
    }

    /// Random instance from `spec`; also returns the planted signal.
    pub fn synthetic(spec: &SyntheticCsSpec) -> Result<(Self, Point), ProblemError> {
        spec.validate()?;
        let (n, m) = (spec.n, spec.m);
        let mut rng = SplitMix64::new(spec.seed);
        let a = DenseMatrix::from_fn(m, n, |_, _| rng.next_gaussian());

        let mut positions: Vec<usize> = (0..n).collect();
        for i in 0..spec.k {
            let j = i + rng.next_below(n - i);
            positions.swap(i, j);
        }
        let mut x_true = vec![0.0; n];
        for &p in &positions[..spec.k] {
            x_true[p] = rng.next_gaussian();
        }

        let mut b = vec![0.0; m];
        a.matvec(&x_true, &mut b);
        if let Some(snr_db) = spec.snr_db {
            let noise: Vec<f64> = (0..m).map(|_| rng.next_gaussian()).collect();
            let signal_power: f64 = b.iter().map(|v| v * v).sum();
            let noise_power: f64 = noise.iter().map(|v| v * v).sum();
            if noise_power > 0.0 {
                let target = signal_power / libm::pow(10.0, snr_db / 10.0);
                let scale = libm::sqrt(target / noise_power);
                for (bi, e) in b.iter_mut().zip(&noise) {
                    *bi += scale * e;
                }
            }
        }
        let problem = Self::new(a, b)?;
        Ok((problem, Point::from_vec_unchecked(x_true)))
    }

    /// Estimates `λ₁(H) = 2λ₁(AᵀA)` and stores `L = √(2n)·max(λ₁(H), 1)`.
    /// The eigenvalue estimate is inflated by [`LAMBDA_SAFETY_FACTOR`].
    pub fn with_global_lipschitz(mut self, opts: PowerIterationOptions) -> (Self, LambdaEstimate) {
        let est = self.estimate_lambda_max(opts);
        let lambda_h = 2.0 * LAMBDA_SAFETY_FACTOR * est.value;
        self.global = Some(libm::sqrt(2.0 * self.n() as f64) * lambda_h.max(1.0));
        (self, est)
    }

    pub fn set_global_lipschitz(&mut self, global: f64) {
        self.global = Some(global);
    }

    /// Largest eigenvalue of `AᵀA`, through whichever of `AAᵀ`, `AᵀA` is
    /// smaller.
    pub fn estimate_lambda_max(&self, opts: PowerIterationOptions) -> LambdaEstimate {
        let (m, n) = (self.a.rows(), self.a.cols());
        if m <= n {
            let mut tmp = vec![0.0; n];
            estimate_lambda_max(
                m,
                |v, out| {
                    self.a.matvec_t(v, &mut tmp);
                    self.a.matvec(&tmp, out);
                },
                opts,
            )
        } else {
            estimate_lambda_max(n, |v, out| self.gram.matvec(v, out), opts)
        }
    }

    /// Signal dimension; the mapping lives in `ℝ^{2n}`.
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn sensing(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn measurements(&self) -> &[f64] {
        &self.b
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn offset(&self) -> &[f64] {
        &self.c
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    /// The explicit `2n × 2n` block matrix `H`. Quadratic memory; meant for
    /// checking the structured evaluation on small instances.
    pub fn dense_operator(&self) -> DenseMatrix {
        let n = self.n();
        DenseMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let v = self.gram.get(r % n, c % n);
            if (r < n) == (c < n) {
                v
            } else {
                -v
            }
        })
    }

    /// `x = u − v`.
    pub fn signal(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|j| z[j] - z[n + j]).collect()
    }

    pub fn lasso_objective(&self, x: &[f64]) -> f64 {
        let mut r = vec![0.0; self.m()];
        self.a.matvec(x, &mut r);
        let fit: f64 = r
            .iter()
            .zip(&self.b)
            .map(|(ax, b)| (ax - b) * (ax - b))
            .sum();
        0.5 * fit + self.tau * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Distance from `0` to the LASSO subdifferential at `x`, in ℓ∞.
    ///
    /// Entries with `|x_j| ≤ zero_threshold` are treated as zero, so that a
    /// point that is only approximately sparse can still be certified.
    pub fn lasso_subgradient_residual(&self, x: &[f64], zero_threshold: f64) -> f64 {
        let mut r = vec![0.0; self.m()];
        self.a.matvec(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        let mut grad = vec![0.0; self.n()];
        self.a.matvec_t(&r, &mut grad);
        grad.iter()
            .zip(x)
            .map(|(&g, &xj)| {
                if xj.abs() > zero_threshold {
                    (g + self.tau * xj.signum()).abs()
                } else {
                    (g.abs() - self.tau).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    fn hz(&self, cache: &CsCache, i: usize) -> f64 {
        let n = self.n();
        if i < n {
            cache.g[i]
        } else {
            -cache.g[i - n]
        }
    }
}

impl Mapping for CsProblem {
    type Cache = CsCache;

    fn dim(&self) -> usize {
        2 * self.n()
    }

    fn componentwise_lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    fn global_lipschitz(&self) -> Option<f64> {
        self.global
    }

    fn eval_full(&self, z: &[f64], out: &mut [f64]) {
        let mut cache = self.new_cache();
        self.refresh_cache(z, &mut cache);
        self.full_from_cache(z, &cache, out);
    }

    fn new_cache(&self) -> CsCache {
        CsCache {
            g: vec![0.0; self.n()],
            x: vec![0.0; self.n()],
            ax: vec![0.0; self.m()],
        }
    }

    fn refresh_cache(&self, z: &[f64], cache: &mut CsCache) {
        let n = self.n();
        for (j, x) in cache.x.iter_mut().enumerate() {
            *x = z[j] - z[n + j];
        }
        self.a.matvec(&cache.x, &mut cache.ax);
        self.a.matvec_t(&cache.ax, &mut cache.g);
    }

    fn component_from_cache(&self, z: &[f64], cache: &CsCache, i: usize) -> f64 {
        z[i].min(self.hz(cache, i) + self.c[i])
    }

    fn shift_cache(&self, cache: &mut CsCache, j: usize, delta: f64) {
        let n = self.n();
        let (col, d) = if j < n { (j, delta) } else { (j - n, -delta) };
        // Gram is symmetric, so row `col` is column `col`.
        for (g, h) in cache.g.iter_mut().zip(self.gram.row(col)) {
            *g += d * h;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticCsSpec {
    /// Signal dimension.
    pub n: usize,
    /// Measurements.
    pub m: usize,
    /// Non-zeros in the planted signal.
    pub k: usize,
    /// `None` for noiseless measurements.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl SyntheticCsSpec {
    pub fn new(n: usize, m: usize, k: usize, seed: u64) -> Self {
        SyntheticCsSpec {
            n,
            m,
            k,
            snr_db: Some(20.0),
            seed,
        }
    }

    /// n = 2048, N = 512, K = 32, 20 dB.
    pub fn large(seed: u64) -> Self {
        Self::new(2048, 512, 32, seed)
    }

    /// n = 256, N = 64, K = 8, 20 dB.
    pub fn desk(seed: u64) -> Self {
        Self::new(256, 64, 8, seed)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.k < 1 || self.k > self.n {
            return Err(ProblemError::InvalidSpec(alloc::format!(
                "sparsity K = {} must satisfy 1 <= K <= n = {}",
                self.k,
                self.n
            )));
        }
        if self.m < 1 || self.m > self.n {
            return Err(ProblemError::InvalidSpec(alloc::format!(
                "measurements N = {} must satisfy 1 <= N <= n = {}",
                self.m,
                self.n
            )));
        }
        if let Some(s) = self.snr_db {
            if !s.is_finite() {
                return Err(ProblemError::InvalidSpec(alloc::format!(
                    "snr_db must be finite or absent, got {s}"
                )));
            }
        }
        Ok(())
    }
}
