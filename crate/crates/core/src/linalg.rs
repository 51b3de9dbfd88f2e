//! Small dense and sparse matrix kernels, plus the eigenvalue estimators
//! needed to turn data into Lipschitz constants.

use alloc::vec;
use alloc::vec::Vec;

use crate::norms::{dot, l2_norm};
use crate::rng::SplitMix64;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out = self · x`
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(r), x);
        }
    }

    /// `out = selfᵀ · x`
    pub fn matvec_t(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a * xr;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// `selfᵀ · self`
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ai = row[i];
                if ai == 0.0 {
                    continue;
                }
                let gi = &mut g.data[i * n..(i + 1) * n];
                for (gij, aj) in gi.iter_mut().zip(row) {
                    *gij += ai * aj;
                }
            }
        }
        g
    }

    /// Dense product `self · other`.
    pub fn mul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                let orow = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Columns need not be sorted.
    pub fn from_rows(cols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            let mut sorted = row.clone();
            sorted.sort_by_key(|(c, _)| *c);
            for (c, v) in sorted {
                debug_assert!(c < cols);
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows: rows.len(),
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = (0..m.rows())
            .map(|r| {
                m.row(r)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(m.cols(), &rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(r);
        idx.iter().zip(val).map(|(c, v)| v * x[*c]).sum()
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(r, x);
        }
    }

    pub fn matvec_t(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            let (idx, val) = self.row(r);
            for (c, v) in idx.iter().zip(val) {
                out[*c] += v * xr;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (c, v) in idx.iter().zip(val) {
                rows[*c].push((r, *v));
            }
        }
        Self::from_rows(self.rows, &rows)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (c, v) in idx.iter().zip(val) {
                m.data[r * self.cols + c] = *v;
            }
        }
        m
    }
}

/// Settings for [`estimate_lambda_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationOptions {
    /// Stop once the relative change of the Rayleigh quotient drops below this.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        PowerIterationOptions {
            tol: 1e-6,
            max_iters: 5000,
            seed: 0,
        }
    }
}

/// Multiplier applied to a power-iteration estimate before it is used as a
/// Lipschitz bound; the Rayleigh quotient approaches λ₁ from below.
pub const LAMBDA_SAFETY_FACTOR: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub value: f64,
    pub iterations: usize,
    /// False when `max_iters` ran out first; `value` is then the best estimate.
    pub converged: bool,
}

/// Largest eigenvalue of a symmetric positive semidefinite operator given by
/// its action `apply(v, out)` on vectors of length `dim`.
pub fn estimate_lambda_max(
    dim: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    opts: PowerIterationOptions,
) -> LambdaEstimate {
    if dim == 0 {
        return LambdaEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut rng = SplitMix64::new(opts.seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
    let norm = l2_norm(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; dim];
    let mut lambda = 0.0;
    for it in 1..=opts.max_iters {
        apply(&v, &mut w);
        let rq = dot(&v, &w);
        let wn = l2_norm(&w);
        if wn == 0.0 {
            // v is in the null space; with a random start that means the operator is zero.
            return LambdaEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        let change = (rq - lambda).abs();
        lambda = rq;
        if it > 1 && change <= opts.tol * rq.abs() {
            return LambdaEstimate {
                value: lambda,
                iterations: it,
                converged: true,
            };
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
    }
    LambdaEstimate {
        value: lambda,
        iterations: opts.max_iters,
        converged: false,
    }
}

/// All eigenvalues of a small symmetric matrix, ascending (cyclic Jacobi).
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "matrix must be square");
    let mut a = m.data.clone();
    let at = |a: &Vec<f64>, i: usize, j: usize| a[i * n + j];
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| at(&a, i, j) * at(&a, i, j))
            .sum();
        let scale: f64 = a.iter().map(|v| v * v).sum();
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = at(&a, p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = at(&a, p, p);
                let aqq = at(&a, q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = at(&a, k, p);
                    let akq = at(&a, k, q);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = at(&a, p, k);
                    let aqk = at(&a, q, k);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| at(&a, i, i)).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Spectral norm `‖M‖₂ = sqrt(λ_max(MᵀM))` of a small dense matrix.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    let g = m.gram();
    let top = symmetric_eigenvalues(&g).last().copied().unwrap_or(0.0);
    libm::sqrt(top.max(0.0))
}
