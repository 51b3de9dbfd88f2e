use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{spectral_norm, symmetric_eigenvalues, DenseMatrix};
use crate::rng::SplitMix64;
use crate::{ContractError, Mapping, Point, ProblemError};

/// Tolerance on the smallest eigenvalue of the symmetric part.
const MONOTONE_SLACK: f64 = 1e-10;

/// `F(x) = Mx + q` with `M + Mᵀ ⪰ 0`.
///
/// `l_i = M_ii` when positive; otherwise (e.g. skew matrices) the Euclidean
/// norm of column `i`, which bounds `|F_i(x + t e_i) − F_i(x)| = |M_ii t|`
/// as well. `L = ‖M‖₂` exactly.
#[derive(Debug, Clone)]
pub struct AffineProblem {
    m: DenseMatrix,
    columns: DenseMatrix,
    q: Vec<f64>,
    root: Option<Point>,
    lipschitz: Vec<f64>,
    global: f64,
    min_sym_eigenvalue: f64,
}

impl AffineProblem {
    pub fn new(m: DenseMatrix, q: Vec<f64>) -> Result<Self, ProblemError> {
        let n = m.rows();
        if n == 0 {
            return Err(ContractError::Empty.into());
        }
        if m.cols() != n {
            return Err(ContractError::DimensionMismatch {
                expected: n,
                got: m.cols(),
            }
            .into());
        }
        if q.len() != n {
            return Err(ContractError::DimensionMismatch {
                expected: n,
                got: q.len(),
            }
            .into());
        }
        if let Some(index) = m.data().iter().chain(&q).position(|v| !v.is_finite()) {
            return Err(ContractError::NonFinite { index }.into());
        }
        let sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)));
        let min_sym_eigenvalue = symmetric_eigenvalues(&sym)[0];
        if min_sym_eigenvalue < -MONOTONE_SLACK {
            return Err(ProblemError::NotMonotone(min_sym_eigenvalue));
        }
        let columns = m.transpose();
        let mut lipschitz = Vec::with_capacity(n);
        for i in 0..n {
            let d = m.get(i, i);
            let l = if d > 0.0 {
                d
            } else {
                libm::sqrt(columns.row(i).iter().map(|v| v * v).sum())
            };
            if l == 0.0 {
                return Err(ProblemError::ZeroColumn(i));
            }
            lipschitz.push(l);
        }
        let global = spectral_norm(&m);
        Ok(AffineProblem {
            m,
            columns,
            q,
            root: None,
            lipschitz,
            global,
            min_sym_eigenvalue,
        })
    }

    /// `q = −M x*`, so `x*` is a root.
    pub fn with_root(m: DenseMatrix, root: Point) -> Result<Self, ProblemError> {
        if root.dim() != m.cols() {
            return Err(ContractError::DimensionMismatch {
                expected: m.cols(),
                got: root.dim(),
            }
            .into());
        }
        let mut q = vec![0.0; m.rows()];
        m.matvec(&root, &mut q);
        q.iter_mut().for_each(|v| *v = -*v);
        let mut p = Self::new(m, q)?;
        p.root = Some(root);
        Ok(p)
    }

    /// Rotation field `F(x) = (x₂, −x₁)`: monotone but not strongly so.
    pub fn skew_2d() -> Self {
        let m = DenseMatrix::from_row_major(2, 2, vec![0.0, 1.0, -1.0, 0.0]);
        Self::with_root(m, Point::zeros(2)).expect("rotation is monotone")
    }

    /// `M = BᵀB + μI` with Gaussian `B`, root drawn from the same stream.
    pub fn random_spd(n: usize, mu: f64, seed: u64) -> Result<Self, ProblemError> {
        let mut rng = SplitMix64::new(seed);
        let b = DenseMatrix::from_fn(n, n, |_, _| rng.next_gaussian());
        let mut m = b.gram();
        let data: Vec<f64> = (0..n * n)
            .map(|k| m.data()[k] + if k / n == k % n { mu } else { 0.0 })
            .collect();
        m = DenseMatrix::from_row_major(n, n, data);
        let root = random_point(&mut rng, n);
        Self::with_root(m, root)
    }

    /// `M = BᵀB/n + S − Sᵀ` with Gaussian `B` and `S`: a symmetric
    /// semidefinite part plus a skew part.
    pub fn random_monotone(n: usize, seed: u64) -> Result<Self, ProblemError> {
        let mut rng = SplitMix64::new(seed);
        let b = DenseMatrix::from_fn(n, n, |_, _| rng.next_gaussian());
        let s = DenseMatrix::from_fn(n, n, |_, _| rng.next_gaussian());
        let g = b.gram();
        let m = DenseMatrix::from_fn(n, n, |i, j| {
            g.get(i, j) / n as f64 + s.get(i, j) - s.get(j, i)
        });
        let root = random_point(&mut rng, n);
        Self::with_root(m, root)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn rhs(&self) -> &[f64] {
        &self.q
    }

    pub fn known_root(&self) -> Option<&Point> {
        self.root.as_ref()
    }

    /// Smallest eigenvalue of `(M + Mᵀ)/2`.
    pub fn monotonicity_certificate(&self) -> f64 {
        self.min_sym_eigenvalue
    }
}

fn random_point(rng: &mut SplitMix64, n: usize) -> Point {
    Point::from_vec_unchecked((0..n).map(|_| rng.next_gaussian()).collect())
}

impl Mapping for AffineProblem {
    /// `Mx`.
    type Cache = Vec<f64>;

    fn dim(&self) -> usize {
        self.m.rows()
    }

    fn componentwise_lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    fn global_lipschitz(&self) -> Option<f64> {
        Some(self.global)
    }

    fn eval_full(&self, x: &[f64], out: &mut [f64]) {
        self.m.matvec(x, out);
        for (o, q) in out.iter_mut().zip(&self.q) {
            *o += q;
        }
    }

    fn new_cache(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    fn refresh_cache(&self, x: &[f64], cache: &mut Vec<f64>) {
        self.m.matvec(x, cache);
    }

    fn component_from_cache(&self, _x: &[f64], cache: &Vec<f64>, i: usize) -> f64 {
        cache[i] + self.q[i]
    }

    fn shift_cache(&self, cache: &mut Vec<f64>, j: usize, delta: f64) {
        for (c, mij) in cache.iter_mut().zip(self.columns.row(j)) {
            *c += delta * mij;
        }
    }
}
