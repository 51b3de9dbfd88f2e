//! Concrete mappings.
//!
//! * [`LogRegProblem`]: gradient of ℓ2-regularized logistic loss.
//! * [`CsProblem`]: LASSO recast as the complementarity residual
//!   `min{z, Hz + c}` on `z = [u; v] ∈ ℝ^{2n}`.
//! * [`AffineProblem`]: `F(x) = Mx + q` with monotone `M`, used where a
//!   known root is needed.

mod affine;
mod cs;
mod logreg;

pub use affine::AffineProblem;
pub use cs::{CsCache, CsProblem, SyntheticCsSpec};
pub use logreg::{LogRegCache, LogRegProblem, SyntheticLogRegSpec, DEFAULT_TAU};

/// Coupling factor `κ = L / l_max`.
pub fn coupling_factor(global: f64, lipschitz: &[f64]) -> f64 {
    let l_max = lipschitz.iter().cloned().fold(0.0, f64::max);
    global / l_max
}
