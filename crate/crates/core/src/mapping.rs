use alloc::vec::Vec;

use crate::{ContractError, CostLedger};

/// A monotone mapping `F: ℝⁿ → ℝⁿ`.
///
/// Implementations provide a full evaluation plus a problem-specific cache
/// (margins, partial matrix products, ...) from which single components can
/// be read cheaply and which can be moved along one coordinate without a full
/// rebuild. Mappings are immutable once built and may be shared between
/// concurrent runs; every run owns its own [`EvaluationSession`].
pub trait Mapping {
    type Cache: Clone;

    fn dim(&self) -> usize;

    /// Componentwise Lipschitz constants `l_1..l_n`, all strictly positive.
    fn componentwise_lipschitz(&self) -> &[f64];

    /// Global Lipschitz constant `L`, if known or estimated.
    fn global_lipschitz(&self) -> Option<f64>;

    fn eval_full(&self, x: &[f64], out: &mut [f64]);

    fn new_cache(&self) -> Self::Cache;

    /// Rebuilds `cache` for the point `x`.
    fn refresh_cache(&self, x: &[f64], cache: &mut Self::Cache);

    /// `F_i(x)`, given a cache consistent with `x`.
    fn component_from_cache(&self, x: &[f64], cache: &Self::Cache, i: usize) -> f64;

    /// Updates `cache` for the move `x_j += delta`. Called before the point
    /// itself is updated; implementations must not depend on `x_j`.
    fn shift_cache(&self, cache: &mut Self::Cache, j: usize, delta: f64);

    /// `F(x)` given a consistent cache.
    fn full_from_cache(&self, x: &[f64], cache: &Self::Cache, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.component_from_cache(x, cache, i);
        }
    }

    /// Checks the invariants every mapping must satisfy.
    fn check_contract(&self) -> Result<(), ContractError> {
        let l = self.componentwise_lipschitz();
        if l.len() != self.dim() {
            return Err(ContractError::DimensionMismatch {
                expected: self.dim(),
                got: l.len(),
            });
        }
        if let Some((index, &value)) = l.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(ContractError::NonPositiveLipschitz { index, value });
        }
        Ok(())
    }
}

/// A cached view of a mapping at a point.
///
/// Component and full evaluations made through the session are charged to
/// its ledger; moving the point is not.
pub struct EvaluationSession<'m, M: Mapping> {
    mapping: &'m M,
    point: Vec<f64>,
    cache: M::Cache,
    ledger: CostLedger,
}

impl<M: Mapping> Clone for EvaluationSession<'_, M> {
    fn clone(&self) -> Self {
        EvaluationSession {
            mapping: self.mapping,
            point: self.point.clone(),
            cache: self.cache.clone(),
            ledger: self.ledger,
        }
    }
}

impl<M: Mapping> core::fmt::Debug for EvaluationSession<'_, M> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("EvaluationSession")
            .field("point", &self.point)
            .field("ledger", &self.ledger)
            .finish_non_exhaustive()
    }
}

impl<'m, M: Mapping> EvaluationSession<'m, M> {
    pub fn new(mapping: &'m M, x: &[f64]) -> Result<Self, ContractError> {
        let n = mapping.dim();
        if x.len() != n {
            return Err(ContractError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let mut cache = mapping.new_cache();
        mapping.refresh_cache(x, &mut cache);
        Ok(EvaluationSession {
            mapping,
            point: x.to_vec(),
            cache,
            ledger: CostLedger::new(n),
        })
    }

    pub fn mapping(&self) -> &'m M {
        self.mapping
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    /// Replaces the whole point and rebuilds the cache.
    pub fn set_point(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.point.len(), "set_point: dimension mismatch");
        self.point.copy_from_slice(x);
        self.mapping.refresh_cache(&self.point, &mut self.cache);
    }

    /// Moves coordinate `j` by `delta`.
    pub fn shift_coordinate(&mut self, j: usize, delta: f64) {
        self.mapping.shift_cache(&mut self.cache, j, delta);
        self.point[j] += delta;
    }

    /// `F_i` at the current point; charged as one component evaluation.
    pub fn eval_component(&mut self, i: usize) -> f64 {
        self.ledger.charge_component();
        self.mapping
            .component_from_cache(&self.point, &self.cache, i)
    }

    /// `F` at the current point; charged as one full evaluation.
    pub fn eval_full(&mut self, out: &mut [f64]) {
        self.ledger.charge_full();
        self.mapping.full_from_cache(&self.point, &self.cache, out);
    }
}
