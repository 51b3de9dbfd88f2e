/// Evaluation counter behind the `NF` metric.
///
/// A full evaluation of `F` counts 1; a single component counts `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostLedger {
    full_evals: u64,
    component_evals: u64,
    n: usize,
}

impl CostLedger {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "ledger dimension must be at least 1");
        CostLedger {
            full_evals: 0,
            component_evals: 0,
            n,
        }
    }

    pub fn charge_full(&mut self) {
        self.full_evals += 1;
    }

    pub fn charge_component(&mut self) {
        self.component_evals += 1;
    }

    pub fn full_evals(&self) -> u64 {
        self.full_evals
    }

    pub fn component_evals(&self) -> u64 {
        self.component_evals
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.full_evals as f64 + self.component_evals as f64 / self.n as f64
    }

    /// `NF` as the exact fraction `(full·n + components) / n`.
    pub fn nf_exact(&self) -> (u128, u128) {
        (
            self.full_evals as u128 * self.n as u128 + self.component_evals as u128,
            self.n as u128,
        )
    }
}
