use alloc::vec::Vec;

use crate::rng::SplitMix64;
use crate::ContractError;

/// Source of the random coordinate used by R-Mini-EG and Watchdog-Max.
///
/// The current iterate is passed in so that test doubles can pick indices
/// that depend on the state; production samplers ignore it.
pub trait CoordinateSampler {
    fn draw(&mut self, x: &[f64]) -> usize;
}

impl<S: CoordinateSampler + ?Sized> CoordinateSampler for &mut S {
    fn draw(&mut self, x: &[f64]) -> usize {
        (**self).draw(x)
    }
}

/// Draws `i` with probability `l_i^γ / Σ_j l_j^γ` by inverse CDF.
#[derive(Debug, Clone)]
pub struct LipschitzSampler {
    cumulative: Vec<f64>,
    rng: SplitMix64,
}

impl LipschitzSampler {
    pub fn new(lipschitz: &[f64], gamma: f64, seed: u64) -> Result<Self, ContractError> {
        Ok(LipschitzSampler {
            cumulative: cumulative_weights(lipschitz, gamma)?,
            rng: SplitMix64::new(seed),
        })
    }

    /// Sampling probabilities `p_γ(i)`.
    pub fn probabilities(lipschitz: &[f64], gamma: f64) -> Result<Vec<f64>, ContractError> {
        let w = weights(lipschitz, gamma)?;
        let total: f64 = w.iter().sum();
        Ok(w.into_iter().map(|v| v / total).collect())
    }

    pub fn sample(&mut self) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let u = self.rng.next_f64() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1)
    }
}

impl CoordinateSampler for LipschitzSampler {
    fn draw(&mut self, _x: &[f64]) -> usize {
        self.sample()
    }
}

// l_i^γ scaled by l_max^γ so large exponents do not overflow.
fn weights(lipschitz: &[f64], gamma: f64) -> Result<Vec<f64>, ContractError> {
    if lipschitz.is_empty() {
        return Err(ContractError::Empty);
    }
    if let Some((index, &value)) = lipschitz.iter().enumerate().find(|(_, l)| !(**l > 0.0)) {
        return Err(ContractError::NonPositiveLipschitz { index, value });
    }
    if gamma == 0.0 {
        return Ok(alloc::vec![1.0; lipschitz.len()]);
    }
    let l_max = lipschitz.iter().cloned().fold(0.0, f64::max);
    Ok(lipschitz
        .iter()
        .map(|l| libm::pow(l / l_max, gamma))
        .collect())
}

fn cumulative_weights(lipschitz: &[f64], gamma: f64) -> Result<Vec<f64>, ContractError> {
    let mut acc = 0.0;
    Ok(weights(lipschitz, gamma)?
        .into_iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect())
}
