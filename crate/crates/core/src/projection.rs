use alloc::vec::Vec;

use crate::{ContractError, Point};

/// Euclidean projection onto one of the supported feasible sets.
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// Ω = ℝⁿ.
    Identity,
    /// Ω = {x : x ≥ 0}.
    NonnegativeOrthant,
    /// Ω = {x : lower ≤ x ≤ upper}. Build with [`Projection::boxed`].
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Projection {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ContractError> {
        if lower.len() != upper.len() {
            return Err(ContractError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo > hi || lo.is_nan() || hi.is_nan() {
                return Err(ContractError::InvertedBox {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Projection::Box { lower, upper })
    }

    /// Checks that the projection can act on vectors of length `n`.
    pub fn check_dim(&self, n: usize) -> Result<(), ContractError> {
        match self {
            Projection::Box { lower, .. } if lower.len() != n => {
                Err(ContractError::DimensionMismatch {
                    expected: lower.len(),
                    got: n,
                })
            }
            _ => Ok(()),
        }
    }

    pub fn project_in_place(&self, x: &mut [f64]) {
        match self {
            Projection::Identity => {}
            Projection::NonnegativeOrthant => {
                for v in x.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            Projection::Box { lower, upper } => {
                for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
                    *v = v.clamp(*lo, *hi);
                }
            }
        }
    }

    pub fn project(&self, x: &Point) -> Result<Point, ContractError> {
        self.check_dim(x.dim())?;
        let mut out = x.as_slice().to_vec();
        self.project_in_place(&mut out);
        Ok(Point::from_vec_unchecked(out))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Projection::Identity => true,
            Projection::NonnegativeOrthant => x.iter().all(|v| *v >= 0.0),
            Projection::Box { lower, upper } => x
                .iter()
                .zip(lower)
                .zip(upper)
                .all(|((v, lo), hi)| lo <= v && v <= hi),
        }
    }
}
