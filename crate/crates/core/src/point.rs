use alloc::vec::Vec;
use core::ops::Deref;

use crate::ContractError;

/// A finite point in ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    /// Wraps `values`, rejecting NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self, ContractError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(ContractError::NonFinite { index });
        }
        Ok(Point(values))
    }

    pub fn zeros(n: usize) -> Self {
        Point(alloc::vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    // Used by the solvers, whose arithmetic never leaves the finite range on
    // valid inputs.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Point(values)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = ContractError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Point::new(values)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}
