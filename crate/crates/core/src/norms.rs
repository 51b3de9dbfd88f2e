use crate::ContractError;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four independent accumulators let the compiler vectorize.
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

pub fn l2_norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn l2_norm(x: &[f64]) -> f64 {
    libm::sqrt(l2_norm_sq(x))
}

/// `max_i |x_i|`.
pub fn inf_norm(x: &[f64]) -> Result<f64, ContractError> {
    if x.is_empty() {
        return Err(ContractError::Empty);
    }
    Ok(x.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// The `l^γ`-weighted Euclidean norm `sqrt(Σ l_i^γ x_i²)`.
///
/// With `γ = 0`, or all `l_i = 1`, this is the plain ℓ2 norm.
pub fn weighted_norm(x: &[f64], lipschitz: &[f64], gamma: f64) -> Result<f64, ContractError> {
    if x.len() != lipschitz.len() {
        return Err(ContractError::DimensionMismatch {
            expected: x.len(),
            got: lipschitz.len(),
        });
    }
    if let Some((index, &value)) = lipschitz.iter().enumerate().find(|(_, l)| !(**l > 0.0)) {
        return Err(ContractError::NonPositiveLipschitz { index, value });
    }
    if gamma == 0.0 {
        return Ok(l2_norm(x));
    }
    let s: f64 = x
        .iter()
        .zip(lipschitz)
        .map(|(v, l)| libm::pow(*l, gamma) * v * v)
        .sum();
    Ok(libm::sqrt(s))
}
