use super::{lu_factor, singular_values, DenseMatrix};
use crate::error::{Error, Result};
use crate::norm::Exponent;

/// Induced matrix norm: column sum, largest singular value or row sum.
pub fn matrix_norm(a: &DenseMatrix, p: Exponent) -> f64 {
    match p {
        Exponent::One => a.norm_1(),
        Exponent::Two => singular_values(a).first().copied().unwrap_or(0.0),
        Exponent::Inf => a.norm_inf(),
    }
}

/// `‖A‖_p ‖A⁻¹‖_p`. For p = 2 this is `σ_max / σ_min`.
pub fn cond_p(a: &DenseMatrix, p: Exponent) -> Result<f64> {
    match p {
        Exponent::Two => {
            // factor first so singular input reports the same error for every p
            lu_factor(a)?;
            cond_2(a)
        }
        _ => {
            let inv = lu_factor(a)?.inverse();
            Ok(matrix_norm(a, p) * matrix_norm(&inv, p))
        }
    }
}

fn cond_2(a: &DenseMatrix) -> Result<f64> {
    let s = singular_values(a);
    let (max, min) = (s[0], s[s.len() - 1]);
    if !(min > 0.0) {
        return Err(Error::Singular { pivot: min, norm: max });
    }
    Ok(max / min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionNumbers {
    pub one: f64,
    pub two: f64,
    pub inf: f64,
}

impl ConditionNumbers {
    pub fn get(&self, p: Exponent) -> f64 {
        match p {
            Exponent::One => self.one,
            Exponent::Two => self.two,
            Exponent::Inf => self.inf,
        }
    }
}

/// All three condition numbers with one factorization and one SVD.
pub fn condition_numbers(a: &DenseMatrix) -> Result<ConditionNumbers> {
    let inv = lu_factor(a)?.inverse();
    Ok(ConditionNumbers {
        one: a.norm_1() * inv.norm_1(),
        two: cond_2(a)?,
        inf: a.norm_inf() * inv.norm_inf(),
    })
}
