//! The three L^p exponents the discretizations are built for.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Exponent {
    One,
    Two,
    Inf,
}

impl Exponent {
    pub const ALL: [Exponent; 3] = [Exponent::One, Exponent::Two, Exponent::Inf];

    /// `1/p`, with `1/inf = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Two => 0.5,
            Exponent::Inf => 0.0,
        }
    }

    /// The conjugate exponent q with 1/p + 1/q = 1.
    pub fn dual(self) -> Exponent {
        match self {
            Exponent::One => Exponent::Inf,
            Exponent::Two => Exponent::Two,
            Exponent::Inf => Exponent::One,
        }
    }

    /// `w^(1/p)`.
    pub fn weight_factor(self, w: f64) -> f64 {
        match self {
            Exponent::One => w,
            Exponent::Two => w.sqrt(),
            Exponent::Inf => 1.0,
        }
    }

    /// Discrete l^p norm of a vector.
    pub fn vector_norm(self, v: &[f64]) -> f64 {
        match self {
            Exponent::One => v.iter().map(|x| x.abs()).sum(),
            Exponent::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Exponent::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Quadrature approximation of the L^p norm of a function sampled at
    /// nodes with weights `w`; p = inf takes the maximum over the nodes.
    pub fn weighted_norm(self, values: &[f64], weights: &[f64]) -> f64 {
        match self {
            Exponent::One => values.iter().zip(weights).map(|(v, w)| v.abs() * w).sum(),
            Exponent::Two => values
                .iter()
                .zip(weights)
                .map(|(v, w)| v * v * w)
                .sum::<f64>()
                .sqrt(),
            Exponent::Inf => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Exponent::One => "1",
            Exponent::Two => "2",
            Exponent::Inf => "inf",
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "one" => Ok(Exponent::One),
            "2" | "two" => Ok(Exponent::Two),
            "inf" | "infinity" | "oo" => Ok(Exponent::Inf),
            other => Err(Error::InvalidExponent(other.to_string())),
        }
    }
}
