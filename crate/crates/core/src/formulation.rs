//! The two second-kind reformulations of `(eps u')' = f`.
//!
//! Writing `u = ∫ G σ` gives an equation for `σ = u''` whose kernel is
//! `(eps_x/eps)(x) G_x(x,t)`. Writing the equation as
//! `(eps u)'' − (eps_x u)' = f` and integrating against `G` gives an
//! equation for `u` itself. After integrating by parts the derivative lands
//! on the second argument of `G`, so its kernel is
//! `∂G/∂t (x,t) eps_x(t) / eps(x)`. This makes the second operator the
//! eps-weighted adjoint of the first.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::GreenKernel;
use crate::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FormulationKind {
    /// Unknown is `σ = u''`.
    Sigma,
    /// Unknown is `u`.
    U,
}

impl FormulationKind {
    pub const ALL: [FormulationKind; 2] = [FormulationKind::Sigma, FormulationKind::U];

    /// 1 for Sigma, 2 for U.
    pub fn number(self) -> u8 {
        match self {
            FormulationKind::Sigma => 1,
            FormulationKind::U => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FormulationKind::Sigma => "sigma",
            FormulationKind::U => "u",
        }
    }

    pub fn strategy(self) -> Arc<dyn Formulation> {
        match self {
            FormulationKind::Sigma => Arc::new(SigmaFormulation),
            FormulationKind::U => Arc::new(UFormulation),
        }
    }
}

impl fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for FormulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        default_formulations().get(s).map(|f| f.kind())
    }
}

/// Kernel `K(x,t) = left(x) · k(x,t) · right(t)`, with `k` one of the
/// Green's function derivatives, and the matching right-hand side.
pub trait Formulation: Send + Sync {
    fn kind(&self) -> FormulationKind;

    fn name(&self) -> &'static str {
        self.kind().as_str()
    }

    fn kernel(&self) -> GreenKernel;

    /// Factor applied on the collocation side, from `(eps, eps_x)` at `x`.
    fn left(&self, eps: f64, eps_x: f64) -> f64;

    /// Factor applied on the integration side, from `(eps, eps_x)` at `t`.
    fn right(&self, eps: f64, eps_x: f64) -> f64;

    /// Right-hand side at one node, given `f(x)/eps(x)` and
    /// `(1/eps(x)) ∫ G(x,t) f(t) dt`.
    fn rhs(&self, f_over_eps: f64, potential_over_eps: f64) -> f64;

    /// Whether `rhs` needs the potential of `f`.
    fn needs_potential(&self) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SigmaFormulation;

impl Formulation for SigmaFormulation {
    fn kind(&self) -> FormulationKind {
        FormulationKind::Sigma
    }

    fn kernel(&self) -> GreenKernel {
        GreenKernel::Gradient
    }

    fn left(&self, eps: f64, eps_x: f64) -> f64 {
        eps_x / eps
    }

    fn right(&self, _eps: f64, _eps_x: f64) -> f64 {
        1.0
    }

    fn rhs(&self, f_over_eps: f64, _potential_over_eps: f64) -> f64 {
        f_over_eps
    }

    fn needs_potential(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UFormulation;

impl Formulation for UFormulation {
    fn kind(&self) -> FormulationKind {
        FormulationKind::U
    }

    fn kernel(&self) -> GreenKernel {
        GreenKernel::TransposedGradient
    }

    fn left(&self, eps: f64, _eps_x: f64) -> f64 {
        1.0 / eps
    }

    fn right(&self, _eps: f64, eps_x: f64) -> f64 {
        eps_x
    }

    fn rhs(&self, _f_over_eps: f64, potential_over_eps: f64) -> f64 {
        potential_over_eps
    }

    fn needs_potential(&self) -> bool {
        true
    }
}

pub fn default_formulations() -> Registry<dyn Formulation> {
    let mut reg: Registry<dyn Formulation> = Registry::new("formulation");
    reg.register(&["sigma", "1"], Arc::new(SigmaFormulation));
    reg.register(&["u", "2"], Arc::new(UFormulation));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_number_and_name() {
        assert_eq!("1".parse::<FormulationKind>().unwrap(), FormulationKind::Sigma);
        assert_eq!("U".parse::<FormulationKind>().unwrap(), FormulationKind::U);
        assert!("3".parse::<FormulationKind>().is_err());
        for k in FormulationKind::ALL {
            assert_eq!(k.strategy().kind(), k);
            assert_eq!(k.to_string().parse::<FormulationKind>().unwrap(), k);
        }
    }

    #[test]
    fn kernel_factors() {
        let s = SigmaFormulation;
        assert_eq!(s.left(2.0, 4.0) * s.right(3.0, 9.0), 2.0);
        let u = UFormulation;
        assert_eq!(u.left(2.0, 4.0) * u.right(3.0, 9.0), 4.5);
    }
}
