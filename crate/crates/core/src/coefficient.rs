//! The variable coefficient eps(x) and its exact derivative.
//!
//! Everything downstream only needs point values of `eps` and `eps_x`, so
//! the solver works against the [`Coefficient`] trait. The concrete
//! [`CoefficientProfile`] is a constant plus a sum of tanh layers, which
//! covers every profile used in the experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::CompositeQuadrature;
use crate::norm::Exponent;
use crate::quadrature::Interval;

pub trait Coefficient: Send + Sync {
    fn domain(&self) -> Interval;

    /// `(eps(x), eps_x(x))`. Callers are responsible for `x` being inside
    /// the domain.
    fn eval(&self, x: f64) -> (f64, f64);

    fn eps(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    fn eps_x(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    /// Lower and upper bounds `(m, M)` of eps on the domain.
    fn bounds(&self) -> (f64, f64);

    /// Estimates of `(∫|eps|, ∫|eps_x|)` over the domain, used to scale
    /// refinement tolerances.
    fn integral_scales(&self) -> (f64, f64) {
        let d = self.domain();
        let n = 20_000;
        let h = d.len() / n as f64;
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..=n {
            let x = d.lo + i as f64 * h;
            let wt = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let (e, ex) = self.eval(x);
            a += wt * e.abs();
            b += wt * ex.abs();
        }
        (a * h / 3.0, b * h / 3.0)
    }

    /// Locations of internal layers, if known.
    fn layer_centers(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// One `amplitude * tanh(steepness * (x - center))` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    #[serde(rename = "amp")]
    pub amplitude: f64,
    #[serde(rename = "delta")]
    pub steepness: f64,
    pub center: f64,
}

impl Layer {
    pub fn new(amplitude: f64, steepness: f64, center: f64) -> Self {
        Self {
            amplitude,
            steepness,
            center,
        }
    }
}

/// `eps(x) = base + Σ amp · tanh(delta · (x - center))` on a fixed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile {
    base: f64,
    layers: Vec<Layer>,
    domain: Interval,
    min: f64,
    max: f64,
}

/// On-disk description of a profile:
/// `{"base": r, "layers": [{"amp": r, "delta": r, "center": r}], "domain": [a, b]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub base: f64,
    #[serde(default)]
    pub layers: Vec<Layer>,
    pub domain: [f64; 2],
}

const MIN_SAMPLES: usize = 1_001;
const MAX_SAMPLES: usize = 1_000_000;

/// sech²(z), stable for large |z|.
pub(crate) fn sech2(z: f64) -> f64 {
    let e = (-2.0 * z.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// ln cosh(z), stable for large |z|.
fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Build a profile, rejecting any that are not positive on the domain.
pub fn make_profile(base: f64, layers: Vec<Layer>, domain: Interval) -> Result<CoefficientProfile> {
    let domain = Interval::new(domain.lo, domain.hi)?;
    if !base.is_finite() {
        return Err(Error::InvalidProfile(format!("base {base} is not finite")));
    }
    for l in &layers {
        if !(l.steepness > 0.0 && l.steepness.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "layer steepness must be positive, got {}",
                l.steepness
            )));
        }
        if !(l.amplitude.is_finite() && l.center.is_finite()) {
            return Err(Error::InvalidProfile("non-finite layer parameter".into()));
        }
    }
    let mut profile = CoefficientProfile {
        base,
        layers,
        domain,
        min: f64::NAN,
        max: f64::NAN,
    };
    let (min, max) = profile.sample_bounds()?;
    profile.min = min;
    profile.max = max;
    Ok(profile)
}

/// Closed-form `(eps, eps_x)` at `x`, which must lie in the domain.
pub fn eval_profile(profile: &CoefficientProfile, x: f64) -> Result<(f64, f64)> {
    profile.domain.check_contains(x)?;
    Ok(profile.eval(x))
}

impl CoefficientProfile {
    pub fn constant(value: f64, domain: Interval) -> Result<Self> {
        make_profile(value, Vec::new(), domain)
    }

    /// `2 + tanh(delta (x - x0))` on `[0, 2]`.
    pub fn tanh_layer(delta: f64, x0: f64) -> Result<Self> {
        Self::tanh_layer_on(delta, x0, Interval::new(0.0, 2.0)?)
    }

    pub fn tanh_layer_on(delta: f64, x0: f64, domain: Interval) -> Result<Self> {
        make_profile(2.0, vec![Layer::new(1.0, delta, x0)], domain)
    }

    /// A raised plateau between two layers at 0.7 and 1.3 on `[0, 2]`
    /// (eps goes 2 → 4 → 2).
    pub fn double_hill(delta: f64) -> Result<Self> {
        make_profile(
            2.0,
            vec![Layer::new(1.0, delta, 0.7), Layer::new(-1.0, delta, 1.3)],
            Interval::new(0.0, 2.0)?,
        )
    }

    /// A sunken plateau between two layers at 0.7 and 1.3 on `[0, 2]`
    /// (eps goes 2 → 1 → 2).
    pub fn double_well(delta: f64) -> Result<Self> {
        make_profile(
            2.0,
            vec![Layer::new(-0.5, delta, 0.7), Layer::new(0.5, delta, 1.3)],
            Interval::new(0.0, 2.0)?,
        )
    }

    pub fn from_spec(spec: &ProfileSpec) -> Result<Self> {
        make_profile(
            spec.base,
            spec.layers.clone(),
            Interval::new(spec.domain[0], spec.domain[1])?,
        )
    }

    pub fn to_spec(&self) -> ProfileSpec {
        ProfileSpec {
            base: self.base,
            layers: self.layers.clone(),
            domain: [self.domain.lo, self.domain.hi],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProfileSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidProfile(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn max_steepness(&self) -> f64 {
        self.layers.iter().fold(0.0, |m, l| m.max(l.steepness))
    }

    fn sample_count(&self) -> usize {
        let raw = 10.0 * self.layers.len() as f64 * self.max_steepness() * self.domain.len();
        (raw.ceil() as usize).clamp(MIN_SAMPLES, MAX_SAMPLES)
    }

    /// Dense equispaced sampling; layers have width ~1/delta so ten
    /// samples per unit of delta·length resolve each of them.
    fn sample_bounds(&self) -> Result<(f64, f64)> {
        let n = self.sample_count();
        let h = self.domain.len() / (n - 1) as f64;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut argmin = self.domain.lo;
        for i in 0..n {
            let x = if i == n - 1 {
                self.domain.hi
            } else {
                self.domain.lo + i as f64 * h
            };
            let e = self.eval(x).0;
            if e < min {
                min = e;
                argmin = x;
            }
            max = max.max(e);
        }
        if !(min > 0.0) {
            return Err(Error::NonPositiveCoefficient {
                x: argmin,
                value: min,
            });
        }
        Ok((min, max))
    }
}

impl Coefficient for CoefficientProfile {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let mut e = self.base;
        let mut ex = 0.0;
        for l in &self.layers {
            let z = l.steepness * (x - l.center);
            e += l.amplitude * z.tanh();
            ex += l.amplitude * l.steepness * sech2(z);
        }
        (e, ex)
    }

    fn bounds(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    fn integral_scales(&self) -> (f64, f64) {
        let (a, b) = (self.domain.lo, self.domain.hi);
        let mut int_eps = self.base * (b - a);
        let mut tv = 0.0;
        for l in &self.layers {
            let (za, zb) = (l.steepness * (a - l.center), l.steepness * (b - l.center));
            int_eps += l.amplitude / l.steepness * (ln_cosh(zb) - ln_cosh(za));
            tv += l.amplitude.abs() * (zb.tanh() - za.tanh());
        }
        (int_eps.abs(), tv)
    }

    fn layer_centers(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.center).collect()
    }
}

/// `‖eps_x / eps‖_p` by quadrature on `quad` (maximum over nodes for p = inf).
pub fn lp_norm_ratio(
    coeff: &(impl Coefficient + ?Sized),
    quad: &CompositeQuadrature,
    p: Exponent,
) -> Result<f64> {
    quad.check_domain(coeff.domain())?;
    let ratio: Vec<f64> = quad
        .nodes()
        .iter()
        .map(|&x| {
            let (e, ex) = coeff.eval(x);
            ex / e
        })
        .collect();
    Ok(p.weighted_norm(&ratio, quad.weights()))
}
