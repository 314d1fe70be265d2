//! Green's function, the norm-preserving sampling map and Nyström assembly.

use std::sync::Arc;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::formulation::{Formulation, FormulationKind};
use crate::linalg::DenseMatrix;
use crate::mesh::CompositeQuadrature;
use crate::norm::Exponent;
use crate::quadrature::Interval;
use crate::registry::Registry;

/// `(G(x,t), G_x(x,t))` for `u'' = σ` with zero Dirichlet data on `[a,b]`.
/// The diagonal `x = t` takes the `x ≥ t` branch.
pub fn green_pair(x: f64, t: f64, domain: Interval) -> (f64, f64) {
    let (a, b) = (domain.lo, domain.hi);
    let l = b - a;
    if x < t {
        ((x - a) * (t - b) / l, (t - b) / l)
    } else {
        ((x - b) * (t - a) / l, (t - a) / l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenKernel {
    /// `G(x, t)`
    Potential,
    /// `G_x(x, t)`
    Gradient,
    /// `∂G/∂t (x, t) = G_x(t, x)`; at `t = x` this takes the value of
    /// `G_x(x, x)`.
    TransposedGradient,
}

impl GreenKernel {
    fn eval(self, x: f64, t: f64, domain: Interval) -> f64 {
        match self {
            GreenKernel::Potential => green_pair(x, t, domain).0,
            GreenKernel::Gradient => green_pair(x, t, domain).1,
            GreenKernel::TransposedGradient => green_pair(t, x, domain).1,
        }
    }
}

/// How `∫ K(x,t) φ(t) dt` is turned into `Σ_j W_j(x) φ(x_j)`.
pub trait NystromScheme: Send + Sync {
    fn name(&self) -> &'static str;

    /// Fill `out` with the weights `W_j(x)` for the Green's kernel `kernel`.
    fn kernel_row(&self, quad: &CompositeQuadrature, kernel: GreenKernel, x: f64, out: &mut [f64]);

    /// Weights for `∫ k(x,t) ρ(t) φ(t) dt ≈ Σ_j W_j(x) φ(x_j)` with a known
    /// density `ρ`. By default `ρ` is sampled at the nodes like `φ`.
    fn density_row(&self, quad: &CompositeQuadrature, kernel: GreenKernel, x: f64, density: &Density<'_>, out: &mut [f64]) {
        self.kernel_row(quad, kernel, x, out);
        for (o, r) in out.iter_mut().zip(density.at_nodes) {
            *o *= r;
        }
    }
}

/// A density known both at the nodes and as a function.
pub struct Density<'a> {
    pub at_nodes: &'a [f64],
    pub eval: &'a dyn Fn(f64) -> f64,
}

/// Plain Nyström: `W_j(x) = K(x, x_j) w_j`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointScheme;

impl NystromScheme for PointScheme {
    fn name(&self) -> &'static str {
        "point"
    }

    fn kernel_row(&self, quad: &CompositeQuadrature, kernel: GreenKernel, x: f64, out: &mut [f64]) {
        let d = quad.domain();
        for ((o, &t), &w) in out.iter_mut().zip(quad.nodes()).zip(quad.weights()) {
            *o = kernel.eval(x, t, d) * w;
        }
    }
}

/// Nyström with product integration on the panel containing `x`.
///
/// Off that panel the Green's kernels are linear in `t`, so `K(x, x_j) w_j`
/// is already exact for panel polynomials. On it, the kink or jump at
/// `t = x` is handled by integrating the Lagrange basis separately on
/// either side of `x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PanelScheme;

impl NystromScheme for PanelScheme {
    fn name(&self) -> &'static str {
        "panel"
    }

    fn kernel_row(&self, quad: &CompositeQuadrature, kernel: GreenKernel, x: f64, out: &mut [f64]) {
        PointScheme.kernel_row(quad, kernel, x, out);
        self_panel(quad, kernel, x, &|_| 1.0, out);
    }

    fn density_row(&self, quad: &CompositeQuadrature, kernel: GreenKernel, x: f64, density: &Density<'_>, out: &mut [f64]) {
        PointScheme.density_row(quad, kernel, x, density, out);
        self_panel(quad, kernel, x, density.eval, out);
    }
}

/// Overwrite the weights of the panel containing `x` with the moments of
/// `k(x,·) ρ` against its Lagrange basis, split at the kink.
fn self_panel(quad: &CompositeQuadrature, kernel: GreenKernel, x: f64, rho: &dyn Fn(f64) -> f64, out: &mut [f64]) {
    let Ok(k) = quad.panel_of(x) else {
        return;
    };
    let d = quad.domain();
    let (a, b, l) = (d.lo, d.hi, d.len());
    let r = quad.panel_range(k);
    // t < x uses the x ≥ t branch and vice versa
    match kernel {
        GreenKernel::Potential => quad.split_moments(
            k,
            x,
            |t| (x - b) * (t - a) / l * rho(t),
            |t| (x - a) * (t - b) / l * rho(t),
            &mut out[r],
        ),
        GreenKernel::Gradient => quad.split_moments(k, x, |t| (t - a) / l * rho(t), |t| (t - b) / l * rho(t), &mut out[r]),
        GreenKernel::TransposedGradient => {
            quad.split_moments(k, x, |t| (x - b) / l * rho(t), |t| (x - a) / l * rho(t), &mut out[r])
        }
    }
}

pub fn default_schemes() -> Registry<dyn NystromScheme> {
    let mut reg: Registry<dyn NystromScheme> = Registry::new("Nyström scheme");
    reg.register(&["panel"], Arc::new(PanelScheme));
    reg.register(&["point"], Arc::new(PointScheme));
    reg
}

/// Samples scaled by `w_i^{1/p}`, so that the l^p norm of the entries
/// approximates the L^p norm of the sampled function.
#[derive(Debug, Clone, PartialEq)]
pub struct NormedVector {
    pub entries: Vec<f64>,
    pub p: Exponent,
    weights: Vec<f64>,
}

pub fn phi_map(samples: &[f64], quad: &CompositeQuadrature, p: Exponent) -> Result<NormedVector> {
    check_len(samples, quad.len())?;
    let entries = samples
        .iter()
        .zip(quad.weights())
        .map(|(f, &w)| f * p.weight_factor(w))
        .collect();
    Ok(NormedVector {
        entries,
        p,
        weights: quad.weights().to_vec(),
    })
}

impl NormedVector {
    /// Wrap already-weighted entries.
    pub fn from_weighted(entries: Vec<f64>, quad: &CompositeQuadrature, p: Exponent) -> Result<Self> {
        check_len(&entries, quad.len())?;
        Ok(Self {
            entries,
            p,
            weights: quad.weights().to_vec(),
        })
    }

    /// Point samples, dividing entry i by `w_i^{1/p}`.
    pub fn unweight(&self) -> Vec<f64> {
        self.entries
            .iter()
            .zip(&self.weights)
            .map(|(e, &w)| e / self.p.weight_factor(w))
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.p.vector_norm(&self.entries)
    }
}

fn check_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

/// `A_p = I + W^{1/p} K W^{-1/p}` with the Nyström weights folded into K.
pub fn assemble_matrix(
    formulation: &dyn Formulation,
    coeff: &dyn Coefficient,
    quad: &CompositeQuadrature,
    p: Exponent,
    scheme: &dyn NystromScheme,
) -> Result<DenseMatrix> {
    quad.check_domain(coeff.domain())?;
    let n = quad.len();
    let evals: Vec<(f64, f64)> = quad.nodes().iter().map(|&x| coeff.eval(x)).collect();
    let right: Vec<f64> = evals.iter().map(|&(e, ex)| formulation.right(e, ex)).collect();
    let right_fn = |t: f64| {
        let (e, ex) = coeff.eval(t);
        formulation.right(e, ex)
    };
    let density = Density {
        at_nodes: &right,
        eval: &right_fn,
    };
    let scale: Vec<f64> = quad.weights().iter().map(|&w| p.weight_factor(w)).collect();
    let mut a = DenseMatrix::zeros(n);
    let mut row = vec![0.0; n];
    for (i, &x) in quad.nodes().iter().enumerate() {
        let (e, ex) = evals[i];
        let left = formulation.left(e, ex);
        let out = a.row_mut(i);
        if left == 0.0 {
            out[i] = 1.0;
            continue;
        }
        scheme.density_row(quad, formulation.kernel(), x, &density, &mut row);
        for j in 0..n {
            out[j] = left * row[j] * scale[i] / scale[j];
        }
        out[i] += 1.0;
    }
    a.check_finite()?;
    Ok(a)
}

/// Unweighted right-hand side samples for `f` given at the nodes.
pub fn rhs_samples(
    formulation: &dyn Formulation,
    coeff: &dyn Coefficient,
    quad: &CompositeQuadrature,
    f_samples: &[f64],
    scheme: &dyn NystromScheme,
) -> Result<Vec<f64>> {
    check_len(f_samples, quad.len())?;
    let mut row = vec![0.0; quad.len()];
    Ok(quad
        .nodes()
        .iter()
        .zip(f_samples)
        .map(|(&x, &f)| {
            let e = coeff.eps(x);
            let potential = if formulation.needs_potential() {
                scheme.kernel_row(quad, GreenKernel::Potential, x, &mut row);
                row.iter().zip(f_samples).map(|(w, f)| w * f).sum::<f64>()
            } else {
                0.0
            };
            formulation.rhs(f / e, potential / e)
        })
        .collect())
}

/// An assembled weighted system `A_p y = b_p` and what it was built from.
#[derive(Clone)]
pub struct DiscreteSystem {
    pub matrix: DenseMatrix,
    /// Φ_p-weighted right-hand side.
    pub rhs: Vec<f64>,
    pub formulation: FormulationKind,
    pub p: Exponent,
    pub quad: Arc<CompositeQuadrature>,
    pub profile: Arc<dyn Coefficient>,
    pub scheme: &'static str,
}

impl std::fmt::Debug for DiscreteSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteSystem")
            .field("n", &self.matrix.n())
            .field("formulation", &self.formulation)
            .field("p", &self.p)
            .field("scheme", &self.scheme)
            .finish()
    }
}

impl DiscreteSystem {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Point values of a weighted solution vector.
    pub fn unweight(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(NormedVector::from_weighted(y.to_vec(), &self.quad, self.p)?.unweight())
    }

    /// `b − A y`.
    pub fn residual(&self, y: &[f64]) -> Vec<f64> {
        self.matrix
            .matvec(y)
            .iter()
            .zip(&self.rhs)
            .map(|(ay, b)| b - ay)
            .collect()
    }
}

/// Assemble with the default product-integration scheme.
pub fn assemble_system(
    formulation: &dyn Formulation,
    profile: Arc<dyn Coefficient>,
    quad: Arc<CompositeQuadrature>,
    p: Exponent,
    f_samples: &[f64],
) -> Result<DiscreteSystem> {
    assemble_with(formulation, profile, quad, p, f_samples, &PanelScheme)
}

pub fn assemble_with(
    formulation: &dyn Formulation,
    profile: Arc<dyn Coefficient>,
    quad: Arc<CompositeQuadrature>,
    p: Exponent,
    f_samples: &[f64],
    scheme: &dyn NystromScheme,
) -> Result<DiscreteSystem> {
    let matrix = assemble_matrix(formulation, profile.as_ref(), &quad, p, scheme)?;
    let rhs = rhs_samples(formulation, profile.as_ref(), &quad, f_samples, scheme)?;
    let rhs = phi_map(&rhs, &quad, p)?.entries;
    Ok(DiscreteSystem {
        matrix,
        rhs,
        formulation: formulation.kind(),
        p,
        quad,
        profile,
        scheme: scheme.name(),
    })
}

/// `(u(x), u_x(x))` for `u = ∫ G(x,t) σ(t) dt`, with σ given at the nodes.
pub fn potential_eval(sigma: &[f64], quad: &CompositeQuadrature, domain: Interval, x: f64) -> Result<(f64, f64)> {
    potential_eval_with(sigma, quad, domain, x, &PanelScheme)
}

pub fn potential_eval_with(
    sigma: &[f64],
    quad: &CompositeQuadrature,
    domain: Interval,
    x: f64,
    scheme: &dyn NystromScheme,
) -> Result<(f64, f64)> {
    check_len(sigma, quad.len())?;
    quad.check_domain(domain)?;
    domain.check_contains(x)?;
    let mut row = vec![0.0; quad.len()];
    let dot = |row: &[f64]| row.iter().zip(sigma).map(|(w, s)| w * s).sum::<f64>();
    scheme.kernel_row(quad, GreenKernel::Potential, x, &mut row);
    let u = dot(&row);
    scheme.kernel_row(quad, GreenKernel::Gradient, x, &mut row);
    Ok((u, dot(&row)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::{make_profile, CoefficientProfile, Layer};
    use crate::formulation::{SigmaFormulation, UFormulation};
    use crate::mesh::refine_adaptive;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn green_values() {
        assert_eq!(green_pair(0.0, 0.5, unit()).0, 0.0);
        assert_eq!(green_pair(0.25, 0.5, unit()), (-0.125, -0.5));
        assert_eq!(green_pair(0.5, 0.25, unit()), (-0.125, 0.25));
        assert_eq!(green_pair(0.3, 0.7, unit()).0, green_pair(0.7, 0.3, unit()).0);
        assert_eq!(green_pair(0.4, 0.4, unit()).1, 0.4);
    }

    #[test]
    fn phi_map_preserves_norms_of_constants() {
        let q = CompositeQuadrature::uniform(unit(), 3, 16).unwrap();
        let ones = vec![1.0; q.len()];
        for p in [Exponent::One, Exponent::Two, Exponent::Inf] {
            let v = phi_map(&ones, &q, p).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-14);
            let back = v.unweight();
            assert!(back.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn phi_map_is_exact_in_l2_for_low_degree() {
        let q = CompositeQuadrature::uniform(unit(), 2, 16).unwrap();
        let f = |x: f64| 1.0 - 3.0 * x + x.powi(7);
        let s: Vec<f64> = q.nodes().iter().map(|&x| f(x)).collect();
        let v = phi_map(&s, &q, Exponent::Two).unwrap();
        // ∫ f² on [0,1], expanded by hand
        let exact: f64 = 1.0 - 3.0 + 3.0 + 2.0 / 8.0 - 6.0 / 9.0 + 1.0 / 15.0;
        assert!((v.norm() - exact.sqrt()).abs() < 1e-12 * exact.sqrt());
    }

    #[test]
    fn constant_coefficient_gives_identity() {
        let c: Arc<dyn Coefficient> = Arc::new(CoefficientProfile::constant(1.0, unit()).unwrap());
        let q = Arc::new(CompositeQuadrature::uniform(unit(), 2, 8).unwrap());
        let f = vec![1.0; q.len()];
        for form in [&SigmaFormulation as &dyn Formulation, &UFormulation] {
            for p in Exponent::ALL {
                let s = assemble_system(form, c.clone(), q.clone(), p, &f).unwrap();
                assert_eq!(s.matrix, DenseMatrix::identity(q.len()));
            }
        }
    }

    #[test]
    fn two_node_hand_example() {
        // eps = 1 + x on [0,1]
        let eps = make_profile(1.5, vec![], unit()).unwrap();
        struct Linear(CoefficientProfile);
        impl Coefficient for Linear {
            fn domain(&self) -> Interval {
                self.0.domain()
            }
            fn eval(&self, x: f64) -> (f64, f64) {
                (1.0 + x, 1.0)
            }
            fn bounds(&self) -> (f64, f64) {
                (1.0, 2.0)
            }
        }
        let c = Linear(eps);
        let q = CompositeQuadrature::uniform(unit(), 2, 1).unwrap();
        let a = assemble_matrix(&SigmaFormulation, &c, &q, Exponent::Two, &PointScheme).unwrap();
        assert!((a[(0, 1)] - -0.1).abs() < 1e-15);
        assert!((a[(0, 0)] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn uniform_weights_make_p_irrelevant() {
        let c = CoefficientProfile::tanh_layer(5.0, 1.0).unwrap();
        let q = CompositeQuadrature::uniform(c.domain(), 40, 1).unwrap();
        for scheme in [&PointScheme as &dyn NystromScheme, &PanelScheme] {
            let a1 = assemble_matrix(&SigmaFormulation, &c, &q, Exponent::One, scheme).unwrap();
            let a2 = assemble_matrix(&SigmaFormulation, &c, &q, Exponent::Two, scheme).unwrap();
            let ai = assemble_matrix(&SigmaFormulation, &c, &q, Exponent::Inf, scheme).unwrap();
            assert!(a1.max_abs_diff(&ai) <= 1e-15);
            assert!(a2.max_abs_diff(&ai) <= 1e-15);
        }
    }

    #[test]
    fn potential_of_unit_density() {
        let q = CompositeQuadrature::uniform(unit(), 3, 16).unwrap();
        let sigma = vec![1.0; q.len()];
        let (u, _) = potential_eval(&sigma, &q, unit(), 0.5).unwrap();
        assert!((u - -0.125).abs() < 1e-14);
        let (u0, ux0) = potential_eval(&sigma, &q, unit(), 0.0).unwrap();
        assert!(u0.abs() < 1e-13);
        assert!((ux0 - -0.5).abs() < 1e-14);
        let (u1, _) = potential_eval(&sigma, &q, unit(), 1.0).unwrap();
        assert!(u1.abs() < 1e-13);
        // exact at an interior node too, where the plain sum is not
        let x = q.nodes()[20];
        let (u, ux) = potential_eval(&sigma, &q, unit(), x).unwrap();
        assert!((u - x * (x - 1.0) / 2.0).abs() < 1e-14);
        assert!((ux - (x - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_kernel_at_node_for_point_scheme() {
        let c = make_profile(2.0, vec![Layer::new(1.0, 10.0, 0.5)], unit()).unwrap();
        let q = refine_adaptive(&c, 16, 1e-15).unwrap();
        let a = assemble_matrix(&SigmaFormulation, &c, &q, Exponent::Inf, &PointScheme).unwrap();
        for i in [0, 7, q.len() - 1] {
            let x = q.nodes()[i];
            let (e, ex) = c.eval(x);
            let k = ex / e * green_pair(x, x, unit()).1 * q.weights()[i];
            assert!((a[(i, i)] - 1.0 - k).abs() < 1e-15);
        }
    }

    #[test]
    fn domain_mismatch_rejected() {
        let c = CoefficientProfile::tanh_layer(5.0, 1.0).unwrap();
        let q = CompositeQuadrature::uniform(unit(), 2, 4).unwrap();
        assert!(matches!(
            assemble_matrix(&SigmaFormulation, &c, &q, Exponent::One, &PanelScheme),
            Err(Error::DomainMismatch { .. })
        ));
    }
}
