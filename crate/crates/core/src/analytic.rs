//! Closed-form solution of `(eps u')' = f` and exact inverses of the two
//! integral operators.
//!
//! With `F(x) = ∫_a^x f`, every solution has `eps u_x = F + C`. The
//! boundary values fix
//! `C = (γ_b − γ_a − ∫_a^b F/eps) / ∫_a^b 1/eps`,
//! so `u = γ_a + ∫_a^x (F + C)/eps` and `σ = u_xx = f/eps − eps_x (F + C)/eps²`.
//! All integrals are taken on a panel mesh that resolves eps.

use std::sync::Arc;

use crate::coefficient::Coefficient;
use crate::error::Result;
use crate::formulation::FormulationKind;
use crate::mesh::{refine_adaptive, CompositeQuadrature, DEFAULT_ORDER, DEFAULT_TOL};

pub type SourceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ClosedFormSolution {
    profile: Arc<dyn Coefficient>,
    f: SourceFn,
    quad: Arc<CompositeQuadrature>,
    gamma_a: f64,
    gamma_b: f64,
    /// `eps(a) u_x(a)`.
    flux_a: f64,
    /// `∫_a^b 1/eps`.
    inv_eps_integral: f64,
}

impl ClosedFormSolution {
    pub fn new(
        profile: Arc<dyn Coefficient>,
        f: SourceFn,
        gamma_a: f64,
        gamma_b: f64,
        quad: Arc<CompositeQuadrature>,
    ) -> Result<Self> {
        quad.check_domain(profile.domain())?;
        let d = profile.domain();
        let inv_eps_integral = quad.integrate_fn(d.lo, d.hi, &[], |s| 1.0 / profile.eps(s));
        let mut sol = Self {
            profile,
            f,
            quad,
            gamma_a,
            gamma_b,
            flux_a: 0.0,
            inv_eps_integral,
        };
        let big_f_over_eps = sol
            .quad
            .integrate_fn(d.lo, d.hi, &[], |s| sol.antiderivative(s) / sol.profile.eps(s));
        sol.flux_a = (gamma_b - gamma_a - big_f_over_eps) / inv_eps_integral;
        Ok(sol)
    }

    /// Homogeneous boundary values on a freshly refined mesh.
    pub fn homogeneous(profile: Arc<dyn Coefficient>, f: SourceFn) -> Result<Self> {
        let quad = Arc::new(refine_adaptive(profile.as_ref(), DEFAULT_ORDER, DEFAULT_TOL)?);
        Self::new(profile, f, 0.0, 0.0, quad)
    }

    pub fn flux_at_a(&self) -> f64 {
        self.flux_a
    }

    pub fn inv_eps_integral(&self) -> f64 {
        self.inv_eps_integral
    }

    pub fn boundary_values(&self) -> (f64, f64) {
        (self.gamma_a, self.gamma_b)
    }

    pub fn quad(&self) -> &CompositeQuadrature {
        &self.quad
    }

    fn antiderivative(&self, x: f64) -> f64 {
        let a = self.profile.domain().lo;
        self.quad.integrate_fn(a, x, &[], |s| (self.f)(s))
    }

    /// `(u, u_x, σ)` at `x`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        let d = self.profile.domain();
        d.check_contains(x)?;
        let flux = |s: f64| self.antiderivative(s) + self.flux_a;
        let u = if x == d.hi {
            self.gamma_b
        } else {
            self.gamma_a + self.quad.integrate_fn(d.lo, x, &[], |s| flux(s) / self.profile.eps(s))
        };
        let (e, ex) = self.profile.eval(x);
        let fx = flux(x);
        Ok((u, fx / e, (self.f)(x) / e - ex * fx / (e * e)))
    }
}

/// `(u, u_x, σ)` at `x` for zero boundary values.
pub fn closed_form_solution(profile: Arc<dyn Coefficient>, f: SourceFn, x: f64) -> Result<(f64, f64, f64)> {
    ClosedFormSolution::homogeneous(profile, f)?.eval(x)
}

/// `R(x, t)` with `(I + K)⁻¹ = I − R`, for either formulation. `H(0) = 1`.
pub fn resolvent_kernel(
    kind: FormulationKind,
    profile: &dyn Coefficient,
    quad: &CompositeQuadrature,
    x: f64,
    t: f64,
) -> Result<f64> {
    quad.check_domain(profile.domain())?;
    let d = profile.domain();
    d.check_contains(x)?;
    d.check_contains(t)?;
    let inv = |s: f64| 1.0 / profile.eps(s);
    let total = quad.integrate_fn(d.lo, d.hi, &[], inv);
    let heaviside = if x >= t { 1.0 } else { 0.0 };
    Ok(match kind {
        FormulationKind::Sigma => {
            let (ex, exx) = profile.eval(x);
            let et = profile.eps(t);
            let tail = quad.integrate_fn(t, d.hi, &[], inv);
            exx / (ex * ex) * (heaviside * et - et * tail / total)
        }
        FormulationKind::U => {
            let (et, etx) = profile.eval(t);
            let head = quad.integrate_fn(d.lo, x, &[], inv);
            -etx / (et * et) * (heaviside * et - et * head / total)
        }
    })
}

/// `(I − R) g` at the nodes, for `g` sampled at the nodes of `quad`.
pub fn apply_inverse(
    kind: FormulationKind,
    profile: &dyn Coefficient,
    g: &[f64],
    quad: &CompositeQuadrature,
) -> Result<Vec<f64>> {
    quad.check_domain(profile.domain())?;
    let evals: Vec<(f64, f64)> = quad.nodes().iter().map(|&x| profile.eval(x)).collect();
    let inv: Vec<f64> = evals.iter().map(|&(e, _)| 1.0 / e).collect();
    let total = quad.integrate(&inv);
    match kind {
        FormulationKind::Sigma => {
            let running = quad.cumulative_weighted(g, |t| profile.eps(t))?;
            let weighted: Vec<f64> = running.iter().zip(&inv).map(|(r, i)| r * i).collect();
            let mean = quad.integrate(&weighted) / total;
            Ok(g.iter()
                .zip(&evals)
                .zip(&running)
                .map(|((g, &(e, ex)), r)| g - ex / (e * e) * (r - mean))
                .collect())
        }
        FormulationKind::U => {
            let ratio = |t: f64| {
                let (e, ex) = profile.eval(t);
                ex / e
            };
            let h: Vec<f64> = g.iter().zip(&evals).map(|(g, &(e, ex))| g * ex / e).collect();
            let running = quad.cumulative_weighted(g, ratio)?;
            let slope = quad.integrate(&h) / total;
            let inv_running = quad.cumulative_weighted(&vec![1.0; g.len()], |t| 1.0 / profile.eps(t))?;
            Ok(g.iter()
                .zip(&running)
                .zip(&inv_running)
                .map(|((g, r), j)| g + r - slope * j)
                .collect())
        }
    }
}

/// `(I − R) g` at the points `xs` for a function `g` that may jump at
/// `breaks`. Integrals are split at the breaks so they stay exact for
/// piecewise-smooth `g`.
pub fn apply_inverse_fn<G: Fn(f64) -> f64>(
    kind: FormulationKind,
    profile: &dyn Coefficient,
    quad: &CompositeQuadrature,
    g: G,
    breaks: &[f64],
    xs: &[f64],
) -> Result<Vec<f64>> {
    quad.check_domain(profile.domain())?;
    let d = profile.domain();
    let inv = |s: f64| 1.0 / profile.eps(s);
    let total = quad.integrate_fn(d.lo, d.hi, breaks, inv);
    match kind {
        FormulationKind::Sigma => {
            let running = |s: f64| quad.integrate_fn(d.lo, s, breaks, |t| g(t) * profile.eps(t));
            let mean = quad.integrate_fn(d.lo, d.hi, breaks, |s| running(s) * inv(s)) / total;
            Ok(xs.iter()
                .map(|&x| {
                    let (e, ex) = profile.eval(x);
                    g(x) - ex / (e * e) * (running(x) - mean)
                })
                .collect())
        }
        FormulationKind::U => {
            let h = |t: f64| {
                let (e, ex) = profile.eval(t);
                g(t) * ex / e
            };
            let slope = quad.integrate_fn(d.lo, d.hi, breaks, h) / total;
            Ok(xs.iter()
                .map(|&x| {
                    g(x) + quad.integrate_fn(d.lo, x, breaks, h)
                        - slope * quad.integrate_fn(d.lo, x, breaks, inv)
                })
                .collect())
        }
    }
}
