//! End-to-end solution of `(eps u')' = f`, `u(a) = γ_a`, `u(b) = γ_b`.
//!
//! The boundary data are removed with the linear lift
//! `l(x) = γ_a + m (x − a)`, leaving `v = u − l` with zero boundary values
//! and right-hand side `f − m eps_x`.

use std::sync::Arc;

use crate::analytic::SourceFn;
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::formulation::{Formulation, FormulationKind};
use crate::linalg::{cond_p, default_solvers, GmresTrace, LinearSolver};
use crate::mesh::{refine_with, CompositeQuadrature, RefineOptions};
use crate::norm::Exponent;
use crate::operators::{assemble_with, potential_eval_with, Density, DiscreteSystem, GreenKernel, NystromScheme, PanelScheme};

/// Systems up to this size are solved directly when the method is "auto".
pub const DIRECT_SOLVE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lift {
    pub slope: f64,
    pub gamma_a: f64,
    pub a: f64,
}

impl Lift {
    pub fn new(gamma_a: f64, gamma_b: f64, a: f64, b: f64) -> Self {
        Self {
            slope: (gamma_b - gamma_a) / (b - a),
            gamma_a,
            a,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.gamma_a + self.slope * (x - self.a)
    }
}

/// How formulation U recovers `u_x` from nodal values of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeRecovery {
    /// Differentiate the integral equation:
    /// `eps v_x = ∫ G_x f − (1/(b−a)) ∫ eps_x v`.
    #[default]
    Representation,
    /// Differentiate the panel interpolant of `v`.
    Interpolant,
}

#[derive(Clone)]
pub struct SolveOptions {
    pub formulation: Arc<dyn Formulation>,
    pub p: Exponent,
    /// "direct", "gmres" or "auto".
    pub method: String,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub scheme: Arc<dyn NystromScheme>,
    pub refine: RefineOptions,
    pub error_bound: bool,
    pub derivative: DerivativeRecovery,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            formulation: FormulationKind::Sigma.strategy(),
            p: Exponent::One,
            method: "auto".into(),
            tol: 1e-15,
            max_iter: None,
            scheme: Arc::new(PanelScheme),
            refine: RefineOptions::default(),
            error_bound: true,
            derivative: DerivativeRecovery::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub u_x: Vec<f64>,
    /// Only for formulation Sigma.
    pub sigma: Option<Vec<f64>>,
    /// The solution of the weighted system, before unweighting.
    pub weighted_solution: Vec<f64>,
    pub method: &'static str,
    pub trace: Option<GmresTrace>,
    pub cond_1: Option<f64>,
    pub error_bound: Option<f64>,
    pub panel_count: usize,
    pub n: usize,
    pub lift: Lift,
    /// `f − m eps_x` at the nodes.
    pub source: Vec<f64>,
    pub system: DiscreteSystem,
}

impl SolveReport {
    pub fn quad(&self) -> &CompositeQuadrature {
        &self.system.quad
    }

    /// `(u, u_x)` anywhere in the domain: through the potential of σ for
    /// formulation Sigma, through the integral equation itself for U.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let quad = self.quad();
        let (v, v_x) = match &self.sigma {
            Some(sigma) => potential_eval_with(sigma, quad, quad.domain(), x, &PanelScheme)?,
            None => {
                let v: Vec<f64> = self.u.iter().zip(&self.nodes).map(|(u, &t)| u - self.lift.eval(t)).collect();
                u_form_eval(self.system.profile.as_ref(), quad, &self.source, &v, x, &PanelScheme)?
            }
        };
        Ok((v + self.lift.eval(x), v_x + self.lift.slope))
    }
}

/// Solve with the given formulation, exponent and method ("direct",
/// "gmres" or "auto") and otherwise default options.
#[allow(clippy::too_many_arguments)]
pub fn solve_bvp(
    profile: Arc<dyn Coefficient>,
    f: SourceFn,
    gamma_a: f64,
    gamma_b: f64,
    formulation: FormulationKind,
    p: Exponent,
    method: &str,
    tol: f64,
) -> Result<SolveReport> {
    let opts = SolveOptions {
        formulation: formulation.strategy(),
        p,
        method: method.to_string(),
        tol,
        ..SolveOptions::default()
    };
    solve_with(profile, f, gamma_a, gamma_b, &opts)
}

pub fn solve_with(
    profile: Arc<dyn Coefficient>,
    f: SourceFn,
    gamma_a: f64,
    gamma_b: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if !(gamma_a.is_finite() && gamma_b.is_finite()) {
        return Err(Error::InvalidProfile("boundary values must be finite".into()));
    }
    let quad = Arc::new(refine_with(profile.as_ref(), &opts.refine)?);
    solve_on_mesh(profile, quad, f, gamma_a, gamma_b, opts)
}

/// As [`solve_with`], on a prebuilt mesh.
pub fn solve_on_mesh(
    profile: Arc<dyn Coefficient>,
    quad: Arc<CompositeQuadrature>,
    f: SourceFn,
    gamma_a: f64,
    gamma_b: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let d = profile.domain();
    let lift = Lift::new(gamma_a, gamma_b, d.lo, d.hi);
    let nodes = quad.nodes().to_vec();
    let f_mod: Vec<f64> = nodes.iter().map(|&x| f(x) - lift.slope * profile.eps_x(x)).collect();
    let system = assemble_with(
        opts.formulation.as_ref(),
        profile.clone(),
        quad.clone(),
        opts.p,
        &f_mod,
        opts.scheme.as_ref(),
    )?;
    let n = system.n();

    let solver = pick_solver(&opts.method, n)?;
    let solution = solver.solve(&system.matrix, &system.rhs, opts.tol, opts.max_iter)?;
    if let Some(trace) = &solution.trace {
        if !trace.converged {
            return Err(Error::GmresCap {
                tol: opts.tol,
                iterations: trace.iterations,
                residual: trace.residuals.last().copied().unwrap_or(f64::NAN),
            });
        }
    }
    let unknown = system.unweight(&solution.x)?;

    let (v, v_x, sigma) = match system.formulation {
        FormulationKind::Sigma => {
            let mut v = Vec::with_capacity(n);
            let mut v_x = Vec::with_capacity(n);
            for &x in &nodes {
                let (a, b) = potential_eval_with(&unknown, &quad, d, x, opts.scheme.as_ref())?;
                v.push(a);
                v_x.push(b);
            }
            (v, v_x, Some(unknown))
        }
        FormulationKind::U => {
            let v_x = match opts.derivative {
                DerivativeRecovery::Interpolant => quad.differentiate(&unknown)?,
                DerivativeRecovery::Representation => {
                    let mut v_x = Vec::with_capacity(n);
                    for &x in &nodes {
                        v_x.push(u_form_eval(profile.as_ref(), &quad, &f_mod, &unknown, x, opts.scheme.as_ref())?.1);
                    }
                    v_x
                }
            };
            (unknown, v_x, None)
        }
    };
    let u = v.iter().zip(&nodes).map(|(v, &x)| v + lift.eval(x)).collect();
    let u_x = v_x.iter().map(|d| d + lift.slope).collect();

    let (cond_1, bound) = if opts.error_bound {
        let c = cond_p(&system.matrix, Exponent::One)?;
        (Some(c), Some(bound_from(c, &system, &solution.x)))
    } else {
        (None, None)
    };

    Ok(SolveReport {
        nodes,
        u,
        u_x,
        sigma,
        weighted_solution: solution.x,
        method: solver.name(),
        trace: solution.trace,
        cond_1,
        error_bound: bound,
        panel_count: quad.panel_count(),
        n,
        lift,
        source: f_mod,
        system,
    })
}

/// `(v(x), v_x(x))` from nodal values of the U-form solution `v`:
/// `eps v = ∫ G f − ∫ ∂_t G eps_x v`, and its derivative
/// `eps v_x = ∫ G_x f − (1/(b−a)) ∫ eps_x v`.
fn u_form_eval(
    profile: &dyn Coefficient,
    quad: &CompositeQuadrature,
    source: &[f64],
    v: &[f64],
    x: f64,
    scheme: &dyn NystromScheme,
) -> Result<(f64, f64)> {
    let d = quad.domain();
    d.check_contains(x)?;
    let slopes: Vec<f64> = quad.nodes().iter().map(|&t| profile.eps_x(t)).collect();
    let slope_fn = |t: f64| profile.eps_x(t);
    let density: Vec<f64> = slopes.iter().zip(v).map(|(s, v)| s * v).collect();
    let mut row = vec![0.0; quad.len()];
    let dot = |row: &[f64], y: &[f64]| row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    scheme.kernel_row(quad, GreenKernel::Potential, x, &mut row);
    let pot = dot(&row, source);
    let weights = Density {
        at_nodes: &slopes,
        eval: &slope_fn,
    };
    scheme.density_row(quad, GreenKernel::TransposedGradient, x, &weights, &mut row);
    let coupling = dot(&row, v);
    scheme.kernel_row(quad, GreenKernel::Gradient, x, &mut row);
    let grad = dot(&row, source);
    let mean = quad.integrate(&density) / d.len();
    let e = profile.eps(x);
    Ok(((pot - coupling) / e, (grad - mean) / e))
}

fn pick_solver(method: &str, n: usize) -> Result<Arc<dyn LinearSolver>> {
    let name = match method.trim().to_ascii_lowercase().as_str() {
        "auto" if n <= DIRECT_SOLVE_LIMIT => "direct".to_string(),
        "auto" => "gmres".to_string(),
        other => other.to_string(),
    };
    default_solvers().get(&name)
}

/// `cond₁(A) ‖r‖₁ / ‖b‖₁` for the weighted solution held by `report`,
/// bounding its relative l¹ error.
pub fn error_bound(report: &SolveReport, system: &DiscreteSystem) -> Result<f64> {
    let c = match report.cond_1 {
        Some(c) => c,
        None => cond_p(&system.matrix, Exponent::One)?,
    };
    Ok(bound_from(c, system, &report.weighted_solution))
}

fn bound_from(cond_1: f64, system: &DiscreteSystem, y: &[f64]) -> f64 {
    let r = system.residual(y);
    let b1 = Exponent::One.vector_norm(&system.rhs);
    if b1 == 0.0 {
        return 0.0;
    }
    cond_1 * Exponent::One.vector_norm(&r) / b1
}
