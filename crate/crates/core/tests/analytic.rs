mod common;

use std::sync::Arc;

use npnys::analytic::{apply_inverse, apply_inverse_fn, resolvent_kernel, ClosedFormSolution, SourceFn};
use npnys::formulation::FormulationKind;
use npnys::linalg::lu_factor;
use npnys::operators::{assemble_matrix, potential_eval, PanelScheme};
use npnys::{refine_adaptive, Coefficient, CoefficientProfile, CompositeQuadrature, Exponent};

use common::{adaptive_simpson, constant_source, forward, manufactured, max_abs_diff, random_poly, suite};
use rand::SeedableRng;

fn mesh(profile: &dyn Coefficient) -> Arc<CompositeQuadrature> {
    Arc::new(refine_adaptive(profile, 16, 1e-15).unwrap())
}

fn oracle(profile: Arc<dyn Coefficient>, f: SourceFn, gamma: (f64, f64)) -> ClosedFormSolution {
    let quad = mesh(profile.as_ref());
    ClosedFormSolution::new(profile, f, gamma.0, gamma.1, quad).unwrap()
}

#[test]
fn inverse_eps_integral_is_bracketed() {
    for (_, profile) in suite() {
        let sol = oracle(profile.clone(), constant_source(1.0), (0.0, 0.0));
        let (m, big_m) = profile.bounds();
        let l = profile.domain().len();
        let v = sol.inv_eps_integral();
        assert!(v >= l / big_m * (1.0 - 1e-14) && v <= l / m * (1.0 + 1e-14));
    }
}

#[test]
fn homogeneous_boundary_values() {
    for (name, profile) in suite() {
        let d = profile.domain();
        for f in [constant_source(1.0), manufactured(profile.clone()).0] {
            let sol = ClosedFormSolution::homogeneous(profile.clone(), f).unwrap();
            let (ua, _, _) = sol.eval(d.lo).unwrap();
            let (ub, _, _) = sol.eval(d.hi).unwrap();
            // just inside b the value comes from the full integral
            let (near_b, _, _) = sol.eval(d.hi - 1e-13).unwrap();
            assert!(ua.abs() < 1e-11, "{name}: u(a) = {ua}");
            assert!(ub.abs() < 1e-11 && near_b.abs() < 1e-11, "{name}: u(b) = {ub}, u(b−) = {near_b}");
        }
    }
}

/// `u(x) = γ_a + ∫_a^x (F + C)/eps` with `F(s) = sin s − sin a` for `f = cos`,
/// every integral by adaptive Simpson.
#[test]
fn closed_form_matches_simpson() {
    for (name, profile) in suite() {
        let d = profile.domain();
        let (ga, gb) = (1.0, 2.0);
        let big_f = |s: f64| s.sin() - d.lo.sin();
        let inv = adaptive_simpson(&|s| 1.0 / profile.eps(s), d.lo, d.hi, 1e-15);
        let f_over = adaptive_simpson(&|s| big_f(s) / profile.eps(s), d.lo, d.hi, 1e-15);
        let c = (gb - ga - f_over) / inv;
        let sol = oracle(profile.clone(), Arc::new(|x: f64| x.cos()), (ga, gb));
        assert!((sol.inv_eps_integral() - inv).abs() < 1e-12 * inv);
        assert!((sol.flux_at_a() - c).abs() < 1e-10 * c.abs().max(1.0), "{name}: C {} vs {c}", sol.flux_at_a());
        for k in 0..=20 {
            let x = d.lo + d.len() * k as f64 / 20.0;
            let expected = ga + adaptive_simpson(&|s| (big_f(s) + c) / profile.eps(s), d.lo, x, 1e-15);
            let (u, ux, _) = sol.eval(x).unwrap();
            assert!((u - expected).abs() < 1e-10, "{name} at {x}: {u} vs {expected}");
            let flux = (big_f(x) + c) / profile.eps(x);
            assert!((ux - flux).abs() < 1e-10 * flux.abs().max(1.0));
        }
    }
}

#[test]
fn manufactured_solution_is_recovered() {
    for (name, profile) in suite() {
        let (f, exact, exact_x) = manufactured(profile.clone());
        let sol = ClosedFormSolution::homogeneous(profile.clone(), f).unwrap();
        let nodes = sol.quad().nodes().to_vec();
        for x in nodes.into_iter().step_by(3) {
            let (u, ux, _) = sol.eval(x).unwrap();
            assert!((u - exact(x)).abs() < 1e-10, "{name} at {x}: {u} vs {}", exact(x));
            assert!((ux - exact_x(x)).abs() < 1e-9, "{name} at {x}: u_x {ux} vs {}", exact_x(x));
        }
    }
}

fn sampled_round_trip(kind: FormulationKind) -> f64 {
    let profile = CoefficientProfile::tanh_layer(500.0, 1.0).unwrap();
    let quad = mesh(&profile);
    let a = assemble_matrix(kind.strategy().as_ref(), &profile, &quad, Exponent::Inf, &PanelScheme).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let g = random_poly(&mut rng, 10, profile.domain());
        let samples: Vec<f64> = quad.nodes().iter().map(|&x| g(x)).collect();
        let back = apply_inverse(kind, &profile, &a.matvec(&samples), &quad).unwrap();
        worst = worst.max(max_abs_diff(&back, &samples) / Exponent::Inf.vector_norm(&samples));
    }
    worst
}

#[test]
fn sampled_inverse_undoes_the_dense_operator_u() {
    let err = sampled_round_trip(FormulationKind::U);
    assert!(err < 1e-9, "relative error {err:.2e}");
}

#[test]
#[ignore = "known red: the sampled Sigma inverse reaches 3.3e-9 on the δ=500 mesh, see project notes"]
fn sampled_inverse_undoes_the_dense_operator_sigma() {
    let err = sampled_round_trip(FormulationKind::Sigma);
    assert!(err < 1e-9, "relative error {err:.2e}");
}

#[test]
fn closure_inverse_undoes_the_continuous_operator() {
    let profile = CoefficientProfile::tanh_layer(500.0, 1.0).unwrap();
    let quad = mesh(&profile);
    let mut rng = rand::rngs::StdRng::seed_from_u64(6);
    for kind in FormulationKind::ALL {
        for _ in 0..3 {
            let g = random_poly(&mut rng, 10, profile.domain());
            let image = |x: f64| forward(kind, &profile, &quad, &g, x);
            let back = apply_inverse_fn(kind, &profile, &quad, image, &[], quad.nodes()).unwrap();
            let samples: Vec<f64> = quad.nodes().iter().map(|&x| g(x)).collect();
            let err = max_abs_diff(&back, &samples);
            assert!(err < 1e-9 * Exponent::Inf.vector_norm(&samples), "{kind}: {err:.2e}");
        }
    }
}

/// Columns of the LU inverse of `A_∞` applied to smooth data against the
/// resolvent integral `g(x) − ∫ R(x,t) g(t) dt`, split at the jump `t = x`.
#[test]
fn resolvent_matches_brute_force_inverse() {
    for (name, profile) in suite().into_iter().skip(1) {
        let quad = mesh(profile.as_ref());
        let d = profile.domain();
        let g = |x: f64| 1.0 + (1.7 * x).sin();
        let samples: Vec<f64> = quad.nodes().iter().map(|&x| g(x)).collect();
        for kind in FormulationKind::ALL {
            let a = assemble_matrix(kind.strategy().as_ref(), profile.as_ref(), &quad, Exponent::Inf, &PanelScheme).unwrap();
            let brute = lu_factor(&a).unwrap().solve(&samples).unwrap();
            for i in (0..quad.len()).step_by(quad.len() / 12) {
                let x = quad.nodes()[i];
                let r = quad.integrate_fn(d.lo, d.hi, &[x], |t| resolvent_kernel(kind, profile.as_ref(), &quad, x, t).unwrap() * g(t));
                let expected = g(x) - r;
                assert!((brute[i] - expected).abs() < 1e-9 * expected.abs().max(1.0), "{name}/{kind} at {x}: {} vs {expected}", brute[i]);
            }
        }
    }
}

#[test]
fn resolvent_spot_value_for_u() {
    // R₂(0.5, 0.25) with both integrals of 1/eps by adaptive Simpson
    let profile = CoefficientProfile::tanh_layer_on(5.0, 0.4, npnys::Interval::new(0.0, 1.0).unwrap()).unwrap();
    let quad = mesh(&profile);
    let (x, t) = (0.5, 0.25);
    let inv = |s: f64| 1.0 / profile.eps(s);
    let head = adaptive_simpson(&inv, 0.0, x, 1e-15);
    let total = adaptive_simpson(&inv, 0.0, 1.0, 1e-15);
    let (et, etx) = profile.eval(t);
    let expected = -etx / (et * et) * (et - et * head / total);
    let got = resolvent_kernel(FormulationKind::U, &profile, &quad, x, t).unwrap();
    assert!((got - expected).abs() < 1e-12 * expected.abs());
}

#[test]
fn density_reproduces_solution() {
    for (name, profile) in suite() {
        for f in [constant_source(1.0), manufactured(profile.clone()).0] {
            let sol = ClosedFormSolution::homogeneous(profile.clone(), f).unwrap();
            let quad = sol.quad().clone();
            let evals: Vec<(f64, f64, f64)> = quad.nodes().iter().map(|&x| sol.eval(x).unwrap()).collect();
            let sigma: Vec<f64> = evals.iter().map(|e| e.2).collect();
            for (k, &x) in quad.nodes().iter().enumerate().step_by(4) {
                let (u, ux) = potential_eval(&sigma, &quad, profile.domain(), x).unwrap();
                assert!((u - evals[k].0).abs() < 1e-10, "{name} at {x}: {u} vs {}", evals[k].0);
                assert!((ux - evals[k].1).abs() < 1e-9 * evals[k].1.abs().max(1.0));
            }
        }
    }
}

#[test]
fn density_concentrates_as_layers_steepen() {
    let norms = |delta: f64| {
        let profile: Arc<dyn Coefficient> = Arc::new(CoefficientProfile::tanh_layer(delta, 1.0).unwrap());
        let sol = ClosedFormSolution::homogeneous(profile, constant_source(1.0)).unwrap();
        let quad = sol.quad().clone();
        let sigma: Vec<f64> = quad.nodes().iter().map(|&x| sol.eval(x).unwrap().2).collect();
        (
            Exponent::Inf.weighted_norm(&sigma, quad.weights()),
            Exponent::One.weighted_norm(&sigma, quad.weights()),
        )
    };
    let (sup_200, l1_200) = norms(200.0);
    let (sup_2000, l1_2000) = norms(2000.0);
    assert!(sup_2000 > 10.0 * sup_200, "sup {sup_200} → {sup_2000}");
    let ratio = l1_2000 / l1_200;
    assert!(ratio < 2.0 && ratio > 0.5, "l1 {l1_200} → {l1_2000}");
}

#[test]
fn closure_inverse_agrees_with_sampled_inverse() {
    for (name, profile) in suite() {
        let quad = mesh(profile.as_ref());
        let g = |x: f64| (3.0 * x).cos();
        let samples: Vec<f64> = quad.nodes().iter().map(|&x| g(x)).collect();
        for kind in FormulationKind::ALL {
            let a = apply_inverse(kind, profile.as_ref(), &samples, &quad).unwrap();
            let b = apply_inverse_fn(kind, profile.as_ref(), &quad, g, &[], quad.nodes()).unwrap();
            let scale = Exponent::Inf.vector_norm(&b).max(1.0);
            assert!(max_abs_diff(&a, &b) < 1e-10 * scale, "{name}/{kind}");
        }
    }
}
