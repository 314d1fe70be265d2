#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use npnys::analytic::SourceFn;
use npnys::formulation::FormulationKind;
use npnys::operators::green_pair;
use npnys::{Coefficient, CoefficientProfile, CompositeQuadrature, Exponent, Interval};
use rand::Rng;

/// Adaptive Simpson quadrature with Richardson correction. Independent of
/// the Gauss–Legendre machinery under test. The first `MIN_DEPTH` levels are
/// always split so narrow layers cannot hide between the initial samples.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

const MAX_DEPTH: u32 = 50;
const MIN_DEPTH: u32 = 12;

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || (depth <= MAX_DEPTH - MIN_DEPTH && diff.abs() <= 15.0 * tol) {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Simpson integral split at `breaks` (sorted, inside `(a, b)`).
pub fn simpson_with_breaks<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&c| c > a && c < b));
    cuts.push(b);
    cuts.windows(2).map(|w| adaptive_simpson(f, w[0], w[1], tol)).sum()
}

/// `‖f‖_{L^p(a,b)}`; for `p = ∞` a dense scan refined by golden-section
/// search around the best sample.
pub fn lp_norm<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, p: Exponent, tol: f64) -> f64 {
    match p {
        Exponent::One => adaptive_simpson(&|x| f(x).abs(), a, b, tol),
        Exponent::Two => adaptive_simpson(&|x| f(x).powi(2), a, b, tol).sqrt(),
        Exponent::Inf => sup_norm(f, a, b),
    }
}

pub fn sup_norm<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let samples = 20_000;
    let h = (b - a) / samples as f64;
    let (mut best_x, mut best) = (a, f(a).abs());
    for k in 1..=samples {
        let x = a + k as f64 * h;
        let v = f(x).abs();
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let (mut lo, mut hi) = ((best_x - h).max(a), (best_x + h).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1).abs() > f(x2).abs() {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.max(f(0.5 * (lo + hi)).abs())
}

pub fn domain() -> Interval {
    Interval::new(0.0, 2.0).unwrap()
}

/// The six test profiles on `[0, 2]`.
pub fn suite() -> Vec<(&'static str, Arc<dyn Coefficient>)> {
    vec![
        ("constant", Arc::new(CoefficientProfile::constant(2.0, domain()).unwrap()) as Arc<dyn Coefficient>),
        ("tanh100", Arc::new(CoefficientProfile::tanh_layer(100.0, 1.0).unwrap())),
        ("tanh500", Arc::new(CoefficientProfile::tanh_layer(500.0, 1.0).unwrap())),
        ("tanh2000", Arc::new(CoefficientProfile::tanh_layer(2000.0, 1.0).unwrap())),
        ("hill", Arc::new(CoefficientProfile::double_hill(500.0).unwrap())),
        ("well", Arc::new(CoefficientProfile::double_well(500.0).unwrap())),
    ]
}

pub fn constant_source(value: f64) -> SourceFn {
    Arc::new(move |_| value)
}

/// `u* = sin(πx)` and its source `f = (eps u*')' = eps_x π cos(πx) − eps π² sin(πx)`.
pub fn manufactured(profile: Arc<dyn Coefficient>) -> (SourceFn, fn(f64) -> f64, fn(f64) -> f64) {
    let f: SourceFn = Arc::new(move |x| {
        let (e, ex) = profile.eval(x);
        ex * PI * (PI * x).cos() - e * PI * PI * (PI * x).sin()
    });
    (f, |x| (PI * x).sin(), |x| PI * (PI * x).cos())
}

/// `(I + K) g` at `x` for the continuous operator, with every integral
/// split at `x` where the Green's function kinks.
pub fn forward<G: Fn(f64) -> f64>(
    kind: FormulationKind,
    profile: &dyn Coefficient,
    quad: &CompositeQuadrature,
    g: &G,
    x: f64,
) -> f64 {
    let d = profile.domain();
    let (e, ex) = profile.eval(x);
    match kind {
        FormulationKind::Sigma => g(x) + ex / e * quad.integrate_fn(d.lo, d.hi, &[x], |t| green_pair(x, t, d).1 * g(t)),
        FormulationKind::U => {
            g(x) + quad.integrate_fn(d.lo, d.hi, &[x], |t| green_pair(t, x, d).1 * profile.eps_x(t) * g(t)) / e
        }
    }
}

/// Random polynomial of the given degree in the scaled variable
/// `s = 2(x − a)/(b − a) − 1`, coefficients uniform in `[−1, 1]`.
pub fn random_poly<R: Rng>(rng: &mut R, degree: usize, domain: Interval) -> impl Fn(f64) -> f64 + Clone {
    let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
    move |x: f64| {
        let s = 2.0 * (x - domain.lo) / domain.len() - 1.0;
        coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
