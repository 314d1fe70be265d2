//! Empirical lower bounds for `‖A₁‖_p` and `‖A₁⁻¹‖_p` from explicit
//! extremal test functions.
//!
//! Each probe returns the ratio `‖A g‖ / ‖g‖` for one carefully chosen `g`
//! together with the analytic floor that ratio must exceed. Integrals are
//! split at every jump or kink of the test function so the quadrature stays
//! exact to panel accuracy.

use std::fmt;

use serde::Serialize;

use crate::analytic::apply_inverse_fn;
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::formulation::FormulationKind;
use crate::mesh::CompositeQuadrature;
use crate::norm::Exponent;
use crate::operators::green_pair;
use crate::quadrature::{gauss_legendre_rule, Interval};

/// Width parameter of the continuous sign approximation `σ_n`.
pub const SIGMA_RAMP_N: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeQuantity {
    /// `‖A₁‖_p`.
    Operator,
    /// `‖A₁⁻¹‖_p`.
    Inverse,
}

impl fmt::Display for ProbeQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ProbeQuantity::Operator => "norm(A1)",
            ProbeQuantity::Inverse => "norm(inv(A1))",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub quantity: ProbeQuantity,
    pub p: Exponent,
    /// `‖A g‖_p / ‖g‖_p` for the extremal `g`: a lower bound for the norm.
    pub value: f64,
    /// Analytic lower bound the value must exceed.
    pub floor: f64,
    /// Analytic upper bound on the norm, where one is available.
    pub upper: Option<f64>,
    /// `‖eps_x/eps‖_p` over the whole domain.
    pub ratio_norm: f64,
    /// Location of the steepest point (sup probe) or ball center.
    pub center: f64,
    /// Ball radius, zero for the sup probe.
    pub radius: f64,
}

impl ProbeResult {
    pub fn exceeds_floor(&self) -> bool {
        self.value >= self.floor
    }
}

/// `‖A₁‖_∞` probed with `σ_n`: +1 left of the steepest point `x_*`, −1
/// right of `x_* + L/n`, linear in between. The floor is
/// `‖eps_x/eps‖_∞ (L/4 − 2/n) − 1` and the upper bound `1 + (L/2)‖eps_x/eps‖_∞`,
/// both reducing to the unit-interval bounds when `L = 1`.
pub fn extremal_probe_sup(profile: &dyn Coefficient, quad: &CompositeQuadrature) -> Result<ProbeResult> {
    quad.check_domain(profile.domain())?;
    let d = profile.domain();
    let len = d.len();
    let ratio: Vec<f64> = quad
        .nodes()
        .iter()
        .map(|&x| {
            let (e, ex) = profile.eval(x);
            ex / e
        })
        .collect();
    let (star, ratio_norm) = ratio
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.abs()))
        .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
    let x_star = quad.nodes()[star];
    let ramp_end = (x_star + len / SIGMA_RAMP_N).min(d.hi);
    let sigma = |y: f64| {
        if y <= x_star {
            1.0
        } else if y < ramp_end {
            1.0 - 2.0 * (y - x_star) / (ramp_end - x_star)
        } else {
            -1.0
        }
    };

    let mut value: f64 = 0.0;
    for (&x, &k) in quad.nodes().iter().zip(&ratio) {
        let grad = quad.integrate_fn(d.lo, d.hi, &[x, x_star, ramp_end], |y| green_pair(x, y, d).1 * sigma(y));
        value = value.max((sigma(x) + k * grad).abs());
    }
    Ok(ProbeResult {
        quantity: ProbeQuantity::Operator,
        p: Exponent::Inf,
        value,
        floor: ratio_norm * (0.25 * len - 2.0 / SIGMA_RAMP_N) - 1.0,
        upper: Some(1.0 + 0.5 * len * ratio_norm),
        ratio_norm,
        center: x_star,
        radius: 0.0,
    })
}

/// `‖A₁⁻¹‖_p` probed with `g_ε = ±1/eps` on the two halves of `B(ξ, c)`
/// and zero elsewhere, pushed through the exact inverse `I − R₁`.
///
/// The floor is `(1 − δ) m c² / (M² L) ‖eps_x/eps‖_p − 1`, where `m`, `M`
/// bound eps, `L` is the domain length and
/// `δ = ‖(eps_x/eps) 1_B‖_p / ‖eps_x/eps‖_p` measures how flat eps is on the ball.
pub fn extremal_probe_inverse(
    profile: &dyn Coefficient,
    quad: &CompositeQuadrature,
    p: Exponent,
    xi: f64,
    c: f64,
) -> Result<ProbeResult> {
    quad.check_domain(profile.domain())?;
    let d = profile.domain();
    let ball = check_ball(d, xi, c)?;
    let breaks = [ball.lo, xi, ball.hi];
    let g = |x: f64| {
        if x > ball.lo && x <= xi {
            1.0 / profile.eps(x)
        } else if x > xi && x <= ball.hi {
            -1.0 / profile.eps(x)
        } else {
            0.0
        }
    };

    let (points, weights) = split_rule(quad, &breaks)?;
    let image = apply_inverse_fn(FormulationKind::Sigma, profile, quad, g, &breaks, &points)?;
    let g_samples: Vec<f64> = points.iter().map(|&x| g(x)).collect();
    let value = p.weighted_norm(&image, &weights) / p.weighted_norm(&g_samples, &weights);

    let ratio: Vec<f64> = points
        .iter()
        .map(|&x| {
            let (e, ex) = profile.eval(x);
            ex / e
        })
        .collect();
    let inside: Vec<f64> = points
        .iter()
        .zip(&ratio)
        .map(|(&x, &r)| if x > ball.lo && x < ball.hi { r } else { 0.0 })
        .collect();
    let ratio_norm = p.weighted_norm(&ratio, &weights);
    let flatness = if ratio_norm > 0.0 {
        p.weighted_norm(&inside, &weights) / ratio_norm
    } else {
        0.0
    };
    let (m, big_m) = profile.bounds();
    Ok(ProbeResult {
        quantity: ProbeQuantity::Inverse,
        p,
        value,
        floor: (1.0 - flatness) * m * c * c / (big_m * big_m * d.len()) * ratio_norm - 1.0,
        upper: Some(1.0 + ratio_norm * (1.0 + big_m / m) * big_m / m),
        ratio_norm,
        center: xi,
        radius: c,
    })
}

/// `‖A₁‖_p` probed with the piecewise-linear density whose potential
/// gradient is `a(x−ξ)²` left of ξ and `(x−ξ)²` right of it, with
/// `a = (ξ−1)³/ξ³`. The construction is specific to the unit interval.
/// The floor is `(1 − δ) c⁸/(1−c)⁴ ‖eps_x/eps‖_p − 1`.
pub fn extremal_probe_lp(
    profile: &dyn Coefficient,
    quad: &CompositeQuadrature,
    p: Exponent,
    xi: f64,
    c: f64,
) -> Result<ProbeResult> {
    quad.check_domain(profile.domain())?;
    let d = profile.domain();
    if d.lo != 0.0 || d.hi != 1.0 {
        return Err(Error::InvalidProfile(format!(
            "the L^p density probe needs the domain [0, 1], got [{}, {}]",
            d.lo, d.hi
        )));
    }
    let ball = check_ball(d, xi, c)?;
    let a = (xi - 1.0).powi(3) / xi.powi(3);
    let sigma = |x: f64| if x <= xi { 2.0 * a * (x - xi) } else { 2.0 * (x - xi) };
    let grad = |x: f64| if x <= xi { a * (x - xi).powi(2) } else { (x - xi).powi(2) };

    let (points, weights) = split_rule(quad, &[ball.lo, xi, ball.hi])?;
    let mut image = Vec::with_capacity(points.len());
    let mut density = Vec::with_capacity(points.len());
    let mut ratio = Vec::with_capacity(points.len());
    let mut inside = Vec::with_capacity(points.len());
    for &x in &points {
        let (e, ex) = profile.eval(x);
        image.push(sigma(x) + ex / e * grad(x));
        density.push(sigma(x));
        ratio.push(ex / e);
        inside.push(if x > ball.lo && x < ball.hi { ex / e } else { 0.0 });
    }
    let value = p.weighted_norm(&image, &weights) / p.weighted_norm(&density, &weights);
    let ratio_norm = p.weighted_norm(&ratio, &weights);
    let flatness = if ratio_norm > 0.0 {
        p.weighted_norm(&inside, &weights) / ratio_norm
    } else {
        0.0
    };
    Ok(ProbeResult {
        quantity: ProbeQuantity::Operator,
        p,
        value,
        floor: (1.0 - flatness) * c.powi(8) / (1.0 - c).powi(4) * ratio_norm - 1.0,
        upper: Some(1.0 + ratio_norm),
        ratio_norm,
        center: xi,
        radius: c,
    })
}

/// Ball `B(ξ, c)` as far as possible from every layer center, with
/// `c = min(d/2, 1/4)` where `d` is the distance from ξ to the nearest
/// center. Boundary gaps place ξ so that the ball still fits inside.
pub fn auto_ball(profile: &dyn Coefficient) -> (f64, f64) {
    let d = profile.domain();
    let mut centers: Vec<f64> = profile
        .layer_centers()
        .into_iter()
        .filter(|&x| d.contains(x))
        .collect();
    centers.sort_by(f64::total_cmp);
    centers.dedup();
    let (xi, dist) = if centers.is_empty() {
        (d.midpoint(), 0.5 * d.len())
    } else {
        let mut best = {
            let gap = centers[0] - d.lo;
            (d.lo + gap / 3.0, gap / 1.5)
        };
        let mut consider = |cand: (f64, f64)| {
            if cand.1 > best.1 {
                best = cand;
            }
        };
        let gap = d.hi - centers[centers.len() - 1];
        consider((d.hi - gap / 3.0, gap / 1.5));
        for w in centers.windows(2) {
            consider((0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0])));
        }
        best
    };
    (xi, (0.5 * dist).min(0.25))
}

fn check_ball(domain: Interval, xi: f64, c: f64) -> Result<Interval> {
    if !(c > 0.0 && xi.is_finite()) || xi - c < domain.lo || xi + c > domain.hi {
        return Err(Error::BallOutsideDomain {
            center: xi,
            radius: c,
            lo: domain.lo,
            hi: domain.hi,
        });
    }
    Interval::new(xi - c, xi + c)
}

/// Gauss nodes and weights of the mesh order on every panel, with panels
/// cut at `breaks`.
fn split_rule(quad: &CompositeQuadrature, breaks: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = gauss_legendre_rule(quad.order())?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for panel in quad.panels() {
        let mut cuts = vec![panel.lo, panel.hi];
        cuts.extend(breaks.iter().copied().filter(|&b| b > panel.lo && b < panel.hi));
        cuts.sort_by(f64::total_cmp);
        for s in cuts.windows(2) {
            let half = 0.5 * (s[1] - s[0]);
            let mid = 0.5 * (s[1] + s[0]);
            for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
                points.push(mid + half * r);
                weights.push(w * half);
            }
        }
    }
    Ok((points, weights))
}
