//! Gauss–Legendre rules on the reference interval and their affine images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub const REFERENCE: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn check_contains(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn bisect(&self) -> (Interval, Interval) {
        let mid = self.midpoint();
        (
            Interval { lo: self.lo, hi: mid },
            Interval { lo: mid, hi: self.hi },
        )
    }

    /// Map a reference coordinate in `[-1, 1]` onto this interval.
    pub fn from_reference(&self, r: f64) -> f64 {
        self.lo + 0.5 * (r + 1.0) * (self.hi - self.lo)
    }

    /// Map a point of this interval to `[-1, 1]`.
    pub fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: Interval,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Legendre polynomial P_n and its derivative at `x`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// The `order`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes are found by Newton iteration from the usual cosine guesses and
/// mirrored so the rule is exactly symmetric; they are returned ascending.
pub fn gauss_legendre_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidOrder { order, min: 1 });
    }
    if order == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![2.0],
            interval: Interval::REFERENCE,
        });
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // cosine guesses run from +1 downwards
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: Interval::REFERENCE,
    })
}

/// Affine image of `rule` on `target`; weights scale by the length ratio.
pub fn scale_rule(rule: &QuadratureRule, target: Interval) -> Result<QuadratureRule> {
    let target = Interval::new(target.lo, target.hi)?;
    let src = rule.interval;
    if target == src {
        return Ok(rule.clone());
    }
    let ratio = target.len() / src.len();
    let nodes = rule
        .nodes
        .iter()
        .map(|&x| target.lo + (x - src.lo) * ratio)
        .collect();
    let weights = rule.weights.iter().map(|&w| w * ratio).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: target,
    })
}

/// Barycentric weights for Lagrange interpolation through `nodes`,
/// normalized so the largest has unit magnitude.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut bw: Vec<f64> = (0..n)
        .map(|j| {
            let prod: f64 = (0..n)
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect();
    let scale = bw.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
    if scale > 0.0 {
        bw.iter_mut().for_each(|w| *w /= scale);
    }
    bw
}

/// Values of every Lagrange basis polynomial through `nodes` at `x`,
/// written into `out` (second barycentric form).
pub fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    if let Some(k) = nodes.iter().position(|&xn| xn == x) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[k] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for ((o, &xn), &b) in out.iter_mut().zip(nodes).zip(bary) {
        let t = b / (x - xn);
        *o = t;
        denom += t;
    }
    out.iter_mut().for_each(|v| *v /= denom);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn order_zero_rejected() {
        assert!(matches!(
            gauss_legendre_rule(0),
            Err(Error::InvalidOrder { .. })
        ));
    }

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre_rule(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], -s, epsilon = 1e-15);
        assert_relative_eq!(r.nodes[1], s, epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights[1], 1.0, epsilon = 1e-15);
        // x^0..x^3 exactly
        let exact = [2.0, 0.0, 2.0 / 3.0, 0.0];
        for (k, e) in exact.iter().enumerate() {
            let q = r.integrate(|x| x.powi(k as i32));
            assert!((q - e).abs() < 1e-15, "degree {k}: {q} vs {e}");
        }
    }

    #[test]
    fn sixteen_point_integrates_x30() {
        let r = gauss_legendre_rule(16).unwrap();
        let q = r.integrate(|x| x.powi(30));
        let exact = 2.0 / 31.0;
        assert!(((q - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn nodes_ascending_and_weights_positive() {
        for n in 1..=64 {
            let r = gauss_legendre_rule(n).unwrap();
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]), "order {n}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 2.0).abs() < 2e-14 * 2.0, "order {n}: {sum}");
        }
    }

    #[test]
    fn scale_to_unit_interval() {
        let r = gauss_legendre_rule(2).unwrap();
        let s = scale_rule(&r, Interval::new(0.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(s.nodes[0], 0.211_324_865_405_187_1, epsilon = 1e-12);
        assert_relative_eq!(s.nodes[1], 0.788_675_134_594_812_9, epsilon = 1e-12);
        assert_relative_eq!(s.weights[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.weights[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn scale_to_reference_is_identity() {
        let r = gauss_legendre_rule(9).unwrap();
        let s = scale_rule(&r, Interval::REFERENCE).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn scaled_rule_integrates_constant() {
        let r = gauss_legendre_rule(16).unwrap();
        let s = scale_rule(&r, Interval::new(-3.5, 7.25).unwrap()).unwrap();
        assert!((s.integrate(|_| 1.0) - 10.75).abs() < 1e-15 * 10.75 * 4.0);
    }

    #[test]
    fn degenerate_target_rejected() {
        let r = gauss_legendre_rule(4).unwrap();
        let bad = Interval { lo: 1.0, hi: 1.0 };
        assert!(matches!(
            scale_rule(&r, bad),
            Err(Error::DegenerateInterval { .. })
        ));
        assert!(Interval::new(2.0, 1.0).is_err());
    }

    #[test]
    fn lagrange_basis_partition_of_unity() {
        let r = gauss_legendre_rule(16).unwrap();
        let bw = barycentric_weights(&r.nodes);
        let mut out = vec![0.0; 16];
        for &x in &[-1.0, -0.3, 0.77, 1.0] {
            lagrange_basis(&r.nodes, &bw, x, &mut out);
            let s: f64 = out.iter().sum();
            assert!((s - 1.0).abs() < 1e-13);
        }
        lagrange_basis(&r.nodes, &bw, r.nodes[3], &mut out);
        assert_eq!(out[3], 1.0);
        assert_eq!(out.iter().sum::<f64>(), 1.0);
    }
}
