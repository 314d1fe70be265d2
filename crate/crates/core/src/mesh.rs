//! Composite Gauss–Legendre quadrature on an adaptively bisected panel mesh.

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::quadrature::{barycentric_weights, gauss_legendre_rule, lagrange_basis, Interval, QuadratureRule};

pub const DEFAULT_ORDER: usize = 16;
pub const DEFAULT_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_DEPTH: usize = 60;

/// Which functions a panel must resolve before it is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefineCriterion {
    /// Self-comparison on eps only.
    EpsOnly,
    /// Self-comparison on eps and eps_x, plus a check that the rule
    /// integrates eps_x to eps(hi) - eps(lo). The last test catches layers
    /// that fall between the nodes of both parent and children.
    #[default]
    EpsAndDerivative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub order: usize,
    pub tol: f64,
    pub criterion: RefineCriterion,
    pub max_depth: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            tol: DEFAULT_TOL,
            criterion: RefineCriterion::default(),
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeQuadrature {
    domain: Interval,
    panels: Vec<Interval>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
    reference: QuadratureRule,
    bary: Vec<f64>,
    /// `spectral[i * order + j] = ∫_{-1}^{r_i} l_j` on the reference panel.
    spectral: Vec<f64>,
}

impl CompositeQuadrature {
    /// Order-point Gauss–Legendre on each of `panels`, which must be
    /// sorted and contiguous.
    pub fn from_panels(panels: Vec<Interval>, order: usize) -> Result<Self> {
        let reference = gauss_legendre_rule(order)?;
        let first = panels.first().ok_or(Error::LengthMismatch {
            expected: 1,
            got: 0,
        })?;
        let last = panels.last().expect("non-empty");
        let domain = Interval::new(first.lo, last.hi)?;
        for pair in panels.windows(2) {
            if pair[0].hi != pair[1].lo {
                return Err(Error::InvalidProfile(format!(
                    "panels [{}, {}] and [{}, {}] are not contiguous",
                    pair[0].lo, pair[0].hi, pair[1].lo, pair[1].hi
                )));
            }
        }
        let mut nodes = Vec::with_capacity(panels.len() * order);
        let mut weights = Vec::with_capacity(panels.len() * order);
        for p in &panels {
            let p = Interval::new(p.lo, p.hi)?;
            let half = 0.5 * p.len();
            for (&r, &w) in reference.nodes.iter().zip(&reference.weights) {
                nodes.push(p.from_reference(r));
                weights.push(w * half);
            }
        }
        let bary = barycentric_weights(&reference.nodes);
        let spectral = spectral_integration(&reference, &bary);
        Ok(Self {
            domain,
            panels,
            nodes,
            weights,
            order,
            reference,
            bary,
            spectral,
        })
    }

    /// `count` equal panels with `order` nodes each. With `order = 1` this
    /// is the composite midpoint rule, whose weights are all equal.
    pub fn uniform(domain: Interval, count: usize, order: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::LengthMismatch {
                expected: 1,
                got: 0,
            });
        }
        let h = domain.len() / count as f64;
        let panels = (0..count)
            .map(|k| Interval {
                lo: if k == 0 { domain.lo } else { domain.lo + k as f64 * h },
                hi: if k + 1 == count {
                    domain.hi
                } else {
                    domain.lo + (k + 1) as f64 * h
                },
            })
            .collect();
        Self::from_panels(panels, order)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn panels(&self) -> &[Interval] {
        &self.panels
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn min_panel_width(&self) -> f64 {
        self.panels.iter().map(Interval::len).fold(f64::INFINITY, f64::min)
    }

    /// Node indices belonging to panel `k`.
    pub fn panel_range(&self, k: usize) -> std::ops::Range<usize> {
        k * self.order..(k + 1) * self.order
    }

    /// Index of the panel containing `x`. A shared endpoint belongs to the
    /// panel on its right, except `b`, which belongs to the last panel.
    pub fn panel_of(&self, x: f64) -> Result<usize> {
        self.domain.check_contains(x)?;
        let k = self.panels.partition_point(|p| p.lo <= x);
        Ok(k.saturating_sub(1))
    }

    /// Errors unless `other` is the same interval as the mesh domain (up to
    /// rounding).
    pub fn check_domain(&self, other: Interval) -> Result<()> {
        let scale = self.domain.len().max(other.len());
        let slack = 1e-13 * (1.0 + scale);
        if (self.domain.lo - other.lo).abs() > slack || (self.domain.hi - other.hi).abs() > slack {
            return Err(Error::DomainMismatch {
                quad_lo: self.domain.lo,
                quad_hi: self.domain.hi,
                coeff_lo: other.lo,
                coeff_hi: other.hi,
            });
        }
        Ok(())
    }

    fn check_samples(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: samples.len(),
            });
        }
        Ok(())
    }

    /// `Σ w_i v_i`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Integrate a function over `[lo, hi]` using the order-point rule on
    /// every piece obtained by cutting at panel boundaries and at `breaks`.
    pub fn integrate_fn<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, breaks: &[f64], f: F) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let mut cuts: Vec<f64> = self
            .panels
            .iter()
            .map(|p| p.lo)
            .chain(breaks.iter().copied())
            .filter(|&c| c > lo && c < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|s| {
                let half = 0.5 * (s[1] - s[0]);
                let mid = 0.5 * (s[1] + s[0]);
                self.reference
                    .nodes
                    .iter()
                    .zip(&self.reference.weights)
                    .map(|(&r, &w)| w * f(mid + half * r))
                    .sum::<f64>()
                    * half
            })
            .sum()
    }

    /// Running integral `∫_a^{x_i} v` at every node, where `v` is the
    /// panelwise polynomial interpolant of `values`.
    pub fn cumulative(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_samples(values)?;
        let q = self.order;
        let mut out = vec![0.0; self.len()];
        let mut acc = 0.0;
        for (k, p) in self.panels.iter().enumerate() {
            let half = 0.5 * p.len();
            let v = &values[self.panel_range(k)];
            for i in 0..q {
                let row = &self.spectral[i * q..(i + 1) * q];
                let s: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
                out[k * q + i] = acc + half * s;
            }
            acc += self.integrate_panel(k, v);
        }
        Ok(out)
    }

    /// Running integral `∫_a^{x_i} ρ v` for a known density `ρ`, with only
    /// `v` replaced by its interpolant.
    pub fn cumulative_weighted<D: Fn(f64) -> f64>(&self, values: &[f64], density: D) -> Result<Vec<f64>> {
        self.check_samples(values)?;
        let mut out = vec![0.0; self.len()];
        let mut moments = vec![0.0; self.order];
        let mut acc = 0.0;
        for k in 0..self.panels.len() {
            let r = self.panel_range(k);
            let v = &values[r.clone()];
            for i in r.clone() {
                self.split_moments(k, self.nodes[i], &density, |_| 0.0, &mut moments);
                out[i] = acc + moments.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            }
            acc += r.map(|j| self.weights[j] * density(self.nodes[j]) * values[j]).sum::<f64>();
        }
        Ok(out)
    }

    fn integrate_panel(&self, k: usize, v: &[f64]) -> f64 {
        let r = self.panel_range(k);
        v.iter().zip(&self.weights[r]).map(|(a, b)| a * b).sum()
    }

    /// Lagrange basis of panel `k` evaluated at `x`.
    pub fn basis_at(&self, k: usize, x: f64, out: &mut [f64]) {
        let p = self.panels[k];
        lagrange_basis(&self.reference.nodes, &self.bary, p.to_reference(x), out);
    }

    /// Barycentric interpolation through the nodes of the panel holding `x`.
    pub fn interpolate_on_panel(&self, samples: &[f64], x: f64) -> Result<f64> {
        self.check_samples(samples)?;
        let k = self.panel_of(x)?;
        let r = self.panel_range(k);
        if let Some(i) = self.nodes[r.clone()].iter().position(|&xn| xn == x) {
            return Ok(samples[r.start + i]);
        }
        let mut basis = vec![0.0; self.order];
        self.basis_at(k, x, &mut basis);
        Ok(basis.iter().zip(&samples[r]).map(|(l, s)| l * s).sum())
    }

    /// Derivative of the panel interpolant at `x`.
    pub fn interpolate_derivative(&self, samples: &[f64], x: f64) -> Result<f64> {
        self.check_samples(samples)?;
        let k = self.panel_of(x)?;
        let p = self.panels[k];
        let r = self.panel_range(k);
        let v = &samples[r];
        let rx = p.to_reference(x);
        let nodes = &self.reference.nodes;
        let d = if let Some(i) = nodes.iter().position(|&t| t == rx) {
            self.diff_row(i).iter().zip(v).map(|(a, b)| a * b).sum()
        } else {
            let (mut num, mut den, mut val) = (0.0, 0.0, 0.0);
            for (j, (&t, &b)) in nodes.iter().zip(&self.bary).enumerate() {
                let c = b / (rx - t);
                den += c;
                val += c * v[j];
            }
            let pv = val / den;
            for (j, (&t, &b)) in nodes.iter().zip(&self.bary).enumerate() {
                let dx = rx - t;
                num += b * (pv - v[j]) / (dx * dx);
            }
            num / den
        };
        Ok(d * 2.0 / p.len())
    }

    /// Derivative of the panel interpolant at every node.
    pub fn differentiate(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_samples(samples)?;
        let q = self.order;
        let rows: Vec<Vec<f64>> = (0..q).map(|i| self.diff_row(i)).collect();
        let mut out = vec![0.0; self.len()];
        for (k, p) in self.panels.iter().enumerate() {
            let scale = 2.0 / p.len();
            let v = &samples[self.panel_range(k)];
            for (i, row) in rows.iter().enumerate() {
                out[k * q + i] = scale * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        Ok(out)
    }

    /// Row `i` of the reference differentiation matrix.
    fn diff_row(&self, i: usize) -> Vec<f64> {
        let t = &self.reference.nodes;
        let b = &self.bary;
        let mut row = vec![0.0; self.order];
        let mut diag = 0.0;
        for j in 0..self.order {
            if j != i {
                row[j] = (b[j] / b[i]) / (t[i] - t[j]);
                diag -= row[j];
            }
        }
        row[i] = diag;
        row
    }

    /// `out_j = ∫_{lo}^{x} left(t) l_j(t) dt + ∫_{x}^{hi} right(t) l_j(t) dt`
    /// over panel `k = [lo, hi]`, with the order-point rule on each side of
    /// `x`. Exact when `left` and `right` are linear.
    pub fn split_moments<L, R>(&self, k: usize, x: f64, left: L, right: R, out: &mut [f64])
    where
        L: Fn(f64) -> f64,
        R: Fn(f64) -> f64,
    {
        let p = self.panels[k];
        let x = x.clamp(p.lo, p.hi);
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut basis = vec![0.0; self.order];
        for (lo, hi, f) in [(p.lo, x, &left as &dyn Fn(f64) -> f64), (x, p.hi, &right)] {
            if hi <= lo {
                continue;
            }
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&r, &w) in self.reference.nodes.iter().zip(&self.reference.weights) {
                let t = mid + half * r;
                self.basis_at(k, t, &mut basis);
                let c = w * half * f(t);
                for (o, l) in out.iter_mut().zip(&basis) {
                    *o += c * l;
                }
            }
        }
    }
}

/// Integration matrix of the Lagrange basis on the reference panel.
fn spectral_integration(rule: &QuadratureRule, bary: &[f64]) -> Vec<f64> {
    let q = rule.order();
    let mut s = vec![0.0; q * q];
    let mut basis = vec![0.0; q];
    for i in 0..q {
        let hi = rule.nodes[i];
        let half = 0.5 * (hi + 1.0);
        let mid = 0.5 * (hi - 1.0);
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            lagrange_basis(&rule.nodes, bary, mid + half * r, &mut basis);
            for j in 0..q {
                s[i * q + j] += w * half * basis[j];
            }
        }
    }
    s
}

fn panel_rule(reference: &QuadratureRule, p: Interval) -> impl Iterator<Item = (f64, f64)> + '_ {
    let half = 0.5 * p.len();
    reference
        .nodes
        .iter()
        .zip(&reference.weights)
        .map(move |(&r, &w)| (p.from_reference(r), w * half))
}

/// Adaptive bisection with the default order 16 and the default criterion.
pub fn refine_adaptive(
    coeff: &(impl Coefficient + ?Sized),
    order: usize,
    tol: f64,
) -> Result<CompositeQuadrature> {
    refine_with(
        coeff,
        &RefineOptions {
            order,
            tol,
            ..RefineOptions::default()
        },
    )
}

pub fn refine_with(
    coeff: &(impl Coefficient + ?Sized),
    opts: &RefineOptions,
) -> Result<CompositeQuadrature> {
    if opts.order < 2 {
        return Err(Error::InvalidOrder {
            order: opts.order,
            min: 2,
        });
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidTolerance(opts.tol));
    }
    let reference = gauss_legendre_rule(opts.order)?;
    let (int_eps, int_eps_x) = coeff.integral_scales();
    let tol_eps = opts.tol * (1.0 + int_eps);
    let tol_eps_x = opts.tol * (1.0 + int_eps_x);

    let quad = |p: Interval, which: usize| -> f64 {
        panel_rule(&reference, p)
            .map(|(x, w)| {
                let (e, ex) = coeff.eval(x);
                w * if which == 0 { e } else { ex }
            })
            .sum()
    };
    let resolved = |p: Interval| -> bool {
        let (l, r) = p.bisect();
        if (quad(p, 0) - quad(l, 0) - quad(r, 0)).abs() > tol_eps {
            return false;
        }
        if opts.criterion == RefineCriterion::EpsAndDerivative {
            let whole = quad(p, 1);
            if (whole - quad(l, 1) - quad(r, 1)).abs() > tol_eps_x {
                return false;
            }
            let (e0, e1) = (coeff.eps(p.lo), coeff.eps(p.hi));
            let rounding = 8.0 * f64::EPSILON * e0.abs().max(e1.abs());
            if (whole - (e1 - e0)).abs() > tol_eps_x + rounding {
                return false;
            }
        }
        true
    };

    let mut done = Vec::new();
    let mut stack = vec![(coeff.domain(), 0usize)];
    while let Some((p, depth)) = stack.pop() {
        if resolved(p) {
            done.push(p);
            continue;
        }
        if depth >= opts.max_depth {
            return Err(Error::RefinementDepth {
                lo: p.lo,
                hi: p.hi,
                max_depth: opts.max_depth,
            });
        }
        let (l, r) = p.bisect();
        stack.push((r, depth + 1));
        stack.push((l, depth + 1));
    }
    // depth-first with the left child on top yields panels in order
    CompositeQuadrature::from_panels(done, opts.order)
}
