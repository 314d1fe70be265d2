//! Conditioning sweeps over the layer steepness δ, the l² condition table
//! for the double hill and double well, and GMRES residual histories.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::coefficient::{Coefficient, CoefficientProfile};
use crate::error::{Error, Result};
use crate::formulation::FormulationKind;
use crate::linalg::{condition_numbers, gmres, ConditionNumbers};
use crate::mesh::{refine_adaptive, CompositeQuadrature, DEFAULT_ORDER, DEFAULT_TOL};
use crate::norm::Exponent;
use crate::operators::{assemble_system, DiscreteSystem};
use crate::quadrature::Interval;

/// δ = 100·2^k, k = 0..7.
pub fn geometric_deltas() -> Vec<f64> {
    (0..8).map(|k| 100.0 * f64::from(1u32 << k)).collect()
}

/// δ = 100 j, j = 1..100.
pub fn arithmetic_deltas() -> Vec<f64> {
    (1..=100).map(|j| 100.0 * f64::from(j)).collect()
}

/// One assembled system of the sweep with all three condition numbers.
#[derive(Debug, Clone, Serialize)]
pub struct CondRow {
    pub delta: f64,
    pub formulation: FormulationKind,
    pub p: Exponent,
    pub n: usize,
    pub panels: usize,
    pub cond_1: f64,
    pub cond_2: f64,
    pub cond_inf: f64,
}

impl CondRow {
    pub fn cond(&self, p: Exponent) -> f64 {
        match p {
            Exponent::One => self.cond_1,
            Exponent::Two => self.cond_2,
            Exponent::Inf => self.cond_inf,
        }
    }

    /// Condition number in the norm the system was weighted for.
    pub fn matched(&self) -> f64 {
        self.cond(self.p)
    }
}

#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub delta: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct CondTable {
    pub rows: Vec<CondRow>,
    pub failures: Vec<SweepFailure>,
}

/// Least-squares fit of `log cond_p(A_{k,p})` against `log δ`.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub formulation: FormulationKind,
    pub p: Exponent,
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval of the slope; infinite
    /// with only two points.
    pub half_width: f64,
    pub points: usize,
}

impl SlopeFit {
    pub fn interval(&self) -> (f64, f64) {
        (self.slope - self.half_width, self.slope + self.half_width)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepRegression {
    pub fits: Vec<SlopeFit>,
}

impl SweepRegression {
    pub fn get(&self, formulation: FormulationKind, p: Exponent) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.formulation == formulation && f.p == p)
    }
}

/// Sweep over the tanh family on `domain` with a layer at `x0`.
pub fn condition_sweep(
    deltas: &[f64],
    formulations: &[FormulationKind],
    ps: &[Exponent],
    x0: f64,
    domain: Interval,
) -> Result<(CondTable, SweepRegression)> {
    condition_sweep_with(deltas, formulations, ps, |delta| {
        CoefficientProfile::tanh_layer_on(delta, x0, domain)
    })
}

/// Sweep over any δ-indexed family. A δ whose profile, mesh or system
/// fails is recorded in `failures` and the sweep moves on.
pub fn condition_sweep_with<F>(
    deltas: &[f64],
    formulations: &[FormulationKind],
    ps: &[Exponent],
    family: F,
) -> Result<(CondTable, SweepRegression)>
where
    F: Fn(f64) -> Result<CoefficientProfile>,
{
    if let Some(&bad) = deltas.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::InvalidProfile(format!("δ must be positive, got {bad}")));
    }
    let mut table = CondTable::default();
    for &delta in deltas {
        match sweep_one(delta, formulations, ps, &family) {
            Ok(rows) => table.rows.extend(rows),
            Err(e) => table.failures.push(SweepFailure {
                delta,
                message: e.to_string(),
            }),
        }
    }
    let regression = fit_slopes(&table, formulations, ps);
    Ok((table, regression))
}

fn sweep_one<F>(delta: f64, formulations: &[FormulationKind], ps: &[Exponent], family: &F) -> Result<Vec<CondRow>>
where
    F: Fn(f64) -> Result<CoefficientProfile>,
{
    let profile: Arc<dyn Coefficient> = Arc::new(family(delta)?);
    let quad = Arc::new(refine_adaptive(profile.as_ref(), DEFAULT_ORDER, DEFAULT_TOL)?);
    let zero = vec![0.0; quad.len()];
    let mut rows = Vec::new();
    for &kind in formulations {
        for &p in ps {
            let system = assemble_system(kind.strategy().as_ref(), profile.clone(), quad.clone(), p, &zero)?;
            let c = condition_numbers(&system.matrix)?;
            rows.push(CondRow {
                delta,
                formulation: kind,
                p,
                n: quad.len(),
                panels: quad.panel_count(),
                cond_1: c.one,
                cond_2: c.two,
                cond_inf: c.inf,
            });
        }
    }
    Ok(rows)
}

fn fit_slopes(table: &CondTable, formulations: &[FormulationKind], ps: &[Exponent]) -> SweepRegression {
    let mut fits = Vec::new();
    for &kind in formulations {
        for &p in ps {
            let (xs, ys): (Vec<f64>, Vec<f64>) = table
                .rows
                .iter()
                .filter(|r| r.formulation == kind && r.p == p)
                .map(|r| (r.delta.ln(), r.matched().ln()))
                .unzip();
            if let Some(line) = linear_fit(&xs, &ys) {
                fits.push(SlopeFit {
                    formulation: kind,
                    p,
                    slope: line.slope,
                    intercept: line.intercept,
                    half_width: line.half_width,
                    points: xs.len(),
                });
            }
        }
    }
    SweepRegression { fits }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence half-width of the slope.
    pub half_width: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`. Needs two distinct
/// abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let half_width = if n > 2 {
        let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
        let se = (sse / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).ok()?.inverse_cdf(0.975);
        t * se
    } else {
        f64::INFINITY
    };
    Some(LineFit {
        slope,
        intercept,
        half_width,
    })
}

/// Spearman rank correlation with average ranks for ties.
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - mean) * (y - mean)).sum();
    let va: f64 = ra.iter().map(|x| (x - mean).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mean).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            out[k] = avg;
        }
        start = end;
    }
    out
}

/// The two multi-layer profiles of the GMRES study, at δ = 500.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StudyProfile {
    DoubleHill,
    DoubleWell,
}

impl StudyProfile {
    pub const ALL: [StudyProfile; 2] = [StudyProfile::DoubleHill, StudyProfile::DoubleWell];
    pub const DELTA: f64 = 500.0;

    pub fn name(self) -> &'static str {
        match self {
            StudyProfile::DoubleHill => "hill",
            StudyProfile::DoubleWell => "well",
        }
    }

    pub fn build(self) -> Result<CoefficientProfile> {
        match self {
            StudyProfile::DoubleHill => CoefficientProfile::double_hill(Self::DELTA),
            StudyProfile::DoubleWell => CoefficientProfile::double_well(Self::DELTA),
        }
    }

    /// Reference l² condition numbers, in the order
    /// A₁,₁ A₁,₂ A₁,∞ A₂,₁ A₂,₂ A₂,∞.
    pub fn reference_cond2(self) -> [f64; 6] {
        match self {
            StudyProfile::DoubleHill => [35.1453, 979.052, 86459.5, 116010.0, 978.240, 31.1643],
            StudyProfile::DoubleWell => [33.1648, 977.744, 98620.1, 147328.0, 977.411, 27.9858],
        }
    }
}

/// The six `(formulation, p)` systems in table order.
pub fn table_systems() -> Vec<(FormulationKind, Exponent)> {
    FormulationKind::ALL
        .iter()
        .flat_map(|&k| Exponent::ALL.iter().map(move |&p| (k, p)))
        .collect()
}

/// Right-hand side `f − m eps_x` at the nodes for `f ≡ f0` and boundary
/// values `(γ_a, γ_b)`.
pub fn lifted_constant_source(profile: &dyn Coefficient, quad: &CompositeQuadrature, f0: f64, gamma: (f64, f64)) -> Vec<f64> {
    let d = profile.domain();
    let slope = (gamma.1 - gamma.0) / d.len();
    quad.nodes().iter().map(|&x| f0 - slope * profile.eps_x(x)).collect()
}

/// A named profile with its reference condition numbers, if any.
pub type StudyEntry = (String, Arc<dyn Coefficient>, Option<[f64; 6]>);

#[derive(Debug, Clone, Serialize)]
pub struct GmresRecord {
    pub profile: String,
    pub formulation: FormulationKind,
    pub p: Exponent,
    pub n: usize,
    pub cond_1: f64,
    pub cond_2: f64,
    pub cond_inf: f64,
    /// Reference cond₂, when this is one of the reference systems.
    pub reference_cond_2: Option<f64>,
    pub converged: bool,
    /// Iterations until the residual reached the tolerance.
    pub iterations: Option<usize>,
    /// GMRES relative residual after each iteration, starting with 1 at
    /// iteration 0.
    pub residuals: Vec<f64>,
    /// `‖b − A x_k‖₂/‖b‖₂` recomputed from each iterate.
    pub true_residuals: Vec<f64>,
}

impl GmresRecord {
    /// Iteration count for ranking, with non-converged runs placed after
    /// every converged one.
    pub fn iterations_or_cap(&self) -> f64 {
        self.iterations.map_or(f64::INFINITY, |k| k as f64)
    }
}

/// Conditioning of the six systems for one profile.
pub fn profile_conditioning(
    profile: Arc<dyn Coefficient>,
    reference: Option<[f64; 6]>,
) -> Result<Vec<(DiscreteSystem, ConditionNumbers, Option<f64>)>> {
    let quad = Arc::new(refine_adaptive(profile.as_ref(), DEFAULT_ORDER, DEFAULT_TOL)?);
    let source = lifted_constant_source(profile.as_ref(), &quad, 1.0, (1.0, 2.0));
    table_systems()
        .into_iter()
        .enumerate()
        .map(|(i, (kind, p))| {
            let system = assemble_system(kind.strategy().as_ref(), profile.clone(), quad.clone(), p, &source)?;
            let c = condition_numbers(&system.matrix)?;
            Ok((system, c, reference.map(|r| r[i])))
        })
        .collect()
}

/// For every profile and each of the six systems: assemble with `f ≡ 1`,
/// `γ = (1, 2)`, run GMRES from zero to `tol` with at most `cap`
/// iterations, and record the residual history and condition numbers.
/// Hitting the cap is recorded, not an error.
pub fn gmres_study(
    profiles: &[StudyEntry],
    tol: f64,
    cap: usize,
) -> Result<Vec<GmresRecord>> {
    let mut out = Vec::new();
    for (name, profile, reference) in profiles {
        for (system, c, reference_cond_2) in profile_conditioning(profile.clone(), *reference)? {
            let trace = gmres(&system.matrix, &system.rhs, tol, cap)?;
            let mut residuals = vec![1.0];
            residuals.extend_from_slice(&trace.residuals);
            let mut true_residuals = vec![1.0];
            true_residuals.extend_from_slice(&trace.true_residuals);
            out.push(GmresRecord {
                profile: name.clone(),
                formulation: system.formulation,
                p: system.p,
                n: system.n(),
                cond_1: c.one,
                cond_2: c.two,
                cond_inf: c.inf,
                reference_cond_2,
                converged: trace.converged,
                iterations: trace.iterations_to(tol),
                residuals,
                true_residuals,
            });
        }
    }
    Ok(out)
}

/// The two study profiles with their reference condition numbers.
pub fn study_profiles() -> Result<Vec<StudyEntry>> {
    StudyProfile::ALL
        .iter()
        .map(|&s| {
            let profile: Arc<dyn Coefficient> = Arc::new(s.build()?);
            Ok((s.name().to_string(), profile, Some(s.reference_cond2())))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub profile: &'static str,
    pub formulation: FormulationKind,
    pub p: Exponent,
    pub n: usize,
    pub cond_1: f64,
    pub cond_2: f64,
    pub reference: f64,
}

impl Table1Row {
    /// `max(ours/reference, reference/ours)`.
    pub fn factor(&self) -> f64 {
        let r = self.cond_2 / self.reference;
        r.max(1.0 / r)
    }
}

/// The l² condition numbers of the twelve study systems.
pub fn table1() -> Result<Vec<Table1Row>> {
    let mut rows = Vec::new();
    for s in StudyProfile::ALL {
        let profile: Arc<dyn Coefficient> = Arc::new(s.build()?);
        for (system, c, reference) in profile_conditioning(profile, Some(s.reference_cond2()))? {
            rows.push(Table1Row {
                profile: s.name(),
                formulation: system.formulation,
                p: system.p,
                n: system.n(),
                cond_1: c.one,
                cond_2: c.two,
                reference: reference.unwrap_or(f64::NAN),
            });
        }
    }
    Ok(rows)
}

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_cond_table(path: &Path, table: &CondTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["delta", "formulation", "p", "n", "panels", "cond_1", "cond_2", "cond_inf"])?;
    for r in &table.rows {
        w.write_record([
            fmt_real(r.delta),
            r.formulation.number().to_string(),
            r.p.to_string(),
            r.n.to_string(),
            r.panels.to_string(),
            fmt_real(r.cond_1),
            fmt_real(r.cond_2),
            fmt_real(r.cond_inf),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_regression(path: &Path, regression: &SweepRegression) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["formulation", "p", "points", "slope", "ci_low", "ci_high", "intercept"])?;
    for f in &regression.fits {
        let (lo, hi) = f.interval();
        w.write_record([
            f.formulation.number().to_string(),
            f.p.to_string(),
            f.points.to_string(),
            fmt_real(f.slope),
            fmt_real(lo),
            fmt_real(hi),
            fmt_real(f.intercept),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table1(path: &Path, rows: &[Table1Row]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["profile", "formulation", "p", "n", "cond_1", "cond_2", "reference_cond_2", "factor"])?;
    for r in rows {
        w.write_record([
            r.profile.to_string(),
            r.formulation.number().to_string(),
            r.p.to_string(),
            r.n.to_string(),
            fmt_real(r.cond_1),
            fmt_real(r.cond_2),
            fmt_real(r.reference),
            fmt_real(r.factor()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: one row per (system, iteration).
pub fn write_gmres_histories(path: &Path, records: &[GmresRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["profile", "formulation", "p", "iteration", "relative_residual", "true_residual"])?;
    for r in records {
        for (k, (res, exact)) in r.residuals.iter().zip(&r.true_residuals).enumerate() {
            w.write_record([
                r.profile.clone(),
                r.formulation.number().to_string(),
                r.p.to_string(),
                k.to_string(),
                fmt_real(*res),
                fmt_real(*exact),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_gmres_summary(path: &Path, records: &[GmresRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "profile",
        "formulation",
        "p",
        "n",
        "cond_1",
        "cond_2",
        "cond_inf",
        "reference_cond_2",
        "converged",
        "iterations",
        "final_residual",
        "final_true_residual",
    ])?;
    for r in records {
        w.write_record([
            r.profile.clone(),
            r.formulation.number().to_string(),
            r.p.to_string(),
            r.n.to_string(),
            fmt_real(r.cond_1),
            fmt_real(r.cond_2),
            fmt_real(r.cond_inf),
            r.reference_cond_2.map(fmt_real).unwrap_or_default(),
            r.converged.to_string(),
            r.iterations.map(|k| k.to_string()).unwrap_or_default(),
            fmt_real(*r.residuals.last().unwrap_or(&f64::NAN)),
            fmt_real(*r.true_residuals.last().unwrap_or(&f64::NAN)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// JSON sidecar describing the profiles behind a study.
pub fn write_metadata(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(file)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!(f.half_width < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
        assert!(linear_fit(&[0.0, 1.0], &[0.0, 1.0]).unwrap().half_width.is_infinite());
    }

    #[test]
    fn confidence_interval_uses_student_t() {
        // residuals ±1 around y = x on x = 0..3
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 0.0, 3.0, 2.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 0.6).abs() < 1e-14);
        // t(0.975, 2) = 4.302653, se = sqrt(sse/2/5), sse = 3.2
        let expected = 4.302652729911275 * (3.2f64 / 2.0 / 5.0).sqrt();
        assert!((f.half_width - expected).abs() < 1e-9, "{}", f.half_width);
    }

    #[test]
    fn spearman_with_ties() {
        assert_eq!(rank_correlation(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(rank_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(ranks(&[5.0, 1.0, 5.0, f64::INFINITY]), vec![2.5, 1.0, 2.5, 4.0]);
        assert!(rank_correlation(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn grids() {
        let g = geometric_deltas();
        assert_eq!(g.len(), 8);
        assert_eq!((g[0], g[7]), (100.0, 12800.0));
        let a = arithmetic_deltas();
        assert_eq!((a.len(), a[99]), (100, 10000.0));
    }

    #[test]
    fn real_format_has_17_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn constant_family_is_perfectly_conditioned() {
        let domain = Interval::new(0.0, 2.0).unwrap();
        let (t, _) = condition_sweep_with(&[100.0, 400.0], &FormulationKind::ALL, &Exponent::ALL, |_| {
            CoefficientProfile::constant(2.5, domain)
        })
        .unwrap();
        assert_eq!(t.rows.len(), 12);
        for r in &t.rows {
            for c in [r.cond_1, r.cond_2, r.cond_inf] {
                assert!((c - 1.0).abs() < 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn failing_rows_do_not_stop_the_sweep() {
        let (t, _) = condition_sweep_with(&[100.0, 200.0], &[FormulationKind::Sigma], &[Exponent::One], |d| {
            if d > 150.0 {
                Err(Error::InvalidProfile("nope".into()))
            } else {
                CoefficientProfile::tanh_layer(d, 1.0)
            }
        })
        .unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.failures.len(), 1);
        assert_eq!(t.failures[0].delta, 200.0);
        assert!(condition_sweep(&[-1.0], &[FormulationKind::Sigma], &[Exponent::One], 1.0, Interval::new(0.0, 2.0).unwrap()).is_err());
    }
}
