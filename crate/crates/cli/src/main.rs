use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use npnys::experiments::{
    arithmetic_deltas, condition_sweep, fmt_real, geometric_deltas, gmres_study, rank_correlation, table1,
    write_cond_table, write_gmres_histories, write_gmres_summary, write_metadata, write_regression, write_table1,
    GmresRecord, StudyEntry, StudyProfile,
};
use npnys::formulation::{default_formulations, FormulationKind};
use npnys::linalg::DEFAULT_GMRES_CAP;
use npnys::operators::default_schemes;
use npnys::probes::{auto_ball, extremal_probe_inverse, extremal_probe_lp, extremal_probe_sup, ProbeResult};
use npnys::solver::{solve_with, SolveOptions};
use npnys::{refine_adaptive, Coefficient, CoefficientProfile, Exponent, Interval};

#[derive(Parser)]
#[command(name = "npnys", version, about = "Norm-preserving Nyström experiments for (eps u')' = f")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condition numbers of the tanh-layer family over a grid of steepness values.
    Sweep(SweepArgs),
    /// l² condition numbers of the six systems for the double hill and double well.
    Table1(Table1Args),
    /// GMRES residual histories for the six systems of a profile.
    Gmres(GmresArgs),
    /// Solve one boundary value problem with a constant source.
    Solve(SolveArgs),
    /// Extremal lower-bound probes for the operator norms.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated steepness values; defaults to 100·2^k, k = 0..7.
    #[arg(long, value_delimiter = ',', conflicts_with = "paper_grid")]
    deltas: Option<Vec<f64>>,
    /// Use the arithmetic grid 100, 200, ..., 10000.
    #[arg(long)]
    paper_grid: bool,
    /// 1, 2 or both.
    #[arg(long, default_value = "both")]
    formulation: String,
    /// 1, 2, inf or all.
    #[arg(long, default_value = "all")]
    p: String,
    /// Layer center.
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [0.0, 2.0], allow_negative_numbers = true)]
    domain: Vec<f64>,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, default_value = "table1.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct GmresArgs {
    /// hill, well or a profile JSON file; repeatable. Defaults to hill and well.
    #[arg(long)]
    profile: Vec<String>,
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_GMRES_CAP)]
    max_iter: usize,
    /// Residual histories; the per-system summary goes next to it.
    #[arg(long, default_value = "gmres.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Profile JSON file.
    #[arg(long)]
    profile: PathBuf,
    /// Constant source term f.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    f_const: f64,
    /// Boundary values u(a) and u(b).
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [0.0, 0.0], allow_negative_numbers = true)]
    bc: Vec<f64>,
    #[arg(long, default_value = "1")]
    formulation: String,
    #[arg(long, default_value = "1")]
    p: String,
    /// direct, gmres or auto.
    #[arg(long, default_value = "auto")]
    method: String,
    /// Nyström scheme: panel or point.
    #[arg(long, default_value = "panel")]
    scheme: String,
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value = "solution.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ProbeArgs {
    /// Profile JSON file.
    #[arg(long)]
    profile: PathBuf,
    /// 1, 2, inf or all.
    #[arg(long, default_value = "all")]
    p: String,
    /// Ball center for the inverse probe; chosen away from the layers by default.
    #[arg(long, requires = "radius")]
    xi: Option<f64>,
    #[arg(long, requires = "xi")]
    radius: Option<f64>,
    /// Optional JSON file for the probe results.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Table1(a) => run_table1(a),
        Command::Gmres(a) => run_gmres(a),
        Command::Solve(a) => solve(a),
        Command::Probe(a) => probe(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn formulations(arg: &str) -> Result<Vec<FormulationKind>> {
    if arg.eq_ignore_ascii_case("both") {
        return Ok(FormulationKind::ALL.to_vec());
    }
    Ok(vec![default_formulations().get(arg)?.kind()])
}

fn exponents(arg: &str) -> Result<Vec<Exponent>> {
    if arg.eq_ignore_ascii_case("all") {
        return Ok(Exponent::ALL.to_vec());
    }
    Ok(vec![arg.parse()?])
}

fn read_profile(path: &Path) -> Result<CoefficientProfile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CoefficientProfile::from_json(&text).with_context(|| format!("parsing profile {}", path.display()))
}

/// `dir/stem_suffix.ext` next to `path`.
fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn study_metadata(profiles: &[(String, Option<&CoefficientProfile>, bool)]) -> serde_json::Value {
    let list: Vec<_> = profiles
        .iter()
        .map(|(name, profile, reconstructed)| {
            json!({
                "name": name,
                "spec": profile.map(|p| p.to_spec()),
                "reconstructed": reconstructed,
                "note": if *reconstructed {
                    "layer amplitudes and centers are a reconstruction; the reference values come from an unspecified profile"
                } else {
                    "user supplied"
                },
            })
        })
        .collect();
    json!({ "profiles": list })
}

fn sweep(a: SweepArgs) -> Result<()> {
    let deltas = match (&a.deltas, a.paper_grid) {
        (Some(d), _) => d.clone(),
        (None, true) => arithmetic_deltas(),
        (None, false) => geometric_deltas(),
    };
    let domain = Interval::new(a.domain[0], a.domain[1])?;
    let kinds = formulations(&a.formulation)?;
    let ps = exponents(&a.p)?;
    let (table, regression) = condition_sweep(&deltas, &kinds, &ps, a.x0, domain)?;
    write_cond_table(&a.out, &table)?;
    let slopes = sibling(&a.out, "slopes", "csv");
    write_regression(&slopes, &regression)?;
    let meta = json!({
        "family": "eps(x) = 2 + tanh(delta (x - x0))",
        "x0": a.x0,
        "domain": [domain.lo, domain.hi],
        "grid": if a.deltas.is_some() { "custom" } else if a.paper_grid { "arithmetic" } else { "geometric" },
        "deltas": deltas,
        "failures": table.failures.iter().map(|f| json!({"delta": f.delta, "message": f.message})).collect::<Vec<_>>(),
    });
    write_metadata(&sibling(&a.out, "meta", "json"), &meta)?;

    println!("{} systems over {} values of delta", table.rows.len(), deltas.len());
    println!("{:<12} {:<4} {:>10} {:>22}", "formulation", "p", "slope", "95% interval");
    for f in &regression.fits {
        let (lo, hi) = f.interval();
        println!("{:<12} {:<4} {:>10.4} [{lo:>9.4}, {hi:>9.4}]", f.formulation.number(), f.p, f.slope);
    }
    for f in &table.failures {
        println!("delta {} skipped: {}", f.delta, f.message);
    }
    println!("wrote {} and {}", a.out.display(), slopes.display());
    Ok(())
}

fn run_table1(a: Table1Args) -> Result<()> {
    let rows = table1()?;
    write_table1(&a.out, &rows)?;
    let built: Vec<CoefficientProfile> = StudyProfile::ALL.iter().map(|s| s.build()).collect::<npnys::Result<_>>()?;
    let meta = study_metadata(
        &StudyProfile::ALL
            .iter()
            .zip(&built)
            .map(|(s, p)| (s.name().to_string(), Some(p), true))
            .collect::<Vec<_>>(),
    );
    write_metadata(&sibling(&a.out, "meta", "json"), &meta)?;

    println!("{:<6} {:<12} {:<4} {:>6} {:>14} {:>14} {:>8}", "", "formulation", "p", "n", "cond2", "reference", "factor");
    for r in &rows {
        println!(
            "{:<6} {:<12} {:<4} {:>6} {:>14.6e} {:>14.6e} {:>8.2}",
            r.profile,
            r.formulation.number(),
            r.p,
            r.n,
            r.cond_2,
            r.reference,
            r.factor()
        );
    }
    println!("hill and well profiles are reconstructions; see the metadata file");
    println!("wrote {}", a.out.display());
    Ok(())
}

fn run_gmres(a: GmresArgs) -> Result<()> {
    let names = if a.profile.is_empty() {
        vec!["hill".to_string(), "well".to_string()]
    } else {
        a.profile.clone()
    };
    let mut profiles: Vec<StudyEntry> = Vec::new();
    let mut described = Vec::new();
    for name in &names {
        let study = StudyProfile::ALL.into_iter().find(|s| s.name() == name.to_ascii_lowercase());
        let (label, profile, reference, reconstructed) = match study {
            Some(s) => (s.name().to_string(), s.build()?, Some(s.reference_cond2()), true),
            None => {
                let path = Path::new(name);
                let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| name.clone());
                (label, read_profile(path)?, None, false)
            }
        };
        described.push((label.clone(), profile.clone(), reconstructed));
        profiles.push((label, Arc::new(profile), reference));
    }
    if a.max_iter == 0 {
        bail!("--max-iter must be positive");
    }
    let records = gmres_study(&profiles, a.tol, a.max_iter)?;
    write_gmres_histories(&a.out, &records)?;
    let summary = sibling(&a.out, "summary", "csv");
    write_gmres_summary(&summary, &records)?;
    let meta = study_metadata(&described.iter().map(|(n, p, r)| (n.clone(), Some(p), *r)).collect::<Vec<_>>());
    write_metadata(&sibling(&a.out, "meta", "json"), &meta)?;

    print_gmres_summary(&records, &profiles, a.tol);
    println!("wrote {} and {}", a.out.display(), summary.display());
    Ok(())
}

fn print_gmres_summary(records: &[GmresRecord], profiles: &[StudyEntry], tol: f64) {
    println!("{:<10} {:<12} {:<4} {:>6} {:>14} {:>11} {:>14}", "profile", "formulation", "p", "n", "cond2", "iterations", "final");
    for r in records {
        let iters = r.iterations.map_or_else(|| "capped".to_string(), |k| k.to_string());
        println!(
            "{:<10} {:<12} {:<4} {:>6} {:>14.6e} {:>11} {:>14.3e}",
            r.profile,
            r.formulation.number(),
            r.p,
            r.n,
            r.cond_2,
            iters,
            r.residuals.last().copied().unwrap_or(f64::NAN)
        );
    }
    for (name, _, _) in profiles {
        let own: Vec<&GmresRecord> = records.iter().filter(|r| &r.profile == name).collect();
        let conds: Vec<f64> = own.iter().map(|r| r.cond_2).collect();
        let iters: Vec<f64> = own.iter().map(|r| r.iterations_or_cap()).collect();
        match rank_correlation(&conds, &iters) {
            Some(rho) => println!("{name}: rank correlation of cond2 and iterations to {tol:e}: {rho:.3}"),
            None => println!("{name}: rank correlation undefined (tied iteration counts)"),
        }
    }
}

fn solve(a: SolveArgs) -> Result<()> {
    let profile: Arc<dyn Coefficient> = Arc::new(read_profile(&a.profile)?);
    let kind = default_formulations().get(&a.formulation)?.kind();
    let opts = SolveOptions {
        formulation: kind.strategy(),
        p: a.p.parse()?,
        method: a.method.clone(),
        tol: a.tol,
        max_iter: a.max_iter,
        scheme: default_schemes().get(&a.scheme)?,
        ..SolveOptions::default()
    };
    let f0 = a.f_const;
    let report = solve_with(profile, Arc::new(move |_| f0), a.bc[0], a.bc[1], &opts)?;

    let mut w = std::fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut header = vec!["x", "u", "u_x"];
    if report.sigma.is_some() {
        header.push("sigma");
    }
    let mut text = header.join(",") + "\n";
    for i in 0..report.n {
        let mut fields = vec![fmt_real(report.nodes[i]), fmt_real(report.u[i]), fmt_real(report.u_x[i])];
        if let Some(s) = &report.sigma {
            fields.push(fmt_real(s[i]));
        }
        text += &(fields.join(",") + "\n");
    }
    std::io::Write::write_all(&mut w, text.as_bytes())?;

    println!("formulation {} with p = {}, {} solve", kind.number(), opts.p, report.method);
    println!("{} nodes on {} panels", report.n, report.panel_count);
    if let Some(t) = &report.trace {
        println!("gmres: {} iterations, relative residual {:.3e}", t.iterations, t.final_residual);
    }
    if let (Some(c), Some(b)) = (report.cond_1, report.error_bound) {
        println!("cond1 = {c:.6e}, relative l1 error bound {b:.3e}");
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn probe(a: ProbeArgs) -> Result<()> {
    let profile = read_profile(&a.profile)?;
    let quad = refine_adaptive(&profile, 16, 1e-15)?;
    let (xi, c) = match (a.xi, a.radius) {
        (Some(x), Some(r)) => (x, r),
        _ => auto_ball(&profile),
    };
    let d = profile.domain();
    let unit = d.lo == 0.0 && d.hi == 1.0;
    let mut results: Vec<ProbeResult> = Vec::new();
    for p in exponents(&a.p)? {
        if p == Exponent::Inf {
            results.push(extremal_probe_sup(&profile, &quad)?);
        } else if unit {
            results.push(extremal_probe_lp(&profile, &quad, p, xi, c)?);
        }
        results.push(extremal_probe_inverse(&profile, &quad, p, xi, c)?);
    }
    if let Some(out) = &a.out {
        let text = serde_json::to_string_pretty(&results)?;
        std::fs::write(out, text + "\n").with_context(|| format!("writing {}", out.display()))?;
    }

    println!("ball center {xi}, radius {c}");
    println!("{:<14} {:<4} {:>14} {:>14} {:>14} {:>6}", "quantity", "p", "probe", "floor", "upper", "ok");
    for r in &results {
        println!(
            "{:<14} {:<4} {:>14.6e} {:>14.6e} {:>14.6e} {:>6}",
            r.quantity.to_string(),
            r.p,
            r.value,
            r.floor,
            r.upper.unwrap_or(f64::NAN),
            if r.exceeds_floor() { "yes" } else { "no" }
        );
    }
    if !unit && !exponents(&a.p)?.iter().all(|&p| p == Exponent::Inf) {
        println!("operator-norm probes for finite p need the domain [0, 1]; only the inverse probes ran");
    }
    if let Some(out) = &a.out {
        println!("wrote {}", out.display());
    }
    Ok(())
}
