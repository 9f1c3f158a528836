//! Subcommand implementations.

use std::fmt::Write;

use qipfot::datagen::RngSeed;
use qipfot::dependence::{qipf_ot_dependence, DependenceConfig, Direction};
use qipfot::experiment::{
    equitability_experiment, two_moon_experiment, EquitabilityOutcome, EquitabilityParams, TwoMoonParams,
};
use qipfot::ot::{MomentCoupling, OtConfig};
use qipfot::qipf::{default_eval_points, qipf_moments};
use qipfot::sample::{KernelConfig, SigmaRule};
use qipfot::SampleSet;
use serde::Serialize;

use crate::args::{DependArgs, EquitabilityArgs, QipfArgs, TwoMoonArgs};
use crate::failure::{CliResult, Failure, EXIT_NOT_CONVERGED};
use crate::input::{read_csv, Table};
use crate::manifest::{ensure_dir, write_json, write_text, InputDigest, RunManifest};
use crate::svg;

fn columns(table: &Table, specs: &[String]) -> CliResult<Vec<usize>> {
    if specs.is_empty() {
        return Ok((0..table.width()).collect());
    }
    specs.iter().map(|s| table.column_index(s)).collect()
}

fn sample_set(table: &Table, cols: &[usize]) -> CliResult<SampleSet> {
    Ok(SampleSet::from_rows(&table.select(cols))?)
}

#[derive(Serialize)]
struct QipfConfig<'a> {
    columns: &'a [usize],
    orders: &'a [usize],
    kernel: KernelConfig,
}

pub fn qipf(args: &QipfArgs) -> CliResult<()> {
    if args.moments == 0 {
        return Err(Failure::usage("--moments must be at least 1"));
    }
    let (table, bytes) = read_csv(&args.input)?;
    let cols = columns(&table, &args.columns)?;
    let samples = sample_set(&table, &cols)?;
    let requested = args.sigma.kernel(args.laplacian);
    let sigma = requested.resolve_sigma(&samples)?;
    let kernel = KernelConfig { sigma, sigma_rule: SigmaRule::Manual, ..requested };
    let orders: Vec<usize> = (1..=args.moments).collect();
    let eval = default_eval_points(&samples, sigma);
    let config = QipfConfig { columns: &cols, orders: &orders, kernel };
    let manifest = RunManifest::new("qipf", &config, Vec::new(), vec![InputDigest::new(&args.input, &bytes)])?;
    let field = qipf_moments(&samples, &kernel, &orders, &eval)?;

    ensure_dir(&args.out)?;
    write_json(&args.out.join("moments.json"), &field)?;
    let mut csv = String::from("order,eval_index,value\n");
    for (row, &k) in field.values.rows().into_iter().zip(&field.orders) {
        for (g, v) in row.iter().enumerate() {
            let _ = writeln!(csv, "{k},{g},{v}");
        }
    }
    write_text(&args.out.join("moments.csv"), &csv)?;
    manifest.finish(&args.out)
}

#[derive(Serialize)]
struct DependConfig<'a> {
    col_x: &'a [usize],
    col_y: &'a [usize],
    dependence: DependenceConfig,
}

pub fn dependence_config(args: &DependArgs) -> DependenceConfig {
    DependenceConfig {
        m: args.moments,
        kernel: args.sigma.kernel(args.laplacian),
        ot: OtConfig {
            epsilon: args.epsilon,
            eta: args.eta,
            lambda: args.lambda,
            max_sinkhorn_iters: args.max_iters,
            ..OtConfig::default()
        },
        score_rule: args.score.into(),
        direction: if args.one_way { Direction::XToY } else { Direction::Symmetric },
        cloud: args.cloud.into(),
        marginals: args.marginals.into(),
        ..DependenceConfig::default()
    }
}

pub fn depend(args: &DependArgs) -> CliResult<()> {
    if args.heatmap && args.out.is_none() {
        return Err(Failure::usage("--heatmap requires --out"));
    }
    let (table, bytes) = read_csv(&args.input)?;
    let cx = columns(&table, &args.col_x)?;
    let cy = columns(&table, &args.col_y)?;
    let cfg = dependence_config(args);
    cfg.validate()?;
    let x = sample_set(&table, &cx)?;
    let y = sample_set(&table, &cy)?;
    let config = DependConfig { col_x: &cx, col_y: &cy, dependence: cfg };
    let manifest =
        RunManifest::new("depend", &config, vec![args.seed], vec![InputDigest::new(&args.input, &bytes)])?;
    let report = qipf_ot_dependence(&x, &y, &cfg, RngSeed(args.seed))?;

    println!("{:.6}", report.score);
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_json(&out.join("report.json"), &report)?;
        if args.heatmap {
            write_text(&out.join("coupling.svg"), &svg::heatmap(&report.moment_coupling.mass, &report.moment_coupling.orders))?;
        }
        manifest.finish(out)?;
    }
    if args.strict && !report.converged {
        let worst = report.directions.iter().map(|d| d.row_marginal_err.max(d.col_marginal_err)).fold(0.0, f64::max);
        return Err(Failure {
            code: EXIT_NOT_CONVERGED,
            message: format!("transport did not converge (largest marginal error {worst:.3e})"),
        });
    }
    Ok(())
}

/// Matrix as CSV with the orders as header and first column.
pub fn coupling_csv(mc: &MomentCoupling) -> String {
    let mut s = String::from("order");
    for k in &mc.orders {
        let _ = write!(s, ",{k}");
    }
    s.push('\n');
    for (row, k) in mc.mass.rows().into_iter().zip(&mc.orders) {
        let _ = write!(s, "{k}");
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct Side {
    score: f64,
    mismatched_moments: Vec<usize>,
    converged: bool,
}

#[derive(Serialize)]
struct TwoMoonSummary {
    params: TwoMoonParams,
    config: DependenceConfig,
    sigma_a: f64,
    sigma_b: f64,
    field_max_abs_diff: f64,
    bands: Vec<qipfot::experiment::BandMatch>,
    before: Side,
    after: Side,
}

pub fn two_moon(args: &TwoMoonArgs) -> CliResult<()> {
    let params = TwoMoonParams {
        n: args.n,
        noise: args.noise,
        rotation_deg: args.rotation_deg,
        moments: args.moments,
        seed: RngSeed(args.seed),
    };
    let manifest = RunManifest::new("experiment two-moon", &params, vec![args.seed], Vec::new())?;
    let o = two_moon_experiment(&params)?;

    ensure_dir(&args.out)?;
    for (name, report) in [("before", &o.before), ("after", &o.after)] {
        let mc = &report.moment_coupling;
        write_text(&args.out.join(format!("coupling_{name}.csv")), &coupling_csv(mc))?;
        write_text(&args.out.join(format!("coupling_{name}.svg")), &svg::heatmap(&mc.mass, &mc.orders))?;
    }
    let side = |r: &qipfot::DependenceReport| Side {
        score: r.score,
        mismatched_moments: r.mismatched_moments.clone(),
        converged: r.converged,
    };
    let summary = TwoMoonSummary {
        params: o.params,
        config: o.config,
        sigma_a: o.sigma_a,
        sigma_b: o.sigma_b,
        field_max_abs_diff: o.field_max_abs_diff,
        bands: o.bands.clone(),
        before: side(&o.before),
        after: side(&o.after),
    };
    write_json(&args.out.join("summary.json"), &summary)?;
    for b in &o.bands {
        println!("orders {}-{}: diagonal match {:.3} before, {:.3} after", b.lo, b.hi, b.before, b.after);
    }
    manifest.finish(&args.out)
}

pub fn results_csv(o: &EquitabilityOutcome) -> String {
    let mut s = String::from("method,a,run,score\n");
    for r in &o.rows {
        let _ = writeln!(s, "{},{},{},{}", r.method, r.a, r.run, r.score);
    }
    s
}

pub fn summary_csv(o: &EquitabilityOutcome) -> String {
    let mut s = String::from("method,a,mean,sd\n");
    for r in &o.summary {
        let _ = writeln!(s, "{},{},{},{}", r.method, r.a, r.mean, r.sd);
    }
    s
}

fn curves_of(o: &EquitabilityOutcome, methods: &[qipfot::experiment::Method]) -> Vec<svg::Curve> {
    methods
        .iter()
        .map(|&m| {
            let rows: Vec<_> = o.summary.iter().filter(|r| r.method == m).collect();
            svg::Curve {
                name: m.to_string(),
                x: rows.iter().map(|r| r.a).collect(),
                mean: rows.iter().map(|r| r.mean).collect(),
                sd: rows.iter().map(|r| r.sd).collect(),
            }
        })
        .collect()
}

pub fn equitability(args: &EquitabilityArgs) -> CliResult<()> {
    let mut methods = Vec::new();
    for &m in &args.methods {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let params = EquitabilityParams {
        n: args.n,
        a_grid: args.a_grid.0.clone(),
        runs: args.runs,
        methods: methods.clone(),
        seed: RngSeed(args.seed),
        dependence: DependenceConfig::default(),
    };
    let manifest = RunManifest::new("experiment equitability", &params, vec![args.seed], Vec::new())?;
    let o = equitability_experiment(&params)?;

    ensure_dir(&args.out)?;
    write_text(&args.out.join("results.csv"), &results_csv(&o))?;
    write_text(&args.out.join("summary.csv"), &summary_csv(&o))?;
    write_json(&args.out.join("summary.json"), &o.summary)?;
    if !args.no_plot {
        write_text(&args.out.join("curves.svg"), &svg::curves(&curves_of(&o, &methods), "a", "score"))?;
    }
    manifest.finish(&args.out)
}
