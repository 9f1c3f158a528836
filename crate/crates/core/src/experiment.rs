//! The two synthetic experiments: rotation robustness on two moons and the
//! equitability sweep against baseline measures.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    copula_ot_dependence, distance_correlation, mutual_information, pearson, spearman, PairedSeries, MI_BINS,
};
use crate::datagen::{equitability_pair, rotate2d, two_moons, RngSeed};
use crate::dependence::{matched_targets, variable_field, DependenceConfig, DependenceReport};
use crate::error::{Error, Result};
use crate::ot::{MomentCoupling, OtConfig};
use crate::sample::{KernelConfig, SampleSet, SigmaRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoMoonParams {
    pub n: usize,
    pub noise: f64,
    pub rotation_deg: f64,
    pub moments: usize,
    pub seed: RngSeed,
}

impl Default for TwoMoonParams {
    fn default() -> Self {
        Self { n: 200, noise: 0.05, rotation_deg: 30.0, moments: 12, seed: RngSeed(42) }
    }
}

/// Fraction of orders `lo..=hi` whose transported mass peaks on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandMatch {
    pub lo: usize,
    pub hi: usize,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoMoonOutcome {
    pub params: TwoMoonParams,
    pub config: DependenceConfig,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub bands: Vec<BandMatch>,
    /// Largest absolute difference between the normalized moment fields of
    /// the original and rotated moons.
    pub field_max_abs_diff: f64,
    pub before: DependenceReport,
    pub after: DependenceReport,
}

/// Diagonal-match fraction over the orders in `lo..=hi`.
pub fn diagonal_match_fraction(mc: &MomentCoupling, lo: usize, hi: usize) -> f64 {
    let matched = matched_targets(mc);
    let band: Vec<usize> = (0..mc.orders.len()).filter(|&i| (lo..=hi).contains(&mc.orders[i])).collect();
    if band.is_empty() {
        return 0.0;
    }
    band.iter().filter(|&&i| matched[i] == i).count() as f64 / band.len() as f64
}

/// Order bands reported by the two-moon experiment: the lower and upper half.
pub fn order_bands(m: usize) -> Vec<(usize, usize)> {
    let mid = m.div_ceil(2);
    if mid < m {
        vec![(1, mid), (mid + 1, m)]
    } else {
        vec![(1, m)]
    }
}

fn manual_config(base: &DependenceConfig, sigma: f64) -> DependenceConfig {
    DependenceConfig { kernel: KernelConfig { sigma, sigma_rule: SigmaRule::Manual, ..base.kernel }, ..*base }
}

/// Moon A against moon B before and after rotating the whole dataset.
///
/// Bandwidths are resolved once on the unrotated moons and reused afterwards,
/// so the rotated run differs only by the rigid motion.
pub fn two_moon_experiment(params: &TwoMoonParams) -> Result<TwoMoonOutcome> {
    if !params.rotation_deg.is_finite() {
        return Err(Error::InvalidInput("rotation must be finite".into()));
    }
    let base = DependenceConfig { m: params.moments, ..DependenceConfig::two_sample() };
    base.validate()?;
    let (a, b) = two_moons(params.n, params.noise, params.seed)?;
    let sigma_a = base.kernel.resolve_sigma(&a)?;
    let sigma_b = base.kernel.resolve_sigma(&b)?;

    let angle = params.rotation_deg.to_radians();
    let ra = SampleSet::new(rotate2d(a.points(), angle)?)?;
    let rb = SampleSet::new(rotate2d(b.points(), angle)?)?;

    let before = paired_run(&a, &b, &base, sigma_a, sigma_b, params.seed)?;
    let after = paired_run(&ra, &rb, &base, sigma_a, sigma_b, params.seed)?;

    let mut diff: f64 = 0.0;
    for (orig, rot, s) in [(&a, &ra, sigma_a), (&b, &rb, sigma_b)] {
        let cfg = manual_config(&base, s);
        let f0 = variable_field(orig, &cfg)?;
        let f1 = variable_field(rot, &cfg)?;
        diff = f0.values.iter().zip(f1.values.iter()).fold(diff, |d, (u, v)| d.max((u - v).abs()));
    }

    let bands = order_bands(params.moments)
        .into_iter()
        .map(|(lo, hi)| BandMatch {
            lo,
            hi,
            before: diagonal_match_fraction(&before.moment_coupling, lo, hi),
            after: diagonal_match_fraction(&after.moment_coupling, lo, hi),
        })
        .collect();

    Ok(TwoMoonOutcome {
        params: *params,
        config: base,
        sigma_a,
        sigma_b,
        bands,
        field_max_abs_diff: diff,
        before,
        after,
    })
}

fn paired_run(
    a: &SampleSet,
    b: &SampleSet,
    base: &DependenceConfig,
    sigma_a: f64,
    sigma_b: f64,
    seed: RngSeed,
) -> Result<DependenceReport> {
    // each moon keeps its own bandwidth, so the pipeline runs on fields built separately
    let fa = variable_field(a, &manual_config(base, sigma_a))?;
    let fb = variable_field(b, &manual_config(base, sigma_b))?;
    crate::dependence::dependence_from_fields(&fa, &fb, base, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    QipfOt,
    Pearson,
    Spearman,
    Dcor,
    Mi,
    CopulaOt,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::QipfOt, Method::Pearson, Method::Spearman, Method::Dcor, Method::Mi, Method::CopulaOt];

    pub fn name(self) -> &'static str {
        match self {
            Method::QipfOt => "qipf-ot",
            Method::Pearson => "pearson",
            Method::Spearman => "spearman",
            Method::Dcor => "dcor",
            Method::Mi => "mi",
            Method::CopulaOt => "copula-ot",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquitabilityParams {
    pub n: usize,
    pub a_grid: Vec<f64>,
    pub runs: usize,
    pub methods: Vec<Method>,
    pub seed: RngSeed,
    pub dependence: DependenceConfig,
}

impl Default for EquitabilityParams {
    fn default() -> Self {
        Self {
            n: 200,
            a_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            runs: 10,
            methods: Method::ALL.to_vec(),
            seed: RngSeed(42),
            dependence: DependenceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub a: f64,
    pub run: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub a: f64,
    pub mean: f64,
    /// Sample standard deviation over runs (0 for a single run).
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquitabilityOutcome {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

/// Seed of the data drawn for grid cell `a_index` and repetition `run`.
pub fn cell_seed(root: RngSeed, a_index: usize, run: usize) -> RngSeed {
    root.child(((a_index as u64) << 32) | run as u64)
}

/// Score of one method on one paired sample. Correlations are reported in
/// absolute value; mutual information in nats.
pub fn method_score(method: Method, p: &PairedSeries, cfg: &DependenceConfig, seed: RngSeed) -> Result<f64> {
    match method {
        Method::QipfOt => crate::dependence::qipf_ot_dependence_paired(p, cfg, seed).map(|r| r.score),
        Method::Pearson => pearson(p).map(f64::abs),
        Method::Spearman => spearman(p).map(f64::abs),
        Method::Dcor => distance_correlation(p),
        Method::Mi => mutual_information(p, MI_BINS),
        Method::CopulaOt => copula_ot_dependence(p, &OtConfig::default(), seed.child(1)),
    }
}

/// Scores every method on `runs` fresh samples at every grid value. Rows are
/// ordered by (method, a, run) regardless of evaluation order.
pub fn equitability_experiment(params: &EquitabilityParams) -> Result<EquitabilityOutcome> {
    if params.runs == 0 {
        return Err(Error::InvalidInput("runs must be positive".into()));
    }
    if params.a_grid.is_empty() {
        return Err(Error::InvalidInput("a-grid is empty".into()));
    }
    if params.methods.is_empty() {
        return Err(Error::InvalidInput("no methods selected".into()));
    }
    params.dependence.validate()?;

    let cells: Vec<(usize, usize)> =
        (0..params.a_grid.len()).flat_map(|i| (0..params.runs).map(move |r| (i, r))).collect();
    let per_cell: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(i, r)| {
            let seed = cell_seed(params.seed, i, r);
            let pair = equitability_pair(params.n, params.a_grid[i], seed)?;
            params.methods.iter().map(|&m| method_score(m, &pair, &params.dependence, seed)).collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cells.len() * params.methods.len());
    let mut summary = Vec::with_capacity(params.a_grid.len() * params.methods.len());
    for (mi, &method) in params.methods.iter().enumerate() {
        for (i, &a) in params.a_grid.iter().enumerate() {
            let scores: Vec<f64> = (0..params.runs).map(|r| per_cell[i * params.runs + r][mi]).collect();
            for (run, &score) in scores.iter().enumerate() {
                rows.push(ResultRow { method, a, run, score });
            }
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            let sd = if scores.len() > 1 {
                (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (scores.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            summary.push(SummaryRow { method, a, mean, sd });
        }
    }
    Ok(EquitabilityOutcome { rows, summary })
}
