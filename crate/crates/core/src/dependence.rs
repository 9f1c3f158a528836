//! End-to-end dependence measure.
//!
//! Both variables are decomposed into the same ordered moment set, the two
//! moment sets are coupled by regularized optimal transport, and the
//! coefficient is `1 - (normalized mismatch)`, where a source moment is
//! mismatched when the bulk of its mass lands on a different target moment.
//!
//! Cloud constructions:
//!
//! * [`CloudMode::Profile`] (default): one point per moment whose feature is
//!   the moment's standardized profile across the paired observations, so
//!   moment `k` of `x` and moment `l` of `y` are close when they single out
//!   the same observations. This requires `x` and `y` to be paired samples.
//! * [`CloudMode::Quantile`]: one point per moment whose feature is the
//!   centered quantile function of its values. Compares two samples as
//!   distributions; pairing is not used.
//! * [`CloudMode::Pointwise`]: one scalar point per (moment, evaluation point).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::baselines::average_ranks;
use crate::datagen::RngSeed;
use crate::error::{Error, Result};
use crate::ot::{
    aggregate_by_class, cost_matrix_with, laplacian_reg_ot, GroundCost, LabeledCloud, MomentCoupling, OtConfig,
};
use crate::qipf::{default_eval_points, normalize_moment_field, qipf_moments_with, HermiteArgument, MomentField};
use crate::sample::{KernelConfig, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreRule {
    #[default]
    IndexWeighted,
    CountWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    XToY,
    #[default]
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudMode {
    #[default]
    Profile,
    Quantile,
    Pointwise,
}

/// Preprocessing of each coordinate before the moments are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marginals {
    /// Replace each coordinate by its midranks divided by n. Coordinatewise
    /// ranks are not rotation invariant in d >= 2.
    #[default]
    Rank,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceConfig {
    /// Number of moments; orders are `1..=m`.
    pub m: usize,
    pub kernel: KernelConfig,
    pub ot: OtConfig,
    pub score_rule: ScoreRule,
    pub direction: Direction,
    pub cloud: CloudMode,
    pub marginals: Marginals,
    pub ground_cost: GroundCost,
    pub hermite_argument: HermiteArgument,
}

impl Default for DependenceConfig {
    fn default() -> Self {
        Self {
            m: 12,
            kernel: KernelConfig::default(),
            ot: OtConfig { eta: 0.0, ..OtConfig::default() },
            score_rule: ScoreRule::default(),
            direction: Direction::default(),
            cloud: CloudMode::default(),
            marginals: Marginals::default(),
            ground_cost: GroundCost::Euclidean,
            hermite_argument: HermiteArgument::default(),
        }
    }
}

impl DependenceConfig {
    /// Preset for comparing two unpaired samples: quantile clouds on raw
    /// coordinates with a sharper entropic plan.
    pub fn two_sample() -> Self {
        Self {
            cloud: CloudMode::Quantile,
            marginals: Marginals::Raw,
            ot: OtConfig { eta: 0.0, epsilon: 3e-3, max_sinkhorn_iters: 20_000, ..OtConfig::default() },
            ..Self::default()
        }
    }

    pub fn orders(&self) -> Vec<usize> {
        (1..=self.m).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidConfig(format!("at least 2 moments are required, got {}", self.m)));
        }
        if self.m > crate::hermite::MAX_ORDER {
            return Err(Error::OrderTooLarge(self.m));
        }
        self.kernel.validate()?;
        self.ot.validate()
    }
}

/// One scalar sample per (moment, evaluation point), weights `1/(m G)`.
pub fn build_labeled_cloud(field: &MomentField) -> Result<LabeledCloud> {
    let (m, g) = field.values.dim();
    let features = Array2::from_shape_vec((m * g, 1), field.values.iter().copied().collect())
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let labels = field.orders.iter().flat_map(|&k| std::iter::repeat_n(k, g)).collect();
    LabeledCloud::uniform(features, labels)
}

/// One point per moment: the moment's values across the evaluation points,
/// centered and scaled to unit Euclidean norm. Constant rows map to zero.
pub fn build_profile_cloud(field: &MomentField) -> Result<LabeledCloud> {
    let mut features = field.values.clone();
    for mut row in features.rows_mut() {
        let mean = row.sum() / row.len() as f64;
        row.mapv_inplace(|v| v - mean);
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    LabeledCloud::uniform(features, field.orders.clone())
}

/// Outcome of the diagonal-correspondence rule on a moment coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchScore {
    pub score: f64,
    pub mismatched: Vec<usize>,
    pub raw_mismatch_sum: usize,
}

/// Target moment receiving the most mass from each source moment. Ties go to
/// the diagonal, then to the smallest index.
pub fn matched_targets(mc: &MomentCoupling) -> Vec<usize> {
    mc.mass
        .rows()
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let mut best = k;
            for (l, &v) in row.iter().enumerate() {
                if v > row[best] || (v == row[best] && l < best && best != k) {
                    best = l;
                }
            }
            best
        })
        .collect()
}

pub fn mismatch_score(mc: &MomentCoupling, rule: ScoreRule) -> MismatchScore {
    let matches = matched_targets(mc);
    let mismatched: Vec<usize> = matches
        .iter()
        .enumerate()
        .filter(|&(k, &l)| l != k)
        .map(|(k, _)| mc.orders[k])
        .collect();
    let raw: usize = mismatched.iter().sum();
    let score = match rule {
        ScoreRule::IndexWeighted => {
            let total: usize = mc.orders.iter().sum();
            if total == 0 {
                if mismatched.is_empty() { 1.0 } else { 0.0 }
            } else {
                1.0 - raw as f64 / total as f64
            }
        }
        ScoreRule::CountWeighted => 1.0 - mismatched.len() as f64 / mc.orders.len() as f64,
    };
    MismatchScore { score: score.clamp(0.0, 1.0), mismatched, raw_mismatch_sum: raw }
}

/// Result of transporting one variable's moments onto the other's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalResult {
    pub direction: String,
    pub score: f64,
    pub mismatched_moments: Vec<usize>,
    pub raw_mismatch_sum: usize,
    pub moment_coupling: MomentCoupling,
    pub converged: bool,
    pub row_marginal_err: f64,
    pub col_marginal_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    /// Mean of the directional scores.
    pub score: f64,
    /// Union of the directional mismatch sets.
    pub mismatched_moments: Vec<usize>,
    /// Sum of the indices in `mismatched_moments`.
    pub raw_mismatch_sum: usize,
    /// Coupling of the x-to-y direction.
    pub moment_coupling: MomentCoupling,
    pub directions: Vec<DirectionalResult>,
    pub converged: bool,
    pub config: DependenceConfig,
    pub seed: RngSeed,
}

fn rank_columns(s: &SampleSet) -> Result<SampleSet> {
    let n = s.n() as f64;
    let mut out = s.points().clone();
    for mut col in out.columns_mut() {
        let ranks = average_ranks(&col.to_vec());
        for (slot, r) in col.iter_mut().zip(ranks) {
            *slot = r / n;
        }
    }
    SampleSet::new(out)
}

/// Normalized moment field of one variable as used by the pipeline.
pub fn variable_field(samples: &SampleSet, cfg: &DependenceConfig) -> Result<MomentField> {
    let prepared = match cfg.marginals {
        Marginals::Rank => rank_columns(samples)?,
        Marginals::Raw => samples.clone(),
    };
    let sigma = cfg.kernel.resolve_sigma(&prepared)?;
    let eval = match cfg.cloud {
        CloudMode::Profile => prepared.points().clone(),
        CloudMode::Quantile | CloudMode::Pointwise => default_eval_points(&prepared, sigma),
    };
    let kernel = KernelConfig { sigma, sigma_rule: crate::sample::SigmaRule::Manual, ..cfg.kernel };
    let field = qipf_moments_with(&prepared, &kernel, &cfg.orders(), &eval, cfg.hermite_argument)?;
    Ok(normalize_moment_field(&field))
}

/// Number of quantile levels in [`build_quantile_cloud`] features.
pub const QUANTILE_LEVELS: usize = 128;

/// One point per moment: the moment's empirical quantile function sampled at
/// `QUANTILE_LEVELS` mid-levels and centered. Euclidean distance between two
/// features is the 2-Wasserstein distance between the value distributions
/// after aligning their means, so the per-moment lower-bound shift, which
/// rests on a single extreme point, does not enter the cost.
pub fn build_quantile_cloud(field: &MomentField) -> Result<LabeledCloud> {
    let q = QUANTILE_LEVELS;
    let mut features = Array2::zeros((field.values.nrows(), q));
    for (row, mut out) in field.values.rows().into_iter().zip(features.rows_mut()) {
        let mut sorted = row.to_vec();
        sorted.sort_by(f64::total_cmp);
        let last = (sorted.len() - 1) as f64;
        for (j, slot) in out.iter_mut().enumerate() {
            let pos = ((j as f64 + 0.5) / q as f64 * sorted.len() as f64 - 0.5).clamp(0.0, last);
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let t = pos - lo as f64;
            *slot = ((1.0 - t) * sorted[lo] + t * sorted[hi]) / (q as f64).sqrt();
        }
        let mean = out.sum() / q as f64;
        out.mapv_inplace(|v| v - mean);
    }
    LabeledCloud::uniform(features, field.orders.clone())
}

fn build_cloud(field: &MomentField, mode: CloudMode) -> Result<LabeledCloud> {
    match mode {
        CloudMode::Profile => build_profile_cloud(field),
        CloudMode::Quantile => build_quantile_cloud(field),
        CloudMode::Pointwise => build_labeled_cloud(field),
    }
}

fn couple(
    src: &LabeledCloud,
    tgt: &LabeledCloud,
    orders: &[usize],
    cfg: &DependenceConfig,
    name: &str,
) -> Result<DirectionalResult> {
    let cost = cost_matrix_with(src, tgt, cfg.ground_cost)?;
    let coupling = laplacian_reg_ot(&cost, src, tgt, &cfg.ot)?;
    let mc = aggregate_by_class(&coupling, &src.labels, &tgt.labels, orders)?;
    let s = mismatch_score(&mc, cfg.score_rule);
    Ok(DirectionalResult {
        direction: name.to_string(),
        score: s.score,
        mismatched_moments: s.mismatched,
        raw_mismatch_sum: s.raw_mismatch_sum,
        moment_coupling: mc,
        converged: coupling.converged,
        row_marginal_err: coupling.row_marginal_err,
        col_marginal_err: coupling.col_marginal_err,
    })
}

/// Dependence coefficient in [0, 1] between paired samples `x` and `y`.
///
/// The pipeline is deterministic; `seed` is recorded in the report.
pub fn qipf_ot_dependence(
    x: &SampleSet,
    y: &SampleSet,
    cfg: &DependenceConfig,
    seed: RngSeed,
) -> Result<DependenceReport> {
    cfg.validate()?;
    if cfg.cloud == CloudMode::Profile && x.n() != y.n() {
        return Err(Error::DimensionMismatch { expected: x.n(), got: y.n() });
    }
    let fx = variable_field(x, cfg)?;
    let fy = variable_field(y, cfg)?;
    dependence_from_fields(&fx, &fy, cfg, seed)
}

/// Couples two normalized moment fields and scores the result. The fields
/// must carry the orders `1..=cfg.m`; in profile mode they must share the
/// number of evaluation points.
pub fn dependence_from_fields(
    fx: &MomentField,
    fy: &MomentField,
    cfg: &DependenceConfig,
    seed: RngSeed,
) -> Result<DependenceReport> {
    cfg.validate()?;
    let orders = cfg.orders();
    if fx.orders != orders || fy.orders != orders {
        return Err(Error::InvalidInput("moment fields do not carry the configured orders".into()));
    }
    if cfg.cloud == CloudMode::Profile && fx.values.ncols() != fy.values.ncols() {
        return Err(Error::DimensionMismatch { expected: fx.values.ncols(), got: fy.values.ncols() });
    }
    let cx = build_cloud(fx, cfg.cloud)?;
    let cy = build_cloud(fy, cfg.cloud)?;

    let mut directions = vec![couple(&cx, &cy, &orders, cfg, "x_to_y")?];
    if cfg.direction == Direction::Symmetric {
        directions.push(couple(&cy, &cx, &orders, cfg, "y_to_x")?);
    }
    let score = directions.iter().map(|d| d.score).sum::<f64>() / directions.len() as f64;
    let mut mismatched: Vec<usize> = directions.iter().flat_map(|d| d.mismatched_moments.clone()).collect();
    mismatched.sort_unstable();
    mismatched.dedup();
    Ok(DependenceReport {
        score,
        raw_mismatch_sum: mismatched.iter().sum(),
        mismatched_moments: mismatched,
        moment_coupling: directions[0].moment_coupling.clone(),
        converged: directions.iter().all(|d| d.converged),
        directions,
        config: *cfg,
        seed,
    })
}

/// Convenience wrapper for scalar paired series.
pub fn qipf_ot_dependence_paired(
    p: &crate::baselines::PairedSeries,
    cfg: &DependenceConfig,
    seed: RngSeed,
) -> Result<DependenceReport> {
    let x = SampleSet::from_column(p.x())?;
    let y = SampleSet::from_column(p.y())?;
    qipf_ot_dependence(&x, &y, cfg, seed)
}
