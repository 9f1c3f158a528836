//! Entropic optimal transport between labeled point clouds.
//!
//! [`sinkhorn`] is the log-domain solver everything else builds on.
//! [`group_lasso_ot`] adds a concave class penalty discouraging a target point
//! from receiving mass from several source classes; it is minimized by
//! majorization, each step a Sinkhorn solve on a reweighted cost.
//! [`laplacian_reg_ot`] adds a graph-Laplacian penalty on the barycentric map
//! of the source points, handled by generalized conditional gradient.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Group-norm smoothing in the class-penalty reweighting.
const GROUP_DELTA: f64 = 1e-12;

/// Rows above this count are processed in parallel.
const PAR_ROWS: usize = 256;

/// Scalar or vector samples tagged with class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCloud {
    /// N×D features; the moment pipeline uses D = 1 for pointwise clouds and
    /// D = G for profile clouds.
    #[serde(with = "crate::qipf::rows")]
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub weights: Vec<f64>,
}

impl LabeledCloud {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::InvalidInput("empty cloud".into()));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
        }
        if weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: weights.len() });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("cloud features must be finite".into()));
        }
        check_weights(&weights)?;
        Ok(Self { features, labels, weights })
    }

    /// Cloud with weights `1/N`.
    pub fn uniform(features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let n = features.nrows();
        Self::new(features, labels, vec![1.0 / n as f64; n])
    }

    /// Scalar features.
    pub fn from_scalars(values: &[f64], labels: Vec<usize>) -> Result<Self> {
        let features = Array2::from_shape_vec((values.len(), 1), values.to_vec())
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::uniform(features, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("weights must be positive and finite".into()));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundCost {
    #[default]
    SquaredEuclidean,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtConfig {
    /// Entropic regularization, relative to the max-normalized cost.
    pub epsilon: f64,
    /// Class-penalty strength.
    pub eta: f64,
    /// Laplacian-penalty strength.
    pub lambda: f64,
    pub max_sinkhorn_iters: usize,
    /// Majorization / conditional-gradient steps.
    pub outer_iters: usize,
    pub marginal_tol: f64,
    /// Neighbor count for the source similarity graph.
    pub knn: usize,
}

impl Default for OtConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            eta: 0.1,
            lambda: 0.0,
            max_sinkhorn_iters: 1000,
            outer_iters: 10,
            marginal_tol: 1e-9,
            knn: 5,
        }
    }
}

impl OtConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidConfig(format!("{what} out of range: {v}")));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", self.epsilon);
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad("eta", self.eta);
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda", self.lambda);
        }
        if !(self.marginal_tol > 0.0) {
            return bad("marginal_tol", self.marginal_tol);
        }
        if self.max_sinkhorn_iters == 0 {
            return Err(Error::InvalidConfig("max_sinkhorn_iters must be positive".into()));
        }
        if self.knn == 0 {
            return Err(Error::InvalidConfig("knn must be positive".into()));
        }
        Ok(())
    }
}

/// A transport plan with the marginal errors it achieves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    #[serde(with = "crate::qipf::rows")]
    pub plan: Array2<f64>,
    pub row_marginal_err: f64,
    pub col_marginal_err: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl CouplingMatrix {
    fn from_plan(plan: Array2<f64>, mu: &[f64], nu: &[f64], tol: f64, iterations: usize) -> Self {
        let (row_marginal_err, col_marginal_err) = marginal_errors(plan.view(), mu, nu);
        Self {
            plan,
            row_marginal_err,
            col_marginal_err,
            converged: row_marginal_err <= tol && col_marginal_err <= tol,
            iterations,
        }
    }

    /// `<plan, cost>`.
    pub fn transport_cost(&self, cost: &Array2<f64>) -> f64 {
        self.plan.iter().zip(cost.iter()).map(|(p, c)| p * c).sum()
    }

    /// `Err(NotConverged)` when the marginal tolerance was missed.
    pub fn require_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged { row_err: self.row_marginal_err, col_err: self.col_marginal_err })
        }
    }
}

fn marginal_errors(plan: ArrayView2<f64>, mu: &[f64], nu: &[f64]) -> (f64, f64) {
    let row = plan
        .rows()
        .into_iter()
        .zip(mu)
        .map(|(r, m)| (r.sum() - m).abs())
        .fold(0.0, f64::max);
    let col = plan
        .columns()
        .into_iter()
        .zip(nu)
        .map(|(c, n)| (c.sum() - n).abs())
        .fold(0.0, f64::max);
    (row, col)
}

/// Pairwise ground cost, divided by its maximum. All-zero costs stay zero.
pub fn cost_matrix(src: &LabeledCloud, tgt: &LabeledCloud) -> Result<Array2<f64>> {
    cost_matrix_with(src, tgt, GroundCost::SquaredEuclidean)
}

pub fn cost_matrix_with(src: &LabeledCloud, tgt: &LabeledCloud, ground: GroundCost) -> Result<Array2<f64>> {
    let d = src.features.ncols();
    if tgt.features.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: tgt.features.ncols() });
    }
    let mut cost = Array2::zeros((src.len(), tgt.len()));
    for (mut out, a) in cost.rows_mut().into_iter().zip(src.features.rows()) {
        for (slot, b) in out.iter_mut().zip(tgt.features.rows()) {
            let sq: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            *slot = match ground {
                GroundCost::SquaredEuclidean => sq,
                GroundCost::Euclidean => sq.sqrt(),
            };
        }
    }
    let max = cost.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        cost.mapv_inplace(|v| v / max);
    }
    Ok(cost)
}

/// Sweep cap for each intermediate annealing stage.
const ANNEAL_SWEEPS: usize = 200;

fn check_problem(cost: &Array2<f64>, mu: &[f64], nu: &[f64], config: &OtConfig) -> Result<()> {
    config.validate()?;
    let (r, c) = cost.dim();
    if mu.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: mu.len() });
    }
    if nu.len() != c {
        return Err(Error::DimensionMismatch { expected: c, got: nu.len() });
    }
    if cost.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("cost matrix must be finite".into()));
    }
    check_weights(mu)?;
    check_weights(nu)
}

/// `log sum_j exp(a_j)` over `a_j = (pot_j - cost_j) / eps`.
#[inline]
fn log_sum_exp(pot: &[f64], cost: &[f64], inv_eps: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (p, c) in pot.iter().zip(cost) {
        max = max.max((p - c) * inv_eps);
    }
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = pot.iter().zip(cost).map(|(p, c)| ((p - c) * inv_eps - max).exp()).sum();
    max + s.ln()
}

fn row_lse(cost: &[f64], ncols: usize, pot: &[f64], inv_eps: f64) -> Vec<f64> {
    if cost.len() / ncols.max(1) >= PAR_ROWS {
        cost.par_chunks(ncols).map(|row| log_sum_exp(pot, row, inv_eps)).collect()
    } else {
        cost.chunks(ncols).map(|row| log_sum_exp(pot, row, inv_eps)).collect()
    }
}

/// Entropic transport plan by alternating log-domain scaling.
///
/// The regularization is annealed: `eps` starts at the largest cost and halves
/// toward `epsilon`, each stage warm-started from the previous potentials.
/// Stops once the row marginals (the column marginals are exact after each
/// sweep) are within `marginal_tol` at the target `epsilon`, or after
/// `max_sinkhorn_iters` sweeps in total. Non-convergence is reported on the
/// returned plan, not raised.
pub fn sinkhorn(cost: &Array2<f64>, mu: &[f64], nu: &[f64], config: &OtConfig) -> Result<CouplingMatrix> {
    check_problem(cost, mu, nu, config)?;
    let (r, c) = cost.dim();
    let c_rows: Vec<f64> = cost.iter().copied().collect();
    let c_cols: Vec<f64> = cost.t().iter().copied().collect();
    let log_mu: Vec<f64> = mu.iter().map(|v| v.ln()).collect();
    let log_nu: Vec<f64> = nu.iter().map(|v| v.ln()).collect();
    let mut f = vec![0.0; r];
    let mut g = vec![0.0; c];
    let mut iterations = 0;

    // a constant shift of the cost leaves the plan unchanged, so the ladder
    // starts from the spread
    let hi = cost.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = cost.iter().copied().fold(f64::INFINITY, f64::min);
    let mut stages = vec![config.epsilon];
    while stages[stages.len() - 1] * 2.0 < hi - lo {
        let next = stages[stages.len() - 1] * 2.0;
        stages.push(next);
    }
    stages.reverse();
    // warm-up stages share at most half of the budget
    let warm = if stages.len() > 1 {
        (config.max_sinkhorn_iters / (2 * (stages.len() - 1))).clamp(1, ANNEAL_SWEEPS)
    } else {
        0
    };

    for (stage, &eps) in stages.iter().enumerate() {
        let last = stage + 1 == stages.len();
        let inv_eps = 1.0 / eps;
        let tol = if last { config.marginal_tol } else { config.marginal_tol.max(1e-6) };
        let mut sweeps = 0;
        while iterations < config.max_sinkhorn_iters && (last || sweeps < warm) {
            let lse = row_lse(&c_rows, c, &g, inv_eps);
            if sweeps > 0 {
                let err = f
                    .iter()
                    .zip(&lse)
                    .zip(mu)
                    .map(|((fi, l), m)| ((fi * inv_eps + l).exp() - m).abs())
                    .fold(0.0, f64::max);
                if err <= tol {
                    break;
                }
            }
            for ((fi, l), lm) in f.iter_mut().zip(&lse).zip(&log_mu) {
                *fi = eps * (lm - l);
            }
            let lse_c = row_lse(&c_cols, r, &f, inv_eps);
            for ((gj, l), ln) in g.iter_mut().zip(&lse_c).zip(&log_nu) {
                *gj = eps * (ln - l);
            }
            iterations += 1;
            sweeps += 1;
        }
    }

    let inv_eps = 1.0 / config.epsilon;
    let plan = Array2::from_shape_fn((r, c), |(i, j)| ((f[i] + g[j] - cost[[i, j]]) * inv_eps).exp());
    Ok(CouplingMatrix::from_plan(plan, mu, nu, config.marginal_tol, iterations))
}

/// Per-class column mass `M[c][j] = sum_{i in class c} plan[i][j]`, with the
/// class index of each source row.
fn class_column_mass(plan: &Array2<f64>, labels: &[usize]) -> (Array2<f64>, Vec<usize>) {
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let slot: Vec<usize> = labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    let mut mass = Array2::zeros((classes.len(), plan.ncols()));
    for (row, &s) in plan.rows().into_iter().zip(&slot) {
        let mut target = mass.row_mut(s);
        target += &row;
    }
    (mass, slot)
}

/// Majorizer weights of the class penalty around `plan`:
/// `W[i][j] = 1/2 (M[class(i)][j] + delta)^(-1/2)`.
fn class_penalty_weights(plan: &Array2<f64>, labels: &[usize]) -> Array2<f64> {
    let (mass, slot) = class_column_mass(plan, labels);
    Array2::from_shape_fn(plan.dim(), |(i, j)| 0.5 / (mass[[slot[i], j]] + GROUP_DELTA).sqrt())
}

fn class_penalty(plan: &Array2<f64>, labels: &[usize]) -> f64 {
    class_column_mass(plan, labels).0.iter().map(|m| m.max(0.0).sqrt()).sum()
}

/// Entropic transport with the class (group-lasso) penalty
/// `eta * sum_j sum_c (sum_{i in c} plan[i][j])^(1/2)`.
///
/// `eta = 0` returns the plain [`sinkhorn`] plan.
pub fn group_lasso_ot(
    cost: &Array2<f64>,
    src: &LabeledCloud,
    tgt: &LabeledCloud,
    config: &OtConfig,
) -> Result<CouplingMatrix> {
    let mut plan = sinkhorn(cost, &src.weights, &tgt.weights, config)?;
    if config.eta == 0.0 {
        return Ok(plan);
    }
    for _ in 0..config.outer_iters {
        let w = class_penalty_weights(&plan.plan, &src.labels);
        let adjusted = cost + &(w * config.eta);
        plan = sinkhorn(&adjusted, &src.weights, &tgt.weights, config)?;
    }
    Ok(plan)
}

/// Symmetric binary k-nearest-neighbor graph on the rows of `features`.
pub fn knn_graph(features: &Array2<f64>, k: usize) -> Array2<f64> {
    let n = features.nrows();
    let k = k.min(n.saturating_sub(1));
    let mut graph = Array2::zeros((n, n));
    for i in 0..n {
        let a = features.row(i);
        let mut dist: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let d: f64 = a.iter().zip(features.row(j)).map(|(x, y)| (x - y) * (x - y)).sum();
                (d, j)
            })
            .collect();
        dist.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, j) in dist.iter().take(k) {
            graph[[i, j]] = 1.0;
            graph[[j, i]] = 1.0;
        }
    }
    graph
}

/// Barycentric images `T_i = (1/mu_i) sum_j plan[i][j] f_j`. At a feasible
/// plan `mu_i` equals the row sum, so this is the usual barycentric map.
fn barycentric(plan: &Array2<f64>, mu: &[f64], tgt_features: &Array2<f64>) -> Array2<f64> {
    let mut t = plan.dot(tgt_features);
    for (mut row, m) in t.rows_mut().into_iter().zip(mu) {
        row.mapv_inplace(|v| v / m);
    }
    t
}

fn laplacian_of(graph: &Array2<f64>) -> Array2<f64> {
    let mut lap = -graph.clone();
    for (i, deg) in graph.rows().into_iter().map(|r| r.sum()).enumerate() {
        lap[[i, i]] += deg;
    }
    lap
}

/// `sum_{i,i'} S_ii' |T_i - T_i'|^2 = 2 tr(T' L T)`.
fn laplacian_penalty(t: &Array2<f64>, lap: &Array2<f64>) -> f64 {
    2.0 * (lap.dot(t) * t).sum()
}

fn entropy_term(plan: &Array2<f64>) -> f64 {
    plan.iter().map(|&p| if p > 0.0 { p * (p.ln() - 1.0) } else { 0.0 }).sum()
}

/// Full regularized objective:
/// `<C, plan> + eps sum plan (log plan - 1) + eta * class penalty + lambda * Laplacian penalty`.
pub fn transport_objective(
    plan: &Array2<f64>,
    cost: &Array2<f64>,
    src: &LabeledCloud,
    tgt: &LabeledCloud,
    config: &OtConfig,
) -> f64 {
    let mut value = (plan * cost).sum() + config.epsilon * entropy_term(plan);
    if config.eta > 0.0 {
        value += config.eta * class_penalty(plan, &src.labels);
    }
    if config.lambda > 0.0 {
        let lap = laplacian_of(&knn_graph(&src.features, config.knn));
        let t = barycentric(plan, &src.weights, &tgt.features);
        value += config.lambda * laplacian_penalty(&t, &lap);
    }
    value
}

/// Entropic transport with class and graph-Laplacian penalties.
///
/// `lambda = 0` returns [`group_lasso_ot`] unchanged.
pub fn laplacian_reg_ot(
    cost: &Array2<f64>,
    src: &LabeledCloud,
    tgt: &LabeledCloud,
    config: &OtConfig,
) -> Result<CouplingMatrix> {
    laplacian_reg_ot_traced(cost, src, tgt, config).map(|(plan, _)| plan)
}

/// [`laplacian_reg_ot`] plus the objective value after each
/// conditional-gradient step (the first entry is the starting plan).
///
/// Each step linearizes the smooth penalties at the current plan, solves the
/// entropic problem on the linearized cost, and moves toward that solution
/// with step `2 / (t + 2)`, halved until the objective does not increase.
/// Iteration ends early once no step lowers the objective.
pub fn laplacian_reg_ot_traced(
    cost: &Array2<f64>,
    src: &LabeledCloud,
    tgt: &LabeledCloud,
    config: &OtConfig,
) -> Result<(CouplingMatrix, Vec<f64>)> {
    let start = group_lasso_ot(cost, src, tgt, config)?;
    if config.lambda == 0.0 {
        return Ok((start, Vec::new()));
    }
    if tgt.features.ncols() != src.features.ncols() {
        return Err(Error::DimensionMismatch { expected: src.features.ncols(), got: tgt.features.ncols() });
    }
    let lap = laplacian_of(&knn_graph(&src.features, config.knn));
    let objective = |p: &Array2<f64>| {
        let mut v = (p * cost).sum() + config.epsilon * entropy_term(p);
        if config.eta > 0.0 {
            v += config.eta * class_penalty(p, &src.labels);
        }
        let t = barycentric(p, &src.weights, &tgt.features);
        v + config.lambda * laplacian_penalty(&t, &lap)
    };

    let mut plan = start.plan;
    let mut iterations = start.iterations;
    let mut current = objective(&plan);
    let mut trace = vec![current];
    for t in 0..config.outer_iters {
        // d/dplan of 2 tr(T' L T) with T = D_mu^-1 plan F is 4 D_mu^-1 L T F'
        let bary = barycentric(&plan, &src.weights, &tgt.features);
        let mut grad = lap.dot(&bary).dot(&tgt.features.t()) * 4.0;
        for (mut row, m) in grad.rows_mut().into_iter().zip(&src.weights) {
            row.mapv_inplace(|v| v / m);
        }
        let mut linear = cost + &(grad * config.lambda);
        if config.eta > 0.0 {
            linear = linear + class_penalty_weights(&plan, &src.labels) * config.eta;
        }
        let target = sinkhorn(&linear, &src.weights, &tgt.weights, config)?;
        iterations += target.iterations;

        let mut step = 2.0 / (t as f64 + 2.0);
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &plan + &((&target.plan - &plan) * step);
            let value = objective(&trial);
            if value <= current {
                accepted = Some((trial, value));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, value)) => {
                plan = trial;
                current = value;
                trace.push(value);
            }
            None => break,
        }
    }
    Ok((CouplingMatrix::from_plan(plan, &src.weights, &tgt.weights, config.marginal_tol, iterations), trace))
}

/// Plan mass aggregated by (source class, target class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCoupling {
    pub orders: Vec<usize>,
    #[serde(with = "crate::qipf::rows")]
    pub mass: Array2<f64>,
}

impl MomentCoupling {
    pub fn total(&self) -> f64 {
        self.mass.sum()
    }

    pub fn transpose(&self) -> Self {
        Self { orders: self.orders.clone(), mass: self.mass.t().to_owned() }
    }
}

/// `mass[k][l] = sum over source rows labeled k and target columns labeled l`.
pub fn aggregate_by_class(
    coupling: &CouplingMatrix,
    src_labels: &[usize],
    tgt_labels: &[usize],
    orders: &[usize],
) -> Result<MomentCoupling> {
    let (r, c) = coupling.plan.dim();
    if src_labels.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: src_labels.len() });
    }
    if tgt_labels.len() != c {
        return Err(Error::DimensionMismatch { expected: c, got: tgt_labels.len() });
    }
    let index = |label: usize| orders.iter().position(|&o| o == label).ok_or(Error::UnknownLabel(label));
    let src_idx = src_labels.iter().map(|&l| index(l)).collect::<Result<Vec<_>>>()?;
    let tgt_idx = tgt_labels.iter().map(|&l| index(l)).collect::<Result<Vec<_>>>()?;
    let m = orders.len();
    let mut mass = Array2::zeros((m, m));
    for (row, &k) in coupling.plan.rows().into_iter().zip(&src_idx) {
        for (v, &l) in row.iter().zip(&tgt_idx) {
            mass[[k, l]] += v;
        }
    }
    Ok(MomentCoupling { orders: orders.to_vec(), mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn tight() -> OtConfig {
        OtConfig { eta: 0.0, max_sinkhorn_iters: 100_000, ..OtConfig::default() }
    }

    #[test]
    fn cost_of_unit_pair() {
        let a = LabeledCloud::from_scalars(&[0.0, 1.0], vec![1, 2]).unwrap();
        assert_eq!(cost_matrix(&a, &a).unwrap(), array![[0.0, 1.0], [1.0, 0.0]]);
        let flat = LabeledCloud::from_scalars(&[3.0, 3.0], vec![1, 2]).unwrap();
        assert_eq!(cost_matrix(&flat, &flat).unwrap(), Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn zero_cost_gives_product_plan() {
        let mu = [0.2, 0.3, 0.5];
        let nu = [0.6, 0.4];
        let p = sinkhorn(&Array2::zeros((3, 2)), &mu, &nu, &tight()).unwrap();
        assert!(p.converged);
        for i in 0..3 {
            for j in 0..2 {
                assert_relative_eq!(p.plan[[i, j]], mu[i] * nu[j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn two_by_two_fixed_point() {
        let cost = array![[0.0, 1.0], [1.0, 0.0]];
        let cfg = OtConfig { epsilon: 1.0, ..tight() };
        let p = sinkhorn(&cost, &[0.5, 0.5], &[0.5, 0.5], &cfg).unwrap();
        let e = std::f64::consts::E;
        let a = 0.5 * e / (1.0 + e);
        assert_relative_eq!(p.plan[[0, 0]], a, epsilon = 1e-12);
        assert_relative_eq!(p.plan[[0, 0]], 0.36552, epsilon = 1e-5);
        assert_relative_eq!(p.plan[[0, 0]] / p.plan[[0, 1]], e, epsilon = 1e-9);

        let sharp = sinkhorn(&cost, &[0.5, 0.5], &[0.5, 0.5], &tight()).unwrap();
        for (got, want) in sharp.plan.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let cost = array![[0.0, 1.0, 0.3], [1.0, 0.0, 0.7], [0.2, 0.9, 0.0]];
        let cfg = OtConfig { epsilon: 1e-3, max_sinkhorn_iters: 1, ..tight() };
        let p = sinkhorn(&cost, &[0.1, 0.3, 0.6], &[0.5, 0.3, 0.2], &cfg).unwrap();
        assert!(!p.converged);
        assert!(matches!(p.require_converged(), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn rejects_bad_weights() {
        let cost = Array2::zeros((2, 2));
        assert!(sinkhorn(&cost, &[0.5, 0.6], &[0.5, 0.5], &tight()).is_err());
        assert!(sinkhorn(&cost, &[1.0, 0.0], &[0.5, 0.5], &tight()).is_err());
        assert!(sinkhorn(&cost, &[1.0], &[0.5, 0.5], &tight()).is_err());
        assert!(LabeledCloud::new(array![[0.0]], vec![1], vec![0.9]).is_err());
    }

    #[test]
    fn eta_zero_is_plain_sinkhorn() {
        let src = LabeledCloud::from_scalars(&[0.0, 0.1, 0.9, 1.0], vec![1, 1, 2, 2]).unwrap();
        let tgt = LabeledCloud::from_scalars(&[0.05, 0.2, 0.8, 0.95], vec![1, 1, 2, 2]).unwrap();
        let cost = cost_matrix(&src, &tgt).unwrap();
        let cfg = OtConfig { eta: 0.0, ..OtConfig::default() };
        let a = group_lasso_ot(&cost, &src, &tgt, &cfg).unwrap();
        let b = sinkhorn(&cost, &src.weights, &tgt.weights, &cfg).unwrap();
        assert_eq!(a, b);
        let c = laplacian_reg_ot(&cost, &src, &tgt, &OtConfig { eta: 0.3, lambda: 0.0, ..cfg }).unwrap();
        let d = group_lasso_ot(&cost, &src, &tgt, &OtConfig { eta: 0.3, ..cfg }).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn aggregation_of_product_plan_is_uniform() {
        let m = 3;
        let labels: Vec<usize> = (1..=m).flat_map(|k| [k, k]).collect();
        let n = labels.len();
        let plan = Array2::from_elem((n, n), 1.0 / (n * n) as f64);
        let cm = CouplingMatrix::from_plan(plan, &vec![1.0 / n as f64; n], &vec![1.0 / n as f64; n], 1e-9, 0);
        let orders: Vec<usize> = (1..=m).collect();
        let mc = aggregate_by_class(&cm, &labels, &labels, &orders).unwrap();
        for v in mc.mass.iter() {
            assert_relative_eq!(*v, 1.0 / (m * m) as f64, epsilon = 1e-15);
        }
        assert_relative_eq!(mc.total(), 1.0, epsilon = 1e-12);
        assert_eq!(
            aggregate_by_class(&cm, &labels, &labels, &[1, 2]).unwrap_err(),
            Error::UnknownLabel(3)
        );
    }

    #[test]
    fn identity_plan_aggregates_to_diagonal() {
        let labels = vec![1, 1, 2, 2, 3, 3];
        let plan = Array2::from_diag_elem(6, 1.0 / 6.0);
        let cm = CouplingMatrix::from_plan(plan, &[1.0 / 6.0; 6], &[1.0 / 6.0; 6], 1e-9, 0);
        let mc = aggregate_by_class(&cm, &labels, &labels, &[1, 2, 3]).unwrap();
        assert_eq!(mc.mass, Array2::from_diag_elem(3, 1.0 / 3.0));
    }

    #[test]
    fn knn_graph_is_symmetric_binary() {
        let f = array![[0.0], [0.1], [0.25], [5.0], [5.2]];
        let g = knn_graph(&f, 1);
        assert_eq!(g, g.t());
        assert!(g.iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(g[[3, 4]], 1.0);
        assert_eq!(g[[0, 3]], 0.0);
        assert_eq!(g.diag().sum(), 0.0);
    }
}
