//! Reference dependence measures for paired scalar observations.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::RngSeed;
use crate::error::{Error, Result};
use crate::ot::{sinkhorn, OtConfig};

/// Default histogram resolution for [`mutual_information`].
pub const MI_BINS: usize = 16;

/// Paired observations `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSeries {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        if x.len() < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 pairs, got {}", x.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("paired series must be finite".into()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn swapped(&self) -> Self {
        Self { x: self.y.clone(), y: self.x.clone() }
    }
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    let cx = centered(x);
    let cy = centered(y);
    let sxx: f64 = cx.iter().map(|v| v * v).sum();
    let syy: f64 = cy.iter().map(|v| v * v).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateData("correlation of a constant series".into()));
    }
    let sxy: f64 = cx.iter().zip(&cy).map(|(a, b)| a * b).sum();
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn pearson(p: &PairedSeries) -> Result<f64> {
    correlation(&p.x, &p.y)
}

/// Pearson correlation of midranks.
pub fn spearman(p: &PairedSeries) -> Result<f64> {
    correlation(&average_ranks(&p.x), &average_ranks(&p.y))
}

fn double_centered_distances(v: &[f64]) -> Array2<f64> {
    let n = v.len();
    let mut d = Array2::from_shape_fn((n, n), |(i, j)| (v[i] - v[j]).abs());
    let row_means: Vec<f64> = d.rows().into_iter().map(|r| r.sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for ((i, j), slot) in d.indexed_iter_mut() {
        // distance matrices are symmetric, so column means equal row means
        *slot += grand - row_means[i] - row_means[j];
    }
    d
}

/// Sample distance correlation from double-centered distance matrices.
pub fn distance_correlation(p: &PairedSeries) -> Result<f64> {
    if p.len() < 4 {
        return Err(Error::InvalidInput("distance correlation needs at least 4 pairs".into()));
    }
    let a = double_centered_distances(&p.x);
    let b = double_centered_distances(&p.y);
    let n2 = (p.len() * p.len()) as f64;
    let dcov = (&a * &b).sum() / n2;
    let vx = (&a * &a).sum() / n2;
    let vy = (&b * &b).sum() / n2;
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::DegenerateData("distance variance is zero".into()));
    }
    Ok((dcov.max(0.0) / (vx * vy).sqrt()).sqrt().min(1.0))
}

fn bin_indices(v: &[f64], bins: usize) -> Result<Vec<usize>> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Err(Error::DegenerateData("histogram of a constant series".into()));
    }
    let scale = bins as f64 / (hi - lo);
    Ok(v.iter().map(|&x| (((x - lo) * scale) as usize).min(bins - 1)).collect())
}

/// Plug-in mutual information (nats) from an equal-width `bins × bins`
/// histogram over each variable's range.
pub fn mutual_information(p: &PairedSeries, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidInput("need at least 2 bins".into()));
    }
    if p.len() < bins {
        return Err(Error::InvalidInput(format!("need at least {bins} pairs for {bins} bins")));
    }
    let bx = bin_indices(&p.x, bins)?;
    let by = bin_indices(&p.y, bins)?;
    let mut joint = vec![0usize; bins * bins];
    let mut mx = vec![0usize; bins];
    let mut my = vec![0usize; bins];
    for (&i, &j) in bx.iter().zip(&by) {
        joint[i * bins + j] += 1;
        mx[i] += 1;
        my[j] += 1;
    }
    let n = p.len() as f64;
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy * n * n / (mx[i] as f64 * my[j] as f64)).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

fn transport_cost_between(a: &[(f64, f64)], b: &[(f64, f64)], ot: &OtConfig) -> Result<f64> {
    // squared distances in the unit square, scaled by the largest possible value
    let cost = Array2::from_shape_fn((a.len(), b.len()), |(i, j)| {
        let (du, dv) = (a[i].0 - b[j].0, a[i].1 - b[j].1);
        (du * du + dv * dv) / 2.0
    });
    let w = vec![1.0 / a.len() as f64; a.len()];
    let v = vec![1.0 / b.len() as f64; b.len()];
    let cfg = OtConfig { eta: 0.0, lambda: 0.0, ..*ot };
    let plan = sinkhorn(&cost, &w, &v, &cfg)?;
    Ok(plan.transport_cost(&cost))
}

/// Simplified copula optimal-transport coefficient.
///
/// The empirical copula sample is transported to the comonotone diagonal and
/// the cost compared with that of a stratified independence sample:
/// `1 - (D_obs - D_0) / (D_ind - D_0)`, clamped to [0, 1], where `D_0` is the
/// entropic cost of the diagonal to itself. Subtracting `D_0` removes the
/// entropic bias so a comonotone pair scores 1.
pub fn copula_ot_dependence(p: &PairedSeries, ot: &OtConfig, seed: RngSeed) -> Result<f64> {
    let n = p.len();
    if n < 10 {
        return Err(Error::InvalidInput("copula-OT needs at least 10 pairs".into()));
    }
    let rx = average_ranks(&p.x);
    let ry = average_ranks(&p.y);
    if rx.iter().all(|&r| r == rx[0]) || ry.iter().all(|&r| r == ry[0]) {
        return Err(Error::DegenerateData("copula of a constant series".into()));
    }
    let nf = n as f64;
    let copula: Vec<(f64, f64)> = rx.iter().zip(&ry).map(|(a, b)| (a / nf, b / nf)).collect();
    let diagonal: Vec<(f64, f64)> = (1..=n).map(|i| (i as f64 / nf, i as f64 / nf)).collect();

    // Latin-hypercube sample of the independence copula
    let mut rng = seed.rng();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let independent: Vec<(f64, f64)> = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| ((i as f64 + rng.random::<f64>()) / nf, (j as f64 + rng.random::<f64>()) / nf))
        .collect();

    let d0 = transport_cost_between(&diagonal, &diagonal, ot)?;
    let d_obs = transport_cost_between(&copula, &diagonal, ot)?;
    let d_ind = transport_cost_between(&independent, &diagonal, ot)?;
    if d_ind <= d0 {
        return Ok(0.0);
    }
    Ok((1.0 - (d_obs - d0) / (d_ind - d0)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ps(x: &[f64], y: &[f64]) -> PairedSeries {
        PairedSeries::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn pearson_cases() {
        assert_relative_eq!(pearson(&ps(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0])).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(pearson(&ps(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0])).unwrap(), -1.0, epsilon = 1e-15);
        // deviations (-1.5, -0.5, 0.5, 1.5) against (1, -1, 1, -1): cross sum -2, sxx 5, syy 4
        let r = pearson(&ps(&[1.0, 2.0, 3.0, 4.0], &[1.0, -1.0, 1.0, -1.0])).unwrap();
        assert_relative_eq!(r, -2.0 / (5f64.sqrt() * 2.0), epsilon = 1e-15);
        assert!(matches!(pearson(&ps(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0])), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn spearman_cases() {
        assert_relative_eq!(spearman(&ps(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0])).unwrap(), 0.5, epsilon = 1e-15);
        let x = [0.3, -1.0, 2.0, 5.0, 0.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        assert_relative_eq!(spearman(&ps(&x, &y)).unwrap(), 1.0, epsilon = 1e-15);
        let y: Vec<f64> = x.iter().map(|v| -v * v * v).collect();
        assert_relative_eq!(spearman(&ps(&x, &y)).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn midranks() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn dcor_affine_invariance() {
        let x = [0.1, 0.5, -0.3, 2.0, 1.1, 0.7];
        assert_relative_eq!(distance_correlation(&ps(&x, &x)).unwrap(), 1.0, epsilon = 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v + 2.0).collect();
        assert_relative_eq!(distance_correlation(&ps(&x, &y)).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mi_of_identity_on_even_bins() {
        // 16 distinct levels, 10 copies each; every level lands in its own bin
        let x: Vec<f64> = (0..160).map(|i| (i % 16) as f64).collect();
        let mi = mutual_information(&ps(&x, &x), MI_BINS).unwrap();
        assert_relative_eq!(mi, 16f64.ln(), epsilon = 1e-9);
        let c = vec![2.0; 20];
        let y: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(matches!(mutual_information(&ps(&c, &y), MI_BINS), Err(Error::DegenerateData(_))));
        assert!(mutual_information(&ps(&y[..10], &y[..10]), MI_BINS).is_err());
    }

    #[test]
    fn copula_ot_monotone_extremes() {
        let x: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin() + i as f64 * 0.01).collect();
        let up: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        let cfg = OtConfig::default();
        let c_up = copula_ot_dependence(&ps(&x, &up), &cfg, RngSeed(1)).unwrap();
        let c_down = copula_ot_dependence(&ps(&x, &down), &cfg, RngSeed(1)).unwrap();
        assert!(c_up >= 0.95, "{c_up}");
        assert_eq!(c_down, 0.0);
    }
}
