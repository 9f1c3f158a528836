//! Sample containers and kernel configuration.

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An n×d matrix of observations of one random variable.
///
/// Construction enforces n ≥ 2, d ≥ 1, finite entries and at least two
/// distinct rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Array2<f64>,
}

impl SampleSet {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, d) = points.dim();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "a sample set needs at least 2 observations, got {n}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidInput("sample dimension must be at least 1".into()));
        }
        if let Some((idx, _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at row {}, column {}",
                idx.0, idx.1
            )));
        }
        let first = points.row(0);
        if points.rows().into_iter().all(|r| r == first) {
            return Err(Error::DegenerateData("all observations are identical".into()));
        }
        Ok(Self { points })
    }

    /// One-dimensional sample set from a slice of scalars.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        let points = Array2::from_shape_vec((values.len(), 1), values.to_vec())
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(points)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(points)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn into_points(self) -> Array2<f64> {
        self.points
    }

    /// Per-coordinate sample standard deviations (n − 1 denominator).
    pub fn coordinate_std(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.points
            .axis_iter(Axis(1))
            .map(|col| {
                let mean = col.sum() / n;
                let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
                (ss / (n - 1.0)).sqrt()
            })
            .collect()
    }

    /// Per-coordinate minimum and maximum.
    pub fn coordinate_range(&self) -> Vec<(f64, f64)> {
        self.points
            .axis_iter(Axis(1))
            .map(|col| {
                col.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaRule {
    Manual,
    Silverman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianMethod {
    Analytic,
    FiniteDifference,
}

/// Gaussian kernel settings shared by the potential and moment routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Bandwidth, used when `sigma_rule` is [`SigmaRule::Manual`].
    pub sigma: f64,
    pub sigma_rule: SigmaRule,
    /// Finite-difference step as a fraction of sigma.
    pub fd_step_fraction: f64,
    pub laplacian_method: LaplacianMethod,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            sigma_rule: SigmaRule::Silverman,
            fd_step_fraction: 0.01,
            laplacian_method: LaplacianMethod::Analytic,
        }
    }
}

impl KernelConfig {
    pub fn manual(sigma: f64) -> Self {
        Self { sigma, sigma_rule: SigmaRule::Manual, ..Self::default() }
    }

    pub fn with_laplacian(mut self, method: LaplacianMethod) -> Self {
        self.laplacian_method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_rule == SigmaRule::Manual && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !(self.fd_step_fraction > 0.0 && self.fd_step_fraction <= 0.5) {
            return Err(Error::InvalidConfig(format!(
                "fd_step_fraction must lie in (0, 0.5], got {}",
                self.fd_step_fraction
            )));
        }
        Ok(())
    }

    /// The bandwidth to use for `samples`.
    pub fn resolve_sigma(&self, samples: &SampleSet) -> Result<f64> {
        self.validate()?;
        match self.sigma_rule {
            SigmaRule::Manual => Ok(self.sigma),
            SigmaRule::Silverman => silverman_bandwidth(samples),
        }
    }
}

/// Rule-of-thumb bandwidth `1.06 · s · n^(-1/5)`, with `s` the mean of the
/// per-coordinate sample standard deviations.
pub fn silverman_bandwidth(samples: &SampleSet) -> Result<f64> {
    let stds = samples.coordinate_std();
    if stds.iter().all(|&s| s == 0.0) {
        return Err(Error::DegenerateData("every coordinate is constant".into()));
    }
    let s = stds.iter().sum::<f64>() / stds.len() as f64;
    Ok(1.06 * s * (samples.n() as f64).powf(-0.2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn silverman_unit_std() {
        // 100 points with sample std exactly 1: ±a alternating around zero
        let a = (99.0f64 / 100.0).sqrt();
        let vals: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { a } else { -a }).collect();
        let s = SampleSet::from_column(&vals).unwrap();
        assert_relative_eq!(s.coordinate_std()[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(silverman_bandwidth(&s).unwrap(), 0.42199, epsilon = 1e-5);
        assert_relative_eq!(
            silverman_bandwidth(&s).unwrap(),
            1.06 * 100f64.powf(-0.2),
            epsilon = 1e-14
        );
    }

    #[test]
    fn rejects_constant_and_tiny_sets() {
        assert!(matches!(
            SampleSet::from_column(&[2.0, 2.0, 2.0]),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(SampleSet::from_column(&[1.0]), Err(Error::InvalidInput(_))));
        assert!(SampleSet::from_column(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn silverman_needs_spread_in_some_coordinate() {
        // second coordinate constant still gives a positive bandwidth
        let s = SampleSet::new(array![[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]]).unwrap();
        let h = silverman_bandwidth(&s).unwrap();
        assert!(h > 0.0);
        assert_relative_eq!(h, 1.06 * 0.5 * 3f64.powf(-0.2), epsilon = 1e-14);
    }

    #[test]
    fn manual_sigma_validation() {
        assert!(KernelConfig::manual(0.0).validate().is_err());
        assert!(KernelConfig::manual(-1.0).validate().is_err());
        let mut cfg = KernelConfig::manual(1.0);
        cfg.fd_step_fraction = 0.6;
        assert!(cfg.validate().is_err());
    }
}
