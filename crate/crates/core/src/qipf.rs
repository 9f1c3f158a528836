//! Uncertainty moments of the information potential.
//!
//! For an order `k >= 1` the moment wavefunction is the Hermite function
//! composed with the potential, `psi_k(x) = h_k(u(x))` with `u = psi / c`,
//! and the moment is the shifted Laplacian ratio
//!
//! ```text
//! H_k(x) = E_k + (sigma^2 / 2) * lap(psi_k)(x) / psi_k(x),
//! lap(psi_k) = h_k''(u) |grad u|^2 + h_k'(u) lap(u),
//! ```
//!
//! where `E_k` is minus the minimum of the ratio over the evaluation points,
//! so every moment is non-negative and touches zero. Order 0 is the plain
//! potential ratio `(sigma^2 / 2) lap(psi) / psi`, which for a single
//! Gaussian bump is the harmonic well `|x - mu|^2 / (2 sigma^2)` shifted by
//! `E_0 = d / 2`.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{hermite_with_derivatives, MAX_ORDER};
use crate::ipf::potential_at;
use crate::sample::{KernelConfig, SampleSet};

/// Replacement magnitude for Hermite values that are numerically zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-10;

/// Number of grid points used for one-dimensional evaluation by default.
pub const DEFAULT_GRID_POINTS: usize = 128;

/// How the potential is mapped onto the Hermite argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HermiteArgument {
    /// `u = psi`.
    #[default]
    Potential,
    /// `u = psi / max(psi)`, the maximum taken over the evaluation points.
    PeakScaled,
}

/// Evaluated moments `H_k` at a set of evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentField {
    /// G×d evaluation points.
    #[serde(with = "crate::qipf::rows")]
    pub eval_points: Array2<f64>,
    /// Moment orders, ascending.
    pub orders: Vec<usize>,
    /// m×G moment values, one row per order.
    #[serde(with = "crate::qipf::rows")]
    pub values: Array2<f64>,
    /// Per-order shift `E_k`.
    pub lower_bounds: Vec<f64>,
    /// Potential at each evaluation point.
    pub ipf_values: Vec<f64>,
    /// Bandwidth that produced the field.
    pub sigma: f64,
}

impl MomentField {
    pub fn m(&self) -> usize {
        self.orders.len()
    }

    pub fn n_eval(&self) -> usize {
        self.eval_points.nrows()
    }
}

/// Serialize a matrix as a list of rows.
pub(crate) mod rows {
    use ndarray::Array2;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let nrows = if ncols == 0 { 0 } else { flat.len() / ncols };
        Array2::from_shape_vec((nrows, ncols), flat).map_err(serde::de::Error::custom)
    }
}

/// Default evaluation points: a uniform grid of [`DEFAULT_GRID_POINTS`] over
/// `[min - 3 sigma, max + 3 sigma]` in one dimension, the samples themselves
/// otherwise.
pub fn default_eval_points(samples: &SampleSet, sigma: f64) -> Array2<f64> {
    if samples.dim() == 1 {
        let (lo, hi) = samples.coordinate_range()[0];
        uniform_grid(lo - 3.0 * sigma, hi + 3.0 * sigma, DEFAULT_GRID_POINTS)
    } else {
        samples.points().clone()
    }
}

/// `count` equally spaced points on `[lo, hi]` as a column.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Array2<f64> {
    let step = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
    Array2::from_shape_fn((count, 1), |(i, _)| if i + 1 == count { hi } else { lo + step * i as f64 })
}

fn clamp_denominator(v: f64) -> f64 {
    if v.abs() < DENOMINATOR_FLOOR {
        if v < 0.0 {
            -DENOMINATOR_FLOOR
        } else {
            DENOMINATOR_FLOOR
        }
    } else {
        v
    }
}

fn validate_orders(orders: &[usize]) -> Result<()> {
    if orders.is_empty() {
        return Err(Error::InvalidInput("at least one moment order is required".into()));
    }
    if let Some(&k) = orders.iter().find(|&&k| k > MAX_ORDER) {
        return Err(Error::OrderTooLarge(k));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("moment orders must be distinct and ascending".into()));
    }
    Ok(())
}

/// Moments with the default Hermite argument ([`HermiteArgument::Potential`]).
pub fn qipf_moments(
    samples: &SampleSet,
    config: &KernelConfig,
    orders: &[usize],
    eval_points: &Array2<f64>,
) -> Result<MomentField> {
    qipf_moments_with(samples, config, orders, eval_points, HermiteArgument::default())
}

pub fn qipf_moments_with(
    samples: &SampleSet,
    config: &KernelConfig,
    orders: &[usize],
    eval_points: &Array2<f64>,
    argument: HermiteArgument,
) -> Result<MomentField> {
    validate_orders(orders)?;
    if eval_points.nrows() == 0 {
        return Err(Error::InvalidInput("no evaluation points".into()));
    }
    if eval_points.ncols() != samples.dim() {
        return Err(Error::DimensionMismatch { expected: samples.dim(), got: eval_points.ncols() });
    }
    if eval_points.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("evaluation points must be finite".into()));
    }
    let sigma = config.resolve_sigma(samples)?;

    let potentials: Vec<_> = (0..eval_points.nrows())
        .into_par_iter()
        .map(|i| {
            let point = eval_points.row(i).to_vec();
            potential_at(samples, sigma, config.laplacian_method, config.fd_step_fraction, &point)
        })
        .collect();

    let scale = match argument {
        HermiteArgument::Potential => 1.0,
        HermiteArgument::PeakScaled => potentials.iter().map(|p| p.value).fold(f64::MIN_POSITIVE, f64::max),
    };
    let half_s2 = 0.5 * sigma * sigma;
    let g = potentials.len();
    let mut values = Array2::zeros((orders.len(), g));
    let mut lower_bounds = Vec::with_capacity(orders.len());

    for (row, &k) in orders.iter().enumerate() {
        let mut ratio = Vec::with_capacity(g);
        for p in &potentials {
            let r = if k == 0 {
                half_s2 * p.laplacian / p.value.max(f64::MIN_POSITIVE)
            } else {
                let u = p.value / scale;
                let grad2: f64 = p.gradient.iter().map(|v| v * v).sum::<f64>() / (scale * scale);
                let lap_u = p.laplacian / scale;
                let h = hermite_with_derivatives(k, u)?;
                half_s2 * (h.second * grad2 + h.first * lap_u) / clamp_denominator(h.value)
            };
            ratio.push(r);
        }
        let min = ratio.iter().copied().fold(f64::INFINITY, f64::min);
        let shift = -min;
        for (slot, r) in values.row_mut(row).iter_mut().zip(&ratio) {
            *slot = shift + r;
        }
        lower_bounds.push(shift);
    }

    Ok(MomentField {
        eval_points: eval_points.clone(),
        orders: orders.to_vec(),
        values,
        lower_bounds,
        ipf_values: potentials.iter().map(|p| p.value).collect(),
        sigma,
    })
}

/// Global min-max rescaling of the moment values into [0, 1].
pub fn normalize_moment_field(field: &MomentField) -> MomentField {
    let lo = field.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = field.clone();
    if hi > lo {
        let span = hi - lo;
        out.values.mapv_inplace(|v| (v - lo) / span);
    } else {
        out.values.fill(0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn lone_bump() -> SampleSet {
        // the partner sits 400 sigma away and contributes exactly zero near the bump
        SampleSet::from_column(&[0.5, 400.5]).unwrap()
    }

    #[test]
    fn order_zero_is_harmonic() {
        let grid = uniform_grid(0.5 - 3.0, 0.5 + 3.0, 61);
        let f = qipf_moments(&lone_bump(), &KernelConfig::manual(1.0), &[0], &grid).unwrap();
        assert!((f.lower_bounds[0] - 0.5).abs() < 1e-12);
        for (e, h) in grid.column(0).iter().zip(f.values.row(0)) {
            let expect = (e - 0.5) * (e - 0.5) / 2.0;
            assert!((h - expect).abs() < 1e-9, "{e}: {h} vs {expect}");
        }
    }

    #[test]
    fn moments_touch_zero() {
        let s = SampleSet::from_column(&[0.1, 0.4, 0.45, 1.2, 2.0, 2.2]).unwrap();
        let cfg = KernelConfig::manual(0.3);
        let grid = default_eval_points(&s, 0.3);
        let f = qipf_moments(&s, &cfg, &(1..=12).collect::<Vec<_>>(), &grid).unwrap();
        for row in f.values.rows() {
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(min, 0.0);
            assert!(row.iter().all(|v| *v >= 0.0));
        }
        assert!(f.ipf_values.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn default_grid_shape() {
        let s = SampleSet::from_column(&[0.0, 1.0, 3.0]).unwrap();
        let g = default_eval_points(&s, 0.5);
        assert_eq!(g.dim(), (DEFAULT_GRID_POINTS, 1));
        assert_eq!(g[[0, 0]], -1.5);
        assert_eq!(g[[DEFAULT_GRID_POINTS - 1, 0]], 4.5);
        let s2 = SampleSet::new(array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]]).unwrap();
        assert_eq!(default_eval_points(&s2, 0.5), s2.points().clone());
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = SampleSet::from_column(&[0.0, 1.0]).unwrap();
        let cfg = KernelConfig::manual(1.0);
        let grid = uniform_grid(0.0, 1.0, 5);
        assert!(matches!(
            qipf_moments(&s, &cfg, &[1, 65], &grid),
            Err(Error::OrderTooLarge(65))
        ));
        assert!(qipf_moments(&s, &cfg, &[2, 1], &grid).is_err());
        assert!(qipf_moments(&s, &cfg, &[], &grid).is_err());
        let grid2 = Array2::zeros((3, 2));
        assert!(matches!(
            qipf_moments(&s, &cfg, &[1], &grid2),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn normalization_cases() {
        let s = SampleSet::from_column(&[0.0, 1.0]).unwrap();
        let mut f = qipf_moments(&s, &KernelConfig::manual(1.0), &[1, 2], &uniform_grid(0.0, 1.0, 3)).unwrap();
        f.values = array![[0.0, 2.5, 5.0], [1.0, 0.0, 4.0]];
        let n = normalize_moment_field(&f);
        assert_eq!(n.values, array![[0.0, 0.5, 1.0], [0.2, 0.0, 0.8]]);
        assert_eq!(n.lower_bounds, f.lower_bounds);
        assert_eq!(normalize_moment_field(&n), n);
        f.values.fill(3.0);
        assert!(normalize_moment_field(&f).values.iter().all(|&v| v == 0.0));
    }
}
