//! Seeded synthetic data.
//!
//! All randomness comes from ChaCha8 seeded through `seed_from_u64`, which is
//! specified bit-for-bit by `rand_core` and independent of platform and
//! pointer width.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::baselines::PairedSeries;
use crate::error::{Error, Result};
use crate::sample::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// A derived seed for the `index`-th independent sub-stream (SplitMix64
    /// finalizer over seed and index).
    pub fn child(self, index: u64) -> RngSeed {
        let mut z = self.0 ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

/// Two interleaved half circles.
///
/// One angle `theta_i ~ U[0, pi]` is drawn per index and shared by both moons,
/// so row `i` of each moon comes from the same angle:
/// moon A is `(cos theta, sin theta)`, moon B is `(1 - cos theta, 0.5 - sin theta)`.
/// Independent `N(0, noise_sd^2)` noise is then added to every coordinate,
/// first for moon A, then for moon B.
pub fn two_moons(n_per_moon: usize, noise_sd: f64, seed: RngSeed) -> Result<(SampleSet, SampleSet)> {
    if n_per_moon < 2 {
        return Err(Error::InvalidInput(format!("n_per_moon must be at least 2, got {n_per_moon}")));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidInput(format!("noise_sd must be non-negative, got {noise_sd}")));
    }
    let mut rng = seed.rng();
    let theta: Vec<f64> = (0..n_per_moon).map(|_| rng.random::<f64>() * std::f64::consts::PI).collect();
    let mut a = Array2::from_shape_fn((n_per_moon, 2), |(i, j)| if j == 0 { theta[i].cos() } else { theta[i].sin() });
    let mut b = Array2::from_shape_fn((n_per_moon, 2), |(i, j)| {
        if j == 0 {
            1.0 - theta[i].cos()
        } else {
            0.5 - theta[i].sin()
        }
    });
    if noise_sd > 0.0 {
        let normal = Normal::new(0.0, noise_sd).map_err(|e| Error::InvalidInput(e.to_string()))?;
        a.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
        b.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
    }
    Ok((SampleSet::new(a)?, SampleSet::new(b)?))
}

/// Rotate two-dimensional rows counter-clockwise by `angle` radians.
pub fn rotate2d(points: &Array2<f64>, angle: f64) -> Result<Array2<f64>> {
    if points.ncols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: points.ncols() });
    }
    let (s, c) = angle.sin_cos();
    Ok(Array2::from_shape_fn(points.dim(), |(i, j)| {
        let (x, y) = (points[[i, 0]], points[[i, 1]]);
        if j == 0 {
            c * x - s * y
        } else {
            s * x + c * y
        }
    }))
}

/// Dependence family indexed by `a` in [0, 1].
///
/// Per observation draw `z, e_x, e_y ~ U[0, 1]` (in that order), then
/// `x = z` if `z < a` else `e_x`, and `y = z` if `z < a + 0.25` else `e_y`.
/// `a = 0` makes `x` independent of `y`; `a = 1` makes them equal.
pub fn equitability_pair(n: usize, a: f64, seed: RngSeed) -> Result<PairedSeries> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("n must be at least 3, got {n}")));
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidInput(format!("a must lie in [0, 1], got {a}")));
    }
    let mut rng = seed.rng();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = rng.random();
        let ex: f64 = rng.random();
        let ey: f64 = rng.random();
        x.push(if z < a { z } else { ex });
        y.push(if z < a + 0.25 { z } else { ey });
    }
    PairedSeries::new(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MonotoneTransform {
    /// `alpha * v + beta`, `alpha > 0`.
    Affine { alpha: f64, beta: f64 },
    Exp,
    Cube,
}

/// Apply a strictly increasing map elementwise.
pub fn monotone_transform(values: &[f64], kind: MonotoneTransform) -> Result<Vec<f64>> {
    if let MonotoneTransform::Affine { alpha, .. } = kind {
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!("affine slope must be positive, got {alpha}")));
        }
    }
    Ok(values
        .iter()
        .map(|&v| match kind {
            MonotoneTransform::Affine { alpha, beta } => alpha * v + beta,
            MonotoneTransform::Exp => v.exp(),
            MonotoneTransform::Cube => v * v * v,
        })
        .collect())
}
