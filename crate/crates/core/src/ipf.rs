//! Information potential: the Gaussian kernel average of a sample set, and
//! its spatial derivatives.
//!
//! The kernel is the unnormalized Gaussian `exp(-|x - y|^2 / (2 sigma^2))`,
//! so the potential is 1 at a point coinciding with every sample and lies in
//! (0, 1] everywhere.

use crate::error::{Error, Result};
use crate::sample::{KernelConfig, LaplacianMethod, SampleSet};

/// Potential value, gradient and Laplacian at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialAt {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub laplacian: f64,
}

fn check_dim(samples: &SampleSet, point: &[f64]) -> Result<()> {
    if point.len() != samples.dim() {
        return Err(Error::DimensionMismatch { expected: samples.dim(), got: point.len() });
    }
    if point.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("evaluation point has a non-finite coordinate".into()));
    }
    Ok(())
}

fn potential(samples: &SampleSet, sigma: f64, point: &[f64]) -> f64 {
    let inv = 1.0 / (2.0 * sigma * sigma);
    let sum: f64 = samples
        .points()
        .rows()
        .into_iter()
        .map(|row| {
            let r2: f64 = row.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum();
            (-r2 * inv).exp()
        })
        .sum();
    sum / samples.n() as f64
}

/// `psi(x) = (1/n) sum_t G_sigma(x_t, x)`.
pub fn ipf_evaluate(samples: &SampleSet, config: &KernelConfig, point: &[f64]) -> Result<f64> {
    check_dim(samples, point)?;
    let sigma = config.resolve_sigma(samples)?;
    Ok(potential(samples, sigma, point))
}

/// Closed-form gradient and Laplacian of the potential.
pub fn ipf_grad_laplacian(
    samples: &SampleSet,
    config: &KernelConfig,
    point: &[f64],
) -> Result<(Vec<f64>, f64)> {
    check_dim(samples, point)?;
    let sigma = config.resolve_sigma(samples)?;
    let p = analytic_at(samples, sigma, point);
    Ok((p.gradient, p.laplacian))
}

/// Potential with derivatives, using the configured Laplacian method.
pub(crate) fn potential_at(
    samples: &SampleSet,
    sigma: f64,
    method: LaplacianMethod,
    fd_step_fraction: f64,
    point: &[f64],
) -> PotentialAt {
    match method {
        LaplacianMethod::Analytic => analytic_at(samples, sigma, point),
        LaplacianMethod::FiniteDifference => finite_difference_at(samples, sigma, fd_step_fraction * sigma, point),
    }
}

pub(crate) fn analytic_at(samples: &SampleSet, sigma: f64, point: &[f64]) -> PotentialAt {
    let d = point.len();
    let s2 = sigma * sigma;
    let inv = 1.0 / (2.0 * s2);
    let mut value = 0.0;
    let mut gradient = vec![0.0; d];
    let mut laplacian = 0.0;
    let mut diff = vec![0.0; d];
    for row in samples.points().rows() {
        let mut r2 = 0.0;
        for ((slot, a), b) in diff.iter_mut().zip(row.iter()).zip(point) {
            *slot = a - b;
            r2 += *slot * *slot;
        }
        let g = (-r2 * inv).exp();
        value += g;
        for (acc, dv) in gradient.iter_mut().zip(&diff) {
            *acc += g * dv;
        }
        laplacian += g * (r2 / (s2 * s2) - d as f64 / s2);
    }
    let n = samples.n() as f64;
    for v in &mut gradient {
        *v /= n * s2;
    }
    PotentialAt { value: value / n, gradient, laplacian: laplacian / n }
}

/// Central differences with step `h` along each coordinate.
pub(crate) fn finite_difference_at(samples: &SampleSet, sigma: f64, h: f64, point: &[f64]) -> PotentialAt {
    let value = potential(samples, sigma, point);
    let mut gradient = Vec::with_capacity(point.len());
    let mut laplacian = 0.0;
    let mut probe = point.to_vec();
    for j in 0..point.len() {
        probe[j] = point[j] + h;
        let fwd = potential(samples, sigma, &probe);
        probe[j] = point[j] - h;
        let bwd = potential(samples, sigma, &probe);
        probe[j] = point[j];
        gradient.push((fwd - bwd) / (2.0 * h));
        laplacian += (fwd - 2.0 * value + bwd) / (h * h);
    }
    PotentialAt { value, gradient, laplacian }
}
