//! Normalized Hermite functions
//! `h_k(u) = (2^k k! sqrt(pi))^(-1/2) H_k(u) exp(-u^2/2)`.
//!
//! Values come from the three-term recurrence on the normalized functions
//! themselves, seeded with `h_0 = pi^(-1/4) exp(-u^2/2)`, so the Gaussian
//! envelope and the normalization are carried through every step and nothing
//! overflows for moderate orders.

use crate::error::{Error, Result};

/// Highest supported order.
pub const MAX_ORDER: usize = 64;

/// A Hermite function with its first two derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteValue {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// `(h_k(u), h_{k-1}(u))`, with `h_{-1} = 0`.
fn recurrence(k: usize, u: f64) -> (f64, f64) {
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * u * u).exp();
    if k == 0 {
        return (h0, 0.0);
    }
    let mut prev = h0;
    let mut cur = std::f64::consts::SQRT_2 * u * h0;
    for j in 1..k {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * u * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

pub fn hermite_function(k: usize, u: f64) -> Result<f64> {
    if k > MAX_ORDER {
        return Err(Error::OrderTooLarge(k));
    }
    Ok(recurrence(k, u).0)
}

/// `h_k`, `h_k' = sqrt(2k) h_{k-1} - u h_k` and `h_k'' = (u^2 - 2k - 1) h_k`.
pub fn hermite_with_derivatives(k: usize, u: f64) -> Result<HermiteValue> {
    if k > MAX_ORDER {
        return Err(Error::OrderTooLarge(k));
    }
    let (value, prev) = recurrence(k, u);
    let kf = k as f64;
    Ok(HermiteValue {
        value,
        first: (2.0 * kf).sqrt() * prev - u * value,
        second: (u * u - 2.0 * kf - 1.0) * value,
    })
}
