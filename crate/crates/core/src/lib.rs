//! Dependence between two random variables measured through their kernel
//! uncertainty moments.
//!
//! Each variable's empirical density is estimated with a Gaussian kernel
//! average (the information potential), normalized through a Schrödinger-type
//! Laplacian ratio, and split into an ordered set of Hermite moments. The two
//! moment sets are coupled with entropic optimal transport and the dependence
//! coefficient is read off the diagonal structure of the class-level coupling.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`sample`] | [`SampleSet`], [`KernelConfig`], bandwidth rule |
//! | [`ipf`] | kernel potential, gradient and Laplacian |
//! | [`hermite`] | normalized Hermite functions |
//! | [`qipf`] | moment fields and their normalization |
//! | [`ot`] | labeled clouds, Sinkhorn, class and Laplacian regularized transport |
//! | [`dependence`] | the end-to-end dependence pipeline and score |
//! | [`baselines`] | Pearson, Spearman, distance correlation, histogram MI, copula-OT |
//! | [`datagen`] | seeded synthetic generators |
//! | [`experiment`] | two-moon rotation and equitability sweeps |

pub mod baselines;
pub mod datagen;
pub mod dependence;
pub mod error;
pub mod experiment;
pub mod hermite;
pub mod ipf;
pub mod ot;
pub mod qipf;
pub mod sample;

pub use dependence::{qipf_ot_dependence, DependenceConfig, DependenceReport};
pub use error::{Error, Result};
pub use qipf::{normalize_moment_field, qipf_moments, MomentField};
pub use sample::{KernelConfig, LaplacianMethod, SampleSet, SigmaRule};
