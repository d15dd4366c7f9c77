//! Maximum-entropy finite mixture modeling of positive univariate data.
//!
//! Component densities come from the Pythagorean family: the MaxEnt densities
//! that conserve the arithmetic, geometric and harmonic means. Under a flat
//! prior on the positive reals they are generalized inverse Gaussian (GIG)
//! densities, with gamma and inverse-gamma as the one-sided reductions.
//!
//! Modules, bottom up:
//! - [`special_fn`]: `ln K_ν(x)` for real order, its order derivative, `ln Γ`.
//! - [`pythagorean`]: GIG and sub-family densities, means, entropy.
//! - [`maxent`]: Lagrange-multiplier solver for conserved means under a prior.
//! - [`sampling`]: seeded exact GIG and mixture samplers.
//! - [`data`]: sample ingest and normalized histograms.
//! - [`inference`]: multinomial histogram likelihood, adaptive Metropolis, MAP.
//! - [`model_select`]: stepping-stone evidence and the posterior over `k`.

pub mod data;
pub mod error;
pub mod inference;
pub mod maxent;
pub mod model_select;
pub mod par;
pub mod pythagorean;
pub mod quad;
pub mod sampling;
pub mod special_fn;

pub use error::{Error, Result};
