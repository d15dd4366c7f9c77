//! Bayesian fitting of finite mixtures to histogram data.
//!
//! The likelihood is multinomial in the bin counts with bin probabilities
//! integrated from the mixture density. The prior is a box on the component
//! parameters (uniform in linear or log coordinates) times a symmetric
//! Dirichlet on the weights. The posterior is explored with adaptive
//! random-walk Metropolis and the MAP estimate is polished by a
//! derivative-free ascent.

mod init;
mod likelihood;
mod map;
mod mcmc;
mod model;
mod prior;

pub use likelihood::{bin_log_probabilities, log_likelihood, multinomial_log_likelihood};
pub use map::{map_estimate, polish, POLISH_TOL};
pub use init::em_fit;
pub use mcmc::{run_mcmc, Chain, ChainConfig};
pub use model::{mixture_log_pdf, MixtureModel, WEIGHT_SUM_TOL};
pub use prior::{log_posterior, Bound, PriorBox};

pub(crate) use mcmc::{adaptive_rwm, evaluate, Proposal, RwmSettings};
pub(crate) use prior::StateMap;
