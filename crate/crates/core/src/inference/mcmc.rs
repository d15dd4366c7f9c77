use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Histogram;
use crate::error::{Error, Result};
use crate::par;
use crate::sampling::RngSeed;

use super::likelihood::log_likelihood_or_exclude;
use super::model::MixtureModel;
use super::init::starting_points;
use super::prior::{Bound, PriorBox, StateMap};

/// Chain settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    /// Total iterations per chain, burn-in included.
    pub iterations: usize,
    /// Fraction of `iterations` spent adapting and then discarded.
    pub burn_in: f64,
    pub thin: usize,
    /// Independent chains, pooled in the output.
    pub chains: usize,
    /// Prior draws screened for a starting point.
    pub init_draws: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 50_000,
            burn_in: 0.2,
            thin: 5,
            chains: 2,
            init_draws: 1000,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::validation(format!("burn_in must lie in [0, 1), got {}", self.burn_in)));
        }
        if self.thin == 0 || self.chains == 0 {
            return Err(Error::validation("thin and chains must be at least 1"));
        }
        if self.retained_per_chain() == 0 {
            return Err(Error::validation("no draws left after burn-in and thinning"));
        }
        Ok(())
    }

    pub fn burn_in_iterations(&self) -> usize {
        (self.burn_in * self.iterations as f64).round() as usize
    }

    pub fn retained_per_chain(&self) -> usize {
        (self.iterations - self.burn_in_iterations()) / self.thin
    }
}

/// Posterior draws in canonical component order.
#[derive(Clone, Debug)]
pub struct Chain {
    pub draws: Vec<(MixtureModel, f64)>,
    /// Post-burn-in acceptance rate, pooled over chains.
    pub acceptance_rate: f64,
    pub seed: RngSeed,
}

impl Chain {
    /// The retained draw with the largest log posterior.
    pub fn best(&self) -> Option<&(MixtureModel, f64)> {
        self.draws.iter().max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// One row per draw: weights, then every component parameter, then the log posterior.
    pub fn to_csv(&self) -> String {
        let Some((first, _)) = self.draws.first() else {
            return String::from("log_posterior\n");
        };
        let k = first.k();
        let names = first.components()[0].kind().param_names();
        let mut header: Vec<String> = (1..=k).map(|j| format!("weight_{j}")).collect();
        for j in 1..=k {
            header.extend(names.iter().map(|n| format!("{n}_{j}")));
        }
        header.push("log_posterior".into());
        let mut out = header.join(",");
        out.push('\n');
        for (m, lp) in &self.draws {
            let mut row: Vec<String> = m.weights().iter().map(|w| w.to_string()).collect();
            for c in m.components() {
                row.extend(c.params().iter().map(|v| v.to_string()));
            }
            row.push(lp.to_string());
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Target evaluated at one state.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Eval {
    /// Tempered log density in state coordinates.
    pub target: f64,
    pub log_lik: f64,
    pub log_prior: f64,
}

impl Eval {
    const EXCLUDED: Eval = Eval {
        target: f64::NEG_INFINITY,
        log_lik: f64::NEG_INFINITY,
        log_prior: f64::NEG_INFINITY,
    };

    pub fn log_posterior(&self) -> f64 {
        self.log_prior + self.log_lik
    }
}

pub(crate) fn evaluate(map: &StateMap, h: &Histogram, temperature: f64, s: &[f64]) -> Eval {
    let Some(model) = map.to_model(s) else {
        return Eval::EXCLUDED;
    };
    evaluate_model(map, h, temperature, s, &model)
}

fn evaluate_model(map: &StateMap, h: &Histogram, temperature: f64, s: &[f64], model: &MixtureModel) -> Eval {
    let log_prior = map.prior.log_prior(model);
    if log_prior == f64::NEG_INFINITY {
        return Eval::EXCLUDED;
    }
    let log_lik = log_likelihood_or_exclude(model, h);
    let tempered = if temperature == 0.0 { 0.0 } else { temperature * log_lik };
    let target = log_prior + tempered + map.log_jacobian(s);
    Eval {
        target: if target.is_nan() { f64::NEG_INFINITY } else { target },
        log_lik,
        log_prior,
    }
}

/// Proposal state of the adaptive random-walk Metropolis sampler.
#[derive(Clone, Debug)]
pub(crate) struct Proposal {
    chol: DMatrix<f64>,
    log_scale: f64,
    mean: DVector<f64>,
    scatter: DMatrix<f64>,
    count: usize,
    adapted: usize,
}

const TARGET_ACCEPT: f64 = 0.234;
const REFACTOR_EVERY: usize = 100;

impl Proposal {
    pub fn initial(map: &StateMap) -> Self {
        let d = map.dim();
        let free: Vec<Bound> = map.prior.bounds().iter().copied().filter(Bound::is_free).collect();
        let mut sd = Vec::with_capacity(d);
        for _ in 0..map.k {
            for b in &free {
                let (a, z) = b.coord_range();
                sd.push(0.01 * (z - a));
            }
        }
        sd.resize(d, 0.1);
        Self {
            chol: DMatrix::from_diagonal(&DVector::from_vec(sd)),
            log_scale: 0.0,
            mean: DVector::zeros(d),
            scatter: DMatrix::zeros(d, d),
            count: 0,
            adapted: 0,
        }
    }

    fn draw(&self, x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = x.len();
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let step = &self.chol * z * self.log_scale.exp();
        x.iter().zip(step.iter()).map(|(a, b)| a + b).collect()
    }

    fn reset_moments(&mut self) {
        self.mean.fill(0.0);
        self.scatter.fill(0.0);
        self.count = 0;
    }

    fn adapt(&mut self, x: &[f64], accept_prob: f64) {
        self.adapted += 1;
        let gain = (self.adapted as f64).powf(-0.6);
        self.log_scale = (self.log_scale + gain * (accept_prob - TARGET_ACCEPT)).clamp(-30.0, 10.0);

        let d = x.len();
        self.count += 1;
        let xv = DVector::from_column_slice(x);
        let delta = &xv - &self.mean;
        self.mean += &delta / self.count as f64;
        let delta2 = &xv - &self.mean;
        self.scatter += &delta * delta2.transpose();

        if self.count >= (2 * d).max(200) && self.count.is_multiple_of(REFACTOR_EVERY) {
            let mut cov = &self.scatter / (self.count - 1) as f64 * (2.38 * 2.38 / d as f64);
            for i in 0..d {
                cov[(i, i)] += 1e-10;
            }
            if let Some(ch) = cov.cholesky() {
                // The Robbins–Monro factor keeps tuning the empirical shape.
                self.chol = ch.l();
            }
        }
    }
}

/// Output of one sampler run.
pub(crate) struct RwmRun {
    /// Retained states with their evaluations.
    pub kept: Vec<(Vec<f64>, Eval)>,
    pub accepted: usize,
    pub proposed: usize,
}

pub(crate) struct RwmSettings {
    pub temperature: f64,
    pub burn_in: usize,
    pub keep: usize,
    pub thin: usize,
}

/// Adaptive random-walk Metropolis. The proposal is adapted during burn-in
/// only (Haario covariance, Robbins–Monro scale) and frozen afterwards.
pub(crate) fn adaptive_rwm(
    map: &StateMap,
    h: &Histogram,
    start: (Vec<f64>, Eval),
    proposal: &mut Proposal,
    settings: &RwmSettings,
    rng: &mut ChaCha8Rng,
) -> RwmRun {
    let (mut x, mut ex) = start;
    let restart_at = settings.burn_in / 2;
    let mut kept = Vec::with_capacity(settings.keep);
    let (mut accepted, mut proposed) = (0, 0);
    let total = settings.burn_in + settings.keep * settings.thin;
    for it in 0..total {
        let y = proposal.draw(&x, rng);
        let ey = evaluate(map, h, settings.temperature, &y);
        let log_ratio = ey.target - ex.target;
        let accept_prob = if log_ratio.is_nan() { 0.0 } else { log_ratio.exp().min(1.0) };
        let u: f64 = rng.random();
        let accept = ey.target > f64::NEG_INFINITY && u < accept_prob;
        if accept {
            x = y;
            ex = ey;
        }
        if it < settings.burn_in {
            if it == restart_at && restart_at >= 500 {
                proposal.reset_moments();
            }
            proposal.adapt(&x, accept_prob);
        } else {
            proposed += 1;
            accepted += usize::from(accept);
            if (it - settings.burn_in + 1).is_multiple_of(settings.thin) {
                kept.push((x.clone(), ex));
            }
        }
    }
    RwmRun {
        kept,
        accepted,
        proposed,
    }
}

/// Adaptive random-walk Metropolis on the `k`-component posterior.
///
/// Chains start from the best candidates among binned EM fits and screened
/// prior draws; chain `c` uses the `c`-th best.
pub fn run_mcmc(h: &Histogram, k: usize, prior: &PriorBox, config: &ChainConfig, seed: RngSeed) -> Result<Chain> {
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    prior.validate()?;
    config.validate()?;
    let starts = starting_points(h, k, prior, config.init_draws, seed)?;
    let map = StateMap::new(k, prior);
    let settings = RwmSettings {
        temperature: 1.0,
        burn_in: config.burn_in_iterations(),
        keep: config.retained_per_chain(),
        thin: config.thin,
    };
    let runs = par::map_range(config.chains, |c| {
        let start = &starts[c % starts.len()].0;
        let s = map.to_state(start);
        let e = evaluate(&map, h, 1.0, &s);
        let mut proposal = Proposal::initial(&map);
        let mut rng = seed.stream(c as u64 + 1);
        adaptive_rwm(&map, h, (s, e), &mut proposal, &settings, &mut rng)
    });
    let mut draws = Vec::new();
    let (mut acc, mut prop) = (0, 0);
    for run in runs {
        acc += run.accepted;
        prop += run.proposed;
        for (s, e) in run.kept {
            let m = map.to_model(&s).expect("retained states lie in the box");
            draws.push((m.canonical(), e.log_posterior()));
        }
    }
    Ok(Chain {
        draws,
        acceptance_rate: if prop == 0 { 0.0 } else { acc as f64 / prop as f64 },
        seed,
    })
}
