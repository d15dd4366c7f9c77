//! Evidence estimation over power posteriors and the posterior over the
//! number of components.
//!
//! Rungs follow the ladder `t_j = (j/(T-1))^p`. Rung `t = 0` is sampled
//! exactly from the prior. Every other rung runs its own adaptive random-walk
//! chain on its own seed stream, started from a prior draw, an EM fit or the
//! polished mode picked with weight `exp(t·ℓ)`, so rungs run concurrently.
//! Stepping stone is the primary estimator and thermodynamic integration
//! over the same samples is kept as a cross-check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Histogram;
use crate::error::{Error, Result};
use crate::inference::{
    adaptive_rwm, em_fit, evaluate, log_posterior, polish, PriorBox, Proposal, RwmSettings, StateMap,
};
use crate::par;
use crate::sampling::RngSeed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceMethod {
    SteppingStone,
    ThermodynamicIntegration,
}

/// Log evidence `ln ∫ p(ψ) L(ψ) dψ` for one `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEstimate {
    pub k: usize,
    pub log_evidence: f64,
    pub standard_error: f64,
    pub method: EvidenceMethod,
    pub ladder_size: usize,
}

/// Temperature ladder and per-rung chain lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    pub temperatures: usize,
    /// Retained draws per rung.
    pub steps: usize,
    /// Adaptation iterations at the start of every rung with `t > 0`.
    pub burn_in: usize,
    pub exponent: f64,
    /// Batches for the batch-means standard errors.
    pub batches: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            temperatures: 32,
            steps: 10_000,
            burn_in: 2000,
            exponent: 5.0,
            batches: 25,
        }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperatures < 2 {
            return Err(Error::validation("the ladder needs at least 2 temperatures"));
        }
        if self.batches < 2 || self.steps < self.batches {
            return Err(Error::validation("steps must be at least batches, and batches at least 2"));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::validation("ladder exponent must be > 0"));
        }
        Ok(())
    }

    pub fn ladder(&self) -> Vec<f64> {
        let last = (self.temperatures - 1) as f64;
        (0..self.temperatures)
            .map(|j| (j as f64 / last).powf(self.exponent))
            .collect()
    }
}

/// Diagnostics of one rung.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungSummary {
    pub temperature: f64,
    pub mean_log_likelihood: f64,
    /// `ln E_t[L^(t_next - t)]`; zero on the last rung.
    pub log_ratio: f64,
    pub log_ratio_se: f64,
    pub acceptance_rate: f64,
}

/// Both estimates with per-rung diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub stepping_stone: EvidenceEstimate,
    /// Missing when some rung has a non-finite mean log-likelihood.
    pub thermodynamic: Option<EvidenceEstimate>,
    pub rungs: Vec<RungSummary>,
}

/// Standard error of the mean of `v` by batch means.
fn batch_se(v: &[f64], batches: usize) -> f64 {
    let per = v.len() / batches;
    if per == 0 {
        return f64::INFINITY;
    }
    let means: Vec<f64> = (0..batches)
        .map(|b| v[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// `(ln mean exp(dt·ℓ), its standard error)`.
fn log_mean_power(log_liks: &[f64], dt: f64, batches: usize) -> (f64, f64) {
    let max = log_liks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    let w: Vec<f64> = log_liks.iter().map(|l| (dt * (l - max)).exp()).collect();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    (dt * max + mean.ln(), batch_se(&w, batches) / mean)
}

/// A pool state drawn with weight `exp(t·ℓ)`: prior-like for small `t`,
/// near the dominant mode for large `t`.
fn pick_start(pool: &[(Vec<f64>, f64)], t: f64, rng: &mut impl Rng) -> Vec<f64> {
    let max = pool.iter().map(|p| t * p.1).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = pool.iter().map(|p| (t * p.1 - max).exp()).collect();
    let mut u = rng.random::<f64>() * w.iter().sum::<f64>();
    for (p, wi) in pool.iter().zip(&w) {
        if u < *wi {
            return p.0.clone();
        }
        u -= wi;
    }
    pool[pool.len() - 1].0.clone()
}

/// Stepping-stone log evidence of the `k`-component model.
pub fn estimate_evidence(
    h: &Histogram,
    k: usize,
    prior: &PriorBox,
    config: &LadderConfig,
    seed: RngSeed,
) -> Result<EvidenceEstimate> {
    evidence_report(h, k, prior, config, seed).map(|r| r.stepping_stone)
}

/// Samples every rung and returns both estimators.
pub fn evidence_report(
    h: &Histogram,
    k: usize,
    prior: &PriorBox,
    config: &LadderConfig,
    seed: RngSeed,
) -> Result<EvidenceReport> {
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    prior.validate()?;
    config.validate()?;
    let ladder = config.ladder();
    let map = StateMap::new(k, prior);

    // Rung 0: exact prior draws. They also seed the starting pool.
    let mut prior_rng = seed.stream(0);
    let mut pool: Vec<(Vec<f64>, f64)> = Vec::with_capacity(config.steps);
    let mut liks = Vec::with_capacity(config.steps);
    for _ in 0..config.steps {
        let s = map.to_state(&prior.sample(k, &mut prior_rng));
        let e = evaluate(&map, h, ladder[1], &s);
        liks.push(e.log_lik);
        if e.target.is_finite() {
            pool.push((s, e.log_lik));
        }
    }
    let mut fits = em_fit(h, k, prior);
    let best = fits
        .iter()
        .map(|m| (m, log_posterior(m, h, prior)))
        .filter(|(_, lp)| lp.is_finite())
        .max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some(Ok((m, _))) = best.map(|(m, _)| polish(m, h, prior)) {
        fits.push(m);
    }
    for m in fits {
        let s = map.to_state(&m);
        let e = evaluate(&map, h, 1.0, &s);
        if e.target.is_finite() {
            pool.push((s, e.log_lik));
        }
    }
    if pool.is_empty() {
        return Err(Error::Initialization(format!(
            "no prior draw out of {} has a finite likelihood",
            config.steps
        )));
    }

    let tempered = par::map_range(ladder.len() - 1, |i| {
        let t = ladder[i + 1];
        let mut rng = seed.stream(i as u64 + 1);
        let s = pick_start(&pool, t, &mut rng);
        let e = evaluate(&map, h, t, &s);
        let mut proposal = Proposal::initial(&map);
        adaptive_rwm(
            &map,
            h,
            (s, e),
            &mut proposal,
            &RwmSettings {
                temperature: t,
                burn_in: config.burn_in,
                keep: config.steps,
                thin: 1,
            },
            &mut rng,
        )
    });
    let mut acceptance = vec![1.0];
    let mut rung_liks = vec![liks];
    for run in tempered {
        acceptance.push(run.accepted as f64 / run.proposed.max(1) as f64);
        rung_liks.push(run.kept.iter().map(|(_, e)| e.log_lik).collect());
    }

    let mut rungs = Vec::with_capacity(ladder.len());
    let (mut ss, mut ss_var) = (0.0, 0.0);
    for (j, liks) in rung_liks.iter().enumerate() {
        let (log_ratio, se) = if j + 1 < ladder.len() {
            log_mean_power(liks, ladder[j + 1] - ladder[j], config.batches)
        } else {
            (0.0, 0.0)
        };
        ss += log_ratio;
        ss_var += se * se;
        rungs.push(RungSummary {
            temperature: ladder[j],
            mean_log_likelihood: liks.iter().sum::<f64>() / liks.len() as f64,
            log_ratio,
            log_ratio_se: se,
            acceptance_rate: acceptance[j],
        });
    }

    let thermodynamic = rungs.iter().all(|r| r.mean_log_likelihood.is_finite()).then(|| {
        let (mut ti, mut var) = (0.0, 0.0);
        for j in 0..ladder.len() {
            let left = if j > 0 { ladder[j] - ladder[j - 1] } else { 0.0 };
            let right = if j + 1 < ladder.len() { ladder[j + 1] - ladder[j] } else { 0.0 };
            let weight = 0.5 * (left + right);
            ti += weight * rungs[j].mean_log_likelihood;
            var += (weight * batch_se(&rung_liks[j], config.batches)).powi(2);
        }
        EvidenceEstimate {
            k,
            log_evidence: ti,
            standard_error: var.sqrt(),
            method: EvidenceMethod::ThermodynamicIntegration,
            ladder_size: ladder.len(),
        }
    });

    Ok(EvidenceReport {
        stepping_stone: EvidenceEstimate {
            k,
            log_evidence: ss,
            standard_error: ss_var.sqrt(),
            method: EvidenceMethod::SteppingStone,
            ladder_size: ladder.len(),
        },
        thermodynamic,
        rungs,
    })
}

/// Posterior probability of one candidate `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KPosterior {
    pub k: usize,
    pub probability: f64,
    pub evidence: EvidenceEstimate,
    pub cross_check: Option<EvidenceEstimate>,
    pub rungs: Vec<RungSummary>,
}

/// `p(k) ∝ prior(k) · exp(log_evidence_k)`, normalized by log-sum-exp.
pub fn normalize_posterior(log_evidence: &[f64], k_prior: Option<&[f64]>) -> Result<Vec<f64>> {
    if log_evidence.is_empty() {
        return Err(Error::validation("no candidates"));
    }
    if let Some(p) = k_prior {
        if p.len() != log_evidence.len() {
            return Err(Error::validation(format!(
                "k_prior has {} entries for {} candidates",
                p.len(),
                log_evidence.len()
            )));
        }
        if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::validation("k_prior entries must be finite and >= 0"));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("k_prior must sum to 1, got {s}")));
        }
    }
    let logs: Vec<f64> = log_evidence
        .iter()
        .enumerate()
        .map(|(i, le)| le + k_prior.map_or(0.0, |p| p[i].ln()))
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical("every candidate has zero posterior weight".into()));
    }
    let z: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    Ok(logs.iter().map(|l| (l - max).exp() / z).collect())
}

/// Evidence for every candidate `k` and the normalized posterior over them.
///
/// Candidates run concurrently, candidate `k` on seed `seed.derive(k)`.
pub fn posterior_over_k(
    h: &Histogram,
    k_values: &[usize],
    prior: &PriorBox,
    k_prior: Option<&[f64]>,
    config: &LadderConfig,
    seed: RngSeed,
) -> Result<Vec<KPosterior>> {
    if k_values.is_empty() {
        return Err(Error::validation("k_values must not be empty"));
    }
    if k_values.contains(&0) {
        return Err(Error::validation("every k must be at least 1"));
    }
    // Check the prior over k before the expensive part.
    normalize_posterior(&vec![0.0; k_values.len()], k_prior)?;
    let reports = par::map_slice(k_values, |&k| evidence_report(h, k, prior, config, seed.derive(k as u64)));
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let logs: Vec<f64> = reports.iter().map(|r| r.stepping_stone.log_evidence).collect();
    let probs = normalize_posterior(&logs, k_prior)?;
    Ok(reports
        .into_iter()
        .zip(k_values)
        .zip(probs)
        .map(|((r, &k), probability)| KPosterior {
            k,
            probability,
            evidence: r.stepping_stone,
            cross_check: r.thermodynamic,
            rungs: r.rungs,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_shape() {
        let l = LadderConfig::default().ladder();
        assert_eq!(l.len(), 32);
        assert_eq!((l[0], l[31]), (0.0, 1.0));
        assert!((l[1] - (1.0f64 / 31.0).powi(5)).abs() < 1e-20);
        assert!(l.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn normalization_cases() {
        assert_eq!(normalize_posterior(&[-1234.5], None).unwrap(), vec![1.0]);
        assert_eq!(normalize_posterior(&[-7.0, -7.0], None).unwrap(), vec![0.5, 0.5]);
        let p = normalize_posterior(&[-1e4, -1e4 + 2.0_f64.ln()], None).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-11);
        assert!(normalize_posterior(&[0.0, 0.0], Some(&[0.5, 0.6])).is_err());
    }

    #[test]
    fn log_mean_power_matches_direct() {
        let l = [-3.0, -1.0, -2.5, -0.2];
        let (v, _) = log_mean_power(&l, 0.7, 2);
        let direct = (l.iter().map(|x| (0.7 * x).exp()).sum::<f64>() / 4.0).ln();
        assert!((v - direct).abs() < 1e-14);
    }
}
