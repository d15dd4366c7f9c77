//! Starting points for the samplers.
//!
//! The main source is expectation–maximization on the binned data. Every
//! family here is exponential in `(x, 1/x, ln x)`, so the M-step is the
//! MaxEnt solve on responsibility-weighted means. When those means fall
//! outside what a GIG can reach, the gamma or inverse-gamma limit is used.

use crate::data::Histogram;
use crate::error::{Error, Result};
use crate::maxent::{solve_multipliers, ConstraintSet, Multipliers, PriorSpec};
use crate::par;
use crate::pythagorean::{FamilyKind, FamilyMember};
use crate::sampling::RngSeed;
use crate::special_fn::log_bessel_k;

use super::model::MixtureModel;
use super::prior::{log_posterior, Bound, PriorBox};

const EM_ITERATIONS: usize = 1000;
const EM_TOL: f64 = 1e-9;

/// Means of `(x, ln x, 1/x)` of a uniform density on `[a, b]`.
fn uniform_means(a: f64, b: f64) -> [f64; 3] {
    let a = a.max(1e-300);
    let w = b - a;
    [
        0.5 * (a + b),
        (b * b.ln() - a * a.ln()) / w - 1.0,
        (b.ln() - a.ln()) / w,
    ]
}

/// Binned data as uniform pieces: `(weight, centre, means)`.
struct Pieces {
    weight: Vec<f64>,
    center: Vec<f64>,
    means: Vec<[f64; 3]>,
}

/// Bins (split into pieces at the cuts) of the cumulative-count window `[c_lo, c_hi)`.
fn window_pieces(h: &Histogram, c_lo: f64, c_hi: f64) -> Pieces {
    let mut p = Pieces {
        weight: Vec::new(),
        center: Vec::new(),
        means: Vec::new(),
    };
    let mut acc = 0.0;
    for (i, &c) in h.counts().iter().enumerate() {
        let (a, b) = (h.edges()[i], h.edges()[i + 1]);
        let c = c as f64;
        let (lo, hi) = (acc, acc + c);
        acc = hi;
        let (ov_lo, ov_hi) = (lo.max(c_lo), hi.min(c_hi));
        if c == 0.0 || ov_hi <= ov_lo {
            continue;
        }
        let a2 = a + (b - a) * (ov_lo - lo) / c;
        let b2 = a + (b - a) * (ov_hi - lo) / c;
        if b2 <= a2 {
            continue;
        }
        p.weight.push(ov_hi - ov_lo);
        p.center.push(0.5 * (a2 + b2));
        p.means.push(uniform_means(a2, b2));
    }
    p
}

fn weighted_targets(means: &[[f64; 3]], w: &[f64]) -> Option<(f64, ConstraintSet)> {
    let n: f64 = w.iter().sum();
    if !(n > 0.0) {
        return None;
    }
    let mut s = [0.0; 3];
    for (m, wi) in means.iter().zip(w) {
        for j in 0..3 {
            s[j] += wi * m[j];
        }
    }
    Some((
        n,
        ConstraintSet {
            target_mu: Some(s[0] / n),
            target_log_gamma: Some(s[1] / n),
            target_inv_eta: Some(s[2] / n),
        },
    ))
}

fn gamma_limit(c: &ConstraintSet) -> Option<Multipliers> {
    let c = ConstraintSet {
        target_inv_eta: None,
        ..*c
    };
    solve_multipliers(&PriorSpec::UniformImproper, &c, None).ok()
}

fn inverse_gamma_limit(c: &ConstraintSet) -> Option<Multipliers> {
    let c = ConstraintSet {
        target_mu: None,
        ..*c
    };
    solve_multipliers(&PriorSpec::UniformImproper, &c, None).ok()
}

/// GIG with order `lambda` matching the arithmetic and harmonic means.
fn fixed_order_fit(lambda: f64, mu: f64, inv_eta: f64) -> Option<(f64, f64)> {
    let target = (mu * inv_eta).ln();
    let gap = |lb: f64| -> Option<f64> {
        let b = lb.exp();
        Some(
            log_bessel_k(lambda + 1.0, b).ok()? + log_bessel_k(lambda - 1.0, b).ok()?
                - 2.0 * log_bessel_k(lambda, b).ok()?,
        )
    };
    // The gap falls from +∞ to 0 as β grows.
    let (mut lo, mut hi) = (1e-4f64.ln(), 1e4f64.ln());
    if gap(hi)? > target {
        lo = hi;
    } else if gap(lo)? < target {
        hi = lo;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = (0.5 * (lo + hi)).exp();
    let alpha = mu * (log_bessel_k(lambda, beta).ok()? - log_bessel_k(lambda + 1.0, beta).ok()?).exp();
    Some((alpha, beta))
}

/// The member of `family` whose means best match the targets.
fn fit_member(family: FamilyKind, c: &ConstraintSet, warm: Option<Multipliers>) -> Option<FamilyMember> {
    let member = match family {
        FamilyKind::Gamma => {
            let m = gamma_limit(c)?;
            FamilyMember::Gamma {
                shape: m.lambda3,
                rate: m.lambda1,
            }
        }
        FamilyKind::InverseGamma => {
            let m = inverse_gamma_limit(c)?;
            FamilyMember::InverseGamma {
                shape: -m.lambda3,
                scale: m.lambda2,
            }
        }
        FamilyKind::Gig => {
            let m = solve_multipliers(&PriorSpec::UniformImproper, c, warm)
                .ok()
                .filter(|m| m.lambda1 > 0.0 && m.lambda2 > 0.0)
                .or_else(|| {
                    // Nudge the boundary solutions just inside the GIG family.
                    gamma_limit(c)
                        .map(|g| Multipliers {
                            lambda2: 1e-3 * c.target_inv_eta.unwrap_or(1.0).recip(),
                            ..g
                        })
                        .or_else(|| {
                            inverse_gamma_limit(c).map(|g| Multipliers {
                                lambda1: 1e-3 / c.target_mu.unwrap_or(1.0),
                                ..g
                            })
                        })
                })?;
            let g = m.to_gig()?;
            FamilyMember::Gig {
                lambda: g.lambda,
                alpha: g.alpha,
                beta: g.beta,
            }
        }
        _ => {
            let lambda = family.fixed_order().expect("fixed-order family");
            let (alpha, beta) = fixed_order_fit(lambda, c.target_mu?, c.target_inv_eta?)?;
            FamilyMember::from_params(family, &[alpha, beta]).ok()?
        }
    };
    member.validate().ok()?;
    Some(member)
}

/// Moves every parameter into the box.
fn clamp_into(prior: &PriorBox, m: &FamilyMember) -> Option<FamilyMember> {
    let p: Vec<f64> = prior
        .bounds()
        .iter()
        .zip(m.params())
        .map(|(b, v)| match *b {
            Bound::Linear { lo, hi } | Bound::Log { lo, hi } => v.clamp(lo, hi),
            Bound::Fixed { value } => value,
        })
        .collect();
    FamilyMember::from_params(prior.family(), &p).ok()
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    let k = w.len();
    let head: f64 = w[..k - 1].iter().sum();
    w[k - 1] = (1.0 - head).max(0.0);
    w
}

/// Cumulative counts at `k + 1` cut points of each splitting rule.
fn initial_cuts(h: &Histogram, k: usize) -> Vec<Vec<f64>> {
    let total = h.total() as f64;
    let cum_at = |x: f64| {
        let mut acc = 0.0;
        for (i, &c) in h.counts().iter().enumerate() {
            let (a, b) = (h.edges()[i], h.edges()[i + 1]);
            if x >= b {
                acc += c as f64;
            } else {
                if x > a {
                    acc += c as f64 * (x - a) / (b - a);
                }
                break;
            }
        }
        acc
    };
    let (lo, hi) = h.range();
    let lo_pos = lo.max(hi * 1e-12);
    let by = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        (0..=k)
            .map(|g| if g == k { total } else { cum_at(f(g as f64 / k as f64)) })
            .collect()
    };
    vec![
        (0..=k).map(|g| total * g as f64 / k as f64).collect(),
        by(&|q| lo_pos * (hi / lo_pos).powf(q)),
        by(&|q| lo + (hi - lo) * q),
    ]
}

/// One EM run started from a hard split of the data at `cuts`.
fn em_from_cuts(h: &Histogram, k: usize, family: FamilyKind, cuts: &[f64]) -> Option<MixtureModel> {
    let mut weights = Vec::with_capacity(k);
    let mut comps = Vec::with_capacity(k);
    for g in 0..k {
        let p = window_pieces(h, cuts[g], cuts[g + 1]);
        let (n, c) = weighted_targets(&p.means, &p.weight)?;
        weights.push(n);
        comps.push(fit_member(family, &c, None)?);
    }
    let all = window_pieces(h, 0.0, f64::INFINITY);
    let mut model = MixtureModel::new(normalized(weights), comps).ok()?;
    let mut previous = f64::NEG_INFINITY;
    for _ in 0..EM_ITERATIONS {
        let kernels: Vec<Multipliers> = model.components().iter().map(|c| c.multipliers().ok()).collect::<Option<_>>()?;
        let log_w: Vec<f64> = model.weights().iter().map(|w| w.ln()).collect();
        let mut resp = vec![vec![0.0; all.center.len()]; k];
        let mut ll = 0.0;
        for (i, &x) in all.center.iter().enumerate() {
            let lx = x.ln();
            let terms: Vec<f64> = (0..k).map(|j| log_w[j] + kernels[j].log_kernel(x, lx)).collect();
            let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                return None;
            }
            let z: f64 = terms.iter().map(|t| (t - max).exp()).sum();
            ll += all.weight[i] * (max + z.ln());
            for j in 0..k {
                resp[j][i] = all.weight[i] * (terms[j] - max).exp() / z;
            }
        }
        let mut new_w = Vec::with_capacity(k);
        let mut new_c = Vec::with_capacity(k);
        for j in 0..k {
            let (n, c) = match weighted_targets(&all.means, &resp[j]) {
                Some(t) if t.0 > 1e-9 * h.total() as f64 => t,
                _ => {
                    new_w.push(0.0);
                    new_c.push(model.components()[j]);
                    continue;
                }
            };
            new_w.push(n);
            new_c.push(fit_member(family, &c, Some(kernels[j])).unwrap_or(model.components()[j]));
        }
        model = MixtureModel::new(normalized(new_w), new_c).ok()?;
        if (ll - previous).abs() <= EM_TOL * ll.abs() {
            break;
        }
        previous = ll;
    }
    Some(model)
}

/// EM fits from several initial splits of the data, moved into the prior box.
pub fn em_fit(h: &Histogram, k: usize, prior: &PriorBox) -> Vec<MixtureModel> {
    let runs = par::map_slice(&initial_cuts(h, k), |cuts| em_from_cuts(h, k, prior.family(), cuts));
    runs.into_iter()
        .flatten()
        .filter_map(|m| {
            let comps = m
                .components()
                .iter()
                .map(|c| clamp_into(prior, c))
                .collect::<Option<Vec<_>>>()?;
            // Zero weights sit on the edge of the Dirichlet support.
            let w = normalized(m.weights().iter().map(|w| w.max(1e-6)).collect());
            MixtureModel::new(w, comps).ok()
        })
        .collect()
}

/// Candidate starting points with finite log posterior, best first.
pub(crate) fn starting_points(
    h: &Histogram,
    k: usize,
    prior: &PriorBox,
    draws: usize,
    seed: RngSeed,
) -> Result<Vec<(MixtureModel, f64)>> {
    let mut cands = em_fit(h, k, prior);
    let mut rng = seed.stream(0);
    cands.extend((0..draws).map(|_| prior.sample(k, &mut rng)));
    let scored = par::map_slice(&cands, |m| log_posterior(m, h, prior));
    let mut out: Vec<(MixtureModel, f64)> = cands
        .into_iter()
        .zip(scored)
        .filter(|(_, lp)| lp.is_finite())
        .collect();
    if out.is_empty() {
        return Err(Error::Initialization(format!(
            "no finite-posterior starting point among {draws} prior draws"
        )));
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(out)
}
