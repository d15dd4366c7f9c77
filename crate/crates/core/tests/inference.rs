mod common;

use gigmix::data::{build_histogram, Histogram};
use gigmix::inference::{
    bin_log_probabilities, log_likelihood, log_posterior, map_estimate, mixture_log_pdf, polish, run_mcmc, Bound,
    ChainConfig, MixtureModel, PriorBox,
};
use gigmix::pythagorean::{FamilyKind, FamilyMember};
use gigmix::sampling::{sample_member, sample_mixture, RngSeed};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Gamma};

fn demo() -> MixtureModel {
    MixtureModel::new(
        vec![0.3, 0.45, 0.25],
        vec![
            FamilyMember::Gig { lambda: -0.5, alpha: 0.8, beta: 3.0 },
            FamilyMember::Gig { lambda: 2.0, alpha: 3.0, beta: 2.0 },
            FamilyMember::Gig { lambda: 5.0, alpha: 8.0, beta: 4.0 },
        ],
    )
    .unwrap()
}

fn hist_from(model: &MixtureModel, n: usize, seed: u64, bins: Option<usize>) -> Histogram {
    let x: Vec<f64> = sample_mixture(model, n, RngSeed(seed)).unwrap().iter().map(|d| d.0).collect();
    build_histogram(&x, bins).unwrap()
}

fn gamma_box(shape: Bound, rate: Bound) -> PriorBox {
    PriorBox::new(FamilyKind::Gamma, vec![shape, rate], 1.0).unwrap()
}

/// `ln Σ_i n_i ln p_i` for a gamma model, with bin masses from the statrs CDF.
fn gamma_loglik(shape: f64, rate: f64, h: &Histogram) -> f64 {
    let d = Gamma::new(shape, rate).unwrap();
    let e = h.edges();
    h.counts()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(i, &c)| c as f64 * (d.cdf(e[i + 1]) - d.cdf(e[i])).ln())
        .sum()
}

#[test]
fn demo_pdf_against_direct_sum() {
    let x = 1.0;
    let mut terms: Vec<f64> = demo()
        .weights()
        .iter()
        .zip([(-0.5, 0.8, 3.0), (2.0, 3.0, 2.0), (5.0, 8.0, 4.0)])
        .map(|(w, (l, a, b))| w * common::gig_log_pdf(l, a, b, x).exp())
        .collect();
    terms.sort_by(f64::total_cmp);
    let want: f64 = terms.iter().sum::<f64>().ln();
    assert!((mixture_log_pdf(&demo(), x).unwrap() - want).abs() < 1e-10);
}

#[test]
fn likelihood_near_multinomial_maximum() {
    let h = hist_from(&demo(), 100_000, 3, Some(60));
    let lp = bin_log_probabilities(&demo(), &h).unwrap();
    let n = h.total() as f64;
    let ll = log_likelihood(&demo(), &h).unwrap();
    let best: f64 = h.counts().iter().filter(|c| **c > 0).map(|&c| c as f64 * (c as f64 / n).ln()).sum();
    // 2 (best - ll) is asymptotically chi-square with about B - 1 degrees of freedom.
    let dof = (h.bins() - 1) as f64;
    let dev = 2.0 * (best - ll);
    assert!(dev > 0.0 && dev < dof + 6.0 * (2.0 * dof).sqrt(), "deviance {dev} on {dof}");
    for (i, &c) in h.counts().iter().enumerate() {
        if c > 2000 {
            let ratio = c as f64 / (n * lp[i].exp());
            assert!((ratio - 1.0).abs() < 0.1, "bin {i}: {ratio}");
        }
    }
}

#[test]
fn likelihood_matches_gamma_cdf_oracle() {
    let m = MixtureModel::single(FamilyMember::Gamma { shape: 2.3, rate: 0.7 }).unwrap();
    let h = hist_from(&m, 5000, 1, None);
    let got = log_likelihood(&m, &h).unwrap();
    assert!((got - gamma_loglik(2.3, 0.7, &h)).abs() < 1e-7 * got.abs());
}

#[test]
fn posterior_examples() {
    let h = hist_from(&demo(), 2000, 5, None);
    let prior = PriorBox::default_for(FamilyKind::Gig, &h);
    let lp = log_posterior(&demo(), &h, &prior);
    let ll = log_likelihood(&demo(), &h).unwrap();
    let m1 = MixtureModel::new(vec![0.2, 0.5, 0.3], demo().components().to_vec()).unwrap();
    // Flat Dirichlet(1) and a box prior: posterior minus likelihood is constant.
    let c = lp - ll;
    assert!((log_posterior(&m1, &h, &prior) - log_likelihood(&m1, &h).unwrap() - c).abs() < 1e-6);

    let mut p2 = prior.clone();
    p2.set_concentration(2.0).unwrap();
    let two = MixtureModel::new(vec![0.5, 0.5], demo().components()[..2].to_vec()).unwrap();
    let diff = p2.log_prior(&two) - prior.log_prior(&two);
    let want = (6f64).ln() + 2.0 * 0.5f64.ln() - 0.0; // ln Γ(4) − 2 ln Γ(2) + ln ½ + ln ½ − ln Γ(2)
    assert!((diff - want).abs() < 1e-12, "{diff} vs {want}");

    let edge = MixtureModel::single(FamilyMember::Gig { lambda: 20.0, alpha: 1.0, beta: 1.0 }).unwrap();
    assert!(log_posterior(&edge, &h, &prior).is_finite());
    let out = MixtureModel::single(FamilyMember::Gig { lambda: 20.0 + 1e-9, alpha: 1.0, beta: 1.0 }).unwrap();
    assert_eq!(log_posterior(&out, &h, &prior), f64::NEG_INFINITY);
}

#[test]
fn acceptance_rate_k1() {
    let m = MixtureModel::single(FamilyMember::Gig { lambda: 1.0, alpha: 2.0, beta: 1.5 }).unwrap();
    let h = hist_from(&m, 5000, 2, None);
    let prior = PriorBox::default_for(FamilyKind::Gig, &h);
    let cfg = ChainConfig {
        iterations: 10_000,
        ..Default::default()
    };
    let chain = run_mcmc(&h, 1, &prior, &cfg, RngSeed(1)).unwrap();
    assert!((0.15..=0.40).contains(&chain.acceptance_rate), "{}", chain.acceptance_rate);
    assert_eq!(chain.draws.len(), 2 * cfg.retained_per_chain());
    assert!(chain.draws.iter().all(|d| d.1.is_finite()));
}

#[test]
fn separated_k2_weights() {
    let truth = MixtureModel::new(
        vec![0.35, 0.65],
        vec![
            FamilyMember::Gig { lambda: 4.0, alpha: 1.0, beta: 20.0 },
            FamilyMember::Gig { lambda: 4.0, alpha: 20.0, beta: 20.0 },
        ],
    )
    .unwrap();
    let h = hist_from(&truth, 50_000, 4, None);
    let prior = PriorBox::default_for(FamilyKind::Gig, &h);
    let cfg = ChainConfig {
        iterations: 10_000,
        ..Default::default()
    };
    let chain = run_mcmc(&h, 2, &prior, &cfg, RngSeed(2)).unwrap();
    let n = chain.draws.len() as f64;
    let w0 = chain.draws.iter().map(|d| d.0.weights()[0]).sum::<f64>() / n;
    assert!((w0 - 0.35).abs() < 0.02, "{w0}");
}

#[test]
fn gamma_chain_concentrates_on_truth() {
    let (shape, rate) = (3.0, 2.0);
    let m = MixtureModel::single(FamilyMember::Gamma { shape, rate }).unwrap();
    let h = hist_from(&m, 5000, 6, None);
    let prior = PriorBox::default_for(FamilyKind::Gamma, &h);
    let cfg = ChainConfig {
        iterations: 20_000,
        ..Default::default()
    };
    let chain = run_mcmc(&h, 1, &prior, &cfg, RngSeed(3)).unwrap();
    for (j, truth) in [shape, rate].into_iter().enumerate() {
        let v: Vec<f64> = chain.draws.iter().map(|d| d.0.components()[0].params()[j]).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((mean - truth).abs() < 3.0 * sd, "param {j}: {mean} ± {sd}");
    }
}

#[test]
fn map_rate_on_exponential_data() {
    let m = MixtureModel::single(FamilyMember::Gamma { shape: 1.0, rate: 0.5 }).unwrap();
    let h = hist_from(&m, 20_000, 7, None);
    let prior = gamma_box(Bound::Fixed { value: 1.0 }, Bound::Linear { lo: 0.01, hi: 10.0 });
    let cfg = ChainConfig {
        iterations: 5000,
        ..Default::default()
    };
    let chain = run_mcmc(&h, 1, &prior, &cfg, RngSeed(4)).unwrap();
    let best = chain.best().unwrap().1;
    let map = map_estimate(&chain, &h, &prior).unwrap();
    let lp = log_posterior(&map, &h, &prior);
    assert!(lp >= best);
    let (_, again) = polish(&map, &h, &prior).unwrap();
    assert!((again - lp).abs() < 1e-8);

    // Grid search, then golden-section refinement, on the CDF oracle.
    let f = |r: f64| gamma_loglik(1.0, r, &h);
    let grid: Vec<f64> = (1..=2000).map(|i| 0.0005 * i as f64).collect();
    let r0 = grid.iter().copied().max_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    let (mut a, mut b) = (r0 - 0.0005, r0 + 0.0005);
    for _ in 0..60 {
        let c = b - 0.618 * (b - a);
        let d = a + 0.618 * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let want = 0.5 * (a + b);
    let got = map.components()[0].params()[1];
    assert!(common::rel_err(got, want) < 1e-3, "{got} vs {want}");
}

#[test]
fn chain_matches_quadrature_posterior() {
    // Broad two-parameter posterior: 150 gamma draws in 8 bins.
    let truth = FamilyMember::Gamma { shape: 2.0, rate: 1.0 };
    let x = sample_member(&truth, 150, RngSeed(8)).unwrap();
    let h = build_histogram(&x, Some(8)).unwrap();
    let (slo, shi, rlo, rhi) = (0.3, 8.0, 0.05, 5.0);
    let prior = gamma_box(Bound::Linear { lo: slo, hi: shi }, Bound::Linear { lo: rlo, hi: rhi });
    let cfg = ChainConfig {
        iterations: 312_500,
        burn_in: 0.2,
        thin: 5,
        chains: 2,
        init_draws: 200,
    };
    let chain = run_mcmc(&h, 1, &prior, &cfg, RngSeed(9)).unwrap();
    assert_eq!(chain.draws.len(), 100_000);

    let g = 400;
    let sv: Vec<f64> = (0..g).map(|i| slo + (shi - slo) * (i as f64 + 0.5) / g as f64).collect();
    let rv: Vec<f64> = (0..g).map(|i| rlo + (rhi - rlo) * (i as f64 + 0.5) / g as f64).collect();
    let mut post = vec![vec![0.0; g]; g];
    let mut max = f64::NEG_INFINITY;
    for i in 0..g {
        for j in 0..g {
            post[i][j] = gamma_loglik(sv[i], rv[j], &h);
            max = max.max(post[i][j]);
        }
    }
    let mut ms = vec![0.0; g];
    let mut mr = vec![0.0; g];
    for i in 0..g {
        for j in 0..g {
            let p = (post[i][j] - max).exp();
            ms[i] += p;
            mr[j] += p;
        }
    }
    let cdf = |m: &[f64], grid: &[f64], lo: f64, hi: f64, x: f64| {
        let w = (hi - lo) / g as f64;
        let total: f64 = m.iter().sum();
        let mut acc = 0.0;
        for (k, &c) in grid.iter().enumerate() {
            if x >= c + 0.5 * w {
                acc += m[k];
            } else {
                acc += m[k] * ((x - (c - 0.5 * w)) / w).max(0.0);
                break;
            }
        }
        acc / total
    };
    let shapes: Vec<f64> = chain.draws.iter().map(|d| d.0.components()[0].params()[0]).collect();
    let rates: Vec<f64> = chain.draws.iter().map(|d| d.0.components()[0].params()[1]).collect();
    let ds = common::ks_distance(&shapes, |x| cdf(&ms, &sv, slo, shi, x));
    let dr = common::ks_distance(&rates, |x| cdf(&mr, &rv, rlo, rhi, x));
    assert!(ds < 0.01 && dr < 0.01, "KS shape {ds}, rate {dr}");
}

#[test]
fn chain_csv_and_config_checks() {
    let m = MixtureModel::single(FamilyMember::Gamma { shape: 2.0, rate: 1.0 }).unwrap();
    let h = hist_from(&m, 1000, 10, None);
    let prior = PriorBox::default_for(FamilyKind::Gamma, &h);
    let cfg = ChainConfig {
        iterations: 500,
        thin: 10,
        chains: 1,
        ..Default::default()
    };
    let chain = run_mcmc(&h, 1, &prior, &cfg, RngSeed(1)).unwrap();
    let csv = chain.to_csv();
    assert!(csv.starts_with("weight_1,shape_1,rate_1,log_posterior\n"));
    assert_eq!(csv.lines().count(), 1 + chain.draws.len());
    assert!(run_mcmc(&h, 0, &prior, &cfg, RngSeed(1)).is_err());
    let bad = ChainConfig { burn_in: 1.0, ..cfg };
    assert!(run_mcmc(&h, 1, &prior, &bad, RngSeed(1)).is_err());
}

fn member() -> impl Strategy<Value = FamilyMember> {
    (-5.0f64..5.0, -1.0f64..1.0, -1.0f64..1.5).prop_map(|(l, a, b)| FamilyMember::Gig {
        lambda: l,
        alpha: 10f64.powf(a),
        beta: 10f64.powf(b),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn label_invariance(
        comps in prop::collection::vec(member(), 3),
        raw in prop::collection::vec(0.05f64..1.0, 3),
        perm in Just([2usize, 0, 1]),
        x in 0.01f64..50.0,
    ) {
        let s: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|v| v / s).collect();
        w[2] = 1.0 - w[0] - w[1];
        let m = MixtureModel::new(w, comps).unwrap();
        let p = m.permuted(&perm);
        let h = hist_from(&demo(), 300, 11, Some(12));
        let prior = PriorBox::default_for(FamilyKind::Gig, &h);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0) || a == b;
        prop_assert!(close(m.log_pdf(x).unwrap(), p.log_pdf(x).unwrap()));
        prop_assert!(close(log_likelihood(&m, &h).unwrap(), log_likelihood(&p, &h).unwrap()));
        prop_assert!(close(log_posterior(&m, &h, &prior), log_posterior(&p, &h, &prior)));
        prop_assert!(close(log_posterior(&m, &h, &prior), log_posterior(&m.canonical(), &h, &prior)));
    }
}
