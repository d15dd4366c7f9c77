mod common;

use gigmix::maxent::{
    log_partition, maxent_log_pdf, relative_entropy, solve_multipliers, solve_multipliers_traced, ConstraintSet,
    Multipliers, PriorSpec, TabulatedPrior, MAX_NEWTON,
};
use gigmix::pythagorean::{gig_from_multipliers, gig_means, multipliers_from_gig, GigParams};
use gigmix::Error;
use rand::{Rng, SeedableRng};

fn flat() -> PriorSpec {
    PriorSpec::UniformImproper
}

#[test]
fn round_trip_random_triples() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = GigParams::new(
            rng.random_range(-4.0..4.0),
            10f64.powf(rng.random_range(-1.0..1.0)),
            10f64.powf(rng.random_range(-0.5..1.5)),
        )
        .unwrap();
        let c = ConstraintSet::from_means(&gig_means(&p).unwrap());
        let sol = solve_multipliers_traced(&flat(), &c, None).unwrap();
        assert!(sol.iterations <= 50, "{p:?} took {}", sol.iterations);
        let q = gig_from_multipliers(&sol.multipliers).unwrap();
        assert!(common::rel_err(q.alpha, p.alpha) < 1e-5, "{p:?} -> {q:?}");
        assert!(common::rel_err(q.beta, p.beta) < 1e-5, "{p:?} -> {q:?}");
        assert!((q.lambda - p.lambda).abs() < 1e-5 * p.lambda.abs().max(1.0), "{p:?} -> {q:?}");
        // The dual never increases across accepted steps.
        for w in sol.dual_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
        assert!(sol.iterations <= MAX_NEWTON);
    }
}

#[test]
fn gig_zero_one_two() {
    let c = ConstraintSet::from_means(&gig_means(&GigParams::new(0.0, 1.0, 2.0).unwrap()).unwrap());
    let m = solve_multipliers(&flat(), &c, None).unwrap();
    assert!((m.lambda1 - 1.0).abs() < 1e-6 && (m.lambda2 - 1.0).abs() < 1e-6 && m.lambda3.abs() < 1e-6);
    let want = gigmix::pythagorean::gig_log_pdf(&GigParams::new(0.0, 1.0, 2.0).unwrap(), 1.0).unwrap();
    let exact = multipliers_from_gig(&GigParams::new(0.0, 1.0, 2.0).unwrap()).unwrap();
    assert!((maxent_log_pdf(&flat(), &exact, 1.0).unwrap() - want).abs() < 1e-12);
}

#[test]
fn gamma_from_mean_and_geometric_mean() {
    let (a, b) = (3.0, 3.0);
    let lg = statrs::function::gamma::digamma(a) - f64::ln(b);
    let c = ConstraintSet {
        target_mu: Some(a / b),
        target_log_gamma: Some(lg),
        target_inv_eta: None,
    };
    let m = solve_multipliers(&flat(), &c, None).unwrap();
    assert!((m.lambda1 - 3.0).abs() < 1e-7 && (m.lambda3 - 3.0).abs() < 1e-7 && m.lambda2 == 0.0);
}

#[test]
fn exponential_from_mean() {
    let c = ConstraintSet {
        target_mu: Some(2.0),
        ..Default::default()
    };
    let m = solve_multipliers(&flat(), &c, None).unwrap();
    assert!((m.lambda1 - 0.5).abs() < 1e-9 && m.lambda2 == 0.0 && m.lambda3 == 1.0);
}

#[test]
fn constraints_reproduced_under_independent_quadrature() {
    let targets = [
        gig_means(&GigParams::new(1.3, 2.0, 0.7).unwrap()).unwrap(),
        gig_means(&GigParams::new(-2.5, 0.3, 5.0).unwrap()).unwrap(),
    ];
    for t in targets {
        let c = ConstraintSet::from_means(&t);
        let m = solve_multipliers(&flat(), &c, None).unwrap();
        let lp = |x: f64| maxent_log_pdf(&flat(), &m, x).unwrap();
        let s = t.mu;
        assert!((common::expect(lp, |_| 1.0, s) - 1.0).abs() < 1e-9);
        assert!(common::rel_err(common::expect(lp, |x| x, s), t.mu) < 1e-8);
        assert!(common::rel_err(common::expect(lp, |x| 1.0 / x, s), t.inv_eta()) < 1e-8);
        assert!((common::expect(lp, |x| x.ln(), s) - t.log_gamma()).abs() < 1e-8);
    }
}

#[test]
fn entropy_is_maximal_under_feasible_perturbations() {
    for (i, p) in [(0.5, 1.0, 1.0), (2.0, 1.5, 0.8), (-1.5, 3.0, 6.0)].into_iter().enumerate() {
        let p = GigParams::new(p.0, p.1, p.2).unwrap();
        let m = solve_multipliers(&flat(), &ConstraintSet::from_means(&gig_means(&p).unwrap()), None).unwrap();
        let lf = |x: f64| maxent_log_pdf(&flat(), &m, x).unwrap();
        let s_star = relative_entropy(&flat(), &m).unwrap();
        let (lo, hi) = ((p.alpha).ln() - 8.0, (p.alpha).ln() + 8.0);
        let (_, s_quad) = common::perturbed_entropy(&lf, &common::Perturbation::new(&lf, lo, hi, 0), 0.0, lo - 30.0, hi + 30.0);
        assert!((s_quad - s_star).abs() < 1e-8);
        for seed in 0..5 {
            let g = common::Perturbation::new(&lf, lo, hi, 100 * i as u64 + seed);
            for eps in [-0.3, -0.1, 0.1, 0.3] {
                let (mass, s) = common::perturbed_entropy(&lf, &g, eps, lo - 30.0, hi + 30.0);
                assert!((mass - 1.0).abs() < 1e-9);
                assert!(s <= s_star + 1e-9, "{p:?} eps={eps}: {s} > {s_star}");
            }
        }
    }
}

#[test]
fn triangular_prior_partition_against_riemann_sum() {
    let t = TabulatedPrior::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
    let prior = PriorSpec::Tabulated(t);
    let got = log_partition(&prior, 0.5, 0.1, 1.0).unwrap();
    let n = 1_000_000;
    let h = 2.0 / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        let q = 1.0 - (x - 1.0).abs();
        s += q * (-0.5 * x - 0.1 / x).exp() * h;
    }
    assert!((got - s.ln()).abs() < 1e-9, "{got} vs {}", s.ln());
}

#[test]
fn narrow_prior_dominates() {
    let t = TabulatedPrior::new(vec![(4.99, 0.0), (5.0, 1.0), (5.01, 0.0)]).unwrap();
    let prior = PriorSpec::Tabulated(t);
    let c = ConstraintSet {
        target_mu: Some(5.0),
        ..Default::default()
    };
    let m = solve_multipliers(&prior, &c, None).unwrap();
    assert!(maxent_log_pdf(&prior, &m, 5.0).unwrap() > maxent_log_pdf(&prior, &m, 4.995).unwrap());
    assert!(maxent_log_pdf(&prior, &m, 6.0).is_err());
}

#[test]
fn broad_prior_matches_flat_result() {
    let (eps, l) = (1e-8, 1e6);
    let prior = PriorSpec::Tabulated(TabulatedPrior::new(vec![(eps, 1.0), (l, 1.0)]).unwrap());
    let p = GigParams::new(0.7, 2.0, 1.5).unwrap();
    let c = ConstraintSet::from_means(&gig_means(&p).unwrap());
    let m = solve_multipliers(&prior, &c, None).unwrap();
    let g = gig_from_multipliers(&m).unwrap();
    for x in [2.0 * eps, 1e-3, 0.5, 2.0, 30.0, 1e3, l / 2.0] {
        let a = maxent_log_pdf(&prior, &m, x).unwrap();
        let b = gigmix::pythagorean::gig_log_pdf(&p, x).unwrap();
        let _ = g;
        assert!((a.exp() - b.exp()).abs() <= 1e-4 * b.exp().max(1e-300) + 1e-300, "x={x}: {a} vs {b}");
    }
}

#[test]
fn infeasible_and_unattainable_targets() {
    let bad = ConstraintSet {
        target_mu: Some(1.0),
        target_log_gamma: None,
        target_inv_eta: Some(0.5),
    };
    match solve_multipliers(&flat(), &bad, None) {
        Err(Error::NoSolution(msg)) => assert!(msg.contains("harmonic")),
        other => panic!("{other:?}"),
    }
    // A uniform on [3, 10] is lighter-tailed than any gamma: no GIG has its means.
    let (a, b) = (3.0f64, 10.0f64);
    let light = ConstraintSet {
        target_mu: Some(0.5 * (a + b)),
        target_log_gamma: Some((b * b.ln() - a * a.ln()) / (b - a) - 1.0),
        target_inv_eta: Some((b / a).ln() / (b - a)),
    };
    assert!(matches!(solve_multipliers(&flat(), &light, None), Err(Error::NoSolution(_))));
}

#[test]
fn warm_start_accepted() {
    let p = GigParams::new(1.0, 1.0, 1.0).unwrap();
    let c = ConstraintSet::from_means(&gig_means(&p).unwrap());
    let init = Multipliers::unnormalized(0.4, 0.6, 0.9);
    let m = solve_multipliers(&flat(), &c, Some(init)).unwrap();
    assert!((m.lambda1 - 0.5).abs() < 1e-6);
}
