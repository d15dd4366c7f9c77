mod common;

use gigmix::inference::MixtureModel;
use gigmix::par;
use gigmix::pythagorean::{gig_means, FamilyMember, GigParams};
use gigmix::sampling::{sample_gig, sample_member, sample_mixture, RngSeed};
use statrs::distribution::{ContinuousCDF, Gamma, InverseGamma};

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

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

#[test]
fn ks_against_quadrature_cdf() {
    let n = 100_000;
    for (i, (l, a, b)) in [(-0.5, 1.0, 1.0), (2.0, 1.0, 1.0), (0.0, 3.0, 0.05), (-6.0, 0.2, 30.0), (12.0, 5.0, 0.3)]
        .into_iter()
        .enumerate()
    {
        let p = GigParams::new(l, a, b).unwrap();
        let draws = sample_gig(&p, n, RngSeed(i as u64)).unwrap();
        let cdf = common::GridCdf::new(common::gig_lp(&p), a * 1e-8, a * 1e8, 400_000);
        let d = common::ks_distance(&draws, |x| cdf.at(x));
        assert!(d < common::ks_critical(n), "{p:?}: D = {d}");
    }
}

#[test]
fn gamma_and_inverse_gamma_ks() {
    let n = 50_000;
    let g = sample_member(&FamilyMember::Gamma { shape: 0.7, rate: 2.0 }, n, RngSeed(5)).unwrap();
    let gd = Gamma::new(0.7, 2.0).unwrap();
    assert!(common::ks_distance(&g, |x| gd.cdf(x)) < common::ks_critical(n));
    let ig = sample_member(&FamilyMember::InverseGamma { shape: 3.0, scale: 2.0 }, n, RngSeed(6)).unwrap();
    let igd = InverseGamma::new(3.0, 2.0).unwrap();
    assert!(common::ks_distance(&ig, |x| igd.cdf(x)) < common::ks_critical(n));
}

#[test]
fn inverse_gaussian_moments() {
    let p = GigParams::new(-0.5, 1.0, 2.5).unwrap();
    let m = gig_means(&p).unwrap();
    let d = sample_gig(&p, 100_000, RngSeed(9)).unwrap();
    let diff: Vec<f64> = d.iter().map(|x| 1.0 / x - x).collect();
    let (mean, sd) = mean_sd(&diff);
    let want = m.inv_eta() - m.mu;
    assert!((mean - want).abs() < 4.0 * sd / (d.len() as f64).sqrt(), "{mean} vs {want}");
}

#[test]
fn mean_within_four_standard_errors() {
    let p = GigParams::new(2.0, 1.0, 1.0).unwrap();
    let d = sample_gig(&p, 100_000, RngSeed(10)).unwrap();
    let (mean, sd) = mean_sd(&d);
    assert!((mean - gig_means(&p).unwrap().mu).abs() < 4.0 * sd / (d.len() as f64).sqrt());
}

#[test]
fn reciprocal_symmetry_two_sample() {
    let n = 10_000;
    let p = GigParams::new(1.7, 2.0, 0.9).unwrap();
    let q = GigParams::new(-1.7, 2.0, 0.9).unwrap();
    let a: Vec<f64> = sample_gig(&p, n, RngSeed(1)).unwrap().iter().map(|x| 4.0 / x).collect();
    let b = sample_gig(&q, n, RngSeed(2)).unwrap();
    assert!(common::ks_two_sample(&a, &b) < common::ks_critical_two(n, n));
}

#[test]
fn single_component_mixture_matches_member() {
    let n = 20_000;
    let c = FamilyMember::Gig { lambda: 0.3, alpha: 1.2, beta: 0.7 };
    let m = MixtureModel::single(c).unwrap();
    let a: Vec<f64> = sample_mixture(&m, n, RngSeed(3)).unwrap().iter().map(|d| d.0).collect();
    let b = sample_member(&c, n, RngSeed(4)).unwrap();
    assert!(common::ks_two_sample(&a, &b) < common::ks_critical_two(n, n));
}

#[test]
fn demo_label_frequencies() {
    let n = 50_000;
    let d = sample_mixture(&demo(), n, RngSeed(42)).unwrap();
    let mut counts = [0usize; 3];
    for (_, j) in &d {
        counts[*j] += 1;
    }
    for (c, p) in counts.iter().zip([0.3, 0.45, 0.25]) {
        let se = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - n as f64 * p).abs() < 4.0 * se, "{counts:?}");
    }
    let equal = MixtureModel::new(vec![0.5, 0.5], vec![demo().components()[0]; 2]).unwrap();
    let half = sample_mixture(&equal, n, RngSeed(8)).unwrap().iter().filter(|d| d.1 == 0).count();
    assert!((half as f64 - n as f64 / 2.0).abs() < 4.0 * (n as f64 * 0.25).sqrt());
}

#[test]
fn bit_exact_and_independent_of_threads() {
    let p = GigParams::new(0.4, 2.0, 1.1).unwrap();
    let a = sample_gig(&p, 30_000, RngSeed(77)).unwrap();
    let b = sample_gig(&p, 30_000, RngSeed(77)).unwrap();
    let c = par::sequential(|| sample_gig(&p, 30_000, RngSeed(77)).unwrap());
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert!(a.iter().zip(&c).all(|(x, y)| x.to_bits() == y.to_bits()));
    let m1 = sample_mixture(&demo(), 10_000, RngSeed(1)).unwrap();
    let m2 = par::with_threads(3, || sample_mixture(&demo(), 10_000, RngSeed(1)).unwrap());
    assert!(m1.iter().zip(&m2).all(|(x, y)| x.0.to_bits() == y.0.to_bits() && x.1 == y.1));
    assert_ne!(a, sample_gig(&p, 30_000, RngSeed(78)).unwrap());
}
