use crate::data::Histogram;
use crate::error::{Error, Result};

use super::mcmc::Chain;
use super::model::MixtureModel;
use super::prior::{log_posterior, Bound, PriorBox, StateMap};

/// Sweep improvement below which the ascent stops.
pub const POLISH_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 400;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// The highest-posterior chain draw, polished by a derivative-free ascent.
pub fn map_estimate(chain: &Chain, h: &Histogram, prior: &PriorBox) -> Result<MixtureModel> {
    let (best, _) = chain
        .best()
        .ok_or_else(|| Error::validation("cannot take a MAP estimate from an empty chain"))?;
    Ok(polish(best, h, prior)?.0)
}

/// Powell's direction-set ascent on the log posterior, in the box
/// coordinates plus stick-breaking logits. Never returns a worse model.
pub fn polish(model: &MixtureModel, h: &Histogram, prior: &PriorBox) -> Result<(MixtureModel, f64)> {
    let start = log_posterior(model, h, prior);
    if !start.is_finite() {
        return Err(Error::validation("polish needs a model with finite log posterior"));
    }
    let map = StateMap::new(model.k(), prior);
    let f = |s: &[f64]| match map.to_model(s) {
        Some(m) => {
            let v = log_posterior(&m, h, prior);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        }
        None => f64::NEG_INFINITY,
    };
    let mut x = map.to_state(model);
    let mut fx = f(&x);
    if !(fx >= start - 1e-9 * start.abs().max(1.0)) {
        // The state round trip lost the model; keep the original.
        return Ok((model.canonical(), start));
    }
    let d = x.len();
    let free: Vec<Bound> = prior.bounds().iter().copied().filter(Bound::is_free).collect();
    let mut scales = Vec::with_capacity(d);
    for _ in 0..model.k() {
        for b in &free {
            let (a, z) = b.coord_range();
            scales.push(0.01 * (z - a));
        }
    }
    scales.resize(d, 0.1);
    let mut dirs: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut v = vec![0.0; d];
            v[i] = scales[i];
            v
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let (x0, f0) = (x.clone(), fx);
        let mut biggest = (0, 0.0);
        for (i, dir) in dirs.iter().enumerate() {
            let before = fx;
            (x, fx) = line_max(&f, &x, fx, dir);
            if fx - before > biggest.1 {
                biggest = (i, fx - before);
            }
        }
        let delta: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        if delta.iter().any(|v| *v != 0.0) {
            (x, fx) = line_max(&f, &x, fx, &delta);
            if biggest.1 > 0.0 {
                dirs.remove(biggest.0);
                dirs.push(delta);
            }
        }
        if fx - f0 < POLISH_TOL {
            break;
        }
    }
    let polished = map.to_model(&x).expect("ascent stays inside the box");
    if fx >= start {
        Ok((polished.canonical(), fx))
    } else {
        Ok((model.canonical(), start))
    }
}

/// Maximizes `f(x + t·dir)` over `t` by bracketing and golden section.
fn line_max<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, dir: &[f64]) -> (Vec<f64>, f64) {
    let at = |t: f64| -> Vec<f64> { x.iter().zip(dir).map(|(a, b)| a + t * b).collect() };
    let g = |t: f64| f(&at(t));

    // Bracket a maximum: find a < b < c with g(b) ≥ g(a), g(c).
    let (mut a, mut b, mut c);
    let (mut ga, mut gb, mut gc);
    let g1 = g(1.0);
    if g1 > fx {
        (a, ga, b, gb) = (0.0, fx, 1.0, g1);
        c = 1.0 + 1.0 / INV_PHI;
        gc = g(c);
        let mut n = 0;
        while gc > gb && n < 60 {
            (a, ga, b, gb) = (b, gb, c, gc);
            c = b + (b - a) / INV_PHI;
            gc = g(c);
            n += 1;
        }
    } else {
        let gm = g(-1.0);
        if gm > fx {
            (a, ga, b, gb) = (0.0, fx, -1.0, gm);
            c = -1.0 - 1.0 / INV_PHI;
            gc = g(c);
            let mut n = 0;
            while gc > gb && n < 60 {
                (a, ga, b, gb) = (b, gb, c, gc);
                c = b + (b - a) / INV_PHI;
                gc = g(c);
                n += 1;
            }
        } else {
            (a, ga, b, gb, c, gc) = (-1.0, gm, 0.0, fx, 1.0, g1);
        }
    }
    let _ = (ga, gc);
    if a > c {
        std::mem::swap(&mut a, &mut c);
    }

    // Golden section on [a, c] around b.
    let (mut best_t, mut best_g) = (b, gb);
    let (mut lo, mut hi) = (a, c);
    let mut t1 = hi - INV_PHI * (hi - lo);
    let mut t2 = lo + INV_PHI * (hi - lo);
    let (mut g1, mut g2) = (g(t1), g(t2));
    for _ in 0..200 {
        if g1 > best_g {
            (best_t, best_g) = (t1, g1);
        }
        if g2 > best_g {
            (best_t, best_g) = (t2, g2);
        }
        if (hi - lo).abs() <= 1e-9 * (1.0 + best_t.abs()) {
            break;
        }
        if g1 >= g2 {
            hi = t2;
            t2 = t1;
            g2 = g1;
            t1 = hi - INV_PHI * (hi - lo);
            g1 = g(t1);
        } else {
            lo = t1;
            t1 = t2;
            g1 = g2;
            t2 = lo + INV_PHI * (hi - lo);
            g2 = g(t2);
        }
    }
    if best_g > fx {
        (at(best_t), best_g)
    } else {
        (x.to_vec(), fx)
    }
}
