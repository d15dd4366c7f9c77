use crate::data::Histogram;
use crate::error::Result;
use crate::quad::kronrod_nodes;

use super::model::{CompiledMixture, MixtureModel};

/// Relative accuracy of each bin probability.
const BIN_TOL: f64 = 1e-10;
const MAX_PANELS: usize = 400;
/// Multiples of a component's curvature width placed as breakpoints around its mode.
const PEAK_OFFSETS: [f64; 9] = [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0];

/// `Σ_i counts_i ln p_i`, with `0 · ln 0 = 0` and `−∞` when an occupied
/// cell has zero probability.
pub fn multinomial_log_likelihood(counts: &[u64], log_probs: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&c, &lp) in counts.iter().zip(log_probs) {
        if c == 0 {
            continue;
        }
        if lp == f64::NEG_INFINITY || lp.is_nan() {
            return f64::NEG_INFINITY;
        }
        total += c as f64 * lp;
    }
    total
}

/// Log-probabilities `ln p_i` of every histogram bin under the model.
///
/// Bins are integrated with adaptive Gauss–Kronrod in log space, splitting
/// at the modes of the components and a few curvature widths around them so
/// that narrow components are always resolved.
pub fn bin_log_probabilities(model: &MixtureModel, h: &Histogram) -> Result<Vec<f64>> {
    model.validate()?;
    let mix = CompiledMixture::new(model)?;
    Ok(bin_log_probs_compiled(&mix, h))
}

pub(crate) fn bin_log_probs_compiled(mix: &CompiledMixture, h: &Histogram) -> Vec<f64> {
    let mut splits: Vec<f64> = mix
        .peaks()
        .iter()
        .flat_map(|&(m, w)| PEAK_OFFSETS.iter().map(move |o| m + o * w))
        .collect();
    splits.sort_by(f64::total_cmp);
    let edges = h.edges();
    let mut start = 0;
    edges
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            while start < splits.len() && splits[start] <= a {
                start += 1;
            }
            let mut pts = vec![a];
            pts.extend(splits[start..].iter().copied().take_while(|&s| s < b));
            pts.push(b);
            log_bin_integral(mix, &pts)
        })
        .collect()
}

struct Panel {
    a: f64,
    b: f64,
    logs: [f64; 15],
}

impl Panel {
    fn new(mix: &CompiledMixture, a: f64, b: f64) -> Self {
        let nodes = kronrod_nodes(a, b);
        let mut logs = [0.0; 15];
        for (l, (x, _)) in logs.iter_mut().zip(nodes) {
            *l = mix.log_pdf(x);
        }
        Self { a, b, logs }
    }

    fn max_log(&self) -> f64 {
        self.logs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Kronrod and Gauss estimates scaled by `exp(-reference)`.
    fn estimates(&self, reference: f64) -> (f64, f64) {
        let nodes = kronrod_nodes(self.a, self.b);
        let h = 0.5 * (self.b - self.a);
        let mut k = 0.0;
        let mut g = 0.0;
        for (i, ((_, w), l)) in nodes.iter().zip(self.logs).enumerate() {
            let v = (l - reference).exp();
            k += w * v;
            // Positions 2,3 / 6,7 / 10,11 and the centre carry the Gauss nodes.
            let gw = match i {
                2 | 3 => GAUSS[0],
                6 | 7 => GAUSS[1],
                10 | 11 => GAUSS[2],
                14 => GAUSS[3],
                _ => 0.0,
            };
            g += h * gw * v;
        }
        (k, g)
    }
}

const GAUSS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn log_bin_integral(mix: &CompiledMixture, pts: &[f64]) -> f64 {
    struct Est {
        panel: Panel,
        k: f64,
        err: f64,
    }
    let mut reference = f64::NEG_INFINITY;
    let mut ests: Vec<Est> = Vec::new();
    let push = |ests: &mut Vec<Est>, reference: &mut f64, panel: Panel| {
        let top = panel.max_log() + (panel.b - panel.a).ln();
        if top > *reference + 300.0 || *reference == f64::NEG_INFINITY {
            // Rescale so the largest panel stays near one.
            let shift = (*reference - top).exp();
            for e in ests.iter_mut() {
                e.k *= shift;
                e.err *= shift;
            }
            *reference = top;
        }
        let (k, g) = panel.estimates(*reference);
        ests.push(Est {
            panel,
            k,
            err: (k - g).abs(),
        });
    };
    for w in pts.windows(2).filter(|w| w[1] > w[0]) {
        push(&mut ests, &mut reference, Panel::new(mix, w[0], w[1]));
    }
    if !reference.is_finite() {
        return f64::NEG_INFINITY;
    }
    loop {
        let total: f64 = ests.iter().map(|e| e.k).sum();
        let err: f64 = ests.iter().map(|e| e.err).sum();
        if err <= BIN_TOL * total || ests.len() >= MAX_PANELS || !total.is_finite() {
            return reference + total.ln();
        }
        let worst = ests
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.total_cmp(&b.1.err))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Est { panel, .. } = ests.swap_remove(worst);
        let mid = 0.5 * (panel.a + panel.b);
        if !(mid > panel.a && mid < panel.b) {
            return reference + total.ln();
        }
        push(&mut ests, &mut reference, Panel::new(mix, panel.a, mid));
        push(&mut ests, &mut reference, Panel::new(mix, mid, panel.b));
    }
}

/// Multinomial log-likelihood of the histogram counts, without the
/// multinomial coefficient. The cell for mass outside the histogram range
/// has count zero and so contributes nothing.
pub fn log_likelihood(model: &MixtureModel, h: &Histogram) -> Result<f64> {
    let lp = bin_log_probabilities(model, h)?;
    Ok(multinomial_log_likelihood(h.counts(), &lp))
}

pub(crate) fn log_likelihood_compiled(mix: &CompiledMixture, h: &Histogram) -> f64 {
    multinomial_log_likelihood(h.counts(), &bin_log_probs_compiled(mix, h))
}

/// Maps evaluation failures of a candidate model to a hard exclusion.
pub(crate) fn log_likelihood_or_exclude(model: &MixtureModel, h: &Histogram) -> f64 {
    match CompiledMixture::new(model) {
        Ok(mix) => {
            let v = log_likelihood_compiled(&mix, h);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pythagorean::FamilyMember;

    fn exp_hist() -> Histogram {
        let edges: Vec<f64> = (0..=20).map(|i| 0.25 * i as f64).collect();
        let counts = (0..20).map(|i| 100 + i as u64).collect();
        Histogram::from_counts(edges, counts).unwrap()
    }

    #[test]
    fn exponential_bins_match_closed_form() {
        let rate = 0.8;
        let m = MixtureModel::single(FamilyMember::Gamma { shape: 1.0, rate }).unwrap();
        let h = exp_hist();
        let lp = bin_log_probabilities(&m, &h).unwrap();
        for (i, w) in h.edges().windows(2).enumerate() {
            let exact = ((-rate * w[0]).exp() - (-rate * w[1]).exp()).ln();
            assert!((lp[i] - exact).abs() < 1e-12, "{i}: {} vs {exact}", lp[i]);
        }
    }

    #[test]
    fn narrow_component_inside_a_bin_is_resolved() {
        // A spike of relative width about 3e-3 in the middle of one wide bin.
        let spike = FamilyMember::Gig {
            lambda: 0.0,
            alpha: 1.13,
            beta: 9e4,
        };
        let m = MixtureModel::single(spike).unwrap();
        let h = Histogram::from_counts(vec![0.5, 1.0, 2.0, 3.0], vec![1, 1, 1]).unwrap();
        let lp = bin_log_probabilities(&m, &h).unwrap();
        assert!(lp[1].abs() < 1e-9, "{}", lp[1]);
    }

    #[test]
    fn far_component_gives_finite_very_negative_value() {
        let m = MixtureModel::single(FamilyMember::Gamma {
            shape: 2.0,
            rate: 200.0,
        })
        .unwrap();
        let v = log_likelihood(&m, &exp_hist()).unwrap();
        assert!(v.is_finite() && v < -1e5);
    }

    #[test]
    fn zero_probability_occupied_cell_is_excluded() {
        assert_eq!(multinomial_log_likelihood(&[3, 1], &[-0.1, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(multinomial_log_likelihood(&[3, 0], &[-0.5, f64::NEG_INFINITY]), -1.5);
    }

    #[test]
    fn single_wide_bin_has_near_zero_loglik() {
        let m = MixtureModel::single(FamilyMember::Gamma {
            shape: 3.0,
            rate: 2.0,
        })
        .unwrap();
        let h = Histogram::from_counts(vec![1e-6, 200.0], vec![50]).unwrap();
        let v = log_likelihood(&m, &h).unwrap();
        assert!(v.abs() < 1e-8, "{v}");
    }
}
