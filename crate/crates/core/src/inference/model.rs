use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxent::Multipliers;
use crate::pythagorean::{FamilyKind, FamilyMember};

/// Tolerance on `Σ π_j = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finite mixture `Σ_j π_j f_j(x)`.
///
/// Construction validates but does not reorder; [`MixtureModel::canonical`]
/// gives the ordering by ascending arithmetic mean (ties: β, then λ) that
/// inference outputs use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureDoc", into = "MixtureDoc")]
pub struct MixtureModel {
    weights: Vec<f64>,
    components: Vec<FamilyMember>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ComponentEntry {
    weight: f64,
    #[serde(flatten)]
    member: FamilyMember,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MixtureDoc {
    components: Vec<ComponentEntry>,
}

impl TryFrom<MixtureDoc> for MixtureModel {
    type Error = Error;

    fn try_from(doc: MixtureDoc) -> Result<Self> {
        let (weights, components) = doc.components.into_iter().map(|c| (c.weight, c.member)).unzip();
        MixtureModel::new(weights, components)
    }
}

impl From<MixtureModel> for MixtureDoc {
    fn from(m: MixtureModel) -> Self {
        MixtureDoc {
            components: m
                .weights
                .into_iter()
                .zip(m.components)
                .map(|(weight, member)| ComponentEntry { weight, member })
                .collect(),
        }
    }
}

impl MixtureModel {
    pub fn new(weights: Vec<f64>, components: Vec<FamilyMember>) -> Result<Self> {
        let m = Self {
            weights,
            components,
        };
        m.validate()?;
        Ok(m)
    }

    /// A single-component model.
    pub fn single(member: FamilyMember) -> Result<Self> {
        Self::new(vec![1.0], vec![member])
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::validation("a mixture needs at least one component"));
        }
        if self.weights.len() != self.components.len() {
            return Err(Error::validation(format!(
                "{} weights for {} components",
                self.weights.len(),
                self.components.len()
            )));
        }
        for (j, &w) in self.weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::validation(format!(
                    "components[{j}].weight must be finite and >= 0, got {w}"
                )));
            }
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::validation(format!("weights must sum to 1, got {sum}")));
        }
        for (j, c) in self.components.iter().enumerate() {
            c.validate()
                .map_err(|e| Error::validation(format!("components[{j}]: {e}")))?;
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[FamilyMember] {
        &self.components
    }

    /// The common family of all components, if there is one.
    pub fn family(&self) -> Option<FamilyKind> {
        let first = self.components[0].kind();
        self.components.iter().all(|c| c.kind() == first).then_some(first)
    }

    /// The same mixture with components in canonical order.
    pub fn canonical(&self) -> Self {
        let keys: Vec<(f64, f64, f64)> = self
            .components
            .iter()
            .map(|c| (c.arithmetic_mean(), c.concentration(), c.order()))
            .collect();
        let mut idx: Vec<usize> = (0..self.k()).collect();
        idx.sort_by(|&a, &b| {
            let (ka, kb) = (keys[a], keys[b]);
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
                .then(Ordering::Equal)
        });
        self.permuted(&idx)
    }

    /// Components reordered so that entry `i` is old entry `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            weights: order.iter().map(|&i| self.weights[i]).collect(),
            components: order.iter().map(|&i| self.components[i]).collect(),
        }
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        mixture_log_pdf(self, x)
    }
}

/// `ln Σ_j π_j f_j(x)`, by log-sum-exp.
pub fn mixture_log_pdf(model: &MixtureModel, x: f64) -> Result<f64> {
    model.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("density needs finite x > 0, got {x}")));
    }
    Ok(CompiledMixture::new(model)?.log_pdf(x))
}

/// A mixture with its normalizing constants evaluated once.
#[derive(Clone, Debug)]
pub(crate) struct CompiledMixture {
    log_weights: Vec<f64>,
    kernels: Vec<Multipliers>,
}

impl CompiledMixture {
    pub(crate) fn new(model: &MixtureModel) -> Result<Self> {
        let mut log_weights = Vec::with_capacity(model.k());
        let mut kernels = Vec::with_capacity(model.k());
        for (w, c) in model.weights.iter().zip(&model.components) {
            if *w > 0.0 {
                log_weights.push(w.ln());
                kernels.push(c.multipliers()?);
            }
        }
        Ok(Self {
            log_weights,
            kernels,
        })
    }

    #[inline]
    pub(crate) fn log_pdf(&self, x: f64) -> f64 {
        let ln_x = x.ln();
        let mut terms = [0.0f64; 16];
        let mut heap;
        let terms: &mut [f64] = if self.kernels.len() <= 16 {
            &mut terms[..self.kernels.len()]
        } else {
            heap = vec![0.0; self.kernels.len()];
            &mut heap
        };
        let mut max = f64::NEG_INFINITY;
        for (t, (lw, k)) in terms.iter_mut().zip(self.log_weights.iter().zip(&self.kernels)) {
            *t = lw + k.log_kernel(x, ln_x);
            max = max.max(*t);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    /// Each component's mode and a width from the curvature of its log-density there.
    pub(crate) fn peaks(&self) -> Vec<(f64, f64)> {
        self.kernels.iter().filter_map(kernel_peak).collect()
    }
}

/// Mode and curvature width of `x^(λ₃-1) exp(-λ₁x - λ₂/x)`.
fn kernel_peak(m: &Multipliers) -> Option<(f64, f64)> {
    let (r, s, p) = (m.lambda1, m.lambda2, m.lambda3 - 1.0);
    // Stationary point of p ln x - r x - s/x: r x² - p x - s = 0.
    let mode = if r > 0.0 {
        let disc = (p * p + 4.0 * r * s).sqrt();
        if p >= 0.0 {
            (p + disc) / (2.0 * r)
        } else {
            2.0 * s / (disc - p)
        }
    } else if p < 0.0 {
        s / -p
    } else {
        return None;
    };
    let curvature = p / (mode * mode) + 2.0 * s / (mode * mode * mode);
    (mode > 0.0 && curvature > 0.0 && mode.is_finite()).then(|| (mode, 1.0 / curvature.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> MixtureModel {
        MixtureModel::new(
            vec![0.3, 0.45, 0.25],
            vec![
                FamilyMember::Gig {
                    lambda: -0.5,
                    alpha: 0.8,
                    beta: 3.0,
                },
                FamilyMember::Gig {
                    lambda: 2.0,
                    alpha: 3.0,
                    beta: 2.0,
                },
                FamilyMember::Gig {
                    lambda: 5.0,
                    alpha: 8.0,
                    beta: 4.0,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_component_matches_member() {
        let g = FamilyMember::Gamma {
            shape: 2.5,
            rate: 0.7,
        };
        let m = MixtureModel::single(g).unwrap();
        for x in [0.01, 1.0, 30.0] {
            assert!((m.log_pdf(x).unwrap() - g.log_pdf(x).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn identical_components_collapse() {
        let g = FamilyMember::Hyperbolic {
            alpha: 2.0,
            beta: 1.5,
        };
        let m = MixtureModel::new(vec![0.3, 0.7], vec![g, g]).unwrap();
        for x in [0.1, 2.0, 9.0] {
            assert!((m.log_pdf(x).unwrap() - g.log_pdf(x).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        let g = FamilyMember::Gamma {
            shape: 1.0,
            rate: 1.0,
        };
        let err = MixtureModel::new(vec![0.5, 0.6], vec![g, g]).unwrap_err();
        assert!(err.to_string().contains("weights must sum to 1"));
        assert!(MixtureModel::new(vec![1.0], vec![g, g]).is_err());
        assert!(MixtureModel::new(vec![-0.5, 1.5], vec![g, g]).is_err());
    }

    #[test]
    fn canonical_sorts_by_mean() {
        let m = demo().permuted(&[2, 0, 1]);
        let c = m.canonical();
        assert_eq!(c, demo());
        let means: Vec<f64> = c.components().iter().map(|c| c.arithmetic_mean()).collect();
        assert!(means.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn permutation_leaves_density_unchanged() {
        let m = demo();
        let p = m.permuted(&[1, 2, 0]);
        for x in [0.05, 0.8, 5.0, 40.0] {
            assert_eq!(m.log_pdf(x).unwrap().to_bits(), m.canonical().log_pdf(x).unwrap().to_bits());
            assert!((m.log_pdf(x).unwrap() - p.log_pdf(x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn toml_round_trip() {
        let m = demo();
        let text = toml::to_string(&m).unwrap();
        assert!(text.contains("[[components]]"));
        let back: MixtureModel = toml::from_str(&text).unwrap();
        assert_eq!(back, m);
        let bad = "[[components]]\nweight = 0.5\nkind = \"gamma\"\nshape = 1.0\nrate = 1.0\n";
        assert!(toml::from_str::<MixtureModel>(bad).is_err());
    }

    #[test]
    fn peaks_of_kernels() {
        let g = FamilyMember::Gamma {
            shape: 3.0,
            rate: 2.0,
        };
        let (mode, width) = kernel_peak(&g.multipliers().unwrap()).unwrap();
        assert!((mode - 1.0).abs() < 1e-14);
        assert!((width - (1.0f64 / 2.0).sqrt()).abs() < 1e-14);
        let e = FamilyMember::Gamma {
            shape: 1.0,
            rate: 2.0,
        };
        assert!(kernel_peak(&e.multipliers().unwrap()).is_none());
    }
}
