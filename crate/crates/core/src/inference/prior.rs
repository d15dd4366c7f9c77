use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::data::Histogram;
use crate::error::{Error, Result};
use crate::pythagorean::{FamilyKind, FamilyMember};
use crate::special_fn::{log_gamma_unchecked, ARG_MAX, ARG_MIN, ORDER_MAX};

use super::likelihood::log_likelihood_or_exclude;
use super::model::MixtureModel;

/// Range of one parameter, shared by every component.
///
/// The prior is uniform in the bound's own coordinate: the parameter itself
/// for `linear`, its logarithm for `log`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "snake_case")]
pub enum Bound {
    Linear { lo: f64, hi: f64 },
    Log { lo: f64, hi: f64 },
    Fixed { value: f64 },
}

impl Bound {
    pub fn is_free(&self) -> bool {
        !matches!(self, Bound::Fixed { .. })
    }

    pub fn contains(&self, v: f64) -> bool {
        match *self {
            Bound::Linear { lo, hi } | Bound::Log { lo, hi } => v >= lo && v <= hi,
            Bound::Fixed { value } => v == value,
        }
    }

    /// The parameter in the coordinate where the prior is uniform.
    pub fn to_coord(&self, v: f64) -> f64 {
        match self {
            Bound::Log { .. } => v.ln(),
            _ => v,
        }
    }

    pub fn from_coord(&self, c: f64) -> f64 {
        match *self {
            Bound::Log { lo, hi } => c.exp().clamp(lo, hi),
            Bound::Fixed { value } => value,
            Bound::Linear { .. } => c,
        }
    }

    /// Limits of the uniform coordinate.
    pub fn coord_range(&self) -> (f64, f64) {
        match *self {
            Bound::Linear { lo, hi } => (lo, hi),
            Bound::Log { lo, hi } => (lo.ln(), hi.ln()),
            Bound::Fixed { value } => (value, value),
        }
    }

    fn log_density(&self) -> f64 {
        let (a, b) = self.coord_range();
        if self.is_free() {
            -(b - a).ln()
        } else {
            0.0
        }
    }

    fn validate(&self, name: &str, positive: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::validation(format!("bounds.{name}: {msg}")));
        match *self {
            Bound::Linear { lo, hi } | Bound::Log { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("need finite lo < hi, got [{lo}, {hi}]"));
                }
                if (positive || matches!(self, Bound::Log { .. })) && !(lo > 0.0) {
                    return bad(format!("lower bound must be > 0, got {lo}"));
                }
            }
            Bound::Fixed { value } => {
                if !value.is_finite() || (positive && !(value > 0.0)) {
                    return bad(format!("invalid fixed value {value}"));
                }
            }
        }
        Ok(())
    }

    fn hull(&self) -> (f64, f64) {
        match *self {
            Bound::Linear { lo, hi } | Bound::Log { lo, hi } => (lo, hi),
            Bound::Fixed { value } => (value, value),
        }
    }
}

/// Box prior on component parameters with a symmetric Dirichlet on the weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriorBoxDoc", into = "PriorBoxDoc")]
pub struct PriorBox {
    family: FamilyKind,
    bounds: Vec<Bound>,
    concentration: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PriorBoxDoc {
    family: FamilyKind,
    concentration: f64,
    bounds: BTreeMap<String, Bound>,
}

impl TryFrom<PriorBoxDoc> for PriorBox {
    type Error = Error;

    fn try_from(doc: PriorBoxDoc) -> Result<Self> {
        let names = doc.family.param_names();
        if let Some(extra) = doc.bounds.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::validation(format!(
                "bounds.{extra}: not a {} parameter",
                doc.family.name()
            )));
        }
        let bounds = names
            .iter()
            .map(|n| {
                doc.bounds
                    .get(*n)
                    .copied()
                    .ok_or_else(|| Error::validation(format!("bounds.{n}: missing")))
            })
            .collect::<Result<Vec<_>>>()?;
        PriorBox::new(doc.family, bounds, doc.concentration)
    }
}

impl From<PriorBox> for PriorBoxDoc {
    fn from(p: PriorBox) -> Self {
        let names = p.family.param_names();
        PriorBoxDoc {
            family: p.family,
            concentration: p.concentration,
            bounds: names.iter().map(|n| n.to_string()).zip(p.bounds).collect(),
        }
    }
}

impl PriorBox {
    pub fn new(family: FamilyKind, bounds: Vec<Bound>, concentration: f64) -> Result<Self> {
        let p = Self {
            family,
            bounds,
            concentration,
        };
        p.validate()?;
        Ok(p)
    }

    /// Scale-aware defaults built around the median of the data.
    pub fn default_for(family: FamilyKind, h: &Histogram) -> Self {
        let med = h.median().max(f64::MIN_POSITIVE);
        let scale = Bound::Log {
            lo: 1e-3 * med,
            hi: 1e3 * med,
        };
        let beta = Bound::Log { lo: 1e-4, hi: 1e4 };
        let shape = Bound::Log { lo: 1e-3, hi: 1e3 };
        let bounds = match family {
            FamilyKind::Gig => vec![Bound::Linear { lo: -20.0, hi: 20.0 }, scale, beta],
            FamilyKind::Gamma => vec![
                shape,
                Bound::Log {
                    lo: 1e-3 / med,
                    hi: 1e3 / med,
                },
            ],
            FamilyKind::InverseGamma => vec![shape, scale],
            _ => vec![scale, beta],
        };
        Self {
            family,
            bounds,
            concentration: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let names = self.family.param_names();
        if self.bounds.len() != names.len() {
            return Err(Error::validation(format!(
                "{} needs {} bounds, got {}",
                self.family.name(),
                names.len(),
                self.bounds.len()
            )));
        }
        for (name, b) in names.iter().zip(&self.bounds) {
            let positive = !(self.family == FamilyKind::Gig && *name == "lambda");
            b.validate(name, positive)?;
            let (lo, hi) = b.hull();
            let gig_kind = !matches!(self.family, FamilyKind::Gamma | FamilyKind::InverseGamma);
            if gig_kind && *name == "beta" && (lo < ARG_MIN || hi > ARG_MAX) {
                return Err(Error::Range(format!(
                    "bounds.beta must lie within [{ARG_MIN:e}, {ARG_MAX:e}]"
                )));
            }
            if *name == "lambda" && (lo < -ORDER_MAX || hi > ORDER_MAX) {
                return Err(Error::Range(format!(
                    "bounds.lambda must lie within [-{ORDER_MAX}, {ORDER_MAX}]"
                )));
            }
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::validation(format!(
                "concentration must be > 0, got {}",
                self.concentration
            )));
        }
        Ok(())
    }

    pub fn family(&self) -> FamilyKind {
        self.family
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn bound(&self, name: &str) -> Option<Bound> {
        let i = self.family.param_names().iter().position(|n| *n == name)?;
        Some(self.bounds[i])
    }

    /// Replaces one bound, keeping the box valid.
    pub fn set_bound(&mut self, name: &str, bound: Bound) -> Result<()> {
        let i = self
            .family
            .param_names()
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| {
                Error::validation(format!("bounds.{name}: not a {} parameter", self.family.name()))
            })?;
        let old = std::mem::replace(&mut self.bounds[i], bound);
        if let Err(e) = self.validate() {
            self.bounds[i] = old;
            return Err(e);
        }
        Ok(())
    }

    pub fn set_concentration(&mut self, c: f64) -> Result<()> {
        let old = std::mem::replace(&mut self.concentration, c);
        if let Err(e) = self.validate() {
            self.concentration = old;
            return Err(e);
        }
        Ok(())
    }

    /// Log prior density of a model: uniform in the box coordinates, Dirichlet
    /// on the first `k − 1` weights. `−∞` outside the box.
    pub fn log_prior(&self, model: &MixtureModel) -> f64 {
        if model.components().iter().any(|c| c.kind() != self.family) {
            return f64::NEG_INFINITY;
        }
        let mut total = 0.0;
        for c in model.components() {
            for (b, v) in self.bounds.iter().zip(c.params()) {
                if !b.contains(v) {
                    return f64::NEG_INFINITY;
                }
                total += b.log_density();
            }
        }
        total + log_dirichlet(model.weights(), self.concentration)
    }

    /// An independent draw from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> MixtureModel {
        let components = (0..k)
            .map(|_| {
                let p: Vec<f64> = self
                    .bounds
                    .iter()
                    .map(|b| {
                        let (a, z) = b.coord_range();
                        b.from_coord(a + (z - a) * rng.random::<f64>())
                    })
                    .collect();
                FamilyMember::from_params(self.family, &p).expect("box lies inside the domain")
            })
            .collect();
        let gamma = Gamma::new(self.concentration, 1.0).expect("validated concentration");
        let mut weights: Vec<f64> = loop {
            let g: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
            let s: f64 = g.iter().sum();
            if s > 0.0 && s.is_finite() {
                break g.into_iter().map(|x| x / s).collect();
            }
        };
        let head: f64 = weights[..k - 1].iter().sum();
        weights[k - 1] = (1.0 - head).max(0.0);
        MixtureModel::new(weights, components).expect("prior draws are valid models")
    }
}

fn log_dirichlet(w: &[f64], c: f64) -> f64 {
    let k = w.len() as f64;
    let mut v = log_gamma_unchecked(k * c) - k * log_gamma_unchecked(c);
    if c != 1.0 {
        v += (c - 1.0) * w.iter().map(|x| x.ln()).sum::<f64>();
    }
    v
}

/// Unnormalized log posterior: log prior plus multinomial log-likelihood.
pub fn log_posterior(model: &MixtureModel, h: &Histogram, prior: &PriorBox) -> f64 {
    let lp = prior.log_prior(model);
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    lp + log_likelihood_or_exclude(model, h)
}

/// Unconstrained coordinates of a mixture under a box prior: the free box
/// coordinates of each component followed by `k − 1` stick-breaking logits.
#[derive(Clone, Debug)]
pub(crate) struct StateMap {
    pub k: usize,
    pub prior: PriorBox,
    free: Vec<usize>,
}

impl StateMap {
    pub fn new(k: usize, prior: &PriorBox) -> Self {
        let free = (0..prior.bounds.len()).filter(|&i| prior.bounds[i].is_free()).collect();
        Self {
            k,
            prior: prior.clone(),
            free,
        }
    }

    pub fn dim(&self) -> usize {
        self.k * self.free.len() + self.k - 1
    }

    pub fn to_state(&self, model: &MixtureModel) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.dim());
        for c in model.components() {
            let p = c.params();
            for &i in &self.free {
                s.push(self.prior.bounds[i].to_coord(p[i]));
            }
        }
        let mut rest = 1.0;
        for &w in &model.weights()[..self.k - 1] {
            let frac = if rest > 0.0 { w / rest } else { 0.5 };
            let frac = frac.clamp(1e-12, 1.0 - 1e-12);
            s.push((frac / (1.0 - frac)).ln());
            rest -= w;
        }
        s
    }

    /// The model at a state, or `None` outside the box.
    pub fn to_model(&self, s: &[f64]) -> Option<MixtureModel> {
        let m = self.free.len();
        let mut components = Vec::with_capacity(self.k);
        for j in 0..self.k {
            let mut p: Vec<f64> = self
                .prior
                .bounds
                .iter()
                .map(|b| match b {
                    Bound::Fixed { value } => *value,
                    _ => f64::NAN,
                })
                .collect();
            for (slot, &i) in self.free.iter().enumerate() {
                let b = self.prior.bounds[i];
                let (a, z) = b.coord_range();
                let c = s[j * m + slot];
                if !(c >= a && c <= z) {
                    return None;
                }
                p[i] = b.from_coord(c);
            }
            components.push(FamilyMember::from_params(self.prior.family, &p).ok()?);
        }
        let weights = stick_weights(&s[self.k * m..]);
        MixtureModel::new(weights, components).ok()
    }

    /// `ln |∂(π₁..π_{k−1}) / ∂(logits)|`.
    pub fn log_jacobian(&self, s: &[f64]) -> f64 {
        let logits = &s[self.k * self.free.len()..];
        let mut total = 0.0;
        let mut log_rest = 0.0;
        for &z in logits {
            let (ls, l1s) = log_sigmoid_pair(z);
            total += ls + l1s + log_rest;
            log_rest += l1s;
        }
        total
    }
}

/// `(ln σ(z), ln(1 − σ(z)))` without overflow.
fn log_sigmoid_pair(z: f64) -> (f64, f64) {
    let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    (-softplus(-z), -softplus(z))
}

fn stick_weights(logits: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(logits.len() + 1);
    let mut rest = 1.0;
    for &z in logits {
        let s = 1.0 / (1.0 + (-z).exp());
        let piece = rest * s;
        w.push(piece);
        rest -= piece;
    }
    w.push(rest.max(0.0));
    w
}
