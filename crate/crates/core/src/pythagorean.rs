//! The Pythagorean family: MaxEnt densities conserving the arithmetic,
//! geometric and harmonic means under a flat prior on `(0, ∞)`.
//!
//! With all three means conserved the density is the generalized inverse
//! Gaussian
//!
//! ```text
//! f(x; λ, α, β) = (x/α)^(λ-1) exp(-β/2 (x/α + α/x)) / (2α K_λ(β))
//! ```
//!
//! Dropping the harmonic-mean constraint gives the gamma density, dropping
//! the arithmetic-mean constraint the inverse gamma. The inverse Gaussian,
//! reciprocal inverse Gaussian and hyperbolic densities are GIG with the
//! order pinned to -1/2, +1/2 and 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxent::Multipliers;
use crate::special_fn::{
    dlog_bessel_k_dorder, digamma, log_bessel_k, log_gamma_unchecked,
};

/// Order, scale and concentration of a GIG density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GigParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GigParams {
    pub fn new(lambda: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            lambda,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::validation(format!("GIG lambda must be finite, got {}", self.lambda)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::validation(format!("GIG alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::validation(format!("GIG beta must be > 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Arithmetic (`mu`), geometric (`gamma_mean`) and harmonic (`eta`) means.
///
/// `mu` is `+inf` and `eta` is `0` when the corresponding expectation diverges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PythagoreanMeans {
    pub mu: f64,
    pub gamma_mean: f64,
    pub eta: f64,
}

impl PythagoreanMeans {
    pub fn log_gamma(&self) -> f64 {
        self.gamma_mean.ln()
    }

    pub fn inv_eta(&self) -> f64 {
        1.0 / self.eta
    }
}

/// Named members of the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gig,
    Gamma,
    InverseGamma,
    InverseGaussian,
    ReciprocalInverseGaussian,
    Hyperbolic,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::Gig,
        FamilyKind::Gamma,
        FamilyKind::InverseGamma,
        FamilyKind::InverseGaussian,
        FamilyKind::ReciprocalInverseGaussian,
        FamilyKind::Hyperbolic,
    ];

    /// Parameter names in the order used by [`FamilyMember::params`].
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyKind::Gig => &["lambda", "alpha", "beta"],
            FamilyKind::Gamma => &["shape", "rate"],
            FamilyKind::InverseGamma => &["shape", "scale"],
            FamilyKind::InverseGaussian
            | FamilyKind::ReciprocalInverseGaussian
            | FamilyKind::Hyperbolic => &["alpha", "beta"],
        }
    }

    /// GIG order for the fixed-order sub-classes.
    pub fn fixed_order(self) -> Option<f64> {
        match self {
            FamilyKind::InverseGaussian => Some(-0.5),
            FamilyKind::ReciprocalInverseGaussian => Some(0.5),
            FamilyKind::Hyperbolic => Some(0.0),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Gig => "gig",
            FamilyKind::Gamma => "gamma",
            FamilyKind::InverseGamma => "inverse_gamma",
            FamilyKind::InverseGaussian => "inverse_gaussian",
            FamilyKind::ReciprocalInverseGaussian => "reciprocal_inverse_gaussian",
            FamilyKind::Hyperbolic => "hyperbolic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// A single component density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyMember {
    Gig { lambda: f64, alpha: f64, beta: f64 },
    Gamma { shape: f64, rate: f64 },
    InverseGamma { shape: f64, scale: f64 },
    InverseGaussian { alpha: f64, beta: f64 },
    ReciprocalInverseGaussian { alpha: f64, beta: f64 },
    Hyperbolic { alpha: f64, beta: f64 },
}

impl From<GigParams> for FamilyMember {
    fn from(p: GigParams) -> Self {
        FamilyMember::Gig {
            lambda: p.lambda,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl FamilyMember {
    pub fn kind(&self) -> FamilyKind {
        match self {
            FamilyMember::Gig { .. } => FamilyKind::Gig,
            FamilyMember::Gamma { .. } => FamilyKind::Gamma,
            FamilyMember::InverseGamma { .. } => FamilyKind::InverseGamma,
            FamilyMember::InverseGaussian { .. } => FamilyKind::InverseGaussian,
            FamilyMember::ReciprocalInverseGaussian { .. } => FamilyKind::ReciprocalInverseGaussian,
            FamilyMember::Hyperbolic { .. } => FamilyKind::Hyperbolic,
        }
    }

    /// Builds a member from its parameter vector (see [`FamilyKind::param_names`]).
    pub fn from_params(kind: FamilyKind, p: &[f64]) -> Result<Self> {
        let n = kind.param_names().len();
        if p.len() != n {
            return Err(Error::validation(format!(
                "{} takes {n} parameters, got {}",
                kind.name(),
                p.len()
            )));
        }
        let m = match kind {
            FamilyKind::Gig => FamilyMember::Gig {
                lambda: p[0],
                alpha: p[1],
                beta: p[2],
            },
            FamilyKind::Gamma => FamilyMember::Gamma {
                shape: p[0],
                rate: p[1],
            },
            FamilyKind::InverseGamma => FamilyMember::InverseGamma {
                shape: p[0],
                scale: p[1],
            },
            FamilyKind::InverseGaussian => FamilyMember::InverseGaussian {
                alpha: p[0],
                beta: p[1],
            },
            FamilyKind::ReciprocalInverseGaussian => FamilyMember::ReciprocalInverseGaussian {
                alpha: p[0],
                beta: p[1],
            },
            FamilyKind::Hyperbolic => FamilyMember::Hyperbolic {
                alpha: p[0],
                beta: p[1],
            },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            FamilyMember::Gig {
                lambda,
                alpha,
                beta,
            } => vec![lambda, alpha, beta],
            FamilyMember::Gamma { shape, rate } => vec![shape, rate],
            FamilyMember::InverseGamma { shape, scale } => vec![shape, scale],
            FamilyMember::InverseGaussian { alpha, beta }
            | FamilyMember::ReciprocalInverseGaussian { alpha, beta }
            | FamilyMember::Hyperbolic { alpha, beta } => vec![alpha, beta],
        }
    }

    /// The GIG parameters for GIG-kind members.
    pub fn as_gig(&self) -> Option<GigParams> {
        let order = self.kind().fixed_order();
        match *self {
            FamilyMember::Gig {
                lambda,
                alpha,
                beta,
            } => Some(GigParams {
                lambda,
                alpha,
                beta,
            }),
            FamilyMember::InverseGaussian { alpha, beta }
            | FamilyMember::ReciprocalInverseGaussian { alpha, beta }
            | FamilyMember::Hyperbolic { alpha, beta } => Some(GigParams {
                lambda: order.unwrap_or(0.0),
                alpha,
                beta,
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!(
                    "{} {name} must be > 0, got {v}",
                    self.kind().name()
                )))
            }
        };
        match *self {
            FamilyMember::Gamma { shape, rate } => {
                positive("shape", shape)?;
                positive("rate", rate)
            }
            FamilyMember::InverseGamma { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            _ => self.as_gig().map_or(Ok(()), |g| g.validate()),
        }
    }

    /// The member as Lagrange multipliers of the flat-prior MaxEnt density.
    pub fn multipliers(&self) -> Result<Multipliers> {
        self.validate()?;
        Ok(match *self {
            FamilyMember::Gamma { shape, rate } => Multipliers {
                lambda0: log_gamma_unchecked(shape) - shape * rate.ln(),
                lambda1: rate,
                lambda2: 0.0,
                lambda3: shape,
            },
            FamilyMember::InverseGamma { shape, scale } => Multipliers {
                lambda0: log_gamma_unchecked(shape) - shape * scale.ln(),
                lambda1: 0.0,
                lambda2: scale,
                lambda3: -shape,
            },
            _ => multipliers_from_gig(&self.as_gig().expect("GIG-kind member"))?,
        })
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        family_log_pdf(self, x)
    }

    pub fn means(&self) -> Result<PythagoreanMeans> {
        self.validate()?;
        match *self {
            FamilyMember::Gamma { shape, rate } => Ok(PythagoreanMeans {
                mu: shape / rate,
                gamma_mean: (digamma(shape)? - rate.ln()).exp(),
                eta: if shape > 1.0 { (shape - 1.0) / rate } else { 0.0 },
            }),
            FamilyMember::InverseGamma { shape, scale } => Ok(PythagoreanMeans {
                mu: if shape > 1.0 {
                    scale / (shape - 1.0)
                } else {
                    f64::INFINITY
                },
                gamma_mean: (scale.ln() - digamma(shape)?).exp(),
                eta: scale / shape,
            }),
            _ => gig_means(&self.as_gig().expect("GIG-kind member")),
        }
    }

    /// Arithmetic mean, the key of the canonical component ordering.
    pub fn arithmetic_mean(&self) -> f64 {
        match *self {
            FamilyMember::Gamma { shape, rate } => shape / rate,
            FamilyMember::InverseGamma { shape, scale } => {
                if shape > 1.0 {
                    scale / (shape - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            _ => {
                let g = self.as_gig().expect("GIG-kind member");
                match gig_log_mean_ratio(&g) {
                    Ok(r) => g.alpha * r.exp(),
                    Err(_) => f64::NAN,
                }
            }
        }
    }

    /// Concentration-like tie breaker: β for GIG kinds, shape otherwise.
    pub fn concentration(&self) -> f64 {
        match *self {
            FamilyMember::Gamma { shape, .. } | FamilyMember::InverseGamma { shape, .. } => shape,
            _ => self.as_gig().map_or(f64::NAN, |g| g.beta),
        }
    }

    /// Order-like tie breaker: λ for GIG kinds, the `x` exponent plus one otherwise.
    pub fn order(&self) -> f64 {
        match *self {
            FamilyMember::Gamma { shape, .. } => shape,
            FamilyMember::InverseGamma { shape, .. } => -shape,
            _ => self.as_gig().map_or(f64::NAN, |g| g.lambda),
        }
    }
}

fn gig_log_mean_ratio(p: &GigParams) -> Result<f64> {
    Ok(log_bessel_k(p.lambda + 1.0, p.beta)? - log_bessel_k(p.lambda, p.beta)?)
}

/// `ln f(x; λ, α, β)` of the GIG density.
pub fn gig_log_pdf(params: &GigParams, x: f64) -> Result<f64> {
    params.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("density needs finite x > 0, got {x}")));
    }
    let GigParams {
        lambda,
        alpha,
        beta,
    } = *params;
    let r = x / alpha;
    Ok(-(2.0 * alpha).ln() - log_bessel_k(lambda, beta)? + (lambda - 1.0) * r.ln()
        - 0.5 * beta * (r + 1.0 / r))
}

/// Log-density of any family member.
pub fn family_log_pdf(member: &FamilyMember, x: f64) -> Result<f64> {
    member.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("density needs finite x > 0, got {x}")));
    }
    match *member {
        FamilyMember::Gamma { shape, rate } => Ok(shape * rate.ln() - log_gamma_unchecked(shape)
            + (shape - 1.0) * x.ln()
            - rate * x),
        FamilyMember::InverseGamma { shape, scale } => Ok(shape * scale.ln()
            - log_gamma_unchecked(shape)
            - (shape + 1.0) * x.ln()
            - scale / x),
        _ => gig_log_pdf(&member.as_gig().expect("GIG-kind member"), x),
    }
}

/// Closed-form Pythagorean means of a GIG density:
/// `μ = α K_{λ+1}(β)/K_λ(β)`, `η = α K_λ(β)/K_{λ-1}(β)`,
/// `ln γ = ln α + ∂_ν ln K_ν(β)|_{ν=λ}`.
pub fn gig_means(params: &GigParams) -> Result<PythagoreanMeans> {
    params.validate()?;
    let GigParams {
        lambda,
        alpha,
        beta,
    } = *params;
    let k = log_bessel_k(lambda, beta)?;
    let k_up = log_bessel_k(lambda + 1.0, beta)?;
    let k_down = log_bessel_k(lambda - 1.0, beta)?;
    Ok(PythagoreanMeans {
        mu: alpha * (k_up - k).exp(),
        gamma_mean: alpha * dlog_bessel_k_dorder(lambda, beta)?.exp(),
        eta: alpha * (k - k_down).exp(),
    })
}

/// Lagrange multipliers of a GIG density:
/// `λ₁ = β/(2α)`, `λ₂ = αβ/2`, `λ₃ = λ`, and `λ₀ = ln(2 α^λ K_λ(β))`,
/// the log partition function of the flat-prior MaxEnt density.
pub fn multipliers_from_gig(params: &GigParams) -> Result<Multipliers> {
    params.validate()?;
    let GigParams {
        lambda,
        alpha,
        beta,
    } = *params;
    Ok(Multipliers {
        lambda0: std::f64::consts::LN_2 + lambda * alpha.ln() + log_bessel_k(lambda, beta)?,
        lambda1: beta / (2.0 * alpha),
        lambda2: beta * alpha / 2.0,
        lambda3: lambda,
    })
}

/// Inverse of [`multipliers_from_gig`]: `α = sqrt(λ₂/λ₁)`, `β = 2 sqrt(λ₁λ₂)`.
pub fn gig_from_multipliers(m: &Multipliers) -> Result<GigParams> {
    if !(m.lambda1 > 0.0 && m.lambda2 > 0.0) {
        return Err(Error::domain(format!(
            "GIG needs lambda1 > 0 and lambda2 > 0, got {} and {}",
            m.lambda1, m.lambda2
        )));
    }
    GigParams::new(
        m.lambda3,
        (m.lambda2 / m.lambda1).sqrt(),
        2.0 * (m.lambda1 * m.lambda2).sqrt(),
    )
}

/// Differential entropy `-∫ f ln f dx` of a GIG density (flat prior),
/// `S = λ₀ + λ₁ μ + λ₂/η - (λ₃ - 1) ln γ`.
pub fn gig_entropy(params: &GigParams, prior_is_uniform: bool) -> Result<f64> {
    if !prior_is_uniform {
        return Err(Error::validation(
            "closed-form entropy needs the flat prior; use maxent::relative_entropy for tabulated priors",
        ));
    }
    let m = multipliers_from_gig(params)?;
    let means = gig_means(params)?;
    Ok(m.lambda0 + m.lambda1 * means.mu + m.lambda2 / means.eta
        - (m.lambda3 - 1.0) * means.log_gamma())
}
