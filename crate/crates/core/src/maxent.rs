//! MaxEnt densities under conserved Pythagorean means.
//!
//! For a prior `q` the density maximizing the relative entropy subject to
//! conserved `E[x]`, `E[ln x]` and `E[1/x]` is
//!
//! ```text
//! f(x) = q(x) x^(λ₃-1) exp(-λ₀ - λ₁x - λ₂/x)
//! ```
//!
//! The multipliers are found by minimizing the convex dual
//! `λ₀(λ) + λ₁μ* + λ₂/η* - (λ₃-1) ln γ*` with a safeguarded Newton iteration.
//! Gradient and Hessian are the moment residuals and the moment covariance,
//! both integrated on the log scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pythagorean::{gig_from_multipliers, GigParams, PythagoreanMeans};
use crate::quad::{locate_log_mass, QuadOptions, WindowError};
use crate::special_fn::{bessel_k_unchecked, log_gamma_unchecked, ARG_MAX, ARG_MIN, ORDER_MAX};

/// Lagrange multipliers; `lambda0` is the log partition function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl Multipliers {
    /// Multipliers without a partition function (`lambda0 = 0`).
    pub fn unnormalized(lambda1: f64, lambda2: f64, lambda3: f64) -> Self {
        Self {
            lambda0: 0.0,
            lambda1,
            lambda2,
            lambda3,
        }
    }

    /// Log-density under the flat prior; no validation.
    #[inline]
    pub fn log_kernel(&self, x: f64, ln_x: f64) -> f64 {
        -self.lambda0 + (self.lambda3 - 1.0) * ln_x - self.lambda1 * x - self.lambda2 / x
    }

    /// Whether the flat-prior density on `(0, ∞)` can be normalized.
    pub fn normalizable_uniform(&self) -> bool {
        let (l1, l2, l3) = (self.lambda1, self.lambda2, self.lambda3);
        (l1 > 0.0 && l2 > 0.0) || (l1 > 0.0 && l2 == 0.0 && l3 > 0.0) || (l1 == 0.0 && l2 > 0.0 && l3 < 0.0)
    }

    /// The GIG parameters, when both `lambda1` and `lambda2` are positive.
    pub fn to_gig(&self) -> Option<GigParams> {
        gig_from_multipliers(self).ok()
    }
}

/// A prior tabulated on knots, interpolated linearly and zero outside the knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPrior {
    knots: Vec<(f64, f64)>,
}

impl TabulatedPrior {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::validation("tabulated prior needs at least 2 knots"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::validation("tabulated prior knots must be strictly increasing"));
            }
        }
        if knots.iter().any(|&(x, q)| !(x >= 0.0 && x.is_finite() && q >= 0.0 && q.is_finite())) {
            return Err(Error::validation(
                "tabulated prior needs finite knots x >= 0 with q(x) >= 0",
            ));
        }
        if knots.iter().all(|&(_, q)| q == 0.0) {
            return Err(Error::validation("tabulated prior is identically zero"));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        let i = self.knots.partition_point(|&(k, _)| k <= x).clamp(1, self.knots.len() - 1);
        let (x0, q0) = self.knots[i - 1];
        let (x1, q1) = self.knots[i];
        q0 + (q1 - q0) * (x - x0) / (x1 - x0)
    }
}

/// The reference measure `q` of the relative entropy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    UniformImproper,
    Tabulated(TabulatedPrior),
}

impl PriorSpec {
    fn log_q(&self, x: f64) -> f64 {
        match self {
            PriorSpec::UniformImproper => 0.0,
            PriorSpec::Tabulated(t) => t.density(x).ln(),
        }
    }

    fn u_range(&self) -> (f64, f64) {
        match self {
            PriorSpec::UniformImproper => (f64::NEG_INFINITY, f64::INFINITY),
            PriorSpec::Tabulated(t) => {
                let (lo, hi) = t.support();
                (lo.ln(), hi.ln())
            }
        }
    }

    fn hints(&self) -> Vec<f64> {
        match self {
            PriorSpec::UniformImproper => Vec::new(),
            PriorSpec::Tabulated(t) => t.knots.iter().filter(|k| k.0 > 0.0).map(|k| k.0.ln()).collect(),
        }
    }
}

/// Conserved means to reproduce; absent targets release the matching multiplier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub target_mu: Option<f64>,
    pub target_log_gamma: Option<f64>,
    pub target_inv_eta: Option<f64>,
}

const FEASIBILITY_TOL: f64 = 1e-12;

impl ConstraintSet {
    pub fn from_means(m: &PythagoreanMeans) -> Self {
        Self {
            target_mu: Some(m.mu),
            target_log_gamma: Some(m.log_gamma()),
            target_inv_eta: Some(m.inv_eta()),
        }
    }

    /// Checks presence, positivity, and the harmonic ≤ geometric ≤ arithmetic ordering.
    pub fn validate(&self) -> Result<()> {
        if self.target_mu.is_none() && self.target_log_gamma.is_none() && self.target_inv_eta.is_none() {
            return Err(Error::validation("at least one target mean is required"));
        }
        if let Some(mu) = self.target_mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::validation(format!("arithmetic mean must be > 0, got {mu}")));
            }
        }
        if let Some(t) = self.target_inv_eta {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::validation(format!("inverse harmonic mean must be > 0, got {t}")));
            }
        }
        if let Some(lg) = self.target_log_gamma {
            if !lg.is_finite() {
                return Err(Error::validation("log geometric mean must be finite"));
            }
        }
        let log_mu = self.target_mu.map(f64::ln);
        let log_eta = self.target_inv_eta.map(|t| -t.ln());
        let ordered = |lo: f64, hi: f64| hi - lo > FEASIBILITY_TOL;
        let infeasible = |what: &str| {
            Err(Error::NoSolution(format!(
                "{what}: targets must satisfy harmonic < geometric < arithmetic mean"
            )))
        };
        if let (Some(e), Some(m)) = (log_eta, log_mu) {
            if !ordered(e, m) {
                return infeasible("harmonic mean exceeds arithmetic mean");
            }
        }
        if let (Some(g), Some(m)) = (self.target_log_gamma, log_mu) {
            if !ordered(g, m) {
                return infeasible("geometric mean exceeds arithmetic mean");
            }
        }
        if let (Some(e), Some(g)) = (log_eta, self.target_log_gamma) {
            if !ordered(e, g) {
                return infeasible("harmonic mean exceeds geometric mean");
            }
        }
        Ok(())
    }
}

/// Log partition function and the first two moments of `(x, 1/x, ln x)`.
#[derive(Clone, Copy, Debug)]
pub struct Moments {
    pub log_z: f64,
    pub mean_x: f64,
    pub mean_inv_x: f64,
    pub mean_ln_x: f64,
    /// Covariance of `(x, 1/x, ln x)`.
    pub cov: [[f64; 3]; 3],
}

const MOMENT_OPTS: QuadOptions = QuadOptions {
    abs_tol: 0.0,
    rel_tol: 1e-12,
    max_panels: 1500,
};

fn window_error(e: WindowError, l1: f64, l2: f64, l3: f64) -> Error {
    match e {
        WindowError::Divergent => Error::NonNormalizable(format!(
            "partition integral diverges for lambda1={l1}, lambda2={l2}, lambda3={l3}"
        )),
        WindowError::NoMass => Error::NonNormalizable(format!(
            "density has no mass for lambda1={l1}, lambda2={l2}, lambda3={l3}"
        )),
    }
}

/// Moments of the MaxEnt density for `(λ₁, λ₂, λ₃)` under `prior`, by quadrature.
pub fn moments(prior: &PriorSpec, lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Moments> {
    if let PriorSpec::UniformImproper = prior {
        let m = Multipliers::unnormalized(lambda1, lambda2, lambda3);
        if !m.normalizable_uniform() {
            return Err(Error::NonNormalizable(format!(
                "flat prior needs lambda1, lambda2 > 0, or a gamma / inverse-gamma limit; \
                 got lambda1={lambda1}, lambda2={lambda2}, lambda3={lambda3}"
            )));
        }
    }
    let log_f = |u: f64| {
        let x = u.exp();
        prior.log_q(x) + lambda3 * u - lambda1 * x - lambda2 / x
    };
    let (lo, hi) = prior.u_range();
    let w = locate_log_mass(log_f, lo, hi, &prior.hints())
        .map_err(|e| window_error(e, lambda1, lambda2, lambda3))?;
    let uc = w.peak;
    let xc = uc.exp();
    // Features centred at the peak to limit cancellation in the covariance.
    let r = w.integrate_vec(
        |u| {
            let wt = (log_f(u) - w.log_peak).exp();
            if wt == 0.0 {
                return [0.0; 10];
            }
            let x = u.exp();
            let a = x / xc - 1.0;
            let b = xc / x - 1.0;
            let c = u - uc;
            [
                wt,
                wt * a,
                wt * b,
                wt * c,
                wt * a * a,
                wt * b * b,
                wt * c * c,
                wt * a * b,
                wt * a * c,
                wt * b * c,
            ]
        },
        MOMENT_OPTS,
    );
    let z = r.value[0];
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::NonNormalizable("partition integral is not positive".into()));
    }
    let e = |i: usize| r.value[i] / z;
    let (ea, eb, ec) = (e(1), e(2), e(3));
    let caa = e(4) - ea * ea;
    let cbb = e(5) - eb * eb;
    let ccc = e(6) - ec * ec;
    let cab = e(7) - ea * eb;
    let cac = e(8) - ea * ec;
    let cbc = e(9) - eb * ec;
    // Undo the scaling: x = xc (1 + a), 1/x = (1 + b)/xc, ln x = uc + c.
    let cov = [
        [xc * xc * caa, cab, xc * cac],
        [cab, cbb / (xc * xc), cbc / xc],
        [xc * cac, cbc / xc, ccc],
    ];
    Ok(Moments {
        log_z: w.log_peak + z.ln(),
        mean_x: xc * (1.0 + ea),
        mean_inv_x: (1.0 + eb) / xc,
        mean_ln_x: uc + ec,
        cov,
    })
}

/// `λ₀ = ln ∫ q(x) x^(λ₃-1) exp(-λ₁x - λ₂/x) dx`.
///
/// The flat prior uses the Bessel closed form `ln(2 (λ₂/λ₁)^(λ₃/2) K_λ₃(2√(λ₁λ₂)))`
/// when it applies, and the gamma / inverse-gamma integrals on the boundary.
pub fn log_partition(prior: &PriorSpec, lambda1: f64, lambda2: f64, lambda3: f64) -> Result<f64> {
    if ![lambda1, lambda2, lambda3].iter().all(|v| v.is_finite()) {
        return Err(Error::domain("multipliers must be finite"));
    }
    if let PriorSpec::UniformImproper = prior {
        let m = Multipliers::unnormalized(lambda1, lambda2, lambda3);
        if !m.normalizable_uniform() {
            return Err(Error::NonNormalizable(format!(
                "flat prior with lambda1={lambda1}, lambda2={lambda2}, lambda3={lambda3}"
            )));
        }
        if lambda2 == 0.0 {
            return Ok(log_gamma_unchecked(lambda3) - lambda3 * lambda1.ln());
        }
        if lambda1 == 0.0 {
            return Ok(log_gamma_unchecked(-lambda3) + lambda3 * lambda2.ln());
        }
        let beta = 2.0 * (lambda1 * lambda2).sqrt();
        if (ARG_MIN..=ARG_MAX).contains(&beta) && lambda3.abs() <= ORDER_MAX {
            let log_ratio = lambda2.ln() - lambda1.ln();
            return Ok(std::f64::consts::LN_2
                + 0.5 * lambda3 * log_ratio
                + bessel_k_unchecked(lambda3.abs(), beta).log_value);
        }
    }
    moments(prior, lambda1, lambda2, lambda3).map(|m| m.log_z)
}

/// `ln f(x)` of the MaxEnt density.
pub fn maxent_log_pdf(prior: &PriorSpec, m: &Multipliers, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("density needs finite x > 0, got {x}")));
    }
    if let PriorSpec::Tabulated(t) = prior {
        let (lo, hi) = t.support();
        if x < lo || x > hi {
            return Err(Error::domain(format!("x = {x} outside prior support [{lo}, {hi}]")));
        }
    }
    Ok(prior.log_q(x) + m.log_kernel(x, x.ln()))
}

/// Relative entropy `S[f, q] = -∫ f ln(f/q)` of the MaxEnt density.
pub fn relative_entropy(prior: &PriorSpec, m: &Multipliers) -> Result<f64> {
    let mo = moments(prior, m.lambda1, m.lambda2, m.lambda3)?;
    Ok(mo.log_z + m.lambda1 * mo.mean_x + m.lambda2 * mo.mean_inv_x - (m.lambda3 - 1.0) * mo.mean_ln_x)
}

/// Diagnostics from [`solve_multipliers_traced`].
#[derive(Clone, Debug)]
pub struct Solution {
    pub multipliers: Multipliers,
    pub iterations: usize,
    /// Dual objective after each accepted step, starting with the initial point.
    pub dual_history: Vec<f64>,
    /// Largest relative moment residual at the solution.
    pub residual: f64,
}

/// Relative accuracy to which the solved density reproduces each target.
pub const SOLVE_TOL: f64 = 1e-10;
/// Upper limit on Newton iterations.
pub const MAX_NEWTON: usize = 100;

#[derive(Clone, Copy)]
struct Active {
    mu: bool,
    inv_eta: bool,
    log_gamma: bool,
}

impl Active {
    fn indices(&self) -> Vec<usize> {
        [self.mu, self.inv_eta, self.log_gamma]
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(|(i, _)| i)
            .collect()
    }
}

struct Eval {
    dual: f64,
    grad: [f64; 3],
    moments: Moments,
}

fn evaluate(prior: &PriorSpec, c: &ConstraintSet, lam: [f64; 3]) -> Result<Eval> {
    let mo = moments(prior, lam[0], lam[1], lam[2])?;
    let mu = c.target_mu.unwrap_or(0.0);
    let te = c.target_inv_eta.unwrap_or(0.0);
    let lg = c.target_log_gamma.unwrap_or(0.0);
    let dual = mo.log_z + lam[0] * mu + lam[1] * te - (lam[2] - 1.0) * lg;
    Ok(Eval {
        dual,
        grad: [mu - mo.mean_x, te - mo.mean_inv_x, mo.mean_ln_x - lg],
        moments: mo,
    })
}

fn residual(c: &ConstraintSet, mo: &Moments) -> f64 {
    let mut r: f64 = 0.0;
    if let Some(mu) = c.target_mu {
        r = r.max(((mo.mean_x - mu) / mu).abs());
    }
    if let Some(t) = c.target_inv_eta {
        r = r.max(((mo.mean_inv_x - t) / t).abs());
    }
    if let Some(lg) = c.target_log_gamma {
        // Relative in γ itself, which stays meaningful when ln γ ≈ 0.
        r = r.max((mo.mean_ln_x - lg).abs());
    }
    r
}

fn ln_k(nu: f64, beta: f64) -> f64 {
    bessel_k_unchecked(nu.abs(), beta).log_value
}

/// GIG multipliers whose means approximately match all three targets.
///
/// For a fixed order the arithmetic and harmonic means pin `β` (through
/// `K_{λ+1} K_{λ-1} / K_λ²`, which falls as `β` grows) and then `α`; the
/// geometric mean then rises with the order, so two nested bisections suffice.
fn gig_start(mu: f64, inv_eta: f64, log_gamma: f64) -> [f64; 3] {
    let gap_target = (mu * inv_eta).ln();
    let fit = |lambda: f64| {
        let gap = |lb: f64| {
            let b = lb.exp();
            ln_k(lambda + 1.0, b) + ln_k(lambda - 1.0, b) - 2.0 * ln_k(lambda, b)
        };
        let (mut lo, mut hi) = (1e-4f64.ln(), 1e4f64.ln());
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > gap_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let beta = (0.5 * (lo + hi)).exp();
        let alpha = mu * (ln_k(lambda, beta) - ln_k(lambda + 1.0, beta)).exp();
        let h = 1e-5;
        let lg = alpha.ln() + (ln_k(lambda + h, beta) - ln_k(lambda - h, beta)) / (2.0 * h);
        (alpha, beta, lg)
    };
    // Beyond |λ| = 1/(1 - e^{-gap}) even β → 0 cannot reach the gap: the
    // gamma and inverse-gamma limits have μ/η = |λ|/(|λ| - 1).
    let reach = (1.0 / -(-gap_target).exp_m1()).min(40.0);
    let (mut lo, mut hi) = (-reach, reach);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if fit(mid).2 < log_gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let (alpha, beta, _) = fit(lambda);
    [beta / (2.0 * alpha), alpha * beta / 2.0, lambda]
}

fn default_init(prior: &PriorSpec, c: &ConstraintSet) -> [f64; 3] {
    if let (PriorSpec::UniformImproper, Some(mu), Some(te), Some(lg)) =
        (prior, c.target_mu, c.target_inv_eta, c.target_log_gamma)
    {
        let start = gig_start(mu, te, lg);
        if start.iter().all(|v| v.is_finite()) && start[0] > 0.0 && start[1] > 0.0 {
            return start;
        }
    }
    match (c.target_mu, c.target_inv_eta, c.target_log_gamma) {
        (Some(mu), None, _) => [1.0 / mu, 0.0, 1.0],
        (Some(mu), Some(te), _) => [1.0 / mu, 1.0 / te, 1.0],
        // Inverse gamma with shape 2 and the requested harmonic mean.
        (None, Some(te), _) => [0.0, 2.0 / te, -2.0],
        (None, None, _) => [1.0, 0.0, 1.0],
    }
}

/// Solves for the multipliers reproducing the targets; see [`solve_multipliers_traced`].
pub fn solve_multipliers(
    prior: &PriorSpec,
    constraints: &ConstraintSet,
    init: Option<Multipliers>,
) -> Result<Multipliers> {
    solve_multipliers_traced(prior, constraints, init).map(|s| s.multipliers)
}

/// Safeguarded Newton minimization of the dual.
///
/// Absent targets pin their multiplier: no arithmetic mean → `λ₁ = 0`, no
/// harmonic mean → `λ₂ = 0`, no geometric mean → `λ₃ = 1`.
pub fn solve_multipliers_traced(
    prior: &PriorSpec,
    constraints: &ConstraintSet,
    init: Option<Multipliers>,
) -> Result<Solution> {
    constraints.validate()?;
    let active = Active {
        mu: constraints.target_mu.is_some(),
        inv_eta: constraints.target_inv_eta.is_some(),
        log_gamma: constraints.target_log_gamma.is_some(),
    };
    let idx = active.indices();
    let mut lam = match init {
        Some(m) => [m.lambda1, m.lambda2, m.lambda3],
        None => default_init(prior, constraints),
    };
    if !active.mu {
        lam[0] = 0.0;
    }
    if !active.inv_eta {
        lam[1] = 0.0;
    }
    if !active.log_gamma {
        lam[2] = 1.0;
    }

    let mut cur = evaluate(prior, constraints, lam).map_err(|e| match e {
        Error::NonNormalizable(m) => Error::NonNormalizable(format!("initial point: {m}")),
        other => other,
    })?;
    let mut history = vec![cur.dual];

    for iter in 0..MAX_NEWTON {
        let res = residual(constraints, &cur.moments);
        let (gv, h) = gradient_and_hessian(&cur, &idx);
        let newton = h.clone().cholesky().map(|ch| -ch.solve(&gv));
        if res <= SOLVE_TOL {
            // One full Newton step from inside the tolerance pins the
            // multipliers down far more tightly than the moments alone.
            if let Some(d) = newton.filter(|d| d.iter().all(|v| v.is_finite())) {
                let mut trial = lam;
                for (k, &i) in idx.iter().enumerate() {
                    trial[i] += d[k];
                }
                if let Ok(e) = evaluate(prior, constraints, trial) {
                    let r = residual(constraints, &e.moments);
                    if r < res && e.dual <= cur.dual {
                        history.push(e.dual);
                        return Ok(finish(trial, e, iter + 1, history, r));
                    }
                }
            }
            return Ok(finish(lam, cur, iter, history, res));
        }
        let jacobi = nalgebra::DVector::from_fn(idx.len(), |r, _| -gv[r] / h[(r, r)].abs().max(1e-300));
        let line_search = |dir: &nalgebra::DVector<f64>| {
            let slope = dir.dot(&gv);
            let mut step = 1.0;
            while step >= 1e-12 {
                let mut trial = lam;
                for (k, &i) in idx.iter().enumerate() {
                    trial[i] = lam[i] + step * dir[k];
                }
                if let Ok(e) = evaluate(prior, constraints, trial) {
                    if e.dual.is_finite() && e.dual <= cur.dual + 1e-4 * step * slope {
                        return Some((trial, e, step));
                    }
                }
                step *= 0.5;
            }
            None
        };
        let mut accepted = match newton {
            Some(d) if d.dot(&gv) < 0.0 && d.iter().all(|v| v.is_finite()) => line_search(&d),
            _ => None,
        };
        // Near the gamma or inverse-gamma boundary the Newton direction can
        // point out of the domain; the scaled gradient then does better.
        if accepted.as_ref().is_none_or(|a| a.2 < 1.0) {
            if let Some(alt) = line_search(&jacobi) {
                if accepted.as_ref().is_none_or(|a| alt.1.dual < a.1.dual) {
                    accepted = Some(alt);
                }
            }
        }
        let accepted = accepted.map(|(t, e, _)| (t, e));
        match accepted {
            Some((trial, e)) => {
                lam = trial;
                cur = e;
                history.push(cur.dual);
            }
            None => {
                if res <= 1e-8 {
                    return Ok(finish(lam, cur, iter, history, res));
                }
                return Err(Error::NoSolution(format!(
                    "line search failed after {iter} Newton steps, residual {res:e}"
                )));
            }
        }
        if lam.iter().any(|v| v.abs() > 1e12) {
            return Err(Error::NoSolution("multipliers diverge".into()));
        }
    }
    let res = residual(constraints, &cur.moments);
    if res <= 1e-8 {
        return Ok(finish(lam, cur, MAX_NEWTON, history, res));
    }
    Err(Error::NoSolution(format!(
        "no convergence in {MAX_NEWTON} Newton steps, residual {res:e}"
    )))
}

/// Dual gradient and Hessian restricted to the active multipliers.
fn gradient_and_hessian(cur: &Eval, idx: &[usize]) -> (nalgebra::DVector<f64>, nalgebra::DMatrix<f64>) {
    let g = nalgebra::DVector::from_fn(idx.len(), |r, _| cur.grad[idx[r]]);
    let h = nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
        let s = |i: usize| if i == 2 { 1.0 } else { -1.0 };
        // Covariance of (-x, -1/x, ln x).
        s(idx[r]) * s(idx[c]) * cur.moments.cov[idx[r]][idx[c]]
    });
    (g, h)
}

fn finish(lam: [f64; 3], cur: Eval, iterations: usize, dual_history: Vec<f64>, residual: f64) -> Solution {
    Solution {
        multipliers: Multipliers {
            lambda0: cur.moments.log_z,
            lambda1: lam[0],
            lambda2: lam[1],
            lambda3: lam[2],
        },
        iterations,
        dual_history,
        residual,
    }
}
