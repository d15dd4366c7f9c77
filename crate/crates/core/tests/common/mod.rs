//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

/// `ln ∫ exp(g(u)) du` over `[lo, hi]` by the trapezoid rule with step `h`.
///
/// For smooth integrands that vanish at both ends the trapezoid rule is
/// spectrally accurate, which makes it a good independent reference.
pub fn log_trapezoid(g: impl Fn(f64) -> f64, lo: f64, hi: f64, h: f64) -> f64 {
    let n = ((hi - lo) / h).ceil() as usize;
    let step = (hi - lo) / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| g(lo + i as f64 * step)).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (i, v) in vals.iter().enumerate() {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += w * (v - max).exp();
    }
    max + (s * step).ln()
}

/// `ln K_ν(x)` from `∫₀^∞ exp(-x cosh t) cosh(νt) dt`.
pub fn ln_bessel_k(nu: f64, x: f64) -> f64 {
    // Integrate the even extension over the whole line, then halve.
    let g = |t: f64| -x * t.cosh() + nu * t;
    let hi = ((60.0 + nu.abs() * 10.0) / x).ln().max(1.0) + 4.0;
    let hi = hi.max(10.0);
    log_trapezoid(g, -hi, hi, 1e-3) - std::f64::consts::LN_2
}

/// GIG log density written out from the formula, with the oracle Bessel.
pub fn gig_log_pdf(lambda: f64, alpha: f64, beta: f64, x: f64) -> f64 {
    -(2.0 * alpha).ln() - ln_bessel_k(lambda, beta) + (lambda - 1.0) * (x / alpha).ln()
        - 0.5 * beta * (x / alpha + alpha / x)
}

/// `∫₀^∞ w(x) exp(log_pdf(x)) dx` via `x = s·e^u`.
pub fn expect(log_pdf: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64, scale: f64) -> f64 {
    let h = 2e-3;
    let (lo, hi) = (-60.0, 60.0);
    let n = ((hi - lo) / h) as usize;
    let mut s = 0.0;
    for i in 0..=n {
        let u = lo + i as f64 * h;
        let x = scale * u.exp();
        let lp = log_pdf(x);
        if lp.is_finite() {
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += weight * w(x) * (lp + x.ln()).exp();
        }
    }
    s * h
}

/// CDF on a grid, by cumulative trapezoid in `u = ln x`.
pub struct GridCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridCdf {
    pub fn new(log_pdf: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Self {
        let (ul, uh) = (lo.ln(), hi.ln());
        let h = (uh - ul) / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| (ul + i as f64 * h).exp()).collect();
        let dens: Vec<f64> = xs.iter().map(|&x| (log_pdf(x) + x.ln()).exp()).collect();
        let mut cdf = vec![0.0; n + 1];
        for i in 1..=n {
            cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
        }
        let total = cdf[n];
        for c in &mut cdf {
            *c /= total;
        }
        Self { xs, cdf }
    }

    pub fn at(&self, x: f64) -> f64 {
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => self.cdf[i],
            Err(0) => 0.0,
            Err(i) if i >= self.xs.len() => 1.0,
            Err(i) => {
                let t = (x - self.xs[i - 1]) / (self.xs[i] - self.xs[i - 1]);
                self.cdf[i - 1] + t * (self.cdf[i] - self.cdf[i - 1])
            }
        }
    }
}

/// One-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// 1% critical value of the one-sample KS statistic.
pub fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// 1% critical value of the two-sample KS statistic.
pub fn ks_critical_two(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// The library GIG log density, anchored by one library call at `x = α`
/// and extended by the closed-form shape so it is cheap to evaluate.
pub fn gig_lp(p: &gigmix::pythagorean::GigParams) -> impl Fn(f64) -> f64 {
    let (l, a, b) = (p.lambda, p.alpha, p.beta);
    let at_alpha = gigmix::pythagorean::gig_log_pdf(p, a).unwrap();
    move |x: f64| {
        let r = x / a;
        at_alpha + (l - 1.0) * r.ln() - 0.5 * b * (r + 1.0 / r - 2.0)
    }
}

/// Perturbations `g` of a density `f*`, bounded by 1, with `∫ f* g h = 0`
/// for `h ∈ {1, x, 1/x, ln x}`, built from Gaussian bumps in `u = ln x`.
pub struct Perturbation {
    centers: Vec<f64>,
    width: f64,
    coef: Vec<f64>,
    scale: f64,
}

impl Perturbation {
    /// `log_f` is the log density, `(lo, hi)` a `u`-range holding its mass.
    pub fn new(log_f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let nb = 8;
        let centers: Vec<f64> = (0..nb).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / nb as f64).collect();
        let width = (hi - lo) / nb as f64;
        let mut p = Self {
            centers,
            width,
            coef: (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect(),
            scale: 1.0,
        };
        // A[i][j] = ∫ f h_i b_j du-weighted.
        let grid = u_grid(lo, hi);
        let mut a = nalgebra::DMatrix::<f64>::zeros(4, nb);
        for &(u, w) in &grid {
            let x = u.exp();
            let f = (log_f(x) + u).exp() * w;
            let h = [1.0, x, 1.0 / x, u];
            for j in 0..nb {
                let b = p.bump(j, u);
                for i in 0..4 {
                    a[(i, j)] += f * h[i] * b;
                }
            }
        }
        // Project the coefficients onto the null space of A.
        let c = nalgebra::DVector::from_vec(p.coef.clone());
        let aat = &a * a.transpose();
        let y = aat.lu().solve(&(&a * &c)).unwrap();
        let proj = c - a.transpose() * y;
        p.coef = proj.iter().copied().collect();
        let max = grid.iter().map(|&(u, _)| p.raw(u).abs()).fold(0.0, f64::max);
        p.scale = 1.0 / max;
        p
    }

    fn bump(&self, j: usize, u: f64) -> f64 {
        (-0.5 * ((u - self.centers[j]) / self.width).powi(2)).exp()
    }

    fn raw(&self, u: f64) -> f64 {
        (0..self.coef.len()).map(|j| self.coef[j] * self.bump(j, u)).sum()
    }

    pub fn at(&self, x: f64) -> f64 {
        self.scale * self.raw(x.ln())
    }
}

/// Trapezoid nodes and weights on a fine `u` grid.
pub fn u_grid(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let n = 40_000;
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| (lo + i as f64 * h, if i == 0 || i == n { 0.5 * h } else { h }))
        .collect()
}

/// `(∫ f, -∫ f ln f)` for `f = exp(log_f)·(1 + eps·g)` by quadrature in `u`.
pub fn perturbed_entropy(log_f: &dyn Fn(f64) -> f64, g: &Perturbation, eps: f64, lo: f64, hi: f64) -> (f64, f64) {
    let (mut mass, mut s) = (0.0, 0.0);
    for (u, w) in u_grid(lo, hi) {
        let x = u.exp();
        let lf = log_f(x) + (1.0 + eps * g.at(x)).ln();
        let f = lf.exp();
        mass += w * f * x;
        if f > 0.0 {
            s -= w * f * x * lf;
        }
    }
    (mass, s)
}
