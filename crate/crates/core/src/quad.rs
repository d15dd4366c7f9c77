//! Adaptive Gauss–Kronrod quadrature.
//!
//! The workhorse is a global adaptive 7/15-point Gauss–Kronrod scheme that
//! integrates vector-valued integrands (all components share the panel
//! subdivision, which keeps moment computations consistent). Integrals over
//! the positive half-line are taken on the log scale `x = e^u`, where the
//! densities of this crate are smooth and decay in both directions.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Abscissae of the 15-point Kronrod rule mapped to `[a, b]`, with weights.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for i in 0..7 {
        out[2 * i] = (c - h * XGK[i], h * WGK[i]);
        out[2 * i + 1] = (c + h * XGK[i], h * WGK[i]);
    }
    out[14] = (c, h * WGK[7]);
    out
}

/// Tolerances for the adaptive driver.
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_panels: 2000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub abs_err: [f64; N],
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    abs_value: [f64; N],
    err: [f64; N],
}

fn gk15<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> Panel<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let mut abs_sum = [0.0; N];
    for j in 0..N {
        k[j] = fc[j] * WGK[7];
        g[j] = fc[j] * WG[3];
        abs_sum[j] = (fc[j] * WGK[7]).abs();
    }
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for j in 0..N {
            let s = f1[j] + f2[j];
            k[j] += WGK[i] * s;
            abs_sum[j] += WGK[i] * (f1[j].abs() + f2[j].abs());
            if i % 2 == 1 {
                g[j] += WG[i / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut abs_value = [0.0; N];
    let mut err = [0.0; N];
    for j in 0..N {
        value[j] = k[j] * h;
        abs_value[j] = abs_sum[j] * h.abs();
        let roundoff = 50.0 * f64::EPSILON * abs_sum[j] * h.abs();
        err[j] = ((k[j] - g[j]) * h).abs().max(roundoff);
    }
    Panel {
        a,
        b,
        value,
        abs_value,
        err,
    }
}

/// Integrates a vector-valued function over `[points[0], points[last]]`,
/// using the interior points as initial panel boundaries.
pub fn integrate_vec<const N: usize, F>(mut f: F, points: &[f64], opts: QuadOptions) -> QuadResult<N>
where
    F: FnMut(f64) -> [f64; N],
{
    assert!(points.len() >= 2, "need at least two breakpoints");
    let mut panels: Vec<Panel<N>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * panels.len();
    let mut converged = false;

    loop {
        let mut total = [0.0; N];
        let mut total_abs = [0.0; N];
        let mut total_err = [0.0; N];
        for p in &panels {
            for j in 0..N {
                total[j] += p.value[j];
                total_abs[j] += p.abs_value[j];
                total_err[j] += p.err[j];
            }
        }
        // Relative tolerance is taken against ∫|f|, so components that
        // integrate to (nearly) zero still terminate.
        let tol: Vec<f64> = (0..N)
            .map(|j| opts.abs_tol.max(opts.rel_tol * total_abs[j]))
            .collect();
        if (0..N).all(|j| total_err[j] <= tol[j]) {
            converged = true;
        }
        if converged || panels.len() >= opts.max_panels {
            return QuadResult {
                value: total,
                abs_err: total_err,
                evaluations,
                converged,
            };
        }
        // Split the panel with the worst error relative to its component tolerance.
        let worst = panels
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let badness = (0..N)
                    .map(|j| p.err[j] / tol[j].max(f64::MIN_POSITIVE))
                    .fold(0.0, f64::max);
                (i, badness)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Panel cannot be split further at double precision.
            return QuadResult {
                value: total,
                abs_err: total_err,
                evaluations,
                converged: false,
            };
        }
        panels.push(gk15(&mut f, p.a, mid));
        panels.push(gk15(&mut f, mid, p.b));
        evaluations += 30;
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult<1> {
    integrate_vec(|x| [f(x)], &[a, b], opts)
}

/// Failure modes when locating the mass of a log-integrand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowError {
    /// The integrand is `-inf` everywhere on the scan grid.
    NoMass,
    /// The integrand does not decay towards an unbounded end.
    Divergent,
}

/// Largest `|u|` scanned when an integration end is unbounded.
pub const LINE_LIMIT: f64 = 150.0;
const SCAN_POINTS: usize = 601;
// exp(-80) is far below double-precision relevance relative to the peak.
const DROP: f64 = 80.0;

/// The region of the line carrying the mass of `exp(log_f)`.
#[derive(Clone, Debug)]
pub struct LogWindow {
    pub lo: f64,
    pub hi: f64,
    pub peak: f64,
    /// `log_f` at the peak; integrands should be scaled by `exp(-log_peak)`.
    pub log_peak: f64,
    breakpoints: Vec<f64>,
}

impl LogWindow {
    /// Breakpoints for [`integrate_vec`], sorted and spanning `[lo, hi]`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn integrate_vec<const N: usize, F>(&self, f: F, opts: QuadOptions) -> QuadResult<N>
    where
        F: FnMut(f64) -> [f64; N],
    {
        integrate_vec(f, &self.breakpoints, opts)
    }
}

/// Finds where `exp(log_f(u))` carries its mass on `[lo, hi]` (either end may
/// be infinite). `hints` are extra points that must be scanned, such as kinks.
pub fn locate_log_mass<F: Fn(f64) -> f64>(
    log_f: F,
    lo: f64,
    hi: f64,
    hints: &[f64],
) -> Result<LogWindow, WindowError> {
    let lo_open = lo < -LINE_LIMIT;
    let hi_open = hi > LINE_LIMIT;
    let lo = lo.max(-LINE_LIMIT);
    let hi = hi.min(LINE_LIMIT);
    if !(hi > lo) {
        return Err(WindowError::NoMass);
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo + step * i as f64).collect();
    grid.extend(hints.iter().copied().filter(|&u| u > lo && u < hi));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let vals: Vec<f64> = grid
        .iter()
        .map(|&u| {
            let v = log_f(u);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        })
        .collect();

    let (imax, &vmax) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(WindowError::NoMass)?;
    if vmax == f64::NEG_INFINITY {
        return Err(WindowError::NoMass);
    }
    if vmax == f64::INFINITY {
        return Err(WindowError::Divergent);
    }

    // Golden-section refinement of the peak between the neighbouring grid points.
    let a0 = grid[imax.saturating_sub(1)];
    let b0 = grid[(imax + 1).min(grid.len() - 1)];
    let (peak, log_peak) = refine_max(&log_f, a0, b0, grid[imax], vmax);

    let first = vals.iter().position(|&v| v > log_peak - DROP).unwrap_or(imax);
    let last = vals.iter().rposition(|&v| v > log_peak - DROP).unwrap_or(imax);
    if (lo_open && first == 0) || (hi_open && last == grid.len() - 1) {
        return Err(WindowError::Divergent);
    }
    let wlo = grid[first.saturating_sub(1)];
    let whi = grid[(last + 1).min(grid.len() - 1)];

    let mut bps: Vec<f64> = Vec::new();
    let span = last + 2 - first.saturating_sub(1);
    let stride = (span / 24).max(1);
    for i in (first.saturating_sub(1)..=(last + 1).min(grid.len() - 1)).step_by(stride) {
        bps.push(grid[i]);
    }
    bps.push(wlo);
    bps.push(whi);
    if peak > wlo && peak < whi {
        bps.push(peak);
    }
    bps.extend(hints.iter().copied().filter(|&u| u > wlo && u < whi));
    bps.sort_by(f64::total_cmp);
    bps.dedup();

    Ok(LogWindow {
        lo: wlo,
        hi: whi,
        peak,
        log_peak,
        breakpoints: bps,
    })
}

fn refine_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, best_u: f64, best_v: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut best = (best_u, best_v);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc > best.1 {
            best = (c, fc);
        }
        if fd > best.1 {
            best = (d, fd);
        }
        if (b - a).abs() <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    best
}

/// `ln ∫_lo^hi exp(log_f(u)) du`, computed relative to the peak.
pub fn log_integrate_line<F: Fn(f64) -> f64>(
    log_f: F,
    lo: f64,
    hi: f64,
    hints: &[f64],
    opts: QuadOptions,
) -> Result<f64, WindowError> {
    let w = locate_log_mass(&log_f, lo, hi, hints)?;
    let r = w.integrate_vec(|u| [(log_f(u) - w.log_peak).exp()], opts);
    Ok(w.log_peak + r.value[0].ln())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}
