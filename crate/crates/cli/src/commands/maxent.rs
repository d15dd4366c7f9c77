use std::path::{Path, PathBuf};

use clap::Args;
use gigmix::maxent::{maxent_log_pdf, solve_multipliers_traced, ConstraintSet, Multipliers, PriorSpec, TabulatedPrior};
use gigmix::pythagorean::GigParams;
use serde::{Deserialize, Serialize};

use super::csv;
use crate::config::{echo, resolve, set, to_toml, write_output, CommonArgs, Section};
use crate::error::{CliError, CliResult};
use crate::grid::{auto_range, log_grid};

#[derive(Args, Debug)]
pub struct MaxentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Arithmetic mean to conserve
    #[arg(long)]
    pub mu: Option<f64>,
    /// Geometric mean to conserve
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Harmonic mean to conserve
    #[arg(long)]
    pub eta: Option<f64>,
    /// CSV of `x,q` knots for a tabulated reference density
    #[arg(long, value_name = "FILE")]
    pub prior_table: Option<PathBuf>,
    /// Points in the density table [default: 512]
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_table: Option<PathBuf>,
    /// Reference density knots `[x, q]`; overrides `prior_table`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_knots: Option<Vec<(f64, f64)>>,
}

impl Default for MaxentConfig {
    fn default() -> Self {
        Self {
            mu: None,
            gamma: None,
            eta: None,
            points: 512,
            x_min: None,
            x_max: None,
            prior_table: None,
            prior_knots: None,
        }
    }
}

impl Section for MaxentConfig {
    const NAME: &'static str = "maxent";
}

#[derive(Serialize)]
struct Report {
    iterations: usize,
    residual: f64,
    multipliers: Multipliers,
    #[serde(skip_serializing_if = "Option::is_none")]
    gig: Option<GigParams>,
}

fn read_knots(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut knots = Vec::new();
    for (i, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
        let mut f = line.split(',').map(|s| s.trim().parse::<f64>());
        match (f.next(), f.next()) {
            (Some(Ok(x)), Some(Ok(q))) => knots.push((x, q)),
            _ if i == 0 => {}
            _ => {
                return Err(CliError::Config {
                    path: path.to_path_buf(),
                    message: format!("line {}: expected `x,q`", i + 1),
                })
            }
        }
    }
    Ok(knots)
}

pub fn run(args: MaxentArgs) -> CliResult<()> {
    let (common, mut cfg) = resolve::<MaxentConfig>(&args.common)?;
    for (slot, flag) in [(&mut cfg.mu, args.mu), (&mut cfg.gamma, args.gamma), (&mut cfg.eta, args.eta)] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    set(&mut cfg.points, args.points);
    if args.x_min.is_some() {
        cfg.x_min = args.x_min;
    }
    if args.x_max.is_some() {
        cfg.x_max = args.x_max;
    }
    if let Some(p) = args.prior_table {
        cfg.prior_table = Some(p);
        cfg.prior_knots = None;
    }
    if cfg.prior_knots.is_none() {
        if let Some(p) = &cfg.prior_table {
            cfg.prior_knots = Some(read_knots(p)?);
        }
    }
    cfg.prior_table = None;
    if cfg.points < 2 {
        return Err(gigmix::Error::Validation("points must be at least 2".into()).into());
    }
    if let Some(g) = cfg.gamma {
        if !(g > 0.0) {
            return Err(gigmix::Error::Validation(format!("geometric mean must be > 0, got {g}")).into());
        }
    }

    let prior = match &cfg.prior_knots {
        Some(k) => PriorSpec::Tabulated(TabulatedPrior::new(k.clone())?),
        None => PriorSpec::UniformImproper,
    };
    let targets = ConstraintSet {
        target_mu: cfg.mu,
        target_log_gamma: cfg.gamma.map(f64::ln),
        target_inv_eta: cfg.eta.map(f64::recip),
    };
    let sol = solve_multipliers_traced(&prior, &targets, None)?;
    let m = sol.multipliers;
    let gig = matches!(prior, PriorSpec::UniformImproper).then(|| m.to_gig()).flatten();

    let log_pdf = |x: f64| maxent_log_pdf(&prior, &m, x).unwrap_or(f64::NEG_INFINITY);
    let (lo, hi) = match &prior {
        PriorSpec::Tabulated(t) => {
            let (a, b) = t.support();
            (a.max(b * 1e-6), b)
        }
        PriorSpec::UniformImproper => {
            let center = [cfg.gamma, cfg.mu, cfg.eta].into_iter().flatten().next().unwrap_or(1.0);
            auto_range(&[&log_pdf], center)
        }
    };
    let (lo, hi) = (cfg.x_min.unwrap_or(lo), cfg.x_max.unwrap_or(hi));
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(gigmix::Error::Validation(format!("need 0 < x_min < x_max, got [{lo}, {hi}]")).into());
    }
    let rows: Vec<[f64; 2]> = log_grid(lo, hi, cfg.points).into_iter().map(|x| [x, log_pdf(x).exp()]).collect();
    write_output(&common.out, "density.csv", &csv(&["x", "pdf"], rows.iter().map(|r| &r[..])))?;
    let report = Report {
        iterations: sol.iterations,
        residual: sol.residual,
        multipliers: m,
        gig,
    };
    write_output(&common.out, "multipliers.toml", &to_toml(&report)?)?;
    echo(&common, &cfg)?;
    say!(
        "lambda1 = {}, lambda2 = {}, lambda3 = {}",
        m.lambda1, m.lambda2, m.lambda3
    );
    if let Some(g) = gig {
        say!("GIG lambda = {}, alpha = {}, beta = {}", g.lambda, g.alpha, g.beta);
    }
    Ok(())
}
