use std::path::PathBuf;

use clap::Args;
use gigmix::inference::{log_likelihood, log_posterior, map_estimate, run_mcmc, ChainConfig, MixtureModel, PriorBox};
use gigmix::pythagorean::FamilyKind;
use gigmix::sampling::RngSeed;
use serde::{Deserialize, Serialize};

use super::{csv, load_histogram, resolve_prior};
use crate::config::{echo, resolve, set, to_toml, write_output, CommonArgs, Section};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sample CSV; the first column holds the observations
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Number of components [default: 1]
    #[arg(long)]
    pub k: Option<usize>,
    /// Component family, e.g. gig, gamma, hyperbolic [default: gig]
    #[arg(long, value_parser = parse_family)]
    pub family: Option<FamilyKind>,
    /// TOML file with the prior box
    #[arg(long, value_name = "FILE")]
    pub prior: Option<PathBuf>,
    /// Histogram bins [default: Freedman–Diaconis]
    #[arg(long)]
    pub bins: Option<usize>,
    /// Iterations per chain, burn-in included
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Fraction of each chain discarded as burn-in
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long)]
    pub thin: Option<usize>,
}

pub(crate) fn parse_family(s: &str) -> Result<FamilyKind, String> {
    FamilyKind::parse(s).ok_or_else(|| {
        let names: Vec<_> = FamilyKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown family `{s}`; expected one of {}", names.join(", "))
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    pub k: usize,
    pub family: FamilyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    pub chain: ChainConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorBox>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            data: None,
            k: 1,
            family: FamilyKind::Gig,
            bins: None,
            chain: ChainConfig::default(),
            prior: None,
        }
    }
}

impl Section for FitConfig {
    const NAME: &'static str = "fit";
}

#[derive(Serialize)]
struct MapReport<'a> {
    k: usize,
    family: FamilyKind,
    log_posterior: f64,
    log_likelihood: f64,
    acceptance_rate: f64,
    draws: usize,
    model: &'a MixtureModel,
}

pub fn run(args: FitArgs) -> CliResult<()> {
    let (common, mut cfg) = resolve::<FitConfig>(&args.common)?;
    if args.data.is_some() {
        cfg.data = args.data;
    }
    set(&mut cfg.k, args.k);
    set(&mut cfg.family, args.family);
    if args.bins.is_some() {
        cfg.bins = args.bins;
    }
    set(&mut cfg.chain.iterations, args.iterations);
    set(&mut cfg.chain.chains, args.chains);
    set(&mut cfg.chain.burn_in, args.burn_in);
    set(&mut cfg.chain.thin, args.thin);
    if cfg.k == 0 {
        return Err(CliError::usage("k must be at least 1"));
    }

    let h = load_histogram(cfg.data.as_deref(), cfg.bins)?;
    let prior = resolve_prior(cfg.family, cfg.prior.take(), args.prior.as_deref(), &h)?;
    cfg.prior = Some(prior.clone());
    cfg.bins = Some(h.bins());

    let (chain, map) = gigmix::par::with_threads(common.threads, || -> CliResult<_> {
        let chain = run_mcmc(&h, cfg.k, &prior, &cfg.chain, RngSeed(common.seed))?;
        let map = map_estimate(&chain, &h, &prior)?.canonical();
        Ok((chain, map))
    })?;

    let report = MapReport {
        k: cfg.k,
        family: cfg.family,
        log_posterior: log_posterior(&map, &h, &prior),
        log_likelihood: log_likelihood(&map, &h)?,
        acceptance_rate: chain.acceptance_rate,
        draws: chain.draws.len(),
        model: &map,
    };
    write_output(&common.out, "map.toml", &to_toml(&report)?)?;
    write_output(&common.out, "chain.csv", &chain.to_csv())?;
    write_output(&common.out, "histogram.csv", &h.to_csv())?;
    write_output(&common.out, "overlay.csv", &overlay_csv(&map, &h.centers(), h.density())?)?;
    echo(&common, &cfg)?;

    say!("MAP log posterior {:.4}, acceptance {:.3}", report.log_posterior, report.acceptance_rate);
    for (j, (w, c)) in map.weights().iter().zip(map.components()).enumerate() {
        say!("  component {}: weight {w:.4}, mean {:.4}, {c:?}", j + 1, c.arithmetic_mean());
    }
    Ok(())
}

/// Bin centres, empirical density, weighted component densities and their sum.
pub fn overlay_csv(model: &MixtureModel, centers: &[f64], density: &[f64]) -> CliResult<String> {
    let names: Vec<String> = (1..=model.k()).map(|j| format!("component_{j}")).collect();
    let mut header = vec!["center", "empirical"];
    header.extend(names.iter().map(String::as_str));
    header.push("mixture");
    let mut rows = Vec::with_capacity(centers.len());
    for (&x, &d) in centers.iter().zip(density) {
        let mut row = vec![x, d];
        for (w, c) in model.weights().iter().zip(model.components()) {
            row.push(w * c.log_pdf(x)?.exp());
        }
        row.push(model.log_pdf(x)?.exp());
        rows.push(row);
    }
    Ok(csv(&header, rows.iter().map(Vec::as_slice)))
}
