use std::path::PathBuf;

use clap::Args;
use gigmix::inference::PriorBox;
use gigmix::model_select::{posterior_over_k, KPosterior, LadderConfig};
use gigmix::pythagorean::FamilyKind;
use gigmix::sampling::RngSeed;
use serde::{Deserialize, Serialize};

use super::fit::parse_family;
use super::{csv, load_histogram, resolve_prior};
use crate::config::{echo, resolve, set, to_toml, write_output, CommonArgs, Section};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Candidate component counts, as `lo..hi` (inclusive) or a comma list [default: 1..4]
    #[arg(long)]
    pub ks: Option<String>,
    /// Prior probabilities of the candidates, comma separated [default: uniform]
    #[arg(long, value_delimiter = ',')]
    pub k_prior: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_family)]
    pub family: Option<FamilyKind>,
    #[arg(long, value_name = "FILE")]
    pub prior: Option<PathBuf>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Rungs of the temperature ladder
    #[arg(long)]
    pub temperatures: Option<usize>,
    /// Retained draws per rung
    #[arg(long)]
    pub steps: Option<usize>,
    /// Adaptation iterations per rung
    #[arg(long)]
    pub rung_burn_in: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    pub ks: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_prior: Option<Vec<f64>>,
    pub family: FamilyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    pub ladder: LadderConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorBox>,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            data: None,
            ks: "1..4".into(),
            k_prior: None,
            family: FamilyKind::Gig,
            bins: None,
            ladder: LadderConfig::default(),
            prior: None,
        }
    }
}

impl Section for SelectConfig {
    const NAME: &'static str = "select";
}

/// Parses `lo..hi` (inclusive) or a comma-separated list of distinct positive integers.
pub fn parse_ks(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::usage(format!("malformed k range `{s}`; use e.g. `1..4` or `1,2,3`"));
    let num = |t: &str| t.trim().parse::<usize>().ok().filter(|&k| k >= 1);
    let ks: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a).ok_or_else(bad)?, num(b).ok_or_else(bad)?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|t| num(t).ok_or_else(bad)).collect::<CliResult<_>>()?
    };
    let mut sorted = ks.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != ks.len() {
        return Err(bad());
    }
    Ok(ks)
}

#[derive(Serialize)]
struct Report<'a> {
    argmax: usize,
    candidates: &'a [KPosterior],
}

pub fn run(args: SelectArgs) -> CliResult<()> {
    let (common, mut cfg) = resolve::<SelectConfig>(&args.common)?;
    if args.data.is_some() {
        cfg.data = args.data;
    }
    set(&mut cfg.ks, args.ks);
    if args.k_prior.is_some() {
        cfg.k_prior = args.k_prior;
    }
    set(&mut cfg.family, args.family);
    if args.bins.is_some() {
        cfg.bins = args.bins;
    }
    set(&mut cfg.ladder.temperatures, args.temperatures);
    set(&mut cfg.ladder.steps, args.steps);
    set(&mut cfg.ladder.burn_in, args.rung_burn_in);
    let ks = parse_ks(&cfg.ks)?;

    let h = load_histogram(cfg.data.as_deref(), cfg.bins)?;
    let prior = resolve_prior(cfg.family, cfg.prior.take(), args.prior.as_deref(), &h)?;
    cfg.prior = Some(prior.clone());
    cfg.bins = Some(h.bins());

    let post = gigmix::par::with_threads(common.threads, || {
        posterior_over_k(&h, &ks, &prior, cfg.k_prior.as_deref(), &cfg.ladder, RngSeed(common.seed))
    })?;
    let best = post
        .iter()
        .max_by(|a, b| a.probability.total_cmp(&b.probability))
        .expect("at least one candidate");
    let argmax = best.k;

    write_output(&common.out, "report.toml", &to_toml(&Report { argmax, candidates: &post })?)?;
    let rows: Vec<[f64; 4]> = post
        .iter()
        .map(|p| [p.k as f64, p.evidence.log_evidence, p.evidence.standard_error, p.probability])
        .collect();
    write_output(
        &common.out,
        "evidence.csv",
        &csv(&["k", "log_evidence", "standard_error", "probability"], rows.iter().map(|r| &r[..])),
    )?;
    echo(&common, &cfg)?;

    for p in &post {
        say!(
            "k = {}: log evidence {:.3} ± {:.3}, probability {:.4}",
            p.k, p.evidence.log_evidence, p.evidence.standard_error, p.probability
        );
    }
    say!("argmax k = {argmax}");
    Ok(())
}
