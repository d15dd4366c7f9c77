use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use gigmix::pythagorean::FamilyMember;
use serde::{Deserialize, Serialize};

use super::csv;
use crate::config::{echo, resolve, set, write_output, CommonArgs, Section};
use crate::error::{CliError, CliResult};
use crate::grid::{auto_range, log_grid};
use crate::svg::{overlay_svg, Overlay};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// Density tables of the inverse Gaussian, reciprocal inverse Gaussian and hyperbolic laws
    Subclasses,
    /// SVG of a fit's overlay table
    MixtureOverlay,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub kind: Option<PlotKind>,
    /// Scale of the sub-class densities [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Concentration of the sub-class densities [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Points in the sub-class tables [default: 512]
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Overlay CSV written by `fit`
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotConfig {
    pub kind: PlotKind,
    pub alpha: f64,
    pub beta: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self {
            kind: PlotKind::Subclasses,
            alpha: 1.0,
            beta: 1.0,
            points: 512,
            x_min: None,
            x_max: None,
            input: None,
        }
    }
}

impl Section for PlotConfig {
    const NAME: &'static str = "plotdata";
}

pub fn run(args: PlotArgs) -> CliResult<()> {
    let (common, mut cfg) = resolve::<PlotConfig>(&args.common)?;
    set(&mut cfg.kind, args.kind);
    set(&mut cfg.alpha, args.alpha);
    set(&mut cfg.beta, args.beta);
    set(&mut cfg.points, args.points);
    if args.x_min.is_some() {
        cfg.x_min = args.x_min;
    }
    if args.x_max.is_some() {
        cfg.x_max = args.x_max;
    }
    if args.input.is_some() {
        cfg.input = args.input;
    }
    let written = match cfg.kind {
        PlotKind::Subclasses => {
            let table = subclasses(&cfg)?;
            write_output(&common.out, "subclasses.csv", &table)?
        }
        PlotKind::MixtureOverlay => {
            let input = cfg
                .input
                .as_deref()
                .ok_or_else(|| CliError::usage("mixture-overlay needs --input with a fit's overlay.csv"))?;
            let overlay = read_overlay(input)?;
            write_output(&common.out, "overlay.svg", &overlay_svg(&overlay))?
        }
    };
    echo(&common, &cfg)?;
    say!("wrote {}", written.display());
    Ok(())
}

fn subclasses(cfg: &PlotConfig) -> CliResult<String> {
    let (alpha, beta) = (cfg.alpha, cfg.beta);
    let members = [
        FamilyMember::InverseGaussian { alpha, beta },
        FamilyMember::ReciprocalInverseGaussian { alpha, beta },
        FamilyMember::Hyperbolic { alpha, beta },
    ];
    for m in &members {
        m.validate()?;
    }
    if cfg.points < 2 {
        return Err(gigmix::Error::Validation("points must be at least 2".into()).into());
    }
    let fs: Vec<Box<dyn Fn(f64) -> f64>> = members
        .iter()
        .map(|m| Box::new(move |x: f64| m.log_pdf(x).unwrap_or(f64::NEG_INFINITY)) as Box<dyn Fn(f64) -> f64>)
        .collect();
    let refs: Vec<&dyn Fn(f64) -> f64> = fs.iter().map(|f| f.as_ref()).collect();
    let (lo, hi) = auto_range(&refs, alpha);
    let (lo, hi) = (cfg.x_min.unwrap_or(lo), cfg.x_max.unwrap_or(hi));
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(gigmix::Error::Validation(format!("need 0 < x_min < x_max, got [{lo}, {hi}]")).into());
    }
    let rows: Vec<[f64; 4]> = log_grid(lo, hi, cfg.points)
        .into_iter()
        .map(|x| [x, fs[0](x).exp(), fs[1](x).exp(), fs[2](x).exp()])
        .collect();
    Ok(csv(
        &["x", "inverse_gaussian", "reciprocal_inverse_gaussian", "hyperbolic"],
        rows.iter().map(|r| &r[..]),
    ))
}

fn read_overlay(path: &Path) -> CliResult<Overlay> {
    let bad = |msg: String| CliError::Config {
        path: path.to_path_buf(),
        message: msg,
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty file".into()))?.split(',').collect();
    let n = header.len();
    if n < 4 || header[0] != "center" || header[1] != "empirical" || header[n - 1] != "mixture" {
        return Err(bad("expected columns center,empirical,component_1..,mixture".into()));
    }
    let mut o = Overlay {
        centers: Vec::new(),
        empirical: Vec::new(),
        components: vec![Vec::new(); n - 3],
        mixture: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let v = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", i + 2)))?;
        if v.len() != n {
            return Err(bad(format!("row {}: expected {n} fields, got {}", i + 2, v.len())));
        }
        o.centers.push(v[0]);
        o.empirical.push(v[1]);
        for (c, x) in o.components.iter_mut().zip(&v[2..n - 1]) {
            c.push(*x);
        }
        o.mixture.push(v[n - 1]);
    }
    if o.centers.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok(o)
}
