use std::path::PathBuf;

use clap::Args;
use gigmix::inference::MixtureModel;
use gigmix::pythagorean::FamilyMember;
use gigmix::sampling::{sample_mixture, RngSeed};
use serde::{Deserialize, Serialize};

use super::push_number;
use crate::config::{echo, read_toml, resolve, set, to_toml, write_output, CommonArgs, Section};
use crate::error::{CliError, CliResult};

/// The three-hump GIG mixture shipped as the demo.
pub fn demo_model() -> MixtureModel {
    MixtureModel::new(
        vec![0.3, 0.45, 0.25],
        vec![
            FamilyMember::Gig { lambda: -0.5, alpha: 0.8, beta: 3.0 },
            FamilyMember::Gig { lambda: 2.0, alpha: 3.0, beta: 2.0 },
            FamilyMember::Gig { lambda: 5.0, alpha: 8.0, beta: 4.0 },
        ],
    )
    .expect("demo model is valid")
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Model spec file, or `demo` for the built-in three-component mixture
    #[arg(long, value_name = "FILE|demo")]
    pub model: Option<String>,
    /// Number of draws [default: 50000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Write -1 in place of the component labels
    #[arg(long)]
    pub hide_labels: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub hide_labels: bool,
    /// Path to a model spec; ignored when `model` is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<MixtureModel>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n: 50_000,
            hide_labels: false,
            model_file: None,
            model: None,
        }
    }
}

impl Section for SimulateConfig {
    const NAME: &'static str = "simulate";
}

#[derive(Serialize)]
struct Metadata<'a> {
    n: usize,
    seed: u64,
    hide_labels: bool,
    model: &'a MixtureModel,
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let (common, mut cfg) = resolve::<SimulateConfig>(&args.common)?;
    set(&mut cfg.n, args.n);
    cfg.hide_labels |= args.hide_labels;
    match args.model.as_deref() {
        Some("demo") => {
            cfg.model = None;
            cfg.model_file = None;
        }
        Some(path) => {
            cfg.model = None;
            cfg.model_file = Some(PathBuf::from(path));
        }
        None => {}
    }
    let model = match (&cfg.model, &cfg.model_file) {
        (Some(m), _) => m.clone(),
        (None, Some(path)) => read_toml(path)?,
        (None, None) => demo_model(),
    };
    if cfg.n == 0 {
        return Err(CliError::Core(gigmix::Error::Validation("n must be at least 1".into())));
    }
    cfg.model = Some(model.clone());
    cfg.model_file = None;

    let draws = gigmix::par::with_threads(common.threads, || sample_mixture(&model, cfg.n, RngSeed(common.seed)))?;
    let mut out = String::with_capacity(24 * draws.len());
    out.push_str("value,label\n");
    for (x, j) in &draws {
        let label = if cfg.hide_labels { -1 } else { *j as i64 };
        push_number(&mut out, *x);
        out.push_str(&format!(",{label}\n"));
    }
    write_output(&common.out, "samples.csv", &out)?;
    let meta = Metadata {
        n: cfg.n,
        seed: common.seed,
        hide_labels: cfg.hide_labels,
        model: &model,
    };
    write_output(&common.out, "metadata.toml", &to_toml(&meta)?)?;
    echo(&common, &cfg)?;
    say!("wrote {} draws to {}", cfg.n, common.out.join("samples.csv").display());
    Ok(())
}
