//! Layered run configuration: flags over a TOML file over built-in defaults.
//!
//! A config file holds the shared keys `seed`, `threads` and `out` at top
//! level and one table per command. Every run writes the resolved settings
//! back out in the same layout as `<command>-config.toml`, so the echo can be
//! passed to `--config` to repeat the run.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const COMMANDS: [&str; 5] = ["simulate", "maxent", "fit", "select", "plotdata"];

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Base seed of every random stream [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core [default: 0]
    #[arg(long)]
    pub threads: Option<usize>,
    /// TOML file with shared keys and a table per command
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
}

impl Default for Common {
    fn default() -> Self {
        Self {
            seed: 42,
            threads: 0,
            out: PathBuf::from("out"),
        }
    }
}

/// A command's own settings, stored under `[NAME]`.
pub trait Section: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn config_error(path: &Path, message: impl std::fmt::Display) -> CliError {
    CliError::Config {
        path: path.to_path_buf(),
        message: message.to_string().trim_end().to_string(),
    }
}

/// Reads the file layer, if any, and applies the shared flags on top.
pub fn resolve<T: Section>(args: &CommonArgs) -> CliResult<(Common, T)> {
    let (mut common, section) = match &args.config {
        None => (Common::default(), T::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let mut table: toml::Table = text.parse().map_err(|e| config_error(path, e))?;
            if let Some(key) = table
                .keys()
                .find(|k| !matches!(k.as_str(), "seed" | "threads" | "out") && !COMMANDS.contains(&k.as_str()))
            {
                return Err(config_error(path, format!("unknown key `{key}`")));
            }
            let section = match table.remove(T::NAME) {
                Some(toml::Value::Table(t)) => {
                    T::deserialize(t).map_err(|e| config_error(path, format!("in [{}]: {e}", T::NAME)))?
                }
                Some(_) => return Err(config_error(path, format!("`{}` must be a table", T::NAME))),
                None => T::default(),
            };
            table.retain(|k, _| !COMMANDS.contains(&k));
            let common = Common::deserialize(table).map_err(|e| config_error(path, e))?;
            (common, section)
        }
    };
    set(&mut common.seed, args.seed);
    set(&mut common.threads, args.threads);
    set(&mut common.out, args.out.clone());
    Ok((common, section))
}

/// Writes `contents` to `dir/name`, creating `dir` as needed.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn to_toml<T: Serialize>(value: &T) -> CliResult<String> {
    toml::to_string(value).map_err(|e| gigmix::Error::Numerical(format!("cannot serialize output: {e}")).into())
}

/// Writes the resolved settings as `<command>-config.toml` in the output directory.
pub fn echo<T: Section>(common: &Common, section: &T) -> CliResult<()> {
    let mut doc = toml::Table::try_from(common).map_err(|e| gigmix::Error::Numerical(e.to_string()))?;
    let body = toml::Value::try_from(section).map_err(|e| gigmix::Error::Numerical(e.to_string()))?;
    doc.insert(T::NAME.to_string(), body);
    write_output(&common.out, &format!("{}-config.toml", T::NAME), &to_toml(&doc)?)?;
    Ok(())
}

/// Parses a TOML document of type `T` from a file.
pub fn read_toml<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| config_error(path, e))
}
