pub mod fit;
pub mod maxent;
pub mod plotdata;
pub mod select;
pub mod simulate;

use std::fmt::Write as _;
use std::path::Path;

use gigmix::data::{build_histogram, load_samples, Histogram};
use gigmix::inference::PriorBox;
use gigmix::pythagorean::FamilyKind;

use crate::config::read_toml;
use crate::error::{CliError, CliResult};

/// Loads a sample file and bins it, reporting dropped rows on stderr.
pub(crate) fn load_histogram(data: Option<&Path>, bins: Option<usize>) -> CliResult<Histogram> {
    let path = data.ok_or_else(|| CliError::usage("no data file; pass --data or set `data` in the config"))?;
    let loaded = load_samples(path)?;
    if loaded.rejected > 0 {
        eprintln!("{}: skipped {} non-positive or non-numeric rows", path.display(), loaded.rejected);
    }
    Ok(build_histogram(&loaded.values, bins)?)
}

/// The prior from the config, a `--prior` file, or the data-scaled default.
pub(crate) fn resolve_prior(
    family: FamilyKind,
    inline: Option<PriorBox>,
    file: Option<&Path>,
    h: &Histogram,
) -> CliResult<PriorBox> {
    let prior = match file {
        Some(p) => read_toml::<PriorBox>(p)?,
        None => inline.unwrap_or_else(|| PriorBox::default_for(family, h)),
    };
    if prior.family() != family {
        return Err(gigmix::Error::Validation(format!(
            "prior is for family `{}` but the fit uses `{}`",
            prior.family().name(),
            family.name()
        ))
        .into());
    }
    Ok(prior)
}

/// Shortest round-trip form, in scientific notation away from unit scale.
pub(crate) fn push_number(s: &mut String, v: f64) {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        let _ = write!(s, "{v:e}");
    } else {
        let _ = write!(s, "{v}");
    }
}

/// CSV with a header row and rows of numbers in shortest round-trip form.
pub(crate) fn csv<'a>(header: &[&str], rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            push_number(&mut s, *v);
        }
        s.push('\n');
    }
    s
}
