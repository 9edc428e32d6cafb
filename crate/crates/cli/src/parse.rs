//! Small argument grammars: `1,2.5,-3` for points and `0,1;2` for simplex lists.

use plsmooth::Subcomplex;

use crate::error::{CliError, CliResult};

pub fn numbers(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("not a number: {t:?} in {s:?}")))
        })
        .collect()
}

pub fn simplices(s: &str) -> CliResult<Vec<Vec<usize>>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("not a vertex id: {v:?} in {s:?}")))
                })
                .collect()
        })
        .collect()
}

pub fn subcomplex(s: Option<&str>) -> CliResult<Subcomplex> {
    match s {
        None => Ok(Subcomplex::empty()),
        Some(s) => Ok(Subcomplex::generated_by(simplices(s)?)),
    }
}
