//! `start:end:step` grids and cardinality lists.

use dab_core::sweep::db_grid;

use crate::error::{CliError, CliResult};

fn number(s: &str, what: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{what}: '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("{what}: '{s}' is not finite")));
    }
    Ok(v)
}

/// `x` or `start:end:step` (end inclusive).
pub fn parse_db_range(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![number(one, "SNR")?]),
        [a, b, c] => {
            let (start, end, step) = (
                number(a, "range start")?,
                number(b, "range end")?,
                number(c, "range step")?,
            );
            db_grid(start, end, step).map_err(|e| CliError::Usage(e.to_string()))
        }
        _ => Err(CliError::Usage(format!(
            "range '{s}' must be a number or start:end:step"
        ))),
    }
}

/// `k`, `lo:hi` (inclusive) or a comma-separated list.
pub fn parse_cards(s: &str) -> CliResult<Vec<usize>> {
    let card = |t: &str| -> CliResult<usize> {
        t.trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("cardinality '{t}' is not a positive integer")))
    };
    let out: Vec<usize> = if let Some((lo, hi)) = s.split_once(':') {
        let (lo, hi) = (card(lo)?, card(hi)?);
        if lo > hi {
            return Err(CliError::Usage(format!(
                "cardinality range {lo}:{hi} is empty"
            )));
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(card).collect::<CliResult<_>>()?
    };
    if out.contains(&0) {
        return Err(CliError::Usage("cardinalities must be at least 1".into()));
    }
    Ok(out)
}
