use std::fmt::Write as _;
use std::sync::Arc;

use super::grid::Grid;
use super::scalar::ScalarField;
use crate::error::{Error, Result};

/// CSV rows `k, kind, v_1, …, v_{N_r}` with `kind ∈ {cos, sin}`; values use
/// 17 significant digits so the text round-trips exactly.
pub fn field_to_csv(f: &ScalarField) -> String {
    let mut out = String::new();
    for k in 0..=f.k_max() {
        for (kind, row) in [("cos", f.cos_mode(k)), ("sin", f.sin_mode(k))] {
            if k == 0 && kind == "sin" {
                continue;
            }
            write!(out, "{k},{kind}").unwrap();
            for v in row {
                write!(out, ",{v:.16e}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn field_from_csv(text: &str, grid: &Arc<Grid>) -> Result<ScalarField> {
    let mut f = ScalarField::zeros(grid);
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: ln + 1,
            message,
        };
        let mut cells = line.split(',');
        let k: usize = cells
            .next()
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| err("bad mode index".into()))?;
        if k > grid.k_max() {
            return Err(err(format!("mode {k} exceeds K = {}", grid.k_max())));
        }
        let kind = cells.next().map(str::trim).unwrap_or("");
        let values: Vec<f64> = cells
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(e.to_string()))?;
        if values.len() != grid.n_r() {
            return Err(err(format!(
                "expected {} values, found {}",
                grid.n_r(),
                values.len()
            )));
        }
        let row = match kind {
            "cos" => f.cos_mode_mut(k),
            "sin" if k > 0 => f.sin_mode_mut(k),
            _ => return Err(err(format!("bad kind `{kind}`"))),
        };
        row.copy_from_slice(&values);
    }
    Ok(f)
}
