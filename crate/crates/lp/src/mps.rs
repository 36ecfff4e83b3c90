//! Fixed-column MPS export (minimization convention).
//!
//! Inequality rows are named `G<i>`, equality rows `E<i>`, columns `X<j>`.
//! Default MPS bounds are `[0, +∞)`, so every other bound is written out.

use std::fmt::Write as _;
use std::path::Path;

use crate::problem::LinearProgram;
use crate::LpError;

/// Renders `lp` as an MPS document.
pub fn to_mps(lp: &LinearProgram, name: &str) -> Result<String, LpError> {
    lp.check_dimensions()?;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(format!("NAME          {name}"));
    line("ROWS".into());
    line(" N  COST".into());
    for i in 0..lp.num_ineq() {
        line(format!(" L  G{i}"));
    }
    for i in 0..lp.num_eq() {
        line(format!(" E  E{i}"));
    }
    line("COLUMNS".into());
    for j in 0..lp.num_vars() {
        let col = format!("X{j}");
        let mut entries = Vec::new();
        if lp.objective[j] != 0.0 {
            entries.push(("COST".to_string(), lp.objective[j]));
        }
        for (i, row) in lp.ineq_matrix.iter().enumerate() {
            if row[j] != 0.0 {
                entries.push((format!("G{i}"), row[j]));
            }
        }
        for (i, row) in lp.eq_matrix.iter().enumerate() {
            if row[j] != 0.0 {
                entries.push((format!("E{i}"), row[j]));
            }
        }
        if entries.is_empty() {
            // Keep the column declared so bounds refer to a known name.
            entries.push(("COST".to_string(), 0.0));
        }
        for (row, v) in entries {
            line(field_line(&col, &row, v));
        }
    }
    line("RHS".into());
    for (i, b) in lp.ineq_rhs.iter().enumerate() {
        if *b != 0.0 {
            line(field_line("RHS", &format!("G{i}"), *b));
        }
    }
    for (i, b) in lp.eq_rhs.iter().enumerate() {
        if *b != 0.0 {
            line(field_line("RHS", &format!("E{i}"), *b));
        }
    }
    line("BOUNDS".into());
    for j in 0..lp.num_vars() {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let col = format!("X{j}");
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            line(format!(" FR BND       {col:<8}"));
            continue;
        }
        if l == u {
            line(bound_line("FX", &col, l));
            continue;
        }
        if l == f64::NEG_INFINITY {
            line(format!(" MI BND       {col:<8}"));
        } else if l != 0.0 {
            line(bound_line("LO", &col, l));
        }
        if u.is_finite() {
            line(bound_line("UP", &col, u));
        }
    }
    line("ENDATA".into());
    Ok(out)
}

/// Writes the MPS rendering of `lp` to `path`.
pub fn write_mps(lp: &LinearProgram, name: &str, path: &Path) -> Result<(), LpError> {
    std::fs::write(path, to_mps(lp, name)?)?;
    Ok(())
}

fn field_line(col: &str, row: &str, value: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "    {col:<8}  {row:<8}  {:>12}", number(value));
    s
}

fn bound_line(kind: &str, col: &str, value: f64) -> String {
    format!(" {kind} BND       {col:<8}  {:>12}", number(value))
}

/// Shortest representation that fits a 12-character field where possible.
fn number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        plain
    } else {
        format!("{v:.6e}")
    }
}
