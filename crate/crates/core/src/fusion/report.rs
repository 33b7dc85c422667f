use std::fmt::Write;

use super::eval::{Category, EvalResult};

/// One mask source and its score per category (None where no frame of
/// that category was evaluated).
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub source: String,
    pub scores: [Option<EvalResult>; 3],
}

/// Fixed-width table: one row per source, precision/recall/F1 per category
/// in UM, UMM, UU order.
pub fn format_table(rows: &[ReportRow]) -> String {
    let name_w = rows.iter().map(|r| r.source.len()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    let _ = write!(out, "{:name_w$}", "source");
    for c in Category::ALL {
        let _ = write!(out, " | {:^26}", c.name());
    }
    out.push('\n');
    let _ = write!(out, "{:name_w$}", "");
    for _ in Category::ALL {
        let _ = write!(out, " | {:>8} {:>8} {:>8}", "P", "R", "F1");
    }
    out.push('\n');
    out.push_str(&"-".repeat(name_w + 3 * 29));
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{:name_w$}", row.source);
        for s in &row.scores {
            match s {
                Some(r) => {
                    let _ = write!(out, " | {:>8.4} {:>8.4} {:>8.4}", r.precision, r.recall, r.f1);
                }
                None => {
                    let _ = write!(out, " | {:>8} {:>8} {:>8}", "-", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
