use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BenchmarkRow, Method, MethodOutcome};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
    Markdown,
}

impl TableFormat {
    /// Format implied by a file extension (`csv`, `json`, `md`).
    pub fn from_extension(ext: &str) -> Result<Self> {
        match ext {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "md" | "markdown" => Ok(TableFormat::Markdown),
            other => Err(Error::InvalidParameter(format!(
                "unknown table format '{other}'"
            ))),
        }
    }
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_extension(s)
    }
}

fn number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn lambda_cell(o: &MethodOutcome) -> String {
    match o.lambda_low {
        Some(low) => format!("{}-{}", number(low), number(o.lambda_final)),
        None => number(o.lambda_at_best.unwrap_or(o.lambda_final)),
    }
}

fn obj_cell(o: &MethodOutcome) -> String {
    match o.obj {
        Some(v) if o.optimal => format!("{}*", number(v)),
        Some(v) => number(v),
        None => "INF".to_string(),
    }
}

fn columns(rows: &[BenchmarkRow]) -> Vec<Method> {
    rows[0].methods.iter().map(|o| o.method).collect()
}

fn cells(row: &BenchmarkRow, methods: &[Method], thousands: bool) -> Result<Vec<String>> {
    let mut out = vec![row.n.to_string(), number(row.opt)];
    for &m in methods {
        let o = row.outcome(m).ok_or_else(|| {
            Error::InvalidParameter(format!("row {} lacks method {m}", row.instance_id))
        })?;
        out.push(lambda_cell(o));
        out.push(obj_cell(o));
        out.push(if thousands {
            number(o.cnt as f64 / 1000.0)
        } else {
            o.cnt.to_string()
        });
    }
    Ok(out)
}

/// Renders rows as `n, opt` followed by `λ, obj, cnt` per method. Optimal
/// objective values carry a trailing `*`; missing feasible values print as
/// `INF`. Markdown reports `cnt` in thousands.
pub fn export_table(rows: &[BenchmarkRow], format: TableFormat) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to export".into()));
    }
    let methods = columns(rows);
    let mut header = vec!["n".to_string(), "opt".to_string()];
    for m in &methods {
        for c in ["lambda", "obj", "cnt"] {
            header.push(format!("{m}_{c}"));
        }
    }
    match format {
        TableFormat::Json => Ok(serde_json::to_vec_pretty(rows)?),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header)?;
            for row in rows {
                w.write_record(cells(row, &methods, false)?)?;
            }
            w.into_inner()
                .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
        }
        TableFormat::Markdown => {
            let mut s = format!("| {} |\n", header.join(" | "));
            s.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for row in rows {
                s.push_str(&format!(
                    "| {} |\n",
                    cells(row, &methods, true)?.join(" | ")
                ));
            }
            Ok(s.into_bytes())
        }
    }
}

/// Reads rows written by [`export_table`] in JSON form.
pub fn import_json(bytes: &[u8]) -> Result<Vec<BenchmarkRow>> {
    Ok(serde_json::from_slice(bytes)?)
}
