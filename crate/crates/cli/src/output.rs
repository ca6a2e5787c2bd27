//! Report serialization with fixed 17-significant-digit floats.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use definetti_core::definetti::BoundReport;

use crate::{CliError, CliResult};

/// Columns of the sweep table, in order.
pub const CSV_COLUMNS: [&str; 13] = [
    "n",
    "k",
    "w_max",
    "nodes",
    "delta_full",
    "delta_half",
    "zeta",
    "eta",
    "theta",
    "bound_paper",
    "bound_conservative",
    "mass_error",
    "quad_error",
];

/// Compact JSON whose floats always carry 17 significant digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Sig17);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Failure(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn csv_row(r: &BoundReport) -> Vec<String> {
    let mut row = vec![
        r.n.to_string(),
        r.k.to_string(),
        r.w_max.to_string(),
        r.nodes.to_string(),
    ];
    row.extend(
        [
            r.delta_full,
            r.delta_half,
            r.zeta,
            r.eta,
            r.theta,
            r.bound_paper,
            r.bound_conservative,
            r.mass_error,
            r.quad_error,
        ]
        .iter()
        .map(|v| fmt_f64(*v)),
    );
    row
}

/// Header plus one line per report; `comments` follow as `# ` lines.
pub fn reports_csv(reports: &[&BoundReport], comments: &[String]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Failure(format!("csv: {e}"));
    w.write_record(CSV_COLUMNS).map_err(fail)?;
    for r in reports {
        w.write_record(csv_row(r)).map_err(fail)?;
    }
    let mut text = String::from_utf8(
        w.into_inner()
            .map_err(|e| CliError::Failure(e.to_string()))?,
    )
    .expect("csv writes UTF-8");
    for c in comments {
        text.push_str("# ");
        text.push_str(c);
        text.push('\n');
    }
    Ok(text)
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Failure(format!("stdout: {e}")))
        }
    }
}
