//! Report envelope and the CSV / JSON writers.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use oligofix_core::large_market::LargeMarketRow;
use oligofix_core::solver::IterationTrace;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

pub const LARGE_MARKET_HEADER: &str =
    "n,family,Q_total,price,x_first,x_last,profit_total,residual,gap_Q,gap_P,cs,ts";
pub const TRACE_HEADER: &str = "iteration,x,y,z,step_m1";

/// Standard consumer surplus versus the "total surplus" naming some texts
/// use for the same integral.
pub const SURPLUS_TERMINOLOGY_WARNING: &str = "surplus terminology: 'cs' is the area under \
inverse demand above the price (B Q^2 / 2 for linear demand), a quantity some texts call total \
surplus; 'ts' here is cs plus total profit";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub config: RunConfig,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
}

impl ReportEnvelope {
    pub fn new(config: RunConfig, results: serde_json::Value, warnings: Vec<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            results,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}

/// `x` with 17 significant digits: positional notation for moderate
/// magnitudes, scientific otherwise.
pub fn fmt_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..=16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

pub fn large_market_csv(rows: &[LargeMarketRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(LARGE_MARKET_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.q_total,
            r.price,
            r.x_first(),
            r.x_last(),
            r.profit_total,
            r.residual,
            r.gap_q,
            r.gap_p,
            r.cs,
            r.ts,
        ];
        out.push_str(&r.n.to_string());
        out.push(',');
        out.push_str(r.family.code());
        for v in fields {
            out.push(',');
            out.push_str(&fmt_sig17(v));
        }
        out.push('\n');
    }
    out
}

pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (i, p) in trace.points.iter().enumerate() {
        let step = if i == 0 { String::new() } else { fmt_sig17(trace.step_m1[i - 1]) };
        out.push_str(&format!(
            "{i},{},{},{},{step}\n",
            fmt_sig17(p.x),
            fmt_sig17(p.y),
            fmt_sig17(p.z)
        ));
    }
    out
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}

/// CSV of large-market rows; an empty row set is refused.
pub fn emit_csv(rows: &[LargeMarketRow], path: Option<&Path>) -> std::io::Result<()> {
    if rows.is_empty() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "refusing to write a CSV with no rows",
        ));
    }
    emit(&large_market_csv(rows), path)
}

pub fn emit_json(envelope: &ReportEnvelope, path: Option<&Path>) -> std::io::Result<()> {
    emit(&envelope.to_json(), path)
}
