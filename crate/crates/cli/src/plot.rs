//! Plot-ready data derived from a report. Rendering is left to external tools.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::Format;
use crate::error::{CliError, Result};
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Histogram,
    Dendrogram,
    KBar,
}

impl PlotKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "histogram" => Ok(PlotKind::Histogram),
            "dendrogram" => Ok(PlotKind::Dendrogram),
            "k-bar" => Ok(PlotKind::KBar),
            other => Err(CliError::Usage(format!(
                "unknown plot {other:?} (expected histogram, dendrogram or k-bar)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Sturges bin count: `ceil(log2 n) + 1`.
pub fn sturges_bins(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as usize + 1
    }
}

/// Equal-width bins over `[min, max]`; the last bin is closed on the right.
pub fn histogram(values: &[f64], bins: usize) -> Vec<Bin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            lower: lo + i as f64 * width,
            upper: if i + 1 == bins {
                hi.max(lo + width)
            } else {
                lo + (i + 1) as f64 * width
            },
            count,
        })
        .collect()
}

#[derive(Serialize)]
struct KBar<'a> {
    method: &'a str,
    k: usize,
    probability: f64,
}

/// Plot data as CSV (table and csv formats) or JSON.
pub fn plot_data(report: &Report, kind: PlotKind, format: Format) -> Result<String> {
    let json = format == Format::Json;
    let mut out = String::new();
    match kind {
        PlotKind::Histogram => {
            let v = &report.dataset.values;
            let bins = histogram(v, sturges_bins(v.len()));
            if json {
                out = to_json(&bins);
            } else {
                out.push_str("lower,upper,count\n");
                for b in &bins {
                    let _ = writeln!(out, "{},{},{}", b.lower, b.upper, b.count);
                }
            }
        }
        PlotKind::Dendrogram => {
            let ward = report
                .analyses
                .iter()
                .find_map(|a| a.ward.as_ref())
                .ok_or(CliError::PlotUnavailable)?;
            if json {
                out = to_json(&ward.merges);
            } else {
                out.push_str("step,left,right,cost,size\n");
                for (i, m) in ward.merges.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        i + 1,
                        m.left,
                        m.right,
                        m.cost,
                        m.size
                    );
                }
            }
        }
        PlotKind::KBar => {
            let bars: Vec<KBar> = report
                .analyses
                .iter()
                .flat_map(|a| {
                    a.k_table.iter().map(move |r| KBar {
                        method: a.method.name(),
                        k: r.k,
                        probability: r.probability,
                    })
                })
                .collect();
            if bars.is_empty() {
                return Err(CliError::PlotUnavailable);
            }
            if json {
                out = to_json(&bars);
            } else {
                out.push_str("method,k,probability\n");
                for b in &bars {
                    let _ = writeln!(out, "{},{},{}", b.method, b.k, b.probability);
                }
            }
        }
    }
    Ok(out)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plot data serializes");
    s.push('\n');
    s
}
