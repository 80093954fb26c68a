//! Report structure and its table / JSON / CSV renderings.

use std::fmt::Write as _;

use classify_core::mcmc::Acceptance;
use classify_core::ward::Merge;
use serde::{Deserialize, Serialize};

use crate::config::{Format, Method, RunConfig};

/// Bumped whenever a field changes meaning or is removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub analyses: Vec<Analysis>,
    /// Wall-clock timings; only filled when requested so repeated runs stay byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Vec<Timing>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub n: usize,
    pub min: f64,
    pub max: f64,
    /// Sorted observations after scaling.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRow {
    pub k: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopEntry {
    /// Group sizes left to right, when the classification is contiguous.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composition: Option<Vec<usize>>,
    /// 1-based indices into the sorted data, one list per group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<usize>>>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcDiagnostics {
    pub scheme: String,
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub k_counts: Vec<u64>,
    pub acceptance: Acceptance,
    pub split_rate: Option<f64>,
    pub merge_rate: Option<f64>,
    pub shuffle_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WardResult {
    pub merges: Vec<Merge>,
    pub k: usize,
    /// 1-based indices into the sorted data.
    pub clusters: Vec<Vec<usize>>,
    pub composition: Option<Vec<usize>>,
    pub monotonicity_violations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_table: Vec<KRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub top: Vec<TopEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_norm_const: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerated: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcmc: Option<McmcDiagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ward: Option<WardResult>,
}

impl Analysis {
    pub fn k_probabilities(&self) -> Vec<f64> {
        self.k_table.iter().map(|r| r.probability).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub method: Method,
    pub seconds: f64,
}

fn fmt_prob(p: f64) -> String {
    if p == 0.0 {
        "0".to_string()
    } else if p >= 1e-4 {
        format!("{p:.5}")
    } else {
        format!("{p:.2e}")
    }
}

fn fmt_groups(entry: &TopEntry) -> String {
    match (&entry.composition, &entry.blocks) {
        (Some(c), _) => {
            let parts: Vec<String> = c.iter().map(usize::to_string).collect();
            format!("({})", parts.join(","))
        }
        (None, Some(blocks)) => blocks
            .iter()
            .map(|b| {
                let items: Vec<String> = b.iter().map(usize::to_string).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect::<Vec<_>>()
            .join(" "),
        (None, None) => String::new(),
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Table => self.to_table(),
            Format::Csv => self.to_csv(),
        }
    }

    fn probability_analyses(&self) -> Vec<&Analysis> {
        self.analyses
            .iter()
            .filter(|a| !a.k_table.is_empty())
            .collect()
    }

    /// Side-by-side k table (one column per method), then per-method details.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let d = &self.dataset;
        let h = &self.config.hyper;
        let _ = writeln!(
            out,
            "data: {}  n = {}  min = {}  max = {}",
            d.source, d.n, d.min, d.max
        );
        let _ = writeln!(
            out,
            "theta = {}  a = {}  b = {}  c = {}",
            h.theta(),
            h.a(),
            h.b(),
            h.c()
        );

        let prob = self.probability_analyses();
        if !prob.is_empty() {
            let _ = writeln!(out);
            let _ = write!(out, "{:>4}", "k");
            for a in &prob {
                let _ = write!(out, " {:>12}", a.method.name());
            }
            let _ = writeln!(out);
            let rows = prob.iter().map(|a| a.k_table.len()).max().unwrap_or(0);
            for i in 0..rows {
                let _ = write!(out, "{:>4}", i + 1);
                for a in &prob {
                    let cell = a.k_table.get(i).map_or("--".to_string(), |r| {
                        if a.mcmc.is_some() && r.probability == 0.0 {
                            "--".to_string()
                        } else {
                            fmt_prob(r.probability)
                        }
                    });
                    let _ = write!(out, " {cell:>12}");
                }
                let _ = writeln!(out);
            }
        }

        for a in &self.analyses {
            if !a.top.is_empty() {
                let _ = writeln!(out, "\n{}: top classifications", a.method.name());
                for t in &a.top {
                    let _ = writeln!(out, "  {:>10}  {}", fmt_prob(t.probability), fmt_groups(t));
                }
            }
            if let Some(m) = &a.mcmc {
                let rate = |r: Option<f64>| r.map_or("--".to_string(), |v| format!("{v:.4}"));
                let _ = writeln!(
                    out,
                    "{}: seed {}  iterations {}  burn-in {}  acceptance split {}  merge {}  shuffle {}",
                    a.method.name(),
                    m.seed,
                    m.iterations,
                    m.burn_in,
                    rate(m.split_rate),
                    rate(m.merge_rate),
                    rate(m.shuffle_rate)
                );
                if m.acceptance.zero_kernel_rejections > 0 {
                    let _ = writeln!(
                        out,
                        "  rejected for zero connecting kernel: {}",
                        m.acceptance.zero_kernel_rejections
                    );
                }
            }
            if let Some(w) = &a.ward {
                let _ = writeln!(out, "\nward: {} clusters", w.k);
                for c in &w.clusters {
                    let items: Vec<String> = c.iter().map(|i| format!("y{i}")).collect();
                    let _ = writeln!(out, "  [{}]", items.join(", "));
                }
                match &w.composition {
                    Some(c) => {
                        let parts: Vec<String> = c.iter().map(usize::to_string).collect();
                        let _ = writeln!(out, "  groups ({})", parts.join(","));
                    }
                    None => {
                        let _ = writeln!(out, "  clusters are not contiguous in sorted order");
                    }
                }
                if !w.monotonicity_violations.is_empty() {
                    let _ = writeln!(
                        out,
                        "  non-monotone merge costs at steps {:?}",
                        w.monotonicity_violations
                    );
                }
            }
        }
        if let Some(timing) = &self.timing {
            let _ = writeln!(out);
            for t in timing {
                let _ = writeln!(out, "runtime {}: {:.3} s", t.method.name(), t.seconds);
            }
        }
        out
    }

    /// k table as CSV, or the Ward assignment when no probability table exists.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let prob = self.probability_analyses();
        if !prob.is_empty() {
            out.push('k');
            for a in &prob {
                let _ = write!(out, ",{}", a.method.name());
            }
            out.push('\n');
            let rows = prob.iter().map(|a| a.k_table.len()).max().unwrap_or(0);
            for i in 0..rows {
                let _ = write!(out, "{}", i + 1);
                for a in &prob {
                    let _ = write!(out, ",{}", a.k_table.get(i).map_or(0.0, |r| r.probability));
                }
                out.push('\n');
            }
            return out;
        }
        if let Some(w) = self.analyses.iter().find_map(|a| a.ward.as_ref()) {
            out.push_str("index,value,cluster\n");
            let mut assignment = vec![0; self.dataset.n];
            for (c, members) in w.clusters.iter().enumerate() {
                for &i in members {
                    assignment[i - 1] = c + 1;
                }
            }
            for (i, (v, c)) in self.dataset.values.iter().zip(assignment).enumerate() {
                let _ = writeln!(out, "{},{v},{c}", i + 1);
            }
        }
        out
    }
}
