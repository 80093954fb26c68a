//! Executes a [`RunConfig`] and assembles the [`Report`].

use std::time::Instant;

use classify_core::exact::exact_posterior_capped;
use classify_core::partition::mdp_exact_posterior_with;
use classify_core::{
    cut, prepare_dataset, run_chain, top_n, ward_linkage, ClassifyError, McmcConfig, OrderedDataset,
};

use crate::config::{Method, RunConfig};
use crate::error::Result;
use crate::ingest::ingest;
use crate::report::{
    Analysis, DatasetSummary, KRow, McmcDiagnostics, Report, Timing, TopEntry, WardResult,
    SCHEMA_VERSION,
};

const SUM_TOLERANCE: f64 = 1e-9;

/// Environment switch for the sampler's periodic cache checks.
pub const DEBUG_ENV: &str = "CLASSIFY_DEBUG";

pub fn debug_from_env() -> bool {
    std::env::var(DEBUG_ENV).is_ok_and(|v| v == "1")
}

/// Load data, run every requested method, and check the results.
pub fn run(config: &RunConfig, timing: bool) -> Result<Report> {
    config.validate()?;
    let raw = ingest(&config.data, config.column.as_deref(), config.scale)?;
    let ds = prepare_dataset(&raw)?;

    // Methods are independent, so run them side by side and collect in order.
    let results: Vec<(Result<Analysis>, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = config
            .methods
            .iter()
            .map(|&m| {
                let ds = &ds;
                s.spawn(move || {
                    let start = Instant::now();
                    let a = analyze(m, ds, config);
                    (a, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("analysis thread panicked"))
            .collect()
    });

    let mut analyses = Vec::with_capacity(results.len());
    let mut timings = Vec::with_capacity(results.len());
    for ((a, secs), &method) in results.into_iter().zip(&config.methods) {
        let a = a?;
        check_invariants(&a)?;
        analyses.push(a);
        timings.push(Timing {
            method,
            seconds: secs,
        });
    }

    Ok(Report {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        dataset: DatasetSummary {
            source: config.data.label().to_string(),
            n: ds.n(),
            min: ds.min(),
            max: ds.max(),
            values: ds.values().to_vec(),
        },
        analyses,
        timing: timing.then_some(timings),
    })
}

fn k_rows(probs: &[f64]) -> Vec<KRow> {
    probs
        .iter()
        .enumerate()
        .map(|(i, &p)| KRow {
            k: i + 1,
            probability: p,
        })
        .collect()
}

fn one_based(blocks: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    blocks
        .into_iter()
        .map(|b| b.into_iter().map(|i| i + 1).collect())
        .collect()
}

fn empty(method: Method) -> Analysis {
    Analysis {
        method,
        k_table: Vec::new(),
        top: Vec::new(),
        log_norm_const: None,
        enumerated: None,
        mcmc: None,
        ward: None,
    }
}

pub fn analyze(method: Method, ds: &OrderedDataset, config: &RunConfig) -> Result<Analysis> {
    let h = &config.hyper;
    let mut a = empty(method);
    match method {
        Method::Exact => {
            let post = exact_posterior_capped(ds, h, config.composition_cap)?;
            a.k_table = k_rows(post.k_marginal());
            a.top = top_n(&post, config.top)
                .into_iter()
                .map(|(c, p)| TopEntry {
                    composition: Some(c.into_parts()),
                    blocks: None,
                    probability: p,
                })
                .collect();
            a.log_norm_const = Some(post.log_norm_const());
            a.enumerated = Some(post.len() as u64);
        }
        Method::MdpExact => {
            let post = mdp_exact_posterior_with(ds, h, config.partition_cap, config.top)?;
            a.k_table = k_rows(&post.k_marginal);
            a.top = post
                .top_partitions
                .into_iter()
                .map(|(p, prob)| TopEntry {
                    composition: p.as_composition_parts(),
                    blocks: Some(one_based(p.blocks())),
                    probability: prob,
                })
                .collect();
            a.log_norm_const = Some(post.log_norm_const);
            a.enumerated = Some(post.partition_count);
        }
        Method::McmcM1 | Method::McmcM2 => {
            let s = &config.mcmc;
            let cfg = McmcConfig {
                scheme: method.scheme().expect("mcmc method"),
                iterations: s.iterations,
                burn_in: s.burn_in,
                seed: s.seed,
                q: s.q,
                shuffle_enabled: s.shuffle,
                debug_checks: config.debug_checks,
                ..McmcConfig::default()
            };
            let summary = run_chain(ds, h, &cfg)?;
            a.k_table = k_rows(&summary.k_estimates);
            a.top = summary
                .top(config.top)
                .into_iter()
                .map(|(c, p)| TopEntry {
                    composition: Some(c.into_parts()),
                    blocks: None,
                    probability: p,
                })
                .collect();
            let acc = summary.acceptance;
            a.mcmc = Some(McmcDiagnostics {
                scheme: method.name().trim_start_matches("mcmc-").to_string(),
                seed: summary.seed,
                iterations: summary.iterations,
                burn_in: summary.burn_in,
                k_counts: summary.k_counts,
                acceptance: acc,
                split_rate: acc.split.rate(),
                merge_rate: acc.merge.rate(),
                shuffle_rate: acc.shuffle.rate(),
            });
        }
        Method::Ward => {
            let dendrogram = ward_linkage(ds.values())?;
            let clusters = cut(&dendrogram, config.ward_k)?;
            a.ward = Some(WardResult {
                monotonicity_violations: dendrogram.monotonicity_violations(),
                merges: dendrogram.merges,
                k: config.ward_k,
                clusters: one_based(clusters.clusters),
                composition: clusters.composition.map(|c| c.into_parts()),
            });
        }
    }
    Ok(a)
}

/// Probability tables must sum to one and sample counts must match the run length.
pub fn check_invariants(a: &Analysis) -> Result<()> {
    if !a.k_table.is_empty() {
        let total: f64 = a.k_table.iter().map(|r| r.probability).sum();
        if !total.is_finite() || (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(ClassifyError::InvariantViolation(format!(
                "{} k probabilities sum to {total}",
                a.method.name()
            ))
            .into());
        }
    }
    if let Some(m) = &a.mcmc {
        let counted: u64 = m.k_counts.iter().sum();
        if counted != m.iterations as u64 {
            return Err(ClassifyError::InvariantViolation(format!(
                "{} counted {counted} samples, expected {}",
                a.method.name(),
                m.iterations
            ))
            .into());
        }
    }
    Ok(())
}
