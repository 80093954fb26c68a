//! Split-merge samplers for the ordered classification model.
//!
//! Two schemes are provided:
//!
//! * [`Scheme::M1`]: Metropolis-Hastings split/merge between neighbouring
//!   group counts, followed by one shuffle attempt that re-divides an adjacent
//!   pair of groups at fixed `k`.
//! * [`Scheme::M2`]: the chained-proposal sampler in [`m2`], which proposes
//!   `k + 1` or `k - 1` with probability 1/2 using auxiliary compositions at
//!   every group count.
//!
//! Random numbers come from ChaCha8 seeded with [`McmcConfig::seed`]; chain
//! `i` of a multi-chain run uses ChaCha stream `i`, so chains never share a
//! keystream and chain 0 reproduces a single-chain run with the same seed.

pub mod m2;
pub mod moves;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::composition::Composition;
use crate::error::{ClassifyError, Result};
use crate::model::{Hyperparams, Model, OrderedDataset};

use m2::{lower_link_log_prob, sample_lower, TwoGroupTarget};
use moves::{
    merge_log_ratio, propose_merge, propose_shuffle, propose_split, split_kernel_prob,
    split_log_ratio,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    M1,
    M2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub scheme: Scheme,
    /// Post-burn-in iterations.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Probability of proposing a split away from the boundaries (M1).
    pub q: f64,
    /// One shuffle attempt per M1 iteration.
    pub shuffle_enabled: bool,
    /// Starting composition; `None` starts from a single group.
    pub initial: Option<Composition>,
    /// ChaCha stream index.
    pub stream: u64,
    /// Recompute the cached log-probability every 1,000 iterations.
    pub debug_checks: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::M1,
            iterations: 10_000,
            burn_in: 1_000,
            seed: 1,
            q: 0.5,
            shuffle_enabled: true,
            initial: None,
            stream: 0,
            debug_checks: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(ClassifyError::InvalidConfig(format!(
                "q must lie in (0, 1), got {}",
                self.q
            )));
        }
        if self.iterations == 0 {
            return Err(ClassifyError::NoSamples);
        }
        Ok(())
    }
}

/// Current composition and its cached unnormalized log-probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub comp: Composition,
    pub log_prob: f64,
}

impl ChainState {
    pub fn new(model: &Model<'_>, comp: Composition) -> Self {
        let log_prob = model.log_prob(&comp);
        Self { comp, log_prob }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveStats {
    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

/// Per-move acceptance counts over the whole run, burn-in included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acceptance {
    pub split: MoveStats,
    pub merge: MoveStats,
    pub shuffle: MoveStats,
    /// M2 proposals rejected outright because the connecting split kernel was zero.
    pub zero_kernel_rejections: u64,
}

/// A single chain: model, configuration, generator and current state.
pub struct Sampler<'a> {
    model: Model<'a>,
    config: McmcConfig,
    rng: ChaCha8Rng,
    state: ChainState,
    acceptance: Acceptance,
    two_group: Option<TwoGroupTarget>,
}

impl<'a> Sampler<'a> {
    pub fn new(model: Model<'a>, config: McmcConfig) -> Result<Self> {
        config.validate()?;
        let n = model.n();
        let initial = match &config.initial {
            Some(c) if c.n() != n => {
                return Err(ClassifyError::LengthMismatch {
                    composition: c.n(),
                    dataset: n,
                })
            }
            Some(c) => c.clone(),
            None => Composition::single(n),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(config.stream);
        let two_group =
            (config.scheme == Scheme::M2 && n >= 2).then(|| TwoGroupTarget::new(&model));
        Ok(Self {
            state: ChainState::new(&model, initial),
            model,
            config,
            rng,
            acceptance: Acceptance::default(),
            two_group,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn acceptance(&self) -> &Acceptance {
        &self.acceptance
    }

    /// One iteration of the configured scheme.
    pub fn step(&mut self) {
        match self.config.scheme {
            Scheme::M1 => self.step_m1(),
            Scheme::M2 => self.step_m2(),
        }
    }

    /// Split or merge, then (if enabled) one shuffle attempt.
    pub fn step_m1(&mut self) {
        let n = self.model.n();
        let k = self.state.comp.k();
        let q = self.config.q;
        if n > 1 {
            let split = match k {
                1 => true,
                _ if k == n => false,
                _ => self.rng.random::<f64>() < q,
            };
            if split {
                let proposal = propose_split(&self.state.comp, &mut self.rng)
                    .expect("k < n has a splittable group");
                let to_lp = self.model.log_prob(&proposal.comp);
                let log_ratio =
                    split_log_ratio(&self.state.comp, self.state.log_prob, &proposal, to_lp, q);
                let accepted = self.metropolis(log_ratio);
                self.acceptance.split.record(accepted);
                if accepted {
                    self.state = ChainState {
                        comp: proposal.comp,
                        log_prob: to_lp,
                    };
                }
            } else {
                let proposal =
                    propose_merge(&self.state.comp, &mut self.rng).expect("k >= 2 can merge");
                let to_lp = self.model.log_prob(&proposal.comp);
                let log_ratio =
                    merge_log_ratio(&self.state.comp, self.state.log_prob, &proposal, to_lp, q);
                let accepted = self.metropolis(log_ratio);
                self.acceptance.merge.record(accepted);
                if accepted {
                    self.state = ChainState {
                        comp: proposal.comp,
                        log_prob: to_lp,
                    };
                }
            }
        }
        if self.config.shuffle_enabled {
            self.shuffle();
        }
    }

    /// One shuffle attempt; no-op when `k = 1`.
    pub fn shuffle(&mut self) {
        let Some(proposal) = propose_shuffle(&self.state.comp, &mut self.rng) else {
            return;
        };
        let to_lp = self.model.log_prob(&proposal.comp);
        let accepted = self.metropolis(to_lp - self.state.log_prob);
        self.acceptance.shuffle.record(accepted);
        if accepted {
            self.state = ChainState {
                comp: proposal.comp,
                log_prob: to_lp,
            };
        }
    }

    /// Chained-proposal move to `k + 1` or `k - 1`.
    pub fn step_m2(&mut self) {
        let n = self.model.n();
        if n < 2 {
            return;
        }
        let k = self.state.comp.k();
        let up = match k {
            1 => true,
            _ if k == n => false,
            _ => self.rng.random::<f64>() < 0.5,
        };
        let two = self.two_group.as_ref().expect("built for n >= 2");
        let selection = |from: usize, to: usize| -> f64 {
            if from == 1 || from == n {
                1.0
            } else {
                debug_assert!(to == from + 1 || to + 1 == from);
                0.5
            }
        };

        if up {
            let proposal = propose_split(&self.state.comp, &mut self.rng)
                .expect("k < n has a splittable group");
            // Current state becomes the top of the new lower chain.
            let (below, _) = if k >= 3 {
                sample_lower(two, n, k - 1, &mut self.rng)
            } else {
                (Composition::single(n), 0.0)
            };
            let link = lower_link_log_prob(two, Some(&below), &self.state.comp);
            if link == f64::NEG_INFINITY {
                self.acceptance.split.record(false);
                self.acceptance.zero_kernel_rejections += 1;
                return;
            }
            let forward = split_kernel_prob(&self.state.comp, &proposal.comp)
                .expect("one-step split")
                .ln();
            let to_lp = self.model.log_prob(&proposal.comp);
            let log_ratio = to_lp + link - self.state.log_prob - forward + selection(k + 1, k).ln()
                - selection(k, k + 1).ln();
            let accepted = self.metropolis(log_ratio);
            self.acceptance.split.record(accepted);
            if accepted {
                self.state = ChainState {
                    comp: proposal.comp,
                    log_prob: to_lp,
                };
            }
        } else {
            let (below, log_link) = sample_lower(two, n, k - 1, &mut self.rng);
            let upward = split_kernel_prob(&below, &self.state.comp).expect("one-step split");
            if upward == 0.0 {
                self.acceptance.merge.record(false);
                self.acceptance.zero_kernel_rejections += 1;
                return;
            }
            let to_lp = self.model.log_prob(&below);
            let log_ratio = to_lp + upward.ln() - self.state.log_prob - log_link
                + selection(k - 1, k).ln()
                - selection(k, k - 1).ln();
            let accepted = self.metropolis(log_ratio);
            self.acceptance.merge.record(accepted);
            if accepted {
                self.state = ChainState {
                    comp: below,
                    log_prob: to_lp,
                };
            }
        }
    }

    fn metropolis(&mut self, log_ratio: f64) -> bool {
        log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio
    }

    fn check_cache(&self) -> Result<()> {
        let fresh = self.model.log_prob(&self.state.comp);
        if (fresh - self.state.log_prob).abs() > 1e-9 * fresh.abs().max(1.0) {
            return Err(ClassifyError::InvariantViolation(format!(
                "cached log-probability {} differs from recomputed {} at {}",
                self.state.log_prob, fresh, self.state.comp
            )));
        }
        Ok(())
    }

    /// Burn-in then sampling; frequencies count post-burn-in states only.
    pub fn run(mut self) -> Result<McmcSummary> {
        let n = self.model.n();
        let mut k_counts = vec![0u64; n];
        let mut comp_counts: BTreeMap<Composition, u64> = BTreeMap::new();
        let total = self.config.burn_in + self.config.iterations;
        for it in 0..total {
            self.step();
            if self.config.debug_checks && (it + 1) % 1_000 == 0 {
                self.check_cache()?;
            }
            if it >= self.config.burn_in {
                k_counts[self.state.comp.k() - 1] += 1;
                match comp_counts.get_mut(&self.state.comp) {
                    Some(c) => *c += 1,
                    None => {
                        comp_counts.insert(self.state.comp.clone(), 1);
                    }
                }
            }
        }
        if self.config.debug_checks {
            self.check_cache()?;
        }
        let samples = self.config.iterations as u64;
        let k_estimates = k_counts
            .iter()
            .map(|&c| c as f64 / samples as f64)
            .collect();
        Ok(McmcSummary {
            scheme: self.config.scheme,
            seed: self.config.seed,
            stream: self.config.stream,
            iterations: self.config.iterations,
            burn_in: self.config.burn_in,
            k_counts,
            k_estimates,
            comp_counts,
            acceptance: self.acceptance,
            final_state: self.state,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcSummary {
    pub scheme: Scheme,
    pub seed: u64,
    pub stream: u64,
    pub iterations: usize,
    pub burn_in: usize,
    /// Post-burn-in visits per group count, index `k - 1`.
    pub k_counts: Vec<u64>,
    /// `k_counts / iterations`.
    pub k_estimates: Vec<f64>,
    pub comp_counts: BTreeMap<Composition, u64>,
    pub acceptance: Acceptance,
    pub final_state: ChainState,
}

impl McmcSummary {
    pub fn comp_frequency(&self, comp: &Composition) -> f64 {
        self.comp_counts.get(comp).copied().unwrap_or(0) as f64 / self.iterations as f64
    }

    /// Most visited compositions, descending by count; ties in composition order.
    pub fn top(&self, n_top: usize) -> Vec<(Composition, f64)> {
        let mut all: Vec<(&Composition, u64)> =
            self.comp_counts.iter().map(|(c, &n)| (c, n)).collect();
        all.sort_by_key(|e| std::cmp::Reverse(e.1));
        all.into_iter()
            .take(n_top)
            .map(|(c, n)| (c.clone(), n as f64 / self.iterations as f64))
            .collect()
    }

    /// Most visited composition and its frequency.
    pub fn map_estimate(&self) -> (Composition, f64) {
        self.top(1).pop().expect("at least one sample")
    }
}

/// Run one chain on `ds`.
pub fn run_chain(ds: &OrderedDataset, h: &Hyperparams, config: &McmcConfig) -> Result<McmcSummary> {
    Sampler::new(Model::new(ds, *h), config.clone())?.run()
}

/// Independent chains on streams `0..chains`, run in parallel. Summaries are
/// returned per chain and never pooled.
pub fn run_chains(
    ds: &OrderedDataset,
    h: &Hyperparams,
    config: &McmcConfig,
    chains: u64,
) -> Result<Vec<McmcSummary>> {
    (0..chains)
        .into_par_iter()
        .map(|stream| {
            let mut cfg = config.clone();
            cfg.stream = stream;
            run_chain(ds, h, &cfg)
        })
        .collect()
}
