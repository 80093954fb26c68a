//! Exact MDP posterior over set partitions, for comparison with the ordered model.
//!
//! Each partition is weighted by the Dirichlet-process EPPF
//! `theta^k prod Gamma(n_b) / (theta)_n` times the per-block Normal-Gamma
//! marginal likelihood. Partitions are streamed in restricted-growth-string
//! order, so memory stays proportional to `n` plus the retained top list.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{ClassifyError, Result};
use crate::logspace::{ln_gamma, LogSumExp};
use crate::model::{log_marginal_term, stats_from_sums, Hyperparams, OrderedDataset};

pub const DEFAULT_PARTITION_CAP: usize = 12;
pub const DEFAULT_TOP_PARTITIONS: usize = 10;

/// A set partition of `{0, .., n-1}` stored as a restricted growth string:
/// `labels[0] = 0` and each label is at most one more than every label before it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    labels: Vec<usize>,
    k: usize,
}

impl SetPartition {
    /// Canonical partition from arbitrary blocks; errors unless the blocks are
    /// disjoint, non-empty and cover `0..n`.
    pub fn from_blocks(blocks: &[Vec<usize>], n: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ClassifyError::InvalidComposition("empty block".into()));
            }
            for &i in block {
                if i >= n || owner[i] != usize::MAX {
                    return Err(ClassifyError::InvalidComposition(format!(
                        "index {i} out of range or repeated"
                    )));
                }
                owner[i] = b;
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(ClassifyError::InvalidComposition(
                "blocks do not cover every index".into(),
            ));
        }
        // relabel in order of first appearance
        let mut map = vec![usize::MAX; blocks.len()];
        let mut next = 0;
        let labels = owner
            .into_iter()
            .map(|b| {
                if map[b] == usize::MAX {
                    map[b] = next;
                    next += 1;
                }
                map[b]
            })
            .collect();
        Ok(Self { labels, k: next })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Blocks ordered by smallest member, members ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l].push(i);
        }
        blocks
    }

    /// Block sizes when every block is a contiguous run of indices, else `None`.
    pub fn as_composition_parts(&self) -> Option<Vec<usize>> {
        let mut parts = Vec::with_capacity(self.k);
        let mut expected = 0;
        for (i, &l) in self.labels.iter().enumerate() {
            if l == expected {
                parts.push(1);
                expected += 1;
            } else if l + 1 == expected && i > 0 && self.labels[i - 1] == l {
                *parts.last_mut().unwrap() += 1;
            } else {
                return None;
            }
        }
        Some(parts)
    }
}

/// Streaming iterator over all Bell(n) set partitions in RGS order.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    labels: Vec<usize>,
    // prefix_max[i] = max(labels[0..=i])
    prefix_max: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    fn new(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            prefix_max: vec![0; n],
            done: false,
        }
    }

    /// Advance to the next RGS in place; returns `false` when exhausted.
    fn advance(&mut self) -> bool {
        let n = self.labels.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            if self.labels[i] <= self.prefix_max[i - 1] {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return true;
            }
        }
        false
    }

    fn current(&self) -> (&[usize], usize) {
        let n = self.labels.len();
        (&self.labels, self.prefix_max[n - 1] + 1)
    }
}

impl Iterator for SetPartitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let (labels, k) = self.current();
        let item = SetPartition {
            labels: labels.to_vec(),
            k,
        };
        self.done = !self.advance();
        Some(item)
    }
}

pub fn enumerate_set_partitions(n: usize) -> Result<SetPartitions> {
    enumerate_set_partitions_capped(n, DEFAULT_PARTITION_CAP)
}

pub fn enumerate_set_partitions_capped(n: usize, cap: usize) -> Result<SetPartitions> {
    if n == 0 {
        return Err(ClassifyError::EmptyDataset);
    }
    if n > cap {
        return Err(ClassifyError::MdpInfeasible { n, cap });
    }
    Ok(SetPartitions::new(n))
}

/// Log of the Dirichlet-process EPPF for the given block sizes.
pub fn log_eppf(block_sizes: &[usize], theta: f64) -> f64 {
    let n: usize = block_sizes.iter().sum();
    let k = block_sizes.len() as f64;
    let blocks: f64 = block_sizes.iter().map(|&s| ln_gamma(s as f64)).sum();
    k * theta.ln() + blocks - (ln_gamma(theta + n as f64) - ln_gamma(theta))
}

/// Unnormalized log posterior of a partition given as blocks of sorted-data
/// indices, in any block order.
pub fn log_mdp_unnorm(blocks: &[Vec<usize>], ds: &OrderedDataset, h: &Hyperparams) -> f64 {
    let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
    let y = ds.values();
    let likelihood: f64 = blocks
        .iter()
        .map(|b| {
            let sum: f64 = b.iter().map(|&i| y[i]).sum();
            let sumsq: f64 = b.iter().map(|&i| y[i] * y[i]).sum();
            log_marginal_term(&stats_from_sums(b.len(), sum, sumsq, 0, h.c()), h)
        })
        .sum();
    log_eppf(&sizes, h.theta()) + likelihood
}

#[derive(Debug, Clone)]
pub struct MdpPosterior {
    /// Posterior probability of `k` blocks, index `k - 1`.
    pub k_marginal: Vec<f64>,
    /// Most probable partitions, descending.
    pub top_partitions: Vec<(SetPartition, f64)>,
    pub log_norm_const: f64,
    pub partition_count: u64,
}

pub fn mdp_exact_posterior(ds: &OrderedDataset, h: &Hyperparams) -> Result<MdpPosterior> {
    mdp_exact_posterior_with(ds, h, DEFAULT_PARTITION_CAP, DEFAULT_TOP_PARTITIONS)
}

/// Heap entry ordered so the *worst* retained partition sits on top.
struct Retained {
    log_prob: f64,
    index: u64,
    partition: SetPartition,
}

impl Retained {
    // Higher probability first, then earlier enumeration index.
    fn rank(&self, other: &Self) -> Ordering {
        other
            .log_prob
            .total_cmp(&self.log_prob)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialEq for Retained {
    fn eq(&self, other: &Self) -> bool {
        self.rank(other) == Ordering::Equal
    }
}

impl Eq for Retained {}

impl PartialOrd for Retained {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Retained {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank(other)
    }
}

pub fn mdp_exact_posterior_with(
    ds: &OrderedDataset,
    h: &Hyperparams,
    cap: usize,
    n_top: usize,
) -> Result<MdpPosterior> {
    let n = ds.n();
    let mut parts = enumerate_set_partitions_capped(n, cap)?;
    let y = ds.values();
    let log_prior_norm = ln_gamma(h.theta() + n as f64) - ln_gamma(h.theta());
    let ln_theta = h.theta().ln();

    let mut per_k = vec![LogSumExp::new(); n];
    let mut heap: BinaryHeap<Retained> = BinaryHeap::with_capacity(n_top + 1);
    let mut sizes = vec![0usize; n];
    let mut sums = vec![0.0f64; n];
    let mut sumsqs = vec![0.0f64; n];
    let mut index = 0u64;

    loop {
        let (labels, k) = parts.current();
        sizes[..k].fill(0);
        sums[..k].fill(0.0);
        sumsqs[..k].fill(0.0);
        for (i, &l) in labels.iter().enumerate() {
            sizes[l] += 1;
            sums[l] += y[i];
            sumsqs[l] += y[i] * y[i];
        }
        let mut lp = k as f64 * ln_theta - log_prior_norm;
        for b in 0..k {
            lp += ln_gamma(sizes[b] as f64);
            let stats = stats_from_sums(sizes[b], sums[b], sumsqs[b], 0, h.c());
            lp += log_marginal_term(&stats, h);
        }
        per_k[k - 1].push(lp);

        if n_top > 0 {
            let worst_beats = heap.len() == n_top && heap.peek().is_some_and(|w| lp <= w.log_prob);
            if !worst_beats {
                heap.push(Retained {
                    log_prob: lp,
                    index,
                    partition: SetPartition {
                        labels: labels.to_vec(),
                        k,
                    },
                });
                if heap.len() > n_top {
                    heap.pop();
                }
            }
        }

        index += 1;
        if !parts.advance() {
            break;
        }
    }

    let mut all = LogSumExp::new();
    per_k.iter().for_each(|acc| all.merge(acc));
    let log_norm_const = all.value();
    let k_marginal = per_k
        .iter()
        .map(|acc| (acc.value() - log_norm_const).exp())
        .collect();
    let top_partitions = heap
        .into_sorted_vec()
        .into_iter()
        .map(|r| (r.partition, (r.log_prob - log_norm_const).exp()))
        .collect();

    Ok(MdpPosterior {
        k_marginal,
        top_partitions,
        log_norm_const,
        partition_count: index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::SMALL10;
    use crate::model::prepare_dataset;

    #[test]
    fn counts_are_bell_numbers() {
        assert_eq!(enumerate_set_partitions(1).unwrap().count(), 1);
        assert_eq!(enumerate_set_partitions(3).unwrap().count(), 5);
        assert_eq!(enumerate_set_partitions(10).unwrap().count(), 115_975);
        assert!(matches!(
            enumerate_set_partitions(13),
            Err(ClassifyError::MdpInfeasible { n: 13, cap: 12 })
        ));
    }

    #[test]
    fn rgs_order_for_three() {
        let got: Vec<Vec<usize>> = enumerate_set_partitions(3)
            .unwrap()
            .map(|p| p.labels().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0, 0],
                vec![0, 0, 1],
                vec![0, 1, 0],
                vec![0, 1, 1],
                vec![0, 1, 2]
            ]
        );
    }

    #[test]
    fn from_blocks_canonicalizes() {
        let p = SetPartition::from_blocks(&[vec![3, 4], vec![0, 2], vec![1]], 5).unwrap();
        assert_eq!(p.labels(), &[0, 1, 0, 2, 2]);
        assert_eq!(p.blocks(), vec![vec![0, 2], vec![1], vec![3, 4]]);
        assert!(p.as_composition_parts().is_none());
        let q = SetPartition::from_blocks(&[vec![2, 3, 4], vec![0, 1]], 5).unwrap();
        assert_eq!(q.as_composition_parts(), Some(vec![2, 3]));
        assert!(SetPartition::from_blocks(&[vec![0], vec![0, 1]], 2).is_err());
        assert!(SetPartition::from_blocks(&[vec![0]], 2).is_err());
    }

    #[test]
    fn eppf_sums_to_one() {
        for n in 1..=7 {
            for theta in [0.3, 1.0, 4.5] {
                let total: f64 = enumerate_set_partitions(n)
                    .unwrap()
                    .map(|p| {
                        let sizes: Vec<usize> = p.blocks().iter().map(Vec::len).collect();
                        log_eppf(&sizes, theta).exp()
                    })
                    .sum();
                assert!((total - 1.0).abs() < 1e-12, "n {n} theta {theta}");
            }
        }
    }

    #[test]
    fn single_point() {
        let ds = prepare_dataset(&[1.0]).unwrap();
        let post = mdp_exact_posterior(&ds, &Hyperparams::default()).unwrap();
        assert_eq!(post.k_marginal, vec![1.0]);
        assert_eq!(post.partition_count, 1);
    }

    #[test]
    fn streaming_matches_direct_block_evaluation() {
        let ds = prepare_dataset(&[0.4, -1.0, 2.2, 2.5, 0.1, 5.0]).unwrap();
        let h = Hyperparams::new(0.7, 1.5, 0.8, 0.2).unwrap();
        let post = mdp_exact_posterior_with(&ds, &h, 12, 203).unwrap();
        assert_eq!(post.top_partitions.len(), 203);
        for (p, prob) in &post.top_partitions {
            let direct = (log_mdp_unnorm(&p.blocks(), &ds, &h) - post.log_norm_const).exp();
            assert!((direct - prob).abs() < 1e-13);
        }
        let total: f64 = post.top_partitions.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small10_top_partition() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let post = mdp_exact_posterior(&ds, &Hyperparams::default()).unwrap();
        assert_eq!(post.partition_count, 115_975);
        let (best, p) = &post.top_partitions[0];
        assert_eq!(best.as_composition_parts(), Some(vec![4, 6]));
        assert!((p - 0.332).abs() < 1e-3);
        let total: f64 = post.k_marginal.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
