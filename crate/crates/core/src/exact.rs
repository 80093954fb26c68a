//! Exact posterior over integer compositions by complete enumeration.
//!
//! Compositions of `n` are indexed by a cut mask over the `n - 1` gaps between
//! sorted points (see [`Composition::from_mask`]); enumeration order is
//! ascending mask, so `(n)` comes first and `(1, ..., 1)` last.

use rayon::prelude::*;

use crate::composition::Composition;
use crate::error::{ClassifyError, Result};
use crate::logspace::LogSumExp;
use crate::model::{log_group_term, Hyperparams, OrderedDataset};

pub const DEFAULT_COMPOSITION_CAP: usize = 25;

/// Iterator over all `2^(n-1)` compositions of `n` in mask order.
#[derive(Debug, Clone)]
pub struct Compositions {
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        if self.next >= self.end {
            return None;
        }
        let c = Composition::from_mask(self.next, self.n);
        self.next += 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Compositions {}

pub fn enumerate_compositions(n: usize) -> Result<Compositions> {
    enumerate_compositions_capped(n, DEFAULT_COMPOSITION_CAP)
}

pub fn enumerate_compositions_capped(n: usize, cap: usize) -> Result<Compositions> {
    check_cap(n, cap)?;
    Ok(Compositions {
        n,
        next: 0,
        end: 1u64 << (n - 1),
    })
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(ClassifyError::EmptyDataset);
    }
    // 63 keeps the mask space inside a u64 regardless of the configured cap.
    if n > cap || n > 63 {
        return Err(ClassifyError::EnumerationInfeasible { n, cap });
    }
    Ok(())
}

/// Normalized posterior over every composition of `n`.
///
/// Log-probabilities are stored densely by cut mask; compositions are
/// materialized on demand.
#[derive(Debug, Clone)]
pub struct ExactPosterior {
    n: usize,
    log_probs: Vec<f64>,
    log_norm_const: f64,
    k_marginal: Vec<f64>,
}

impl ExactPosterior {
    /// Build from unnormalized log-probabilities indexed by cut mask.
    pub(crate) fn from_log_probs(n: usize, log_probs: Vec<f64>) -> Self {
        assert_eq!(log_probs.len(), 1usize << (n - 1));
        let mut per_k = vec![LogSumExp::new(); n];
        for (mask, &lp) in log_probs.iter().enumerate() {
            per_k[(mask as u64).count_ones() as usize].push(lp);
        }
        let mut all = LogSumExp::new();
        per_k.iter().for_each(|acc| all.merge(acc));
        let log_norm_const = all.value();
        let k_marginal = per_k
            .iter()
            .map(|acc| (acc.value() - log_norm_const).exp())
            .collect();
        Self {
            n,
            log_probs,
            log_norm_const,
            k_marginal,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Log of the normalizing sum of unnormalized probabilities.
    pub fn log_norm_const(&self) -> f64 {
        self.log_norm_const
    }

    /// `p*(k)` for `k = 1..=n` (index `k - 1`).
    pub fn k_marginal(&self) -> &[f64] {
        &self.k_marginal
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    /// Normalized probability of `comp`, or `None` if it does not sum to `n`.
    pub fn prob(&self, comp: &Composition) -> Option<f64> {
        (comp.n() == self.n).then(|| self.prob_by_mask(comp.to_mask()))
    }

    pub fn prob_by_mask(&self, mask: u64) -> f64 {
        (self.log_probs[mask as usize] - self.log_norm_const).exp()
    }

    /// Unnormalized log-probability by mask.
    pub fn log_unnorm_by_mask(&self, mask: u64) -> f64 {
        self.log_probs[mask as usize]
    }

    /// `(composition, probability)` in enumeration order.
    pub fn entries(&self) -> impl Iterator<Item = (Composition, f64)> + '_ {
        (0..self.log_probs.len() as u64)
            .map(move |m| (Composition::from_mask(m, self.n), self.prob_by_mask(m)))
    }

    /// Highest-probability composition (first in enumeration order on ties).
    pub fn map_estimate(&self) -> (Composition, f64) {
        let (mask, _) = self.log_probs.iter().enumerate().fold(
            (0usize, f64::NEG_INFINITY),
            |best, (i, &lp)| {
                if lp > best.1 {
                    (i, lp)
                } else {
                    best
                }
            },
        );
        (
            Composition::from_mask(mask as u64, self.n),
            self.prob_by_mask(mask as u64),
        )
    }
}

pub fn exact_posterior(ds: &OrderedDataset, h: &Hyperparams) -> Result<ExactPosterior> {
    exact_posterior_capped(ds, h, DEFAULT_COMPOSITION_CAP)
}

const CHUNK: usize = 1 << 14;

pub fn exact_posterior_capped(
    ds: &OrderedDataset,
    h: &Hyperparams,
    cap: usize,
) -> Result<ExactPosterior> {
    let n = ds.n();
    check_cap(n, cap)?;
    let total = 1usize << (n - 1);

    // Group terms depend only on (start, len); tabulate them once.
    let mut terms = vec![0.0; n * (n + 1)];
    for start in 0..n {
        for len in 1..=n - start {
            terms[start * (n + 1) + len] = log_group_term(ds, start, len, h);
        }
    }

    let mut log_probs = vec![0.0; total];
    log_probs
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(chunk, out)| {
            let base = (chunk * CHUNK) as u64;
            for (i, slot) in out.iter_mut().enumerate() {
                *slot = log_prob_of_mask(base + i as u64, n, &terms);
            }
        });
    // Normalization is a sequential pass in mask order, so results do not
    // depend on the thread count.
    Ok(ExactPosterior::from_log_probs(n, log_probs))
}

#[inline]
fn log_prob_of_mask(mask: u64, n: usize, terms: &[f64]) -> f64 {
    let stride = n + 1;
    let mut lp = 0.0;
    let mut start = 0;
    let mut rest = mask;
    while rest != 0 {
        let gap = rest.trailing_zeros() as usize;
        let len = gap + 1 - start;
        lp += terms[start * stride + len];
        start = gap + 1;
        rest &= rest - 1;
    }
    lp + terms[start * stride + (n - start)]
}

/// The `n_top` most probable compositions, descending; ties keep enumeration order.
pub fn top_n(post: &ExactPosterior, n_top: usize) -> Vec<(Composition, f64)> {
    let mut order: Vec<usize> = (0..post.len()).collect();
    // Stable sort preserves mask order among equal log-probabilities.
    order.sort_by(|&i, &j| post.log_probs[j].total_cmp(&post.log_probs[i]));
    order
        .into_iter()
        .take(n_top)
        .map(|i| {
            let mask = i as u64;
            (
                Composition::from_mask(mask, post.n),
                post.prob_by_mask(mask),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::SMALL10;
    use crate::model::{log_unnorm_prob, prepare_dataset};

    #[test]
    fn enumerates_small_cases() {
        let one: Vec<_> = enumerate_compositions(1).unwrap().collect();
        assert_eq!(one, vec![Composition::single(1)]);

        let three: Vec<Vec<usize>> = enumerate_compositions(3)
            .unwrap()
            .map(Composition::into_parts)
            .collect();
        assert_eq!(three, vec![vec![3], vec![1, 2], vec![2, 1], vec![1, 1, 1]]);

        assert_eq!(enumerate_compositions(10).unwrap().count(), 512);
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_compositions(26).unwrap_err();
        assert!(err.to_string().contains("use MCMC"));
        assert!(enumerate_compositions_capped(12, 11).is_err());
        let ds = prepare_dataset(&vec![0.0; 30]).unwrap();
        assert!(matches!(
            exact_posterior(&ds, &Hyperparams::default()),
            Err(ClassifyError::EnumerationInfeasible { n: 30, cap: 25 })
        ));
    }

    #[test]
    fn mask_evaluation_matches_model() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let h = Hyperparams::default();
        let post = exact_posterior(&ds, &h).unwrap();
        for (mask, comp) in enumerate_compositions(10).unwrap().enumerate() {
            let direct = log_unnorm_prob(&comp, &ds, &h).unwrap();
            let got = post.log_unnorm_by_mask(mask as u64);
            assert!((direct - got).abs() < 1e-12);
        }
    }

    #[test]
    fn two_points() {
        let ds = prepare_dataset(&[0.3, -2.0]).unwrap();
        let post = exact_posterior(&ds, &Hyperparams::default()).unwrap();
        let entries: Vec<_> = post.entries().collect();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].0.parts(), &[2]);
        assert_eq!(entries[1].0.parts(), &[1, 1]);
        assert!((entries[0].1 + entries[1].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_point_has_probability_one() {
        let ds = prepare_dataset(&[7.0]).unwrap();
        let post = exact_posterior(&ds, &Hyperparams::default()).unwrap();
        assert_eq!(post.len(), 1);
        assert!((post.k_marginal()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small10_map_and_top() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let post = exact_posterior(&ds, &Hyperparams::default()).unwrap();
        let (map, p) = post.map_estimate();
        assert_eq!(map.parts(), &[4, 6]);
        assert!((p - 0.833).abs() < 1e-3);
        let top = top_n(&post, 1);
        assert_eq!(top[0].0, map);
        assert_eq!(top_n(&post, 10_000).len(), 512);
        let top5 = top_n(&post, 5);
        assert!(top5.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn top_n_ties_keep_enumeration_order() {
        let post = ExactPosterior::from_log_probs(4, vec![-3.0; 8]);
        let masks: Vec<u64> = top_n(&post, 8).iter().map(|(c, _)| c.to_mask()).collect();
        assert_eq!(masks, (0..8).collect::<Vec<_>>());
        assert!((top_n(&post, 1)[0].1 - 0.125).abs() < 1e-15);
    }

    #[test]
    fn k_marginal_matches_regrouping() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let post = exact_posterior(&ds, &Hyperparams::default()).unwrap();
        let mut regrouped = vec![0.0; 10];
        for (comp, p) in post.entries() {
            regrouped[comp.k() - 1] += p;
        }
        for (a, b) in regrouped.iter().zip(post.k_marginal()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
