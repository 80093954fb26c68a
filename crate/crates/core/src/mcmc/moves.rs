//! Split, merge and shuffle moves on compositions, with their Hastings ratios.
//!
//! Move selection: from `k` groups a split is chosen with probability `q` and a
//! merge with `1 - q`; at `k = 1` only a split is possible and at `k = n` only
//! a merge, each then chosen with probability one. The acceptance ratios use
//! these actual selection probabilities, so detailed balance also holds at the
//! boundaries.

use rand::Rng;

use crate::composition::Composition;
use crate::error::{ClassifyError, Result};

/// A proposed split of part `part` into `(at, size - at)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitProposal {
    pub comp: Composition,
    pub part: usize,
    pub at: usize,
    /// `log[1 / (n_g (n_s - 1))]`, the probability of drawing this split given that a split was chosen.
    pub log_forward: f64,
}

/// A proposed merge of parts `pair` and `pair + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeProposal {
    pub comp: Composition,
    pub pair: usize,
    /// `log[1 / (k - 1)]`.
    pub log_forward: f64,
}

/// Probability of choosing a split from a `k`-group state.
pub fn split_selection_prob(k: usize, n: usize, q: f64) -> f64 {
    if k >= n {
        0.0
    } else if k == 1 {
        1.0
    } else {
        q
    }
}

/// Probability of choosing a merge from a `k`-group state.
pub fn merge_selection_prob(k: usize, n: usize, q: f64) -> f64 {
    if k <= 1 {
        0.0
    } else if k == n {
        1.0
    } else {
        1.0 - q
    }
}

/// Split a specific part; `log_forward` reflects the uniform choice of part and point.
pub fn split_at(comp: &Composition, part: usize, at: usize) -> SplitProposal {
    let n_g = comp.splittable_count();
    let n_s = comp.parts()[part];
    SplitProposal {
        comp: comp.split(part, at),
        part,
        at,
        log_forward: -((n_g * (n_s - 1)) as f64).ln(),
    }
}

/// Pick a part of size > 1 uniformly, then a split point uniformly among its `n_s - 1`.
pub fn propose_split<R: Rng + ?Sized>(comp: &Composition, rng: &mut R) -> Result<SplitProposal> {
    let n_g = comp.splittable_count();
    if n_g == 0 {
        return Err(ClassifyError::NoSplittableGroup);
    }
    let pick = rng.random_range(0..n_g);
    let part = comp
        .parts()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("pick < n_g");
    let at = rng.random_range(1..comp.parts()[part]);
    Ok(split_at(comp, part, at))
}

pub fn merge_at(comp: &Composition, pair: usize) -> MergeProposal {
    MergeProposal {
        comp: comp.merge(pair),
        pair,
        log_forward: -((comp.k() - 1) as f64).ln(),
    }
}

/// Pick one of the `k - 1` adjacent pairs uniformly.
pub fn propose_merge<R: Rng + ?Sized>(comp: &Composition, rng: &mut R) -> Result<MergeProposal> {
    let k = comp.k();
    if k < 2 {
        return Err(ClassifyError::NothingToMerge);
    }
    Ok(merge_at(comp, rng.random_range(0..k - 1)))
}

/// Log Hastings ratio for moving from `from` (log-prob `from_lp`) to the split proposal.
///
/// In the interior this is `log[((1-q)/q) (p'/p) n_g (n_s - 1) / k]`.
pub fn split_log_ratio(
    from: &Composition,
    from_lp: f64,
    proposal: &SplitProposal,
    to_lp: f64,
    q: f64,
) -> f64 {
    let n = from.n();
    let k = from.k();
    let n_g = from.splittable_count();
    let n_s = from.parts()[proposal.part];
    to_lp - from_lp + merge_selection_prob(k + 1, n, q).ln()
        - (k as f64).ln()
        - split_selection_prob(k, n, q).ln()
        + ((n_g * (n_s - 1)) as f64).ln()
}

/// Acceptance probability of a split proposal.
pub fn accept_split(
    from: &Composition,
    from_lp: f64,
    proposal: &SplitProposal,
    to_lp: f64,
    q: f64,
) -> f64 {
    split_log_ratio(from, from_lp, proposal, to_lp, q)
        .exp()
        .min(1.0)
}

/// Log Hastings ratio for a merge. In the interior this is
/// `log[(q/(1-q)) (p'/p) (k - 1) / ((n_s1 + n_s2 - 1) n_g')]` with `n_g'`
/// counted in the merged state.
pub fn merge_log_ratio(
    from: &Composition,
    from_lp: f64,
    proposal: &MergeProposal,
    to_lp: f64,
    q: f64,
) -> f64 {
    let n = from.n();
    let k = from.k();
    let merged = from.parts()[proposal.pair] + from.parts()[proposal.pair + 1];
    // The merged group has size >= 2, so n_g' >= 1.
    let n_g_after = proposal.comp.splittable_count();
    debug_assert!(n_g_after >= 1);
    to_lp - from_lp + split_selection_prob(k - 1, n, q).ln()
        - ((n_g_after * (merged - 1)) as f64).ln()
        - merge_selection_prob(k, n, q).ln()
        + ((k - 1) as f64).ln()
}

pub fn accept_merge(
    from: &Composition,
    from_lp: f64,
    proposal: &MergeProposal,
    to_lp: f64,
    q: f64,
) -> f64 {
    merge_log_ratio(from, from_lp, proposal, to_lp, q)
        .exp()
        .min(1.0)
}

/// A shuffle proposal: pair `pair` re-divided as `(first, total - first)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShuffleProposal {
    pub comp: Composition,
    pub pair: usize,
    pub first: usize,
}

/// Pool an adjacent pair and re-split the pooled size uniformly; `None` when `k < 2`.
pub fn propose_shuffle<R: Rng + ?Sized>(
    comp: &Composition,
    rng: &mut R,
) -> Option<ShuffleProposal> {
    let k = comp.k();
    if k < 2 {
        return None;
    }
    let pair = rng.random_range(0..k - 1);
    let total = comp.parts()[pair] + comp.parts()[pair + 1];
    let first = rng.random_range(1..total);
    Some(ShuffleProposal {
        comp: comp.reshuffle(pair, first),
        pair,
        first,
    })
}

/// Shuffle acceptance. The pooled size is conserved, so the proposal count
/// ratio `(n*_s1 + n*_s2 - 1) / (n_s1 + n_s2 - 1)` is one and only `p*/p` remains.
pub fn accept_shuffle(from_lp: f64, to_lp: f64) -> f64 {
    (to_lp - from_lp).exp().min(1.0)
}

/// Probability that one draw of the split kernel at `from` yields `to`,
/// summed over every split position that produces it.
pub fn split_kernel_prob(from: &Composition, to: &Composition) -> Result<f64> {
    if to.k() != from.k() + 1 {
        return Err(ClassifyError::NotOneStepSplit {
            from: from.k(),
            to: to.k(),
        });
    }
    let n_g = from.splittable_count();
    if n_g == 0 || from.n() != to.n() {
        return Ok(0.0);
    }
    let f = from.parts();
    let t = to.parts();
    let mut total = 0.0;
    for i in 0..f.len() {
        if t[..i] == f[..i] && t[i] + t[i + 1] == f[i] && t[i + 2..] == f[i + 1..] {
            total += 1.0 / (n_g * (f[i] - 1)) as f64;
        }
    }
    Ok(total)
}
