//! Chained-proposal sampler.
//!
//! The state is augmented with one composition per group count: below the
//! current `k` the chain `n^(2) -> ... -> n^(k-1)` starts from the exact
//! two-group conditional and grows by split-kernel draws; above it,
//! `n^(k+1)` is one split-kernel draw from the current composition. Each
//! iteration refreshes these auxiliaries and then proposes to relabel
//! `n^(k+1)` or `n^(k-1)` as the current state.

use rand::Rng;

use crate::composition::Composition;
use crate::logspace::log_sum_exp;
use crate::model::Model;

use super::moves::{propose_split, split_kernel_prob};

/// Exact distribution of the two-group composition `(j, n - j)`, `j = 1..n-1`.
#[derive(Debug, Clone)]
pub struct TwoGroupTarget {
    n: usize,
    log_probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl TwoGroupTarget {
    pub fn new(model: &Model<'_>) -> Self {
        let n = model.n();
        let raw: Vec<f64> = (1..n)
            .map(|j| model.log_prob(&Composition::new(vec![j, n - j]).expect("n >= 2")))
            .collect();
        let norm = log_sum_exp(&raw);
        let log_probs: Vec<f64> = raw.iter().map(|lp| lp - norm).collect();
        let mut acc = 0.0;
        let cdf = log_probs
            .iter()
            .map(|lp| {
                acc += lp.exp();
                acc
            })
            .collect();
        Self { n, log_probs, cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Composition {
        let u = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        let idx = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        Composition::new(vec![idx + 1, self.n - idx - 1]).expect("valid two-group split")
    }

    /// Log-probability of a two-group composition; `-inf` for anything else.
    pub fn log_prob(&self, comp: &Composition) -> f64 {
        match comp.parts() {
            [j, _] => self.log_probs[j - 1],
            _ => f64::NEG_INFINITY,
        }
    }
}

/// Draw `n^(target_k)` from the lower chain, returning it together with the
/// log-density of its last link (`p(n^(2))` when `target_k = 2`, the split
/// kernel otherwise, zero for the deterministic `n^(1)`).
pub(crate) fn sample_lower<R: Rng + ?Sized>(
    two: &TwoGroupTarget,
    n: usize,
    target_k: usize,
    rng: &mut R,
) -> (Composition, f64) {
    if target_k == 1 {
        return (Composition::single(n), 0.0);
    }
    let mut current = two.sample(rng);
    let mut log_link = two.log_prob(&current);
    for _ in 3..=target_k {
        let split = propose_split(&current, rng).expect("k < n keeps a splittable group");
        log_link = split.log_forward;
        current = split.comp;
    }
    (current, log_link)
}

/// Log-density that the lower chain places on `comp` as the successor of
/// `previous` (the entry one group below it).
pub(crate) fn lower_link_log_prob(
    two: &TwoGroupTarget,
    previous: Option<&Composition>,
    comp: &Composition,
) -> f64 {
    match comp.k() {
        1 => 0.0,
        2 => two.log_prob(comp),
        _ => {
            let prev = previous.expect("k >= 3 has a predecessor");
            split_kernel_prob(prev, comp)
                .map(f64::ln)
                .unwrap_or(f64::NEG_INFINITY)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::SMALL10;
    use crate::exact::exact_posterior;
    use crate::model::{prepare_dataset, Hyperparams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_group_target_matches_exact_conditional() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let h = Hyperparams::default();
        let model = Model::new(&ds, h);
        let two = TwoGroupTarget::new(&model);
        let post = exact_posterior(&ds, &h).unwrap();
        let p2 = post.k_marginal()[1];
        for j in 1..10 {
            let c = Composition::new(vec![j, 10 - j]).unwrap();
            let conditional = post.prob(&c).unwrap() / p2;
            assert!((two.log_prob(&c).exp() - conditional).abs() < 1e-12);
        }
        assert_eq!(two.log_prob(&Composition::single(10)), f64::NEG_INFINITY);
    }

    #[test]
    fn two_group_sampling_frequencies() {
        let ds = prepare_dataset(&[0.0, 0.1, 0.2, 3.0, 3.1]).unwrap();
        let model = Model::new(&ds, Hyperparams::default());
        let two = TwoGroupTarget::new(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 4];
        let draws = 40_000;
        for _ in 0..draws {
            counts[two.sample(&mut rng).parts()[0] - 1] += 1;
        }
        for j in 1..5 {
            let c = Composition::new(vec![j, 5 - j]).unwrap();
            let p = two.log_prob(&c).exp();
            let freq = counts[j - 1] as f64 / draws as f64;
            assert!((freq - p).abs() < 0.01, "j {j}: {freq} vs {p}");
        }
    }

    #[test]
    fn lower_chain_reaches_requested_depth() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let model = Model::new(&ds, Hyperparams::default());
        let two = TwoGroupTarget::new(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=10 {
            let (c, log_link) = sample_lower(&two, 10, k, &mut rng);
            assert_eq!(c.k(), k);
            assert_eq!(c.n(), 10);
            assert!(log_link.is_finite() && log_link <= 0.0);
        }
    }
}
