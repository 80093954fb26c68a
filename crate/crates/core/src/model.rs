//! The ordered classification model: closed-form unnormalized log-probability
//! of a composition of sorted observations.
//!
//! Each group contributes a stick-breaking weight term that depends only on its
//! size and the number of observations to its right, and a Normal-Gamma
//! marginal likelihood term that depends on the group's shrunk sum of squares.

use serde::{Deserialize, Serialize};

use crate::composition::Composition;
use crate::error::{ClassifyError, Result};
use crate::logspace::ln_gamma;

/// Model constants: DP total mass `theta`, Gamma shape `a` and rate `b` on the
/// precision, and prior precision scale `c` on the group mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    theta: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl Hyperparams {
    pub fn new(theta: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, value) in [("theta", theta), ("a", a), ("b", b), ("c", c)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ClassifyError::InvalidHyperparam { name, value });
            }
        }
        Ok(Self { theta, a, b, c })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

impl Default for Hyperparams {
    /// `theta = a = b = 1`, `c = 0.1`.
    fn default() -> Self {
        Self {
            theta: 1.0,
            a: 1.0,
            b: 1.0,
            c: 0.1,
        }
    }
}

/// Observations sorted ascending, with cumulative sums of `y` and `y^2`.
///
/// Immutable after construction; every group statistic is O(1).
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedDataset {
    values: Vec<f64>,
    prefix_sum: Vec<f64>,
    prefix_sumsq: Vec<f64>,
}

impl OrderedDataset {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn prefix_sum(&self) -> &[f64] {
        &self.prefix_sum
    }

    pub fn prefix_sumsq(&self) -> &[f64] {
        &self.prefix_sumsq
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Sum of `y` and `y^2` over `start..start + len`.
    #[inline]
    fn slice_sums(&self, start: usize, len: usize) -> (f64, f64) {
        let end = start + len;
        let (s0, q0) = if start == 0 {
            (0.0, 0.0)
        } else {
            (self.prefix_sum[start - 1], self.prefix_sumsq[start - 1])
        };
        (
            self.prefix_sum[end - 1] - s0,
            self.prefix_sumsq[end - 1] - q0,
        )
    }
}

/// Validate, sort and index the raw observations.
pub fn prepare_dataset(raw: &[f64]) -> Result<OrderedDataset> {
    if raw.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    if let Some(i) = raw.iter().position(|v| !v.is_finite()) {
        return Err(ClassifyError::NonFinite(i));
    }
    let mut values = raw.to_vec();
    values.sort_by(f64::total_cmp);
    let mut prefix_sum = Vec::with_capacity(values.len());
    let mut prefix_sumsq = Vec::with_capacity(values.len());
    let (mut s, mut q) = (0.0, 0.0);
    for &v in &values {
        s += v;
        q += v * v;
        prefix_sum.push(s);
        prefix_sumsq.push(q);
    }
    Ok(OrderedDataset {
        values,
        prefix_sum,
        prefix_sumsq,
    })
}

/// Summary of one contiguous group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub n_j: usize,
    pub ybar_j: f64,
    /// Shrunk sum of squares `sum(y^2) - n_j * ybar^2 / (1 + c / n_j)`.
    pub s2_j: f64,
    /// Observations in later groups.
    pub m_j: usize,
}

pub fn group_stats(ds: &OrderedDataset, start: usize, len: usize, c: f64) -> Result<GroupStats> {
    let n = ds.n();
    if len == 0 || start + len > n {
        return Err(ClassifyError::InvalidGroupBounds { start, len, n });
    }
    Ok(group_stats_unchecked(ds, start, len, c))
}

#[inline]
pub(crate) fn group_stats_unchecked(
    ds: &OrderedDataset,
    start: usize,
    len: usize,
    c: f64,
) -> GroupStats {
    let (sum, sumsq) = ds.slice_sums(start, len);
    stats_from_sums(len, sum, sumsq, ds.n() - (start + len), c)
}

/// Group statistics from raw sums; also used for non-contiguous MDP blocks.
#[inline]
pub(crate) fn stats_from_sums(n_j: usize, sum: f64, sumsq: f64, m_j: usize, c: f64) -> GroupStats {
    let nf = n_j as f64;
    let ybar = sum / nf;
    // sum(y^2) - n ybar^2 / (1 + c/n) = [sum(y^2) - n ybar^2] + n ybar^2 * (c/n)/(1 + c/n).
    // Splitting it this way keeps the result non-negative under cancellation.
    let centered = (sumsq - sum * ybar).max(0.0);
    let shrink = sum * ybar * (c / nf) / (1.0 + c / nf);
    GroupStats {
        n_j,
        ybar_j: ybar,
        s2_j: centered + shrink,
        m_j,
    }
}

/// `log[theta * Gamma(1 + n_j) * Gamma(theta + m_j) / Gamma(1 + theta + n_j + m_j)]`.
#[inline]
pub fn log_weight_term(n_j: usize, m_j: usize, theta: f64) -> f64 {
    let nf = n_j as f64;
    let mf = m_j as f64;
    theta.ln() + ln_gamma(1.0 + nf) + ln_gamma(theta + mf) - ln_gamma(1.0 + theta + nf + mf)
}

/// Log Normal-Gamma marginal likelihood of one group:
/// `Gamma(a + n/2) b^a sqrt(c) / [(b + S^2/2)^(a + n/2) sqrt(c + n) Gamma(a)]`.
#[inline]
pub fn log_marginal_term(stats: &GroupStats, h: &Hyperparams) -> f64 {
    let nf = stats.n_j as f64;
    let shape = h.a + 0.5 * nf;
    ln_gamma(shape) + h.a * h.b.ln() + 0.5 * h.c.ln()
        - shape * (h.b + 0.5 * stats.s2_j).ln()
        - 0.5 * (h.c + nf).ln()
        - ln_gamma(h.a)
}

/// Unnormalized log-probability of `comp`; the normalizing constant is excluded.
pub fn log_unnorm_prob(comp: &Composition, ds: &OrderedDataset, h: &Hyperparams) -> Result<f64> {
    if comp.n() != ds.n() {
        return Err(ClassifyError::LengthMismatch {
            composition: comp.n(),
            dataset: ds.n(),
        });
    }
    Ok(log_unnorm_prob_unchecked(comp.parts(), ds, h))
}

#[inline]
pub(crate) fn log_unnorm_prob_unchecked(
    parts: &[usize],
    ds: &OrderedDataset,
    h: &Hyperparams,
) -> f64 {
    let mut total = 0.0;
    let mut start = 0;
    for &len in parts {
        total += log_group_term(ds, start, len, h);
        start += len;
    }
    total
}

#[inline]
pub(crate) fn log_group_term(
    ds: &OrderedDataset,
    start: usize,
    len: usize,
    h: &Hyperparams,
) -> f64 {
    let stats = group_stats_unchecked(ds, start, len, h.c);
    log_weight_term(len, stats.m_j, h.theta) + log_marginal_term(&stats, h)
}

/// A dataset paired with hyperparameters: the sampling target.
#[derive(Debug, Clone, Copy)]
pub struct Model<'a> {
    pub data: &'a OrderedDataset,
    pub hyper: Hyperparams,
}

impl<'a> Model<'a> {
    pub fn new(data: &'a OrderedDataset, hyper: Hyperparams) -> Self {
        Self { data, hyper }
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    /// Unnormalized log-probability; `comp` must sum to `n`.
    #[inline]
    pub fn log_prob(&self, comp: &Composition) -> f64 {
        debug_assert_eq!(comp.n(), self.data.n());
        log_unnorm_prob_unchecked(comp.parts(), self.data, &self.hyper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::SMALL10;

    fn direct_stats(slice: &[f64], c: f64) -> (f64, f64) {
        let n = slice.len() as f64;
        let ybar = slice.iter().sum::<f64>() / n;
        let sumsq: f64 = slice.iter().map(|y| y * y).sum();
        (ybar, sumsq - n * ybar * ybar / (1.0 + c / n))
    }

    #[test]
    fn hyperparams_validate() {
        assert!(Hyperparams::new(1.0, 1.0, 1.0, 0.1).is_ok());
        assert!(Hyperparams::new(0.0, 1.0, 1.0, 0.1).is_err());
        assert!(Hyperparams::new(1.0, -1.0, 1.0, 0.1).is_err());
        assert!(Hyperparams::new(1.0, 1.0, f64::INFINITY, 0.1).is_err());
        assert!(Hyperparams::new(1.0, 1.0, 1.0, f64::NAN).is_err());
        assert_eq!(
            Hyperparams::default(),
            Hyperparams::new(1.0, 1.0, 1.0, 0.1).unwrap()
        );
    }

    #[test]
    fn prepare_sorts_and_sums() {
        let ds = prepare_dataset(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(ds.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(ds.prefix_sum(), &[1.0, 3.0, 6.0]);
        assert_eq!(ds.prefix_sumsq(), &[1.0, 5.0, 14.0]);

        let one = prepare_dataset(&[5.5]).unwrap();
        assert_eq!(one.n(), 1);
        assert_eq!(one.prefix_sum(), &[5.5]);
    }

    #[test]
    fn prepare_rejects_bad_input() {
        assert_eq!(prepare_dataset(&[]), Err(ClassifyError::EmptyDataset));
        assert_eq!(
            prepare_dataset(&[1.0, f64::NAN]),
            Err(ClassifyError::NonFinite(1))
        );
        let err = prepare_dataset(&[f64::NEG_INFINITY]).unwrap_err();
        assert_eq!(err.to_string(), "non-finite observation at index 0");
    }

    #[test]
    fn small10_is_sorted() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        assert_eq!(&ds.values()[..5], &[-1.522, -1.292, -0.856, -0.104, 2.388]);
    }

    #[test]
    fn singleton_group_stats() {
        let ds = prepare_dataset(&[0.0]).unwrap();
        let s = group_stats(&ds, 0, 1, 0.37).unwrap();
        assert_eq!(s.s2_j, 0.0);
        assert_eq!(s.ybar_j, 0.0);

        let ds = prepare_dataset(&[2.0]).unwrap();
        let s = group_stats(&ds, 0, 1, 0.1).unwrap();
        let (_, direct) = direct_stats(&[2.0], 0.1);
        assert!((s.s2_j - 4.0 * 0.1 / 1.1).abs() < 1e-14);
        assert!((s.s2_j - direct).abs() < 1e-14);
        assert!((s.s2_j - 0.363_636_363_636_363_6).abs() < 1e-14);
    }

    #[test]
    fn first_four_small10_points() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let s = group_stats(&ds, 0, 4, 0.1).unwrap();
        let (ybar, s2) = direct_stats(&ds.values()[..4], 0.1);
        assert!((s.ybar_j - ybar).abs() < 1e-14);
        assert!((s.s2_j - s2).abs() < 1e-12 * s2.abs().max(1.0));
        assert_eq!(s.m_j, 6);
    }

    #[test]
    fn group_bounds_checked() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        assert!(group_stats(&ds, 0, 0, 0.1).is_err());
        assert!(group_stats(&ds, 8, 3, 0.1).is_err());
        assert!(group_stats(&ds, 9, 1, 0.1).is_ok());
    }

    #[test]
    fn weight_term_values() {
        for n in 1..15usize {
            // single group with theta = 1: 1 / (n + 1)
            let got = log_weight_term(n, 0, 1.0);
            assert!((got - (1.0 / (n as f64 + 1.0)).ln()).abs() < 1e-12);
        }
        assert!((log_weight_term(1, 0, 1.0) - 0.5f64.ln()).abs() < 1e-14);
        let exact = (24.0 * 720.0 / 39_916_800.0f64).ln();
        assert!((log_weight_term(4, 6, 1.0) - exact).abs() < 1e-12);
    }

    #[test]
    fn weight_term_integer_theta_identity() {
        // Gamma(theta + 1) n! / Gamma(theta + n + 1) with integer theta
        for theta in 1..5u32 {
            for n in 1..12u32 {
                let mut ratio = 1.0f64;
                // theta! n! / (theta + n)!  =  prod_{i=1..n} i / (theta + i)
                for i in 1..=n {
                    ratio *= i as f64 / (theta + i) as f64;
                }
                let got = log_weight_term(n as usize, 0, theta as f64).exp();
                assert!((got - ratio).abs() < 1e-12 * ratio, "theta {theta} n {n}");
            }
        }
    }

    /// Two-dimensional quadrature of the Normal-Gamma marginal for a single
    /// observation: integral of N(y; mu, 1/l) N(mu; 0, 1/(c l)) Gamma(l; a, b).
    fn quadrature_marginal(y: f64, a: f64, b: f64, c: f64) -> f64 {
        fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
            let h = (hi - lo) / steps as f64;
            let mut acc = f(lo) + f(hi);
            for i in 1..steps {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(lo + i as f64 * h);
            }
            acc * h / 3.0
        }
        let norm = |x: f64, mean: f64, prec: f64| {
            (prec / (2.0 * std::f64::consts::PI)).sqrt() * (-0.5 * prec * (x - mean).powi(2)).exp()
        };
        let gamma_pdf = |l: f64| (a * b.ln() + (a - 1.0) * l.ln() - b * l - libm::lgamma(a)).exp();
        // lambda = t^2 removes the sqrt behaviour at zero; mu = z / sqrt(c lambda).
        simpson(
            |t| {
                if t == 0.0 {
                    return 0.0;
                }
                let l = t * t;
                let scale = 1.0 / (c * l).sqrt();
                let inner = simpson(
                    |z| {
                        let mu = z * scale;
                        norm(y, mu, l) * norm(mu, 0.0, c * l) * scale
                    },
                    -12.0,
                    12.0,
                    2000,
                );
                inner * gamma_pdf(l) * 2.0 * t
            },
            0.0,
            8.0,
            4000,
        )
    }

    // The closed form omits the (2 pi)^(-n_j / 2) factor of the Normal
    // density: it multiplies every composition by the same (2 pi)^(-n / 2).
    fn without_gaussian_constant(marginal: f64, n_j: usize) -> f64 {
        marginal * (2.0 * std::f64::consts::PI).powf(n_j as f64 / 2.0)
    }

    #[test]
    fn marginal_term_matches_quadrature() {
        let h = Hyperparams::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let ds = prepare_dataset(&[0.0]).unwrap();
        let s = group_stats(&ds, 0, 1, h.c()).unwrap();
        let got = log_marginal_term(&s, &h).exp();
        let oracle = without_gaussian_constant(quadrature_marginal(0.0, 1.0, 1.0, 0.1), 1);
        assert!((got - oracle).abs() < 1e-6, "got {got}, oracle {oracle}");
        assert!((got - 0.267_207).abs() < 1e-6);

        let ds = prepare_dataset(&[1.7]).unwrap();
        let h2 = Hyperparams::new(1.0, 2.0, 0.5, 0.3).unwrap();
        let s = group_stats(&ds, 0, 1, h2.c()).unwrap();
        let got = log_marginal_term(&s, &h2).exp();
        let oracle = without_gaussian_constant(quadrature_marginal(1.7, 2.0, 0.5, 0.3), 1);
        assert!((got - oracle).abs() < 1e-6, "got {got}, oracle {oracle}");
    }

    #[test]
    fn marginal_finite_for_extreme_values() {
        let h = Hyperparams::default();
        for t in [0.0, 1e-300, 1e3, -1e8, 1e150] {
            let ds = prepare_dataset(&[t]).unwrap();
            let s = group_stats(&ds, 0, 1, h.c()).unwrap();
            assert!(log_marginal_term(&s, &h).is_finite(), "t = {t}");
        }
    }

    #[test]
    fn s2_tends_to_within_group_ss() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let slice = &ds.values()[4..];
        let mean = slice.iter().sum::<f64>() / slice.len() as f64;
        let within: f64 = slice.iter().map(|y| (y - mean).powi(2)).sum();
        let mut previous = f64::INFINITY;
        for c in [1.0, 1e-4, 1e-8] {
            let s = group_stats(&ds, 4, 6, c).unwrap();
            assert!(s.s2_j >= within - 1e-12);
            assert!(s.s2_j <= previous);
            previous = s.s2_j;
        }
        assert!((previous - within).abs() < 1e-6);
    }

    #[test]
    fn log_unnorm_prob_checks_length() {
        let ds = prepare_dataset(&SMALL10).unwrap();
        let comp = Composition::new(vec![4, 5]).unwrap();
        let err = log_unnorm_prob(&comp, &ds, &Hyperparams::default()).unwrap_err();
        assert!(err
            .to_string()
            .starts_with("composition/dataset length mismatch"));
    }

    #[test]
    fn single_point_single_group() {
        let ds = prepare_dataset(&[0.4]).unwrap();
        let h = Hyperparams::default();
        let lp = log_unnorm_prob(&Composition::single(1), &ds, &h).unwrap();
        let s = group_stats(&ds, 0, 1, h.c()).unwrap();
        assert_eq!(lp, log_weight_term(1, 0, 1.0) + log_marginal_term(&s, &h));
    }
}
