//! Bayesian classification of one-dimensional data into contiguous groups.
//!
//! Observations are sorted and a classification is an integer composition
//! `(n_1, .., n_k)` of the sample size: group sizes read left to right. The
//! model assigns each composition a closed-form probability built from
//! Dirichlet-process stick-breaking weights and Normal-Gamma marginal
//! likelihoods. This crate provides
//!
//! * [`model`]: the unnormalized log-probability of a composition,
//! * [`exact`]: the exact posterior by enumerating all `2^(n-1)` compositions,
//! * [`partition`]: the exact Dirichlet-process mixture posterior over set
//!   partitions, for comparison,
//! * [`mcmc`]: split-merge samplers for sample sizes beyond enumeration,
//! * [`ward`]: Ward's agglomerative clustering as a classical baseline.

pub mod composition;
pub mod datasets;
pub mod error;
pub mod exact;
pub mod logspace;
pub mod mcmc;
pub mod model;
pub mod partition;
pub mod ward;

pub use composition::Composition;
pub use error::{ClassifyError, Result};
pub use exact::{enumerate_compositions, exact_posterior, top_n, ExactPosterior};
pub use mcmc::{run_chain, run_chains, McmcConfig, McmcSummary, Scheme};
pub use model::{
    group_stats, log_marginal_term, log_unnorm_prob, log_weight_term, prepare_dataset, GroupStats,
    Hyperparams, Model, OrderedDataset,
};
pub use partition::{enumerate_set_partitions, mdp_exact_posterior, MdpPosterior, SetPartition};
pub use ward::{cut, ward_linkage, Dendrogram, Merge};
