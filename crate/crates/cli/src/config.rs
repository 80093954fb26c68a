use classify_core::{Hyperparams, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::ingest::DataSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MdpExact,
    McmcM1,
    McmcM2,
    Ward,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MdpExact => "mdp-exact",
            Method::McmcM1 => "mcmc-m1",
            Method::McmcM2 => "mcmc-m2",
            Method::Ward => "ward",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Method::Exact,
            "mdp-exact" | "mdp" => Method::MdpExact,
            "mcmc-m1" | "m1" => Method::McmcM1,
            "mcmc-m2" | "m2" => Method::McmcM2,
            "ward" => Method::Ward,
            other => return Err(CliError::Usage(format!("unknown method {other:?}"))),
        })
    }

    pub fn scheme(self) -> Option<Scheme> {
        match self {
            Method::McmcM1 => Some(Scheme::M1),
            Method::McmcM2 => Some(Scheme::M2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub q: f64,
    pub shuffle: bool,
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in: 1_000,
            seed: 1,
            q: 0.5,
            shuffle: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Everything one invocation needs; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataSource,
    pub column: Option<String>,
    pub scale: Option<f64>,
    pub hyper: Hyperparams,
    pub methods: Vec<Method>,
    pub mcmc: McmcSettings,
    /// Number of groups to cut the Ward tree at.
    pub ward_k: usize,
    pub top: usize,
    pub composition_cap: usize,
    pub partition_cap: usize,
    #[serde(skip)]
    pub debug_checks: bool,
}

impl RunConfig {
    pub fn new(data: DataSource, methods: Vec<Method>) -> Self {
        Self {
            data,
            column: None,
            scale: None,
            hyper: Hyperparams::default(),
            methods,
            mcmc: McmcSettings::default(),
            ward_k: 2,
            top: 5,
            composition_cap: classify_core::exact::DEFAULT_COMPOSITION_CAP,
            partition_cap: classify_core::partition::DEFAULT_PARTITION_CAP,
            debug_checks: false,
        }
    }

    /// Checks that need no data.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(CliError::Usage("no method selected".into()));
        }
        if self.top == 0 {
            return Err(CliError::Usage("--top must be at least 1".into()));
        }
        if self.methods.iter().any(|m| m.scheme().is_some()) {
            let m = &self.mcmc;
            if !(m.q > 0.0 && m.q < 1.0) {
                return Err(CliError::Usage(format!(
                    "--q must lie in (0, 1), got {}",
                    m.q
                )));
            }
            if m.iterations == 0 {
                return Err(CliError::Model(classify_core::ClassifyError::NoSamples));
            }
        }
        if self.methods.contains(&Method::Ward) && self.ward_k == 0 {
            return Err(CliError::Usage("--k must be at least 1".into()));
        }
        Ok(())
    }
}
