use serde::{Deserialize, Serialize};

use crate::regularizers::{AlphaRegularizer, WeightRegularizer};

use super::BilevelError;

/// Environment variable that overrides [`SearchConfig::seed`].
pub const SEED_ENV: &str = "BDPP_SEED";

/// Proxy knobs: how much data, how wide, how deep and how long.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxyConfig {
    pub data_fraction: f64,
    pub channels: usize,
    pub layers: usize,
    pub epochs: usize,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        Self {
            data_fraction: 1.0,
            channels: 8,
            layers: 3,
            epochs: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    None,
    C1,
    C2,
    C3,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::None => "none",
            Criterion::C1 => "c1",
            Criterion::C2 => "c2",
            Criterion::C3 => "c3",
        }
    }
}

/// Plateau rule for the α-std early stop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EarlyStopConfig {
    pub criterion: Criterion,
    pub window: usize,
    pub tolerance: f64,
}

impl Default for EarlyStopConfig {
    fn default() -> Self {
        Self {
            criterion: Criterion::None,
            window: 5,
            tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub eta_alpha: f64,
    pub eta_w: f64,
    pub batch_size: usize,
    pub alpha_reg: AlphaRegularizer,
    pub weight_reg: WeightRegularizer,
    pub proxy: ProxyConfig,
    /// Fraction of the sampled data used for the weight step; the rest drives α.
    pub split_fraction_w: f64,
    pub early_stop: EarlyStopConfig,
    pub seed: u64,
}

impl SearchConfig {
    /// Field-path validation; paths follow the JSON run-config layout.
    pub fn validate(&self) -> Result<(), BilevelError> {
        let bad = |field: &str, message: String| {
            Err(BilevelError::InvalidConfig {
                field: field.to_string(),
                message,
            })
        };
        if !(self.eta_alpha.is_finite() && self.eta_alpha > 0.0) {
            return bad("search.eta_alpha", format!("must be positive, got {}", self.eta_alpha));
        }
        if !(self.eta_w.is_finite() && self.eta_w > 0.0) {
            return bad("search.eta_w", format!("must be positive, got {}", self.eta_w));
        }
        if self.batch_size == 0 {
            return bad("search.batch_size", "must be at least 1".into());
        }
        if !(self.split_fraction_w > 0.0 && self.split_fraction_w < 1.0) {
            return bad(
                "search.split_fraction_w",
                format!("must lie strictly between 0 and 1, got {}", self.split_fraction_w),
            );
        }
        let p = &self.proxy;
        if !(p.data_fraction > 0.0 && p.data_fraction <= 1.0) {
            return bad("proxy.data_fraction", format!("must be in (0, 1], got {}", p.data_fraction));
        }
        if p.channels == 0 {
            return bad("proxy.channels", "must be at least 1".into());
        }
        if p.layers == 0 {
            return bad("proxy.layers", "must be at least 1".into());
        }
        if p.epochs == 0 {
            return bad("proxy.epochs", "must be at least 1".into());
        }
        let es = &self.early_stop;
        if es.window == 0 {
            return bad("search.early_stop.window", "must be at least 1".into());
        }
        if !(es.tolerance.is_finite() && es.tolerance >= 0.0) {
            return bad(
                "search.early_stop.tolerance",
                format!("must be finite and non-negative, got {}", es.tolerance),
            );
        }
        Ok(())
    }

    /// Replace the seed with `BDPP_SEED` when it is set.
    pub fn apply_env_seed(&mut self) -> Result<(), BilevelError> {
        if let Some(seed) = seed_from_env()? {
            self.seed = seed;
        }
        Ok(())
    }
}

pub fn seed_from_env() -> Result<Option<u64>, BilevelError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| BilevelError::InvalidConfig {
            field: SEED_ENV.to_string(),
            message: format!("must be an unsigned integer, got `{v}`"),
        }),
        Err(_) => Ok(None),
    }
}
