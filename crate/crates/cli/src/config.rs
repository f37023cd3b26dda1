//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use bdpp::bilevel::{EarlyStopConfig, ProxyConfig, SearchConfig};
use bdpp::oracle::TaskParams;
use bdpp::regularizers::{
    AlphaRegularizer, AlphaVariant, LambdaSchedule, ScheduleKind, WeightRegularizer, WeightVariant,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub search: SearchSection,
    pub regularizers: RegularizerSection,
    #[serde(default)]
    pub proxy: ProxyConfig,
    #[serde(default)]
    pub task: TaskParams,
    #[serde(default)]
    pub benchmark: BenchmarkSource,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub eta_alpha: f64,
    pub eta_w: f64,
    pub batch_size: usize,
    #[serde(default = "default_split")]
    pub split_fraction_w: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub early_stop: EarlyStopConfig,
}

fn default_split() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerSection {
    pub alpha: AlphaSection,
    pub weight: WeightSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSection {
    pub variant: AlphaVariant,
    pub schedule: ScheduleSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub kind: ScheduleKind,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub variant: WeightVariant,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchmarkSource {
    Generated { seed: u64 },
    Imported { path: PathBuf },
}

impl Default for BenchmarkSource {
    fn default() -> Self {
        BenchmarkSource::Generated { seed: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Trajectory CSV, used when `--out` is not given.
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
}

impl Default for RunConfig {
    /// Beta-Decay 0 → 5 with flooding at 0.15 on the default task.
    fn default() -> Self {
        Self {
            search: SearchSection {
                eta_alpha: 0.3,
                eta_w: 0.3,
                batch_size: 16,
                split_fraction_w: 0.5,
                seed: 0,
                early_stop: EarlyStopConfig::default(),
            },
            regularizers: RegularizerSection {
                alpha: AlphaSection {
                    variant: AlphaVariant::BetaDecay,
                    schedule: ScheduleSection {
                        kind: ScheduleKind::LinearIncrease,
                        start: 0.0,
                        end: 5.0,
                    },
                },
                weight: WeightSection {
                    variant: WeightVariant::Flooding,
                    coefficient: 0.15,
                },
            },
            proxy: ProxyConfig::default(),
            task: TaskParams::default(),
            benchmark: BenchmarkSource::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    /// The same run with no α regularization and an unregularized weight
    /// step.
    pub fn plain(&self) -> Self {
        let mut c = self.clone();
        c.regularizers = RegularizerSection {
            alpha: AlphaSection {
                variant: AlphaVariant::None,
                schedule: ScheduleSection {
                    kind: ScheduleKind::Constant,
                    start: 0.0,
                    end: 0.0,
                },
            },
            weight: WeightSection {
                variant: WeightVariant::L2,
                coefficient: 0.0,
            },
        };
        c
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config {
                field: if path == "." { "<root>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validated search settings.
    pub fn search_config(&self) -> Result<SearchConfig, CliError> {
        let a = &self.regularizers.alpha;
        let schedule = LambdaSchedule::new(a.schedule.kind, a.schedule.start, a.schedule.end, self.proxy.epochs.max(1))
            .map_err(|e| CliError::config("regularizers.alpha.schedule", e))?;
        let w = &self.regularizers.weight;
        let weight_reg = WeightRegularizer::new(w.variant, w.coefficient)
            .map_err(|e| CliError::config("regularizers.weight.coefficient", e))?;
        self.task.validate().map_err(|e| match e {
            bdpp::oracle::OracleError::InvalidTask { field, message } => CliError::Config {
                field: format!("task.{field}"),
                message,
            },
            other => CliError::config("task", other),
        })?;
        let config = SearchConfig {
            eta_alpha: self.search.eta_alpha,
            eta_w: self.search.eta_w,
            batch_size: self.search.batch_size,
            alpha_reg: AlphaRegularizer {
                variant: a.variant,
                schedule,
            },
            weight_reg,
            proxy: self.proxy,
            split_fraction_w: self.search.split_fraction_w,
            early_stop: self.search.early_stop,
            seed: self.search.seed,
        };
        config.validate()?;
        Ok(config)
    }
}
