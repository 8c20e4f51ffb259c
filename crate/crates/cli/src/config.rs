//! Experiment configuration: a TOML file, command-line flags layered on top,
//! and resolution into a validated [`ExperimentConfig`].
//!
//! File keys match the long flag names with `-` replaced by `_`:
//!
//! ```toml
//! policy = ["distributed-ets", "independent-ets"]
//! means = [0.9, 0.5, 0.4, 0.1]
//! M = 2
//! T = 200000
//! c = 0.5
//! seed = 1
//! seed_count = 10
//! ```

use std::path::{Path, PathBuf};

use clap::Parser;
use dts_core::{
    BanditInstance, BoundInputs, DistributedConfig, ExecMode, Policy, Pooling, UpdateRule,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// Unvalidated configuration as read from a file and/or flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub policy: Option<OneOrMany<String>>,
    pub means: Option<Vec<f64>>,
    #[serde(rename = "K")]
    pub arms: Option<usize>,
    #[serde(rename = "M")]
    pub agents: Option<usize>,
    #[serde(rename = "T")]
    pub horizon: Option<u64>,
    pub best_mean: Option<f64>,
    pub gap: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub seed_count: Option<u64>,
    pub c: Option<f64>,
    pub big_c: Option<f64>,
    pub c2: Option<f64>,
    pub c2_prime: Option<f64>,
    pub stage1_const: Option<f64>,
    pub stage2_const: Option<f64>,
    pub burn_in: Option<u64>,
    pub update: Option<String>,
    pub pooling: Option<String>,
    pub carry_posteriors: Option<bool>,
    pub emit_messages: Option<bool>,
    pub threaded: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

/// Command-line flags. Every flag overrides the matching config-file key.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "dts",
    version,
    about = "Simulate distributed elimination-based Thompson Sampling on Bernoulli bandits"
)]
pub struct CliArgs {
    /// TOML experiment file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Policy or comma-separated policies: distributed-ets, independent-ets, vanilla-ts
    #[arg(long, value_delimiter = ',')]
    pub policy: Option<Vec<String>>,
    /// Comma-separated arm means
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub means: Option<Vec<f64>>,
    /// Number of arms
    #[arg(long = "K")]
    pub arms: Option<usize>,
    /// Number of agents
    #[arg(long = "M")]
    pub agents: Option<usize>,
    /// Horizon (rounds per agent)
    #[arg(long = "T")]
    pub horizon: Option<u64>,
    /// Best mean for the uniform-gap generator
    #[arg(long)]
    pub best_mean: Option<f64>,
    /// Gap of every other arm for the uniform-gap generator
    #[arg(long)]
    pub gap: Option<f64>,
    /// Seed, or base seed when combined with --seed-count
    #[arg(long)]
    pub seed: Option<u64>,
    /// Explicit comma-separated seed list
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Number of consecutive seeds starting at --seed
    #[arg(long)]
    pub seed_count: Option<u64>,
    /// Phase schedule constant c in ceil(c 4^l ln T)
    #[arg(long)]
    pub c: Option<f64>,
    /// Constant C of the burn-in pull-count bound
    #[arg(long)]
    pub big_c: Option<f64>,
    /// Constant C2 (phase-count lower bound, stage-2 pull-count bound)
    #[arg(long)]
    pub c2: Option<f64>,
    /// Constant C2' (phase-count upper bound)
    #[arg(long)]
    pub c2_prime: Option<f64>,
    /// Constant of the stage-1 headline bound
    #[arg(long)]
    pub stage1_const: Option<f64>,
    /// Constant of the stage-2 headline bound
    #[arg(long)]
    pub stage2_const: Option<f64>,
    /// Per-agent burn-in pulls (default floor(T / (M K)))
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Posterior update rule: per-pull or per-phase
    #[arg(long)]
    pub update: Option<String>,
    /// Survivor pooling between stages: union or intersection
    #[arg(long)]
    pub pooling: Option<String>,
    /// Keep stage-1 posteriors when entering stage 2
    #[arg(long)]
    pub carry_posteriors: bool,
    /// Write the stage-2 message log as JSON lines
    #[arg(long)]
    pub emit_messages: bool,
    /// Run each agent on its own thread
    #[arg(long)]
    pub threaded: bool,
    /// Output directory
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl CliArgs {
    /// Writes every flag that was given over `raw`.
    pub fn overlay(&self, raw: &mut RawConfig) {
        fn set<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
            if value.is_some() {
                *slot = value.clone();
            }
        }
        if let Some(p) = &self.policy {
            raw.policy = Some(OneOrMany::Many(p.clone()));
        }
        set(&mut raw.means, &self.means);
        set(&mut raw.arms, &self.arms);
        set(&mut raw.agents, &self.agents);
        set(&mut raw.horizon, &self.horizon);
        set(&mut raw.best_mean, &self.best_mean);
        set(&mut raw.gap, &self.gap);
        if self.seeds.is_some() {
            raw.seed = None;
            raw.seed_count = None;
            raw.seeds = self.seeds.clone();
        }
        if self.seed.is_some() || self.seed_count.is_some() {
            raw.seeds = None;
            set(&mut raw.seed, &self.seed);
            set(&mut raw.seed_count, &self.seed_count);
        }
        set(&mut raw.c, &self.c);
        set(&mut raw.big_c, &self.big_c);
        set(&mut raw.c2, &self.c2);
        set(&mut raw.c2_prime, &self.c2_prime);
        set(&mut raw.stage1_const, &self.stage1_const);
        set(&mut raw.stage2_const, &self.stage2_const);
        set(&mut raw.burn_in, &self.burn_in);
        set(&mut raw.update, &self.update);
        set(&mut raw.pooling, &self.pooling);
        if self.carry_posteriors {
            raw.carry_posteriors = Some(true);
        }
        if self.emit_messages {
            raw.emit_messages = Some(true);
        }
        if self.threaded {
            raw.threaded = Some(true);
        }
        set(&mut raw.out_dir, &self.out_dir);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSpec {
    Means(Vec<f64>),
    UniformGap { best_mean: f64, gap: f64 },
}

/// Fully resolved experiment. Serialised into every summary so a run can be
/// reproduced from its summary alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub means: Vec<f64>,
    #[serde(rename = "K")]
    pub arms: usize,
    #[serde(rename = "M")]
    pub agents: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub policies: Vec<Policy>,
    pub c: f64,
    pub update: UpdateRule,
    pub burn_in: Option<u64>,
    pub big_c: f64,
    pub c2: f64,
    pub c2_prime: f64,
    pub stage1_const: f64,
    pub stage2_const: f64,
    pub seeds: Vec<u64>,
    pub pooling: Pooling,
    pub carry_posteriors: bool,
    pub emit_messages: bool,
    /// Fields that were not given and took their default value.
    pub defaulted: Vec<String>,
    /// Output is identical in both modes, so it is not echoed.
    #[serde(skip)]
    pub mode: ExecMode,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

pub const DEFAULT_OUT_DIR: &str = "dts-out";

fn invalid(field: &str, why: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("`{field}`: {why}"))
}

fn positive(field: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(field, format!("must be a positive number, got {value}")))
    }
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => {
                HarnessError::Config(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let mut defaulted = Vec::new();
        let mut or_default = |name: &str, value: Option<f64>, default: f64| {
            value.unwrap_or_else(|| {
                defaulted.push(name.to_string());
                default
            })
        };
        let c = positive("c", or_default("c", self.c, 0.5))?;
        let big_c = positive("big_c", or_default("big_c", self.big_c, 1.0))?;
        let c2 = positive("c2", or_default("c2", self.c2, 1.0))?;
        let c2_prime = positive("c2_prime", or_default("c2_prime", self.c2_prime, 1.0))?;
        let stage1_const =
            positive("stage1_const", or_default("stage1_const", self.stage1_const, 1.0))?;
        let stage2_const =
            positive("stage2_const", or_default("stage2_const", self.stage2_const, 1.0))?;

        let (instance, means) = match (self.means, self.best_mean, self.gap) {
            (Some(means), None, None) => (InstanceSpec::Means(means.clone()), means),
            (None, Some(best_mean), Some(gap)) => {
                let arms = self
                    .arms
                    .ok_or_else(|| invalid("K", "required with best_mean and gap"))?;
                let env = BanditInstance::uniform_gap(arms, best_mean, gap)
                    .map_err(|e| invalid("gap", e))?;
                (
                    InstanceSpec::UniformGap { best_mean, gap },
                    env.means().to_vec(),
                )
            }
            (Some(_), _, _) => {
                return Err(invalid("means", "give either means or best_mean + gap, not both"))
            }
            _ => {
                return Err(invalid(
                    "means",
                    "missing instance: give means, or K with best_mean and gap",
                ))
            }
        };
        BanditInstance::new(means.clone()).map_err(|e| invalid("means", e))?;
        if let Some(k) = self.arms {
            if k != means.len() {
                return Err(invalid(
                    "K",
                    format!("{k} does not match the {} listed means", means.len()),
                ));
            }
        }
        let arms = means.len();

        let agents = self.agents.ok_or_else(|| invalid("M", "required"))?;
        if agents == 0 {
            return Err(invalid("M", "need at least one agent"));
        }
        let horizon = self.horizon.ok_or_else(|| invalid("T", "required"))?;
        if horizon < 2 {
            return Err(invalid("T", format!("must be at least 2, got {horizon}")));
        }

        let policies = match self.policy {
            Some(p) => {
                let names = p.into_vec();
                if names.is_empty() {
                    return Err(invalid("policy", "empty policy list"));
                }
                let mut policies = Vec::new();
                for name in names {
                    let policy: Policy = name.parse().map_err(|e| invalid("policy", e))?;
                    if policies.contains(&policy) {
                        return Err(invalid("policy", format!("{policy} listed twice")));
                    }
                    policies.push(policy);
                }
                policies
            }
            None => {
                defaulted.push("policy".into());
                vec![Policy::DistributedEts]
            }
        };
        let mk = (agents * arms) as u64;
        if policies.contains(&Policy::DistributedEts) && horizon < mk {
            return Err(invalid(
                "T",
                format!("distributed-ets needs T >= M*K = {mk}, got {horizon}"),
            ));
        }
        if let Some(d) = self.burn_in {
            if d == 0 || d > horizon {
                return Err(invalid("burn_in", format!("must lie in [1, {horizon}], got {d}")));
            }
        } else {
            defaulted.push("burn_in".into());
        }

        let seeds = match (self.seeds, self.seed, self.seed_count) {
            (Some(seeds), None, None) => seeds,
            (Some(_), _, _) => {
                return Err(invalid("seeds", "give either seeds or seed/seed_count, not both"))
            }
            (None, seed, count) => {
                let base = seed.unwrap_or_else(|| {
                    defaulted.push("seed".into());
                    0
                });
                let count = count.unwrap_or_else(|| {
                    defaulted.push("seed_count".into());
                    1
                });
                (0..count).map(|i| base.wrapping_add(i)).collect()
            }
        };
        if seeds.is_empty() {
            return Err(invalid("seeds", "seed list is empty"));
        }
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        if unique.len() != seeds.len() {
            return Err(invalid("seeds", "seeds must be distinct"));
        }

        let update = match self.update {
            Some(s) => s.parse().map_err(|e| invalid("update", e))?,
            None => {
                defaulted.push("update".into());
                UpdateRule::default()
            }
        };
        let pooling = match self.pooling {
            Some(s) => s.parse().map_err(|e| invalid("pooling", e))?,
            None => {
                defaulted.push("pooling".into());
                Pooling::default()
            }
        };
        let mut flag = |name: &str, value: Option<bool>| {
            value.unwrap_or_else(|| {
                defaulted.push(name.to_string());
                false
            })
        };
        let carry_posteriors = flag("carry_posteriors", self.carry_posteriors);
        let emit_messages = flag("emit_messages", self.emit_messages);
        let mode = if self.threaded.unwrap_or(false) {
            ExecMode::Threaded
        } else {
            ExecMode::Sequential
        };
        let out_dir = self
            .out_dir
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

        Ok(ExperimentConfig {
            instance,
            means,
            arms,
            agents,
            horizon,
            policies,
            c,
            update,
            burn_in: self.burn_in,
            big_c,
            c2,
            c2_prime,
            stage1_const,
            stage2_const,
            seeds,
            pooling,
            carry_posteriors,
            emit_messages,
            defaulted,
            mode,
            out_dir,
        })
    }
}

/// Reads `--config` (if any), applies the flags on top and validates.
pub fn parse_config(args: &CliArgs) -> Result<ExperimentConfig> {
    let mut raw = match &args.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    args.overlay(&mut raw);
    raw.resolve()
}

impl ExperimentConfig {
    pub fn instance(&self) -> BanditInstance {
        BanditInstance::new(self.means.clone()).expect("validated during resolution")
    }

    pub fn run_config(&self) -> DistributedConfig {
        DistributedConfig {
            agents: self.agents,
            horizon: self.horizon,
            schedule_const: self.c,
            update: self.update,
            burn_in: self.burn_in,
            pooling: self.pooling,
            carry_posteriors: self.carry_posteriors,
            mode: self.mode,
        }
    }

    pub fn bound_inputs(&self, burn_in: u64) -> BoundInputs {
        let mut inputs = BoundInputs::new(
            self.agents,
            self.horizon as f64,
            burn_in as f64,
            self.instance().gaps(),
        );
        inputs.c = self.big_c;
        inputs.c2 = self.c2;
        inputs.c2_prime = self.c2_prime;
        inputs.stage1_const = self.stage1_const;
        inputs.stage2_const = self.stage2_const;
        inputs
    }
}
