//! Batch execution over `(policy, seed)` pairs and output emission.
//!
//! Per run, under the output directory:
//!
//! - `{policy}_{seed}.trace.csv`: `t,agent,arm,reward,stage,phase`
//! - `{policy}_{seed}.regret.csv`: `t,R_t,R_realized_t,stage`
//! - `{policy}_{seed}.summary.json`
//! - `{policy}_{seed}.messages.jsonl` when messages are requested
//!
//! and one `aggregate.json` for the whole batch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dts_core::{
    cumulative_regret, pull_counts, theorem1_decomposition, ArmId, BetaCounts, Bound,
    BoundInputs, Message, MessageKind, PhaseCountBounds, Policy, RunReport, StageBounds,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const TRACE_HEADER: &str = "# dts trace v1";
pub const REGRET_HEADER: &str = "# dts regret v1";
pub const SUMMARY_FORMAT: &str = "dts summary v1";
pub const AGGREGATE_FORMAT: &str = "dts aggregate v1";
pub const AGGREGATE_FILE: &str = "aggregate.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretSummary {
    /// Pseudo-regret `R(T)`.
    pub pseudo: f64,
    pub realized: f64,
    pub stage1: f64,
    pub stage2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentStage1 {
    pub survivors: Vec<ArmId>,
    pub completed_phases: u32,
    pub pulls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage1Summary {
    pub pulls_per_agent: u64,
    pub agents: Vec<AgentStage1>,
    pub pooled: Vec<ArmId>,
    pub allocation: Option<Vec<Vec<ArmId>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage2Phase {
    pub index: u32,
    pub theta_star: f64,
    pub survivors: Vec<ArmId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageCounts {
    pub agent_max: usize,
    pub broadcast: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage2Summary {
    pub l0: Option<u32>,
    pub completed_phases: usize,
    pub phases: Vec<Stage2Phase>,
    pub messages: MessageCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservedPhaseCounts {
    /// Burn-in phases completed by every agent.
    pub min_burn_in_phases: Option<u32>,
    /// Burn-in phases completed by the furthest agent.
    pub max_burn_in_phases: Option<u32>,
    pub stage2_phases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmBounds {
    pub arm: ArmId,
    pub gap: f64,
    /// Burn-in pull-count bound.
    pub burn_in_pulls: Bound,
    /// Stage-2 pull-count bound with `eta`.
    pub stage2_pulls: Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSummary {
    pub note: &'static str,
    pub computed_phase_counts: PhaseCountBounds,
    pub observed_phase_counts: ObservedPhaseCounts,
    pub eta: f64,
    pub arms: Vec<ArmBounds>,
    pub stage_regret: StageBounds,
}

/// Everything written to `{policy}_{seed}.summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub format: &'static str,
    pub policy: Policy,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub rounds: u64,
    pub regret: RegretSummary,
    /// `N_M(k, T)` for every arm.
    pub pulls_per_arm: Vec<u64>,
    /// Final Beta counts, per agent, per arm.
    pub posteriors: Vec<Vec<BetaCounts>>,
    pub best_arm: ArmId,
    pub final_survivors: Option<Vec<ArmId>>,
    pub best_arm_survived: Option<bool>,
    pub stage1: Option<Stage1Summary>,
    pub stage2: Option<Stage2Summary>,
    pub bounds: BoundsSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyAggregate {
    pub policy: Policy,
    pub runs: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_realized_regret: f64,
    /// `None` for policies without an active set.
    pub best_arm_survival_rate: Option<f64>,
    pub mean_messages: f64,
    pub mean_stage2_phases: f64,
}

/// Per-seed `R(T)` of `policy` minus that of `baseline`, averaged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedDifference {
    pub policy: Policy,
    pub baseline: Policy,
    pub mean_difference: f64,
    pub std_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub format: &'static str,
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicyAggregate>,
    pub paired_differences: Vec<PairedDifference>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// In `(policy, seed)` order.
    pub summaries: Vec<RunSummary>,
    pub aggregate: Aggregate,
    pub files: Vec<PathBuf>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Builds the summary of one finished run.
pub fn summarize(config: &ExperimentConfig, seed: u64, report: &RunReport) -> Result<RunSummary> {
    let env = config.instance();
    let curve = cumulative_regret(&report.trace, &env)?;
    let split = theorem1_decomposition(&report.trace, &env)?;
    let rounds = curve.len() as u64;
    let best_arm = env.best_arm();

    let stage1 = (!report.stage1.is_empty()).then(|| Stage1Summary {
        pulls_per_agent: report.burn_in,
        agents: report
            .stage1
            .iter()
            .map(|r| AgentStage1 {
                survivors: r.survivors.clone(),
                completed_phases: r.last_completed_phase(),
                pulls: r.pulls,
            })
            .collect(),
        pooled: report.stage1_pooled.clone(),
        allocation: report.allocation.as_ref().map(|a| a.per_agent.clone()),
    });
    let stage2 = report.allocation.is_some().then(|| {
        let agent_max = report.message_count(MessageKind::AgentMax);
        let broadcast = report.message_count(MessageKind::Broadcast);
        Stage2Summary {
            l0: report.l0,
            completed_phases: report.completed_stage2_phases(),
            phases: report
                .stage2_phases
                .iter()
                .map(|p| Stage2Phase {
                    index: p.index,
                    theta_star: p.theta_star,
                    survivors: p.survivors(),
                })
                .collect(),
            messages: MessageCounts {
                agent_max,
                broadcast,
                total: agent_max + broadcast,
            },
        }
    });

    let inputs: BoundInputs = config.bound_inputs(report.burn_in);
    let eta = 0.0;
    let arms = env
        .arms()
        .map(|arm| {
            Ok(ArmBounds {
                arm,
                gap: env.gap(arm)?,
                burn_in_pulls: inputs.lemma2_bound(arm)?,
                stage2_pulls: inputs.lemma4_bound(arm, eta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let completed: Vec<u32> = report
        .stage1
        .iter()
        .map(|r| r.last_completed_phase())
        .collect();
    let bounds = BoundsSummary {
        note: "up to constants",
        computed_phase_counts: inputs.fact1_phase_bounds(),
        observed_phase_counts: ObservedPhaseCounts {
            min_burn_in_phases: completed.iter().copied().min(),
            max_burn_in_phases: completed.iter().copied().max(),
            stage2_phases: report.completed_stage2_phases(),
        },
        eta,
        arms,
        stage_regret: inputs.stage_bounds(),
    };

    Ok(RunSummary {
        format: SUMMARY_FORMAT,
        policy: report.policy,
        seed,
        config: config.clone(),
        rounds,
        regret: RegretSummary {
            pseudo: curve.final_regret().to_f64(),
            realized: curve.final_realized(),
            stage1: split.stage1.to_f64(),
            stage2: split.stage2.to_f64(),
        },
        pulls_per_arm: pull_counts(&report.trace, env.num_arms(), rounds),
        posteriors: report.posteriors.clone(),
        best_arm,
        best_arm_survived: report
            .final_survivors
            .as_ref()
            .map(|s| s.contains(&best_arm)),
        final_survivors: report.final_survivors.clone(),
        stage1,
        stage2,
        bounds,
    })
}

struct Output {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl Output {
    fn create(path: PathBuf) -> Result<Self> {
        let file = File::create(&path).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(Output {
            path,
            writer: BufWriter::new(file),
        })
    }

    fn io(&self, source: std::io::Error) -> HarnessError {
        HarnessError::Io {
            path: self.path.clone(),
            source,
        }
    }

    fn line(&mut self, args: std::fmt::Arguments<'_>) -> Result<()> {
        self.writer
            .write_fmt(args)
            .and_then(|()| self.writer.write_all(b"\n"))
            .map_err(|e| self.io(e))
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer_pretty(&mut self.writer, value)
            .map_err(std::io::Error::from)
            .map_err(|e| self.io(e))?;
        self.line(format_args!(""))
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| self.io(e))?;
        Ok(self.path)
    }
}

fn write_trace(dir: &Path, stem: &str, report: &RunReport) -> Result<PathBuf> {
    let mut out = Output::create(dir.join(format!("{stem}.trace.csv")))?;
    out.line(format_args!("{TRACE_HEADER}"))?;
    out.line(format_args!("t,agent,arm,reward,stage,phase"))?;
    let mut records: Vec<_> = report.trace.records.iter().collect();
    records.sort_by_key(|r| (r.round, r.agent));
    for r in records {
        out.line(format_args!(
            "{},{},{},{},{},{}",
            r.round,
            r.agent,
            r.arm,
            r.reward,
            r.stage.number(),
            r.phase
        ))?;
    }
    out.finish()
}

fn write_regret(
    dir: &Path,
    stem: &str,
    config: &ExperimentConfig,
    report: &RunReport,
) -> Result<PathBuf> {
    let curve = cumulative_regret(&report.trace, &config.instance())?;
    let mut out = Output::create(dir.join(format!("{stem}.regret.csv")))?;
    out.line(format_args!("{REGRET_HEADER}"))?;
    out.line(format_args!("t,R_t,R_realized_t,stage"))?;
    for (i, (pseudo, realized)) in curve.pseudo.iter().zip(&curve.realized).enumerate() {
        let t = i as u64 + 1;
        let stage = if t <= report.burn_in { 1 } else { 2 };
        out.line(format_args!("{t},{},{realized},{stage}", pseudo.to_f64()))?;
    }
    out.finish()
}

fn write_messages(dir: &Path, stem: &str, messages: &[Message]) -> Result<PathBuf> {
    let mut out = Output::create(dir.join(format!("{stem}.messages.jsonl")))?;
    for message in messages {
        let line = serde_json::to_string(message).map_err(|e| out.io(e.into()))?;
        out.line(format_args!("{line}"))?;
    }
    out.finish()
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<PathBuf> {
    let mut out = Output::create(path)?;
    out.json(value)?;
    out.finish()
}

fn aggregate(config: &ExperimentConfig, summaries: &[RunSummary]) -> Aggregate {
    let regrets = |policy: Policy| -> Vec<f64> {
        summaries
            .iter()
            .filter(|s| s.policy == policy)
            .map(|s| s.regret.pseudo)
            .collect()
    };
    let policies = config
        .policies
        .iter()
        .map(|&policy| {
            let runs: Vec<&RunSummary> = summaries.iter().filter(|s| s.policy == policy).collect();
            let n = runs.len() as f64;
            let (mean_regret, std_regret) = mean_std(&regrets(policy));
            let survived: Vec<bool> = runs.iter().filter_map(|s| s.best_arm_survived).collect();
            let messages = |s: &RunSummary| s.stage2.as_ref().map_or(0, |s| s.messages.total);
            let phases = |s: &RunSummary| s.stage2.as_ref().map_or(0, |s| s.completed_phases);
            PolicyAggregate {
                policy,
                runs: runs.len(),
                mean_regret,
                std_regret,
                mean_realized_regret: runs.iter().map(|s| s.regret.realized).sum::<f64>() / n,
                best_arm_survival_rate: (!survived.is_empty()).then(|| {
                    survived.iter().filter(|&&b| b).count() as f64 / survived.len() as f64
                }),
                mean_messages: runs.iter().map(|s| messages(s) as f64).sum::<f64>() / n,
                mean_stage2_phases: runs.iter().map(|s| phases(s) as f64).sum::<f64>() / n,
            }
        })
        .collect();
    let baseline = config.policies[0];
    let base = regrets(baseline);
    let paired_differences = config.policies[1..]
        .iter()
        .map(|&policy| {
            let diffs: Vec<f64> = regrets(policy)
                .iter()
                .zip(&base)
                .map(|(a, b)| a - b)
                .collect();
            let (mean_difference, std_difference) = mean_std(&diffs);
            PairedDifference {
                policy,
                baseline,
                mean_difference,
                std_difference,
            }
        })
        .collect();
    Aggregate {
        format: AGGREGATE_FORMAT,
        seeds: config.seeds.clone(),
        policies,
        paired_differences,
    }
}

/// Runs every `(policy, seed)` pair, in parallel across pairs, and writes the
/// per-run files followed by the aggregate.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.clone(),
        source,
    })?;
    let env = config.instance();
    let run_config = config.run_config();
    let jobs: Vec<(Policy, u64)> = config
        .policies
        .iter()
        .flat_map(|&p| config.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let results = jobs
        .into_par_iter()
        .map(|(policy, seed)| {
            let report = dts_core::run_policy(policy, &env, &run_config, seed)?;
            let summary = summarize(config, seed, &report)?;
            let stem = format!("{policy}_{seed}");
            let mut files = vec![
                write_trace(dir, &stem, &report)?,
                write_regret(dir, &stem, config, &report)?,
                write_json(dir.join(format!("{stem}.summary.json")), &summary)?,
            ];
            if config.emit_messages {
                files.push(write_messages(dir, &stem, &report.messages)?);
            }
            Ok((summary, files))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summaries = Vec::with_capacity(results.len());
    let mut files = Vec::new();
    for (summary, run_files) in results {
        summaries.push(summary);
        files.extend(run_files);
    }
    let aggregate = aggregate(config, &summaries);
    files.push(write_json(dir.join(AGGREGATE_FILE), &aggregate)?);
    Ok(ExperimentOutcome {
        summaries,
        aggregate,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_std(&[]), (0.0, 0.0));
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
