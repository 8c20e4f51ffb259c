//! Per-agent policies.
//!
//! An agent works through phases `l = 1, 2, …`. In phase `l` every active arm
//! is pulled `m_l = ⌈c · 4^l · ln T⌉` times, the outcomes are recorded into
//! the arm's Beta counts (see [`UpdateRule`]) and one posterior sample θ is
//! drawn per arm. The samples then drive elimination with gap proxy `2^{-l}`:
//!
//! * burn-in (local) elimination keeps `θ_a > θ_max − 2^{-l}` (strict),
//! * broadcast elimination keeps `θ_a + 2^{-l} ≥ θ*` (inclusive), where θ* is
//!   the server's global maximum.
//!
//! A phase that the remaining budget cannot cover in full is played as far as
//! the budget allows, records no outcomes and never eliminates.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bandit::{ArmId, BanditInstance, RngStream};
use crate::error::{Error, Result};
use crate::metrics::{PullRecord, Stage};
use crate::posterior::{bernoulli_round, BetaCounts};

/// `2^{-l}`, built directly from the exponent bits so it is exact.
pub fn elimination_gap(l: u32) -> f64 {
    if l >= 1023 {
        return 0.0;
    }
    f64::from_bits(u64::from(1023 - l) << 52)
}

/// Pulls per arm in phase `l`: `⌈c · 4^l · ln T⌉`.
pub fn phase_length(l: u32, horizon: f64, c: f64) -> Result<u64> {
    if l == 0 {
        return Err(Error::Config("phase indices start at 1".into()));
    }
    if !(horizon >= 2.0) {
        return Err(Error::Config(format!(
            "horizon {horizon} must be at least 2 for the phase schedule"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("schedule constant {c} must be positive")));
    }
    let four_pow = 4f64.powi(l as i32);
    let len = (c * four_pow * horizon.ln()).ceil();
    if len >= u64::MAX as f64 {
        return Ok(u64::MAX);
    }
    Ok(len as u64)
}

/// What a completed phase records into an arm's Beta counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRule {
    /// Every pull's Bernoulli outcome: `m_l` outcomes per arm per phase.
    #[default]
    PerPull,
    /// One Bernoulli trial with success probability `r̂_l(a)` per arm per phase.
    PerPhase,
}

impl FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-pull" => Ok(UpdateRule::PerPull),
            "per-phase" => Ok(UpdateRule::PerPhase),
            other => Err(Error::Config(format!(
                "unknown update rule `{other}` (expected per-pull or per-phase)"
            ))),
        }
    }
}

/// Phase schedule parameters shared by every agent of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub horizon: f64,
    pub constant: f64,
    pub update: UpdateRule,
}

impl Schedule {
    pub fn new(horizon: f64, constant: f64) -> Result<Self> {
        phase_length(1, horizon, constant)?;
        Ok(Self {
            horizon,
            constant,
            update: UpdateRule::default(),
        })
    }

    pub fn with_update(mut self, update: UpdateRule) -> Self {
        self.update = update;
        self
    }

    /// Outcomes one completed phase records per active arm.
    pub fn outcomes_per_phase(&self, l: u32) -> u64 {
        match self.update {
            UpdateRule::PerPull => self.pulls_per_arm(l),
            UpdateRule::PerPhase => 1,
        }
    }

    pub fn pulls_per_arm(&self, l: u32) -> u64 {
        phase_length(l, self.horizon, self.constant).expect("validated on construction")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    pub index: u32,
    pub delta: f64,
    pub active: Vec<ArmId>,
    pub pulls_per_arm: u64,
}

impl PhaseState {
    pub fn new(index: u32, active: Vec<ArmId>, schedule: &Schedule) -> Self {
        Self {
            index,
            delta: elimination_gap(index),
            active,
            pulls_per_arm: schedule.pulls_per_arm(index),
        }
    }

    /// Pulls needed to complete this phase.
    pub fn demand(&self) -> u64 {
        (self.active.len() as u64).saturating_mul(self.pulls_per_arm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArmSample {
    pub arm: ArmId,
    pub theta: f64,
}

/// Result of one burn-in phase. `samples` is empty when the phase was cut short.
#[derive(Debug, Clone, PartialEq)]
pub struct BurnInPhase {
    pub complete: bool,
    pub samples: Vec<ArmSample>,
}

/// One completed phase: the arm set going in and what survived elimination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseLog {
    pub index: u32,
    pub active: Vec<ArmId>,
    pub retained: Vec<ArmId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurnInReport {
    pub survivors: Vec<ArmId>,
    pub completed_phases: Vec<PhaseLog>,
    pub pulls: u64,
}

impl BurnInReport {
    /// Index of the last completed phase, 0 if none completed.
    pub fn last_completed_phase(&self) -> u32 {
        self.completed_phases.last().map_or(0, |p| p.index)
    }
}

/// Agent side of one stage-2 phase.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedPhase {
    /// Largest local sample, `None` for an idle agent.
    pub local_max: Option<f64>,
    pub samples: Vec<ArmSample>,
}

/// Keeps arms with `θ_a > θ_max − 2^{-l}`. Input order is preserved.
pub fn local_eliminate(samples: &[ArmSample], l: u32) -> Vec<ArmId> {
    let Some(max) = samples.iter().map(|s| s.theta).reduce(f64::max) else {
        return Vec::new();
    };
    let threshold = max - elimination_gap(l);
    samples
        .iter()
        .filter(|s| s.theta > threshold)
        .map(|s| s.arm)
        .collect()
}

/// Keeps arms with `θ_a + 2^{-l} ≥ θ*`. Input order is preserved.
pub fn broadcast_eliminate(samples: &[ArmSample], theta_star: f64, l: u32) -> Vec<ArmId> {
    let gap = elimination_gap(l);
    samples
        .iter()
        .filter(|s| s.theta + gap >= theta_star)
        .map(|s| s.arm)
        .collect()
}

/// State of one phased-elimination agent.
#[derive(Debug, Clone)]
pub struct AgentState {
    id: usize,
    stage: Stage,
    phase: PhaseState,
    posteriors: Vec<BetaCounts>,
    schedule: Schedule,
    budget: u64,
    pulls_used: u64,
    policy_rng: RngStream,
    reward_rng: RngStream,
}

impl AgentState {
    /// Fresh agent at phase 1 of the burn-in with every arm active and no budget.
    pub fn new(id: usize, arms: usize, schedule: Schedule, seed: u64) -> Self {
        Self {
            id,
            stage: Stage::BurnIn,
            phase: PhaseState::new(1, (0..arms).map(ArmId).collect(), &schedule),
            posteriors: vec![BetaCounts::default(); arms],
            schedule,
            budget: 0,
            pulls_used: 0,
            policy_rng: RngStream::for_agent(seed, id),
            reward_rng: RngStream::for_environment(seed, id),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn phase(&self) -> &PhaseState {
        &self.phase
    }

    pub fn posteriors(&self) -> &[BetaCounts] {
        &self.posteriors
    }

    /// Remaining pulls in the current stage.
    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn pulls_used(&self) -> u64 {
        self.pulls_used
    }

    pub fn is_idle(&self) -> bool {
        self.phase.active.is_empty()
    }

    pub fn can_complete_phase(&self) -> bool {
        self.budget >= self.phase.demand()
    }

    /// Enters `stage` at phase `first_phase` holding `arms` with `budget` pulls.
    pub fn begin_stage(
        &mut self,
        stage: Stage,
        first_phase: u32,
        arms: Vec<ArmId>,
        budget: u64,
        reset_posteriors: bool,
    ) {
        self.stage = stage;
        self.phase = PhaseState::new(first_phase, arms, &self.schedule);
        self.budget = budget;
        if reset_posteriors {
            self.posteriors.fill(BetaCounts::default());
        }
    }

    fn advance(&mut self, retained: Vec<ArmId>) {
        self.phase = PhaseState::new(self.phase.index + 1, retained, &self.schedule);
    }

    fn pull_into(
        &mut self,
        env: &BanditInstance,
        arm: ArmId,
        log: &mut Vec<PullRecord>,
    ) -> Result<u8> {
        let reward = env.pull(arm, &mut self.reward_rng)?;
        self.pulls_used += 1;
        self.budget -= 1;
        log.push(PullRecord {
            round: self.pulls_used,
            agent: self.id,
            arm,
            reward,
            stage: self.stage,
            phase: self.phase.index,
        });
        Ok(reward)
    }

    /// Plays the current phase. With `finalize` and enough budget every active
    /// arm gets its full `m_l` pulls, a posterior update and one θ sample.
    /// Otherwise arms are pulled in order until the budget runs out and `None`
    /// is returned with posteriors untouched.
    fn play_phase(
        &mut self,
        env: &BanditInstance,
        finalize: bool,
        log: &mut Vec<PullRecord>,
    ) -> Result<Option<Vec<ArmSample>>> {
        let m = self.phase.pulls_per_arm;
        let arms = self.phase.active.clone();
        if !(finalize && self.can_complete_phase()) {
            for &arm in &arms {
                let n = m.min(self.budget);
                for _ in 0..n {
                    self.pull_into(env, arm, log)?;
                }
            }
            return Ok(None);
        }
        let mut samples = Vec::with_capacity(arms.len());
        for arm in arms {
            let mut hits = 0u64;
            for _ in 0..m {
                hits += u64::from(self.pull_into(env, arm, log)?);
            }
            let counts = &mut self.posteriors[arm.0];
            match self.schedule.update {
                // Rounding a {0, 1} reward is the identity, so pulls are recorded as observed.
                UpdateRule::PerPull => {
                    counts.successes += hits;
                    counts.failures += m - hits;
                }
                UpdateRule::PerPhase => {
                    let r_hat = hits as f64 / m as f64;
                    counts.record(bernoulli_round(r_hat, &mut self.policy_rng)?);
                }
            }
            let theta = counts.sample_theta(&mut self.policy_rng);
            samples.push(ArmSample { arm, theta });
        }
        Ok(Some(samples))
    }

    /// Steps 1–4 of one burn-in phase.
    pub fn burn_in_phase(
        &mut self,
        env: &BanditInstance,
        log: &mut Vec<PullRecord>,
    ) -> Result<BurnInPhase> {
        Ok(match self.play_phase(env, true, log)? {
            Some(samples) => BurnInPhase {
                complete: true,
                samples,
            },
            None => BurnInPhase {
                complete: false,
                samples: Vec::new(),
            },
        })
    }

    /// Runs local phased elimination for exactly `pulls` of this agent's pulls.
    pub fn run_burn_in(
        &mut self,
        env: &BanditInstance,
        pulls: u64,
        log: &mut Vec<PullRecord>,
    ) -> Result<BurnInReport> {
        if pulls == 0 {
            return Err(Error::Config("burn-in budget must be at least one pull".into()));
        }
        let start = self.pulls_used;
        self.budget = pulls;
        let mut completed = Vec::new();
        while self.budget > 0 {
            let active = self.phase.active.clone();
            let phase = self.burn_in_phase(env, log)?;
            if !phase.complete {
                break;
            }
            let retained = local_eliminate(&phase.samples, self.phase.index);
            completed.push(PhaseLog {
                index: self.phase.index,
                active,
                retained: retained.clone(),
            });
            self.advance(retained);
        }
        Ok(BurnInReport {
            survivors: self.phase.active.clone(),
            completed_phases: completed,
            pulls: self.pulls_used - start,
        })
    }

    /// Steps 1–4 of a stage-2 phase. The caller (the coordinator barrier) must
    /// have established that every agent can complete the phase.
    pub fn distributed_phase(
        &mut self,
        env: &BanditInstance,
        log: &mut Vec<PullRecord>,
    ) -> Result<DistributedPhase> {
        if !self.can_complete_phase() {
            return Err(Error::Protocol(format!(
                "agent {} cannot complete phase {} with {} pulls left",
                self.id, self.phase.index, self.budget
            )));
        }
        let samples = self
            .play_phase(env, true, log)?
            .expect("budget checked above");
        let local_max = samples.iter().map(|s| s.theta).reduce(f64::max);
        Ok(DistributedPhase { local_max, samples })
    }

    /// Step 6 of a stage-2 phase, then moves to the next phase.
    pub fn apply_broadcast(&mut self, samples: &[ArmSample], theta_star: f64) -> PhaseLog {
        let retained = broadcast_eliminate(samples, theta_star, self.phase.index);
        let log = PhaseLog {
            index: self.phase.index,
            active: self.phase.active.clone(),
            retained: retained.clone(),
        };
        self.advance(retained);
        log
    }

    /// Plays the final, budget-truncated phase: pulls only, no updates.
    pub fn drain_phase(&mut self, env: &BanditInstance, log: &mut Vec<PullRecord>) -> Result<()> {
        self.play_phase(env, false, log).map(|_| ())
    }
}

/// Per-pull Beta-Bernoulli Thompson Sampling over all arms.
#[derive(Debug, Clone)]
pub struct VanillaTsAgent {
    id: usize,
    posteriors: Vec<BetaCounts>,
    rounds: u64,
    policy_rng: RngStream,
    reward_rng: RngStream,
}

impl VanillaTsAgent {
    pub fn new(id: usize, arms: usize, seed: u64) -> Self {
        Self {
            id,
            posteriors: vec![BetaCounts::default(); arms],
            rounds: 0,
            policy_rng: RngStream::for_agent(seed, id),
            reward_rng: RngStream::for_environment(seed, id),
        }
    }

    pub fn posteriors(&self) -> &[BetaCounts] {
        &self.posteriors
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Samples every arm, pulls the argmax (lowest index on ties) and records the raw reward.
    pub fn step(&mut self, env: &BanditInstance) -> Result<(ArmId, u8)> {
        let mut best = (ArmId(0), f64::NEG_INFINITY);
        for (index, counts) in self.posteriors.iter().enumerate() {
            let theta = counts.sample_theta(&mut self.policy_rng);
            if theta > best.1 {
                best = (ArmId(index), theta);
            }
        }
        let arm = best.0;
        let reward = env.pull(arm, &mut self.reward_rng)?;
        self.posteriors[arm.0].record(reward == 1);
        self.rounds += 1;
        Ok((arm, reward))
    }

    pub fn step_logged(&mut self, env: &BanditInstance, log: &mut Vec<PullRecord>) -> Result<()> {
        let (arm, reward) = self.step(env)?;
        log.push(PullRecord {
            round: self.rounds,
            agent: self.id,
            arm,
            reward,
            stage: Stage::BurnIn,
            phase: 0,
        });
        Ok(())
    }
}
