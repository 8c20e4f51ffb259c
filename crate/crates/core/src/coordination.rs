//! The simulated central server and the full two-stage protocol.
//!
//! Stage 1: every agent runs local phased elimination for `D` of its own pulls.
//! The survivor sets are pooled, sorted by arm index and dealt round-robin to
//! the agents. Stage 2 advances all agents through phases in lockstep:
//!
//! 1. each agent reports whether it can afford the next full phase,
//! 2. if all can, each plays the phase and sends its local max θ
//!    (`AgentMax`, or a no-sample marker when idle),
//! 3. the server aggregates θ* and broadcasts it to every agent,
//! 4. each agent eliminates against θ* before the next phase starts.
//!
//! When some agent cannot afford the next phase, every agent spends what is
//! left of its budget on a truncated phase without updates and the run ends.
//!
//! [`ExecMode::Threaded`] runs each agent on its own thread and talks to the
//! server over channels; [`ExecMode::Sequential`] is the single-threaded
//! reference. Both produce identical traces and message logs.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;
use std::thread;

use serde::{Deserialize, Serialize, Serializer};

use crate::agents::{
    AgentState, BurnInReport, DistributedPhase, PhaseLog, Schedule, UpdateRule, VanillaTsAgent,
};
use crate::bandit::{ArmId, BanditInstance};
use crate::error::{Error, Result};
use crate::metrics::{PullRecord, Stage, Trace};
use crate::posterior::BetaCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    DistributedEts,
    IndependentEts,
    VanillaTs,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::DistributedEts => "distributed-ets",
            Policy::IndependentEts => "independent-ets",
            Policy::VanillaTs => "vanilla-ts",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distributed-ets" => Ok(Policy::DistributedEts),
            "independent-ets" => Ok(Policy::IndependentEts),
            "vanilla-ts" => Ok(Policy::VanillaTs),
            other => Err(Error::Config(format!(
                "unknown policy `{other}` (expected distributed-ets, independent-ets or vanilla-ts)"
            ))),
        }
    }
}

/// How stage-1 survivor sets are combined before reallocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    #[default]
    Union,
    /// Arms kept by every agent; falls back to the union when that is empty.
    Intersection,
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(Pooling::Union),
            "intersection" => Ok(Pooling::Intersection),
            other => Err(Error::Config(format!(
                "unknown pooling `{other}` (expected union or intersection)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecMode {
    #[default]
    Sequential,
    Threaded,
}

/// Pooled survivor set in ascending arm order.
pub fn pool_survivors(survivors: &[Vec<ArmId>], pooling: Pooling) -> Vec<ArmId> {
    let union: BTreeSet<ArmId> = survivors.iter().flatten().copied().collect();
    match pooling {
        Pooling::Union => union.into_iter().collect(),
        Pooling::Intersection => {
            let common: Vec<ArmId> = union
                .iter()
                .copied()
                .filter(|arm| survivors.iter().all(|s| s.contains(arm)))
                .collect();
            if common.is_empty() {
                union.into_iter().collect()
            } else {
                common
            }
        }
    }
}

/// Disjoint per-agent arm lists covering a pooled set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub per_agent: Vec<Vec<ArmId>>,
}

impl Allocation {
    /// True when the lists are disjoint and their union is exactly `pooled`.
    pub fn is_partition_of(&self, pooled: &[ArmId]) -> bool {
        let mut seen = BTreeSet::new();
        for arm in self.per_agent.iter().flatten() {
            if !seen.insert(*arm) {
                return false;
            }
        }
        seen == pooled.iter().copied().collect()
    }
}

/// Round-robin by ascending arm index: rank `r` goes to agent `r mod M`.
pub fn allocate_arms(pooled: &[ArmId], agents: usize) -> Allocation {
    let mut sorted = pooled.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut per_agent = vec![Vec::new(); agents];
    if agents > 0 {
        for (rank, arm) in sorted.into_iter().enumerate() {
            per_agent[rank % agents].push(arm);
        }
    }
    Allocation { per_agent }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageKind {
    AgentMax,
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sender {
    Agent(usize),
    Server,
}

impl Serialize for Sender {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Sender::Agent(id) => s.serialize_str(&format!("agent-{id}")),
            Sender::Server => s.serialize_str("server"),
        }
    }
}

/// One logged stage-2 message. A `None` payload is the no-sample marker of an
/// idle agent. Broadcasts are logged once per receiving agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Message {
    pub phase: u32,
    pub kind: MessageKind,
    pub sender: Sender,
    pub payload: Option<f64>,
}

/// θ* = max of the reported samples, ignoring no-sample markers.
pub fn aggregate_max(maxes: &[(usize, Option<f64>)]) -> Result<f64> {
    maxes
        .iter()
        .filter_map(|&(_, theta)| theta)
        .reduce(f64::max)
        .ok_or_else(|| {
            Error::Protocol("every agent reported no sample; the active set is empty".into())
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributedConfig {
    pub agents: usize,
    pub horizon: u64,
    /// Constant `c` of the phase schedule `⌈c · 4^l · ln T⌉`.
    pub schedule_const: f64,
    pub update: UpdateRule,
    /// Per-agent burn-in pulls; `None` means `⌊T / (M K)⌋`.
    pub burn_in: Option<u64>,
    pub pooling: Pooling,
    pub carry_posteriors: bool,
    pub mode: ExecMode,
}

impl DistributedConfig {
    pub fn new(agents: usize, horizon: u64) -> Self {
        Self {
            agents,
            horizon,
            schedule_const: 0.5,
            update: UpdateRule::default(),
            burn_in: None,
            pooling: Pooling::Union,
            carry_posteriors: false,
            mode: ExecMode::Sequential,
        }
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Ok(Schedule::new(self.horizon as f64, self.schedule_const)?.with_update(self.update))
    }

    /// Resolved per-agent burn-in budget `D` for a `arms`-armed instance.
    pub fn burn_in_pulls(&self, arms: usize) -> Result<u64> {
        if self.agents == 0 {
            return Err(Error::Config("need at least one agent".into()));
        }
        let mk = (self.agents * arms) as u64;
        if self.horizon < mk {
            return Err(Error::Config(format!(
                "horizon {} is below M*K = {mk}, leaving no burn-in budget",
                self.horizon
            )));
        }
        let d = self.burn_in.unwrap_or(self.horizon / mk);
        if d == 0 || d > self.horizon {
            return Err(Error::Config(format!(
                "burn-in budget {d} must lie in [1, {}]",
                self.horizon
            )));
        }
        Ok(d)
    }
}

/// One lockstep stage-2 phase as seen by the server.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage2PhaseLog {
    pub index: u32,
    pub theta_star: f64,
    /// Per agent, in agent order.
    pub agents: Vec<PhaseLog>,
}

impl Stage2PhaseLog {
    pub fn survivors(&self) -> Vec<ArmId> {
        let set: BTreeSet<ArmId> = self
            .agents
            .iter()
            .flat_map(|a| a.retained.iter().copied())
            .collect();
        set.into_iter().collect()
    }
}

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub policy: Policy,
    pub schedule: Schedule,
    pub carry_posteriors: bool,
    pub trace: Trace,
    /// Per agent, per arm.
    pub posteriors: Vec<Vec<BetaCounts>>,
    /// Per-agent burn-in budget (the whole horizon for the baselines).
    pub burn_in: u64,
    /// Per-agent local elimination reports; empty for vanilla TS.
    pub stage1: Vec<BurnInReport>,
    pub stage1_pooled: Vec<ArmId>,
    pub allocation: Option<Allocation>,
    /// Index of the last burn-in phase completed by every agent.
    pub l0: Option<u32>,
    pub stage2_phases: Vec<Stage2PhaseLog>,
    pub messages: Vec<Message>,
    /// Union of the agents' final active sets; `None` for vanilla TS.
    pub final_survivors: Option<Vec<ArmId>>,
}

impl RunReport {
    pub fn completed_stage2_phases(&self) -> usize {
        self.stage2_phases.len()
    }

    pub fn message_count(&self, kind: MessageKind) -> usize {
        self.messages.iter().filter(|m| m.kind == kind).count()
    }

    /// For every agent and arm, the number of outcomes its Beta counts should
    /// hold: one batch per completed phase in which the agent held the arm.
    /// Vanilla TS records one outcome per pull instead.
    pub fn expected_outcome_counts(&self) -> Vec<Vec<u64>> {
        let agents = self.posteriors.len();
        let arms = self.posteriors.first().map_or(0, Vec::len);
        let mut counts = vec![vec![0u64; arms]; agents];
        // Stage-2 entry resets posteriors unless they are carried over.
        if self.policy == Policy::VanillaTs {
            for r in &self.trace.records {
                counts[r.agent][r.arm.0] += 1;
            }
            return counts;
        }
        let mut add = |agent: usize, phase: &PhaseLog| {
            for arm in &phase.active {
                counts[agent][arm.0] += self.schedule.outcomes_per_phase(phase.index);
            }
        };
        if self.allocation.is_none() || self.carry_posteriors {
            for (agent, report) in self.stage1.iter().enumerate() {
                report.completed_phases.iter().for_each(|p| add(agent, p));
            }
        }
        for phase in &self.stage2_phases {
            for (agent, log) in phase.agents.iter().enumerate() {
                add(agent, log);
            }
        }
        counts
    }
}

fn merge_logs(logs: impl IntoIterator<Item = Vec<PullRecord>>) -> Vec<PullRecord> {
    logs.into_iter().flatten().collect()
}

/// Runs `f` for each agent, sequentially or on scoped threads, keeping agent order.
fn for_each_agent<T, R, F>(items: Vec<T>, mode: ExecMode, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Sync,
{
    match mode {
        ExecMode::Sequential => items.into_iter().map(f).collect(),
        ExecMode::Threaded => thread::scope(|scope| {
            let handles: Vec<_> = items
                .into_iter()
                .map(|item| scope.spawn(|| f(item)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("agent thread panicked"))
                .collect()
        }),
    }
}

/// Distributed elimination-based Thompson Sampling, both stages.
pub fn run_distributed(
    env: &BanditInstance,
    config: &DistributedConfig,
    seed: u64,
) -> Result<RunReport> {
    let arms = env.num_arms();
    let d = config.burn_in_pulls(arms)?;
    let schedule = config.schedule()?;
    let agents = config.agents;

    // Stage 1: separated burn-in.
    let stage1 = for_each_agent((0..agents).collect(), config.mode, |id| {
        let mut state = AgentState::new(id, arms, schedule, seed);
        let mut log = Vec::new();
        let report = state.run_burn_in(env, d, &mut log)?;
        Ok((state, log, report))
    })?;
    let mut states = Vec::with_capacity(agents);
    let mut logs = Vec::with_capacity(agents);
    let mut reports = Vec::with_capacity(agents);
    for (state, log, report) in stage1 {
        states.push(state);
        logs.push(log);
        reports.push(report);
    }

    let survivors: Vec<Vec<ArmId>> = reports.iter().map(|r| r.survivors.clone()).collect();
    let pooled = pool_survivors(&survivors, config.pooling);
    let allocation = allocate_arms(&pooled, agents);
    debug_assert!(allocation.is_partition_of(&pooled));
    let l0 = reports
        .iter()
        .map(BurnInReport::last_completed_phase)
        .min()
        .unwrap_or(0);

    let stage2_budget = config.horizon - d;
    for (state, arms) in states.iter_mut().zip(&allocation.per_agent) {
        state.begin_stage(
            Stage::Distributed,
            l0 + 1,
            arms.clone(),
            stage2_budget,
            !config.carry_posteriors,
        );
    }

    // Stage 2: distributed elimination.
    let stage2 = match config.mode {
        ExecMode::Sequential => stage2_sequential(env, states)?,
        ExecMode::Threaded => stage2_threaded(env, states)?,
    };
    logs.extend(stage2.logs);

    let final_survivors: BTreeSet<ArmId> = stage2
        .states
        .iter()
        .flat_map(|s| s.phase().active.iter().copied())
        .collect();
    Ok(RunReport {
        policy: Policy::DistributedEts,
        schedule,
        carry_posteriors: config.carry_posteriors,
        trace: Trace::new(agents, config.horizon, merge_logs(logs)),
        posteriors: stage2.states.iter().map(|s| s.posteriors().to_vec()).collect(),
        burn_in: d,
        stage1: reports,
        stage1_pooled: pooled,
        allocation: Some(allocation),
        l0: Some(l0),
        stage2_phases: stage2.phases,
        messages: stage2.messages,
        final_survivors: Some(final_survivors.into_iter().collect()),
    })
}

struct Stage2Outcome {
    states: Vec<AgentState>,
    logs: Vec<Vec<PullRecord>>,
    phases: Vec<Stage2PhaseLog>,
    messages: Vec<Message>,
}

/// Server half of one phase: logs the reports, aggregates, logs the broadcast.
fn serve_phase(
    phase: u32,
    maxes: &[(usize, Option<f64>)],
    messages: &mut Vec<Message>,
) -> Result<f64> {
    messages.extend(maxes.iter().map(|&(agent, theta)| Message {
        phase,
        kind: MessageKind::AgentMax,
        sender: Sender::Agent(agent),
        payload: theta,
    }));
    let theta_star = aggregate_max(maxes)?;
    messages.extend(maxes.iter().map(|_| Message {
        phase,
        kind: MessageKind::Broadcast,
        sender: Sender::Server,
        payload: Some(theta_star),
    }));
    Ok(theta_star)
}

fn stage2_sequential(env: &BanditInstance, mut states: Vec<AgentState>) -> Result<Stage2Outcome> {
    let mut logs = vec![Vec::new(); states.len()];
    let mut phases = Vec::new();
    let mut messages = Vec::new();
    loop {
        if !states.iter().all(AgentState::can_complete_phase) {
            for (state, log) in states.iter_mut().zip(logs.iter_mut()) {
                state.drain_phase(env, log)?;
            }
            break;
        }
        let phase = states[0].phase().index;
        let mut played: Vec<DistributedPhase> = Vec::with_capacity(states.len());
        for (state, log) in states.iter_mut().zip(logs.iter_mut()) {
            played.push(state.distributed_phase(env, log)?);
        }
        let maxes: Vec<(usize, Option<f64>)> = played
            .iter()
            .enumerate()
            .map(|(agent, p)| (agent, p.local_max))
            .collect();
        let theta_star = serve_phase(phase, &maxes, &mut messages)?;
        let agent_logs = states
            .iter_mut()
            .zip(&played)
            .map(|(state, p)| state.apply_broadcast(&p.samples, theta_star))
            .collect();
        phases.push(Stage2PhaseLog {
            index: phase,
            theta_star,
            agents: agent_logs,
        });
    }
    Ok(Stage2Outcome {
        states,
        logs,
        phases,
        messages,
    })
}

enum ToServer {
    Ready { agent: usize, can_complete: bool },
    Max { agent: usize, theta: Option<f64> },
}

enum ToAgent {
    Play { finalize: bool },
    Broadcast(f64),
}

type AgentResult = (AgentState, Vec<PullRecord>, Vec<PhaseLog>);

fn hung_up() -> Error {
    Error::Protocol("peer disconnected mid-phase".into())
}

fn agent_loop(
    env: &BanditInstance,
    mut state: AgentState,
    to_server: mpsc::Sender<ToServer>,
    inbox: mpsc::Receiver<ToAgent>,
) -> Result<AgentResult> {
    let agent = state.id();
    let mut log = Vec::new();
    let mut phases = Vec::new();
    loop {
        to_server
            .send(ToServer::Ready {
                agent,
                can_complete: state.can_complete_phase(),
            })
            .map_err(|_| hung_up())?;
        match inbox.recv().map_err(|_| hung_up())? {
            ToAgent::Play { finalize: false } => {
                state.drain_phase(env, &mut log)?;
                return Ok((state, log, phases));
            }
            ToAgent::Play { finalize: true } => {
                let played = state.distributed_phase(env, &mut log)?;
                to_server
                    .send(ToServer::Max {
                        agent,
                        theta: played.local_max,
                    })
                    .map_err(|_| hung_up())?;
                let ToAgent::Broadcast(theta_star) = inbox.recv().map_err(|_| hung_up())? else {
                    return Err(Error::Protocol("expected a broadcast".into()));
                };
                phases.push(state.apply_broadcast(&played.samples, theta_star));
            }
            ToAgent::Broadcast(_) => {
                return Err(Error::Protocol("broadcast before the phase was played".into()))
            }
        }
    }
}

fn server_loop(
    first_phase: u32,
    outboxes: Vec<mpsc::Sender<ToAgent>>,
    inbox: mpsc::Receiver<ToServer>,
) -> Result<(Vec<f64>, Vec<Message>)> {
    let agents = outboxes.len();
    let mut stars = Vec::new();
    let mut messages = Vec::new();
    let mut phase = first_phase;
    let send_all = |msg: &dyn Fn() -> ToAgent| -> Result<()> {
        outboxes
            .iter()
            .try_for_each(|tx| tx.send(msg()).map_err(|_| hung_up()))
    };
    loop {
        // Barrier: wait until every agent has finished the previous phase.
        let mut all_ready = true;
        for _ in 0..agents {
            match inbox.recv().map_err(|_| hung_up())? {
                ToServer::Ready { can_complete, .. } => all_ready &= can_complete,
                ToServer::Max { agent, .. } => {
                    return Err(Error::Protocol(format!("early report from agent {agent}")))
                }
            }
        }
        send_all(&|| ToAgent::Play {
            finalize: all_ready,
        })?;
        if !all_ready {
            return Ok((stars, messages));
        }
        let mut maxes = vec![(0, None); agents];
        for _ in 0..agents {
            match inbox.recv().map_err(|_| hung_up())? {
                ToServer::Max { agent, theta } => maxes[agent] = (agent, theta),
                ToServer::Ready { agent, .. } => {
                    return Err(Error::Protocol(format!("agent {agent} skipped its report")))
                }
            }
        }
        let theta_star = serve_phase(phase, &maxes, &mut messages)?;
        send_all(&|| ToAgent::Broadcast(theta_star))?;
        stars.push(theta_star);
        phase += 1;
    }
}

fn stage2_threaded(env: &BanditInstance, states: Vec<AgentState>) -> Result<Stage2Outcome> {
    let agents = states.len();
    let first_phase = states.first().map_or(1, |s| s.phase().index);
    let (to_server, server_inbox) = mpsc::channel();
    let (results, server) = thread::scope(|scope| {
        let mut outboxes = Vec::with_capacity(agents);
        let mut handles = Vec::with_capacity(agents);
        for state in states {
            let (tx, rx) = mpsc::channel();
            outboxes.push(tx);
            let to_server = to_server.clone();
            handles.push(scope.spawn(move || agent_loop(env, state, to_server, rx)));
        }
        drop(to_server);
        let server = server_loop(first_phase, outboxes, server_inbox);
        let results: Vec<Result<AgentResult>> = handles
            .into_iter()
            .map(|h| h.join().expect("agent thread panicked"))
            .collect();
        (results, server)
    });
    let (stars, messages) = server?;
    let mut outcome = Stage2Outcome {
        states: Vec::with_capacity(agents),
        logs: Vec::with_capacity(agents),
        phases: Vec::new(),
        messages,
    };
    let mut per_agent_phases = Vec::with_capacity(agents);
    for result in results {
        let (state, log, phases) = result?;
        outcome.states.push(state);
        outcome.logs.push(log);
        per_agent_phases.push(phases);
    }
    outcome.phases = stars
        .iter()
        .enumerate()
        .map(|(i, &theta_star)| Stage2PhaseLog {
            index: first_phase + i as u32,
            theta_star,
            agents: per_agent_phases.iter().map(|p| p[i].clone()).collect(),
        })
        .collect();
    Ok(outcome)
}

/// Baseline: every agent runs local phased elimination for the whole horizon.
pub fn run_independent(
    env: &BanditInstance,
    config: &DistributedConfig,
    seed: u64,
) -> Result<RunReport> {
    if config.agents == 0 {
        return Err(Error::Config("need at least one agent".into()));
    }
    let arms = env.num_arms();
    let schedule = config.schedule()?;
    let horizon = config.horizon;
    let results = for_each_agent((0..config.agents).collect(), config.mode, |id| {
        let mut state = AgentState::new(id, arms, schedule, seed);
        let mut log = Vec::new();
        let report = state.run_burn_in(env, horizon, &mut log)?;
        Ok((state, log, report))
    })?;
    let mut posteriors = Vec::new();
    let mut logs = Vec::new();
    let mut reports = Vec::new();
    for (state, log, report) in results {
        posteriors.push(state.posteriors().to_vec());
        logs.push(log);
        reports.push(report);
    }
    let survivors: BTreeSet<ArmId> = reports
        .iter()
        .flat_map(|r| r.survivors.iter().copied())
        .collect();
    Ok(RunReport {
        policy: Policy::IndependentEts,
        schedule,
        carry_posteriors: false,
        trace: Trace::new(config.agents, horizon, merge_logs(logs)),
        posteriors,
        burn_in: horizon,
        stage1: reports,
        stage1_pooled: Vec::new(),
        allocation: None,
        l0: None,
        stage2_phases: Vec::new(),
        messages: Vec::new(),
        final_survivors: Some(survivors.into_iter().collect()),
    })
}

/// Baseline: every agent runs per-pull Thompson Sampling for the whole horizon.
pub fn run_vanilla(
    env: &BanditInstance,
    config: &DistributedConfig,
    seed: u64,
) -> Result<RunReport> {
    if config.agents == 0 {
        return Err(Error::Config("need at least one agent".into()));
    }
    let arms = env.num_arms();
    let horizon = config.horizon;
    let results = for_each_agent((0..config.agents).collect(), config.mode, |id| {
        let mut agent = VanillaTsAgent::new(id, arms, seed);
        let mut log = Vec::with_capacity(horizon as usize);
        for _ in 0..horizon {
            agent.step_logged(env, &mut log)?;
        }
        Ok((agent.posteriors().to_vec(), log))
    })?;
    let (posteriors, logs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(RunReport {
        policy: Policy::VanillaTs,
        schedule: config.schedule()?,
        carry_posteriors: false,
        trace: Trace::new(config.agents, horizon, merge_logs(logs)),
        posteriors,
        burn_in: horizon,
        stage1: Vec::new(),
        stage1_pooled: Vec::new(),
        allocation: None,
        l0: None,
        stage2_phases: Vec::new(),
        messages: Vec::new(),
        final_survivors: None,
    })
}

pub fn run_policy(
    policy: Policy,
    env: &BanditInstance,
    config: &DistributedConfig,
    seed: u64,
) -> Result<RunReport> {
    match policy {
        Policy::DistributedEts => run_distributed(env, config, seed),
        Policy::IndependentEts => run_independent(env, config, seed),
        Policy::VanillaTs => run_vanilla(env, config, seed),
    }
}
