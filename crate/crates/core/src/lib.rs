//! Simulation library for cooperative multi-agent Bernoulli bandits solved by
//! phased, elimination-based Thompson Sampling.
//!
//! The crate is organised bottom-up:
//!
//! * [`bandit`]: Bernoulli environments, arm identities and the seeded
//!   random stream contract.
//! * [`posterior`]: Beta-Bernoulli success/failure counting and sampling.
//! * [`agents`]: the per-agent policies (separated burn-in, the agent side of
//!   distributed elimination, and the baselines).
//! * [`coordination`]: the simulated server, arm reallocation, phase
//!   barriers and the full two-stage protocol.
//! * [`metrics`]: regret accounting over traces and the analytical bound
//!   calculators.

pub mod agents;
pub mod bandit;
pub mod coordination;
mod error;
pub mod metrics;
pub mod posterior;

pub use agents::{
    broadcast_eliminate, elimination_gap, local_eliminate, phase_length, AgentState, ArmSample,
    PhaseState, Schedule, UpdateRule, VanillaTsAgent,
};
pub use bandit::{ArmId, BanditInstance, RngStream};
pub use coordination::{
    aggregate_max, allocate_arms, pool_survivors, run_distributed, run_independent, run_policy,
    run_vanilla, Allocation, DistributedConfig, ExecMode, Message, MessageKind, Policy, Pooling,
    RunReport, Sender, Stage2PhaseLog,
};
pub use error::{Error, Result};
pub use metrics::{
    cumulative_regret, pull_counts, theorem1_decomposition, Bound, BoundInputs, PhaseCountBounds,
    PullRecord, RegretCurve, RegretUnits, Stage, StageBounds, Trace,
};
pub use posterior::{bernoulli_round, BetaCounts};
