//! Regret accounting and analytical bound calculators.
//!
//! Regret is pseudo-regret: every pull of arm `a` costs its gap `Δ_a`,
//! regardless of the realised reward. To make the accounting identities exact
//! rather than approximately true, regret is accumulated in [`RegretUnits`],
//! an unsigned fixed-point count of `2^-80`. A gap is converted once (exactly
//! for every gap at or above `2^-27`); sums of those units are plain integer
//! sums, so `R(t) = Σ_k Δ_k · N(k, t)` and the stage decomposition hold with
//! zero tolerance.
//!
//! Bound calculators use natural logarithms throughout and are correct only up
//! to the caller-supplied constants.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Serialize, Serializer};

use crate::bandit::{ArmId, BanditInstance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    BurnIn,
    Distributed,
}

impl Stage {
    pub fn number(self) -> u8 {
        match self {
            Stage::BurnIn => 1,
            Stage::Distributed => 2,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl Serialize for Stage {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

/// One pull: agent `agent`'s `round`-th pull (1-based) of `arm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PullRecord {
    pub round: u64,
    pub agent: usize,
    pub arm: ArmId,
    pub reward: u8,
    pub stage: Stage,
    pub phase: u32,
}

/// Canonically ordered pull log of a whole run.
///
/// Records are sorted by `(stage, phase, agent, round)`, which is independent
/// of how agents were scheduled.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub agents: usize,
    pub horizon: u64,
    pub records: Vec<PullRecord>,
}

impl Trace {
    pub fn new(agents: usize, horizon: u64, mut records: Vec<PullRecord>) -> Self {
        records.sort_by_key(|r| (r.stage, r.phase, r.agent, r.round));
        Self {
            agents,
            horizon,
            records,
        }
    }

    pub fn max_round(&self) -> u64 {
        self.records.iter().map(|r| r.round).max().unwrap_or(0)
    }

    /// Checks that each agent's rounds run 1, 2, … without gaps and stay within the horizon.
    pub fn validate(&self) -> Result<()> {
        let mut per_agent: Vec<Vec<u64>> = vec![Vec::new(); self.agents];
        for r in &self.records {
            let rounds = per_agent.get_mut(r.agent).ok_or_else(|| {
                Error::Integrity(format!("record for unknown agent {}", r.agent))
            })?;
            rounds.push(r.round);
        }
        for (agent, mut rounds) in per_agent.into_iter().enumerate() {
            rounds.sort_unstable();
            if rounds.iter().zip(1..).any(|(&r, expected)| r != expected) {
                return Err(Error::Integrity(format!(
                    "rounds of agent {agent} are not consecutive from 1"
                )));
            }
            if rounds.len() as u64 > self.horizon {
                return Err(Error::Integrity(format!(
                    "agent {agent} pulled {} times within a horizon of {}",
                    rounds.len(),
                    self.horizon
                )));
            }
        }
        Ok(())
    }
}

/// Fixed-point regret, in units of `2^-80`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Hash)]
pub struct RegretUnits(pub u128);

impl RegretUnits {
    const SCALE: f64 = (1u128 << 80) as f64;

    pub fn from_gap(gap: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&gap));
        RegretUnits((gap * Self::SCALE) as u128)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE
    }
}

impl Add for RegretUnits {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        RegretUnits(self.0 + rhs.0)
    }
}

impl AddAssign for RegretUnits {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for RegretUnits {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        RegretUnits(self.0 - rhs.0)
    }
}

impl Mul<u64> for RegretUnits {
    type Output = Self;
    fn mul(self, rhs: u64) -> Self {
        RegretUnits(self.0 * u128::from(rhs))
    }
}

impl std::iter::Sum for RegretUnits {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(RegretUnits::default(), Add::add)
    }
}

impl Serialize for RegretUnits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

pub fn gap_units(env: &BanditInstance) -> Vec<RegretUnits> {
    env.gaps().into_iter().map(RegretUnits::from_gap).collect()
}

/// Regret curves indexed by round; entry `t - 1` holds `R(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub pseudo: Vec<RegretUnits>,
    /// `Σ (μ* − reward)` over the recorded pulls.
    pub realized: Vec<f64>,
}

impl RegretCurve {
    pub fn len(&self) -> usize {
        self.pseudo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pseudo.is_empty()
    }

    pub fn at(&self, t: u64) -> RegretUnits {
        match t {
            0 => RegretUnits::default(),
            t => self.pseudo[(t as usize).min(self.pseudo.len()) - 1],
        }
    }

    pub fn final_regret(&self) -> RegretUnits {
        self.pseudo.last().copied().unwrap_or_default()
    }

    pub fn final_realized(&self) -> f64 {
        self.realized.last().copied().unwrap_or(0.0)
    }
}

fn check_arms(trace: &Trace, env: &BanditInstance) -> Result<()> {
    match trace.records.iter().find(|r| env.check_arm(r.arm).is_err()) {
        Some(r) => Err(Error::Integrity(format!(
            "trace pulls arm {} of a {}-armed instance",
            r.arm,
            env.num_arms()
        ))),
        None => Ok(()),
    }
}

/// `R(t) = Σ_{s ≤ t} Σ_i Δ(a_i(s))` for `t = 1..=max(T, last round)`.
pub fn cumulative_regret(trace: &Trace, env: &BanditInstance) -> Result<RegretCurve> {
    check_arms(trace, env)?;
    let len = trace.horizon.max(trace.max_round()) as usize;
    let gaps = gap_units(env);
    let best = env.best_mean();
    let mut per_round = vec![RegretUnits::default(); len];
    let mut realized_round = vec![0.0; len];
    for r in &trace.records {
        let slot = r.round as usize - 1;
        per_round[slot] += gaps[r.arm.0];
        realized_round[slot] += best - f64::from(r.reward);
    }
    let mut pseudo = per_round;
    for t in 1..len {
        pseudo[t] = pseudo[t] + pseudo[t - 1];
    }
    let mut realized = realized_round;
    for t in 1..len {
        realized[t] += realized[t - 1];
    }
    Ok(RegretCurve { pseudo, realized })
}

/// `N_M(k, t)`: pulls of each arm by all agents in rounds `1..=t`.
pub fn pull_counts(trace: &Trace, arms: usize, t: u64) -> Vec<u64> {
    let mut counts = vec![0u64; arms];
    for r in trace.records.iter().filter(|r| r.round <= t) {
        if let Some(c) = counts.get_mut(r.arm.0) {
            *c += 1;
        }
    }
    counts
}

/// `Σ_k Δ_k · N_k` for per-arm pull counts.
pub fn regret_from_counts(env: &BanditInstance, counts: &[u64]) -> RegretUnits {
    gap_units(env)
        .into_iter()
        .zip(counts)
        .map(|(gap, &n)| gap * n)
        .sum()
}

/// Empirical regret split into the burn-in and distributed stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegretSplit {
    pub stage1: RegretUnits,
    pub stage2: RegretUnits,
}

impl RegretSplit {
    pub fn total(&self) -> RegretUnits {
        self.stage1 + self.stage2
    }
}

pub fn theorem1_decomposition(trace: &Trace, env: &BanditInstance) -> Result<RegretSplit> {
    check_arms(trace, env)?;
    let gaps = gap_units(env);
    let mut split = RegretSplit {
        stage1: RegretUnits::default(),
        stage2: RegretUnits::default(),
    };
    for r in &trace.records {
        match r.stage {
            Stage::BurnIn => split.stage1 += gaps[r.arm.0],
            Stage::Distributed => split.stage2 += gaps[r.arm.0],
        }
    }
    Ok(split)
}

/// Outcome of a bound calculator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Value(f64),
    /// The arm has zero gap, so the `1/Δ` expressions do not apply.
    ZeroGap,
    /// The logarithm's argument is at most 1; the bound says nothing.
    Vacuous,
    /// Inputs are outside the formula's domain.
    Undefined,
}

impl Bound {
    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Value(v) => s.serialize_f64(*v),
            Bound::ZeroGap => s.serialize_str("zero-gap"),
            Bound::Vacuous => s.serialize_str("vacuous"),
            Bound::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// Inputs shared by the bound calculators. `horizon` and `burn_in` are pull
/// counts, kept real-valued so the formulas can be evaluated anywhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInputs {
    pub agents: usize,
    pub arms: usize,
    pub horizon: f64,
    pub burn_in: f64,
    pub gaps: Vec<f64>,
    /// `C` of the burn-in pull-count bound.
    pub c: f64,
    /// `C₂`: phase-count lower bound and stage-2 pull-count bound.
    pub c2: f64,
    /// `C₂′`: phase-count upper bound.
    pub c2_prime: f64,
    pub stage1_const: f64,
    pub stage2_const: f64,
}

impl BoundInputs {
    pub fn new(agents: usize, horizon: f64, burn_in: f64, gaps: Vec<f64>) -> Self {
        Self {
            agents,
            arms: gaps.len(),
            horizon,
            burn_in,
            gaps,
            c: 1.0,
            c2: 1.0,
            c2_prime: 1.0,
            stage1_const: 1.0,
            stage2_const: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let constants = [
            ("C", self.c),
            ("C2", self.c2),
            ("C2'", self.c2_prime),
            ("stage-1 constant", self.stage1_const),
            ("stage-2 constant", self.stage2_const),
        ];
        if let Some((name, v)) = constants.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Config(format!("{name} must be positive, got {v}")));
        }
        if let Some(g) = self.gaps.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(Error::Config(format!("gap {g} outside [0, 1]")));
        }
        if self.agents == 0 || self.arms == 0 {
            return Err(Error::Config("need at least one agent and one arm".into()));
        }
        Ok(())
    }

    fn gap(&self, arm: ArmId) -> Result<f64> {
        self.gaps.get(arm.0).copied().ok_or(Error::InvalidArm {
            arm: arm.0,
            arms: self.gaps.len(),
        })
    }

    fn mk(&self) -> f64 {
        (self.agents * self.arms) as f64
    }

    /// Lower/upper bounds on completed burn-in phases and the stage-2 phase limit.
    pub fn fact1_phase_bounds(&self) -> PhaseCountBounds {
        let mk = self.mk();
        if mk < 2.0 {
            return PhaseCountBounds::default();
        }
        let log_mk = mk.ln();
        let arms = self.arms as f64;
        let phases = |constant: f64, round: fn(f64) -> f64| {
            let arg = self.burn_in / (constant * arms * log_mk);
            (arg >= 1.0 && arg.is_finite()).then(|| round(arg.log(4.0)) as u32)
        };
        PhaseCountBounds {
            min_burn_in_phases: phases(self.c2, f64::floor),
            max_burn_in_phases: phases(self.c2_prime, f64::ceil),
            stage2_phase_limit: Some(4.0 + 5.0 * log_mk),
        }
    }

    /// `C · M · ln(M K T Δ²) / Δ²`.
    pub fn lemma2_bound(&self, arm: ArmId) -> Result<Bound> {
        let gap = self.gap(arm)?;
        Ok(self
            .log_term(gap)
            .map_value(|log| self.c * self.agents as f64 * log / (gap * gap)))
    }

    /// `C₂ · ln(M K T Δ²) / Δ² + η`.
    pub fn lemma4_bound(&self, arm: ArmId, eta: f64) -> Result<Bound> {
        if !(eta >= 0.0) {
            return Err(Error::Domain(format!("eta {eta} must be nonnegative")));
        }
        let gap = self.gap(arm)?;
        Ok(self
            .log_term(gap)
            .map_value(|log| self.c2 * log / (gap * gap) + eta))
    }

    fn log_term(&self, gap: f64) -> Bound {
        if gap <= 0.0 {
            return Bound::ZeroGap;
        }
        let arg = self.mk() * self.horizon * gap * gap;
        if arg <= 1.0 {
            Bound::Vacuous
        } else {
            Bound::Value(arg.ln())
        }
    }

    /// Headline stage bounds:
    /// `stage1 = c₁ M (Σ ln D / Δ²)²`, `stage2 = c₂ M Σ ln T ln(K T) / Δ`.
    pub fn stage_bounds(&self) -> StageBounds {
        let positive = || self.gaps.iter().copied().filter(|&g| g > 0.0);
        let m = self.agents as f64;
        let stage1 = if self.burn_in < 2.0 {
            Bound::Undefined
        } else {
            let inner: f64 = positive().map(|g| self.burn_in.ln() / (g * g)).sum();
            Bound::Value(self.stage1_const * m * inner * inner)
        };
        let stage2 = if self.horizon < 2.0 {
            Bound::Undefined
        } else {
            let per_gap = self.horizon.ln() * (self.arms as f64 * self.horizon).ln();
            let inner: f64 = positive().map(|g| per_gap / g).sum();
            Bound::Value(self.stage2_const * m * inner)
        };
        StageBounds { stage1, stage2 }
    }
}

/// Checks the aggregate allowance `Σ_a η(a) ≤ M ln M`.
pub fn validate_eta(etas: &[f64], agents: usize) -> Result<()> {
    let budget = agents as f64 * (agents as f64).ln();
    if let Some(eta) = etas.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::Domain(format!("eta {eta} must be nonnegative")));
    }
    let total: f64 = etas.iter().sum();
    if total > budget {
        return Err(Error::Domain(format!(
            "eta values sum to {total}, above the allowance M ln M = {budget}"
        )));
    }
    Ok(())
}

impl Bound {
    fn map_value(self, f: impl FnOnce(f64) -> f64) -> Bound {
        match self {
            Bound::Value(v) => Bound::Value(f(v)),
            other => other,
        }
    }
}

/// Phase-count bounds; `None` marks a bound that is undefined for the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PhaseCountBounds {
    pub min_burn_in_phases: Option<u32>,
    pub max_burn_in_phases: Option<u32>,
    pub stage2_phase_limit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageBounds {
    pub stage1: Bound,
    pub stage2: Bound,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(agent: usize, round: u64, arm: usize, stage: Stage) -> PullRecord {
        PullRecord {
            round,
            agent,
            arm: ArmId(arm),
            reward: 0,
            stage,
            phase: 1,
        }
    }

    fn env() -> BanditInstance {
        BanditInstance::new(vec![0.9, 0.1]).unwrap()
    }

    #[test]
    fn best_arm_only_has_zero_regret() {
        let recs = (1..=20).map(|t| record(0, t, 0, Stage::BurnIn)).collect();
        let curve = cumulative_regret(&Trace::new(1, 20, recs), &env()).unwrap();
        assert!(curve.pseudo.iter().all(|r| r.0 == 0));
    }

    #[test]
    fn regret_sums_over_rounds_and_agents() {
        let single = (1..=10).map(|t| record(0, t, 1, Stage::BurnIn)).collect();
        let curve = cumulative_regret(&Trace::new(1, 10, single), &env()).unwrap();
        assert!((curve.at(10).to_f64() - 8.0).abs() < 1e-12);

        let pair = (1..=5)
            .flat_map(|t| [record(0, t, 1, Stage::BurnIn), record(1, t, 1, Stage::BurnIn)])
            .collect();
        let curve = cumulative_regret(&Trace::new(2, 5, pair), &env()).unwrap();
        assert!((curve.at(5).to_f64() - 8.0).abs() < 1e-12);
        assert_eq!(curve.at(5), RegretUnits::from_gap(0.9 - 0.1) * 10);
    }

    #[test]
    fn unknown_arm_is_an_integrity_error() {
        let trace = Trace::new(1, 1, vec![record(0, 1, 5, Stage::BurnIn)]);
        assert!(matches!(
            cumulative_regret(&trace, &env()),
            Err(Error::Integrity(_))
        ));
        assert!(theorem1_decomposition(&trace, &env()).is_err());
    }

    #[test]
    fn pull_count_examples() {
        assert_eq!(pull_counts(&Trace::default(), 3, 10), vec![0, 0, 0]);
        let mut recs: Vec<PullRecord> = (1..=3).map(|t| record(0, t, 2, Stage::BurnIn)).collect();
        recs.extend((1..=4).map(|t| record(1, t, 2, Stage::BurnIn)));
        let trace = Trace::new(2, 4, recs);
        assert_eq!(pull_counts(&trace, 3, trace.max_round()), vec![0, 0, 7]);
        assert_eq!(pull_counts(&trace, 3, 2), vec![0, 0, 4]);
    }

    #[test]
    fn validation_catches_gaps_in_rounds() {
        let ok = Trace::new(1, 3, (1..=3).map(|t| record(0, t, 0, Stage::BurnIn)).collect());
        assert!(ok.validate().is_ok());
        let gap = Trace::new(1, 3, vec![record(0, 1, 0, Stage::BurnIn), record(0, 3, 0, Stage::BurnIn)]);
        assert!(gap.validate().is_err());
        let over = Trace::new(1, 1, (1..=2).map(|t| record(0, t, 0, Stage::BurnIn)).collect());
        assert!(over.validate().is_err());
    }

    #[test]
    fn decomposition_examples() {
        let mut recs: Vec<PullRecord> = (1..=4).map(|t| record(0, t, 1, Stage::BurnIn)).collect();
        recs.extend((5..=9).map(|t| record(0, t, 0, Stage::Distributed)));
        let trace = Trace::new(1, 9, recs);
        let split = theorem1_decomposition(&trace, &env()).unwrap();
        assert_eq!(split.stage2.0, 0);
        let curve = cumulative_regret(&trace, &env()).unwrap();
        assert_eq!(split.total(), curve.final_regret());
        assert_eq!(split.stage1, curve.final_regret());
    }

    #[test]
    fn fact1_examples() {
        let mut inputs = BoundInputs::new(4, 1e5, 400.0, vec![0.0, 0.1, 0.2, 0.3]);
        let b = inputs.fact1_phase_bounds();
        // 400 / (4 ln 16) = 36.067…, log₄ 36.067 = 2.585…
        assert_eq!(b.min_burn_in_phases, Some(2));
        assert_eq!(b.max_burn_in_phases, Some(3));
        // 4 + 5 ln 16 = 17.8629…
        assert!((b.stage2_phase_limit.unwrap() - 17.862_943_611_198_906).abs() < 1e-12);

        inputs.burn_in = 10.0;
        assert_eq!(inputs.fact1_phase_bounds().min_burn_in_phases, None);

        let single = BoundInputs::new(1, 100.0, 50.0, vec![0.0]);
        assert_eq!(single.fact1_phase_bounds(), PhaseCountBounds::default());
    }

    #[test]
    fn burn_in_pull_bound_examples() {
        let mut inputs = BoundInputs::new(2, 100.0, 25.0, vec![1.0, 1.0]);
        inputs.gaps = vec![0.0, 1.0];
        // 2 ln 400 = 11.9829…
        let v = inputs.lemma2_bound(ArmId(1)).unwrap().value().unwrap();
        assert!((v - 2.0 * 400f64.ln()).abs() < 1e-12);
        assert!((v - 11.982_929_094_215_963).abs() < 1e-9);
        assert_eq!(inputs.lemma2_bound(ArmId(0)).unwrap(), Bound::ZeroGap);
        assert!(inputs.lemma2_bound(ArmId(2)).is_err());

        inputs.gaps = vec![0.0, 0.01];
        inputs.horizon = 10.0;
        assert_eq!(inputs.lemma2_bound(ArmId(1)).unwrap(), Bound::Vacuous);
    }

    #[test]
    fn burn_in_pull_bound_scales_with_inverse_square_gap() {
        let inputs = BoundInputs::new(3, 1e6, 1e4, vec![0.0, 0.1, 0.2]);
        let small = inputs.lemma2_bound(ArmId(1)).unwrap().value().unwrap();
        let large = inputs.lemma2_bound(ArmId(2)).unwrap().value().unwrap();
        let log_small = (9e6f64 * 0.01).ln();
        let log_large = (9e6f64 * 0.04).ln();
        assert!(((small / log_small) / (large / log_large) - 4.0).abs() < 1e-9);
        assert!(small > large);
    }

    #[test]
    fn stage2_pull_bound_examples() {
        let inputs = BoundInputs::new(2, 100.0, 25.0, vec![0.0, 1.0]);
        let v = inputs.lemma4_bound(ArmId(1), 0.0).unwrap().value().unwrap();
        assert!((v - 5.991_464_547_107_982).abs() < 1e-9);
        let with_eta = inputs.lemma4_bound(ArmId(1), 0.5).unwrap().value().unwrap();
        assert!((with_eta - v - 0.5).abs() < 1e-12);
        assert_eq!(inputs.lemma4_bound(ArmId(0), 0.0).unwrap(), Bound::ZeroGap);

        // M = 3: allowance 3 ln 3 = 3.2958…
        assert!(validate_eta(&[1.0, 1.0, 1.0], 3).is_ok());
        assert!(validate_eta(&[2.0, 1.5], 3).is_err());
        assert!(validate_eta(&[0.1], 1).is_err());
    }

    #[test]
    fn stage_bound_examples() {
        let e2 = std::f64::consts::E.powi(2);
        let inputs = BoundInputs::new(1, e2, e2, vec![0.0, 1.0]);
        let b = inputs.stage_bounds();
        assert!((b.stage1.value().unwrap() - 4.0).abs() < 1e-12);
        // 2 (ln 2 + 2) = 5.386294…
        assert!((b.stage2.value().unwrap() - 5.386_294_361_119_891).abs() < 1e-12);

        let mut doubled = inputs.clone();
        doubled.agents = 2;
        let d = doubled.stage_bounds();
        assert!((d.stage1.value().unwrap() - 2.0 * b.stage1.value().unwrap()).abs() < 1e-12);
        assert!((d.stage2.value().unwrap() - 2.0 * b.stage2.value().unwrap()).abs() < 1e-12);

        let mut short = inputs;
        short.burn_in = 1.0;
        short.horizon = 1.5;
        assert_eq!(short.stage_bounds().stage1, Bound::Undefined);
        assert_eq!(short.stage_bounds().stage2, Bound::Undefined);
    }

    #[test]
    fn input_validation() {
        let mut inputs = BoundInputs::new(2, 100.0, 10.0, vec![0.0, 0.5]);
        assert!(inputs.validate().is_ok());
        inputs.c2 = 0.0;
        assert!(inputs.validate().is_err());
        inputs.c2 = 1.0;
        inputs.gaps[1] = 1.5;
        assert!(inputs.validate().is_err());
    }

    proptest! {
        #[test]
        fn regret_identity_holds_exactly(
            pulls in proptest::collection::vec((0usize..3, 0usize..4, any::<bool>()), 0..300),
            means in proptest::collection::vec(0.0f64..=1.0, 4),
        ) {
            let env = BanditInstance::new(means).unwrap();
            let mut rounds = [0u64; 3];
            let records: Vec<PullRecord> = pulls
                .iter()
                .map(|&(agent, arm, late)| {
                    rounds[agent] += 1;
                    let stage = if late { Stage::Distributed } else { Stage::BurnIn };
                    PullRecord { round: rounds[agent], agent, arm: ArmId(arm), reward: 1, stage, phase: 1 }
                })
                .collect();
            let trace = Trace::new(3, 300, records);
            let curve = cumulative_regret(&trace, &env).unwrap();
            for t in 0..=trace.max_round() {
                let counts = pull_counts(&trace, 4, t);
                prop_assert_eq!(curve.at(t), regret_from_counts(&env, &counts));
            }
            prop_assert!(curve.pseudo.windows(2).all(|w| w[0] <= w[1]));
            let split = theorem1_decomposition(&trace, &env).unwrap();
            prop_assert_eq!(split.total(), curve.final_regret());
        }

        #[test]
        fn bounds_are_monotone(
            g1 in 0.01f64..=1.0,
            g2 in 0.01f64..=1.0,
            horizon in 1e3f64..1e7,
            agents in 1usize..8,
        ) {
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let inputs = BoundInputs::new(agents, horizon, horizon / 10.0, vec![0.0, lo, hi]);
            if let (Bound::Value(a), Bound::Value(b)) = (
                inputs.lemma2_bound(ArmId(1)).unwrap(),
                inputs.lemma2_bound(ArmId(2)).unwrap(),
            ) {
                prop_assert!(a >= b);
            }
            let base = inputs.stage_bounds();
            let mut bigger = inputs.clone();
            bigger.horizon *= 2.0;
            bigger.burn_in *= 2.0;
            bigger.agents += 1;
            let grown = bigger.stage_bounds();
            prop_assert!(grown.stage1.value().unwrap() >= base.stage1.value().unwrap());
            prop_assert!(grown.stage2.value().unwrap() >= base.stage2.value().unwrap());
        }
    }
}
