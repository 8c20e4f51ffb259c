//! Bernoulli bandit environments and the seeded random stream contract.
//!
//! Every stochastic operation in the crate draws from an [`RngStream`]. A
//! stream is a ChaCha8 generator keyed by a 64-bit seed and positioned on a
//! 64-bit stream id, so identical `(seed, stream)` pairs replay the same draw
//! sequence on every platform and distinct stream ids are independent.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-based arm index.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ArmId(pub usize);

impl ArmId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for ArmId {
    fn from(index: usize) -> Self {
        ArmId(index)
    }
}

/// A K-armed Bernoulli bandit. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BanditInstance {
    means: Vec<f64>,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidInstance("an instance needs at least one arm".into()));
        }
        if let Some((arm, mu)) = means
            .iter()
            .enumerate()
            .find(|(_, mu)| !(0.0..=1.0).contains(*mu))
        {
            return Err(Error::InvalidInstance(format!(
                "mean of arm {arm} is {mu}, expected a probability in [0, 1]"
            )));
        }
        Ok(Self { means })
    }

    /// Arm 0 has mean `best`; every other arm sits exactly `gap` below it.
    pub fn uniform_gap(arms: usize, best: f64, gap: f64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidInstance("an instance needs at least one arm".into()));
        }
        if !(gap >= 0.0) {
            return Err(Error::InvalidInstance(format!("gap {gap} must be nonnegative")));
        }
        let mut means = vec![best - gap; arms];
        means[0] = best;
        Self::new(means)
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn arms(&self) -> impl Iterator<Item = ArmId> {
        (0..self.means.len()).map(ArmId)
    }

    pub fn check_arm(&self, arm: ArmId) -> Result<()> {
        if arm.0 < self.means.len() {
            Ok(())
        } else {
            Err(Error::InvalidArm {
                arm: arm.0,
                arms: self.means.len(),
            })
        }
    }

    pub fn mean(&self, arm: ArmId) -> Result<f64> {
        self.check_arm(arm)?;
        Ok(self.means[arm.0])
    }

    /// Draws a Bernoulli(μ(arm)) reward, consuming exactly one draw from `rng`.
    pub fn pull(&self, arm: ArmId, rng: &mut RngStream) -> Result<u8> {
        let mu = self.mean(arm)?;
        Ok(u8::from(rng.next_f64() < mu))
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-index arm attaining the maximum mean.
    pub fn best_arm(&self) -> ArmId {
        let best = self.best_mean();
        ArmId(self.means.iter().position(|&mu| mu == best).unwrap_or(0))
    }

    /// Suboptimality gap `max_k μ(k) − μ(arm)`; zero for every best arm.
    pub fn gap(&self, arm: ArmId) -> Result<f64> {
        Ok(self.best_mean() - self.mean(arm)?)
    }

    pub fn gaps(&self) -> Vec<f64> {
        let best = self.best_mean();
        self.means.iter().map(|mu| best - mu).collect()
    }
}

/// Seeded, single-owner random stream.
///
/// Draws are taken with [`RngStream::next_u64`]; [`RngStream::next_f64`] maps
/// one such draw onto `[0, 1)` using its top 53 bits.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Stream driving agent `agent`'s own decisions (rounding trials, posterior samples).
    pub fn for_agent(seed: u64, agent: usize) -> Self {
        Self::new(seed, 2 * agent as u64)
    }

    /// Environment stream producing the rewards observed by agent `agent`.
    pub fn for_environment(seed: u64, agent: usize) -> Self {
        Self::new(seed, 2 * agent as u64 + 1)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_means_are_deterministic() {
        let mut rng = RngStream::new(3, 0);
        let always = BanditInstance::new(vec![1.0]).unwrap();
        let never = BanditInstance::new(vec![0.0]).unwrap();
        for _ in 0..1000 {
            assert_eq!(always.pull(ArmId(0), &mut rng).unwrap(), 1);
            assert_eq!(never.pull(ArmId(0), &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn pull_mean_within_three_sigma() {
        let env = BanditInstance::new(vec![0.3]).unwrap();
        let mut rng = RngStream::new(11, 5);
        let n = 1_000_000;
        let hits: u64 = (0..n)
            .map(|_| u64::from(env.pull(ArmId(0), &mut rng).unwrap()))
            .sum();
        let mean = hits as f64 / n as f64;
        assert!((mean - 0.3).abs() <= 0.002, "mean {mean}");
    }

    #[test]
    fn pull_consumes_one_draw() {
        let env = BanditInstance::new(vec![0.5, 0.5]).unwrap();
        let mut a = RngStream::new(9, 1);
        let mut b = RngStream::new(9, 1);
        env.pull(ArmId(1), &mut a).unwrap();
        b.next_u64();
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn invalid_arm_is_rejected() {
        let env = BanditInstance::new(vec![0.5, 0.2]).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert_eq!(
            env.pull(ArmId(2), &mut rng),
            Err(Error::InvalidArm { arm: 2, arms: 2 })
        );
        assert!(env.gap(ArmId(7)).is_err());
    }

    #[test]
    fn gaps_and_best_arm() {
        let env = BanditInstance::new(vec![0.9, 0.1]).unwrap();
        assert!((env.gap(ArmId(1)).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(env.gap(ArmId(0)).unwrap(), 0.0);

        let tied = BanditInstance::new(vec![0.5, 0.5, 0.2]).unwrap();
        assert_eq!(tied.gap(ArmId(1)).unwrap(), 0.0);
        assert_eq!(tied.gap(ArmId(0)).unwrap(), 0.0);

        assert_eq!(
            BanditInstance::new(vec![0.2, 0.9, 0.4]).unwrap().best_arm(),
            ArmId(1)
        );
        assert_eq!(BanditInstance::new(vec![0.7]).unwrap().best_arm(), ArmId(0));
        assert_eq!(
            BanditInstance::new(vec![0.6, 0.6]).unwrap().best_arm(),
            ArmId(0)
        );
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(
            BanditInstance::new(vec![]),
            Err(Error::InvalidInstance(_))
        ));
        assert!(BanditInstance::new(vec![0.5, 1.2]).is_err());
        assert!(BanditInstance::new(vec![f64::NAN]).is_err());
        let env = BanditInstance::uniform_gap(3, 0.8, 0.3).unwrap();
        assert_eq!(env.means(), &[0.8, 0.8 - 0.3, 0.8 - 0.3]);
        assert!(BanditInstance::uniform_gap(3, 0.2, 0.3).is_err());
    }

    #[test]
    fn streams_replay_and_separate() {
        let mut a = RngStream::new(42, 3);
        let mut b = RngStream::new(42, 3);
        let xs: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);

        let mut c = RngStream::new(42, 4);
        let zs: Vec<u64> = (0..64).map(|_| c.next_u64()).collect();
        assert_ne!(xs, zs);
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let n = 100_000;
        let mut a = RngStream::for_agent(7, 0);
        let mut b = RngStream::for_environment(7, 0);
        let pairs: Vec<(f64, f64)> = (0..n).map(|_| (a.next_f64(), b.next_f64())).collect();
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, y) in &pairs {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 0.01, "correlation {corr}");
    }

    #[test]
    fn empirical_means_concentrate() {
        // |mean − μ| ≤ 4σ in at least 99% of repeated N = 1e5 trials.
        let env = BanditInstance::new(vec![0.2, 0.5, 0.85]).unwrap();
        let n = 100_000u64;
        for arm in env.arms() {
            let mu = env.mean(arm).unwrap();
            let band = 4.0 * (mu * (1.0 - mu) / n as f64).sqrt();
            let trials = 100;
            let mut inside = 0;
            for trial in 0..trials {
                let mut rng = RngStream::new(trial, arm.0 as u64);
                let hits: u64 = (0..n)
                    .map(|_| u64::from(env.pull(arm, &mut rng).unwrap()))
                    .sum();
                if (hits as f64 / n as f64 - mu).abs() <= band {
                    inside += 1;
                }
            }
            assert!(inside >= 99, "arm {arm}: {inside}/{trials} inside band");
        }
    }
}
