//! Beta-Bernoulli posterior state.
//!
//! An arm's belief is `Beta(S + 1, F + 1)` where `S`/`F` count recorded
//! success/failure outcomes. The phased policies record one outcome per arm
//! per completed phase (a Bernoulli rounding of the phase's mean reward), the
//! per-pull baseline records raw rewards.
//!
//! Replay stability: [`BetaCounts::sample_theta`] consumes exactly one `u64`
//! from the caller's stream and uses it to key a private ChaCha8 generator
//! that feeds the (rejection-based) Beta sampler. The caller's stream position
//! therefore never depends on how many internal attempts the sampler needed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::bandit::RngStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BetaCounts {
    pub successes: u64,
    pub failures: u64,
}

impl BetaCounts {
    pub fn new(successes: u64, failures: u64) -> Self {
        Self {
            successes,
            failures,
        }
    }

    pub fn record(&mut self, success: bool) {
        if success {
            self.successes += 1;
        } else {
            self.failures += 1;
        }
    }

    /// Value-returning form of [`BetaCounts::record`].
    pub fn recorded(mut self, success: bool) -> Self {
        self.record(success);
        self
    }

    pub fn total(&self) -> u64 {
        self.successes + self.failures
    }

    /// Posterior mean `(S + 1) / (S + F + 2)`.
    pub fn mean(&self) -> f64 {
        (self.successes as f64 + 1.0) / (self.total() as f64 + 2.0)
    }

    /// Draws θ ~ Beta(S + 1, F + 1), strictly inside (0, 1).
    pub fn sample_theta(&self, rng: &mut RngStream) -> f64 {
        let mut inner = ChaCha8Rng::seed_from_u64(rng.next_u64());
        let beta = Beta::new(self.successes as f64 + 1.0, self.failures as f64 + 1.0)
            .expect("shape parameters are at least one");
        loop {
            let theta = beta.sample(&mut inner);
            if theta > 0.0 && theta < 1.0 {
                return theta;
            }
        }
    }
}

/// Bernoulli trial with success probability `r_hat`; one draw from `rng`.
pub fn bernoulli_round(r_hat: f64, rng: &mut RngStream) -> Result<bool> {
    if !(0.0..=1.0).contains(&r_hat) {
        return Err(Error::Domain(format!(
            "rounding probability {r_hat} is outside [0, 1]"
        )));
    }
    Ok(rng.next_f64() < r_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn record_changes_exactly_one_counter() {
        assert_eq!(BetaCounts::default().recorded(true), BetaCounts::new(1, 0));
        assert_eq!(BetaCounts::default().recorded(false), BetaCounts::new(0, 1));
        assert_eq!(BetaCounts::new(3, 5).recorded(true), BetaCounts::new(4, 5));
    }

    fn empirical_mean(counts: BetaCounts, n: usize, seed: u64) -> f64 {
        let mut rng = RngStream::new(seed, 0);
        (0..n).map(|_| counts.sample_theta(&mut rng)).sum::<f64>() / n as f64
    }

    #[test]
    fn uniform_prior_mean() {
        let mean = empirical_mean(BetaCounts::new(0, 0), 1_000_000, 1);
        assert!((mean - 0.5).abs() <= 0.002, "mean {mean}");
    }

    #[test]
    fn informed_posterior_mean() {
        let mean = empirical_mean(BetaCounts::new(3, 1), 1_000_000, 2);
        assert!((mean - 4.0 / 6.0).abs() <= 0.002, "mean {mean}");
    }

    #[test]
    fn samples_stay_in_open_interval() {
        let mut rng = RngStream::new(5, 0);
        for counts in [
            BetaCounts::new(0, 0),
            BetaCounts::new(10_000, 0),
            BetaCounts::new(0, 10_000),
            BetaCounts::new(1, 500_000),
        ] {
            for _ in 0..10_000 {
                let theta = counts.sample_theta(&mut rng);
                assert!(theta > 0.0 && theta < 1.0, "{counts:?} -> {theta}");
            }
        }
    }

    #[test]
    fn sampling_consumes_one_draw() {
        let mut a = RngStream::new(8, 2);
        let mut b = RngStream::new(8, 2);
        BetaCounts::new(4, 9).sample_theta(&mut a);
        b.next_u64();
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn rounding_edges_and_domain() {
        let mut rng = RngStream::new(0, 0);
        for _ in 0..1000 {
            assert!(bernoulli_round(1.0, &mut rng).unwrap());
            assert!(!bernoulli_round(0.0, &mut rng).unwrap());
        }
        assert!(matches!(bernoulli_round(1.5, &mut rng), Err(Error::Domain(_))));
        assert!(bernoulli_round(-0.1, &mut rng).is_err());
        assert!(bernoulli_round(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn rounding_rate() {
        let mut rng = RngStream::new(21, 0);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| bernoulli_round(0.25, &mut rng).unwrap())
            .count();
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.25).abs() <= 0.0013, "rate {rate}");
    }

    fn deciles(counts: BetaCounts, seed: u64) -> Vec<f64> {
        let n = 100_000;
        let mut rng = RngStream::new(seed, 0);
        let samples: Vec<f64> = (0..n).map(|_| counts.sample_theta(&mut rng)).collect();
        (1..10)
            .map(|d| {
                let x = d as f64 / 10.0;
                samples.iter().filter(|&&s| s <= x).count() as f64 / n as f64
            })
            .collect()
    }

    #[test]
    fn more_successes_dominate_stochastically() {
        for (s, s_more, f) in [(0, 2, 1), (3, 4, 3), (1, 10, 6)] {
            let low = deciles(BetaCounts::new(s, f), 100 + s);
            let high = deciles(BetaCounts::new(s_more, f), 200 + s_more);
            for (lo, hi) in low.iter().zip(&high) {
                assert!(hi <= &(lo + 0.01), "S={s} vs S'={s_more}: {hi} > {lo}");
            }
        }
    }

    proptest! {
        #[test]
        fn sampling_is_replayable(s in 0u64..1000, f in 0u64..1000, seed: u64) {
            let counts = BetaCounts::new(s, f);
            let a = counts.sample_theta(&mut RngStream::new(seed, 0));
            let b = counts.sample_theta(&mut RngStream::new(seed, 0));
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn counts_never_decrease(outcomes in proptest::collection::vec(any::<bool>(), 0..200)) {
            let mut counts = BetaCounts::default();
            for (i, &o) in outcomes.iter().enumerate() {
                let before = counts;
                counts.record(o);
                prop_assert!(counts.successes >= before.successes);
                prop_assert!(counts.failures >= before.failures);
                prop_assert_eq!(counts.total(), i as u64 + 1);
            }
        }
    }
}
