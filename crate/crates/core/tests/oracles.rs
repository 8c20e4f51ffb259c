//! Monte Carlo checks of the stochastic operation examples against
//! independently computed expectations.

use dts_core::metrics::regret_from_counts;
use dts_core::*;

/// ln Γ(n) = ln (n − 1)! for positive integers up to 300.
fn ln_gamma_int(n: u64) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 301];
        for k in 2..=300 {
            t[k] = t[k - 1] + ((k - 1) as f64).ln();
        }
        t
    });
    table[n as usize]
}

fn beta_pdf(x: f64, a: u64, b: u64) -> f64 {
    let ln = ln_gamma_int(a + b) - ln_gamma_int(a) - ln_gamma_int(b)
        + (a - 1) as f64 * x.ln()
        + (b - 1) as f64 * (1.0 - x).ln();
    ln.exp()
}

/// CDF of Beta(a, b) with integer shapes: P(Binomial(a + b − 1, x) ≥ a).
fn beta_cdf(x: f64, a: u64, b: u64) -> f64 {
    let n = a + b - 1;
    (a..=n)
        .map(|k| {
            let ln_choose = ln_gamma_int(n + 1) - ln_gamma_int(k + 1) - ln_gamma_int(n - k + 1);
            (ln_choose + k as f64 * x.ln() + (n - k) as f64 * (1.0 - x).ln()).exp()
        })
        .sum()
}

/// P(X > Y) for X ~ Beta(a1, b1), Y ~ Beta(a2, b2): midpoint rule on ∫ f_X F_Y.
fn prob_greater(a1: u64, b1: u64, a2: u64, b2: u64) -> f64 {
    let n = 4000;
    let h = 1.0 / n as f64;
    (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            beta_pdf(x, a1, b1) * beta_cdf(x, a2, b2)
        })
        .sum::<f64>()
        * h
}

fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    let ln_choose = ln_gamma_int(n + 1) - ln_gamma_int(k + 1) - ln_gamma_int(n - k + 1);
    (ln_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

#[test]
fn quadrature_oracle_matches_closed_forms() {
    // P(Beta(2,1) > Beta(1,2)) = 5/6, P(Beta(1,1) > Beta(1,1)) = 1/2.
    assert!((prob_greater(2, 1, 1, 2) - 5.0 / 6.0).abs() < 1e-6);
    assert!((prob_greater(1, 1, 1, 1) - 0.5).abs() < 1e-6);
    assert!((prob_greater(1, 2, 2, 1) - 1.0 / 6.0).abs() < 1e-6);
}

/// Fraction of `runs` single phases (m_1 = 64, μ = [0.95, 0.05]) in which the
/// best arm's sample beats the worst arm's.
fn first_phase_win_rate(update: UpdateRule, runs: u64) -> f64 {
    let env = BanditInstance::new(vec![0.95, 0.05]).unwrap();
    let horizon = 1e4f64;
    let c = 63.5 / (4.0 * horizon.ln());
    let schedule = Schedule::new(horizon, c).unwrap().with_update(update);
    assert_eq!(schedule.pulls_per_arm(1), 64);
    let mut wins = 0;
    for seed in 0..runs {
        let mut agent = AgentState::new(0, 2, schedule, seed);
        agent.begin_stage(metrics::Stage::BurnIn, 1, vec![ArmId(0), ArmId(1)], 128, true);
        let phase = agent.burn_in_phase(&env, &mut Vec::new()).unwrap();
        assert!(phase.complete);
        if phase.samples[0].theta > phase.samples[1].theta {
            wins += 1;
        }
    }
    wins as f64 / runs as f64
}

#[test]
fn per_pull_first_phase_separates_extreme_arms() {
    // Oracle: average P(Beta(S1+1,F1+1) > Beta(S2+1,F2+1)) over the binomial
    // laws of the 64 recorded rewards, truncated where the pmf is negligible.
    let mut oracle = 0.0;
    for s1 in 48..=64 {
        let p1 = binomial_pmf(64, s1, 0.95);
        for s2 in 0..=16 {
            let p2 = binomial_pmf(64, s2, 0.05);
            oracle += p1 * p2 * prob_greater(s1 + 1, 64 - s1 + 1, s2 + 1, 64 - s2 + 1);
        }
    }
    assert!(oracle > 0.999_999, "oracle {oracle}");
    let rate = first_phase_win_rate(UpdateRule::PerPull, 1000);
    assert!(rate >= 0.95, "win rate {rate}");
}

#[test]
fn per_phase_first_phase_matches_oracle() {
    // One rounded outcome per arm: the success probability of each rounding is
    // E[r̂] = μ, giving Beta(2,1) or Beta(1,2) posteriors.
    let (p, q) = (0.95, 0.05);
    let oracle = p * q * prob_greater(2, 1, 2, 1)
        + p * (1.0 - q) * prob_greater(2, 1, 1, 2)
        + (1.0 - p) * q * prob_greater(1, 2, 2, 1)
        + (1.0 - p) * (1.0 - q) * prob_greater(1, 2, 1, 2);
    assert!((oracle - 0.8).abs() < 1e-6, "oracle {oracle}");
    let runs = 1000;
    let rate = first_phase_win_rate(UpdateRule::PerPhase, runs);
    let sigma = (oracle * (1.0 - oracle) / runs as f64).sqrt();
    assert!((rate - oracle).abs() <= 3.0 * sigma, "rate {rate}, oracle {oracle}");
}

#[test]
fn burn_in_eliminates_clearly_worse_arm() {
    let env = BanditInstance::new(vec![0.9, 0.1]).unwrap();
    let horizon = 100_000.0;
    let schedule = Schedule::new(horizon, 1.0).unwrap();
    // Exactly four full phases with both arms active.
    let d: u64 = (1..=4).map(|l| 2 * schedule.pulls_per_arm(l)).sum();
    let seeds = 200;
    let mut eliminated = 0;
    for seed in 0..seeds {
        let mut agent = AgentState::new(0, 2, schedule, seed);
        let mut log = Vec::new();
        let report = agent.run_burn_in(&env, d, &mut log).unwrap();
        assert_eq!(log.len() as u64, d);
        assert!(report.completed_phases.len() >= 4);
        for phase in &report.completed_phases {
            assert!(phase.retained.len() <= phase.active.len());
        }
        if !report.survivors.contains(&ArmId(1)) {
            eliminated += 1;
        }
    }
    assert!(eliminated * 100 >= 95 * seeds, "{eliminated}/{seeds}");
}

#[test]
fn stage2_regret_below_loose_headline_bound() {
    let env = BanditInstance::new(vec![0.9, 0.1]).unwrap();
    let cfg = DistributedConfig::new(2, 200_000);
    let seeds = 50;
    let mut stage2 = 0.0;
    for seed in 0..seeds {
        let report = run_distributed(&env, &cfg, seed).unwrap();
        let split = theorem1_decomposition(&report.trace, &env).unwrap();
        let curve = cumulative_regret(&report.trace, &env).unwrap();
        assert_eq!(split.total(), curve.final_regret());
        stage2 += split.stage2.to_f64();
    }
    stage2 /= seeds as f64;

    let mut inputs = BoundInputs::new(2, 200_000.0, 50_000.0, env.gaps());
    inputs.stage2_const = 64.0;
    let bound = inputs.stage_bounds().stage2.value().unwrap();
    assert!(stage2 <= bound, "stage-2 regret {stage2} above {bound}");
}

#[test]
fn regret_identity_on_full_runs() {
    let env = BanditInstance::new(vec![0.6, 0.55, 0.2, 0.58]).unwrap();
    for policy in [Policy::DistributedEts, Policy::IndependentEts, Policy::VanillaTs] {
        let mut cfg = DistributedConfig::new(3, 6000);
        cfg.carry_posteriors = policy == Policy::IndependentEts;
        let report = run_policy(policy, &env, &cfg, 5).unwrap();
        report.trace.validate().unwrap();
        let curve = cumulative_regret(&report.trace, &env).unwrap();
        for t in (0..=cfg.horizon).step_by(97) {
            let counts = pull_counts(&report.trace, env.num_arms(), t);
            assert_eq!(curve.at(t), regret_from_counts(&env, &counts), "{policy} t={t}");
        }
        let expected = report.expected_outcome_counts();
        for (agent, counts) in report.posteriors.iter().enumerate() {
            let totals: Vec<u64> = counts.iter().map(BetaCounts::total).collect();
            assert_eq!(totals, expected[agent], "{policy} agent {agent}");
        }
    }
}
