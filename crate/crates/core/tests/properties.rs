use num_traits::{One, Zero};
use ppswap::analysis::thresholds;
use ppswap::{
    audit_honesty, payoff_y, ratio, solve, terminal_outcome, transfer_schedule, Action, AgentId,
    AgentType, Choice, CollateralDisposition, DecisionNode, Exact, GameSpec, History, Move,
};
use proptest::prelude::*;

fn q(n: i64) -> Exact {
    ratio(n, 1)
}

prop_compose! {
    fn exact_spec(max_n: usize)(
        n in 1..=max_n,
        p0 in 1i64..500,
        delta_frac in 0i64..=100,
        alpha_a in 0i64..1000,
        alpha_b in 0i64..1000,
        mu_a in 0i64..=50,
        mu_b in 0i64..=50,
        ca in 0i64..600,
        cb in 0i64..600,
        transferred in any::<bool>(),
    ) -> GameSpec<Exact> {
        let delta = q(p0) * ratio(delta_frac, 100) / q(n as i64);
        let disposition = if transferred {
            CollateralDisposition::TransferredToCounterparty
        } else {
            CollateralDisposition::Burned
        };
        GameSpec::new(q(p0), delta, n)
            .unwrap()
            .with_preferences(ratio(alpha_a, 4), ratio(alpha_b, 4))
            .with_population(ratio(mu_a, 50), ratio(mu_b, 50))
            .with_collateral(ratio(ca, 2), ratio(cb, 2))
            .with_disposition(disposition)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Y_n equals Bob's ledger position rebuilt from the transfer schedule.
    #[test]
    fn payoff_matches_accounting(spec in exact_spec(10)) {
        let n = spec.n_packets;
        let schedule = transfer_schedule(&spec);
        prop_assert_eq!(schedule.len(), n + 1);
        for exit in 0..=n + 1 {
            let received: Exact = schedule[..exit].iter().map(|t| t.asset1.clone()).sum();
            let paid: Exact = schedule[..exit].iter().map(|t| t.asset2.clone()).sum();
            let time = exit.min(n);
            for u in 0..=time {
                let price = spec.market.price_at(time, u);
                let y = payoff_y(&spec, exit, &price).unwrap();
                prop_assert_eq!(y, received.clone() * price - paid.clone());
            }
        }
        let total_a1: Exact = schedule.iter().map(|t| t.asset1.clone()).sum();
        let total_a2: Exact = schedule.iter().map(|t| t.asset2.clone()).sum();
        prop_assert_eq!(total_a1, Exact::one());
        prop_assert_eq!(&total_a2, spec.p0());
        prop_assert!(payoff_y(&spec, n + 1, spec.p0()).unwrap().is_zero());
    }

    /// More collateral only hurts the agent through its own stops.
    #[test]
    fn collateral_monotone(spec in exact_spec(5), extra in 1i64..100) {
        let n = spec.n_packets;
        let path = |k: usize| (0..k).flat_map(|i| {
            [Action::Continue, Action::Wait(if i % 2 == 0 { Move::Up } else { Move::Down })]
        }).collect::<Vec<_>>();
        for agent in AgentId::ALL {
            let richer = match agent {
                AgentId::Alice => spec.clone().with_collateral(spec.collateral.alice.clone() + q(extra), spec.collateral.bob.clone()),
                AgentId::Bob => spec.clone().with_collateral(spec.collateral.alice.clone(), spec.collateral.bob.clone() + q(extra)),
            };
            for k in 0..=n {
                let mut acts = path(k);
                acts.push(Action::Stop);
                let h = History::from_actions(n, &acts).unwrap();
                let before = terminal_outcome(&spec, &h).unwrap();
                let after = terminal_outcome(&richer, &h).unwrap();
                for t in AgentType::ALL {
                    if DecisionNode::new(k, 0).mover() == agent {
                        prop_assert!(after.utility(agent, t) < before.utility(agent, t));
                    } else {
                        prop_assert_eq!(after.utility(agent, t), before.utility(agent, t));
                    }
                }
            }
            let mut acts = path(n);
            acts.push(Action::Continue);
            let h = History::from_actions(n, &acts).unwrap();
            let before = terminal_outcome(&spec, &h).unwrap();
            let after = terminal_outcome(&richer, &h).unwrap();
            for t in AgentType::ALL {
                prop_assert_eq!(before.utility(agent, t), after.utility(agent, t));
            }
        }
    }

    /// Utilities are homogeneous of degree one in money amounts.
    #[test]
    fn argmax_invariant_under_scaling(spec in exact_spec(6), num in 1i64..50, den in 1i64..50) {
        let k = ratio(num, den);
        let scaled = GameSpec::new(spec.p0().clone() * k.clone(), spec.delta().clone() * k.clone(), spec.n_packets)
            .unwrap()
            .with_preferences(
                spec.preferences.alpha_alice_honest.clone() * k.clone(),
                spec.preferences.alpha_bob_honest.clone() * k.clone(),
            )
            .with_population(spec.population.mu_alice.clone(), spec.population.mu_bob.clone())
            .with_collateral(spec.collateral.alice.clone() * k.clone(), spec.collateral.bob.clone() * k.clone())
            .with_disposition(spec.collateral.disposition);
        let a = solve(&spec).unwrap();
        let b = solve(&scaled).unwrap();
        prop_assert_eq!(&a.strategy, &b.strategy);
        prop_assert_eq!(a.honesty.willing_alice, b.honesty.willing_alice);
        prop_assert_eq!(a.honesty.willing_bob, b.honesty.willing_bob);
        for (key, v) in &a.node_values {
            prop_assert_eq!(v.continue_value.clone() * k.clone(), b.node_values[key].continue_value.clone());
        }
    }

    #[test]
    fn closed_forms_monotone(p0 in 1.0f64..1000.0, d1 in 0.0f64..0.25, d2 in 0.25f64..0.5, a1 in 0.0f64..500.0, a2 in 500.0f64..1000.0) {
        let (d1, d2) = (d1 * p0, d2 * p0);
        let lo = thresholds(p0, d1, a1, a1, 2).unwrap();
        let hi_alpha = thresholds(p0, d1, a2, a2, 2).unwrap();
        let hi_delta = thresholds(p0, d2, a1, a1, 2).unwrap();
        prop_assert!(hi_alpha.bob_mu_min < lo.bob_mu_min);
        prop_assert!(hi_alpha.alice_mu_min < lo.alice_mu_min);
        prop_assert!(hi_delta.bob_mu_min > lo.bob_mu_min);
        prop_assert!(hi_delta.collateral_bob_min > lo.collateral_bob_min);
        prop_assert!(hi_delta.collateral_alice_min > lo.collateral_alice_min);
        prop_assert!(hi_delta.alice_alpha_min > lo.alice_alpha_min);
        prop_assert!(lo.alice_mu_min > 0.0 && hi_alpha.alice_mu_min > 0.0);
    }

    /// With a flat price and an all-honest Alice population, honest Bob is
    /// willing exactly when alpha_b > p0 / 4.
    #[test]
    fn flat_price_bob_quarter(p0 in 1i64..1000, num in 0i64..2000) {
        let alpha_b = ratio(num, 4);
        let spec = GameSpec::new(q(p0), q(0), 2).unwrap().with_preferences(q(0), alpha_b.clone());
        let willing = audit_honesty(&spec).unwrap().willing_bob;
        prop_assert_eq!(willing, alpha_b > q(p0) / q(4));
    }
}

#[test]
fn zero_price_corner_is_flagged_and_tie_stops() {
    let spec = GameSpec::new(q(100), q(50), 2).unwrap();
    let report = solve(&spec).unwrap();
    assert!(!report.strictly_positive_prices);
    let corner = DecisionNode::new(2, 0);
    let v = report
        .node_value(AgentId::Alice, AgentType::Malicious, corner)
        .unwrap();
    assert_eq!(v.continue_value, v.stop_value);
    assert_eq!(
        report.strategy.choice(AgentType::Malicious, corner),
        Choice::Stop
    );
    assert!(report.malicious_stops_everywhere_from(1));
}

#[test]
fn malicious_alice_opening_is_computed() {
    // With no collateral malicious Alice's opening value is (2 mu_b - 1) p0 / 2.
    for (mu_b, opens) in [
        (ratio(3, 4), true),
        (ratio(1, 2), false),
        (ratio(1, 4), false),
    ] {
        let spec = GameSpec::new(q(100), q(10), 2)
            .unwrap()
            .with_population(q(1), mu_b.clone());
        let report = solve(&spec).unwrap();
        let v = report
            .node_value(
                AgentId::Alice,
                AgentType::Malicious,
                DecisionNode::new(0, 0),
            )
            .unwrap();
        assert_eq!(v.continue_value, (q(2) * mu_b - q(1)) * q(50));
        assert_eq!(report.malicious_alice_opens(), opens);
    }
}

#[test]
fn bob_threshold_is_strict_in_exact_arithmetic() {
    let at = |mu_a: Exact| {
        let spec = GameSpec::new(q(100), q(10), 2)
            .unwrap()
            .with_preferences(q(0), q(50))
            .with_population(mu_a, q(1));
        solve(&spec).unwrap().willing_honesty(AgentId::Bob)
    };
    let threshold = ratio(200, 290);
    assert!(!at(threshold.clone()));
    assert!(at(threshold.clone() + ratio(1, 1_000_000_000_000)));
    assert!(!at(threshold - ratio(1, 1_000_000_000_000)));
}
