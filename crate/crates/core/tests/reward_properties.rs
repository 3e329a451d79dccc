//! Reward-model checks: random valid tables against an independent pairwise
//! scan, reward-matrix assumptions, normalization behaviour, and the
//! constant-quality scaling law.

use attrgame::equilibrium::solve_lp;
use attrgame::game::{MixedStrategy, Partition, Role};
use attrgame::reward::{
    attack_succeeds, build_reward_matrix, normalize_reward, validate_quality_table,
    ConfidenceInterval, QualityTable, ValidationMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_partition(rng: &mut ChaCha8Rng, max_k: usize, max_block: usize, max_p: u64) -> Partition {
    loop {
        let k = rng.random_range(1..=max_k);
        let mut next = 0u32;
        let blocks: Vec<Vec<u32>> = (0..k)
            .map(|_| {
                let size = rng.random_range(1..=max_block);
                (0..size)
                    .map(|_| {
                        next += 1;
                        next
                    })
                    .collect()
            })
            .collect();
        let partition = Partition::new(blocks).unwrap();
        if partition.strategy_count().unwrap() <= max_p {
            return partition;
        }
    }
}

/// A random strictly-valid table: collisions drop quality by a positive
/// amount, non-collisions copy the base exactly.
fn random_valid_table(partition: &Partition, rng: &mut ChaCha8Rng) -> QualityTable {
    let strategies = partition.pure_strategies(Role::Learner).unwrap();
    let p = strategies.len();
    let base: Vec<f64> = (0..p).map(|_| 0.5 + rng.random::<f64>() * 0.4).collect();
    let mut table = QualityTable::new(base.clone()).unwrap();
    for (l, ls) in strategies.iter().enumerate() {
        for (a, as_) in strategies.iter().enumerate() {
            let hits = partition.indicator_payoff(ls, as_).unwrap();
            let q = if hits > 0 {
                base[l] - (0.01 + rng.random::<f64>() * 0.3)
            } else {
                base[l]
            };
            table.set_attacked(l, a, q).unwrap();
        }
    }
    table
}

#[test]
fn random_valid_tables_pass_validation_and_the_pairwise_scan_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..30 {
        let partition = random_partition(&mut rng, 4, 4, 64);
        let table = random_valid_table(&partition, &mut rng);
        let violations =
            validate_quality_table(&partition, &table, ValidationMode::Strict).unwrap();
        assert!(violations.is_empty());

        // Independent scan: flip one random entry to equality-on-collision
        // and confirm both the scan and the validator catch exactly it.
        let strategies = partition.pure_strategies(Role::Learner).unwrap();
        let colliding: Vec<(usize, usize)> = (0..strategies.len())
            .flat_map(|l| (0..strategies.len()).map(move |a| (l, a)))
            .filter(|&(l, a)| {
                partition
                    .indicator_payoff(&strategies[l], &strategies[a])
                    .unwrap()
                    > 0
            })
            .collect();
        let &(l, a) = &colliding[rng.random_range(0..colliding.len())];
        let mut broken = table.clone();
        broken.set_attacked(l, a, broken.base(l).unwrap()).unwrap();

        let scan: Vec<(usize, usize)> = (0..strategies.len())
            .flat_map(|i| (0..strategies.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let hits = partition
                    .indicator_payoff(&strategies[i], &strategies[j])
                    .unwrap();
                let q = broken.attacked(i, j).unwrap();
                let b = broken.base(i).unwrap();
                if hits > 0 {
                    q >= b - 1e-12
                } else {
                    (q - b).abs() > 1e-12
                }
            })
            .collect();
        let found = validate_quality_table(&partition, &broken, ValidationMode::Strict).unwrap();
        let found_pairs: Vec<(usize, usize)> =
            found.iter().map(|v| (v.learner, v.adversary)).collect();
        assert_eq!(found_pairs, scan);
        assert_eq!(found_pairs, vec![(l, a)]);
    }
}

#[test]
fn reward_matrices_satisfy_both_assumptions_exhaustively() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..30 {
        let partition = random_partition(&mut rng, 4, 4, 256);
        let table = random_valid_table(&partition, &mut rng);
        let matrix = build_reward_matrix(&partition, &table).unwrap();
        let strategies = partition.pure_strategies(Role::Learner).unwrap();
        for (l, ls) in strategies.iter().enumerate() {
            let base = table.base(l).unwrap();
            for (a, as_) in strategies.iter().enumerate() {
                let hits = partition.indicator_payoff(ls, as_).unwrap();
                let reward = matrix.entry(l, a);
                if hits > 0 {
                    assert!(reward > base, "collision pair ({l},{a}) must pay above base");
                } else {
                    assert!(
                        (reward - base).abs() <= 1e-12,
                        "clean pair ({l},{a}) must pay exactly base"
                    );
                }
            }
        }
    }
}

/// Constant base quality with a uniform per-collision drop d turns the
/// reward game into base + d * indicator game, so the LP values relate by
/// the same affine map.
#[test]
fn constant_quality_reward_value_scales_the_indicator_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..10 {
        let partition = random_partition(&mut rng, 3, 3, 27);
        let strategies = partition.pure_strategies(Role::Learner).unwrap();
        let p = strategies.len();
        let base = 0.75;
        let drop = 0.05 + rng.random::<f64>() * 0.2;
        let mut table = QualityTable::new(vec![base; p]).unwrap();
        for (l, ls) in strategies.iter().enumerate() {
            for (a, as_) in strategies.iter().enumerate() {
                let hits = partition.indicator_payoff(ls, as_).unwrap() as f64;
                table.set_attacked(l, a, base - drop * hits).unwrap();
            }
        }
        let reward = build_reward_matrix(&partition, &table).unwrap();
        let reward_value = solve_lp(&reward).unwrap().value;
        let indicator_value = solve_lp(&partition.indicator_matrix().unwrap()).unwrap().value;
        assert!(
            (reward_value - (base + drop * indicator_value)).abs() < 1e-9,
            "reward {reward_value} vs base {base} + {drop} * {indicator_value}"
        );
    }
}

/// With constant base quality the row shift is a global constant, so the
/// normalized game has the same equilibrium strategies for both players.
#[test]
fn normalization_preserves_strategies_under_constant_quality() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let partition = random_partition(&mut rng, 3, 3, 27);
    let strategies = partition.pure_strategies(Role::Learner).unwrap();
    let p = strategies.len();
    let base = 0.8;
    let mut table = QualityTable::new(vec![base; p]).unwrap();
    for (l, ls) in strategies.iter().enumerate() {
        for (a, as_) in strategies.iter().enumerate() {
            let hits = partition.indicator_payoff(ls, as_).unwrap();
            let q = if hits > 0 {
                base - 0.02 * (1.0 + rng.random::<f64>()) * hits as f64
            } else {
                base
            };
            table.set_attacked(l, a, q).unwrap();
        }
    }
    let reward = build_reward_matrix(&partition, &table).unwrap();
    let normalized = normalize_reward(&reward, &table).unwrap();
    let solved = solve_lp(&reward).unwrap();
    let solved_norm = solve_lp(&normalized).unwrap();
    assert!((solved.value - (solved_norm.value + base)).abs() < 1e-9);
    let probs = |m: &MixedStrategy| match m {
        MixedStrategy::General(v) => v.clone(),
        _ => unreachable!(),
    };
    for (a, b) in probs(&solved.adversary_strategy)
        .iter()
        .zip(probs(&solved_norm.adversary_strategy).iter())
    {
        assert!((a - b).abs() < 1e-6);
    }
    for (a, b) in probs(&solved.learner_strategy)
        .iter()
        .zip(probs(&solved_norm.learner_strategy).iter())
    {
        assert!((a - b).abs() < 1e-6);
    }
}

/// Row-dependent shifts are not a single affine transformation of the game:
/// with unequal base qualities the learner trades quality against
/// tamper-risk and the equilibrium can move. This pins the concrete 2x2
/// counterexample (base (0, 10), drops (1, 11)): the full reward game has a
/// dominant learner row and a pure adversary optimum, while the normalized
/// game is matching-pennies-like with a mixed optimum.
#[test]
fn normalization_can_move_the_optimum_when_quality_varies() {
    let partition = Partition::new(vec![vec![1, 2]]).unwrap();
    let mut table = QualityTable::new(vec![0.0, 10.0]).unwrap();
    table.set_attacked(0, 0, -1.0).unwrap();
    table.set_attacked(0, 1, 0.0).unwrap();
    table.set_attacked(1, 0, 10.0).unwrap();
    table.set_attacked(1, 1, -1.0).unwrap();
    let reward = build_reward_matrix(&partition, &table).unwrap();
    let normalized = normalize_reward(&reward, &table).unwrap();

    let full = solve_lp(&reward).unwrap();
    let norm = solve_lp(&normalized).unwrap();
    let adversary = |m: &MixedStrategy| match m {
        MixedStrategy::General(v) => v.clone(),
        _ => unreachable!(),
    };
    let a_full = adversary(&full.adversary_strategy);
    let a_norm = adversary(&norm.adversary_strategy);
    // Full game: learner row 0 dominates, adversary answers with column 0.
    assert!((full.value - 1.0).abs() < 1e-9);
    assert!(a_full[0] > 0.99);
    // Normalized game: diag(1, 11) has the mixed optimum (11/12, 1/12).
    assert!((norm.value - 11.0 / 12.0).abs() < 1e-9);
    assert!((a_norm[0] - 11.0 / 12.0).abs() < 1e-6);
}

#[test]
fn attack_success_is_monotone_in_distance_from_center() {
    let interval = ConfidenceInterval::new(0.6, 0.1).unwrap();
    let mut last = false;
    for step in 0..40 {
        let delta = step as f64 * 0.01;
        let succeeded = attack_succeeds(0.6, &interval, 0.6 + delta).unwrap();
        let mirrored = attack_succeeds(0.6, &interval, 0.6 - delta).unwrap();
        assert_eq!(succeeded, mirrored);
        assert!(succeeded || !last, "success must not flip back off");
        assert_eq!(succeeded, delta > 0.1);
        last = succeeded;
    }
}
