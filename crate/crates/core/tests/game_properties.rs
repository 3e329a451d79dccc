//! Property tests for partitions, enumeration, and payoff evaluation,
//! cross-checked against independent brute-force oracles.

use attrgame::game::{MixedStrategy, Partition, Role};
use itertools::Itertools;
use proptest::prelude::*;

/// Random partitions: up to 4 blocks of up to 5 attributes, identifiers
/// drawn from a strided sequence so they are not always contiguous.
fn arb_partition() -> impl Strategy<Value = Partition> {
    (
        prop::collection::vec(1usize..=5, 1..=4),
        1u32..=3,
        0u32..=7,
    )
        .prop_map(|(sizes, stride, offset)| {
            let mut next = offset;
            let blocks = sizes
                .iter()
                .map(|&size| {
                    (0..size)
                        .map(|_| {
                            let id = next;
                            next += stride;
                            id
                        })
                        .collect()
                })
                .collect();
            Partition::new(blocks).expect("generated blocks are disjoint")
        })
}

proptest! {
    /// Enumeration is a bijection onto the Cartesian product of blocks, in
    /// the documented order. Oracle: itertools' multi_cartesian_product.
    #[test]
    fn enumeration_matches_cartesian_product(partition in arb_partition()) {
        let enumerated: Vec<Vec<u32>> = partition
            .pure_strategies(Role::Learner)
            .unwrap()
            .into_iter()
            .map(|s| s.choices)
            .collect();
        let expected: Vec<Vec<u32>> = partition
            .blocks()
            .iter()
            .map(|b| b.iter().copied())
            .multi_cartesian_product()
            .collect();
        prop_assert_eq!(enumerated, expected);
    }

    /// Indicator payoff equals the per-block comparison count and is
    /// symmetric in its arguments.
    #[test]
    fn indicator_is_a_symmetric_collision_count(
        partition in arb_partition(),
        pick in prop::collection::vec(0usize..1000, 2),
    ) {
        let strategies = partition.pure_strategies(Role::Learner).unwrap();
        let a = &strategies[pick[0] % strategies.len()];
        let b = &strategies[pick[1] % strategies.len()];
        let forward = partition.indicator_payoff(a, b).unwrap();
        let backward = partition.indicator_payoff(b, a).unwrap();
        let oracle = a
            .choices
            .iter()
            .zip(&b.choices)
            .filter(|(x, y)| x == y)
            .count() as u32;
        prop_assert_eq!(forward, oracle);
        prop_assert_eq!(forward, backward);
        prop_assert!(forward <= partition.block_count() as u32);
    }

    /// The uniform product profile pays the sum of reciprocal block sizes,
    /// and the same holds against every pure strategy of either player.
    #[test]
    fn uniform_profile_value_is_reciprocal_sum(partition in arb_partition()) {
        let matrix = partition.indicator_matrix().unwrap();
        let uniform = MixedStrategy::uniform_product(&partition);
        let closed_form = partition.uniform_game_value();

        let both = matrix.expected_payoff(&uniform, &uniform).unwrap();
        prop_assert!((both - closed_form).abs() < 1e-12);

        let expanded = uniform.expand(&partition.block_sizes()).unwrap();
        for payoff in matrix.col_payoffs(&expanded).unwrap() {
            prop_assert!((payoff - closed_form).abs() < 1e-12);
        }
        for payoff in matrix.row_payoffs(&expanded).unwrap() {
            prop_assert!((payoff - closed_form).abs() < 1e-12);
        }
    }

    /// The indicator matrix is the sum of the k per-block collision
    /// matrices lifted to the product space.
    #[test]
    fn indicator_matrix_is_additive_across_blocks(partition in arb_partition()) {
        let matrix = partition.indicator_matrix().unwrap();
        let p = matrix.row_count();
        prop_assume!(p <= 256);
        let sizes = partition.block_sizes();

        // Decompose a canonical index into per-block positions (block 0
        // varies slowest), independently of the enumeration code.
        let decompose = |mut index: usize| {
            let mut positions = vec![0usize; sizes.len()];
            for (slot, &size) in positions.iter_mut().zip(&sizes).rev() {
                *slot = index % size;
                index /= size;
            }
            positions
        };

        for r in 0..p {
            let pr = decompose(r);
            for c in 0..p {
                let pc = decompose(c);
                let lifted_sum: f64 = pr
                    .iter()
                    .zip(&pc)
                    .map(|(a, b)| if a == b { 1.0 } else { 0.0 })
                    .sum();
                prop_assert_eq!(matrix.entry(r, c), lifted_sum);
            }
        }
    }

    /// Matrix symmetry: identical strategy spaces and a symmetric indicator
    /// make the payoff matrix symmetric.
    #[test]
    fn indicator_matrix_is_symmetric(partition in arb_partition()) {
        let matrix = partition.indicator_matrix().unwrap();
        for r in 0..matrix.row_count() {
            for c in 0..r {
                prop_assert_eq!(matrix.entry(r, c), matrix.entry(c, r));
            }
        }
    }

    /// Expanding a product-form strategy yields a valid distribution whose
    /// entries are the per-block probability products.
    #[test]
    fn product_expansion_is_consistent(
        partition in arb_partition(),
        seed in 0u64..1000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let block_probs: Vec<Vec<f64>> = partition
            .blocks()
            .iter()
            .map(|b| {
                let raw: Vec<f64> = (0..b.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
                let sum: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / sum).collect()
            })
            .collect();
        let mix = MixedStrategy::product(block_probs.clone()).unwrap();
        let expanded = mix.expand(&partition.block_sizes()).unwrap();
        let total: f64 = expanded.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);

        let strategies = partition.pure_strategies(Role::Learner).unwrap();
        for (index, strategy) in strategies.iter().enumerate() {
            let oracle: f64 = strategy
                .choices
                .iter()
                .zip(partition.blocks())
                .zip(&block_probs)
                .map(|((choice, block), probs)| {
                    probs[block.iter().position(|c| c == choice).unwrap()]
                })
                .product();
            prop_assert!((expanded[index] - oracle).abs() < 1e-15);
        }
    }
}

/// Brute-force expectation over all strategy pairs for a fixed example:
/// blocks {1,2,3,4} and {5,6} give 1/4 + 1/2.
#[test]
fn uniform_expectation_brute_force_example() {
    let partition = Partition::new(vec![vec![1, 2, 3, 4], vec![5, 6]]).unwrap();
    let strategies = partition.pure_strategies(Role::Learner).unwrap();
    let p = strategies.len() as f64;
    let mut total = 0.0;
    for a in &strategies {
        for b in &strategies {
            total += partition.indicator_payoff(a, b).unwrap() as f64;
        }
    }
    let brute_force = total / (p * p);
    assert!((brute_force - 0.75).abs() < 1e-12);

    let matrix = partition.indicator_matrix().unwrap();
    let uniform = MixedStrategy::uniform_product(&partition);
    let evaluated = matrix.expected_payoff(&uniform, &uniform).unwrap();
    assert!((evaluated - brute_force).abs() < 1e-12);
}

/// Exhaustive 4x4 indicator table for the illustration partition, computed
/// by independent per-block comparison.
#[test]
fn illustration_payoff_table_brute_force() {
    let partition = Partition::new(vec![vec![1, 2], vec![3, 4]]).unwrap();
    let matrix = partition.indicator_matrix().unwrap();
    let strategies = partition.pure_strategies(Role::Learner).unwrap();
    for (r, a) in strategies.iter().enumerate() {
        for (c, b) in strategies.iter().enumerate() {
            let per_block = u32::from(a.choices[0] == b.choices[0])
                + u32::from(a.choices[1] == b.choices[1]);
            assert_eq!(matrix.entry(r, c), per_block as f64);
        }
    }
}
