//! Property tests over randomized inputs: stochasticity of every simulated
//! matrix, invariances of capacity and fidelity, soundness of the monotone
//! against extracted factorizations, and the strategy-class inclusions.

use esl_core::channel::unassisted_channel_matrix;
use esl_core::constructions::{matrix_m7, ChannelMatrix};
use esl_core::info::{
    assess_unlock, capacity, mutual_information, trace_fidelity, CapacityOptions, UnlockStatus,
};
use esl_core::protocol::{
    minimal_to_env_assisted, mix, simulate_assisted, simulate_pr, simulate_pr_via_sr_cbit,
    strategy_n7, AssistedStrategy,
};
use esl_core::psdrank::{
    auto_hints, certify, factorization_from_strategy, max_monotone, validate_factorization,
    CertifyConfig, SolverConfig,
};
use esl_core::sampling::{random_povm, random_pr_strategy, random_unassisted_strategy, rng_from_seed};
use proptest::prelude::*;
use rand::Rng;

fn assert_row_stochastic(m: &ChannelMatrix) {
    for i in 0..m.rows() {
        let sum: f64 = m.row(i).iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12, "row {i} sums to {sum}");
        assert!(m.row(i).iter().all(|&v| v >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulated_seven_family_is_stochastic_and_exact(p in 0.0f64..=1.0) {
        let (v, s) = strategy_n7(p, None).unwrap();
        let sim = simulate_assisted(&v, &AssistedStrategy::Minimal(s)).unwrap();
        assert_row_stochastic(&sim);
        prop_assert!(sim.max_abs_diff(&matrix_m7(p).unwrap()) <= 1e-12);
    }

    #[test]
    fn rotation_invariance_over_seeds(p in 0.0f64..=1.0, seed in 0u64..1000) {
        let u = esl_core::tensor::haar_random_unitary(7, seed);
        let (v, s) = strategy_n7(p, Some(&u)).unwrap();
        let sim = simulate_assisted(&v, &AssistedStrategy::Minimal(s)).unwrap();
        prop_assert!(sim.max_abs_diff(&matrix_m7(p).unwrap()) <= 1e-12);
    }

    #[test]
    fn trace_fidelity_is_linear_under_mixing(w in 0.0f64..=1.0, p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let a = matrix_m7(p).unwrap();
        let b = matrix_m7(q).unwrap();
        let weights = [w, 1.0 - w];
        let mixed = mix(&[a.clone(), b.clone()], &weights).unwrap();
        let direct = trace_fidelity(&mixed).unwrap();
        let linear = w * trace_fidelity(&a).unwrap() + (1.0 - w) * trace_fidelity(&b).unwrap();
        prop_assert!((direct - linear).abs() <= 1e-12);
    }

    #[test]
    fn capacity_dominates_uniform_mutual_information(p in 0.0f64..=1.0) {
        let m = matrix_m7(p).unwrap();
        let c = capacity(&m, &CapacityOptions::default()).unwrap().bits;
        let mi = mutual_information(&m, &[1.0 / 7.0; 7]).unwrap();
        prop_assert!(c >= mi - 1e-9);
    }
}

#[test]
fn capacity_is_permutation_invariant() {
    let m = matrix_m7(0.7).unwrap();
    // relabel rows by a rotation and columns by a swap
    let perm_rows: Vec<usize> = (0..7).map(|i| (i + 3) % 7).collect();
    let perm_cols: Vec<usize> = (0..7).map(|j| 6 - j).collect();
    let permuted = ChannelMatrix::from_rows(
        (0..7)
            .map(|i| (0..7).map(|j| m.get(perm_rows[i], perm_cols[j])).collect())
            .collect(),
    )
    .unwrap();
    let a = capacity(&m, &CapacityOptions::default()).unwrap().bits;
    let b = capacity(&permuted, &CapacityOptions::default()).unwrap().bits;
    assert!((a - b).abs() <= 1e-9);
}

#[test]
fn monotone_is_sound_for_extracted_factorizations() {
    // every validated size-r factorization of a row-stochastic matrix
    // produced from a strategy must satisfy r ≥ max_monotone − 1e-6
    let mut rng = rng_from_seed(42);
    for _ in 0..50 {
        let r = rng.gen_range(2..=5);
        let n = rng.gen_range(2..=6);
        let encodings: Vec<_> = (0..n)
            .map(|_| esl_core::sampling::random_density_matrix(r, &mut rng))
            .collect();
        let povm = random_povm(r, rng.gen_range(2..=5), &mut rng);
        let relabel_rows = povm.outcomes();
        // random deterministic relabelling onto n outputs
        let relabel = ChannelMatrix::from_rows(
            (0..relabel_rows)
                .map(|_| {
                    let mut row = vec![0.0; n];
                    row[rng.gen_range(0..n)] = 1.0;
                    row
                })
                .collect(),
        )
        .unwrap();
        let f = factorization_from_strategy(&encodings, &povm, &relabel).unwrap();
        let realized = ChannelMatrix::from_rows(f.realized()).unwrap();
        let residual = validate_factorization(&realized, &f).unwrap();
        assert!(residual <= 1e-10);
        assert!(
            f.size() as f64 >= max_monotone(&realized) - 1e-6,
            "size {} vs monotone {}",
            f.size(),
            max_monotone(&realized)
        );
    }
}

#[test]
fn minimal_strategies_embed_into_one_way_assistance() {
    // the class inclusion: a minimal strategy reproduced with the receiver's
    // physical measurement fixed and only classical relabelling conditioned
    // on the environment outcome
    for &p in &[0.0, 0.35, 1.0] {
        let (v, s) = strategy_n7(p, None).unwrap();
        let direct = simulate_assisted(&v, &AssistedStrategy::Minimal(s.clone())).unwrap();
        let embedded = simulate_assisted(&v, &minimal_to_env_assisted(&s).unwrap()).unwrap();
        assert!(direct.max_abs_diff(&embedded) <= 1e-12);
    }
}

#[test]
fn random_minimal_strategies_embed_identically() {
    let mut rng = rng_from_seed(29);
    for idx in 0..30 {
        let n = 3 + idx % 4;
        let outputs = 2 + idx % 5;
        let (v, s) =
            esl_core::sampling::random_minimal_strategy(n, 5 + idx % 3, 3, 3, outputs, &mut rng);
        let direct = simulate_assisted(&v, &AssistedStrategy::Minimal(s.clone())).unwrap();
        assert_row_stochastic(&direct);
        let embedded = simulate_assisted(&v, &minimal_to_env_assisted(&s).unwrap()).unwrap();
        assert!(direct.max_abs_diff(&embedded) <= 1e-12, "strategy {idx}");
    }
}

#[test]
fn extracted_channel_factorizations_validate_across_receiver_dims() {
    // the receiver-dimension property at d_b other than 3
    let mut rng = rng_from_seed(31);
    for idx in 0..60 {
        let d_b = 2 + idx % 3;
        let d_e = 2 + (idx / 3) % 2;
        let n = 3 + idx % 3;
        let d_a = (d_b * d_e).min(4 + idx % 3);
        let s = random_unassisted_strategy(n, d_a, d_b, d_e, &mut rng);
        let m = unassisted_channel_matrix(&s.isometry, &s.encodings, &s.povm).unwrap();
        let f = esl_core::psdrank::factorization_from_channel(&s.isometry, &s.encodings, &s.povm)
            .unwrap();
        assert_eq!(f.size(), d_b);
        assert!(validate_factorization(&m, &f).unwrap() <= 1e-10);
        assert!(m.trace() <= d_b as f64 + 1e-9);
    }
}

#[test]
fn pr_box_equals_substitute_on_random_strategies() {
    let mut rng = rng_from_seed(7);
    for idx in 0..100 {
        let n = 4 + idx % 4;
        let s = random_pr_strategy(n, 7, 3, 3, &mut rng);
        let a = simulate_pr(&s).unwrap();
        let b = simulate_pr_via_sr_cbit(&s).unwrap();
        assert_row_stochastic(&a);
        assert!(a.max_abs_diff(&b) <= 1e-12);
    }
}

#[test]
fn unassisted_strategies_stay_stochastic_and_bounded() {
    let mut rng = rng_from_seed(13);
    for idx in 0..100 {
        let n = 3 + idx % 5;
        let s = random_unassisted_strategy(n, 5 + idx % 3, 3, 3, &mut rng);
        let m = unassisted_channel_matrix(&s.isometry, &s.encodings, &s.povm).unwrap();
        assert_row_stochastic(&m);
        assert!(m.trace() <= 3.0 + 1e-9);
    }
}

#[test]
fn general_family_unlocks_optimally() {
    let cfg = CertifyConfig::default();
    for d in [3usize, 4, 5] {
        let m = esl_core::constructions::matrix_general(d).unwrap();
        let cert = certify(&m, &auto_hints(&m), &cfg).unwrap();
        let verdict = assess_unlock(&cert, d * d - 1, d);
        assert_eq!(verdict.status, UnlockStatus::OptimalUnlock, "d = {d}");
        assert_eq!(verdict.certified_rank, d * d - 1);
    }
}

#[test]
fn seven_family_verdict_never_exceeds_optimal() {
    // minimal assistance on the seven-symbol channels certifies at most the
    // input dimension, in line with full-access environment bounds
    let cfg = CertifyConfig {
        solver: SolverConfig { restarts: 8, ..Default::default() },
        ..Default::default()
    };
    for &p in &[0.0, 0.5, 1.0] {
        let m = matrix_m7(p).unwrap();
        let cert = certify(&m, &auto_hints(&m), &cfg).unwrap();
        assert!(cert.lower_bound() <= cert.upper_bound);
        assert!(cert.upper_bound <= 7);
        let verdict = assess_unlock(&cert, 7, 3);
        assert!(matches!(
            verdict.status,
            UnlockStatus::Unlock | UnlockStatus::OptimalUnlock
        ));
        assert!(verdict.certified_rank <= 7);
    }
}
