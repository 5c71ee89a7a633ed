mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

use common::*;
use locc_bounds::analytic::{analytic_p_succ_ba, analytic_strategy_ab, analytic_strategy_ba};
use locc_bounds::ensemble::{bell_basis_family, double_trine, ququart_ensemble, StateEnsemble};
use locc_bounds::hierarchy::{BoundKind, Direction};
use locc_bounds::linalg::{basis_ket, is_povm, partial_trace, HermitianOp, SystemShape};
use locc_bounds::seesaw::{Strategy, *};
use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

fn proj(d: usize, i: usize) -> HermitianOp {
    HermitianOp::projector(SystemShape::single(d), &basis_ket(d, i)).unwrap()
}

fn comp_basis(d: usize) -> Vec<HermitianOp> {
    (0..d).map(|i| proj(d, i)).collect()
}

fn opts(restarts: usize, seed: u64) -> SeesawOptions {
    SeesawOptions { restarts, seed, ..SeesawOptions::default() }
}

/// Helstrom value `(1 + ‖p_0 ρ_0 - p_1 ρ_1‖_1)/2`.
fn helstrom(p0: f64, r0: &HermitianOp, p1: f64, r1: &HermitianOp) -> f64 {
    let d = r0.scale(p0).sub(&r1.scale(p1)).unwrap();
    0.5 * (1.0 + d.eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
}

fn two_state_ensemble() -> StateEnsemble {
    // |00⟩ and (|0⟩+|1⟩)/√2 ⊗ |0⟩, priors 0.6 / 0.4
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = basis_ket(4, 0);
    let b = ket(&[(s, 0.0), (0.0, 0.0), (s, 0.0), (0.0, 0.0)]);
    StateEnsemble::from_kets(2, 2, vec![0.6, 0.4], &[a, b]).unwrap()
}

#[test]
fn ququart_computational_basis_strategy_is_perfect() {
    let e = ququart_ensemble();
    let (bob, v) = optimal_bob_given_alice(&e, &comp_basis(4), 1e-8).unwrap();
    assert!((v - 1.0).abs() < 1e-6);
    let s = OneRoundStrategy { alice: comp_basis(4), bob, direction: Direction::AtoB };
    assert!((strategy_value(&e, &Strategy::OneRound(s)).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn analytic_strategies_reach_closed_forms() {
    let e = bell_basis_family(FRAC_PI_4, FRAC_PI_3, FRAC_PI_2);
    let v = strategy_value(&e, &Strategy::OneRound(analytic_strategy_ba(FRAC_PI_3))).unwrap();
    assert!((v - 0.75).abs() < 1e-9);
    let e0 = bell_basis_family(FRAC_PI_4, 0.0, FRAC_PI_2);
    let v = strategy_value(&e0, &Strategy::NonAdaptive(analytic_strategy_ab(0.0))).unwrap();
    assert!((v - (2f64.sqrt() + 2.0) / 4.0).abs() < 1e-9);
}

#[test]
fn trivial_alice_reduces_to_helstrom_on_bob_marginals() {
    let e = two_state_ensemble();
    let id = HermitianOp::identity(SystemShape::single(2));
    let (bob, v) = optimal_bob_given_alice(&e, &[id], 1e-9).unwrap();
    let mb: Vec<HermitianOp> = e.states().iter().map(|s| partial_trace(s, &[1]).unwrap()).collect();
    let oracle = helstrom(0.6, &mb[0], 0.4, &mb[1]);
    assert!((v - oracle).abs() < 1e-6, "{v} vs {oracle}");
    assert!(is_povm(&bob[0], 1e-9).unwrap());
}

#[test]
fn identical_bob_maps_give_induced_helstrom() {
    // Bob guesses by measuring in the computational basis, the same for every message;
    // the induced problem for Alice is a Helstrom problem on K-operators built by hand
    let e = two_state_ensemble();
    let bob_povm = vec![proj(2, 0), proj(2, 1)];
    let bob = vec![bob_povm.clone(), bob_povm];
    let (alice, v) = optimal_alice_given_bob(&e, &bob, 1e-9).unwrap();
    assert!(is_povm(&alice, 1e-9).unwrap());
    // both states have Bob in |0⟩, so Bob's outcome 0 always fires and guesses λ=1:
    // K^a = p_1 Tr_B[(1 ⊗ |0⟩⟨0|) ρ_1] for the message a; Alice can only report the total
    let k0 = partial_trace(&e.states()[0], &[2]).unwrap().scale(0.6);
    assert!((v - k0.trace()).abs() < 1e-6);
}

#[test]
fn optimal_alice_recovers_b_to_a_value() {
    let tau = FRAC_PI_4;
    let e = bell_basis_family(FRAC_PI_4, tau, FRAC_PI_2).swap_parties();
    let s = analytic_strategy_ba(tau);
    let (alice, v) = optimal_alice_given_bob(&e, &s.bob, 1e-9).unwrap();
    assert!(is_povm(&alice, 1e-9).unwrap());
    assert!(v >= analytic_p_succ_ba(tau) - 2e-6);
}

#[test]
fn orthogonal_product_states_are_perfectly_discriminated() {
    let e = StateEnsemble::from_kets(2, 2, vec![0.5, 0.5], &[basis_ket(4, 0), basis_ket(4, 3)]).unwrap();
    let run = seesaw_nonadaptive(&e, 2, &SeesawOptions { m_b: Some(2), ..opts(3, 1) }).unwrap();
    assert!((run.result.value - 1.0).abs() < 1e-6);
}

#[test]
fn single_message_seesaw_is_bob_only_helstrom() {
    let e = two_state_ensemble();
    let run = seesaw_oneround(&e, 1, &opts(2, 0)).unwrap();
    let mb: Vec<HermitianOp> = e.states().iter().map(|s| partial_trace(s, &[1]).unwrap()).collect();
    assert!((run.result.value - helstrom(0.6, &mb[0], 0.4, &mb[1])).abs() < 1e-6);
}

#[test]
fn ququart_m4_seesaw_reaches_one() {
    let run = seesaw_oneround(&ququart_ensemble(), 4, &opts(1, 0)).unwrap();
    assert!(run.result.value >= 1.0 - 1e-6);
    assert_eq!(run.result.kind, BoundKind::Lower);
}

#[test]
fn trine_seesaw_is_deterministic_and_consistent() {
    let e = double_trine();
    let a = seesaw_oneround(&e, 2, &opts(5, 0)).unwrap();
    let b = seesaw_oneround(&e, 2, &opts(5, 0)).unwrap();
    assert!((a.result.value - b.result.value).abs() <= 1e-12);
    let s = Strategy::OneRound(a.strategy.clone());
    assert!((strategy_value(&e, &s).unwrap() - a.result.value).abs() <= 1e-9);
    a.strategy.validate(&e).unwrap();
    for w in a.history.windows(2) {
        assert!(w[1] >= w[0] - 2e-6, "history decreased: {:?}", a.history);
    }
}

#[test]
fn nonadaptive_seesaw_is_consistent() {
    let e = double_trine();
    let run = seesaw_nonadaptive(&e, 2, &opts(5, 3)).unwrap();
    run.strategy.validate(&e).unwrap();
    let v = strategy_value(&e, &Strategy::NonAdaptive(run.strategy.clone())).unwrap();
    assert!((v - run.result.value).abs() <= 1e-9);
    for row in run.strategy.post.iter().flatten() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(row.iter().all(|&p| p >= 0.0));
    }
    for w in run.history.windows(2) {
        assert!(w[1] >= w[0] - 2e-6);
    }
}

#[test]
fn injected_seeds_find_bell_curves() {
    let tau = 0.7;
    let e = bell_basis_family(FRAC_PI_4, tau, FRAC_PI_2);
    let ba = seesaw_oneround(&e, 2, &SeesawOptions { direction: Direction::BtoA, ..opts(0, 0) }).unwrap();
    assert!(ba.result.value >= analytic_p_succ_ba(tau) - 1e-6);
    assert!(detect_bell_parameters(&e).is_some());
    assert!(detect_bell_parameters(&double_trine()).is_none());
}

#[test]
fn strategy_file_round_trip() {
    let s = Strategy::NonAdaptive(analytic_strategy_ab(0.5));
    let json = serde_json::to_string(&StrategyFile::from_strategy(&s)).unwrap();
    let back = serde_json::from_str::<StrategyFile>(&json).unwrap().into_strategy().unwrap();
    let e = bell_basis_family(FRAC_PI_4, 0.5, FRAC_PI_2);
    assert!((strategy_value(&e, &back).unwrap() - strategy_value(&e, &s).unwrap()).abs() < 1e-14);
}

#[test]
fn strategy_value_rejects_mismatched_dimensions() {
    let s = OneRoundStrategy { alice: comp_basis(3), bob: vec![comp_basis(2); 3], direction: Direction::AtoB };
    assert!(matches!(strategy_value(&double_trine(), &Strategy::OneRound(s)), Err(SeesawError::Dimension(_))));
}

#[test]
fn single_outcome_povm_is_identity() {
    let mut rng = restart_rng(7, 0);
    let p = random_povm(3, 1, &mut rng);
    assert_eq!(p.len(), 1);
    assert!(diff(&p[0], &HermitianOp::identity(SystemShape::single(3))) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_povms_are_valid_and_reproducible(d in 1usize..=4, outcomes in 1usize..=6, seed in any::<u64>()) {
        let p = random_povm(d, outcomes, &mut restart_rng(seed, 3));
        prop_assert_eq!(p.len(), outcomes);
        prop_assert!(is_povm(&p, 1e-12).unwrap());
        let q = random_povm(d, outcomes, &mut restart_rng(seed, 3));
        for (a, b) in p.iter().zip(&q) {
            prop_assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn optimal_bob_beats_any_other_bob(seed in 0u64..1000) {
        let e = double_trine();
        let mut rng = restart_rng(seed, 0);
        let alice = random_povm(2, 2, &mut rng);
        let (best, v) = optimal_bob_given_alice(&e, &alice, 1e-9).unwrap();
        for b in &best {
            prop_assert!(is_povm(b, 1e-9).unwrap());
        }
        let other: Vec<Vec<HermitianOp>> = (0..2).map(|_| random_povm(2, 3, &mut rng)).collect();
        let s = Strategy::OneRound(OneRoundStrategy { alice, bob: other, direction: Direction::AtoB });
        prop_assert!(strategy_value(&e, &s).unwrap() <= v + 2e-6);
    }
}
