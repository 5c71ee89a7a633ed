mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, SQRT_2};

use locc_bounds::certify::*;
use locc_bounds::ensemble::{bell_basis_family, double_trine, StateEnsemble};
use locc_bounds::hierarchy::{build_1r_sdp, build_na_sdp, Direction, HierarchyParams};
use locc_bounds::linalg::{tensor, HermitianOp, SystemShape};
use locc_bounds::seesaw::{random_povm, restart_rng, strategy_value, NonAdaptiveStrategy, OneRoundStrategy, Strategy};
use proptest::prelude::{prop_assert, proptest, ProptestConfig};
use rand::Rng;

fn bell(tau: f64) -> StateEnsemble {
    bell_basis_family(FRAC_PI_4, tau, FRAC_PI_2)
}

fn random_oneround(seed: u64, m: usize, n: usize) -> OneRoundStrategy {
    let mut rng = restart_rng(seed, 0);
    let alice = random_povm(2, m, &mut rng);
    let bob = (0..m).map(|_| random_povm(2, n, &mut rng)).collect();
    OneRoundStrategy { alice, bob, direction: Direction::AtoB }
}

fn random_nonadaptive(seed: u64, m: usize, m_b: usize, n: usize) -> NonAdaptiveStrategy {
    let mut rng = restart_rng(seed, 1);
    let alice = random_povm(2, m, &mut rng);
    let bob = random_povm(2, m_b, &mut rng);
    let post = (0..m)
        .map(|_| {
            (0..m_b)
                .map(|_| {
                    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
                    let s: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / s).collect()
                })
                .collect()
        })
        .collect();
    NonAdaptiveStrategy { alice, bob, post, direction: Direction::AtoB }
}

#[test]
fn forward_oneround_certificate_passes() {
    let e = double_trine();
    let s = random_oneround(11, 2, 3);
    for k in [1, 2] {
        let c = certificate_from_oneround(&s, k);
        let claimed = s.measurement();
        let r = check_1r_certificate(&c, Some(&claimed), Some(&e), 1e-10).unwrap();
        assert!(r.pass, "k={k}: {r:?}");
        let v = strategy_value(&e, &Strategy::OneRound(s.clone())).unwrap();
        assert!((r.value.unwrap() - v).abs() < 1e-12);
    }
}

#[test]
fn forward_nonadaptive_certificate_passes_and_contracts() {
    let e = double_trine();
    let s = random_nonadaptive(5, 2, 2, 3);
    for k in [1, 2] {
        let c = certificate_from_nonadaptive(&s, k);
        let r = check_na_certificate(&c, Some(&s.measurement()), Some(&e), 1e-10).unwrap();
        assert!(r.pass, "k={k}: {r:?}");
        let one = contract_na_to_1r(&c).unwrap();
        let r1 = check_1r_certificate(&one, Some(&s.measurement()), Some(&e), 1e-10).unwrap();
        assert!(r1.pass, "contracted k={k}: {r1:?}");
        assert!((r1.value.unwrap() - r.value.unwrap()).abs() < 1e-12);
    }
}

#[test]
fn wrong_variant_is_rejected() {
    let c = certificate_from_oneround(&random_oneround(1, 2, 3), 1);
    assert!(matches!(check_na_certificate(&c, None, None, 1e-8), Err(CertifyError::WrongVariant { .. })));
    assert!(matches!(contract_na_to_1r(&c), Err(CertifyError::WrongVariant { .. })));
}

#[test]
fn negated_block_fails_psd() {
    let mut c = certificate_from_oneround(&random_oneround(2, 2, 3), 2);
    let key = c.entries.keys().nth(3).unwrap().clone();
    let neg = c.entries[&key].scale(-1.0);
    c.entries.insert(key, neg);
    let r = check_1r_certificate(&c, None, None, 1e-8).unwrap();
    assert!(!r.pass);
    assert!(r.psd_min_eig < -1e-3);
}

#[test]
fn scaled_certificate_fails_normalization() {
    let mut c = certificate_from_nonadaptive(&random_nonadaptive(3, 2, 2, 3), 1);
    for r in c.entries.values_mut() {
        *r = r.scale(1.1);
    }
    let r = check_na_certificate(&c, None, None, 1e-8).unwrap();
    assert!(!r.pass);
    // rhs d_A^k d_B = 4 for k = 1
    assert!((r.normalization - 0.4).abs() < 1e-10, "{}", r.normalization);
    assert!(r.psd_min_eig >= -1e-12);
}

#[test]
fn solver_certificates_pass() {
    let e = double_trine();
    let p = HierarchyParams::new(2, 2, Direction::AtoB);
    let lp = build_1r_sdp(&e, &p).unwrap();
    let report = lp.program.solve(1e-7).unwrap();
    let c = certificate_from_solution(&lp, &report, Direction::AtoB);
    let claimed = c.assemble_measurement();
    let r = check_1r_certificate(&c, Some(&claimed), Some(&e), 1e-5).unwrap();
    assert!(r.pass, "{r:?}");
    assert!((r.value.unwrap() - report.primal_value).abs() < 1e-5);

    let lp = build_na_sdp(&e, &p).unwrap();
    let report = lp.program.solve(1e-7).unwrap();
    let c = certificate_from_solution(&lp, &report, Direction::AtoB);
    let r = check_na_certificate(&c, None, Some(&e), 1e-5).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(check_1r_certificate(&contract_na_to_1r(&c).unwrap(), None, Some(&e), 1e-5).unwrap().pass);
}

#[test]
fn solver_certificate_for_swapped_direction() {
    let e = bell(FRAC_PI_3);
    let lp = build_1r_sdp(&e, &HierarchyParams::new(2, 1, Direction::BtoA)).unwrap();
    let report = lp.program.solve(1e-7).unwrap();
    let c = certificate_from_solution(&lp, &report, Direction::BtoA);
    let r = check_1r_certificate(&c, None, Some(&e), 1e-5).unwrap();
    assert!(r.pass, "{r:?}");
    assert!((r.value.unwrap() - 0.75).abs() < 1e-4);
}

#[test]
fn json_round_trip_and_missing_entries() {
    let c = certificate_from_nonadaptive(&random_nonadaptive(9, 2, 2, 3), 2);
    let back = CertificateArray::from_json_str(&c.to_json_string()).unwrap();
    assert_eq!(back.entries.len(), c.entries.len());
    for (k, v) in &c.entries {
        assert!(common::diff(v, &back.entries[k]) <= 1e-15);
    }
    let mut partial = back.clone();
    let key = partial.entries.keys().last().unwrap().clone();
    partial.entries.remove(&key);
    assert!(matches!(check_na_certificate(&partial, None, None, 1e-8), Err(CertifyError::Incomplete(_))));
    assert!(matches!(CertificateArray::from_json_str("{}"), Err(CertifyError::Schema(_))));
}

#[test]
fn analytic_closed_forms() {
    assert!((analytic_p_succ_ab(FRAC_PI_2) - 0.5).abs() < 1e-15);
    assert!((analytic_p_succ_ba(0.0) - 1.0).abs() < 1e-15);
    assert!((analytic_p_succ_ba(FRAC_PI_3) - 0.75).abs() < 1e-15);
    let v = strategy_value(&bell(FRAC_PI_4), &Strategy::OneRound(analytic_strategy_ba(FRAC_PI_4))).unwrap();
    assert!((v - (1.0 + SQRT_2 / 2.0) / 2.0).abs() < 1e-9);
    let v = strategy_value(&bell(FRAC_PI_2), &Strategy::NonAdaptive(analytic_strategy_ab(FRAC_PI_2))).unwrap();
    assert!((v - 0.5).abs() < 1e-9);
}

#[test]
fn analytic_strategies_on_tau_grid() {
    for i in 0..64 {
        let tau = PI * i as f64 / 63.0;
        let e = bell(tau);
        let ab = strategy_value(&e, &Strategy::NonAdaptive(analytic_strategy_ab(tau))).unwrap();
        let ba = strategy_value(&e, &Strategy::OneRound(analytic_strategy_ba(tau))).unwrap();
        assert!((ab - analytic_p_succ_ab(tau)).abs() <= 1e-9, "AB at {tau}: {ab}");
        assert!((ba - analytic_p_succ_ba(tau)).abs() <= 1e-9, "BA at {tau}: {ba}");
    }
}

#[test]
fn a_to_b_outcome_probabilities() {
    let alice = analytic_strategy_ab(0.0).alice;
    let id = HermitianOp::identity(SystemShape::single(2));
    for tau in [0.3, 1.0, 2.2] {
        let e = bell(tau);
        let hi = (SQRT_2 * tau.cos() + 2.0) / 4.0;
        let lo = (-SQRT_2 * tau.cos() + 2.0) / 4.0;
        let p = |a: usize, l: usize| tensor(&alice[a], &id).inner(&e.states()[l]);
        // pair probabilities for {ψ_2, ψ_3} and {ψ_1, ψ_4}
        let plus_23 = (p(0, 1) + p(0, 2)) / 2.0;
        let plus_14 = (p(0, 0) + p(0, 3)) / 2.0;
        assert!((plus_23 - hi).abs() < 1e-12, "tau {tau}: {plus_23} vs {hi}");
        assert!((plus_14 - lo).abs() < 1e-12);
        assert!(((p(1, 0) + p(1, 3)) / 2.0 - hi).abs() < 1e-12);
        assert!(((p(1, 1) + p(1, 2)) / 2.0 - lo).abs() < 1e-12);
    }
}

fn overlap(a: &HermitianOp, b: &HermitianOp) -> f64 {
    a.inner(b).abs()
}

#[test]
fn post_measurement_states_are_orthogonal() {
    for tau in [0.2, FRAC_PI_4, 1.3, 2.5] {
        // Bob first: conditional states of Alice in the swapped frame
        let sw = bell(tau).swap_parties();
        for f in &analytic_strategy_ba(tau).alice {
            let s: Vec<HermitianOp> = sw.states().iter().map(|r| conditional_state(r, f)).collect();
            assert!(overlap(&s[0], &s[1]) <= 1e-12, "tau {tau}");
            assert!(overlap(&s[2], &s[3]) <= 1e-12, "tau {tau}");
        }
        // Alice first: conditional states of Bob
        let e = bell(tau);
        for f in &analytic_strategy_ab(tau).alice {
            let s: Vec<HermitianOp> = e.states().iter().map(|r| conditional_state(r, f)).collect();
            assert!(overlap(&s[0], &s[3]) <= 1e-12, "tau {tau}");
            assert!(overlap(&s[1], &s[2]) <= 1e-12, "tau {tau}");
        }
    }
}

#[test]
fn second_stage_povms_are_complete() {
    let s = analytic_strategy_ba(0.7);
    let id = HermitianOp::identity(SystemShape::single(2));
    for povm in &s.bob {
        let total = povm.iter().fold(HermitianOp::zeros(SystemShape::single(2)), |a, b| a.add(b).unwrap());
        assert!(common::diff(&total, &id) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn forward_certificates_pass_for_random_strategies(seed in 0u64..10_000, k in 1usize..=2) {
        let e = double_trine();
        let s = random_oneround(seed, 2, 3);
        let r = check_1r_certificate(&certificate_from_oneround(&s, k), Some(&s.measurement()), Some(&e), 1e-10).unwrap();
        prop_assert!(r.pass, "{:?}", r);
        let na = random_nonadaptive(seed, 2, 2, 3);
        let r = check_na_certificate(&certificate_from_nonadaptive(&na, k), Some(&na.measurement()), Some(&e), 1e-10).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn check_is_monotone_in_tol(seed in 0u64..10_000, scale in 0.9f64..1.1, t in 1e-12f64..1e-1) {
        let mut c = certificate_from_oneround(&random_oneround(seed, 2, 2), 1);
        for r in c.entries.values_mut() {
            *r = r.scale(scale);
        }
        let r = check_1r_certificate(&c, None, None, t).unwrap();
        for bigger in [t * 2.0, t * 10.0, 1.0] {
            prop_assert!(!r.pass || r.at_tol(bigger).pass);
        }
    }
}
