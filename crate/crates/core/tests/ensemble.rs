mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use common::*;
use locc_bounds::ensemble::*;
use locc_bounds::linalg::{partial_trace, HermitianOp, SystemShape};
use proptest::prelude::*;

fn gram_residual(kets: &[locc_bounds::linalg::CVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in kets.iter().enumerate() {
        for (j, b) in kets.iter().enumerate() {
            let g = a.dotc(b);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - c(target, 0.0)).norm());
        }
    }
    worst
}

fn check_invariants(e: &StateEnsemble) {
    let sum: f64 = e.priors().iter().sum();
    assert!((sum - 1.0).abs() < 1e-12);
    for s in e.states() {
        assert_eq!(s.shape().dims(), &[e.d_a(), e.d_b()]);
        assert!((s.trace() - 1.0).abs() < 1e-10);
        assert!(s.min_eigenvalue() > -1e-10);
    }
}

#[test]
fn bell_family_at_quarter_half_half_is_maximally_entangled() {
    let e = bell_basis_family(FRAC_PI_4, FRAC_PI_2, FRAC_PI_2);
    for s in e.states() {
        assert!((tangle(s).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bell_family_at_tau_zero_is_product() {
    let e = bell_basis_family(FRAC_PI_4, 0.0, FRAC_PI_2);
    for s in e.states() {
        assert!(tangle(s).unwrap().abs() < 1e-12);
    }
}

#[test]
fn bell_family_psi2_tangle_at_third_pi() {
    let e = bell_basis_family(FRAC_PI_4, FRAC_PI_3, FRAC_PI_2);
    assert!((tangle(&e.states()[1]).unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn tangle_of_simple_states() {
    let phi = HermitianOp::projector(SystemShape::new(vec![2, 2]).unwrap(), &phi_plus()).unwrap();
    assert!((tangle(&phi).unwrap() - 1.0).abs() < 1e-12);
    let prod = ket(&[(0.6, 0.0), (0.0, 0.8)]).kronecker(&ket(&[(0.0, 1.0), (0.0, 0.0)]));
    let p = HermitianOp::projector(SystemShape::new(vec![2, 2]).unwrap(), &prod).unwrap();
    assert!(tangle(&p).unwrap().abs() < 1e-12);
    let mixed = HermitianOp::identity(SystemShape::new(vec![2, 2]).unwrap()).scale(0.25);
    assert!(matches!(tangle(&mixed), Err(EnsembleError::NotPure(_))));
}

#[test]
fn double_trine_overlaps() {
    let e = double_trine();
    check_invariants(&e);
    assert_eq!(e.priors(), &[1.0 / 3.0; 3]);
    let s = e.states();
    for i in 0..3 {
        assert!(tangle(&s[i]).unwrap().abs() < 1e-12);
        for j in 0..3 {
            if i != j {
                // ⟨s_i|s_j⟩ = -1/2, so |⟨ψ_i|ψ_j⟩|² = 1/16 = Tr(ρ_i ρ_j)
                assert!((s[i].inner(&s[j]) - 1.0 / 16.0).abs() < 1e-14);
            }
        }
    }
    let kets: Vec<_> = trine_kets().iter().map(|k| k.kronecker(k)).collect();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                assert!((kets[i].dotc(&kets[j]) - c(0.25, 0.0)).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn ququart_states_are_orthonormal_and_maximally_entangled() {
    let e = ququart_ensemble();
    check_invariants(&e);
    assert_eq!(e.priors(), &[1.0 / 3.0; 3]);
    assert!(gram_residual(&ququart_kets()) < 1e-14);
    let mixed = HermitianOp::identity(SystemShape::single(4)).scale(0.25);
    for s in e.states() {
        for side in [1, 2] {
            assert!(diff(&partial_trace(s, &[side]).unwrap(), &mixed) < 1e-14);
        }
    }
}

#[test]
fn save_load_round_trip() {
    let dir = std::env::temp_dir().join(format!("locc-ens-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trine.json");
    for e in [double_trine(), bell_basis_family(0.3, 1.1, 0.7)] {
        save_ensemble(&e, &path).unwrap();
        let back = load_ensemble(&path).unwrap();
        assert_eq!(back.d_a(), e.d_a());
        for (a, b) in back.states().iter().zip(e.states()) {
            assert!(diff(a, b) <= 1e-15);
        }
        for (a, b) in back.priors().iter().zip(e.priors()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn file_format_field_names() {
    let v: serde_json::Value = serde_json::from_str(&double_trine().to_json_string()).unwrap();
    assert_eq!(v["d_A"], 2);
    assert_eq!(v["d_B"], 2);
    assert_eq!(v["items"].as_array().unwrap().len(), 3);
    assert!(v["items"][0]["prior"].is_number());
    assert_eq!(v["items"][0]["state"][0][0].as_array().unwrap().len(), 2);
}

fn diag_state(entries: &[f64]) -> String {
    let rows: Vec<String> = (0..4)
        .map(|r| {
            let cells: Vec<String> =
                (0..4).map(|c| if r == c { format!("[{}, 0]", entries[r]) } else { "[0, 0]".into() }).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

#[test]
fn load_rejects_bad_priors_and_states() {
    let ok = diag_state(&[1.0, 0.0, 0.0, 0.0]);
    let bad_sum = format!(r#"{{"d_A": 2, "d_B": 2, "items": [{{"prior": 0.9, "state": {ok}}}]}}"#);
    let err = StateEnsemble::from_json_str(&bad_sum).unwrap_err();
    assert!(err.to_string().contains("priors do not sum to 1"), "{err}");

    let neg = diag_state(&[1.5, -0.5, 0.0, 0.0]);
    let bad_psd = format!(
        r#"{{"d_A": 2, "d_B": 2, "items": [{{"prior": 0.5, "state": {ok}}}, {{"prior": 0.5, "state": {neg}}}]}}"#
    );
    let err = StateEnsemble::from_json_str(&bad_psd).unwrap_err();
    assert!(matches!(err, EnsembleError::NotPsd { index: 1, .. }), "{err}");
    assert!(err.to_string().contains("state 1"));

    let zero = format!(
        r#"{{"d_A": 2, "d_B": 2, "items": [{{"prior": 1.0, "state": {ok}}}, {{"prior": 0.0, "state": {ok}}}]}}"#
    );
    assert!(matches!(StateEnsemble::from_json_str(&zero), Err(EnsembleError::NonPositivePrior { index: 1, .. })));
    assert!(matches!(StateEnsemble::from_json_str("{"), Err(EnsembleError::Parse(_))));
}

#[test]
fn swap_parties_properties() {
    let e = bell_basis_family(0.4, 1.2, 0.9);
    let s = e.swap_parties();
    let back = s.swap_parties();
    for (a, b) in back.states().iter().zip(e.states()) {
        assert!(diff(a, b) < 1e-15);
    }
    for (x, y) in s.states().iter().zip(e.states()) {
        assert!(diff(&partial_trace(x, &[2]).unwrap(), &partial_trace(y, &[1]).unwrap()) < 1e-14);
    }
    let q = ququart_ensemble();
    let qs = q.swap_parties();
    assert!(diff(&qs.states()[0], &q.states()[0]) < 1e-15);
    // explicit SWAP conjugation
    let u = swap_unitary(4);
    let conj = &u * q.states()[0].matrix() * u.adjoint();
    assert!(max_abs(&(conj - q.states()[0].matrix())) < 1e-15);
}

#[test]
fn swap_parties_exchanges_dimensions() {
    let kets = [ket(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)])];
    let e = StateEnsemble::from_kets(2, 3, vec![1.0], &kets).unwrap();
    let s = e.swap_parties();
    assert_eq!((s.d_a(), s.d_b()), (3, 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bell_family_is_orthonormal_with_closed_form_tangle(delta in 0.0..PI, tau in 0.0..PI, xi in 0.0..2.0 * PI) {
        prop_assert!(gram_residual(&bell_basis_kets(delta, tau, xi)) <= 1e-12);
        let e = bell_basis_family(delta, tau, xi);
        check_invariants(&e);
        for s in e.states() {
            prop_assert!((tangle(s).unwrap() - bell_family_tangle(delta, tau)).abs() <= 1e-12);
        }
    }
}
