//! Closed-form success probabilities and explicit strategies for the
//! Bell-basis family at `δ = π/4`, `ξ = π/2`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use crate::ensemble::{bell_basis_family, StateEnsemble};
use crate::hierarchy::Direction;
use crate::linalg::{bloch_observable, pauli_x, pauli_y, tensor, HermitianOp, SystemShape};
use crate::seesaw::{NonAdaptiveStrategy, OneRoundStrategy};

/// `(√2 cos τ + 2)/4`.
pub fn analytic_p_succ_ab(tau: f64) -> f64 {
    (SQRT_2 * tau.cos() + 2.0) / 4.0
}

/// `(1 + cos τ)/2`.
pub fn analytic_p_succ_ba(tau: f64) -> f64 {
    (1.0 + tau.cos()) / 2.0
}

fn reference(tau: f64) -> StateEnsemble {
    bell_basis_family(FRAC_PI_4, tau, FRAC_PI_2)
}

/// Projectors onto the positive and non-positive eigenspaces (outcomes `+`, `-`).
fn outcomes(obs: &HermitianOp) -> Vec<HermitianOp> {
    let (p, m) = obs.sign_projectors();
    vec![p, m]
}

/// Bob's fixed unit Bloch direction in the Alice-first strategy.
pub fn bob_direction_ab(tau: f64) -> [f64; 3] {
    let (s, c) = tau.sin_cos();
    let den = SQRT_2 * c + 2.0;
    [(2.0 * c + SQRT_2) * s / den, SQRT_2 * s / den, (2.0 * c + SQRT_2) * c / den]
}

/// Picks, for each outcome, the most likely state of `group` given `first`.
fn assign(e: &StateEnsemble, first: &HermitianOp, second: &[HermitianOp], group: &[usize]) -> Vec<usize> {
    second
        .iter()
        .map(|q| {
            let t = tensor(first, q);
            let mut best = group[0];
            let mut score = f64::NEG_INFINITY;
            for &l in group {
                let s = e.priors()[l] * t.inner(&e.states()[l]);
                if s > score + 1e-12 {
                    best = l;
                    score = s;
                }
            }
            best
        })
        .collect()
}

/// Alice measures `(σ_x + σ_y)/√2`; `+` points to `{ψ_2, ψ_3}`, `-` to
/// `{ψ_1, ψ_4}`; Bob's fixed measurement resolves the pair.
pub fn analytic_strategy_ab(tau: f64) -> NonAdaptiveStrategy {
    let e = reference(tau);
    let alice = outcomes(&pauli_x().add(&pauli_y()).unwrap().scale(1.0 / SQRT_2));
    let bob = outcomes(&bloch_observable(bob_direction_ab(tau)));
    let groups = [[1usize, 2], [0, 3]];
    let post = alice
        .iter()
        .zip(groups)
        .map(|(a, g)| {
            assign(&e, a, &bob, &g)
                .into_iter()
                .map(|l| {
                    let mut v = vec![0.0; 4];
                    v[l] = 1.0;
                    v
                })
                .collect()
        })
        .collect();
    NonAdaptiveStrategy { alice, bob, post, direction: Direction::AtoB }
}

/// Bob measures `sin τ σ_x + cos τ σ_z`; `+` points to `{ψ_3, ψ_4}`, `-` to
/// `{ψ_1, ψ_2}`; Alice resolves the pair with `σ_y` or `σ_x` respectively.
/// Expressed in the swapped frame, so `alice` holds Bob's measurement.
pub fn analytic_strategy_ba(tau: f64) -> OneRoundStrategy {
    let e = reference(tau).swap_parties();
    let (s, c) = tau.sin_cos();
    let first = outcomes(&bloch_observable([s, 0.0, c]));
    let plan = [(pauli_y(), [2usize, 3]), (pauli_x(), [0, 1])];
    let shape = SystemShape::single(2);
    let bob = first
        .iter()
        .zip(plan)
        .map(|(f, (obs, group))| {
            let second = outcomes(&obs);
            let mut povm = vec![HermitianOp::zeros(shape.clone()); 4];
            for (q, l) in second.iter().zip(assign(&e, f, &second, &group)) {
                povm[l] = povm[l].add(q).unwrap();
            }
            povm
        })
        .collect();
    OneRoundStrategy { alice: first, bob, direction: Direction::BtoA }
}

/// Conditional state of the second party given outcome `outcome` of the first:
/// `Tr_1[(F ⊗ 1) ρ]`, normalized when nonzero.
pub fn conditional_state(rho: &HermitianOp, first: &HermitianOp) -> HermitianOp {
    let d2 = rho.dim() / first.dim();
    let id = HermitianOp::identity(SystemShape::single(d2));
    let op = tensor(first, &id);
    let prod = HermitianOp::from_matrix_unchecked(rho.shape().clone(), op.matrix() * rho.matrix() * op.matrix());
    let r = crate::linalg::partial_trace(&prod, &[1]).unwrap();
    let t = r.trace();
    if t > 1e-15 {
        r.scale(1.0 / t)
    } else {
        r
    }
}
