//! Explicit strategies and see-saw lower bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{ConicError, ConicProgram, EntryRef, Field, SolveStatus};
use crate::ensemble::{bell_basis_family, StateEnsemble};
use crate::hierarchy::{trace_functional, BoundKind, BoundResult, Direction, HierarchyParams, Method};
use crate::linalg::{basis_ket, is_povm, partial_trace, tensor, C64, CMatrix, HermitianOp, SystemShape};

#[derive(Debug, Error)]
pub enum SeesawError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid strategy: {0}")]
    Invalid(String),
    #[error("discrimination subproblem for outcome {index} failed: {reason}")]
    Subproblem { index: usize, reason: String },
    #[error(transparent)]
    Conic(#[from] ConicError),
}

/// Alice measures `{A^a}` and sends `a`; Bob measures `{B^{λ|a}}` and guesses `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneRoundStrategy {
    pub alice: Vec<HermitianOp>,
    pub bob: Vec<Vec<HermitianOp>>,
    /// `BtoA`: the strategy acts on the swapped ensemble, so `alice` is the physical second party.
    pub direction: Direction,
}

/// Both parties measure once; the guess is `post[a][b]`, a distribution over `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonAdaptiveStrategy {
    pub alice: Vec<HermitianOp>,
    pub bob: Vec<HermitianOp>,
    pub post: Vec<Vec<Vec<f64>>>,
    pub direction: Direction,
}

#[derive(Clone, Debug)]
pub enum Strategy {
    OneRound(OneRoundStrategy),
    NonAdaptive(NonAdaptiveStrategy),
}

fn check_povm(ops: &[HermitianOp], d: usize, what: &str) -> Result<(), SeesawError> {
    if ops.iter().any(|o| o.dim() != d) {
        return Err(SeesawError::Dimension(format!("{what} elements must have dimension {d}")));
    }
    if !is_povm(ops, 1e-9).map_err(|e| SeesawError::Invalid(e.to_string()))? {
        return Err(SeesawError::Invalid(format!("{what} is not a POVM")));
    }
    Ok(())
}

impl OneRoundStrategy {
    pub fn validate(&self, e: &StateEnsemble) -> Result<(), SeesawError> {
        let e = self.direction.orient(e);
        check_povm(&self.alice, e.d_a(), "alice")?;
        if self.bob.len() != self.alice.len() {
            return Err(SeesawError::Invalid("one Bob POVM per message required".into()));
        }
        for (a, b) in self.bob.iter().enumerate() {
            if b.len() != e.len() {
                return Err(SeesawError::Invalid(format!("bob[{a}] needs {} outcomes", e.len())));
            }
            check_povm(b, e.d_b(), &format!("bob[{a}]"))?;
        }
        Ok(())
    }

    /// `M^λ = Σ_a A^a ⊗ B^{λ|a}` in the oriented frame.
    pub fn measurement(&self) -> Vec<HermitianOp> {
        let n = self.bob.first().map_or(0, |b| b.len());
        (0..n)
            .map(|l| {
                let mut acc: Option<HermitianOp> = None;
                for (a, alice) in self.alice.iter().enumerate() {
                    let t = tensor(alice, &self.bob[a][l]);
                    acc = Some(match acc {
                        None => t,
                        Some(x) => x.add(&t).unwrap(),
                    });
                }
                acc.unwrap()
            })
            .collect()
    }
}

impl NonAdaptiveStrategy {
    pub fn validate(&self, e: &StateEnsemble) -> Result<(), SeesawError> {
        let e = self.direction.orient(e);
        check_povm(&self.alice, e.d_a(), "alice")?;
        check_povm(&self.bob, e.d_b(), "bob")?;
        if self.post.len() != self.alice.len() || self.post.iter().any(|r| r.len() != self.bob.len()) {
            return Err(SeesawError::Invalid("post must be indexed by (a, b)".into()));
        }
        for p in self.post.iter().flatten() {
            if p.len() != e.len() || p.iter().any(|&x| x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(SeesawError::Invalid("post entries must be probability vectors over λ".into()));
            }
        }
        Ok(())
    }

    /// `M^λ = Σ_{a,b} p(λ|a,b) A^a ⊗ B^b` in the oriented frame.
    pub fn measurement(&self) -> Vec<HermitianOp> {
        let n = self.post.first().and_then(|r| r.first()).map_or(0, |p| p.len());
        let da = self.alice[0].dim();
        let db = self.bob[0].dim();
        let shape = SystemShape::new(vec![da, db]).unwrap();
        let mut out = vec![HermitianOp::zeros(shape); n];
        for (a, alice) in self.alice.iter().enumerate() {
            for (b, bob) in self.bob.iter().enumerate() {
                let t = tensor(alice, bob);
                for (l, m) in out.iter_mut().enumerate() {
                    let w = self.post[a][b][l];
                    if w != 0.0 {
                        *m = m.add(&t.scale(w)).unwrap();
                    }
                }
            }
        }
        out
    }

    /// Parent POVM `S^{b⃗}` on Bob's side: `S^{b⃗} = Σ_b Π_a p(b_a|a,b) B^b`.
    pub fn parent_povm(&self) -> Vec<(Vec<usize>, HermitianOp)> {
        let m = self.alice.len();
        let n = self.post[0][0].len();
        crate::hierarchy::index_tuples(n, m)
            .into_iter()
            .map(|bv| {
                let mut acc = HermitianOp::zeros(self.bob[0].shape().clone());
                for (b, bob) in self.bob.iter().enumerate() {
                    let w: f64 = (0..m).map(|a| self.post[a][b][bv[a]]).product();
                    if w != 0.0 {
                        acc = acc.add(&bob.scale(w)).unwrap();
                    }
                }
                (bv, acc)
            })
            .collect()
    }
}

fn value_of(e: &StateEnsemble, ms: &[HermitianOp]) -> f64 {
    e.priors().iter().zip(e.states()).zip(ms).map(|((p, rho), m)| p * m.inner(rho)).sum()
}

/// Success probability `Σ_λ p_λ Tr(M^λ ρ_λ)` of a strategy.
pub fn strategy_value(e: &StateEnsemble, s: &Strategy) -> Result<f64, SeesawError> {
    match s {
        Strategy::OneRound(s) => {
            let o = s.direction.orient(e);
            if s.alice.iter().any(|a| a.dim() != o.d_a()) || s.bob.iter().flatten().any(|b| b.dim() != o.d_b()) {
                return Err(SeesawError::Dimension("strategy does not match ensemble".into()));
            }
            if s.bob.iter().any(|b| b.len() != o.len()) {
                return Err(SeesawError::Dimension("bob outcome count differs from ensemble size".into()));
            }
            Ok(value_of(&o, &s.measurement()))
        }
        Strategy::NonAdaptive(s) => {
            let o = s.direction.orient(e);
            if s.alice.iter().any(|a| a.dim() != o.d_a()) || s.bob.iter().any(|b| b.dim() != o.d_b()) {
                return Err(SeesawError::Dimension("strategy does not match ensemble".into()));
            }
            if s.post.iter().flatten().any(|p| p.len() != o.len()) {
                return Err(SeesawError::Dimension("post length differs from ensemble size".into()));
            }
            Ok(value_of(&o, &s.measurement()))
        }
    }
}

/// Maximizes `Σ_i Tr(E_i Q_i)` over POVMs `{E_i}`; the result is projected
/// onto an exact POVM and its value recomputed.
pub fn optimal_povm(ops: &[HermitianOp], eps: f64) -> Result<(Vec<HermitianOp>, f64), SeesawError> {
    let first = ops.first().ok_or_else(|| SeesawError::Invalid("no operators".into()))?;
    let shape = SystemShape::single(first.dim());
    let d = first.dim();
    if ops.len() == 1 {
        let id = HermitianOp::identity(shape);
        let v = id.inner(first);
        return Ok((vec![id], v));
    }
    let field = if ops.iter().all(|o| o.is_real(1e-14)) { Field::Real } else { Field::Complex };
    let mut p = ConicProgram::new();
    let blocks = (0..ops.len())
        .map(|i| p.add_structured_block(&format!("E[{i}]"), shape.clone(), field, &[]))
        .collect::<Result<Vec<_>, _>>()?;
    for r in 0..d {
        for c in r..d {
            let re: Vec<_> = blocks.iter().map(|&b| (EntryRef::re(b, r, c), 1.0)).collect();
            p.add_equality(&re, if r == c { 1.0 } else { 0.0 })?;
            if r != c && field == Field::Complex {
                let im: Vec<_> = blocks.iter().map(|&b| (EntryRef::im(b, r, c), 1.0)).collect();
                p.add_equality(&im, 0.0)?;
            }
        }
    }
    let scale = ops.iter().map(|o| o.norm_inf()).fold(0.0, f64::max).max(1e-300);
    for (b, q) in blocks.iter().zip(ops) {
        let q = q.clone().with_shape(shape.clone()).map_err(|e| SeesawError::Dimension(e.to_string()))?;
        p.add_objective(&trace_functional(*b, &q, 1.0 / scale, field))?;
    }
    let rep = p.solve(eps)?;
    if rep.status == SolveStatus::Infeasible {
        return Err(SeesawError::Subproblem { index: 0, reason: "infeasible".into() });
    }
    let raw: Vec<HermitianOp> = blocks.iter().map(|&b| p.block_value(&rep, b).unwrap()).collect();
    let povm = normalize_povm(&raw);
    let value = povm.iter().zip(ops).map(|(e, q)| e.inner(q)).sum();
    Ok((povm, value))
}

/// Clips to PSD and renormalizes `E_i ↦ G^{-1/2} E_i G^{-1/2}`.
pub fn normalize_povm(raw: &[HermitianOp]) -> Vec<HermitianOp> {
    let clipped: Vec<HermitianOp> = raw.iter().map(|x| x.psd_part()).collect();
    let mut g = clipped[0].clone();
    for x in &clipped[1..] {
        g = g.add(x).unwrap();
    }
    let w = g.spectral_map(|v| if v > 1e-14 { 1.0 / v.sqrt() } else { 0.0 });
    clipped
        .iter()
        .map(|x| HermitianOp::from_matrix_unchecked(x.shape().clone(), w.matrix() * x.matrix() * w.matrix()))
        .collect()
}

/// `Tr_A[(A ⊗ 1) X]` for `X` on `[d_A, d_B]`.
fn reduce_b(x: &HermitianOp, alice: &HermitianOp, d_b: usize) -> HermitianOp {
    let id = HermitianOp::identity(SystemShape::single(d_b));
    let op = tensor(alice, &id);
    let prod = HermitianOp::from_matrix_unchecked(x.shape().clone(), op.matrix() * x.matrix());
    let half = partial_trace(&prod, &[1]).unwrap();
    HermitianOp::from_matrix_unchecked(half.shape().clone(), half.matrix().clone())
}

/// `Tr_B[(1 ⊗ B) X]`.
fn reduce_a(x: &HermitianOp, bob: &HermitianOp, d_a: usize) -> HermitianOp {
    let id = HermitianOp::identity(SystemShape::single(d_a));
    let op = tensor(&id, bob);
    let prod = HermitianOp::from_matrix_unchecked(x.shape().clone(), op.matrix() * x.matrix());
    partial_trace(&prod, &[2]).unwrap()
}

/// Best adaptive Bob for fixed Alice, in the oriented frame of `e`.
pub fn optimal_bob_given_alice(
    e: &StateEnsemble,
    alice: &[HermitianOp],
    eps: f64,
) -> Result<(Vec<Vec<HermitianOp>>, f64), SeesawError> {
    let mut bob = Vec::with_capacity(alice.len());
    let mut total = 0.0;
    for (a, aa) in alice.iter().enumerate() {
        if aa.dim() != e.d_a() {
            return Err(SeesawError::Dimension(format!("alice[{a}] has dimension {}", aa.dim())));
        }
        let g: Vec<HermitianOp> =
            e.states().iter().zip(e.priors()).map(|(rho, &p)| reduce_b(rho, aa, e.d_b()).scale(p)).collect();
        let (povm, v) = optimal_povm(&g, eps).map_err(|err| SeesawError::Subproblem { index: a, reason: err.to_string() })?;
        bob.push(povm);
        total += v;
    }
    Ok((bob, total))
}

/// Best Alice for a fixed adaptive Bob map, in the oriented frame of `e`.
pub fn optimal_alice_given_bob(
    e: &StateEnsemble,
    bob: &[Vec<HermitianOp>],
    eps: f64,
) -> Result<(Vec<HermitianOp>, f64), SeesawError> {
    let k: Vec<HermitianOp> = bob
        .iter()
        .map(|ba| {
            let mut acc = HermitianOp::zeros(SystemShape::single(e.d_a()));
            for (l, (rho, &p)) in e.states().iter().zip(e.priors()).enumerate() {
                acc = acc.add(&reduce_a(rho, &ba[l], e.d_a()).scale(p)).unwrap();
            }
            acc
        })
        .collect();
    optimal_povm(&k, eps)
}

/// Random POVM with `outcomes` elements from isotropic complex Gaussian
/// vectors, normalized by `G^{-1/2}`. Fewer outcomes than the dimension use
/// rank `⌈d/outcomes⌉` elements so that `G` is invertible.
pub fn random_povm(d: usize, outcomes: usize, rng: &mut ChaCha8Rng) -> Vec<HermitianOp> {
    let shape = SystemShape::single(d);
    let rank = d.div_ceil(outcomes.max(1));
    for _ in 0..16 {
        let xs: Vec<HermitianOp> = (0..outcomes)
            .map(|_| {
                let w = CMatrix::from_fn(d, rank, |_, _| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im)
                });
                HermitianOp::from_matrix_unchecked(shape.clone(), &w * w.adjoint())
            })
            .collect();
        let mut g = xs[0].clone();
        for x in &xs[1..] {
            g = g.add(x).unwrap();
        }
        if g.min_eigenvalue() > 1e-10 * g.norm_op() {
            let w = g.spectral_map(|v| 1.0 / v.sqrt());
            return xs
                .iter()
                .map(|x| HermitianOp::from_matrix_unchecked(shape.clone(), w.matrix() * x.matrix() * w.matrix()))
                .collect();
        }
    }
    // deterministic fallback: identity in the first element
    let mut out = vec![HermitianOp::zeros(shape.clone()); outcomes.max(1)];
    out[0] = HermitianOp::identity(shape);
    out
}

/// Restart `r` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

#[derive(Clone, Debug)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub conv_tol: f64,
    pub seed: u64,
    pub direction: Direction,
    /// Bob's outcome count for non-adaptive runs; defaults to `d_B²`.
    pub m_b: Option<usize>,
    /// Adds the built-in deterministic starting points.
    pub inject_seeds: bool,
    pub eps: f64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iters: 200,
            conv_tol: 1e-8,
            seed: 0,
            direction: Direction::AtoB,
            m_b: None,
            inject_seeds: true,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawRun<S> {
    pub result: BoundResult,
    pub strategy: S,
    /// Objective after each iteration of the winning restart.
    pub history: Vec<f64>,
    pub restarts_run: usize,
    pub restarts_failed: usize,
}

fn projector(v: &crate::linalg::CVector) -> HermitianOp {
    let n = v.norm();
    HermitianOp::projector(SystemShape::single(v.len()), &v.unscale(n)).unwrap()
}

/// Coarse-grains a projective measurement into `m` outcomes by index modulo `m`.
fn coarse_grain(ops: Vec<HermitianOp>, m: usize) -> Vec<HermitianOp> {
    let shape = ops[0].shape().clone();
    let mut out = vec![HermitianOp::zeros(shape); m];
    for (i, o) in ops.into_iter().enumerate() {
        out[i % m] = out[i % m].add(&o).unwrap();
    }
    out
}

fn computational_basis(d: usize) -> Vec<HermitianOp> {
    (0..d).map(|i| projector(&basis_ket(d, i))).collect()
}

/// Recovers `(δ, τ, ξ)` if `e` is a member of the Bell-basis family.
pub fn detect_bell_parameters(e: &StateEnsemble) -> Option<(f64, f64, f64)> {
    if e.d_a() != 2 || e.d_b() != 2 || e.len() != 4 {
        return None;
    }
    let s = e.states();
    let at = |l: usize, r: usize, c: usize| s[l].matrix()[(r, c)];
    let sin_t = (at(0, 2, 2).re + at(1, 2, 2).re).max(0.0).sqrt();
    let cos_abs = (at(0, 3, 3).re + at(1, 3, 3).re).max(0.0).sqrt();
    let sd = at(0, 1, 1).re.clamp(0.0, 1.0).sqrt().asin();
    let mut cands = Vec::new();
    for cs in [1.0, -1.0] {
        let tau = sin_t.atan2(cs * cos_abs);
        for delta in [sd, std::f64::consts::PI - sd, -sd] {
            let (sdl, cdl) = delta.sin_cos();
            let z = at(2, 0, 2) * tau.cos() + at(2, 0, 3) * tau.sin();
            let xi = if (sdl * cdl).abs() > 1e-9 { (-z / (sdl * cdl)).arg() } else { 0.0 };
            cands.push((delta, tau, xi));
        }
    }
    cands.into_iter().find(|&(d, t, x)| {
        let f = bell_basis_family(d, t, x);
        f.states().iter().zip(s).all(|(a, b)| (a.matrix() - b.matrix()).norm() < 1e-8)
    })
}

/// Deterministic first-party starting POVMs for the oriented ensemble.
pub fn injected_alice_seeds(e: &StateEnsemble, direction: Direction, m: usize) -> Vec<Vec<HermitianOp>> {
    let mut seeds = Vec::new();
    let o = direction.orient(e);
    if o.d_a() == 4 && o.d_b() == 4 {
        seeds.push(coarse_grain(computational_basis(4), m));
    }
    if let Some((_, tau, _)) = detect_bell_parameters(e) {
        if m >= 2 {
            let first = match direction {
                Direction::AtoB => crate::analytic::analytic_strategy_ab(tau).alice,
                Direction::BtoA => crate::analytic::analytic_strategy_ba(tau).alice,
            };
            seeds.push(pad(first, m));
        }
    }
    seeds
}

fn pad(mut ops: Vec<HermitianOp>, m: usize) -> Vec<HermitianOp> {
    if ops.len() > m {
        return coarse_grain(ops, m);
    }
    let shape = ops[0].shape().clone();
    while ops.len() < m {
        ops.push(HermitianOp::zeros(shape.clone()));
    }
    ops
}

/// Alternates exact Bob and Alice updates from a starting Alice POVM.
pub fn seesaw_oneround_from(
    e: &StateEnsemble,
    alice: Vec<HermitianOp>,
    opts: &SeesawOptions,
) -> Result<(OneRoundStrategy, Vec<f64>), SeesawError> {
    let o = opts.direction.orient(e);
    let mut alice = alice;
    let mut history = Vec::new();
    let (mut bob, mut value) = optimal_bob_given_alice(&o, &alice, opts.eps)?;
    history.push(value);
    for _ in 0..opts.max_iters {
        let (new_alice, _) = optimal_alice_given_bob(&o, &bob, opts.eps)?;
        let (new_bob, new_value) = optimal_bob_given_alice(&o, &new_alice, opts.eps)?;
        history.push(new_value);
        let improved = new_value - value;
        if new_value >= value {
            alice = new_alice;
            bob = new_bob;
            value = new_value;
        }
        if improved < opts.conv_tol {
            break;
        }
    }
    Ok((OneRoundStrategy { alice, bob, direction: opts.direction }, history))
}

/// Best one-round strategy over random and injected restarts.
pub fn seesaw_oneround(e: &StateEnsemble, m: usize, opts: &SeesawOptions) -> Result<SeesawRun<OneRoundStrategy>, SeesawError> {
    if m == 0 {
        return Err(SeesawError::Invalid("m must be at least 1".into()));
    }
    let o = opts.direction.orient(e);
    let mut starts: Vec<Vec<HermitianOp>> = if opts.inject_seeds { injected_alice_seeds(e, opts.direction, m) } else { vec![] };
    for r in 0..opts.restarts {
        starts.push(random_povm(o.d_a(), m, &mut restart_rng(opts.seed, r as u64)));
    }
    let mut best: Option<(f64, OneRoundStrategy, Vec<f64>)> = None;
    let mut failed = 0;
    let run = starts.len();
    for alice in starts {
        match seesaw_oneround_from(e, alice, opts) {
            Ok((s, h)) => {
                let v = strategy_value(e, &Strategy::OneRound(s.clone()))?;
                if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
                    best = Some((v, s, h));
                }
            }
            Err(_) => failed += 1,
        }
    }
    let (value, strategy, history) = best.ok_or_else(|| SeesawError::Invalid("all restarts failed".into()))?;
    Ok(SeesawRun {
        result: BoundResult {
            value,
            kind: BoundKind::Lower,
            method: Method::SeesawOneround,
            params: Some(HierarchyParams::new(m, 1, opts.direction)),
            gap: 0.0,
            status: SolveStatus::Optimal,
        },
        strategy,
        history,
        restarts_run: run,
        restarts_failed: failed,
    })
}

/// Deterministic argmax post-processing, ties to the lowest `λ`.
pub fn best_post(e: &StateEnsemble, alice: &[HermitianOp], bob: &[HermitianOp]) -> Vec<Vec<Vec<f64>>> {
    alice
        .iter()
        .map(|a| {
            bob.iter()
                .map(|b| {
                    let t = tensor(a, b);
                    let scores: Vec<f64> = e.states().iter().zip(e.priors()).map(|(rho, p)| p * t.inner(rho)).collect();
                    let mut arg = 0;
                    for (l, &s) in scores.iter().enumerate() {
                        if s > scores[arg] + 1e-14 {
                            arg = l;
                        }
                    }
                    let mut v = vec![0.0; scores.len()];
                    v[arg] = 1.0;
                    v
                })
                .collect()
        })
        .collect()
}

fn na_alice_step(e: &StateEnsemble, bob: &[HermitianOp], post: &[Vec<Vec<f64>>], eps: f64) -> Result<(Vec<HermitianOp>, f64), SeesawError> {
    let ks: Vec<HermitianOp> = post
        .iter()
        .map(|pa| {
            let mut acc = HermitianOp::zeros(SystemShape::single(e.d_a()));
            for (b, bb) in bob.iter().enumerate() {
                for (l, (rho, &p)) in e.states().iter().zip(e.priors()).enumerate() {
                    let w = pa[b][l] * p;
                    if w != 0.0 {
                        acc = acc.add(&reduce_a(rho, bb, e.d_a()).scale(w)).unwrap();
                    }
                }
            }
            acc
        })
        .collect();
    optimal_povm(&ks, eps)
}

fn na_bob_step(e: &StateEnsemble, alice: &[HermitianOp], post: &[Vec<Vec<f64>>], eps: f64) -> Result<(Vec<HermitianOp>, f64), SeesawError> {
    let m_b = post[0].len();
    let gs: Vec<HermitianOp> = (0..m_b)
        .map(|b| {
            let mut acc = HermitianOp::zeros(SystemShape::single(e.d_b()));
            for (a, aa) in alice.iter().enumerate() {
                for (l, (rho, &p)) in e.states().iter().zip(e.priors()).enumerate() {
                    let w = post[a][b][l] * p;
                    if w != 0.0 {
                        acc = acc.add(&reduce_b(rho, aa, e.d_b()).scale(w)).unwrap();
                    }
                }
            }
            acc
        })
        .collect();
    optimal_povm(&gs, eps)
}

/// Alternates post-processing, Alice and Bob updates from given POVMs.
pub fn seesaw_nonadaptive_from(
    e: &StateEnsemble,
    alice: Vec<HermitianOp>,
    bob: Vec<HermitianOp>,
    opts: &SeesawOptions,
) -> Result<(NonAdaptiveStrategy, Vec<f64>), SeesawError> {
    let o = opts.direction.orient(e);
    let make = |alice: &[HermitianOp], bob: &[HermitianOp], post: Vec<Vec<Vec<f64>>>| NonAdaptiveStrategy {
        alice: alice.to_vec(),
        bob: bob.to_vec(),
        post,
        direction: opts.direction,
    };
    let eval = |s: &NonAdaptiveStrategy| value_of(&o, &s.measurement());
    let mut cur = make(&alice, &bob, best_post(&o, &alice, &bob));
    let mut value = eval(&cur);
    let mut history = vec![value];
    for _ in 0..opts.max_iters {
        let post = best_post(&o, &cur.alice, &cur.bob);
        let (alice, _) = na_alice_step(&o, &cur.bob, &post, opts.eps)?;
        let post = best_post(&o, &alice, &cur.bob);
        let (bob, _) = na_bob_step(&o, &alice, &post, opts.eps)?;
        let post = best_post(&o, &alice, &bob);
        let next = make(&alice, &bob, post);
        let next_value = eval(&next);
        history.push(next_value);
        let improved = next_value - value;
        if next_value >= value {
            cur = next;
            value = next_value;
        }
        if improved < opts.conv_tol {
            break;
        }
    }
    Ok((cur, history))
}

/// Deterministic `(alice, bob)` starting points for non-adaptive runs.
pub fn injected_na_seeds(e: &StateEnsemble, direction: Direction, m: usize, m_b: usize) -> Vec<(Vec<HermitianOp>, Vec<HermitianOp>)> {
    let mut seeds = Vec::new();
    let o = direction.orient(e);
    if o.d_a() == 4 && o.d_b() == 4 {
        seeds.push((coarse_grain(computational_basis(4), m), pad(computational_basis(4), m_b)));
    }
    if direction == Direction::AtoB && m >= 2 && m_b >= 2 {
        if let Some((_, tau, _)) = detect_bell_parameters(e) {
            let s = crate::analytic::analytic_strategy_ab(tau);
            seeds.push((pad(s.alice, m), pad(s.bob, m_b)));
        }
    }
    seeds
}

/// Best non-adaptive strategy over random and injected restarts.
pub fn seesaw_nonadaptive(
    e: &StateEnsemble,
    m: usize,
    opts: &SeesawOptions,
) -> Result<SeesawRun<NonAdaptiveStrategy>, SeesawError> {
    if m == 0 {
        return Err(SeesawError::Invalid("m must be at least 1".into()));
    }
    let o = opts.direction.orient(e);
    let m_b = opts.m_b.unwrap_or(o.d_b() * o.d_b()).max(1);
    let mut starts = if opts.inject_seeds { injected_na_seeds(e, opts.direction, m, m_b) } else { vec![] };
    for r in 0..opts.restarts {
        let mut rng = restart_rng(opts.seed, r as u64);
        let a = random_povm(o.d_a(), m, &mut rng);
        let b = random_povm(o.d_b(), m_b, &mut rng);
        starts.push((a, b));
    }
    let mut best: Option<(f64, NonAdaptiveStrategy, Vec<f64>)> = None;
    let mut failed = 0;
    let run = starts.len();
    for (a, b) in starts {
        match seesaw_nonadaptive_from(e, a, b, opts) {
            Ok((s, h)) => {
                let v = strategy_value(e, &Strategy::NonAdaptive(s.clone()))?;
                if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
                    best = Some((v, s, h));
                }
            }
            Err(_) => failed += 1,
        }
    }
    let (value, strategy, history) = best.ok_or_else(|| SeesawError::Invalid("all restarts failed".into()))?;
    Ok(SeesawRun {
        result: BoundResult {
            value,
            kind: BoundKind::Lower,
            method: Method::SeesawNonadaptive,
            params: Some(HierarchyParams::new(m, 1, opts.direction)),
            gap: 0.0,
            status: SolveStatus::Optimal,
        },
        strategy,
        history,
        restarts_run: run,
        restarts_failed: failed,
    })
}

/// JSON encoding of strategies shared with certificates and ensembles.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StrategyFile {
    OneRound {
        direction: Direction,
        alice: Vec<crate::ensemble::MatrixJson>,
        bob: Vec<Vec<crate::ensemble::MatrixJson>>,
    },
    NonAdaptive {
        direction: Direction,
        alice: Vec<crate::ensemble::MatrixJson>,
        bob: Vec<crate::ensemble::MatrixJson>,
        post: Vec<Vec<Vec<f64>>>,
    },
}

impl StrategyFile {
    pub fn from_strategy(s: &Strategy) -> Self {
        use crate::ensemble::matrix_to_json as j;
        match s {
            Strategy::OneRound(s) => StrategyFile::OneRound {
                direction: s.direction,
                alice: s.alice.iter().map(|x| j(x.matrix())).collect(),
                bob: s.bob.iter().map(|b| b.iter().map(|x| j(x.matrix())).collect()).collect(),
            },
            Strategy::NonAdaptive(s) => StrategyFile::NonAdaptive {
                direction: s.direction,
                alice: s.alice.iter().map(|x| j(x.matrix())).collect(),
                bob: s.bob.iter().map(|x| j(x.matrix())).collect(),
                post: s.post.clone(),
            },
        }
    }

    pub fn into_strategy(self) -> Result<Strategy, SeesawError> {
        let op = |m: &crate::ensemble::MatrixJson| -> Result<HermitianOp, SeesawError> {
            let mat = crate::ensemble::matrix_from_json(m).map_err(SeesawError::Invalid)?;
            HermitianOp::new(SystemShape::single(mat.nrows()), mat).map_err(|e| SeesawError::Invalid(e.to_string()))
        };
        Ok(match self {
            StrategyFile::OneRound { direction, alice, bob } => Strategy::OneRound(OneRoundStrategy {
                alice: alice.iter().map(op).collect::<Result<_, _>>()?,
                bob: bob.iter().map(|b| b.iter().map(op).collect::<Result<_, _>>()).collect::<Result<_, _>>()?,
                direction,
            }),
            StrategyFile::NonAdaptive { direction, alice, bob, post } => Strategy::NonAdaptive(NonAdaptiveStrategy {
                alice: alice.iter().map(op).collect::<Result<_, _>>()?,
                bob: bob.iter().map(op).collect::<Result<_, _>>()?,
                post,
                direction,
            }),
        })
    }
}
