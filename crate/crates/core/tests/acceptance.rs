//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::time::Instant;

use locc_bounds::analytic::{analytic_p_succ_ab, analytic_p_succ_ba};
use locc_bounds::certify::{
    certificate_from_nonadaptive, certificate_from_oneround, certificate_from_solution, check_1r_certificate,
    check_na_certificate,
};
use locc_bounds::conic::SolverOptions;
use locc_bounds::ensemble::{bell_basis_family, double_trine, ququart_ensemble, StateEnsemble};
use locc_bounds::hierarchy::{
    build_1r_sdp, build_na_sdp, upper_bound, Direction, HierarchyParams, Method,
};
use locc_bounds::linalg::{
    from_real_embedding, partial_trace, partial_transpose, permutation_unitary, real_embedding, CMatrix, HermitianOp,
    Permutation, SystemShape, C64,
};
use locc_bounds::seesaw::{random_povm, restart_rng, seesaw_nonadaptive, seesaw_oneround, SeesawOptions};
use locc_bounds::seesaw::{NonAdaptiveStrategy, OneRoundStrategy};
use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-6;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn bell(tau: f64) -> StateEnsemble {
    bell_basis_family(FRAC_PI_4, tau, FRAC_PI_2)
}

fn one_round(e: &StateEnsemble, m: usize, k: usize, dir: Direction, opts: &SolverOptions, cap: Option<usize>) -> f64 {
    let mut p = HierarchyParams::new(m, k, dir);
    if let Some(c) = cap {
        p = p.with_size_cap(c);
    }
    match upper_bound(e, Method::Oneround, Some(&p), opts) {
        Ok(r) => r.value,
        Err(err) => {
            println!("  1r m={m} k={k}: {err}");
            f64::NAN
        }
    }
}

fn non_adaptive(e: &StateEnsemble, m: usize, k: usize, opts: &SolverOptions) -> f64 {
    let p = HierarchyParams::new(m, k, Direction::AtoB);
    match upper_bound(e, Method::Nonadaptive, Some(&p), opts) {
        Ok(r) => r.value,
        Err(err) => {
            println!("  na m={m} k={k}: {err}");
            f64::NAN
        }
    }
}

fn seesaw_opts(restarts: usize, direction: Direction) -> SeesawOptions {
    SeesawOptions { restarts, seed: 0, direction, ..SeesawOptions::default() }
}

fn ss_1r(e: &StateEnsemble, m: usize, restarts: usize, dir: Direction) -> f64 {
    seesaw_oneround(e, m, &seesaw_opts(restarts, dir)).map(|r| r.result.value).unwrap_or(f64::NAN)
}

fn ss_na(e: &StateEnsemble, m: usize, restarts: usize) -> f64 {
    seesaw_nonadaptive(e, m, &seesaw_opts(restarts, Direction::AtoB)).map(|r| r.result.value).unwrap_or(f64::NAN)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.5}")).collect();
    format!("[{}]", parts.join(", "))
}

fn within(v: &[f64], expected: &[f64], tol: f64) -> bool {
    v.iter().zip(expected).all(|(a, b)| (a - b).abs() <= tol)
}

fn figure_two(rep: &mut Report) {
    let opts = SolverOptions { eps: EPS, ..SolverOptions::default() };
    let taus = [0.0, PI / 8.0, FRAC_PI_4, 3.0 * PI / 8.0, FRAC_PI_2];
    let mut worst = [0.0f64; 4];
    for &tau in &taus {
        let e = bell(tau);
        let ba = analytic_p_succ_ba(tau);
        let ab = analytic_p_succ_ab(tau);
        let ppt = upper_bound(&e, Method::Ppt, None, &opts).map(|r| r.value).unwrap_or(f64::NAN);
        let d = [
            (one_round(&e, 2, 1, Direction::BtoA, &opts, None) - ba).abs(),
            (one_round(&e, 2, 2, Direction::AtoB, &opts, None) - ab).abs(),
            (ppt - ba).abs(),
            (ss_1r(&e, 2, 5, Direction::BtoA) - ba).abs().max((ss_1r(&e, 2, 5, Direction::AtoB) - ab).abs()),
        ];
        for (w, x) in worst.iter_mut().zip(d) {
            *w = if x.is_nan() { f64::INFINITY } else { w.max(x) };
        }
    }
    let names = ["1R B→A k=1 vs (1+cos τ)/2", "1R A→B k=2 vs (√2 cos τ+2)/4", "PPT vs (1+cos τ)/2", "see-saw vs both curves"];
    for (label, (name, w)) in ["a", "b", "c", "d"].iter().zip(names.iter().zip(worst)) {
        rep.line(&format!("1({label}) Bell family {name}"), w <= 5e-3, format!("max deviation {w:.2e} (tol 5e-3)"));
    }
}

struct TrineValues {
    one_round: Vec<f64>,
    non_adaptive: Vec<f64>,
    ss_one_round: Vec<f64>,
    ss_non_adaptive: Vec<f64>,
}

fn trine_table(rep: &mut Report) -> TrineValues {
    let e = double_trine();
    let opts = SolverOptions { eps: EPS, ..SolverOptions::default() };
    let ms = [2, 3, 4];
    let t = TrineValues {
        one_round: ms.iter().map(|&m| one_round(&e, m, 3, Direction::AtoB, &opts, None)).collect(),
        non_adaptive: ms.iter().map(|&m| non_adaptive(&e, m, 3, &opts)).collect(),
        ss_one_round: ms.iter().map(|&m| ss_1r(&e, m, 50, Direction::AtoB)).collect(),
        ss_non_adaptive: ms.iter().map(|&m| ss_na(&e, m, 50)).collect(),
    };
    let up_1r = [0.905, 0.9346, 0.950];
    let up_na = [0.8116, 0.8248, 0.8509];
    let ok = within(&t.one_round, &up_1r, 1e-3) && within(&t.non_adaptive, &up_na, 1e-3);
    rep.line(
        "2 double trine hierarchy uppers k=3",
        ok,
        format!("1R {} vs {}, NA {} vs {} (tol 1e-3)", fmt(&t.one_round), fmt(&up_1r), fmt(&t.non_adaptive), fmt(&up_na)),
    );
    let lo_1r = [0.8976, 0.8976, 0.9330];
    let lo_na = [0.8003, 0.8079, 0.8079];
    let reach = |v: &[f64], x: &[f64]| v.iter().zip(x).all(|(a, b)| *a >= b - 5e-3);
    rep.line(
        "3 double trine see-saw lowers, 50 restarts",
        reach(&t.ss_one_round, &lo_1r) && reach(&t.ss_non_adaptive, &lo_na),
        format!("1R {} vs {}, NA {} vs {} (≥ value − 5e-3)", fmt(&t.ss_one_round), fmt(&lo_1r), fmt(&t.ss_non_adaptive), fmt(&lo_na)),
    );
    t
}

fn ququart_table(rep: &mut Report) -> (Vec<f64>, Vec<f64>) {
    let e = ququart_ensemble();
    let opts = SolverOptions { eps: 1e-7, ..SolverOptions::default() };
    let ups: Vec<f64> = [2, 3, 4].iter().map(|&m| one_round(&e, m, 2, Direction::AtoB, &opts, Some(usize::MAX))).collect();
    let lows: Vec<f64> = [2, 3, 4].iter().map(|&m| ss_1r(&e, m, 50, Direction::AtoB)).collect();
    let up_ref = [0.6667, 0.9623, 1.0];
    let lo_ref = [0.6667, 0.8333, 1.0];
    rep.line(
        "4a ququart hierarchy uppers k=2",
        within(&ups, &up_ref, 2e-3),
        format!("{} vs {} (tol 2e-3)", fmt(&ups), fmt(&up_ref)),
    );
    rep.line("4b ququart see-saw lowers", within(&lows, &lo_ref, 5e-3), format!("{} vs {} (tol 5e-3)", fmt(&lows), fmt(&lo_ref)));
    (ups, lows)
}

fn separations(rep: &mut Report, t: &TrineValues, ququart: &(Vec<f64>, Vec<f64>)) {
    let (a, b) = (t.ss_one_round[2], t.one_round[0]);
    rep.line(
        "5(a) non-projective advantage",
        a >= 0.9330 - 5e-3 && a > b + 1e-3,
        format!("see-saw 1R m=4 {a:.5} > 1R m=2 upper {b:.5} + 1e-3"),
    );
    let (na4, ss2) = (t.non_adaptive[2], t.ss_one_round[0]);
    rep.line(
        "5(b) adaptivity gap",
        na4 + 1e-3 < ss2 - 5e-3 && (na4 - 0.8509).abs() <= 1e-3,
        format!("NA m=4 upper {na4:.5} + 1e-3 < 1R m=2 see-saw {ss2:.5} − 5e-3"),
    );
    let (up3, ss4) = (ququart.0[1], ququart.1[2]);
    rep.line(
        "5(c) communication gap",
        up3 < 1.0 - 3e-2 && (ss4 - 1.0).abs() <= 5e-3,
        format!("ququart 1R m=3 upper {up3:.5} < 0.97, m=4 see-saw {ss4:.6}"),
    );
}

fn random_hermitian(rng: &mut ChaCha8Rng, dims: &[usize]) -> HermitianOp {
    let shape = SystemShape::new(dims.to_vec()).unwrap();
    let n = shape.total();
    let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    HermitianOp::new(shape, (&g + g.adjoint()).scale(0.5)).unwrap()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn linalg_suite() -> f64 {
    let mut rng = restart_rng(2024, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x = random_hermitian(&mut rng, &[2, 3, 2]);
        for subs in [vec![1], vec![2, 3], vec![1, 2, 3]] {
            let y = partial_transpose(&partial_transpose(&x, &subs).unwrap(), &subs).unwrap();
            worst = worst.max(max_abs(&(y.matrix() - x.matrix())));
            worst = worst.max((partial_transpose(&x, &subs).unwrap().trace() - x.trace()).abs());
            worst = worst.max((partial_trace(&x, &subs).unwrap().trace() - x.trace()).abs());
        }
        let h = random_hermitian(&mut rng, &[3]);
        let mut a = h.eigenvalues();
        a.extend(h.eigenvalues());
        a.sort_by(f64::total_cmp);
        let emb = real_embedding(&h);
        let mut b: Vec<f64> = SymmetricEigen::new(emb.clone()).eigenvalues.iter().copied().collect();
        b.sort_by(f64::total_cmp);
        worst = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(worst, f64::max);
        let back = from_real_embedding(h.shape().clone(), &emb).unwrap();
        worst = worst.max(max_abs(&(back.matrix() - h.matrix())));
    }
    for k in 1..=3 {
        let all = Permutation::all(k);
        for s in &all {
            for p in &all {
                let lhs = permutation_unitary(k, 2, s).unwrap() * permutation_unitary(k, 2, p).unwrap();
                let rhs = permutation_unitary(k, 2, &s.compose(p)).unwrap();
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
    }
    worst
}

fn certificate_suite() -> (f64, f64) {
    let e = double_trine();
    let mut forward: f64 = 0.0;
    for seed in 0..10 {
        let mut rng = restart_rng(seed, 0);
        let alice = random_povm(2, 2, &mut rng);
        let bob = (0..2).map(|_| random_povm(2, 3, &mut rng)).collect();
        let s = OneRoundStrategy { alice: alice.clone(), bob, direction: Direction::AtoB };
        let post = (0..2)
            .map(|_| (0..2).map(|_| {
                let l = rng.gen_range(0..3);
                (0..3).map(|i| if i == l { 1.0 } else { 0.0 }).collect()
            }).collect())
            .collect();
        let na = NonAdaptiveStrategy { alice, bob: random_povm(2, 2, &mut rng), post, direction: Direction::AtoB };
        for k in [1, 2] {
            for r in [
                check_1r_certificate(&certificate_from_oneround(&s, k), Some(&s.measurement()), Some(&e), 1e-10).unwrap(),
                check_na_certificate(&certificate_from_nonadaptive(&na, k), Some(&na.measurement()), Some(&e), 1e-10).unwrap(),
            ] {
                if !r.pass {
                    forward = f64::INFINITY;
                }
            }
        }
    }
    let mut solver: f64 = 0.0;
    for ens in [double_trine(), bell(FRAC_PI_3)] {
        let p = HierarchyParams::new(2, 2, Direction::AtoB);
        let lp = build_1r_sdp(&ens, &p).unwrap();
        let report = lp.program.solve(EPS).unwrap();
        let c = certificate_from_solution(&lp, &report, Direction::AtoB);
        let r = check_1r_certificate(&c, None, Some(&ens), 1e-5).unwrap();
        if !r.pass {
            solver = f64::INFINITY;
        }
        let lp = build_na_sdp(&ens, &p).unwrap();
        let report = lp.program.solve(EPS).unwrap();
        let c = certificate_from_solution(&lp, &report, Direction::AtoB);
        if !check_na_certificate(&c, None, Some(&ens), 1e-5).unwrap().pass {
            solver = f64::INFINITY;
        }
    }
    (forward, solver)
}

fn properties(rep: &mut Report) {
    let opts = SolverOptions { eps: EPS, ..SolverOptions::default() };
    let tol = 3.0 * EPS;
    let mut chain_ok = true;
    let mut mono_ok = true;
    let mut details = Vec::new();
    for (name, e) in [("trine", double_trine()), ("bell π/3", bell(FRAC_PI_3))] {
        let g = upper_bound(&e, Method::Global, None, &opts).unwrap().value;
        let ppt = upper_bound(&e, Method::Ppt, None, &opts).unwrap().value;
        let r1 = one_round(&e, 2, 1, Direction::AtoB, &opts, None);
        let r2 = one_round(&e, 2, 2, Direction::AtoB, &opts, None);
        let n2 = non_adaptive(&e, 2, 2, &opts);
        let s1 = ss_1r(&e, 2, 10, Direction::AtoB);
        let sn = ss_na(&e, 2, 10);
        chain_ok &= sn <= n2 + tol && n2 <= r2 + tol && s1 <= r2 + tol && r2 <= ppt + tol && ppt <= g + tol;
        mono_ok &= r2 <= r1 + 2.0 * EPS;
        details.push(format!("{name}: ss {sn:.5}/{s1:.5} NA {n2:.5} 1R {r2:.5} (k=1 {r1:.5}) PPT {ppt:.5} global {g:.5}"));
    }
    rep.line("6(a) bound ordering chain", chain_ok, details.join("; "));
    rep.line("6(b) k-monotonicity", mono_ok, "1R(k=2) ≤ 1R(k=1) + 2ε on trine and Bell π/3".into());
    let (forward, solver) = certificate_suite();
    rep.line("6(c) forward certificates at 1e-10", forward == 0.0, "10 random strategies, k ∈ {1, 2}, both variants".into());
    rep.line("6(d) solver certificates at 1e-5", solver == 0.0, "1R and NA, m=2 k=2, trine and Bell π/3".into());
    let w = linalg_suite();
    rep.line("6(e) linalg invariants", w <= 1e-10, format!("max residual {w:.2e} (tol 1e-10)"));
}

fn main() {
    // the libtest protocol flags are ignored; `--list` must report no tests
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let start = Instant::now();
    let mut rep = Report { failures: 0 };
    figure_two(&mut rep);
    let trine = trine_table(&mut rep);
    let ququart = ququart_table(&mut rep);
    separations(&mut rep, &trine, &ququart);
    properties(&mut rep);
    println!("acceptance: {} failing, {:.0}s", rep.failures, start.elapsed().as_secs_f64());
    if rep.failures > 0 {
        std::process::exit(1);
    }
}
