//! Interior-point backend (Clarabel).

extern crate openblas_src;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
    SupportedConeT::{PSDTriangleConeT, ZeroConeT},
};

use super::{svec_rows, ConicError, ConicProgram, RawSolution, SolveStatus, SolverOptions};

/// Column-compressed matrix from unsorted triplets, summing duplicates.
pub(crate) fn csc_from_triplets(m: usize, n: usize, mut trip: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    trip.sort_unstable_by_key(|&(r, c, _)| (c, r));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(trip.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(trip.len());
    let mut last: Option<(usize, usize)> = None;
    for (r, c, v) in trip {
        if last == Some((r, c)) {
            *nzval.last_mut().unwrap() += v;
            continue;
        }
        rowval.push(r);
        nzval.push(v);
        colptr[c + 1] += 1;
        last = Some((r, c));
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

pub(crate) fn solve(p: &ConicProgram, rows: &[usize], opts: &SolverOptions) -> Result<RawSolution, ConicError> {
    let n = p.n_params;
    let mut trip = Vec::new();
    let mut b = Vec::new();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    let mut row = 0usize;
    for eq in rows.iter().map(|&i| &p.equalities[i]) {
        for t in &eq.terms {
            trip.push((row, t.param, t.coeff));
        }
        b.push(eq.rhs);
        row += 1;
    }
    if !rows.is_empty() {
        cones.push(ZeroConeT(rows.len()));
    }
    for cone in &p.cones {
        for terms in svec_rows(cone) {
            for t in terms {
                trip.push((row, t.param, -t.coeff));
            }
            b.push(0.0);
            row += 1;
        }
        cones.push(PSDTriangleConeT(cone.real_dim()));
    }
    let a = csc_from_triplets(row, n, trip);
    let pmat = CscMatrix::zeros((n, n));
    let q: Vec<f64> = p.objective.iter().map(|v| -v).collect();

    let tol = (0.1 * opts.eps).clamp(1e-12, 1e-4);
    let settings = DefaultSettingsBuilder::default()
        .verbose(opts.verbose)
        .max_iter(opts.max_iters)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol.min(1e-8))
        .direct_solve_method("faer".into())
        .build()
        .map_err(|e| ConicError::Solver(e.to_string()))?;
    let mut solver = DefaultSolver::new(&pmat, &q, &a, &b, &cones, settings).map_err(|e| ConicError::Solver(format!("{e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
        _ => SolveStatus::NumericalTrouble,
    };
    Ok(RawSolution {
        status,
        primal: -sol.obj_val,
        dual: -sol.obj_val_dual,
        params: sol.x.clone(),
        iterations: sol.iterations,
    })
}
