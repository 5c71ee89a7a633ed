//! First-order splitting backend.
//!
//! Scaled ADMM on `max cᵀx  s.t.  Ex = b,  S_j x = Z_j ⪰ 0`. Every cone
//! entry references a single parameter, so `D = Σ S_jᵀS_j` is diagonal and
//! the equality-constrained x-update reduces to one sparse Cholesky solve
//! with the fixed matrix `E D⁻¹ Eᵀ`.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};

use super::{Cone, ConicError, ConicProgram, Field, RawSolution, SolveStatus, SolverOptions};
use crate::linalg::C64;

#[derive(Clone, Debug)]
pub struct AdmmSettings {
    pub max_iters: usize,
    /// Relative tolerance on primal residual, dual residual and gap.
    pub tol: f64,
    /// Over-relaxation factor in `(0, 2)`.
    pub alpha: f64,
    pub rho: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self { max_iters: 20_000, tol: 1e-5, alpha: 1.6, rho: 1.0, time_limit: f64::INFINITY }
    }
}

/// Dense iterate of one cone, real symmetric or complex Hermitian.
#[derive(Clone)]
enum Dense {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl Dense {
    fn zeros(c: &Cone) -> Self {
        let n = c.dim();
        match c.field {
            Field::Real => Dense::Real(DMatrix::zeros(n, n)),
            Field::Complex => Dense::Complex(DMatrix::zeros(n, n)),
        }
    }

    fn norm_sq(&self) -> f64 {
        match self {
            Dense::Real(m) => m.norm_squared(),
            Dense::Complex(m) => m.norm_squared(),
        }
    }

    fn diff_norm_sq(&self, o: &Dense) -> f64 {
        match (self, o) {
            (Dense::Real(a), Dense::Real(b)) => (a - b).norm_squared(),
            (Dense::Complex(a), Dense::Complex(b)) => (a - b).norm_squared(),
            _ => unreachable!(),
        }
    }

    /// `self ← a·x + b·y`
    fn set_combo(&mut self, a: f64, x: &Dense, b: f64, y: &Dense) {
        match (self, x, y) {
            (Dense::Real(s), Dense::Real(x), Dense::Real(y)) => s.zip_zip_apply(x, y, |s, x, y| *s = a * x + b * y),
            (Dense::Complex(s), Dense::Complex(x), Dense::Complex(y)) => {
                s.zip_zip_apply(x, y, |s, x, y| *s = x * a + y * b)
            }
            _ => unreachable!(),
        }
    }

    /// Frobenius projection onto the PSD cone.
    fn project_psd(&self) -> Dense {
        match self {
            Dense::Real(m) => {
                let sym = (m + m.transpose()) * 0.5;
                let eig = SymmetricEigen::new(sym);
                let mut v = eig.eigenvectors.clone();
                for (j, &l) in eig.eigenvalues.iter().enumerate() {
                    let s = l.max(0.0).sqrt();
                    v.column_mut(j).scale_mut(s);
                }
                Dense::Real(&v * v.transpose())
            }
            Dense::Complex(m) => {
                let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
                let eig = SymmetricEigen::new(sym);
                let mut v = eig.eigenvectors.clone();
                for (j, &l) in eig.eigenvalues.iter().enumerate() {
                    let s = l.max(0.0).sqrt();
                    v.column_mut(j).scale_mut(s);
                }
                Dense::Complex(&v * v.adjoint())
            }
        }
    }
}

/// `S_j x`
fn forward(c: &Cone, x: &[f64], out: &mut Dense) {
    let n = c.dim();
    match out {
        Dense::Real(m) => {
            for r in 0..n {
                for col in 0..n {
                    let e = c.at(r, col);
                    m[(r, col)] = e.re.map_or(0.0, |t| t.coeff * x[t.param]);
                }
            }
        }
        Dense::Complex(m) => {
            for r in 0..n {
                for col in 0..n {
                    let e = c.at(r, col);
                    let re = e.re.map_or(0.0, |t| t.coeff * x[t.param]);
                    let im = e.im.map_or(0.0, |t| t.coeff * x[t.param]);
                    m[(r, col)] = C64::new(re, im);
                }
            }
        }
    }
}

/// `acc += S_jᵀ Y` for the real Frobenius inner product.
fn adjoint(c: &Cone, y: &Dense, acc: &mut [f64]) {
    let n = c.dim();
    match y {
        Dense::Real(m) => {
            for r in 0..n {
                for col in 0..n {
                    if let Some(t) = c.at(r, col).re {
                        acc[t.param] += t.coeff * m[(r, col)];
                    }
                }
            }
        }
        Dense::Complex(m) => {
            for r in 0..n {
                for col in 0..n {
                    let e = c.at(r, col);
                    let z = m[(r, col)];
                    if let Some(t) = e.re {
                        acc[t.param] += t.coeff * z.re;
                    }
                    if let Some(t) = e.im {
                        acc[t.param] += t.coeff * z.im;
                    }
                }
            }
        }
    }
}

fn diag_gram(p: &ConicProgram) -> Vec<f64> {
    let mut d = vec![0.0; p.n_params];
    for c in &p.cones {
        for e in &c.entries {
            for t in [e.re, e.im].into_iter().flatten() {
                d[t.param] += t.coeff * t.coeff;
            }
        }
    }
    d
}

struct Schur {
    llt: Option<faer::sparse::linalg::solvers::Llt<usize, f64>>,
    rows: usize,
}

impl Schur {
    /// Factorizes `E D⁻¹ Eᵀ` restricted to the selected rows.
    fn new(p: &ConicProgram, rows: &[usize], d: &[f64]) -> Result<Self, ConicError> {
        let m = rows.len();
        if m == 0 {
            return Ok(Self { llt: None, rows: 0 });
        }
        let mut by_param: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.n_params];
        for (i, &r) in rows.iter().enumerate() {
            for t in &p.equalities[r].terms {
                by_param[t.param].push((i, t.coeff));
            }
        }
        let mut trip = Vec::new();
        for (pid, list) in by_param.iter().enumerate() {
            for &(i, a) in list {
                for &(j, b) in list {
                    if i >= j {
                        trip.push(Triplet::new(i, j, a * b / d[pid]));
                    }
                }
            }
        }
        let k = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &trip)
            .map_err(|e| ConicError::Solver(format!("schur assembly: {e:?}")))?;
        let llt = k.sp_cholesky(Side::Lower).map_err(|e| ConicError::Solver(format!("schur factorization: {e:?}")))?;
        Ok(Self { llt: Some(llt), rows: m })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let Some(llt) = &self.llt else { return Vec::new() };
        let mut b = Mat::<f64>::from_fn(self.rows, 1, |i, _| rhs[i]);
        llt.solve_in_place(b.as_mut());
        (0..self.rows).map(|i| b[(i, 0)]).collect()
    }
}

pub(crate) fn solve(p: &ConicProgram, rows: &[usize], opts: &SolverOptions) -> Result<RawSolution, ConicError> {
    let set = &opts.admm;
    let start = Instant::now();
    let n = p.n_params;
    let d = diag_gram(p);
    if let Some(i) = d.iter().position(|&v| v <= 0.0) {
        return Err(ConicError::Solver(format!("parameter {i} is not referenced by any cone")));
    }
    let schur = Schur::new(p, rows, &d)?;
    let eqs: Vec<_> = rows.iter().map(|&r| &p.equalities[r]).collect();
    let b: Vec<f64> = eqs.iter().map(|e| e.rhs).collect();
    let c = &p.objective;

    let mut x = vec![0.0; n];
    let mut z: Vec<Dense> = p.cones.iter().map(Dense::zeros).collect();
    let mut u: Vec<Dense> = z.clone();
    let mut sx: Vec<Dense> = z.clone();
    let mut xh: Vec<Dense> = z.clone();
    let mut nu = vec![0.0; rows.len()];
    let mut rho = set.rho;
    let (alpha, tol) = (set.alpha, set.tol);
    let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);

    let mut status = SolveStatus::NumericalTrouble;
    let mut iters = 0;
    let (mut primal, mut dual) = (f64::NAN, f64::NAN);
    for it in 0..set.max_iters {
        iters = it + 1;
        // x-update
        let mut w = vec![0.0; n];
        for (j, cone) in p.cones.iter().enumerate() {
            let mut v = z[j].clone();
            v.set_combo(1.0, &z[j], -1.0, &u[j]);
            adjoint(cone, &v, &mut w);
        }
        for i in 0..n {
            w[i] = (w[i] + c[i] / rho) / d[i];
        }
        if !eqs.is_empty() {
            let rhs: Vec<f64> = eqs
                .iter()
                .zip(&b)
                .map(|(e, bi)| e.terms.iter().map(|t| t.coeff * w[t.param]).sum::<f64>() - bi)
                .collect();
            nu = schur.solve(&rhs);
            for (e, &v) in eqs.iter().zip(&nu) {
                for t in &e.terms {
                    w[t.param] -= t.coeff * v / d[t.param];
                }
            }
        }
        x = w;

        // z- and u-updates with over-relaxation
        let (mut r_sq, mut s_sq, mut sx_sq, mut z_sq, mut u_sq) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut dz_adj = vec![0.0; n];
        for (j, cone) in p.cones.iter().enumerate() {
            forward(cone, &x, &mut sx[j]);
            xh[j].set_combo(alpha, &sx[j], 1.0 - alpha, &z[j]);
            let mut arg = xh[j].clone();
            arg.set_combo(1.0, &xh[j], 1.0, &u[j]);
            let z_new = arg.project_psd();
            let mut dz = z_new.clone();
            dz.set_combo(1.0, &z_new, -1.0, &z[j]);
            adjoint(cone, &dz, &mut dz_adj);
            let mut u_new = u[j].clone();
            u_new.set_combo(1.0, &arg, -1.0, &z_new);
            r_sq += sx[j].diff_norm_sq(&z_new);
            sx_sq += sx[j].norm_sq();
            z_sq += z_new.norm_sq();
            u_sq += u_new.norm_sq();
            z[j] = z_new;
            u[j] = u_new;
        }
        s_sq += rho * rho * dz_adj.iter().map(|v| v * v).sum::<f64>();

        let r = r_sq.sqrt();
        let s = s_sq.sqrt();
        primal = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        dual = rho * b.iter().zip(&nu).map(|(a, v)| a * v).sum::<f64>();
        let scale_p = sx_sq.sqrt().max(z_sq.sqrt()).max(1.0);
        let scale_d = (rho * u_sq.sqrt()).max(c_norm).max(1.0);
        let gap = (primal - dual).abs() / (1.0 + primal.abs() + dual.abs());
        let (rp, rd) = (r / scale_p, s / scale_d);
        if opts.verbose && (it % 100 == 0) {
            eprintln!("admm {it:6} pobj {primal:.8} dobj {dual:.8} rp {rp:.2e} rd {rd:.2e} gap {gap:.2e} rho {rho:.2e}");
        }
        if !(primal.is_finite() && dual.is_finite()) {
            break;
        }
        if rp <= tol && rd <= tol && gap <= tol {
            status = SolveStatus::Optimal;
            break;
        }
        if start.elapsed().as_secs_f64() > set.time_limit {
            break;
        }
        // residual balancing; the Schur factor does not depend on rho
        if it % 50 == 49 {
            let factor = if rp > 10.0 * rd {
                2.0
            } else if rd > 10.0 * rp {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                for uj in &mut u {
                    let old = uj.clone();
                    uj.set_combo(1.0 / factor, &old, 0.0, &old);
                }
            }
        }
    }
    Ok(RawSolution { status, primal, dual, params: x, iterations: iters as u32 })
}
