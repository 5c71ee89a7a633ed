//! State ensembles on a bipartite system and the built-in examples.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    basis_ket, partial_trace, permutation_unitary, C64, CMatrix, CVector, HermitianOp, LinalgError,
    Permutation, SystemShape,
};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("ensemble has no items")]
    Empty,
    #[error("prior of state {index} is {prior}, priors must be positive")]
    NonPositivePrior { index: usize, prior: f64 },
    #[error("priors do not sum to 1 (sum = {0})")]
    PriorSum(f64),
    #[error("state {index} has shape {found:?}, expected [{d_a}, {d_b}]")]
    WrongShape { index: usize, found: Vec<usize>, d_a: usize, d_b: usize },
    #[error("state {index} is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { index: usize, min_eig: f64 },
    #[error("state {index} has trace {trace}, expected 1")]
    Trace { index: usize, trace: f64 },
    #[error("state {index}: {source}")]
    Matrix { index: usize, source: LinalgError },
    #[error("state is not pure (purity {0})")]
    NotPure(f64),
    #[error("tangle is defined for two-qubit states only")]
    NotTwoQubit,
    #[error("malformed ensemble file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Priors `p_λ` and density matrices `ρ_λ` on `C^{d_A} ⊗ C^{d_B}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateEnsemble {
    d_a: usize,
    d_b: usize,
    priors: Vec<f64>,
    states: Vec<HermitianOp>,
}

impl StateEnsemble {
    pub fn new(d_a: usize, d_b: usize, priors: Vec<f64>, states: Vec<HermitianOp>) -> Result<Self, EnsembleError> {
        if states.is_empty() || priors.len() != states.len() {
            return Err(EnsembleError::Empty);
        }
        for (index, &prior) in priors.iter().enumerate() {
            if !(prior > 0.0) || !prior.is_finite() {
                return Err(EnsembleError::NonPositivePrior { index, prior });
            }
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(EnsembleError::PriorSum(sum));
        }
        let shape = SystemShape::new(vec![d_a, d_b]).map_err(|source| EnsembleError::Matrix { index: 0, source })?;
        let mut fixed = Vec::with_capacity(states.len());
        for (index, s) in states.into_iter().enumerate() {
            if s.dim() != shape.total() {
                return Err(EnsembleError::WrongShape { index, found: s.shape().dims().to_vec(), d_a, d_b });
            }
            let trace = s.trace();
            if (trace - 1.0).abs() > 1e-10 {
                return Err(EnsembleError::Trace { index, trace });
            }
            let min_eig = s.min_eigenvalue();
            if min_eig < -1e-10 {
                return Err(EnsembleError::NotPsd { index, min_eig });
            }
            fixed.push(s.with_shape(shape.clone()).unwrap());
        }
        Ok(Self { d_a, d_b, priors, states: fixed })
    }

    /// Builds from state vectors, normalizing each.
    pub fn from_kets(d_a: usize, d_b: usize, priors: Vec<f64>, kets: &[CVector]) -> Result<Self, EnsembleError> {
        let shape = SystemShape::new(vec![d_a, d_b]).map_err(|source| EnsembleError::Matrix { index: 0, source })?;
        let states = kets
            .iter()
            .enumerate()
            .map(|(index, k)| {
                let n = k.norm();
                HermitianOp::projector(shape.clone(), &k.unscale(n)).map_err(|source| EnsembleError::Matrix { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(d_a, d_b, priors, states)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[HermitianOp] {
        &self.states
    }

    pub fn shape(&self) -> SystemShape {
        SystemShape::new(vec![self.d_a, self.d_b]).unwrap()
    }

    /// True when every state has negligible imaginary part.
    pub fn is_real(&self) -> bool {
        self.states.iter().all(|s| s.is_real(1e-13))
    }

    /// Conjugates every state by SWAP and exchanges `d_A`, `d_B`.
    pub fn swap_parties(&self) -> StateEnsemble {
        let new_shape = SystemShape::new(vec![self.d_b, self.d_a]).unwrap();
        let old = self.shape();
        let n = old.total();
        let swap = CMatrix::from_fn(n, n, |r, c| {
            let rd = new_shape.digits(r);
            if old.index(&[rd[1], rd[0]]) == c {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let states = self
            .states
            .iter()
            .map(|s| HermitianOp::from_matrix_unchecked(new_shape.clone(), &swap * s.matrix() * swap.adjoint()))
            .collect();
        StateEnsemble { d_a: self.d_b, d_b: self.d_a, priors: self.priors.clone(), states }
    }

    pub fn from_json_str(s: &str) -> Result<Self, EnsembleError> {
        let file: EnsembleFile = serde_json::from_str(s).map_err(|e| EnsembleError::Parse(e.to_string()))?;
        file.into_ensemble()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&EnsembleFile::from_ensemble(self)).unwrap()
    }
}

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix, String> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(format!("matrix is not square ({n} rows)"));
    }
    Ok(CMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

#[derive(Serialize, Deserialize)]
struct EnsembleItem {
    prior: f64,
    state: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    #[serde(rename = "d_A")]
    d_a: usize,
    #[serde(rename = "d_B")]
    d_b: usize,
    items: Vec<EnsembleItem>,
}

impl EnsembleFile {
    fn from_ensemble(e: &StateEnsemble) -> Self {
        Self {
            d_a: e.d_a,
            d_b: e.d_b,
            items: e
                .priors
                .iter()
                .zip(&e.states)
                .map(|(&prior, s)| EnsembleItem { prior, state: matrix_to_json(s.matrix()) })
                .collect(),
        }
    }

    fn into_ensemble(self) -> Result<StateEnsemble, EnsembleError> {
        let shape = SystemShape::new(vec![self.d_a, self.d_b]).map_err(|e| EnsembleError::Parse(e.to_string()))?;
        let mut priors = Vec::new();
        let mut states = Vec::new();
        for (index, item) in self.items.into_iter().enumerate() {
            let m = matrix_from_json(&item.state).map_err(|e| EnsembleError::Parse(format!("state {index}: {e}")))?;
            if m.nrows() != shape.total() {
                return Err(EnsembleError::WrongShape { index, found: vec![m.nrows()], d_a: self.d_a, d_b: self.d_b });
            }
            states.push(HermitianOp::new(shape.clone(), m).map_err(|source| EnsembleError::Matrix { index, source })?);
            priors.push(item.prior);
        }
        StateEnsemble::new(self.d_a, self.d_b, priors, states)
    }
}

pub fn load_ensemble(path: impl AsRef<Path>) -> Result<StateEnsemble, EnsembleError> {
    StateEnsemble::from_json_str(&std::fs::read_to_string(path)?)
}

pub fn save_ensemble(e: &StateEnsemble, path: impl AsRef<Path>) -> Result<(), EnsembleError> {
    std::fs::write(path, e.to_json_string())?;
    Ok(())
}

fn two_qubit(amps: [C64; 4]) -> CVector {
    CVector::from_row_slice(&amps)
}

/// Kets of the two-qubit Bell-basis family in the order `ψ_1 … ψ_4`.
pub fn bell_basis_kets(delta: f64, tau: f64, xi: f64) -> [CVector; 4] {
    let (sd, cd) = delta.sin_cos();
    let (st, ct) = tau.sin_cos();
    let ph = C64::from_polar(1.0, xi);
    let r = |x: f64| C64::new(x, 0.0);
    let z = C64::new(0.0, 0.0);
    [
        two_qubit([z, r(sd), r(st * cd), r(-ct * cd)]),
        two_qubit([z, r(cd), r(-st * sd), r(ct * sd)]),
        two_qubit([-ph * cd, z, r(ct * sd), r(st * sd)]),
        two_qubit([ph * sd, z, r(ct * cd), r(st * cd)]),
    ]
}

/// The four Bell-basis-family states with uniform priors.
pub fn bell_basis_family(delta: f64, tau: f64, xi: f64) -> StateEnsemble {
    StateEnsemble::from_kets(2, 2, vec![0.25; 4], &bell_basis_kets(delta, tau, xi)).unwrap()
}

/// Trine qubit states `|s_0⟩, |s_1⟩, |s_2⟩`.
pub fn trine_kets() -> [CVector; 3] {
    let h = 3f64.sqrt() / 2.0;
    let q = |a: f64, b: f64| CVector::from_row_slice(&[C64::new(a, 0.0), C64::new(b, 0.0)]);
    [q(1.0, 0.0), q(-0.5, -h), q(-0.5, h)]
}

/// The double trine `|s_i⟩ ⊗ |s_i⟩` with uniform priors.
pub fn double_trine() -> StateEnsemble {
    let kets: Vec<CVector> = trine_kets().iter().map(|s| s.kronecker(s)).collect();
    StateEnsemble::from_kets(2, 2, vec![1.0 / 3.0; 3], &kets).unwrap()
}

/// Kets of the three maximally entangled ququart states.
pub fn ququart_kets() -> [CVector; 3] {
    let ket = |terms: &[(usize, usize, f64)]| {
        let mut v = CVector::zeros(16);
        for &(i, j, s) in terms {
            v[4 * i + j] = C64::new(0.5 * s, 0.0);
        }
        v
    };
    [
        ket(&[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)]),
        ket(&[(0, 3, 1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 0, 1.0)]),
        ket(&[(0, 1, 1.0), (1, 0, 1.0), (2, 3, -1.0), (3, 2, -1.0)]),
    ]
}

pub fn ququart_ensemble() -> StateEnsemble {
    StateEnsemble::from_kets(4, 4, vec![1.0 / 3.0; 3], &ququart_kets()).unwrap()
}

/// `2(1 - Tr ρ_A²)` for a pure two-qubit state.
pub fn tangle(state: &HermitianOp) -> Result<f64, EnsembleError> {
    if state.dim() != 4 {
        return Err(EnsembleError::NotTwoQubit);
    }
    let st = state.clone().with_shape(SystemShape::new(vec![2, 2]).unwrap()).unwrap();
    let purity = st.inner(&st);
    if (purity - 1.0).abs() > 1e-10 || (st.trace() - 1.0).abs() > 1e-10 {
        return Err(EnsembleError::NotPure(purity));
    }
    let rho_a = partial_trace(&st, &[2]).unwrap();
    Ok(2.0 * (1.0 - rho_a.inner(&rho_a)))
}

/// `T = sin²(2δ) sin²(τ)`.
pub fn bell_family_tangle(delta: f64, tau: f64) -> f64 {
    (2.0 * delta).sin().powi(2) * tau.sin().powi(2)
}

/// Maximally entangled two-qubit ket `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> CVector {
    (basis_ket(4, 0) + basis_ket(4, 3)).scale(FRAC_1_SQRT_2)
}

/// The SWAP unitary on `C^d ⊗ C^d`.
pub fn swap_unitary(d: usize) -> CMatrix {
    permutation_unitary(2, d, &Permutation::transposition(2, 0, 1)).unwrap()
}
