//! Hermitian linear algebra on multipartite tensor spaces.
//!
//! Subsystem indices are 1-based and follow the order of the [`SystemShape`].
//! The first tensor factor is the most significant digit of a basis index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("matrix of size {rows}x{cols} does not match shape with total dimension {total}")]
    DimensionMismatch { rows: usize, cols: usize, total: usize },
    #[error("subsystem index {index} out of range for {count} factors")]
    SubsystemOutOfRange { index: usize, count: usize },
    #[error("repeated subsystem index {0}")]
    RepeatedSubsystem(usize),
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("operators have mismatched shapes")]
    ShapeMismatch,
    #[error("empty operator list")]
    Empty,
}

/// Ordered local dimensions of the tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemShape {
    dims: Vec<usize>,
}

impl SystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self, LinalgError> {
        if dims.is_empty() {
            return Err(LinalgError::InvalidShape("no tensor factors".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d == 0) {
            return Err(LinalgError::InvalidShape(format!("factor dimension {d}")));
        }
        Ok(Self { dims })
    }

    pub fn single(d: usize) -> Self {
        Self::new(vec![d.max(1)]).unwrap()
    }

    /// `k` copies of dimension `d_a` followed by one factor of dimension `d_b`.
    pub fn copies_then(d_a: usize, k: usize, d_b: usize) -> Self {
        let mut dims = vec![d_a; k];
        dims.push(d_b);
        Self::new(dims).unwrap()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &SystemShape) -> SystemShape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SystemShape { dims }
    }

    /// Place value of each factor in a flat basis index.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for j in (0..self.dims.len().saturating_sub(1)).rev() {
            s[j] = s[j + 1] * self.dims[j + 1];
        }
        s
    }

    pub fn digits(&self, mut x: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for j in (0..self.dims.len()).rev() {
            out[j] = x % self.dims[j];
            x /= self.dims[j];
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    fn check_subsystems(&self, subsystems: &[usize]) -> Result<Vec<bool>, LinalgError> {
        let mut mask = vec![false; self.dims.len()];
        for &s in subsystems {
            if s == 0 || s > self.dims.len() {
                return Err(LinalgError::SubsystemOutOfRange { index: s, count: self.dims.len() });
            }
            if mask[s - 1] {
                return Err(LinalgError::RepeatedSubsystem(s));
            }
            mask[s - 1] = true;
        }
        Ok(mask)
    }
}

/// Dense complex Hermitian matrix with a tensor-factor shape.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOp {
    shape: SystemShape,
    mat: CMatrix,
}

impl HermitianOp {
    /// Validates Hermiticity within `1e-12` of the Frobenius norm and symmetrizes.
    pub fn new(shape: SystemShape, mat: CMatrix) -> Result<Self, LinalgError> {
        let total = shape.total();
        if mat.nrows() != total || mat.ncols() != total {
            return Err(LinalgError::DimensionMismatch { rows: mat.nrows(), cols: mat.ncols(), total });
        }
        let res = (&mat - mat.adjoint()).norm();
        if res > 1e-12 * mat.norm().max(1.0) {
            return Err(LinalgError::NotHermitian(res));
        }
        Ok(Self::from_matrix_unchecked(shape, mat))
    }

    /// Symmetrizes without checking.
    pub fn from_matrix_unchecked(shape: SystemShape, mat: CMatrix) -> Self {
        let mat = (&mat + mat.adjoint()).scale(0.5);
        Self { shape, mat }
    }

    pub fn from_real(shape: SystemShape, mat: &DMatrix<f64>) -> Result<Self, LinalgError> {
        Self::new(shape, mat.map(|v| C64::new(v, 0.0)))
    }

    pub fn identity(shape: SystemShape) -> Self {
        let n = shape.total();
        Self { shape, mat: CMatrix::identity(n, n) }
    }

    pub fn zeros(shape: SystemShape) -> Self {
        let n = shape.total();
        Self { shape, mat: CMatrix::zeros(n, n) }
    }

    /// `|v⟩⟨v|` without normalization.
    pub fn projector(shape: SystemShape, v: &CVector) -> Result<Self, LinalgError> {
        if v.len() != shape.total() {
            return Err(LinalgError::DimensionMismatch { rows: v.len(), cols: 1, total: shape.total() });
        }
        Ok(Self::from_matrix_unchecked(shape, v * v.adjoint()))
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn with_shape(self, shape: SystemShape) -> Result<Self, LinalgError> {
        if shape.total() != self.shape.total() {
            return Err(LinalgError::DimensionMismatch {
                rows: self.dim(),
                cols: self.dim(),
                total: shape.total(),
            });
        }
        Ok(Self { shape, mat: self.mat })
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { shape: self.shape.clone(), mat: self.mat.scale(s) }
    }

    pub fn add(&self, other: &HermitianOp) -> Result<Self, LinalgError> {
        if self.shape.total() != other.shape.total() {
            return Err(LinalgError::ShapeMismatch);
        }
        Ok(Self { shape: self.shape.clone(), mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &HermitianOp) -> Result<Self, LinalgError> {
        if self.shape.total() != other.shape.total() {
            return Err(LinalgError::ShapeMismatch);
        }
        Ok(Self { shape: self.shape.clone(), mat: &self.mat - &other.mat })
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn inner(&self, other: &HermitianOp) -> f64 {
        self.mat.zip_fold(&other.mat.transpose(), 0.0, |acc, a, b| acc + (a * b).re)
    }

    /// `U X U†` for a unitary on the full space.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self::from_matrix_unchecked(self.shape.clone(), u * &self.mat * u.adjoint())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.mat.iter().all(|z| z.im.abs() <= tol)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.mat
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral (operator) norm.
    pub fn norm_op(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Ascending eigenvalues with matching eigenvector columns.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let eig = self.mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let n = self.dim();
        let mut vecs = CMatrix::zeros(n, n);
        for (c, &i) in order.iter().enumerate() {
            vecs.set_column(c, &eig.eigenvectors.column(i));
        }
        (order.iter().map(|&i| eig.eigenvalues[i]).collect(), vecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Applies `f` to the eigenvalues.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Self {
        let (vals, vecs) = self.eigh();
        let d = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| C64::new(f(v), 0.0))));
        Self::from_matrix_unchecked(self.shape.clone(), &vecs * d * vecs.adjoint())
    }

    /// Projection onto the PSD cone.
    pub fn psd_part(&self) -> Self {
        self.spectral_map(|v| v.max(0.0))
    }

    /// Projectors onto the positive and non-positive eigenspaces.
    pub fn sign_projectors(&self) -> (Self, Self) {
        let p = self.spectral_map(|v| if v > 0.0 { 1.0 } else { 0.0 });
        let m = HermitianOp::identity(self.shape.clone()).sub(&p).unwrap();
        (p, m)
    }
}

/// A bijection on `{0, …, k-1}`; `images[j]` is the image of position `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, LinalgError> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(LinalgError::InvalidPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    /// Builds from 1-based images.
    pub fn from_one_based(images: &[usize]) -> Result<Self, LinalgError> {
        if images.contains(&0) {
            return Err(LinalgError::InvalidPermutation(images.to_vec()));
        }
        Self::new(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(k: usize) -> Self {
        Self { images: (0..k).collect() }
    }

    pub fn transposition(k: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (0..k).collect();
        images.swap(i, j);
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, j: usize) -> usize {
        self.images[j]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (j, &i) in self.images.iter().enumerate() {
            inv[i] = j;
        }
        Self { images: inv }
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self { images: other.images.iter().map(|&j| self.images[j]).collect() }
    }

    /// Moves entry `j` of `xs` to position `σ(j)`.
    pub fn permute<T: Clone>(&self, xs: &[T]) -> Vec<T> {
        let mut out = xs.to_vec();
        for (j, x) in xs.iter().enumerate() {
            out[self.images[j]] = x.clone();
        }
        out
    }

    /// All `k!` permutations in lexicographic order of their images.
    pub fn all(k: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..k).collect();
        loop {
            out.push(Permutation { images: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
            let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

/// Kronecker product; the shape is the concatenation.
pub fn tensor(x: &HermitianOp, y: &HermitianOp) -> HermitianOp {
    HermitianOp { shape: x.shape.concat(&y.shape), mat: x.mat.kronecker(&y.mat) }
}

pub fn tensor_all(ops: &[&HermitianOp]) -> Result<HermitianOp, LinalgError> {
    let (first, rest) = ops.split_first().ok_or(LinalgError::Empty)?;
    Ok(rest.iter().fold((*first).clone(), |acc, op| tensor(&acc, op)))
}

/// Traces out the listed 1-based subsystems. Tracing out everything gives a 1×1 operator.
pub fn partial_trace(x: &HermitianOp, subsystems: &[usize]) -> Result<HermitianOp, LinalgError> {
    let shape = &x.shape;
    let mask = shape.check_subsystems(subsystems)?;
    let kept: Vec<usize> = (0..shape.len()).filter(|&j| !mask[j]).map(|j| shape.dims[j]).collect();
    let traced: Vec<usize> = (0..shape.len()).filter(|&j| mask[j]).map(|j| shape.dims[j]).collect();
    let out_shape = if kept.is_empty() { SystemShape::single(1) } else { SystemShape::new(kept).unwrap() };
    let tr_shape = if traced.is_empty() { SystemShape::single(1) } else { SystemShape::new(traced).unwrap() };
    let n_out = out_shape.total();
    let n_tr = tr_shape.total();
    // basis index for (kept digits, traced digits)
    let mut combined = vec![0usize; n_out * n_tr];
    for o in 0..n_out {
        let od = out_shape.digits(o);
        for t in 0..n_tr {
            let td = tr_shape.digits(t);
            let (mut io, mut it) = (0, 0);
            let digits: Vec<usize> = (0..shape.len())
                .map(|j| {
                    if mask[j] {
                        it += 1;
                        td[it - 1]
                    } else {
                        io += 1;
                        if od.len() >= io { od[io - 1] } else { 0 }
                    }
                })
                .collect();
            combined[o * n_tr + t] = shape.index(&digits);
        }
    }
    let mut mat = CMatrix::zeros(n_out, n_out);
    for r in 0..n_out {
        for c in 0..n_out {
            let mut acc = ZERO;
            for t in 0..n_tr {
                acc += x.mat[(combined[r * n_tr + t], combined[c * n_tr + t])];
            }
            mat[(r, c)] = acc;
        }
    }
    Ok(HermitianOp::from_matrix_unchecked(out_shape, mat))
}

/// Basis-index map of the partial transpose: `PT(X)[r, c] = X[map(r, c)]`.
pub fn partial_transpose_index(shape: &SystemShape, mask: &[bool], r: usize, c: usize) -> (usize, usize) {
    let mut rd = shape.digits(r);
    let mut cd = shape.digits(c);
    for j in 0..shape.len() {
        if mask[j] {
            std::mem::swap(&mut rd[j], &mut cd[j]);
        }
    }
    (shape.index(&rd), shape.index(&cd))
}

/// Transposes the listed 1-based tensor factors.
pub fn partial_transpose(x: &HermitianOp, subsystems: &[usize]) -> Result<HermitianOp, LinalgError> {
    let mask = x.shape.check_subsystems(subsystems)?;
    let n = x.dim();
    let mat = CMatrix::from_fn(n, n, |r, c| {
        let (i, j) = partial_transpose_index(&x.shape, &mask, r, c);
        x.mat[(i, j)]
    });
    Ok(HermitianOp { shape: x.shape.clone(), mat })
}

/// Validates subsystem indices against a shape and returns the membership mask.
pub fn subsystem_mask(shape: &SystemShape, subsystems: &[usize]) -> Result<Vec<bool>, LinalgError> {
    shape.check_subsystems(subsystems)
}

/// Basis permutation of `U_σ` on `k` copies of dimension `d`: `U|x⟩ = |map[x]⟩`.
pub fn permutation_index_map(k: usize, d: usize, sigma: &Permutation) -> Vec<usize> {
    let shape = SystemShape::new(vec![d.max(1); k.max(1)]).unwrap();
    (0..shape.total()).map(|x| shape.index(&sigma.permute(&shape.digits(x)))).collect()
}

/// `U_σ |i_1…i_k⟩ = |i_{σ⁻¹(1)}…i_{σ⁻¹(k)}⟩`, so `U_σ U_π = U_{σ∘π}`.
pub fn permutation_unitary(k: usize, d: usize, sigma: &Permutation) -> Result<CMatrix, LinalgError> {
    if sigma.len() != k {
        return Err(LinalgError::InvalidPermutation(sigma.images.clone()));
    }
    let map = permutation_index_map(k, d, sigma);
    let n = map.len();
    let mut u = CMatrix::zeros(n, n);
    for (x, &y) in map.iter().enumerate() {
        u[(y, x)] = ONE;
    }
    Ok(u)
}

/// `[[Re X, -Im X], [Im X, Re X]]`.
pub fn real_embedding(x: &HermitianOp) -> DMatrix<f64> {
    let n = x.dim();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = x.mat[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverts [`real_embedding`] by averaging the redundant blocks.
pub fn from_real_embedding(shape: SystemShape, y: &DMatrix<f64>) -> Result<HermitianOp, LinalgError> {
    let n = shape.total();
    if y.nrows() != 2 * n || y.ncols() != 2 * n {
        return Err(LinalgError::DimensionMismatch { rows: y.nrows(), cols: y.ncols(), total: 2 * n });
    }
    let mat = CMatrix::from_fn(n, n, |r, c| {
        let re = 0.5 * (y[(r, c)] + y[(r + n, c + n)]);
        let im = 0.5 * (y[(r + n, c)] - y[(r, c + n)]);
        C64::new(re, im)
    });
    Ok(HermitianOp::from_matrix_unchecked(shape, mat))
}

/// `λ_min(x) ≥ -tol · max(1, ‖x‖_∞)`.
pub fn is_psd(x: &HermitianOp, tol: f64) -> bool {
    x.min_eigenvalue() >= -tol * x.norm_inf().max(1.0)
}

/// Every element PSD and the elements sum to the identity within `tol`.
pub fn is_povm(ops: &[HermitianOp], tol: f64) -> Result<bool, LinalgError> {
    let first = ops.first().ok_or(LinalgError::Empty)?;
    let n = first.dim();
    let mut sum = CMatrix::zeros(n, n);
    for op in ops {
        if op.dim() != n {
            return Err(LinalgError::ShapeMismatch);
        }
        if !is_psd(op, tol) {
            return Ok(false);
        }
        sum += &op.mat;
    }
    let id = HermitianOp::identity(first.shape.clone());
    let dev = HermitianOp::from_matrix_unchecked(first.shape.clone(), sum - id.mat);
    Ok(dev.norm_op() <= tol)
}

pub fn pauli_x() -> HermitianOp {
    HermitianOp::new(
        SystemShape::single(2),
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
    )
    .unwrap()
}

pub fn pauli_y() -> HermitianOp {
    let i = C64::new(0.0, 1.0);
    HermitianOp::new(SystemShape::single(2), CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])).unwrap()
}

pub fn pauli_z() -> HermitianOp {
    HermitianOp::new(
        SystemShape::single(2),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    )
    .unwrap()
}

/// `n_x σ_x + n_y σ_y + n_z σ_z`.
pub fn bloch_observable(n: [f64; 3]) -> HermitianOp {
    pauli_x().scale(n[0]).add(&pauli_y().scale(n[1])).unwrap().add(&pauli_z().scale(n[2])).unwrap()
}

/// Computational basis vector `|i⟩` in dimension `d`.
pub fn basis_ket(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = ONE;
    v
}
