//! Feasibility checks for hierarchy certificate arrays.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::SolveReport;
use crate::ensemble::{matrix_from_json, matrix_to_json, MatrixJson, StateEnsemble};
use crate::hierarchy::{index_tuples, Direction, LiftedProgram, Variant};
use crate::linalg::{
    partial_trace, partial_transpose, permutation_unitary, tensor, tensor_all, HermitianOp, Permutation, SystemShape,
};
use crate::seesaw::{NonAdaptiveStrategy, OneRoundStrategy};

pub use crate::analytic::{
    analytic_p_succ_ab, analytic_p_succ_ba, analytic_strategy_ab, analytic_strategy_ba, bob_direction_ab,
    conditional_state,
};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("certificate schema error: {0}")]
    Schema(String),
    #[error("index set incomplete: missing {0}")]
    Incomplete(String),
    #[error("certificate is for the {found} hierarchy, expected {expected}")]
    WrongVariant { found: &'static str, expected: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Certificate array `R^{key}` with 0-based keys `(a⃗, λ, b)` or `(a⃗, b⃗)`.
#[derive(Clone, Debug)]
pub struct CertificateArray {
    pub variant: Variant,
    pub direction: Direction,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub entries: BTreeMap<Vec<usize>, HermitianOp>,
}

pub type CertificateArray1R = CertificateArray;
pub type CertificateArrayNA = CertificateArray;

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::OneRound => "1r",
        Variant::NonAdaptive => "na",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// Smallest `λ_min / max(1, ‖R‖_∞)` over all blocks.
    pub psd_min_eig: f64,
    /// Same for the partial transpose on the first `ℓ` copies, `ℓ = 1..k`.
    pub ppt_min_eig: Vec<f64>,
    pub marginal_a: f64,
    pub marginal_b: f64,
    pub symmetry: f64,
    pub normalization: f64,
    pub reconstruction: Option<f64>,
    /// `‖Σ_λ M^λ - 1‖` of the assembled measurement.
    pub completeness: f64,
    /// Success probability of the assembled measurement, when an ensemble is given.
    pub value: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn finish(mut self) -> Self {
        let tol = self.tol;
        let eig_ok = self.psd_min_eig >= -tol && self.ppt_min_eig.iter().all(|&v| v >= -tol);
        let eq_ok = [self.marginal_a, self.marginal_b, self.symmetry, self.normalization, self.completeness]
            .iter()
            .all(|&r| r <= tol)
            && self.reconstruction.is_none_or(|r| r <= tol);
        self.pass = eig_ok && eq_ok;
        self
    }

    /// Same residuals judged at another tolerance.
    pub fn at_tol(&self, tol: f64) -> Self {
        Self { tol, ..self.clone() }.finish()
    }
}

fn rel_min_eig(x: &HermitianOp) -> f64 {
    x.min_eigenvalue() / x.norm_inf().max(1.0)
}

fn sum_ops<'a>(ops: impl IntoIterator<Item = &'a HermitianOp>, shape: &SystemShape) -> HermitianOp {
    let mut acc = HermitianOp::zeros(shape.clone());
    for o in ops {
        acc = acc.add(o).unwrap();
    }
    acc
}

impl CertificateArray {
    pub fn block_shape(&self) -> SystemShape {
        SystemShape::copies_then(self.d_a, self.k, self.d_b)
    }

    fn all_keys(&self) -> Vec<Vec<usize>> {
        let tails: Vec<Vec<usize>> = match self.variant {
            Variant::OneRound => (0..self.n).flat_map(|l| (0..self.m).map(move |b| vec![l, b])).collect(),
            Variant::NonAdaptive => index_tuples(self.n, self.m),
        };
        index_tuples(self.m, self.k)
            .into_iter()
            .flat_map(|a| {
                tails.iter().map(move |t| {
                    let mut key = a.clone();
                    key.extend_from_slice(t);
                    key
                })
            })
            .collect()
    }

    pub fn format_key(&self, key: &[usize]) -> String {
        let one = |xs: &[usize]| xs.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",");
        match self.variant {
            Variant::OneRound => format!("a=({}) λ={} b={}", one(&key[..self.k]), key[self.k] + 1, key[self.k + 1] + 1),
            Variant::NonAdaptive => format!("a=({}) b=({})", one(&key[..self.k]), one(&key[self.k..])),
        }
    }

    /// Fills missing keys from copy-permuted present keys, `R^{σ·I} = U_σ R^I U_σ†`.
    pub fn expanded(&self) -> Result<CertificateArray, CertifyError> {
        let mut out = self.clone();
        let sigmas = Permutation::all(self.k);
        let units: Vec<_> = sigmas
            .iter()
            .map(|s| {
                let u = permutation_unitary(self.k, self.d_a, s).unwrap();
                u.kronecker(&crate::linalg::CMatrix::identity(self.d_b, self.d_b))
            })
            .collect();
        for key in self.all_keys() {
            if out.entries.contains_key(&key) {
                continue;
            }
            let mut found = None;
            for (s, u) in sigmas.iter().zip(&units) {
                // key = σ·I with I = σ⁻¹·key
                let mut src = s.inverse().permute(&key[..self.k]);
                src.extend_from_slice(&key[self.k..]);
                if let Some(r) = self.entries.get(&src) {
                    found = Some(r.conjugate(u));
                    break;
                }
            }
            match found {
                Some(r) => {
                    out.entries.insert(key, r);
                }
                None => return Err(CertifyError::Incomplete(self.format_key(&key))),
            }
        }
        Ok(out)
    }

    /// `M^λ` assembled from the array.
    pub fn assemble_measurement(&self) -> Vec<HermitianOp> {
        let traced: Vec<usize> = (1..self.k).collect();
        let local = SystemShape::new(vec![self.d_a, self.d_b]).unwrap();
        let norm = 1.0 / (self.d_a.pow(self.k as u32 - 1)) as f64;
        let mut ms = vec![HermitianOp::zeros(local.clone()); self.n];
        for (key, r) in &self.entries {
            let a_k = key[self.k - 1];
            let lambda = match self.variant {
                Variant::OneRound => {
                    if key[self.k + 1] != a_k {
                        continue;
                    }
                    key[self.k]
                }
                Variant::NonAdaptive => key[self.k + a_k],
            };
            let red = if traced.is_empty() { r.clone() } else { partial_trace(r, &traced).unwrap() };
            let red = red.with_shape(local.clone()).unwrap();
            ms[lambda] = ms[lambda].add(&red.scale(norm)).unwrap();
        }
        ms
    }

    fn check(&self, expected: Variant, claimed: Option<&[HermitianOp]>, e: Option<&StateEnsemble>, tol: f64) -> Result<ResidualReport, CertifyError> {
        if self.variant != expected {
            return Err(CertifyError::WrongVariant { found: variant_name(self.variant), expected: variant_name(expected) });
        }
        let dim = self.block_shape().total();
        for (key, r) in &self.entries {
            if r.dim() != dim {
                return Err(CertifyError::Schema(format!("block {} has dimension {}, expected {dim}", self.format_key(key), r.dim())));
            }
        }
        let c = self.expanded()?;
        let shape = c.block_shape();
        let entries: BTreeMap<Vec<usize>, HermitianOp> =
            c.entries.iter().map(|(k, v)| (k.clone(), v.clone().with_shape(shape.clone()).unwrap())).collect();
        let (k, m, n, d_a, d_b) = (c.k, c.m, c.n, c.d_a, c.d_b);

        let psd_min_eig = entries.values().map(rel_min_eig).fold(f64::INFINITY, f64::min);
        let ppt_min_eig: Vec<f64> = (1..=k)
            .map(|l| {
                let subs: Vec<usize> = (1..=l).collect();
                entries.values().map(|r| rel_min_eig(&partial_transpose(r, &subs).unwrap())).fold(f64::INFINITY, f64::min)
            })
            .collect();

        // Σ_{a1} R = 1/d_A ⊗ Σ_{a1} Tr_{A1} R
        let id_a = HermitianOp::identity(SystemShape::single(d_a)).scale(1.0 / d_a as f64);
        let mut marginal_a: f64 = 0.0;
        for key in entries.keys().filter(|key| key[0] == 0) {
            let group: Vec<&HermitianOp> = (0..m)
                .map(|a1| {
                    let mut kk = key.clone();
                    kk[0] = a1;
                    &entries[&kk]
                })
                .collect();
            let s = sum_ops(group, &shape);
            let rhs = tensor(&id_a, &partial_trace(&s, &[1]).unwrap()).with_shape(shape.clone()).unwrap();
            marginal_a = marginal_a.max(s.sub(&rhs).unwrap().norm_op());
        }

        let id_b = HermitianOp::identity(SystemShape::single(d_b));
        let mut marginal_b: f64 = 0.0;
        let mut normalization: f64 = 0.0;
        let total = (d_a.pow(k as u32) * d_b) as f64;
        let a_tuples = index_tuples(m, k);
        match c.variant {
            Variant::OneRound => {
                for a in &a_tuples {
                    let get = |l: usize, b: usize| {
                        let mut kk = a.clone();
                        kk.push(l);
                        kk.push(b);
                        &entries[&kk]
                    };
                    let all = sum_ops((0..n).flat_map(|l| (0..m).map(move |b| (l, b))).map(|(l, b)| get(l, b)), &shape);
                    let tb = partial_trace(&all, &[k + 1]).unwrap();
                    let rhs = tensor(&tb, &id_b).scale(1.0 / (m * d_b) as f64).with_shape(shape.clone()).unwrap();
                    for b in 0..m {
                        let lhs = sum_ops((0..n).map(|l| get(l, b)), &shape);
                        marginal_b = marginal_b.max(lhs.sub(&rhs).unwrap().norm_op());
                    }
                }
                for b in 0..m {
                    let t: f64 = entries.iter().filter(|(key, _)| key[k + 1] == b).map(|(_, r)| r.trace()).sum();
                    normalization = normalization.max((t - total).abs());
                }
            }
            Variant::NonAdaptive => {
                for a in &a_tuples {
                    let all = sum_ops(entries.iter().filter(|(key, _)| key[..k] == a[..]).map(|(_, r)| r), &shape);
                    let tb = partial_trace(&all, &[k + 1]).unwrap();
                    let rhs = tensor(&tb, &id_b).scale(1.0 / d_b as f64).with_shape(shape.clone()).unwrap();
                    marginal_b = marginal_b.max(all.sub(&rhs).unwrap().norm_op());
                }
                let t: f64 = entries.values().map(|r| r.trace()).sum();
                normalization = (t - total).abs();
            }
        }

        let mut symmetry: f64 = 0.0;
        for s in Permutation::all(k).iter().filter(|s| !s.is_identity()) {
            let u = permutation_unitary(k, d_a, s).unwrap().kronecker(&crate::linalg::CMatrix::identity(d_b, d_b));
            for (key, r) in &entries {
                let mut moved = s.permute(&key[..k]);
                moved.extend_from_slice(&key[k..]);
                let diff = r.conjugate(&u).sub(&entries[&moved]).unwrap();
                symmetry = symmetry.max(diff.norm_op());
            }
        }

        let assembled = c.assemble_measurement();
        let local = SystemShape::new(vec![d_a, d_b]).unwrap();
        let completeness = sum_ops(&assembled, &local).sub(&HermitianOp::identity(local.clone())).unwrap().norm_op();
        let reconstruction = claimed.map(|ms| {
            assembled
                .iter()
                .zip(ms)
                .map(|(a, b)| a.sub(b).map(|d| d.norm_op()).unwrap_or(f64::INFINITY))
                .fold(if ms.len() == assembled.len() { 0.0 } else { f64::INFINITY }, f64::max)
        });
        let value = e.map(|e| {
            let o = c.direction.orient(e);
            o.priors().iter().zip(o.states()).zip(&assembled).map(|((p, rho), m)| p * m.inner(rho)).sum()
        });
        Ok(ResidualReport {
            psd_min_eig,
            ppt_min_eig,
            marginal_a,
            marginal_b,
            symmetry,
            normalization,
            reconstruction,
            completeness,
            value,
            tol,
            pass: false,
        }
        .finish())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&CertificateFile::from_array(self)).unwrap()
    }

    pub fn from_json_str(s: &str) -> Result<Self, CertifyError> {
        let f: CertificateFile = serde_json::from_str(s).map_err(|e| CertifyError::Schema(e.to_string()))?;
        f.into_array()
    }
}

/// Checks every constraint family of the one-round hierarchy.
pub fn check_1r_certificate(
    c: &CertificateArray1R,
    claimed: Option<&[HermitianOp]>,
    e: Option<&StateEnsemble>,
    tol: f64,
) -> Result<ResidualReport, CertifyError> {
    c.check(Variant::OneRound, claimed, e, tol)
}

/// Checks every constraint family of the non-adaptive hierarchy.
pub fn check_na_certificate(
    c: &CertificateArrayNA,
    claimed: Option<&[HermitianOp]>,
    e: Option<&StateEnsemble>,
    tol: f64,
) -> Result<ResidualReport, CertifyError> {
    c.check(Variant::NonAdaptive, claimed, e, tol)
}

/// `R^{a⃗λb} = A^{a_1} ⊗ … ⊗ A^{a_k} ⊗ B^{λ|b}`.
pub fn certificate_from_oneround(s: &OneRoundStrategy, k: usize) -> CertificateArray1R {
    let m = s.alice.len();
    let n = s.bob[0].len();
    let (d_a, d_b) = (s.alice[0].dim(), s.bob[0][0].dim());
    let mut entries = BTreeMap::new();
    for a in index_tuples(m, k) {
        let mut factors: Vec<&HermitianOp> = a.iter().map(|&x| &s.alice[x]).collect();
        let prefix = tensor_all(&factors).unwrap();
        factors.clear();
        for l in 0..n {
            for b in 0..m {
                let mut key = a.clone();
                key.push(l);
                key.push(b);
                entries.insert(key, tensor(&prefix, &s.bob[b][l]));
            }
        }
    }
    CertificateArray { variant: Variant::OneRound, direction: s.direction, m, k, n, d_a, d_b, entries }
}

/// `R^{a⃗b⃗} = A^{a_1} ⊗ … ⊗ A^{a_k} ⊗ S^{b⃗}` with the parent POVM `S`.
pub fn certificate_from_nonadaptive(s: &NonAdaptiveStrategy, k: usize) -> CertificateArrayNA {
    let m = s.alice.len();
    let n = s.post[0][0].len();
    let (d_a, d_b) = (s.alice[0].dim(), s.bob[0].dim());
    let parent = s.parent_povm();
    let mut entries = BTreeMap::new();
    for a in index_tuples(m, k) {
        let factors: Vec<&HermitianOp> = a.iter().map(|&x| &s.alice[x]).collect();
        let prefix = tensor_all(&factors).unwrap();
        for (bv, sb) in &parent {
            let mut key = a.clone();
            key.extend_from_slice(bv);
            entries.insert(key, tensor(&prefix, sb));
        }
    }
    CertificateArray { variant: Variant::NonAdaptive, direction: s.direction, m, k, n, d_a, d_b, entries }
}

/// `R^{a⃗λb} = Σ_{b⃗} δ_{b_b, λ} R^{a⃗b⃗}`.
pub fn contract_na_to_1r(c: &CertificateArrayNA) -> Result<CertificateArray1R, CertifyError> {
    if c.variant != Variant::NonAdaptive {
        return Err(CertifyError::WrongVariant { found: variant_name(c.variant), expected: "na" });
    }
    let full = c.expanded()?;
    let shape = c.block_shape();
    let mut entries = BTreeMap::new();
    for a in index_tuples(c.m, c.k) {
        for l in 0..c.n {
            for b in 0..c.m {
                let acc = sum_ops(
                    full.entries.iter().filter(|(key, _)| key[..c.k] == a[..] && key[c.k + b] == l).map(|(_, r)| r),
                    &shape,
                );
                let mut key = a.clone();
                key.push(l);
                key.push(b);
                entries.insert(key, acc);
            }
        }
    }
    Ok(CertificateArray { variant: Variant::OneRound, entries, ..c.clone() })
}

/// Full certificate array from a solved hierarchy program.
pub fn certificate_from_solution(lp: &LiftedProgram, report: &SolveReport, direction: Direction) -> CertificateArray {
    let entries = lp.expand(report).into_iter().collect();
    CertificateArray { variant: lp.variant, direction, m: lp.m, k: lp.k, n: lp.n, d_a: lp.d_a, d_b: lp.d_b, entries }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryJson {
    a: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<usize>,
    b: BVal,
    op: MatrixJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BVal {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateFile {
    variant: String,
    #[serde(default)]
    direction: Direction,
    m: usize,
    k: usize,
    n: usize,
    #[serde(rename = "d_A")]
    d_a: usize,
    #[serde(rename = "d_B")]
    d_b: usize,
    entries: Vec<EntryJson>,
}

impl CertificateFile {
    fn from_array(c: &CertificateArray) -> Self {
        let one = |xs: &[usize]| xs.iter().map(|x| x + 1).collect::<Vec<_>>();
        let entries = c
            .entries
            .iter()
            .map(|(key, r)| match c.variant {
                Variant::OneRound => EntryJson {
                    a: one(&key[..c.k]),
                    lambda: Some(key[c.k] + 1),
                    b: BVal::One(key[c.k + 1] + 1),
                    op: matrix_to_json(r.matrix()),
                },
                Variant::NonAdaptive => EntryJson {
                    a: one(&key[..c.k]),
                    lambda: None,
                    b: BVal::Many(one(&key[c.k..])),
                    op: matrix_to_json(r.matrix()),
                },
            })
            .collect();
        Self { variant: variant_name(c.variant).into(), direction: c.direction, m: c.m, k: c.k, n: c.n, d_a: c.d_a, d_b: c.d_b, entries }
    }

    fn into_array(self) -> Result<CertificateArray, CertifyError> {
        let variant = match self.variant.as_str() {
            "1r" => Variant::OneRound,
            "na" => Variant::NonAdaptive,
            v => return Err(CertifyError::Schema(format!("unknown variant {v:?}"))),
        };
        if self.m == 0 || self.k == 0 || self.n == 0 || self.d_a == 0 || self.d_b == 0 {
            return Err(CertifyError::Schema("m, k, n, d_A, d_B must be positive".into()));
        }
        let shape = SystemShape::copies_then(self.d_a, self.k, self.d_b);
        let dim = shape.total();
        let label = |x: usize, max: usize, what: &str| {
            if x == 0 || x > max {
                Err(CertifyError::Schema(format!("{what} index {x} outside 1..={max}")))
            } else {
                Ok(x - 1)
            }
        };
        let mut entries = BTreeMap::new();
        for (i, e) in self.entries.into_iter().enumerate() {
            if e.a.len() != self.k {
                return Err(CertifyError::Schema(format!("entry {i}: a has length {}, expected {}", e.a.len(), self.k)));
            }
            let mut key = e.a.iter().map(|&x| label(x, self.m, "a")).collect::<Result<Vec<_>, _>>()?;
            match (variant, e.lambda, e.b) {
                (Variant::OneRound, Some(l), BVal::One(b)) => {
                    key.push(label(l, self.n, "lambda")?);
                    key.push(label(b, self.m, "b")?);
                }
                (Variant::NonAdaptive, None, BVal::Many(bs)) if bs.len() == self.m => {
                    for b in bs {
                        key.push(label(b, self.n, "b")?);
                    }
                }
                _ => return Err(CertifyError::Schema(format!("entry {i}: index does not match variant {}", self.variant))),
            }
            let mat = matrix_from_json(&e.op).map_err(|err| CertifyError::Schema(format!("entry {i}: {err}")))?;
            if mat.nrows() != dim {
                return Err(CertifyError::Schema(format!("entry {i}: operator dimension {} differs from {dim}", mat.nrows())));
            }
            let op = HermitianOp::new(shape.clone(), mat).map_err(|err| CertifyError::Schema(format!("entry {i}: {err}")))?;
            if entries.insert(key, op).is_some() {
                return Err(CertifyError::Schema(format!("entry {i}: duplicate index")));
            }
        }
        Ok(CertificateArray { variant, direction: self.direction, m: self.m, k: self.k, n: self.n, d_a: self.d_a, d_b: self.d_b, entries })
    }
}
