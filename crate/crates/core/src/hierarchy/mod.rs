//! Upper-bound programs: global, PPT, one-round and non-adaptive hierarchies.

mod lifted;
mod symmetry;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{ConicError, ConicProgram, EntryRef, Field, ImageMap, SolveReport, SolveStatus, SolverOptions};
use crate::ensemble::StateEnsemble;
use crate::linalg::HermitianOp;

pub use lifted::{build_lifted, tuples as index_tuples, LiftedProgram, Variant};
pub use symmetry::{orbit_representatives, SymmetryMode};

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("invalid hierarchy parameters: {0}")]
    InvalidParams(String),
    #[error("program too large: estimated {estimate} real PSD entries exceeds cap {cap}")]
    TooLarge { estimate: usize, cap: usize },
    #[error(transparent)]
    Conic(#[from] ConicError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[default]
    #[serde(rename = "ab")]
    AtoB,
    #[serde(rename = "ba")]
    BtoA,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::AtoB => "ab",
            Direction::BtoA => "ba",
        }
    }

    /// The ensemble as seen with the first-measuring party on the left.
    pub fn orient(self, e: &StateEnsemble) -> StateEnsemble {
        match self {
            Direction::AtoB => e.clone(),
            Direction::BtoA => e.swap_parties(),
        }
    }
}

pub const DEFAULT_SIZE_CAP: usize = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyParams {
    pub m: usize,
    pub k: usize,
    pub direction: Direction,
    #[serde(default)]
    pub symmetry: SymmetryMode,
    #[serde(default = "default_cap")]
    pub size_cap: usize,
    /// Forces real or complex blocks; by default real ensembles get real blocks.
    #[serde(skip)]
    pub field: Option<Field>,
}

fn default_cap() -> usize {
    DEFAULT_SIZE_CAP
}

impl HierarchyParams {
    pub fn new(m: usize, k: usize, direction: Direction) -> Self {
        Self { m, k, direction, symmetry: SymmetryMode::Full, size_cap: DEFAULT_SIZE_CAP, field: None }
    }

    pub fn with_symmetry(mut self, symmetry: SymmetryMode) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn with_size_cap(mut self, cap: usize) -> Self {
        self.size_cap = cap;
        self
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = Some(field);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Global,
    Ppt,
    Oneround,
    Nonadaptive,
    SeesawOneround,
    SeesawNonadaptive,
    Analytic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Global => "global",
            Method::Ppt => "ppt",
            Method::Oneround => "oneround",
            Method::Nonadaptive => "nonadaptive",
            Method::SeesawOneround => "seesaw_oneround",
            Method::SeesawNonadaptive => "seesaw_nonadaptive",
            Method::Analytic => "analytic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
    Analytic,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Analytic => "analytic",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub kind: BoundKind,
    pub method: Method,
    pub params: Option<HierarchyParams>,
    pub gap: f64,
    pub status: SolveStatus,
}

/// `d_A²`: extremal POVMs on `C^{d_A}` have at most this many nonzero elements.
pub fn saturation_cutoff(d_a: usize) -> usize {
    d_a * d_a
}

fn measurement_program(e: &StateEnsemble, ppt: bool) -> Result<ConicProgram, ConicError> {
    let mut p = ConicProgram::new();
    let shape = e.shape();
    let dim = shape.total();
    let field = if e.is_real() { Field::Real } else { Field::Complex };
    let blocks = (0..e.len())
        .map(|l| p.add_structured_block(&format!("M[{}]", l + 1), shape.clone(), field, &[]))
        .collect::<Result<Vec<_>, _>>()?;
    if ppt {
        for &b in &blocks {
            p.add_psd_image(b, &ImageMap::PartialTranspose(vec![1]))?;
        }
    }
    for r in 0..dim {
        for c in r..dim {
            let re: Vec<_> = blocks.iter().map(|&b| (EntryRef::re(b, r, c), 1.0)).collect();
            p.add_equality(&re, if r == c { 1.0 } else { 0.0 })?;
            if r != c && field == Field::Complex {
                let im: Vec<_> = blocks.iter().map(|&b| (EntryRef::im(b, r, c), 1.0)).collect();
                p.add_equality(&im, 0.0)?;
            }
        }
    }
    for (l, &b) in blocks.iter().enumerate() {
        p.add_objective(&trace_functional(b, &e.states()[l], e.priors()[l], field))?;
    }
    Ok(p)
}

/// `w · Tr(q X)` as a functional over block entries.
pub(crate) fn trace_functional(b: crate::conic::BlockHandle, q: &HermitianOp, w: f64, field: Field) -> Vec<(EntryRef, f64)> {
    let n = q.dim();
    let mut f = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let z = q.matrix()[(c, r)];
            if z.re != 0.0 {
                f.push((EntryRef::re(b, r, c), w * z.re));
            }
            if z.im != 0.0 && r != c && field == Field::Complex {
                f.push((EntryRef::im(b, r, c), -w * z.im));
            }
        }
    }
    f
}

/// Unrestricted minimum-error discrimination.
pub fn build_global_sdp(e: &StateEnsemble) -> Result<ConicProgram, HierarchyError> {
    Ok(measurement_program(e, false)?)
}

/// Discrimination with PPT measurement operators.
pub fn build_ppt_sdp(e: &StateEnsemble) -> Result<ConicProgram, HierarchyError> {
    Ok(measurement_program(e, true)?)
}

pub fn build_1r_sdp(e: &StateEnsemble, p: &HierarchyParams) -> Result<LiftedProgram, HierarchyError> {
    build_lifted(&p.direction.orient(e), Variant::OneRound, p)
}

pub fn build_na_sdp(e: &StateEnsemble, p: &HierarchyParams) -> Result<LiftedProgram, HierarchyError> {
    build_lifted(&p.direction.orient(e), Variant::NonAdaptive, p)
}

fn result(report: &SolveReport, method: Method, params: Option<HierarchyParams>) -> BoundResult {
    BoundResult {
        value: report.primal_value,
        kind: BoundKind::Upper,
        method,
        params,
        gap: report.gap,
        status: report.status,
    }
}

/// Builds and solves the program for `method`.
pub fn upper_bound(
    e: &StateEnsemble,
    method: Method,
    params: Option<&HierarchyParams>,
    opts: &SolverOptions,
) -> Result<BoundResult, HierarchyError> {
    let need = || params.cloned().ok_or_else(|| HierarchyError::InvalidParams(format!("{} needs m and k", method.as_str())));
    match method {
        Method::Global => Ok(result(&build_global_sdp(e)?.solve_with(opts)?, method, None)),
        Method::Ppt => Ok(result(&build_ppt_sdp(e)?.solve_with(opts)?, method, None)),
        Method::Oneround => {
            let p = need()?;
            let lp = build_1r_sdp(e, &p)?;
            Ok(result(&lp.program.solve_with(opts)?, method, Some(p)))
        }
        Method::Nonadaptive => {
            let p = need()?;
            let lp = build_na_sdp(e, &p)?;
            Ok(result(&lp.program.solve_with(opts)?, method, Some(p)))
        }
        _ => Err(HierarchyError::InvalidParams(format!("{} is not an upper-bound method", method.as_str()))),
    }
}
