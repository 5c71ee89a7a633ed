//! PSD-cone programs over Hermitian block variables.
//!
//! A block may carry an invariance group of basis permutations; its entries
//! are then parametrized by the orbits of matrix positions, so symmetric
//! blocks cost fewer variables. All equalities and the objective are stored
//! over these real parameters.

mod admm;
mod interior;
mod presolve;

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{partial_transpose_index, subsystem_mask, C64, CMatrix, HermitianOp, SystemShape};

pub use admm::AdmmSettings;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("duplicate block label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown block {0:?}")]
    UnknownBlock(String),
    #[error("invalid entry ({row}, {col}) in block {block:?} of dimension {dim}")]
    InvalidEntry { block: String, row: usize, col: usize, dim: usize },
    #[error("imaginary part of diagonal entry {row} in block {block:?} is not addressable")]
    ImaginaryDiagonal { block: String, row: usize },
    #[error("unsupported image descriptor: {0}")]
    UnsupportedImage(String),
    #[error("block permutation has wrong length {found}, expected {dim}")]
    BadSymmetry { found: usize, dim: usize },
    #[error("program is empty")]
    Empty,
    #[error("program too large: estimated {estimate} real PSD entries exceeds cap {cap}")]
    TooLarge { estimate: usize, cap: usize },
    #[error("solver failure: {0}")]
    Solver(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Part {
    Re,
    Im,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockHandle(pub usize);

/// Real or imaginary part of `X[row, col]` of a block. Lower-triangle
/// positions resolve through Hermiticity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryRef {
    pub block: BlockHandle,
    pub row: usize,
    pub col: usize,
    pub part: Part,
}

impl EntryRef {
    pub fn re(block: BlockHandle, row: usize, col: usize) -> Self {
        Self { block, row, col, part: Part::Re }
    }

    pub fn im(block: BlockHandle, row: usize, col: usize) -> Self {
        Self { block, row, col, part: Part::Im }
    }
}

/// Structured linear maps whose image may be constrained PSD.
#[derive(Clone, Debug, PartialEq)]
pub enum ImageMap {
    /// Partial transpose on 1-based subsystems of the block's shape.
    PartialTranspose(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Term {
    pub param: usize,
    pub coeff: f64,
}

/// Entry value `X[r, c] = re + i·im` as signed references to parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct EntryParams {
    pub re: Option<Term>,
    pub im: Option<Term>,
}

#[derive(Clone, Debug)]
pub(crate) struct Cone {
    pub label: String,
    pub shape: SystemShape,
    pub field: Field,
    /// Row-major `dim × dim` map from entries to parameters.
    pub entries: Vec<EntryParams>,
    /// Source block for image cones.
    pub source: Option<usize>,
}

impl Cone {
    pub fn dim(&self) -> usize {
        self.shape.total()
    }

    pub fn at(&self, r: usize, c: usize) -> EntryParams {
        self.entries[r * self.dim() + c]
    }

    /// Size of the real symmetric matrix handed to a solver.
    pub fn real_dim(&self) -> usize {
        match self.field {
            Field::Real => self.dim(),
            Field::Complex => 2 * self.dim(),
        }
    }

    pub fn value(&self, params: &[f64]) -> HermitianOp {
        let n = self.dim();
        let mat = CMatrix::from_fn(n, n, |r, c| {
            let e = self.at(r, c);
            let re = e.re.map_or(0.0, |t| t.coeff * params[t.param]);
            let im = e.im.map_or(0.0, |t| t.coeff * params[t.param]);
            C64::new(re, im)
        });
        HermitianOp::from_matrix_unchecked(self.shape.clone(), mat)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Equality {
    pub terms: Vec<Term>,
    pub rhs: f64,
}

/// Maximization problem over PSD blocks with affine equalities.
#[derive(Clone, Debug, Default)]
pub struct ConicProgram {
    pub(crate) cones: Vec<Cone>,
    pub(crate) n_params: usize,
    pub(crate) equalities: Vec<Equality>,
    pub(crate) objective: Vec<f64>,
    pub(crate) objective_offset: f64,
    labels: HashMap<String, usize>,
    dedup: HashMap<Vec<(usize, i64)>, f64>,
    inconsistent: bool,
    n_blocks: usize,
    raw_equalities: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalTrouble,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub block_values: BTreeMap<String, HermitianOp>,
    pub iterations: u32,
    pub solve_time_s: f64,
    pub(crate) params: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// Interior point for moderate sizes, first-order splitting beyond.
    #[default]
    Auto,
    InteriorPoint,
    FirstOrder,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub eps: f64,
    pub backend: Backend,
    pub max_iters: u32,
    pub verbose: bool,
    pub admm: AdmmSettings,
    /// Estimated interior-point factorization size above which `Auto` switches backend.
    pub interior_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            backend: Backend::Auto,
            max_iters: 200,
            verbose: false,
            admm: AdmmSettings::default(),
            interior_limit: 4_000_000,
        }
    }
}

impl SolverOptions {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }
}

/// Union-find over matrix positions tracking conjugation parity.
struct ParityUnionFind {
    parent: Vec<usize>,
    parity: Vec<bool>,
    real: Vec<bool>,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), parity: vec![false; n], real: vec![false; n] }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        let mut path = Vec::new();
        let mut cur = x;
        while self.parent[cur] != cur {
            path.push(cur);
            cur = self.parent[cur];
        }
        let root = cur;
        // compress from the top so each parity is relative to the root
        let mut acc = false;
        for &node in path.iter().rev() {
            acc ^= self.parity[node];
            self.parity[node] = acc;
            self.parent[node] = root;
        }
        (root, if path.is_empty() { false } else { self.parity[x] })
    }

    fn union(&mut self, a: usize, b: usize, conj: bool) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            if pa ^ pb != conj {
                self.real[ra] = true;
            }
            return;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        self.parity[hi] = pa ^ pb ^ conj;
        self.real[lo] |= self.real[hi];
    }
}

fn canonical_key(terms: &[Term]) -> Vec<(usize, i64)> {
    terms.iter().map(|t| (t.param, (t.coeff * (1u64 << 36) as f64).round() as i64)).collect()
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an unstructured complex Hermitian block.
    pub fn add_psd_block(&mut self, label: &str, complex_dim: usize) -> Result<BlockHandle, ConicError> {
        self.add_structured_block(label, SystemShape::single(complex_dim), Field::Complex, &[])
    }

    /// Adds a block invariant under `X ↦ P X Pᵀ` for each basis permutation
    /// `maps[g]` (`P|x⟩ = |maps[g][x]⟩`). Real blocks are real symmetric.
    pub fn add_structured_block(
        &mut self,
        label: &str,
        shape: SystemShape,
        field: Field,
        maps: &[Vec<usize>],
    ) -> Result<BlockHandle, ConicError> {
        if self.labels.contains_key(label) {
            return Err(ConicError::DuplicateLabel(label.to_string()));
        }
        let n = shape.total();
        for m in maps {
            if m.len() != n {
                return Err(ConicError::BadSymmetry { found: m.len(), dim: n });
            }
        }
        let mut uf = ParityUnionFind::new(n * n);
        for r in 0..n {
            for c in r..n {
                uf.union(r * n + c, c * n + r, field == Field::Complex);
                for m in maps {
                    uf.union(r * n + c, m[r] * n + m[c], false);
                }
            }
        }
        let mut re_param: HashMap<usize, usize> = HashMap::new();
        let mut im_param: HashMap<usize, usize> = HashMap::new();
        let mut entries = vec![EntryParams::default(); n * n];
        for r in 0..n {
            for c in 0..n {
                let (root, parity) = uf.find(r * n + c);
                let next = self.n_params;
                let re = *re_param.entry(root).or_insert_with(|| next);
                if re == next {
                    self.n_params += 1;
                }
                let mut e = EntryParams { re: Some(Term { param: re, coeff: 1.0 }), im: None };
                if field == Field::Complex && !uf.real[root] {
                    let next = self.n_params;
                    let im = *im_param.entry(root).or_insert_with(|| next);
                    if im == next {
                        self.n_params += 1;
                    }
                    e.im = Some(Term { param: im, coeff: if parity { -1.0 } else { 1.0 } });
                }
                entries[r * n + c] = e;
            }
        }
        self.objective.resize(self.n_params, 0.0);
        let idx = self.cones.len();
        self.cones.push(Cone { label: label.to_string(), shape, field, entries, source: None });
        self.labels.insert(label.to_string(), idx);
        self.n_blocks += 1;
        Ok(BlockHandle(idx))
    }

    /// Constrains a structured image of a block to be PSD, realized as a
    /// labeled slack block tied to the source. The identity image adds nothing.
    pub fn add_psd_image(&mut self, block: BlockHandle, map: &ImageMap) -> Result<Option<BlockHandle>, ConicError> {
        let src = self.cone(block)?.clone();
        let ImageMap::PartialTranspose(subsystems) = map;
        let mask = subsystem_mask(&src.shape, subsystems).map_err(|e| ConicError::UnsupportedImage(e.to_string()))?;
        if !mask.iter().any(|&b| b) {
            return Ok(None);
        }
        let n = src.dim();
        let mut entries = vec![EntryParams::default(); n * n];
        for r in 0..n {
            for c in 0..n {
                let (i, j) = partial_transpose_index(&src.shape, &mask, r, c);
                entries[r * n + c] = src.at(i, j);
            }
        }
        let label = format!("{}^T{:?}", src.label, subsystems);
        if self.labels.contains_key(&label) {
            return Err(ConicError::DuplicateLabel(label));
        }
        let idx = self.cones.len();
        self.cones.push(Cone { label: label.clone(), shape: src.shape.clone(), field: src.field, entries, source: Some(block.0) });
        self.labels.insert(label, idx);
        Ok(Some(BlockHandle(idx)))
    }

    fn cone(&self, block: BlockHandle) -> Result<&Cone, ConicError> {
        self.cones.get(block.0).ok_or_else(|| ConicError::UnknownBlock(format!("#{}", block.0)))
    }

    pub fn block(&self, label: &str) -> Option<BlockHandle> {
        self.labels.get(label).map(|&i| BlockHandle(i))
    }

    pub fn block_label(&self, block: BlockHandle) -> Option<&str> {
        self.cones.get(block.0).map(|c| c.label.as_str())
    }

    pub fn block_dim(&self, block: BlockHandle) -> Option<usize> {
        self.cones.get(block.0).map(|c| c.dim())
    }

    /// Resolves an entry reference to a signed parameter (or zero).
    pub(crate) fn resolve(&self, e: EntryRef) -> Result<Option<Term>, ConicError> {
        let cone = self.cone(e.block)?;
        let n = cone.dim();
        if e.row >= n || e.col >= n {
            return Err(ConicError::InvalidEntry { block: cone.label.clone(), row: e.row, col: e.col, dim: n });
        }
        if e.part == Part::Im && e.row == e.col {
            return Err(ConicError::ImaginaryDiagonal { block: cone.label.clone(), row: e.row });
        }
        let ep = cone.at(e.row, e.col);
        Ok(match e.part {
            Part::Re => ep.re,
            Part::Im => ep.im,
        })
    }

    pub(crate) fn entry_params(&self, block: BlockHandle, r: usize, c: usize) -> EntryParams {
        self.cones[block.0].at(r, c)
    }

    fn to_terms(&self, functional: &[(EntryRef, f64)]) -> Result<Vec<Term>, ConicError> {
        let mut terms = Vec::with_capacity(functional.len());
        for &(e, coeff) in functional {
            if let Some(t) = self.resolve(e)? {
                terms.push(Term { param: t.param, coeff: coeff * t.coeff });
            }
        }
        Ok(terms)
    }

    /// Appends `Σ coeff · entry = rhs`, merging repeated references.
    pub fn add_equality(&mut self, functional: &[(EntryRef, f64)], rhs: f64) -> Result<(), ConicError> {
        let terms = self.to_terms(functional)?;
        self.push_equality(terms, rhs);
        Ok(())
    }

    pub(crate) fn push_equality(&mut self, mut terms: Vec<Term>, mut rhs: f64) {
        self.raw_equalities += 1;
        terms.sort_by_key(|t| t.param);
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.param == t.param => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        let scale = merged.iter().fold(0.0f64, |a, t| a.max(t.coeff.abs()));
        merged.retain(|t| t.coeff.abs() > 1e-13 * scale.max(1e-300));
        let Some(first) = merged.first().map(|t| t.coeff) else {
            if rhs.abs() > 1e-9 {
                self.inconsistent = true;
            }
            return;
        };
        for t in &mut merged {
            t.coeff /= first;
        }
        rhs /= first;
        let key = canonical_key(&merged);
        if let Some(&prev) = self.dedup.get(&key) {
            if (prev - rhs).abs() > 1e-9 * (1.0 + rhs.abs()) {
                self.inconsistent = true;
            }
            return;
        }
        self.dedup.insert(key, rhs);
        self.equalities.push(Equality { terms: merged, rhs });
    }

    /// Adds `Σ coeff · entry` to the maximized objective.
    pub fn add_objective(&mut self, functional: &[(EntryRef, f64)]) -> Result<(), ConicError> {
        for t in self.to_terms(functional)? {
            self.objective[t.param] += t.coeff;
        }
        Ok(())
    }

    pub(crate) fn add_objective_term(&mut self, t: Term) {
        self.objective[t.param] += t.coeff;
    }

    pub fn add_objective_constant(&mut self, c: f64) {
        self.objective_offset += c;
    }

    /// Number of variable blocks (excluding slack blocks of images).
    pub fn num_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn num_slack_blocks(&self) -> usize {
        self.cones.len() - self.n_blocks
    }

    pub fn num_equalities(&self) -> usize {
        self.equalities.len()
    }

    /// Equalities submitted before deduplication.
    pub fn num_raw_equalities(&self) -> usize {
        self.raw_equalities
    }

    pub fn num_params(&self) -> usize {
        self.n_params
    }

    pub fn block_labels(&self) -> Vec<&str> {
        self.cones.iter().filter(|c| c.source.is_none()).map(|c| c.label.as_str()).collect()
    }

    /// `Σ (2·dim)²` over all PSD blocks including slack blocks.
    pub fn size_estimate(&self) -> usize {
        self.cones.iter().map(|c| (2 * c.dim()).pow(2)).sum()
    }

    /// True if deduplication found two identical constraints with different right-hand sides.
    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    /// Interior-point workload proxy: dense parameter coupling inside each cone.
    pub fn interior_point_estimate(&self) -> usize {
        let mut per_block: HashMap<usize, usize> = HashMap::new();
        for (i, c) in self.cones.iter().enumerate() {
            let owner = c.source.unwrap_or(i);
            let svec = c.real_dim() * (c.real_dim() + 1) / 2;
            *per_block.entry(owner).or_default() += svec;
        }
        per_block.values().map(|s| s * s / 16).sum::<usize>() + self.equalities.iter().map(|e| e.terms.len()).sum::<usize>()
    }

    pub fn solve(&self, eps: f64) -> Result<SolveReport, ConicError> {
        self.solve_with(&SolverOptions::with_eps(eps))
    }

    pub fn solve_with(&self, opts: &SolverOptions) -> Result<SolveReport, ConicError> {
        if self.cones.is_empty() {
            return Err(ConicError::Empty);
        }
        let start = Instant::now();
        if self.inconsistent {
            return Ok(SolveReport {
                status: SolveStatus::Infeasible,
                primal_value: f64::NAN,
                dual_value: f64::NAN,
                gap: f64::NAN,
                block_values: BTreeMap::new(),
                iterations: 0,
                solve_time_s: 0.0,
                params: vec![0.0; self.n_params],
            });
        }
        let rows = match presolve::independent_rows(&self.equalities) {
            presolve::Rank::Independent(rows) => rows,
            presolve::Rank::Inconsistent => {
                return Ok(SolveReport {
                    status: SolveStatus::Infeasible,
                    primal_value: f64::NAN,
                    dual_value: f64::NAN,
                    gap: f64::NAN,
                    block_values: BTreeMap::new(),
                    iterations: 0,
                    solve_time_s: start.elapsed().as_secs_f64(),
                    params: vec![0.0; self.n_params],
                })
            }
        };
        let backend = match opts.backend {
            Backend::Auto if self.interior_point_estimate() > opts.interior_limit => Backend::FirstOrder,
            Backend::Auto => Backend::InteriorPoint,
            b => b,
        };
        let raw = match backend {
            Backend::FirstOrder => admm::solve(self, &rows, opts)?,
            _ => interior::solve(self, &rows, opts)?,
        };
        let mut status = raw.status;
        let gap = (raw.primal - raw.dual).abs();
        let gap_tol = match backend {
            Backend::FirstOrder => opts.eps.max(opts.admm.tol * (1.0 + raw.primal.abs() + raw.dual.abs())),
            _ => opts.eps,
        };
        if status == SolveStatus::Optimal && !(gap <= gap_tol) {
            status = SolveStatus::NumericalTrouble;
        }
        let block_values = if status == SolveStatus::Infeasible {
            BTreeMap::new()
        } else {
            self.cones.iter().map(|c| (c.label.clone(), c.value(&raw.params))).collect()
        };
        Ok(SolveReport {
            status,
            primal_value: raw.primal + self.objective_offset,
            dual_value: raw.dual + self.objective_offset,
            gap,
            block_values,
            iterations: raw.iterations,
            solve_time_s: start.elapsed().as_secs_f64(),
            params: raw.params,
        })
    }

    /// Value of a block for a parameter vector from a report.
    pub fn block_value(&self, report: &SolveReport, block: BlockHandle) -> Option<HermitianOp> {
        self.cones.get(block.0).map(|c| c.value(&report.params))
    }

    /// Self-describing JSON for debugging; not a stable format.
    pub fn to_json(&self) -> serde_json::Value {
        let blocks: Vec<_> = self
            .cones
            .iter()
            .map(|c| {
                serde_json::json!({
                    "label": c.label,
                    "dims": c.shape.dims(),
                    "field": c.field,
                    "image_of": c.source.map(|s| self.cones[s].label.clone()),
                    "entries": c.entries.iter().map(|e| [
                        e.re.map(|t| (t.param, t.coeff)),
                        e.im.map(|t| (t.param, t.coeff)),
                    ]).collect::<Vec<_>>(),
                })
            })
            .collect();
        let equalities: Vec<_> = self
            .equalities
            .iter()
            .map(|e| serde_json::json!({
                "terms": e.terms.iter().map(|t| (t.param, t.coeff)).collect::<Vec<_>>(),
                "rhs": e.rhs,
            }))
            .collect();
        serde_json::json!({
            "sense": "maximize",
            "num_params": self.n_params,
            "blocks": blocks,
            "equalities": equalities,
            "objective": self.objective.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect::<Vec<_>>(),
            "objective_offset": self.objective_offset,
        })
    }
}

/// Result of a backend run in parameter space.
pub(crate) struct RawSolution {
    pub status: SolveStatus,
    pub primal: f64,
    pub dual: f64,
    pub params: Vec<f64>,
    pub iterations: u32,
}

/// Rows of `svec(Y)` for the real symmetric matrix a solver sees: the
/// block itself for real cones, its real embedding for complex ones.
/// Each row is a list of `(param, coeff)`; off-diagonals carry `√2`.
pub(crate) fn svec_rows(cone: &Cone) -> Vec<Vec<Term>> {
    let n = cone.dim();
    let rd = cone.real_dim();
    let s2 = std::f64::consts::SQRT_2;
    let mut rows = Vec::with_capacity(rd * (rd + 1) / 2);
    for col in 0..rd {
        for row in 0..=col {
            let scale = if row == col { 1.0 } else { s2 };
            let (r, c) = (row % n, col % n);
            let e = cone.at(r, c);
            // [[Re, -Im], [Im, Re]]
            let term = match (row < n, col < n) {
                (true, true) | (false, false) => e.re,
                (true, false) => e.im.map(|t| Term { param: t.param, coeff: -t.coeff }),
                (false, true) => e.im,
            };
            rows.push(term.map(|t| vec![Term { param: t.param, coeff: t.coeff * scale }]).unwrap_or_default());
        }
    }
    rows
}
