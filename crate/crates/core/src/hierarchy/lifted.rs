//! Constrained symmetric-extension programs for one-round and non-adaptive LOCC.

use crate::conic::{BlockHandle, ConicProgram, Field, ImageMap, Part, SolveReport, Term};
use crate::ensemble::StateEnsemble;
use crate::linalg::{HermitianOp, Permutation, SystemShape};

use super::symmetry::{Group, Orbits, SymmetryMode, Tail, FREE};
use super::{HierarchyError, HierarchyParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    OneRound,
    NonAdaptive,
}

/// A built hierarchy program together with its index bookkeeping.
pub struct LiftedProgram {
    pub program: ConicProgram,
    pub variant: Variant,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub(crate) orbits: Orbits,
    pub(crate) blocks: Vec<BlockHandle>,
}

/// All tuples in `[base]^len`, lexicographic.
pub fn tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

fn fmt_key(key: &[usize], k: usize, variant: Variant) -> String {
    let one = |xs: &[usize]| xs.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",");
    match variant {
        Variant::OneRound => format!("R[{};{};{}]", one(&key[..k]), key[k] + 1, key[k + 1] + 1),
        Variant::NonAdaptive => format!("R[{};{}]", one(&key[..k]), one(&key[k..])),
    }
}

/// Term buffer `(key id, row, col, coeff)` meaning `coeff · R^{key}[row, col]`.
type Terms = Vec<(usize, usize, usize, f64)>;

struct Assembler<'a> {
    program: &'a mut ConicProgram,
    orbits: &'a Orbits,
    blocks: &'a [BlockHandle],
    field: Field,
}

impl Assembler<'_> {
    fn part_terms(&self, terms: &Terms, part: Part) -> Vec<Term> {
        let mut out = Vec::with_capacity(terms.len());
        for &(key, r, c, coeff) in terms {
            let (rep, i, j) = self.orbits.locate(key, r, c);
            let e = self.program.entry_params(self.blocks[rep], i, j);
            let t = match part {
                Part::Re => e.re,
                Part::Im => e.im,
            };
            if let Some(t) = t {
                out.push(Term { param: t.param, coeff: coeff * t.coeff });
            }
        }
        out
    }

    /// Emits the Hermitian operator equation `Σ terms(r, c) = rhs(r, c)` entrywise.
    fn operator_equation(&mut self, dim: usize, mut fill: impl FnMut(usize, usize, &mut Terms), rhs: impl Fn(usize, usize) -> f64) {
        let mut terms = Terms::new();
        for r in 0..dim {
            for c in r..dim {
                terms.clear();
                fill(r, c, &mut terms);
                let re = self.part_terms(&terms, Part::Re);
                self.program.push_equality(re, rhs(r, c));
                if r != c && self.field == Field::Complex {
                    let im = self.part_terms(&terms, Part::Im);
                    self.program.push_equality(im, 0.0);
                }
            }
        }
    }
}

pub fn build_lifted(e: &StateEnsemble, variant: Variant, p: &HierarchyParams) -> Result<LiftedProgram, HierarchyError> {
    let (d_a, d_b, n) = (e.d_a(), e.d_b(), e.len());
    let (m, k) = (p.m, p.k);
    if m == 0 || k == 0 {
        return Err(HierarchyError::InvalidParams(format!("m = {m}, k = {k}; both must be at least 1")));
    }
    let dim = d_a.pow(k as u32) * d_b;
    let shape = SystemShape::copies_then(d_a, k, d_b);
    let (tail, keys) = match variant {
        Variant::OneRound => {
            let keys: Vec<Vec<usize>> = tuples(m, k)
                .into_iter()
                .flat_map(|a| {
                    (0..n).flat_map(move |l| {
                        let a = a.clone();
                        (0..m).map(move |b| {
                            let mut key = a.clone();
                            key.push(l);
                            key.push(b);
                            key
                        })
                    })
                })
                .collect();
            (Tail::OneRound, keys)
        }
        Variant::NonAdaptive => {
            let bs = tuples(n, m);
            let keys: Vec<Vec<usize>> = tuples(m, k)
                .into_iter()
                .flat_map(|a| {
                    bs.iter().map(move |b| {
                        let mut key = a.clone();
                        key.extend_from_slice(b);
                        key
                    })
                })
                .collect();
            (Tail::NonAdaptive, keys)
        }
    };
    let n_keys = keys.len();
    let group = Group::new(p.symmetry, k, m, tail);
    let orbits = Orbits::new(group, keys, d_a, k, d_b);

    let ppt: Vec<Vec<Vec<usize>>> = (0..orbits.reps.len()).map(|r| orbits.ppt_subsets(r, k)).collect();
    let estimate: usize = ppt.iter().map(|s| (1 + s.len()) * (2 * dim).pow(2)).sum();
    if estimate > p.size_cap {
        return Err(HierarchyError::TooLarge { estimate, cap: p.size_cap });
    }
    let field = p.field.unwrap_or(if e.is_real() { Field::Real } else { Field::Complex });

    let mut program = ConicProgram::new();
    let mut blocks = Vec::with_capacity(orbits.reps.len());
    for (r, &rid) in orbits.reps.iter().enumerate() {
        let maps: Vec<Vec<usize>> = orbits.stabilizer[r]
            .iter()
            .filter(|&&s| !orbits.group.sigmas[s].is_identity())
            .map(|&s| orbits.fwd[s].clone())
            .collect();
        let label = fmt_key(&orbits.keys[rid], k, variant);
        blocks.push(program.add_structured_block(&label, shape.clone(), field, &maps)?);
    }
    for (r, sets) in ppt.iter().enumerate() {
        for s in sets {
            let subsystems: Vec<usize> = s.iter().map(|j| j + 1).collect();
            program.add_psd_image(blocks[r], &ImageMap::PartialTranspose(subsystems))?;
        }
    }

    let key_id = |key: &[usize]| orbits.key_index[key];
    let mut asm = Assembler { program: &mut program, orbits: &orbits, blocks: &blocks, field };
    let stride = dim / d_a;
    let tail_len = orbits.keys[0].len() - k;

    // first-copy marginal: Σ_{a_1} R = 1/d_A ⊗ Σ_{a_1} Tr_{A_1} R
    let free_first: Vec<Vec<usize>> = (0..n_keys)
        .map(|i| {
            let mut key = orbits.keys[i].clone();
            key[0] = FREE;
            key
        })
        .collect();
    let fix_first = |s: &Permutation| s.apply(0) == 0;
    for j in orbits.constraint_reps(free_first, fix_first) {
        let ids: Vec<usize> = (0..m)
            .map(|a1| {
                let mut key = j.clone();
                key[0] = a1;
                key_id(&key)
            })
            .collect();
        asm.operator_equation(
            dim,
            |r, c, t| {
                let (r1, rr, c1, cr) = (r / stride, r % stride, c / stride, c % stride);
                for &id in &ids {
                    t.push((id, r, c, 1.0));
                    if r1 == c1 {
                        for x in 0..d_a {
                            t.push((id, x * stride + rr, x * stride + cr, -1.0 / d_a as f64));
                        }
                    }
                }
            },
            |_, _| 0.0,
        );
    }

    // B-side marginal
    match variant {
        Variant::OneRound => {
            let keys = (0..n_keys).map(|i| {
                let mut key = orbits.keys[i].clone();
                key[k] = FREE;
                key
            });
            for j in orbits.constraint_reps(keys, |_| true) {
                let b = j[k + 1];
                let with = |l: usize, b: usize| {
                    let mut key = j.clone();
                    key[k] = l;
                    key[k + 1] = b;
                    key_id(&key)
                };
                let lhs: Vec<usize> = (0..n).map(|l| with(l, b)).collect();
                let all: Vec<usize> = (0..n).flat_map(|l| (0..m).map(move |b| (l, b))).map(|(l, b)| with(l, b)).collect();
                let w = -1.0 / (m * d_b) as f64;
                asm.operator_equation(
                    dim,
                    |r, c, t| {
                        for &id in &lhs {
                            t.push((id, r, c, 1.0));
                        }
                        if r % d_b == c % d_b {
                            let (x, y) = (r - r % d_b, c - c % d_b);
                            for &id in &all {
                                for g in 0..d_b {
                                    t.push((id, x + g, y + g, w));
                                }
                            }
                        }
                    },
                    |_, _| 0.0,
                );
            }
        }
        Variant::NonAdaptive => {
            let keys = (0..n_keys).map(|i| {
                let mut key = orbits.keys[i].clone();
                for x in &mut key[k..] {
                    *x = FREE;
                }
                key
            });
            let bs = tuples(n, tail_len);
            for j in orbits.constraint_reps(keys, |_| true) {
                let all: Vec<usize> = bs
                    .iter()
                    .map(|b| {
                        let mut key = j[..k].to_vec();
                        key.extend_from_slice(b);
                        key_id(&key)
                    })
                    .collect();
                let w = -1.0 / d_b as f64;
                asm.operator_equation(
                    dim,
                    |r, c, t| {
                        for &id in &all {
                            t.push((id, r, c, 1.0));
                        }
                        if r % d_b == c % d_b {
                            let (x, y) = (r - r % d_b, c - c % d_b);
                            for &id in &all {
                                for g in 0..d_b {
                                    t.push((id, x + g, y + g, w));
                                }
                            }
                        }
                    },
                    |_, _| 0.0,
                );
            }
        }
    }

    // explicit copy symmetry for the fully indexed program
    if p.symmetry == SymmetryMode::None {
        for j in 0..k.saturating_sub(1) {
            let sigma = Permutation::transposition(k, j, j + 1);
            let s_idx = orbits.group.sigmas.iter().position(|s| *s == sigma).unwrap();
            let inv = &orbits.inv[s_idx];
            for id in 0..n_keys {
                let key = &orbits.keys[id];
                let mut moved = sigma.permute(&key[..k]);
                moved.extend_from_slice(&key[k..]);
                let id2 = key_id(&moved);
                if id2 < id {
                    continue;
                }
                asm.operator_equation(
                    dim,
                    |r, c, t| {
                        t.push((id2, r, c, 1.0));
                        t.push((id, inv[r], inv[c], -1.0));
                    },
                    |_, _| 0.0,
                );
            }
        }
    }

    // normalization
    let total = (d_a.pow(k as u32) * d_b) as f64;
    let trace_terms = |ids: &[usize], asm: &Assembler| {
        let mut t = Terms::new();
        for &id in ids {
            for x in 0..dim {
                t.push((id, x, x, 1.0));
            }
        }
        asm.part_terms(&t, Part::Re)
    };
    match variant {
        Variant::OneRound => {
            let keys = (0..n_keys).map(|i| {
                let mut key = vec![FREE; k + 2];
                key[k + 1] = orbits.keys[i][k + 1];
                key
            });
            for j in orbits.constraint_reps(keys, |_| true) {
                let b = j[k + 1];
                let ids: Vec<usize> = (0..n_keys).filter(|&i| orbits.keys[i][k + 1] == b).collect();
                let terms = trace_terms(&ids, &asm);
                asm.program.push_equality(terms, total);
            }
        }
        Variant::NonAdaptive => {
            let ids: Vec<usize> = (0..n_keys).collect();
            let terms = trace_terms(&ids, &asm);
            asm.program.push_equality(terms, total);
        }
    }

    // objective Σ_λ p_λ Tr(ρ_λ M^λ)
    let local = d_a * d_b;
    let reps_a = dim / local;
    let norm = 1.0 / reps_a as f64;
    for id in 0..n_keys {
        let key = &orbits.keys[id];
        let a_k = key[k - 1];
        let lambda = match variant {
            Variant::OneRound => {
                if key[k + 1] != a_k {
                    continue;
                }
                key[k]
            }
            Variant::NonAdaptive => key[k + a_k],
        };
        let rho = e.states()[lambda].matrix();
        let w = e.priors()[lambda] * norm;
        let mut t = Terms::new();
        let mut ti = Terms::new();
        for s in 0..reps_a {
            for x in 0..local {
                for y in 0..local {
                    let q = rho[(y, x)];
                    let (r, c) = (s * local + x, s * local + y);
                    if q.re != 0.0 {
                        t.push((id, r, c, w * q.re));
                    }
                    if q.im != 0.0 && r != c {
                        ti.push((id, r, c, -w * q.im));
                    }
                }
            }
        }
        for term in asm.part_terms(&t, Part::Re).into_iter().chain(asm.part_terms(&ti, Part::Im)) {
            asm.program.add_objective_term(term);
        }
    }

    Ok(LiftedProgram { program, variant, m, k, n, d_a, d_b, orbits, blocks })
}

impl LiftedProgram {
    pub fn num_keys(&self) -> usize {
        self.orbits.keys.len()
    }

    /// 0-based keys of the full (unreduced) index set, in enumeration order.
    pub fn keys(&self) -> &[Vec<usize>] {
        &self.orbits.keys
    }

    /// Every block `R^{key}` of the full index set, expanded from representatives.
    pub fn expand(&self, report: &SolveReport) -> Vec<(Vec<usize>, HermitianOp)> {
        let reps: Vec<HermitianOp> = self.blocks.iter().map(|&b| self.program.block_value(report, b).unwrap()).collect();
        self.orbits
            .keys
            .iter()
            .enumerate()
            .map(|(id, key)| {
                let rep = &reps[self.orbits.rep_of[id]];
                let inv = &self.orbits.inv[self.orbits.sigma_of[id]];
                let n = rep.dim();
                let mat = crate::linalg::CMatrix::from_fn(n, n, |r, c| rep.matrix()[(inv[r], inv[c])]);
                (key.clone(), HermitianOp::from_matrix_unchecked(rep.shape().clone(), mat))
            })
            .collect()
    }

    /// Orbit representatives as 0-based keys with orbit sizes.
    pub fn representatives(&self) -> Vec<(Vec<usize>, usize)> {
        self.orbits
            .reps
            .iter()
            .zip(&self.orbits.orbit_size)
            .map(|(&id, &s)| (self.orbits.keys[id].clone(), s))
            .collect()
    }
}
