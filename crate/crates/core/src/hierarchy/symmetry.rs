//! Orbits of certificate indices under copy permutations and message relabeling.
//!
//! An index is a key `(a_1, …, a_k, tail…)` with 0-based labels. A group
//! element `(σ, π)` sends copy `j` to copy `σ(j)` and relabels messages by
//! `π`; the corresponding blocks are related by `R^{g·key} = U_σ R^{key} U_σ†`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::linalg::{permutation_index_map, Permutation, SystemShape};

/// Placeholder for index positions that are summed over in a constraint family.
pub(crate) const FREE: usize = usize::MAX;

/// Which index symmetries the reduced program exploits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryMode {
    /// Copy permutations and message relabeling.
    #[default]
    Full,
    /// Copy permutations only.
    Copies,
    /// Fully indexed program with explicit permutation equalities.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Tail {
    /// `(λ, b)` with `b` a message label.
    OneRound,
    /// `b⃗ ∈ [n]^m` indexed by message label.
    NonAdaptive,
}

pub(crate) struct Group {
    k: usize,
    tail: Tail,
    elems: Vec<(usize, Permutation)>,
    pub sigmas: Vec<Permutation>,
}

fn relabel(pi: &Permutation, a: usize) -> usize {
    if a == FREE {
        FREE
    } else {
        pi.apply(a)
    }
}

impl Group {
    pub fn new(mode: SymmetryMode, k: usize, m: usize, tail: Tail) -> Self {
        let sigmas = Permutation::all(k);
        let pis = match mode {
            SymmetryMode::Full => Permutation::all(m),
            _ => vec![Permutation::identity(m)],
        };
        let n_sig = match mode {
            SymmetryMode::None => 1,
            _ => sigmas.len(),
        };
        let mut elems = Vec::new();
        for s in 0..n_sig {
            for pi in &pis {
                elems.push((s, pi.clone()));
            }
        }
        Self { k, tail, elems, sigmas }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn sigma_of(&self, g: usize) -> usize {
        self.elems[g].0
    }

    pub fn apply(&self, g: usize, key: &[usize]) -> Vec<usize> {
        let (s, pi) = &self.elems[g];
        let sigma = &self.sigmas[*s];
        let k = self.k;
        let mut out = vec![0; key.len()];
        for j in 0..k {
            out[sigma.apply(j)] = relabel(pi, key[j]);
        }
        match self.tail {
            Tail::OneRound => {
                out[k] = key[k];
                out[k + 1] = relabel(pi, key[k + 1]);
            }
            Tail::NonAdaptive => {
                for a in 0..key.len() - k {
                    out[k + pi.apply(a)] = key[k + a];
                }
            }
        }
        out
    }

    /// Lexicographically smallest image over elements accepted by `filter`,
    /// with the element that reaches it.
    pub fn canonical(&self, key: &[usize], filter: impl Fn(&Permutation) -> bool) -> (Vec<usize>, usize) {
        let mut best: Option<(Vec<usize>, usize)> = None;
        for g in 0..self.elems.len() {
            if !filter(&self.sigmas[self.elems[g].0]) {
                continue;
            }
            let img = self.apply(g, key);
            if best.as_ref().is_none_or(|(b, _)| img < *b) {
                best = Some((img, g));
            }
        }
        best.expect("group has an identity element")
    }
}

/// Orbit decomposition of the full index set.
pub(crate) struct Orbits {
    pub group: Group,
    pub keys: Vec<Vec<usize>>,
    pub key_index: HashMap<Vec<usize>, usize>,
    /// Representative number of each key.
    pub rep_of: Vec<usize>,
    /// `R^{key} = U_σ R^{rep} U_σ†` with `σ = sigmas[sigma_of[key]]`.
    pub sigma_of: Vec<usize>,
    /// Key id of each representative.
    pub reps: Vec<usize>,
    pub orbit_size: Vec<usize>,
    /// Distinct copy permutations fixing each representative.
    pub stabilizer: Vec<Vec<usize>>,
    /// Block-basis images `u_σ` (`U_σ|x⟩ = |u_σ(x)⟩`) and inverses.
    pub fwd: Vec<Vec<usize>>,
    pub inv: Vec<Vec<usize>>,
}

impl Orbits {
    pub fn new(group: Group, keys: Vec<Vec<usize>>, d_a: usize, k: usize, d_b: usize) -> Self {
        let key_index: HashMap<Vec<usize>, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let mut rep_num: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut reps = Vec::new();
        let mut rep_of = vec![0; keys.len()];
        let mut sigma_of = vec![0; keys.len()];
        let inverse_idx: Vec<usize> = group
            .sigmas
            .iter()
            .map(|s| {
                let inv = s.inverse();
                group.sigmas.iter().position(|t| *t == inv).unwrap()
            })
            .collect();
        for (id, key) in keys.iter().enumerate() {
            let (rep, g) = group.canonical(key, |_| true);
            let next = reps.len();
            let r = *rep_num.entry(rep.clone()).or_insert(next);
            if r == next {
                reps.push(key_index[&rep]);
            }
            rep_of[id] = r;
            sigma_of[id] = inverse_idx[group.sigma_of(g)];
        }
        let mut orbit_size = vec![0; reps.len()];
        for &r in &rep_of {
            orbit_size[r] += 1;
        }
        let stabilizer = reps
            .iter()
            .map(|&rid| {
                let key = &keys[rid];
                let mut s: Vec<usize> = (0..group.len())
                    .filter(|&g| group.apply(g, key) == *key)
                    .map(|g| group.sigma_of(g))
                    .collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        let shape = SystemShape::copies_then(d_a, k, d_b);
        let fwd: Vec<Vec<usize>> = group.sigmas.iter().map(|s| block_map(&shape, d_a, k, s)).collect();
        let inv: Vec<Vec<usize>> = group.sigmas.iter().map(|s| block_map(&shape, d_a, k, &s.inverse())).collect();
        Self { group, keys, key_index, rep_of, sigma_of, reps, orbit_size, stabilizer, fwd, inv }
    }

    /// `(rep, i, j)` such that `R^{key}[r, c] = R^{rep}[i, j]`.
    pub fn locate(&self, key_id: usize, r: usize, c: usize) -> (usize, usize, usize) {
        let inv = &self.inv[self.sigma_of[key_id]];
        (self.rep_of[key_id], inv[r], inv[c])
    }

    /// Representatives of `FREE`-padded constraint keys under group elements
    /// whose copy permutation satisfies `filter`.
    pub fn constraint_reps(
        &self,
        keys: impl IntoIterator<Item = Vec<usize>>,
        filter: impl Fn(&Permutation) -> bool + Copy,
    ) -> Vec<Vec<usize>> {
        let mut seen = std::collections::BTreeSet::new();
        for key in keys {
            seen.insert(self.group.canonical(&key, filter).0);
        }
        seen.into_iter().collect()
    }

    /// Copy subsets (0-based) whose partial transpose on the representative
    /// realizes the transposes on the first `ℓ` copies of every orbit member.
    pub fn ppt_subsets(&self, rep: usize, k: usize) -> Vec<Vec<usize>> {
        let mut sets = std::collections::BTreeSet::new();
        for g in 0..self.group.len() {
            // g·rep carries U_σ; PT on its first ℓ copies is PT on σ⁻¹([ℓ]) of rep
            let sigma = &self.group.sigmas[self.group.sigma_of(g)];
            for l in 1..=k {
                let mut s: Vec<usize> = (0..k).filter(|&j| sigma.apply(j) < l).collect();
                s.sort_unstable();
                let canon = self.stabilizer[rep]
                    .iter()
                    .map(|&t| {
                        let tau = &self.group.sigmas[t];
                        let mut img: Vec<usize> = s.iter().map(|&j| tau.apply(j)).collect();
                        img.sort_unstable();
                        img
                    })
                    .min()
                    .unwrap_or(s);
                sets.insert(canon);
            }
        }
        sets.into_iter().collect()
    }
}

/// Block-basis map of `U_σ ⊗ 1_B`.
fn block_map(shape: &SystemShape, d_a: usize, k: usize, sigma: &Permutation) -> Vec<usize> {
    let copies = permutation_index_map(k, d_a, sigma);
    let d_b = shape.dims()[k];
    (0..shape.total()).map(|x| copies[x / d_b] * d_b + x % d_b).collect()
}

/// Non-decreasing tuples in `{1..m}^k` with their multinomial orbit sizes.
pub fn orbit_representatives(m: usize, k: usize) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    let mut cur = vec![1usize; k];
    if m == 0 {
        return out;
    }
    loop {
        let mut counts = vec![0usize; m + 1];
        for &a in &cur {
            counts[a] += 1;
        }
        let size = counts.iter().fold(factorial(k), |acc, &c| acc / factorial(c));
        out.push((cur.clone(), size));
        // next non-decreasing tuple
        let Some(i) = (0..k).rev().find(|&i| cur[i] < m) else { break };
        let v = cur[i] + 1;
        for x in cur[i..].iter_mut() {
            *x = v;
        }
    }
    out
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}
