//! Removal of linearly dependent equality rows.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::Equality;

const DROP: f64 = 1e-12;
const DEPENDENT: f64 = 1e-9;
const CONSISTENT: f64 = 1e-7;

pub(crate) enum Rank {
    /// Indices of a maximal independent subset of the rows.
    Independent(Vec<usize>),
    /// Some dependent row has a right-hand side not implied by the others.
    Inconsistent,
}

/// Incremental sparse elimination. Each kept row is reduced against the
/// pivots found before it, so eliminating pivots in order of discovery never
/// reintroduces an already-eliminated pivot.
pub(crate) fn independent_rows(eqs: &[Equality]) -> Rank {
    // pivot column -> (discovery order, reduced row, reduced rhs)
    let mut pivots: HashMap<usize, (usize, Vec<(usize, f64)>, f64)> = HashMap::new();
    let mut keep = Vec::new();
    for (i, eq) in eqs.iter().enumerate() {
        let mut row: HashMap<usize, f64> = eq.terms.iter().map(|t| (t.param, t.coeff)).collect();
        let mut rhs = eq.rhs;
        let scale = eq.terms.iter().fold(0.0f64, |a, t| a.max(t.coeff.abs())).max(1e-300);
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            row.keys().filter_map(|c| pivots.get(c).map(|p| Reverse((p.0, *c)))).collect();
        while let Some(Reverse((_, col))) = heap.pop() {
            let Some(&v) = row.get(&col) else { continue };
            let (_, prow, prhs) = &pivots[&col];
            for &(c, w) in prow {
                let e = row.entry(c).or_insert(0.0);
                let was_zero = *e == 0.0;
                *e -= v * w;
                if was_zero && c != col {
                    if let Some(p) = pivots.get(&c) {
                        heap.push(Reverse((p.0, c)));
                    }
                }
            }
            rhs -= v * prhs;
            row.remove(&col);
            row.retain(|_, x| x.abs() > DROP * scale);
        }
        let best = row.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(&c, &v)| (c, v));
        match best {
            Some((col, v)) if v.abs() > DEPENDENT * scale => {
                let mut reduced: Vec<(usize, f64)> = row.iter().map(|(&c, &x)| (c, x / v)).collect();
                reduced.sort_unstable_by_key(|t| t.0);
                pivots.insert(col, (pivots.len(), reduced, rhs / v));
                keep.push(i);
            }
            _ => {
                if rhs.abs() > CONSISTENT * (1.0 + eq.rhs.abs()) {
                    return Rank::Inconsistent;
                }
            }
        }
    }
    Rank::Independent(keep)
}
