//! Reference tables: embedded expectations, per-cell verdicts and output.

use serde::Deserialize;

const EMBEDDED: &str = include_str!("../data/expectations.toml");

#[derive(Debug, Deserialize)]
pub struct Expectations {
    pub version: u32,
    pub trine: Table,
    pub ququart: Table,
}

#[derive(Debug, Deserialize)]
pub struct Table {
    pub k: usize,
    pub m: Vec<usize>,
    pub column: Vec<Column>,
}

#[derive(Debug, Deserialize)]
pub struct Column {
    pub name: String,
    pub method: String,
    pub kind: String,
    pub tol: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub column: String,
    pub method: String,
    pub kind: String,
    pub m: usize,
    pub expected: Option<f64>,
    pub tol: f64,
}

impl Expectations {
    pub fn embedded() -> Result<Self, String> {
        Self::parse(EMBEDDED)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let e: Expectations = toml::from_str(text).map_err(|e| format!("expectations: {e}"))?;
        for t in [&e.trine, &e.ququart] {
            for c in &t.column {
                if c.values.len() != t.m.len() {
                    return Err(format!("column {} has {} values for {} rows", c.name, c.values.len(), t.m.len()));
                }
                if !matches!(c.kind.as_str(), "upper" | "lower") {
                    return Err(format!("column {} has unknown kind {:?}", c.name, c.kind));
                }
            }
        }
        Ok(e)
    }
}

impl Table {
    /// Cells in row-major order (by `m`, then column); rows outside the table get no expectation.
    pub fn cells(&self, ms: &[usize]) -> Vec<Cell> {
        let mut out = Vec::new();
        for &m in ms {
            let row = self.m.iter().position(|&x| x == m);
            for c in &self.column {
                out.push(Cell {
                    column: c.name.clone(),
                    method: c.method.clone(),
                    kind: c.kind.clone(),
                    m,
                    expected: row.map(|r| c.values[r]),
                    tol: c.tol,
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub k: usize,
    pub value: Option<f64>,
    pub gap: f64,
    /// `pass`, `fail`, `refused` (size cap), `error` or `n/a` (no reference value).
    pub verdict: String,
    pub note: String,
}

impl CellResult {
    pub fn new(cell: &Cell, k: usize, outcome: Result<(f64, f64, String), String>) -> Self {
        match outcome {
            Ok((value, gap, status)) => {
                let verdict = match cell.expected {
                    None => "n/a",
                    Some(e) if verdict_ok(&cell.kind, value, e, cell.tol) && status == "optimal" => "pass",
                    Some(_) => "fail",
                };
                Self { cell: cell.clone(), k, value: Some(value), gap, verdict: verdict.into(), note: String::new() }
            }
            Err(msg) => {
                let verdict = if msg.contains("too large") { "refused" } else { "error" };
                Self { cell: cell.clone(), k, value: None, gap: 0.0, verdict: verdict.into(), note: msg }
            }
        }
    }
}

/// Upper bounds must match within `tol`; lower bounds must reach `expected - tol`.
pub fn verdict_ok(kind: &str, value: f64, expected: f64, tol: f64) -> bool {
    match kind {
        "upper" => (value - expected).abs() <= tol,
        _ => value >= expected - tol,
    }
}

pub fn to_csv(results: &[CellResult]) -> String {
    let mut s = String::from("m,column,method,k,kind,value,gap,expected,tol,verdict\n");
    for r in results {
        let k = if r.cell.method.starts_with("seesaw") { String::new() } else { r.k.to_string() };
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.cell.m,
            r.cell.column,
            r.cell.method,
            k,
            r.cell.kind,
            r.value.map(|v| v.to_string()).unwrap_or_default(),
            r.gap,
            r.cell.expected.map(|v| v.to_string()).unwrap_or_default(),
            r.cell.tol,
            r.verdict
        ));
    }
    s
}

pub fn format_table(ms: &[usize], results: &[CellResult]) -> String {
    let mut cols: Vec<&str> = Vec::new();
    for r in results {
        if !cols.contains(&r.cell.column.as_str()) {
            cols.push(&r.cell.column);
        }
    }
    let mut s = format!("{:>4}", "m");
    for c in &cols {
        s.push_str(&format!(" | {c:>24}"));
    }
    s.push('\n');
    for &m in ms {
        s.push_str(&format!("{m:>4}"));
        for c in &cols {
            let cell = results.iter().find(|r| r.cell.m == m && r.cell.column == *c);
            let text = match cell {
                Some(r) => match (r.value, r.cell.expected) {
                    (Some(v), Some(e)) => format!("{v:.4} ({e:.4}) {}", r.verdict),
                    (Some(v), None) => format!("{v:.4}"),
                    (None, _) => r.verdict.clone(),
                },
                None => String::new(),
            };
            s.push_str(&format!(" | {text:>24}"));
        }
        s.push('\n');
    }
    for r in results.iter().filter(|r| !r.note.is_empty()) {
        s.push_str(&format!("m={} {}: {}\n", r.cell.m, r.cell.column, r.note));
    }
    s
}

/// Violations of `seesaw_na ≤ na ≤ 1r` and `seesaw_1r ≤ 1r` per row, with slack `slack`.
pub fn ordering_violations_with(results: &[CellResult], slack: f64) -> Vec<String> {
    let chains: [(&str, &str); 3] = [("seesaw_na", "na"), ("na", "1r"), ("seesaw_1r", "1r")];
    let mut out = Vec::new();
    let value = |m: usize, method: &str| {
        results.iter().find(|r| r.cell.m == m && r.cell.method == method).and_then(|r| r.value)
    };
    let mut ms: Vec<usize> = results.iter().map(|r| r.cell.m).collect();
    ms.dedup();
    for m in ms {
        for (lo, hi) in chains {
            if let (Some(a), Some(b)) = (value(m, lo), value(m, hi)) {
                if a > b + slack {
                    out.push(format!("m={m}: {lo} {a:.6} > {hi} {b:.6}"));
                }
            }
        }
    }
    out
}
