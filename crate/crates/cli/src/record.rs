//! Machine-readable run records.

use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "tau,method,m,k,direction,kind,value,gap";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub ensemble: String,
    /// `τ` in units of π for Bell-family members.
    #[serde(default)]
    pub tau: Option<f64>,
    pub method: String,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub direction: Option<String>,
    pub kind: String,
    pub value: f64,
    pub gap: f64,
    pub status: String,
    pub wall_time_s: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl RunRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            opt(&self.tau),
            self.method,
            opt(&self.m),
            opt(&self.k),
            opt(&self.direction),
            self.kind,
            self.value,
            self.gap
        )
    }

    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    /// Values are finite and the kind is one of the three known kinds.
    pub fn is_valid(&self) -> bool {
        self.value.is_finite() && self.gap.is_finite() && matches!(self.kind.as_str(), "upper" | "lower" | "analytic")
    }
}

#[cfg(test)]
/// Parses one row written by [`RunRecord::csv_row`] back into its fields.
pub fn parse_csv_row(row: &str) -> Result<RunRecord, String> {
    let f: Vec<&str> = row.split(',').collect();
    if f.len() < 8 {
        return Err(format!("expected at least 8 fields, got {}", f.len()));
    }
    let num = |s: &str| -> Result<Option<f64>, String> {
        if s.is_empty() { Ok(None) } else { s.parse().map(Some).map_err(|e| format!("{s:?}: {e}")) }
    };
    let int = |s: &str| -> Result<Option<usize>, String> {
        if s.is_empty() { Ok(None) } else { s.parse().map(Some).map_err(|e| format!("{s:?}: {e}")) }
    };
    Ok(RunRecord {
        ensemble: String::new(),
        tau: num(f[0])?,
        method: f[1].to_string(),
        m: int(f[2])?,
        k: int(f[3])?,
        direction: if f[4].is_empty() { None } else { Some(f[4].to_string()) },
        kind: f[5].to_string(),
        value: num(f[6])?.ok_or("missing value")?,
        gap: num(f[7])?.ok_or("missing gap")?,
        status: String::new(),
        wall_time_s: 0.0,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let r = RunRecord {
            ensemble: "trine".into(),
            tau: Some(0.25),
            method: "1r".into(),
            m: Some(2),
            k: Some(3),
            direction: Some("ab".into()),
            kind: "upper".into(),
            value: 0.905,
            gap: 1e-8,
            status: "optimal".into(),
            wall_time_s: 1.0,
            seed: None,
        };
        let back = parse_csv_row(&r.csv_row()).unwrap();
        assert_eq!((back.tau, back.m, back.k, back.value, back.gap), (r.tau, r.m, r.k, r.value, r.gap));
        assert_eq!(back.method, r.method);
        assert!(back.is_valid());
        let j: RunRecord = serde_json::from_str(&r.json()).unwrap();
        assert_eq!(j, r);
    }
}
