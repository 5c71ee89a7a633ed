//! Parsers for ensemble specs, method lists and angle grids.

use std::f64::consts::PI;
use std::str::FromStr;

use locc_bounds::ensemble::{bell_basis_family, double_trine, load_ensemble, ququart_ensemble, StateEnsemble};
use locc_bounds::hierarchy::Direction;

/// `bell:δ,τ,ξ` (units of π), `trine`, `ququart` or `file:PATH`.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleSpec {
    Bell { delta: f64, tau: f64, xi: f64 },
    Trine,
    Ququart,
    File(String),
}

impl FromStr for EnsembleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "trine" => return Ok(Self::Trine),
            "ququart" => return Ok(Self::Ququart),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err("file: needs a path".into());
            }
            return Ok(Self::File(path.into()));
        }
        if let Some(rest) = s.strip_prefix("bell:") {
            let vals: Vec<f64> = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad angle {v:?}: {e}")))
                .collect::<Result<_, _>>()?;
            let [delta, tau, xi] = vals[..] else {
                return Err(format!("bell needs three angles δ,τ,ξ in units of π, got {}", vals.len()));
            };
            if !(delta.is_finite() && tau.is_finite() && xi.is_finite()) {
                return Err("angles must be finite".into());
            }
            return Ok(Self::Bell { delta, tau, xi });
        }
        Err(format!("unknown ensemble {s:?}; expected bell:δ,τ,ξ | trine | ququart | file:PATH"))
    }
}

impl EnsembleSpec {
    pub fn load(&self) -> Result<StateEnsemble, String> {
        Ok(match self {
            Self::Bell { delta, tau, xi } => bell_basis_family(delta * PI, tau * PI, xi * PI),
            Self::Trine => double_trine(),
            Self::Ququart => ququart_ensemble(),
            Self::File(p) => load_ensemble(p).map_err(|e| format!("{p}: {e}"))?,
        })
    }

    /// `τ` in units of π for Bell-family members.
    pub fn tau(&self) -> Option<f64> {
        match self {
            Self::Bell { tau, .. } => Some(*tau),
            _ => None,
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::Bell { delta, tau, xi } => format!("bell:{delta},{tau},{xi}"),
            Self::Trine => "trine".into(),
            Self::Ququart => "ququart".into(),
            Self::File(p) => format!("file:{p}"),
        }
    }
}

/// `START:STOP:COUNT` in units of π, endpoints included.
pub fn tau_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("tau grid {s:?} is not START:STOP:COUNT"));
    };
    let a: f64 = a.parse().map_err(|e| format!("bad start {a:?}: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("bad stop {b:?}: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("bad count {n:?}: {e}"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err("tau grid needs finite endpoints and a positive count".into());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMethod {
    Global,
    Ppt,
    OneRound(Direction),
    NonAdaptive(Direction),
    SeesawOneRound(Direction),
    SeesawNonAdaptive(Direction),
    Analytic(Direction),
}

fn direction(s: &str) -> Result<Direction, String> {
    match s {
        "ab" => Ok(Direction::AtoB),
        "ba" => Ok(Direction::BtoA),
        _ => Err(format!("unknown direction {s:?}; expected ab or ba")),
    }
}

/// Comma-separated `global`, `ppt`, `1r[:dir]`, `na[:dir]`, `seesaw-1r[:dir]`,
/// `seesaw-na[:dir]`, `analytic[:dir]`. A bare `analytic` expands to both directions.
pub fn method_list(s: &str) -> Result<Vec<SweepMethod>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (name, dir) = match item.split_once(':') {
            Some((n, d)) => (n, Some(direction(d)?)),
            None => (item, None),
        };
        let d = dir.unwrap_or_default();
        match name {
            "global" | "ppt" if dir.is_some() => return Err(format!("{name} takes no direction")),
            "global" => out.push(SweepMethod::Global),
            "ppt" => out.push(SweepMethod::Ppt),
            "1r" => out.push(SweepMethod::OneRound(d)),
            "na" => out.push(SweepMethod::NonAdaptive(d)),
            "seesaw-1r" => out.push(SweepMethod::SeesawOneRound(d)),
            "seesaw-na" => out.push(SweepMethod::SeesawNonAdaptive(d)),
            "analytic" => match dir {
                Some(d) => out.push(SweepMethod::Analytic(d)),
                None => {
                    out.push(SweepMethod::Analytic(Direction::AtoB));
                    out.push(SweepMethod::Analytic(Direction::BtoA));
                }
            },
            _ => return Err(format!("unknown method {name:?}")),
        }
    }
    if out.is_empty() {
        return Err("empty method list".into());
    }
    Ok(out)
}
