//! `locc-bounds`: bounds, see-saw runs, sweeps, table reproduction and
//! certificate checks from the command line.

mod parse;
mod record;
mod tables;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use locc_bounds::certify::{
    analytic_p_succ_ab, analytic_p_succ_ba, certificate_from_nonadaptive, certificate_from_oneround,
    certificate_from_solution, check_1r_certificate, check_na_certificate, CertificateArray, CertifyError,
};
use locc_bounds::conic::{Backend, SolveStatus, SolverOptions};
use locc_bounds::ensemble::{bell_family_tangle, StateEnsemble};
use locc_bounds::hierarchy::{
    build_1r_sdp, build_na_sdp, upper_bound, BoundResult, Direction, HierarchyError, HierarchyParams, Method,
    SymmetryMode,
};
use locc_bounds::seesaw::{seesaw_nonadaptive, seesaw_oneround, SeesawOptions, Strategy, StrategyFile};

use parse::{method_list, tau_grid, EnsembleSpec, SweepMethod};
use record::{RunRecord, CSV_HEADER};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CERT_FAIL: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_SCHEMA: u8 = 65;

#[derive(Parser)]
#[command(name = "locc-bounds", version, about = "Bounds on LOCC state discrimination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one upper-bound program.
    Bound(BoundArgs),
    /// Run the see-saw heuristic for a lower bound.
    Seesaw(SeesawArgs),
    /// Sweep the Bell-basis family over a grid of τ.
    Sweep(SweepArgs),
    /// Reproduce the reference tables.
    Tables(TablesArgs),
    /// Check a certificate array or a strategy file.
    Certify(CertifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundMethod {
    Global,
    Ppt,
    #[value(name = "1r")]
    OneRound,
    Na,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "1r")]
    OneRound,
    Na,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    Ab,
    Ba,
}

impl From<DirArg> for Direction {
    fn from(d: DirArg) -> Self {
        match d {
            DirArg::Ab => Direction::AtoB,
            DirArg::Ba => Direction::BtoA,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    Full,
    Copies,
    None,
}

impl From<SymmetryArg> for SymmetryMode {
    fn from(s: SymmetryArg) -> Self {
        match s {
            SymmetryArg::Full => SymmetryMode::Full,
            SymmetryArg::Copies => SymmetryMode::Copies,
            SymmetryArg::None => SymmetryMode::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Interior,
    FirstOrder,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Target accuracy of the conic solve.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendArg,
    #[arg(long, value_enum, default_value = "full")]
    symmetry: SymmetryArg,
    /// Refuse programs whose estimated size exceeds this many real PSD entries.
    #[arg(long)]
    size_cap: Option<usize>,
}

impl SolverFlags {
    fn options(&self) -> SolverOptions {
        let mut o = SolverOptions::with_eps(self.eps);
        o.backend = match self.backend {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Interior => Backend::InteriorPoint,
            BackendArg::FirstOrder => Backend::FirstOrder,
        };
        o
    }

    fn params(&self, m: usize, k: usize, d: Direction) -> HierarchyParams {
        let mut p = HierarchyParams::new(m, k, d).with_symmetry(self.symmetry.into());
        if let Some(cap) = self.size_cap {
            p = p.with_size_cap(cap);
        }
        p
    }
}

#[derive(Args)]
struct BoundArgs {
    /// bell:δ,τ,ξ (units of π) | trine | ququart | file:PATH
    #[arg(long)]
    ensemble: EnsembleSpec,
    #[arg(long, value_enum)]
    method: BoundMethod,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "ab")]
    direction: DirArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the full certificate array of a hierarchy solve.
    #[arg(long)]
    dump_certificate: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct SeesawArgs {
    #[arg(long)]
    ensemble: EnsembleSpec,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "ab")]
    direction: DirArg,
    /// Second party's outcome count for non-adaptive runs (default d²).
    #[arg(long)]
    m_b: Option<usize>,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Skip the built-in deterministic starting points.
    #[arg(long)]
    no_inject: bool,
    #[arg(long)]
    dump_strategy: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    /// START:STOP:COUNT in units of π.
    #[arg(long)]
    tau_grid: String,
    /// Comma list of global, ppt, 1r[:ab|ba], na[:dir], seesaw-1r[:dir], seesaw-na[:dir], analytic[:dir].
    #[arg(long)]
    methods: String,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// δ in units of π.
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// ξ in units of π.
    #[arg(long, default_value_t = 0.5)]
    xi: f64,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append the tangle of the family as a last column.
    #[arg(long)]
    with_tangle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Trine,
    Ququart,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_enum)]
    which: Which,
    /// Override the hierarchy level.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict to these message sizes (comma list).
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct CertifyArgs {
    /// Certificate array or strategy JSON file.
    #[arg(long)]
    certificate: PathBuf,
    #[arg(long)]
    ensemble: EnsembleSpec,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Hierarchy level for certificates built from strategy files.
    #[arg(long, default_value_t = 1)]
    k: usize,
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

impl From<HierarchyError> for Failure {
    fn from(e: HierarchyError) -> Self {
        let code = match e {
            HierarchyError::InvalidParams(_) => EXIT_USAGE,
            _ => EXIT_ERROR,
        };
        Failure::new(code, e.to_string())
    }
}

fn worker_pool() -> rayon::ThreadPool {
    let n = std::env::var("LOCC_BOUNDS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")
}

fn status_str(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::NumericalTrouble => "numerical_trouble",
    }
}

fn csv_method(m: Method) -> &'static str {
    match m {
        Method::Global => "global",
        Method::Ppt => "ppt",
        Method::Oneround => "1r",
        Method::Nonadaptive => "na",
        Method::SeesawOneround => "seesaw_1r",
        Method::SeesawNonadaptive => "seesaw_na",
        Method::Analytic => "analytic",
    }
}

fn record_from(spec: &EnsembleSpec, r: &BoundResult, wall: f64, seed: Option<u64>) -> RunRecord {
    RunRecord {
        ensemble: spec.id(),
        tau: spec.tau(),
        method: csv_method(r.method).into(),
        m: r.params.as_ref().map(|p| p.m),
        k: r.params.as_ref().and_then(|p| matches!(r.method, Method::Oneround | Method::Nonadaptive).then_some(p.k)),
        direction: r.params.as_ref().map(|p| p.direction.as_str().to_string()),
        kind: r.kind.as_str().into(),
        value: r.value,
        gap: r.gap,
        status: status_str(r.status).into(),
        wall_time_s: wall,
        seed,
    }
}

fn emit(rec: &RunRecord, format: Format) {
    if !rec.is_valid() {
        eprintln!("warning: record has a non-finite value or gap");
    }
    match format {
        Format::Json => println!("{}", rec.json()),
        Format::Csv => {
            println!("{CSV_HEADER}");
            println!("{}", rec.csv_row());
        }
    }
}

fn load(spec: &EnsembleSpec) -> Result<StateEnsemble, Failure> {
    spec.load().map_err(|e| Failure::new(EXIT_ERROR, e))
}

fn solve_hierarchy(
    e: &StateEnsemble,
    method: Method,
    params: &HierarchyParams,
    opts: &SolverOptions,
    dump: Option<&PathBuf>,
) -> Result<BoundResult, Failure> {
    let lp = match method {
        Method::Oneround => build_1r_sdp(e, params)?,
        _ => build_na_sdp(e, params)?,
    };
    let report = lp.program.solve_with(opts).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?;
    if let Some(path) = dump {
        if report.status != SolveStatus::Infeasible {
            let cert = certificate_from_solution(&lp, &report, params.direction);
            std::fs::write(path, cert.to_json_string()).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", path.display())))?;
        }
    }
    Ok(BoundResult {
        value: report.primal_value,
        kind: locc_bounds::hierarchy::BoundKind::Upper,
        method,
        params: Some(params.clone()),
        gap: report.gap,
        status: report.status,
    })
}

fn cmd_bound(a: &BoundArgs) -> Result<u8, Failure> {
    let e = load(&a.ensemble)?;
    let opts = a.solver.options();
    let start = Instant::now();
    let result = match a.method {
        BoundMethod::Global => upper_bound(&e, Method::Global, None, &opts)?,
        BoundMethod::Ppt => upper_bound(&e, Method::Ppt, None, &opts)?,
        BoundMethod::OneRound | BoundMethod::Na => {
            let (Some(m), Some(k)) = (a.m, a.k) else {
                return Err(Failure::new(EXIT_USAGE, "--method 1r and na need --m and --k"));
            };
            if m == 0 || k == 0 {
                return Err(Failure::new(EXIT_USAGE, "--m and --k must be positive"));
            }
            let method = if matches!(a.method, BoundMethod::OneRound) { Method::Oneround } else { Method::Nonadaptive };
            eprintln!("solving {} m={m} k={k} on {}", csv_method(method), a.ensemble.id());
            solve_hierarchy(&e, method, &a.solver.params(m, k, a.direction.into()), &opts, a.dump_certificate.as_ref())?
        }
    };
    let rec = record_from(&a.ensemble, &result, start.elapsed().as_secs_f64(), None);
    emit(&rec, a.format);
    Ok(match result.status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::NumericalTrouble => {
            eprintln!("warning: solver reported numerical trouble (gap {:.2e})", result.gap);
            EXIT_ERROR
        }
    })
}

fn seesaw_options(restarts: usize, seed: u64, d: Direction) -> SeesawOptions {
    SeesawOptions { restarts, seed, direction: d, ..SeesawOptions::default() }
}

fn cmd_seesaw(a: &SeesawArgs) -> Result<u8, Failure> {
    if a.m == 0 {
        return Err(Failure::new(EXIT_USAGE, "--m must be positive"));
    }
    let e = load(&a.ensemble)?;
    let mut opts = seesaw_options(a.restarts, a.seed, a.direction.into());
    opts.m_b = a.m_b;
    opts.max_iters = a.max_iters;
    opts.inject_seeds = !a.no_inject;
    let start = Instant::now();
    let err = |e: locc_bounds::seesaw::SeesawError| Failure::new(EXIT_ERROR, e.to_string());
    let (result, strategy) = match a.variant {
        VariantArg::OneRound => {
            let run = seesaw_oneround(&e, a.m, &opts).map_err(err)?;
            (run.result, Strategy::OneRound(run.strategy))
        }
        VariantArg::Na => {
            let run = seesaw_nonadaptive(&e, a.m, &opts).map_err(err)?;
            (run.result, Strategy::NonAdaptive(run.strategy))
        }
    };
    if let Some(path) = &a.dump_strategy {
        let json = serde_json::to_string(&StrategyFile::from_strategy(&strategy)).expect("strategy serializes");
        std::fs::write(path, json).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", path.display())))?;
    }
    let rec = record_from(&a.ensemble, &result, start.elapsed().as_secs_f64(), Some(a.seed));
    emit(&rec, a.format);
    Ok(EXIT_OK)
}

fn sweep_point(a: &SweepArgs, tau: f64, method: SweepMethod) -> Result<RunRecord, Failure> {
    let spec = EnsembleSpec::Bell { delta: a.delta, tau, xi: a.xi };
    let e = load(&spec)?;
    let opts = a.solver.options();
    let start = Instant::now();
    let t = tau * std::f64::consts::PI;
    let result = match method {
        SweepMethod::Global => upper_bound(&e, Method::Global, None, &opts)?,
        SweepMethod::Ppt => upper_bound(&e, Method::Ppt, None, &opts)?,
        SweepMethod::OneRound(d) => solve_hierarchy(&e, Method::Oneround, &a.solver.params(a.m, a.k, d), &opts, None)?,
        SweepMethod::NonAdaptive(d) => {
            solve_hierarchy(&e, Method::Nonadaptive, &a.solver.params(a.m, a.k, d), &opts, None)?
        }
        SweepMethod::SeesawOneRound(d) => {
            seesaw_oneround(&e, a.m, &seesaw_options(a.restarts, a.seed, d)).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?.result
        }
        SweepMethod::SeesawNonAdaptive(d) => {
            seesaw_nonadaptive(&e, a.m, &seesaw_options(a.restarts, a.seed, d))
                .map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?
                .result
        }
        SweepMethod::Analytic(d) => {
            if (a.delta - 0.25).abs() > 1e-12 || (a.xi - 0.5).abs() > 1e-12 {
                return Err(Failure::new(EXIT_USAGE, "analytic curves exist only for δ = 0.25π, ξ = 0.5π"));
            }
            let value = match d {
                Direction::AtoB => analytic_p_succ_ab(t),
                Direction::BtoA => analytic_p_succ_ba(t),
            };
            BoundResult {
                value,
                kind: locc_bounds::hierarchy::BoundKind::Analytic,
                method: Method::Analytic,
                params: Some(HierarchyParams::new(2, 1, d)),
                gap: 0.0,
                status: SolveStatus::Optimal,
            }
        }
    };
    let seed = matches!(method, SweepMethod::SeesawOneRound(_) | SweepMethod::SeesawNonAdaptive(_)).then_some(a.seed);
    Ok(record_from(&spec, &result, start.elapsed().as_secs_f64(), seed))
}

fn cmd_sweep(a: &SweepArgs) -> Result<u8, Failure> {
    let grid = tau_grid(&a.tau_grid).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let methods = method_list(&a.methods).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    if a.m == 0 || a.k == 0 {
        return Err(Failure::new(EXIT_USAGE, "--m and --k must be positive"));
    }
    let tasks: Vec<(f64, SweepMethod)> = grid.iter().flat_map(|&t| methods.iter().map(move |&m| (t, m))).collect();
    let total = tasks.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<Result<RunRecord, Failure>> = worker_pool().install(|| {
        tasks
            .par_iter()
            .map(|&(t, m)| {
                let r = sweep_point(a, t, m);
                let i = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                eprintln!("[{i}/{total}] tau={t} {m:?}");
                r
            })
            .collect()
    });
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    if a.with_tangle {
        out.push_str(",tangle");
    }
    out.push('\n');
    let mut code = EXIT_OK;
    for ((t, _), r) in tasks.iter().zip(results) {
        match r {
            Ok(rec) => {
                out.push_str(&rec.csv_row());
                if a.with_tangle {
                    out.push_str(&format!(",{}", bell_family_tangle(a.delta * std::f64::consts::PI, t * std::f64::consts::PI)));
                }
                out.push('\n');
                if rec.status != "optimal" {
                    code = EXIT_ERROR;
                }
            }
            Err(f) if f.code == EXIT_USAGE => return Err(f),
            Err(f) => {
                eprintln!("error at tau={t}: {}", f.msg);
                code = EXIT_ERROR;
            }
        }
    }
    write_out(a.out.as_ref(), &out)?;
    Ok(code)
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))
        }
    }
}

fn cmd_tables(a: &TablesArgs) -> Result<u8, Failure> {
    let exp = tables::Expectations::embedded().map_err(|e| Failure::new(EXIT_ERROR, e))?;
    let (spec, table) = match a.which {
        Which::Trine => (EnsembleSpec::Trine, &exp.trine),
        Which::Ququart => (EnsembleSpec::Ququart, &exp.ququart),
    };
    let e = load(&spec)?;
    let k = a.k.unwrap_or(table.k);
    let ms: Vec<usize> = match &a.m {
        Some(ms) => ms.clone(),
        None => table.m.clone(),
    };
    let cells = table.cells(&ms);
    let total = cells.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let opts = a.solver.options();
    let results: Vec<tables::CellResult> = worker_pool().install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let start = Instant::now();
                let r = match cell.method.as_str() {
                    "1r" | "na" => {
                        let method = if cell.method == "1r" { Method::Oneround } else { Method::Nonadaptive };
                        solve_hierarchy(&e, method, &a.solver.params(cell.m, k, Direction::AtoB), &opts, None)
                            .map(|r| (r.value, r.gap, status_str(r.status).to_string()))
                    }
                    "seesaw_1r" => seesaw_oneround(&e, cell.m, &seesaw_options(a.restarts, a.seed, Direction::AtoB))
                        .map(|r| (r.result.value, 0.0, "optimal".into()))
                        .map_err(|e| Failure::new(EXIT_ERROR, e.to_string())),
                    "seesaw_na" => seesaw_nonadaptive(&e, cell.m, &seesaw_options(a.restarts, a.seed, Direction::AtoB))
                        .map(|r| (r.result.value, 0.0, "optimal".into()))
                        .map_err(|e| Failure::new(EXIT_ERROR, e.to_string())),
                    other => Err(Failure::new(EXIT_ERROR, format!("unknown method {other:?} in expectations"))),
                };
                let i = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                eprintln!("[{i}/{total}] {} m={} in {:.1}s", cell.column, cell.m, start.elapsed().as_secs_f64());
                tables::CellResult::new(cell, k, r.map_err(|f| f.msg))
            })
            .collect()
    });
    eprintln!("expectations version {}", exp.version);
    eprint!("{}", tables::format_table(&ms, &results));
    let ordering = tables::ordering_violations_with(&results, 3.0 * a.solver.eps.max(1e-5));
    for v in &ordering {
        eprintln!("ordering violation: {v}");
    }
    write_out(a.out.as_ref(), &tables::to_csv(&results))?;
    let all_pass = results.iter().all(|r| r.verdict == "pass");
    Ok(if all_pass && ordering.is_empty() { EXIT_OK } else { EXIT_ERROR })
}

fn cmd_certify(a: &CertifyArgs) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(&a.certificate)
        .map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", a.certificate.display())))?;
    let e = load(&a.ensemble)?;
    let schema = |e: CertifyError| match e {
        CertifyError::Io(_) => Failure::new(EXIT_ERROR, e.to_string()),
        _ => Failure::new(EXIT_SCHEMA, e.to_string()),
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|err| Failure::new(EXIT_SCHEMA, format!("invalid JSON: {err}")))?;
    let (cert, claimed) = if value.get("type").is_some() {
        let file: StrategyFile = serde_json::from_value(value).map_err(|err| Failure::new(EXIT_SCHEMA, err.to_string()))?;
        let strategy = file.into_strategy().map_err(|err| Failure::new(EXIT_SCHEMA, err.to_string()))?;
        if a.k == 0 {
            return Err(Failure::new(EXIT_USAGE, "--k must be positive"));
        }
        match strategy {
            Strategy::OneRound(s) => {
                s.validate(&e).map_err(|err| Failure::new(EXIT_SCHEMA, err.to_string()))?;
                let claimed = s.measurement();
                (certificate_from_oneround(&s, a.k), Some(claimed))
            }
            Strategy::NonAdaptive(s) => {
                s.validate(&e).map_err(|err| Failure::new(EXIT_SCHEMA, err.to_string()))?;
                let claimed = s.measurement();
                (certificate_from_nonadaptive(&s, a.k), Some(claimed))
            }
        }
    } else {
        (CertificateArray::from_json_str(&text).map_err(schema)?, None)
    };
    let oriented = cert.direction.orient(&e);
    if cert.d_a != oriented.d_a() || cert.d_b != oriented.d_b() || cert.n != oriented.len() {
        return Err(Failure::new(EXIT_SCHEMA, "certificate dimensions do not match the ensemble"));
    }
    let report = match a.variant {
        VariantArg::OneRound => {
            let c = if cert.variant == locc_bounds::hierarchy::Variant::NonAdaptive {
                locc_bounds::certify::contract_na_to_1r(&cert).map_err(schema)?
            } else {
                cert
            };
            check_1r_certificate(&c, claimed.as_deref(), Some(&e), a.tol)
        }
        VariantArg::Na => check_na_certificate(&cert, claimed.as_deref(), Some(&e), a.tol),
    }
    .map_err(schema)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(if report.pass { EXIT_OK } else { EXIT_CERT_FAIL })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let out = match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Seesaw(a) => cmd_seesaw(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Tables(a) => cmd_tables(a),
        Command::Certify(a) => cmd_certify(a),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
