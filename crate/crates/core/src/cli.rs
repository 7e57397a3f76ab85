//! The `pkp` command line: `gen`, `solve`, `estimate`, `sweep`, `verify`.
//!
//! Machine output (instances, solutions, CSV) goes to stdout or `--out`;
//! logs go to stderr. Exit codes: 0 success, 1 no solution found, 2 warning
//! escalated by `--strict`, 3 invalid parameters or input, 4 resource cap.

use crate::baseline::{solve_baseline, BaselineParams};
use crate::error::PkpError;
use crate::estimator::{
    cost_baseline, cost_filtered, optimize, optimize_baseline, optimize_filtered, sweep, BaselineCost, Estimate,
    SolverKind, SweepPoint, CSV_HEADER,
};
use crate::filtered::{solve_filtered, FilteredParams};
use crate::instance::{brute_force_solve, extend, generate_instance, verify, Permutation, PkpInstance};
use crate::isd::count_bounds;
use crate::solve::{SolveOptions, DEFAULT_MEMORY_CAP};
use crate::PrimeField;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_WARNING: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pkp", version, about = "Permuted Kernel Problem solvers and cost estimates")]
pub struct Cli {
    /// Worker threads for list building, sorting and sweeps
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Turn warnings into exit code 2
    #[arg(long, global = true)]
    strict: bool,
    /// Only log warnings and errors
    #[arg(long, global = true)]
    quiet: bool,
    /// Log debug details
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a planted instance
    Gen(GenArgs),
    /// Solve an instance file
    Solve(SolveArgs),
    /// Cost of one parameter set, or the optimum if none is given
    Estimate(EstimateArgs),
    /// Optimized costs over a range of m, as CSV
    Sweep(SweepArgs),
    /// Check a permutation against an instance file
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave out the planted solution line
    #[arg(long)]
    no_solution: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Brute,
    Baseline,
    Filtered,
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::Filtered)]
    solver: SolverArg,
    /// e.g. `l1=4,l2=5` or `d=1,w1=4,w2=4,l=2`; optimized when absent
    #[arg(long)]
    params: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report every solution instead of the first
    #[arg(long)]
    exhaustive: bool,
    /// Maximum number of list entries held at once
    #[arg(long, default_value_t = DEFAULT_MEMORY_CAP)]
    memory_cap: usize,
    #[arg(long)]
    max_isd_iters: Option<u64>,
    /// Largest n accepted by the brute-force solver
    #[arg(long, default_value_t = crate::instance::BRUTE_FORCE_DEFAULT_CAP)]
    brute_cap: usize,
    /// Largest subcode dimension tried when optimizing parameters
    #[arg(long)]
    d_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Baseline,
    Filtered,
    Both,
}

impl KindArg {
    fn kinds(self) -> Vec<SolverKind> {
        match self {
            KindArg::Baseline => vec![SolverKind::Baseline],
            KindArg::Filtered => vec![SolverKind::Filtered],
            KindArg::Both => vec![SolverKind::Baseline, SolverKind::Filtered],
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Both)]
    solver: KindArg,
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    d_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: usize,
    /// Inclusive range `a:b` of m
    #[arg(long, conflicts_with = "m_over_n")]
    m: Option<String>,
    /// Inclusive ratio range `a:b:step`; m = round(ratio * n)
    #[arg(long)]
    m_over_n: Option<String>,
    #[arg(long, value_enum, default_value_t = KindArg::Both)]
    solver: KindArg,
    #[arg(long)]
    d_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    instance: PathBuf,
    /// 1-based permutation, space or comma separated; defaults to the
    /// file's SOLUTION line
    #[arg(long)]
    solution: Option<String>,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Fail {
    code: i32,
    msg: String,
}

impl From<PkpError> for Fail {
    fn from(e: PkpError) -> Self {
        let code = match e {
            PkpError::NoSolution | PkpError::Exhausted { .. } | PkpError::ResampleLimit(_) => EXIT_NOT_FOUND,
            PkpError::ResourceCap { .. } => EXIT_RESOURCE,
            _ => EXIT_INVALID,
        };
        Fail {
            code,
            msg: e.to_string(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail {
        code: EXIT_INVALID,
        msg: msg.into(),
    }
}

type CliResult = std::result::Result<i32, Fail>;

/// Independent random stream `id` derived from the user seed.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

const STREAM_GEN: u64 = 0;
const STREAM_SOLVE: u64 = 1;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let level = if cli.quiet {
        log::LevelFilter::Warn
    } else if cli.verbose {
        log::LevelFilter::Debug
    } else {
        log::LevelFilter::Info
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    log::set_max_level(level);

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Gen(a) => cmd_gen(a, cli.strict),
        Command::Solve(a) => cmd_solve(a, cli.strict),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> std::result::Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Fail::from(PkpError::from(e))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| Fail::from(PkpError::from(e)))
        }
    }
}

fn cmd_gen(a: &GenArgs, strict: bool) -> CliResult {
    let field = PrimeField::new(a.q)?;
    let mut rng = stream(a.seed, STREAM_GEN);
    let inst = generate_instance(field, a.n, a.m, &mut rng)?;
    let inst = if a.no_solution { inst.without_planted() } else { inst };
    emit(a.out.as_ref(), &inst.to_text())?;
    if strict && inst.hardness_warning().is_some() {
        return Ok(EXIT_WARNING);
    }
    Ok(EXIT_OK)
}

fn read_instance(path: &PathBuf) -> std::result::Result<PkpInstance, Fail> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(PkpInstance::from_text(&text)?)
}

/// `k=v` pairs separated by commas.
fn parse_kv(s: &str) -> std::result::Result<BTreeMap<String, usize>, Fail> {
    let mut map = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| invalid(format!("parameter `{part}` is not of the form key=value")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| invalid(format!("parameter `{part}`: value is not a non-negative integer")))?;
        if map.insert(k.trim().to_string(), v).is_some() {
            return Err(invalid(format!("parameter `{k}` given twice")));
        }
    }
    Ok(map)
}

fn take_keys(map: &BTreeMap<String, usize>, allowed: &[&str], required: &[&str]) -> std::result::Result<(), Fail> {
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(format!(
            "unknown parameter `{k}` (expected {})",
            allowed.join(", ")
        )));
    }
    if let Some(k) = required.iter().find(|k| !map.contains_key(**k)) {
        return Err(invalid(format!("missing parameter `{k}`")));
    }
    Ok(())
}

fn parse_baseline(s: &str, n: usize, m: usize) -> std::result::Result<BaselineParams, Fail> {
    let map = parse_kv(s)?;
    take_keys(&map, &["l", "l1", "l2"], &["l1", "l2"])?;
    let p = BaselineParams::new(n, m, map["l1"], map["l2"])?;
    if let Some(&l) = map.get("l") {
        if l != p.l {
            return Err(invalid(format!("l = {l} but l1 + l2 - (n - r) = {}", p.l)));
        }
    }
    Ok(p)
}

fn parse_filtered(s: &str, n: usize, m: usize) -> std::result::Result<FilteredParams, Fail> {
    let map = parse_kv(s)?;
    take_keys(&map, &["d", "w", "w1", "w2", "l"], &["d", "w1", "w2", "l"])?;
    let p = FilteredParams::new(n, m, map["d"], map["w1"], map["w2"], map["l"])?;
    if let Some(&w) = map.get("w") {
        if w != p.w {
            return Err(invalid(format!("w = {w} but w1 + w2 = {}", p.w)));
        }
    }
    Ok(p)
}

fn write_solutions(out: Option<&PathBuf>, inst: &PkpInstance, sols: &[Permutation]) -> CliResult {
    let mut text = String::new();
    for p in sols {
        if !verify(inst, p)? {
            return Err(Fail {
                code: EXIT_NOT_FOUND,
                msg: "solver returned a permutation that fails verification".into(),
            });
        }
        let line: Vec<String> = p.to_one_based().iter().map(|i| i.to_string()).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_solve(a: &SolveArgs, strict: bool) -> CliResult {
    let inst = read_instance(&a.instance)?.without_planted();
    let (n, m, q) = (inst.n(), inst.m(), inst.field().modulus() as u64);
    if let Some(w) = inst.hardness_warning() {
        log::warn!("{w}");
        if strict {
            return Ok(EXIT_WARNING);
        }
    }
    let opts = SolveOptions {
        exhaustive: a.exhaustive,
        memory_cap: a.memory_cap,
        max_isd_iters: a.max_isd_iters,
        ..SolveOptions::default()
    };
    let mut rng = stream(a.seed, STREAM_SOLVE);

    let solutions = match a.solver {
        SolverArg::Brute => {
            if a.params.is_some() {
                return Err(invalid("the brute-force solver takes no parameters"));
            }
            let mut all = brute_force_solve(&inst, a.brute_cap)?;
            log::info!("stage=brute measured={}", all.len());
            if all.is_empty() {
                return Err(PkpError::NoSolution.into());
            }
            all.sort_by(|x, y| x.as_slice().cmp(y.as_slice()));
            if !a.exhaustive {
                all.truncate(1);
            }
            all
        }
        SolverArg::Baseline => {
            let params = match &a.params {
                Some(s) => parse_baseline(s, n, m)?,
                None => {
                    let best = optimize_baseline(n, m, q).ok_or_else(|| invalid("no feasible baseline parameters"))?;
                    log::info!(
                        "optimizer chose l={} l1={} l2={} (predicted log2 cost {:.4})",
                        best.params.l,
                        best.params.l1,
                        best.params.l2,
                        best.total
                    );
                    best.params
                }
            };
            let ext = extend(&inst)?;
            solve_baseline(&ext, inst.c(), &params, &mut rng, &opts)?.solutions
        }
        SolverArg::Filtered => {
            let params = match &a.params {
                Some(s) => parse_filtered(s, n, m)?,
                None => {
                    let best = optimize_filtered(n, m, q, a.d_max)
                        .ok_or_else(|| invalid("no feasible filtered parameters"))?;
                    let p = best.params;
                    log::info!(
                        "optimizer chose d={} w={} w1={} w2={} l={} (predicted log2 cost {:.4})",
                        p.d,
                        p.w,
                        p.w1,
                        p.w2,
                        p.l,
                        best.total
                    );
                    p
                }
            };
            if strict && !count_bounds(n, m + 1, params.w, params.d, q)?.expects_one() {
                log::warn!("no subcode with d={} w={} is expected to exist", params.d, params.w);
                return Ok(EXIT_WARNING);
            }
            let ext = extend(&inst)?;
            solve_filtered(&ext, inst.c(), &params, &mut rng, &opts)?.solutions
        }
    };
    write_solutions(a.out.as_ref(), &inst, &solutions)
}

fn cmd_estimate(a: &EstimateArgs) -> CliResult {
    PrimeField::new(a.q)?;
    let kinds = a.solver.kinds();
    let mut text = format!("{CSV_HEADER}\n");
    if let Some(s) = &a.params {
        let [kind] = kinds[..] else {
            return Err(invalid("--params needs --solver baseline or --solver filtered"));
        };
        let best = match kind {
            SolverKind::Baseline => {
                let params = parse_baseline(s, a.n, a.m)?;
                let total = cost_baseline(a.n, a.m, a.q, params.l1, params.l2)?;
                Estimate::Baseline(BaselineCost { params, total })
            }
            SolverKind::Filtered => {
                let params = parse_filtered(s, a.n, a.m)?;
                Estimate::Filtered(cost_filtered(a.n, a.m, a.q, &params)?)
            }
        };
        let pt = SweepPoint {
            n: a.n,
            m: a.m,
            q: a.q,
            solver: kind,
            best: Some(best),
        };
        text.push_str(&pt.csv_row());
        text.push('\n');
    } else {
        for kind in kinds {
            let pt = optimize(a.n, a.m, a.q, kind, a.d_max);
            if pt.best.is_none() {
                log::warn!("no feasible {kind} parameters for n={} m={}", a.n, a.m);
            }
            text.push_str(&pt.csv_row());
            text.push('\n');
        }
    }
    emit(a.out.as_ref(), &text)?;
    Ok(EXIT_OK)
}

fn parse_m_range(s: &str) -> std::result::Result<Vec<usize>, Fail> {
    let bad = || invalid(format!("--m expects `a:b`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

/// `a:b:step` over m/n; m = round(ratio * n), duplicates dropped.
fn parse_ratio_range(s: &str, n: usize) -> std::result::Result<Vec<usize>, Fail> {
    let bad = || {
        invalid(format!(
            "--m-over-n expects `a:b:step` with 0 < a <= b < 1 and step > 0, got `{s}`"
        ))
    };
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(a > 0.0 && a <= b && b < 1.0 && step > 0.0) {
        return Err(bad());
    }
    // count steps with an integer loop so rounding of a + i*step cannot
    // drop the upper endpoint
    let count = ((b - a) / step + 1e-9).floor() as usize;
    let mut ms: Vec<usize> = (0..=count)
        .map(|i| ((a + i as f64 * step) * n as f64).round() as usize)
        .collect();
    ms.dedup();
    Ok(ms)
}

fn cmd_sweep(a: &SweepArgs) -> CliResult {
    PrimeField::new(a.q)?;
    let ms = match (&a.m, &a.m_over_n) {
        (Some(r), None) => parse_m_range(r)?,
        (None, Some(r)) => parse_ratio_range(r, a.n)?,
        _ => return Err(invalid("sweep needs exactly one of --m or --m-over-n")),
    };
    let ms: Vec<usize> = ms.into_iter().filter(|&m| m >= 1 && m + 1 < a.n).collect();
    if ms.is_empty() {
        return Err(invalid(format!(
            "no m in range satisfies 1 <= m < n - 1 for n = {}",
            a.n
        )));
    }
    let mut text = format!("{CSV_HEADER}\n");
    for pt in sweep(a.n, a.q, &ms, &a.solver.kinds(), a.d_max) {
        text.push_str(&pt.csv_row());
        text.push('\n');
    }
    emit(a.out.as_ref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> CliResult {
    let inst = read_instance(&a.instance)?;
    let perm = match &a.solution {
        Some(s) => {
            let idx: Vec<usize> = s
                .split(|ch: char| ch == ',' || ch.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| invalid("--solution must be a list of 1-based indices"))?;
            Permutation::from_one_based(&idx)?
        }
        None => inst
            .planted()
            .cloned()
            .ok_or_else(|| invalid("no --solution given and the file has no SOLUTION line"))?,
    };
    if verify(&inst, &perm)? {
        emit(None, "valid\n")?;
        Ok(EXIT_OK)
    } else {
        emit(None, "invalid\n")?;
        Ok(EXIT_NOT_FOUND)
    }
}
