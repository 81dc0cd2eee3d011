//! Command-line front end: build, query, verify, bench, and adversary
//! subcommands over the array file formats and the index container.
//!
//! Exit codes: 0 success, 1 semantic failure (a mismatch or failed
//! recovery), 2 usage or format error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::encoding::{BackendKind, BuildOptions, MajorityEncoding};
use crate::error::Error;
use crate::oracle::oracle_majorities;
use crate::reductions;

const ARRAY_MAGIC: &[u8; 8] = b"RMAJARRV";

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "rmaj",
    about = "Succinct range tau-majority index: build, query, and stress it",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from an array file and write the container.
    Build(BuildArgs),
    /// Answer one query against a saved index.
    Query(QueryArgs),
    /// Cross-check the index against the brute-force scan on random queries.
    Verify(VerifyArgs),
    /// Generate data, build across a tau grid, and measure space and latency.
    Bench(BenchArgs),
    /// Run the adversarial constructions end-to-end against the index.
    Adversary(AdversaryArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Array file: text (one unsigned integer per line) or binary.
    #[arg(long)]
    input: PathBuf,
    /// Majority threshold as a rational P/Q in (0, 1).
    #[arg(long, value_parser = parse_tau)]
    tau: (u64, u64),
    /// Output path for the index container.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendChoice::Auto)]
    backend: BackendChoice,
    /// Precompute the micro answer table regardless of its size.
    #[arg(long)]
    strict_lookup: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendChoice {
    Auto,
    Percandidate,
    Grouped,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// Query range as I:J (1-based, inclusive).
    #[arg(long, value_parser = parse_range)]
    range: (u64, u64),
    #[arg(long, value_enum, default_value_t = QueryMode::Positions)]
    mode: QueryMode,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QueryMode {
    Positions,
    Decision,
    Count,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_tau)]
    tau: (u64, u64),
    #[arg(long, default_value_t = 1000)]
    queries: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    sigma: u64,
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    dist: Dist,
    /// Comma-separated list of thresholds, e.g. 1/4,1/16,1/64.
    #[arg(long, value_delimiter = ',', value_parser = parse_tau)]
    tau_grid: Vec<(u64, u64)>,
    #[arg(long, default_value_t = 1000)]
    queries: u64,
    /// Write the report series as JSON to this path ("-" for stdout only).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dist {
    Uniform,
    Zipf,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    mode: AdversaryMode,
    /// Lower-bound mode: majority parameter (tau = 1/k).
    #[arg(long, default_value_t = 2)]
    k: u64,
    /// Lower-bound mode: number of permutations.
    #[arg(long, default_value_t = 10)]
    m: u64,
    /// Set-intersection mode: number of sets.
    #[arg(long, default_value_t = 8)]
    n: u64,
    /// Set-intersection mode: universe size (tau = 1/(2X)).
    #[arg(long, default_value_t = 8)]
    x: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Export the adversarial array in the CLI array format.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AdversaryMode {
    Lowerbound,
    Setintersect,
}

#[derive(Serialize)]
struct StatsReport {
    n: u64,
    tau: Tau,
    clamped_to_half: bool,
    backend: BackendKind,
    build_ms: f64,
    space: crate::encoding::SpaceReport,
    queries: u64,
    latency_ns_p50: Option<u64>,
    latency_ns_p90: Option<u64>,
    latency_ns_p99: Option<u64>,
    mean_verified_candidates: Option<f64>,
    mean_followed_pointers: Option<f64>,
}

#[derive(Serialize)]
struct Tau {
    p: u64,
    q: u64,
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Adversary(a) => cmd_adversary(a),
    }
}

fn parse_tau(s: &str) -> Result<(u64, u64), String> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| format!("threshold must be P/Q, got {s:?}"))?;
    let p: u64 = p.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
    let q: u64 = q.trim().parse().map_err(|e| format!("bad denominator: {e}"))?;
    if p == 0 || p >= q {
        return Err(format!("threshold {p}/{q} not in (0, 1)"));
    }
    Ok((p, q))
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (i, j) = s
        .split_once(':')
        .ok_or_else(|| format!("range must be I:J, got {s:?}"))?;
    let i: u64 = i.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let j: u64 = j.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    Ok((i, j))
}

/// Read an array file. A binary file starts with the magic "RMAJARRV",
/// a u64 little-endian length, and u32 little-endian elements; anything
/// else is parsed as one unsigned decimal integer per line.
pub fn read_array(path: &Path) -> Result<Vec<u64>, Error> {
    let bytes = fs::read(path)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    if bytes.len() >= 8 && &bytes[..8] == ARRAY_MAGIC {
        if bytes.len() < 16 {
            return Err(Error::format("binary array truncated before length"));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let need = 16 + n as usize * 4;
        if bytes.len() != need {
            return Err(Error::format(format!(
                "binary array length mismatch: header says {n} elements"
            )));
        }
        return Ok(bytes[16..]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as u64)
            .collect());
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::format("array file is neither binary nor UTF-8 text"))?;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: u64 = line.parse().map_err(|e| {
            Error::format(format!("line {}: {e}", ln + 1))
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Write an array in the binary format.
pub fn write_array(path: &Path, a: &[u64]) -> Result<(), Error> {
    let mut bytes = Vec::with_capacity(16 + a.len() * 4);
    bytes.extend_from_slice(ARRAY_MAGIC);
    bytes.extend_from_slice(&(a.len() as u64).to_le_bytes());
    for &v in a {
        if v > u32::MAX as u64 {
            return Err(Error::invalid("element does not fit the 32-bit format"));
        }
        bytes.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn build_options(backend: BackendChoice, strict_lookup: bool) -> BuildOptions {
    BuildOptions {
        backend: match backend {
            BackendChoice::Auto => None,
            BackendChoice::Percandidate => Some(BackendKind::PerCandidate),
            BackendChoice::Grouped => Some(BackendKind::Grouped),
        },
        strict_table: strict_lookup,
        ..Default::default()
    }
}

fn measure(
    enc: &MajorityEncoding,
    a_n: u64,
    queries: u64,
    seed: u64,
) -> (Option<u64>, Option<u64>, Option<u64>, Option<f64>, Option<f64>) {
    if queries == 0 {
        return (None, None, None, None, None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lat = Vec::with_capacity(queries as usize);
    let mut verified = 0u64;
    let mut followed = 0u64;
    for _ in 0..queries {
        let i = rng.random_range(1..=a_n);
        let j = rng.random_range(i..=a_n);
        let t = Instant::now();
        let (_, stats) = enc.query_positions_with_stats(i, j).expect("valid range");
        lat.push(t.elapsed().as_nanos() as u64);
        verified += stats.verified_candidates;
        followed += stats.followed_pointers;
    }
    lat.sort_unstable();
    let pct = |p: f64| lat[((lat.len() - 1) as f64 * p) as usize];
    (
        Some(pct(0.50)),
        Some(pct(0.90)),
        Some(pct(0.99)),
        Some(verified as f64 / queries as f64),
        Some(followed as f64 / queries as f64),
    )
}

fn report(enc: &MajorityEncoding, p: u64, q: u64, build_ms: f64, queries: u64, seed: u64) -> StatsReport {
    let (p50, p90, p99, mv, mf) = measure(enc, enc.n(), queries, seed);
    StatsReport {
        n: enc.n(),
        tau: Tau { p, q },
        clamped_to_half: 2 * p > q,
        backend: enc.backend_kind(),
        build_ms,
        space: enc.space_report(),
        queries,
        latency_ns_p50: p50,
        latency_ns_p90: p90,
        latency_ns_p99: p99,
        mean_verified_candidates: mv,
        mean_followed_pointers: mf,
    }
}

fn cmd_build(a: BuildArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let arr = read_array(&a.input)?;
    let (p, q) = a.tau;
    let t = Instant::now();
    let enc = MajorityEncoding::build_with(&arr, p, q, &build_options(a.backend, a.strict_lookup))?;
    let build_ms = t.elapsed().as_secs_f64() * 1e3;
    fs::write(&a.output, enc.to_bytes())?;
    let rep = report(&enc, p, q, build_ms, 0, 0);
    println!("{}", serde_json::to_string_pretty(&rep)?);
    if rep.clamped_to_half {
        eprintln!("note: tau {p}/{q} > 1/2; structure built for 1/2, queries use {p}/{q} exactly");
    }
    Ok(EXIT_OK)
}

fn cmd_query(a: QueryArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let bytes = fs::read(&a.index)?;
    let enc = MajorityEncoding::from_bytes(&bytes)?;
    let (i, j) = a.range;
    match a.mode {
        QueryMode::Positions => {
            let pos = enc.query_positions(i, j)?;
            let mut line = String::new();
            for (idx, p) in pos.iter().enumerate() {
                if idx > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{p}");
            }
            println!("{line}");
        }
        QueryMode::Decision => {
            println!("{}", if enc.query_decision(i, j)? { "yes" } else { "no" });
        }
        QueryMode::Count => println!("{}", enc.query_count(i, j)?),
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let arr = read_array(&a.input)?;
    let (p, q) = a.tau;
    let enc = MajorityEncoding::build(&arr, p, q)?;
    let n = arr.len() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for t in 0..a.queries {
        let i = rng.random_range(1..=n);
        let j = rng.random_range(i..=n);
        let want: Vec<u64> = oracle_majorities(&arr, p, q, i, j)?
            .entries
            .iter()
            .map(|e| e.first_pos)
            .collect();
        let got = enc.query_positions(i, j)?;
        if got != want {
            println!(
                "FAIL query {t}: [{i},{j}] expected {want:?} got {got:?}"
            );
            return Ok(EXIT_MISMATCH);
        }
    }
    println!("PASS {} queries against the scan oracle", a.queries);
    Ok(EXIT_OK)
}

fn cmd_bench(a: BenchArgs) -> Result<i32, Box<dyn std::error::Error>> {
    if a.n == 0 || a.sigma == 0 || a.tau_grid.is_empty() {
        return Err(Error::invalid("need n > 0, sigma > 0, and a tau grid").into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let arr: Vec<u64> = match a.dist {
        Dist::Uniform => (0..a.n).map(|_| rng.random_range(1..=a.sigma)).collect(),
        Dist::Zipf => {
            let z = rand_distr::Zipf::new(a.sigma as f64, 1.0)
                .map_err(|e| Error::invalid(format!("zipf: {e}")))?;
            (0..a.n).map(|_| (z.sample(&mut rng) as u64).clamp(1, a.sigma)).collect()
        }
    };
    let mut reports = Vec::new();
    for &(p, q) in &a.tau_grid {
        let t = Instant::now();
        let enc = MajorityEncoding::build(&arr, p, q)?;
        let build_ms = t.elapsed().as_secs_f64() * 1e3;
        let rep = report(&enc, p, q, build_ms, a.queries, a.seed ^ 0x5eed);
        println!(
            "tau={p}/{q} bits/element={:.2} p50={:?}ns mean_verified={:?}",
            rep.space.bits_per_element, rep.latency_ns_p50, rep.mean_verified_candidates
        );
        reports.push(rep);
    }
    let doc = serde_json::to_string_pretty(&reports)?;
    if let Some(path) = &a.json {
        fs::write(path, &doc)?;
    } else {
        println!("{doc}");
    }
    Ok(EXIT_OK)
}

fn cmd_adversary(a: AdversaryArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    match a.mode {
        AdversaryMode::Lowerbound => {
            if a.k < 2 {
                return Err(Error::invalid("lower-bound mode needs k >= 2").into());
            }
            let perms: Vec<Vec<u64>> = (0..a.m)
                .map(|_| {
                    let mut p: Vec<u64> = (1..=a.k).collect();
                    p.shuffle(&mut rng);
                    p
                })
                .collect();
            let bad = reductions::bad_array(a.k, &perms)?;
            if let Some(path) = &a.dump {
                write_array(path, &bad.symbols)?;
            }
            let enc = MajorityEncoding::build(&bad.symbols, 1, a.k)?;
            let (got, queries) = reductions::recover(|i, j| enc.query_decision(i, j), &bad)?;
            let recovered_bits =
                a.m as f64 * (2..=a.k).map(|v| (v as f64).log2()).sum::<f64>();
            if got != perms {
                let bad_j = got.iter().zip(&perms).position(|(g, w)| g != w).unwrap();
                println!("FAIL permutation {} not recovered", bad_j + 1);
                return Ok(EXIT_MISMATCH);
            }
            println!(
                "PASS lowerbound k={} m={}: {} decision queries (bound {}), {:.1} bits recovered",
                a.k,
                a.m,
                queries,
                a.k * a.k * a.m,
                recovered_bits
            );
            if queries > a.k * a.k * a.m {
                println!("FAIL query budget exceeded");
                return Ok(EXIT_MISMATCH);
            }
        }
        AdversaryMode::Setintersect => {
            if a.n < 2 || a.x < 1 {
                return Err(Error::invalid("set-intersection mode needs n >= 2, x >= 1").into());
            }
            let sets: Vec<Vec<u64>> = (0..a.n)
                .map(|_| {
                    let size = rng.random_range(1..=a.x);
                    let mut u: Vec<u64> = (1..=a.x).collect();
                    u.shuffle(&mut rng);
                    u.truncate(size as usize);
                    u
                })
                .collect();
            let inst = reductions::si_build(&sets, a.x)?;
            if let Some(path) = &a.dump {
                write_array(path, &inst.symbols)?;
            }
            let enc = MajorityEncoding::build(&inst.symbols, 1, 2 * a.x)?;
            let mut pairs = 0u64;
            for i in 1..=a.n {
                for j in i + 1..=a.n {
                    let direct = inst.sets[i as usize - 1]
                        .iter()
                        .any(|e| inst.sets[j as usize - 1].contains(e));
                    let got =
                        reductions::si_query(&inst, i, j, |x, y| enc.query_decision(x, y))?;
                    if got != direct {
                        println!("FAIL pair ({i},{j}): reduction said {got}, direct said {direct}");
                        return Ok(EXIT_MISMATCH);
                    }
                    pairs += 1;
                }
            }
            println!(
                "PASS setintersect n={} x={}: {} pairs agree with direct intersection",
                a.n, a.x, pairs
            );
        }
    }
    Ok(EXIT_OK)
}
