use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sdnb_core::arith::prime_power;
use sdnb_core::construct::{construct, existence_check, CertificateJson, SdnbCertificate};
use sdnb_core::cyclotomic::CyclotomicDecomposition;
use sdnb_core::orthogonal::group_cardinality;
use sdnb_core::search::{
    merge_reports, optimality_precheck, SearchOptions, SearchReport, Searcher, Shard, CSV_HEADER,
};
use sdnb_core::Error;

const OUTPUT_DIR_VAR: &str = "SDNB_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "sdnb", version, about = "Self-dual normal bases over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct one SDNB generator and print its certificate.
    Construct(QnArgs),
    /// Minimum complexity over all SDNBs of the extension.
    Search(SearchArgs),
    /// Number of SDNBs of the extension.
    Count(QnArgs),
    /// Re-verify a certificate produced by `construct`.
    Verify(VerifyArgs),
    /// Case, cyclotomic classes and group order of the extension.
    Inspect(QnArgs),
    /// Search a range of degrees and print one CSV row per degree.
    Table(TableArgs),
    /// Merge search reports of disjoint shards.
    Merge(MergeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct QnArgs {
    /// Base field size, as a prime power (`8`) or `p^r` (`2^3`).
    #[arg(long, value_parser = parse_q)]
    q: u64,
    /// Extension degree.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SearchOpts {
    /// Record the full complexity histogram (default: on for n <= 15).
    #[arg(long, overrides_with = "no_histogram")]
    histogram: bool,
    #[arg(long)]
    no_histogram: bool,
    /// Maximum number of minimal witnesses kept.
    #[arg(long, default_value_t = 16)]
    witness_cap: usize,
    /// Stop after this many seconds and report partial coverage.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Worker threads; the index range is split evenly among them.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    /// Run the full self-duality check on every index divisible by this.
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    verify_every: u64,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    qn: QnArgs,
    /// Search only shard `i/k` of the index space.
    #[arg(long, conflicts_with = "range")]
    shard: Option<Shard>,
    /// Search only indices `a..b` (half-open).
    #[arg(long, value_parser = parse_index_range)]
    range: Option<(u64, u64)>,
    #[command(flatten)]
    opts: SearchOpts,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate JSON file, or `-` for stdin.
    cert: PathBuf,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_parser = parse_q)]
    q: u64,
    /// Inclusive degree range `a..b`; nonexistent and mixed degrees are skipped.
    #[arg(long, value_parser = parse_degree_range)]
    n: (usize, usize),
    #[command(flatten)]
    opts: SearchOpts,
}

#[derive(Args)]
struct MergeArgs {
    /// Report JSON files.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn invalid(msg: String) -> Error {
    Error::Domain(msg)
}

fn parse_q(s: &str) -> std::result::Result<u64, String> {
    let q = match s.split_once('^') {
        Some((p, r)) => {
            let p: u64 = p.trim().parse().map_err(|_| format!("bad prime '{p}'"))?;
            let r: u32 = r.trim().parse().map_err(|_| format!("bad exponent '{r}'"))?;
            p.checked_pow(r).ok_or_else(|| format!("{s} overflows 64 bits"))?
        }
        None => s.trim().parse().map_err(|_| format!("'{s}' is not an integer"))?,
    };
    match prime_power(q) {
        Some(_) => Ok(q),
        None => Err(format!("{q} is not a prime power")),
    }
}

fn parse_pair(s: &str) -> std::result::Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("'{s}' is not of the form a..b"))?;
    let a = a.trim().parse().map_err(|_| format!("bad bound '{a}'"))?;
    let b = b.trim().parse().map_err(|_| format!("bad bound '{b}'"))?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}

fn parse_index_range(s: &str) -> std::result::Result<(u64, u64), String> {
    parse_pair(s)
}

fn parse_degree_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = parse_pair(s)?;
    if a == 0 {
        return Err("degrees start at 1".into());
    }
    Ok((a as usize, b as usize))
}

impl SearchOpts {
    fn options(&self, n: usize) -> SearchOptions {
        let mut o = SearchOptions::for_degree(n);
        if self.histogram {
            o.histogram = true;
        }
        if self.no_histogram {
            o.histogram = false;
        }
        o.witness_cap = self.witness_cap;
        o.verify_every = self.verify_every;
        o.time_limit = self.time_limit.map(Duration::from_secs_f64);
        o
    }
}

/// Split `[start, end)` over the workers and merge their reports.
fn run_search(s: &Searcher, start: u64, end: u64, opts: &SearchOptions, workers: u64) -> Result<SearchReport> {
    let len = end - start;
    let workers = workers.min(len.max(1));
    let chunks: Vec<(u64, u64)> = (0..workers)
        .map(|i| {
            let r = Shard { index: i, count: workers }.range(len);
            (start + r.0, start + r.1)
        })
        .collect();
    let reports: Vec<sdnb_core::Result<SearchReport>> = if workers == 1 {
        vec![s.run(&SearchOptions { range: Some(chunks[0]), ..opts.clone() })]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|&c| scope.spawn(move || s.run(&SearchOptions { range: Some(c), ..opts.clone() })))
                .collect();
            handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
        })
    };
    let mut merged: Option<SearchReport> = None;
    for r in reports {
        let r = r?;
        merged = Some(match merged {
            None => r,
            Some(m) => merge_reports(&m, &r)?,
        });
    }
    Ok(merged.expect("at least one worker"))
}

fn certificate(q: u64, n: u64) -> Result<SdnbCertificate> {
    Ok(construct(q, n as usize)?)
}

fn render_report(r: &SearchReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(r)?,
        Format::Csv => format!("{CSV_HEADER}\n{}", r.csv_row()),
        Format::Text => {
            let min = r.min_complexity.map_or("-".into(), |m| m.to_string());
            let mult = r.multiplier.map_or("-".into(), |m| m.to_string());
            let mut s = format!(
                "q = {}, n = {}\nbases searched: {} of {}\nminimum complexity: {min} (multiplier {mult}, {} bases)\n",
                r.q, r.n, r.visited, r.group_cardinality, r.count_at_min
            );
            if !r.complete {
                s.push_str("coverage incomplete\n");
            }
            if r.integrity_failure {
                s.push_str("integrity failure: count is not a multiple of the orbit size\n");
            }
            if let Some(h) = &r.histogram {
                s.push_str("histogram:");
                for (c, k) in h {
                    s.push_str(&format!(" {c}:{k}"));
                }
                s.push('\n');
            }
            s.trim_end().to_string()
        }
    })
}

fn cmd_construct(a: &QnArgs) -> Result<String> {
    let cert = certificate(a.q, a.n)?;
    let j = cert.to_json();
    Ok(match a.format {
        Format::Json => serde_json::to_string_pretty(&j)?,
        Format::Csv => format!("q,n,complexity\n{},{},{}", j.q, j.n, j.complexity),
        Format::Text => format!(
            "q = {}, n = {}\nmodulus (F_p coefficients, low first): {:?}\ngamma: {:?}\ncomplexity: {}",
            j.q, j.n, j.modulus, j.gamma_coords, j.complexity
        ),
    })
}

fn cmd_search(a: &SearchArgs) -> Result<String> {
    let n = a.qn.n as usize;
    let cert = certificate(a.qn.q, a.qn.n)?;
    let s = Searcher::new(&cert)?;
    let len = s.len();
    let (start, end) = match (a.shard, a.range) {
        (Some(sh), _) => sh.range(len),
        (None, Some((x, y))) => {
            if y > len {
                return Err(invalid(format!("range {x}..{y} exceeds the group order {len}")).into());
            }
            (x, y)
        }
        (None, None) => (0, len),
    };
    let report = run_search(&s, start, end, &a.opts.options(n), a.opts.workers)?;
    render_report(&report, a.qn.format)
}

fn cmd_count(a: &QnArgs) -> Result<String> {
    let c = group_cardinality(a.q, a.n as usize)?;
    Ok(match a.format {
        Format::Json => serde_json::to_string_pretty(&json!({ "q": a.q, "n": a.n, "group_cardinality": c.to_string() }))?,
        Format::Csv => format!("q,n,group_cardinality\n{},{},{c}", a.q, a.n),
        Format::Text => c.to_string(),
    })
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<String> {
    let j: CertificateJson = serde_json::from_str(&read_input(&a.cert)?)?;
    let cert = SdnbCertificate::from_json(&j)?;
    Ok(format!("ok: q = {}, n = {}, complexity {}", cert.q, cert.n, cert.complexity()))
}

fn cmd_inspect(a: &QnArgs) -> Result<String> {
    let (q, n) = (a.q, a.n as usize);
    let (p, r) = prime_power(q).expect("validated by the parser");
    let mut n1 = n;
    let mut e = 0;
    while n1 % p as usize == 0 {
        n1 /= p as usize;
        e += 1;
    }
    let case = match (n1, e) {
        _ if !existence_check(q, n) => "nonexistent",
        (_, 0) => "semi-simple",
        (1, _) => "ramified",
        _ => "mixed",
    };
    let cardinality = match group_cardinality(q, n) {
        Ok(c) => json!(c.to_string()),
        Err(_) => json!(null),
    };
    let classes = if case == "semi-simple" && n % 2 == 1 {
        CyclotomicDecomposition::new(n, q)?.to_json()
    } else {
        json!(null)
    };
    let out = json!({
        "q": q,
        "p": p,
        "r": r,
        "n": n,
        "case": case,
        "group_cardinality": cardinality,
        "optimal_possible": optimality_precheck(q, n),
        "cyclotomic": classes,
    });
    Ok(match a.format {
        Format::Json => serde_json::to_string_pretty(&out)?,
        Format::Csv => format!("q,n,case,group_cardinality\n{q},{n},{case},{}", cardinality.as_str().unwrap_or("")),
        Format::Text => format!(
            "q = {q} = {p}^{r}, n = {n}\ncase: {case}\ngroup order: {}",
            cardinality.as_str().unwrap_or("-")
        ),
    })
}

fn cmd_table(a: &TableArgs) -> Result<String> {
    let mut lines = vec![CSV_HEADER.to_string()];
    for n in a.n.0..=a.n.1 {
        let cert = match construct(a.q, n) {
            Ok(c) => c,
            Err(Error::NoSdnb { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let s = match Searcher::new(&cert) {
            Ok(s) => s,
            Err(Error::Unsupported(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let report = run_search(&s, 0, s.len(), &a.opts.options(n), a.opts.workers)?;
        lines.push(report.csv_row());
    }
    Ok(lines.join("\n"))
}

fn cmd_merge(a: &MergeArgs) -> Result<String> {
    let mut merged: Option<SearchReport> = None;
    for path in &a.reports {
        let r: SearchReport = serde_json::from_str(&read_input(path)?).with_context(|| format!("parsing {}", path.display()))?;
        merged = Some(match merged {
            None => r,
            Some(m) => merge_reports(&m, &r)?,
        });
    }
    render_report(&merged.expect("clap requires one report"), a.format)
}

fn output_name(cmd: &Command) -> String {
    let ext = |f: Format| match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Text => "txt",
    };
    match cmd {
        Command::Construct(a) => format!("construct_q{}_n{}.{}", a.q, a.n, ext(a.format)),
        Command::Search(a) => {
            let part = match (a.shard, a.range) {
                (Some(s), _) => format!("_shard{}of{}", s.index, s.count),
                (None, Some((x, y))) => format!("_range{x}-{y}"),
                _ => String::new(),
            };
            format!("search_q{}_n{}{part}.{}", a.qn.q, a.qn.n, ext(a.qn.format))
        }
        Command::Count(a) => format!("count_q{}_n{}.{}", a.q, a.n, ext(a.format)),
        Command::Verify(_) => "verify.txt".into(),
        Command::Inspect(a) => format!("inspect_q{}_n{}.{}", a.q, a.n, ext(a.format)),
        Command::Table(a) => format!("table_q{}_n{}-{}.csv", a.q, a.n.0, a.n.1),
        Command::Merge(a) => format!("merged.{}", ext(a.format)),
    }
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Search(a) => cmd_search(a),
        Command::Count(a) => cmd_count(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Table(a) => cmd_table(a),
        Command::Merge(a) => cmd_merge(a),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(core) = e.downcast_ref::<Error>() {
        return match core {
            Error::NoSdnb { .. } => 2,
            Error::Unsupported(_) => 3,
            Error::Domain(_) => 4,
            Error::Internal(_) => 5,
        };
    }
    if e.downcast_ref::<serde_json::Error>().is_some() || e.downcast_ref::<io::Error>().is_some() {
        return 4;
    }
    5
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    println!("{text}");
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_VAR) {
        let dir = PathBuf::from(dir);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(output_name(&cli.command));
        fs::write(&path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|text| emit(&cli, &text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
