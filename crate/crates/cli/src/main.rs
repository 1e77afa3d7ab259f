//! `detpart run` partitions a hypergraph; `detpart verify` runs the same
//! configuration under several thread counts and compares the phase hashes.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use detpart::io::{format_hash, read_hypergraph, write_partition, Format};
use detpart::partitioner::CONFIG_KEYS;
use detpart::{partition, Config, Fraction, Hypergraph, PartitionResult, Preset};

const EXIT_BALANCED: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_IMBALANCED: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "detpart", version, about = "Deterministic multilevel hypergraph partitioner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition a hypergraph.
    Run(RunArgs),
    /// Run under several thread counts and check that all results agree.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Hmetis,
    Metis,
}

#[derive(Args)]
struct Common {
    /// Input hypergraph (.hgr) or graph (.graph, .metis).
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Overrides format detection from the file extension.
    #[arg(long)]
    format: Option<FormatArg>,
    /// Number of blocks.
    #[arg(short = 'k')]
    k: usize,
    /// Imbalance tolerance as a decimal, e.g. 0.03.
    #[arg(short = 'e', long = "epsilon", default_value = "0.03")]
    epsilon: Fraction,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "detjet")]
    preset: Preset,
    /// Configuration override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Appends one JSON run record per run to this file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Worker threads; falls back to DETPART_THREADS, then to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Writes the partition here, one block ID per line.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    thread_set: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    repeats: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses 2 for usage errors, which is reserved for imbalance
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_BALANCED });
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn load(common: &Common) -> Result<(Hypergraph, Config), String> {
    let format = match common.format {
        Some(FormatArg::Hmetis) => Format::Hmetis,
        Some(FormatArg::Metis) => Format::Metis,
        None => Format::from_path(&common.input).ok_or_else(|| {
            format!(
                "cannot detect the format of {}; use --format",
                common.input.display()
            )
        })?,
    };
    let mut config = Config::new(common.k, common.epsilon, common.seed, common.preset);
    for o in &common.overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got {o:?} (keys: {})", CONFIG_KEYS.join(", ")))?;
        config.set(key.trim(), value).map_err(|e| e.to_string())?;
    }
    config.validate().map_err(|e| e.to_string())?;
    let hg = read_hypergraph(&common.input, format).map_err(|e| format!("{}: {e}", common.input.display()))?;
    Ok((hg, config))
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("DETPART_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("DETPART_THREADS must be a positive integer, got {s:?}")),
        Err(_) => Ok(None),
    }
}

fn run_with_threads(hg: &Hypergraph, config: &Config, threads: usize) -> Result<PartitionResult, String> {
    if threads == 0 {
        return Err("thread count must be positive".into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| partition(hg, config)).map_err(|e| e.to_string())
}

fn instance_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn append_records(path: &Path, lines: &[String]) -> Result<(), String> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        out.write_all(line.as_bytes()).map_err(|e| e.to_string())?;
    }
    out.flush().map_err(|e| e.to_string())
}

fn record_line(result: &PartitionResult, common: &Common, config: &Config, threads: usize) -> String {
    result
        .run_record(&instance_name(&common.input), config, threads)
        .to_json_line()
}

fn run(args: RunArgs) -> Result<u8, String> {
    let (hg, config) = load(&args.common)?;
    let threads = match args.threads {
        Some(t) => t,
        None => threads_from_env()?
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    let result = run_with_threads(&hg, &config, threads)?;
    if let Some(path) = &args.output {
        let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_partition(BufWriter::new(file), &result.assignment).map_err(|e| e.to_string())?;
    }
    if let Some(path) = &args.common.json {
        append_records(path, &[record_line(&result, &args.common, &config, threads)])?;
    }
    println!(
        "metric={} balanced={} imbalance={:.6} hash={} time={:.3}s",
        result.metric,
        result.balanced,
        result.imbalance,
        format_hash(result.partition_hash()),
        result.total_time
    );
    Ok(if result.balanced { EXIT_BALANCED } else { EXIT_IMBALANCED })
}

/// Name of the first phase whose hash differs, or `"partition"` if only the
/// final assignment does.
fn first_divergence(a: &PartitionResult, b: &PartitionResult) -> Option<String> {
    for (x, y) in a.phase_hashes.iter().zip(&b.phase_hashes) {
        if x != y {
            return Some(x.0.clone());
        }
    }
    if a.phase_hashes.len() != b.phase_hashes.len() {
        let shorter = a.phase_hashes.len().min(b.phase_hashes.len());
        let longer = if a.phase_hashes.len() > shorter { a } else { b };
        return Some(longer.phase_hashes[shorter].0.clone());
    }
    (a.assignment != b.assignment).then(|| "partition".to_string())
}

fn verify(args: VerifyArgs) -> Result<u8, String> {
    let (hg, config) = load(&args.common)?;
    if args.thread_set.is_empty() || args.repeats == 0 {
        return Err("--thread-set and --repeats must be non-empty".into());
    }
    let mut reference: Option<(usize, PartitionResult)> = None;
    let mut records = Vec::new();
    for &threads in &args.thread_set {
        for repeat in 0..args.repeats {
            let result = run_with_threads(&hg, &config, threads)?;
            if args.common.json.is_some() {
                records.push(record_line(&result, &args.common, &config, threads));
            }
            println!(
                "threads={threads} repeat={repeat} metric={} hash={}",
                result.metric,
                format_hash(result.partition_hash())
            );
            match &reference {
                None => reference = Some((threads, result)),
                Some((ref_threads, first)) => {
                    if let Some(phase) = first_divergence(first, &result) {
                        println!(
                            "DIVERGED at phase {phase}: threads={ref_threads} repeat=0 vs threads={threads} repeat={repeat}"
                        );
                        if let Some(path) = &args.common.json {
                            append_records(path, &records)?;
                        }
                        return Ok(EXIT_DIVERGED);
                    }
                }
            }
        }
    }
    if let Some(path) = &args.common.json {
        append_records(path, &records)?;
    }
    println!("identical across {} runs", args.thread_set.len() * args.repeats);
    Ok(EXIT_BALANCED)
}
