//! Command-line front end: run memory calls, tabulate activation counts,
//! and sweep failure rates under per-switch noise.
//!
//! Exit codes: 0 success, 1 simulation-capacity refusal, 2 configuration
//! validation failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qram_core::classical::{
    elements_2d, simulate_bucket_classical, simulate_fanout_classical, simulate_modified_fanout,
};
use qram_core::noise::{
    error_scaling_table, monte_carlo_failure, AddressDistribution, CountingMode, ErrorChannel,
    NoiseModel, NoiseSweepResult, QramArchitecture,
};
use qram_core::oracle::attach_quantum_memory;
use qram_core::{make_address_state, AccessMode, MemoryArray, QuantumState};

/// Default size cap for quantum runs; qutrit arrays grow with `2^n` per
/// configuration record.
const QUANTUM_CAP: usize = 12;
/// Cap when the memory cells enter the state.
const QUANTUM_MEMORY_CAP: usize = 4;
/// Cap for classical counting tables.
const CLASSICAL_CAP: usize = 26;

#[derive(Parser)]
#[command(
    name = "qram",
    version,
    about = "Gate-level simulator of fanout and bucket-brigade qRAM addressing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one quantum memory call and report the final state and gate log.
    Call(CallArgs),
    /// Tabulate activation and element counts over a range of address widths.
    Counts(CountsArgs),
    /// Estimate failure rates under per-switch noise, against the analytic rates.
    NoiseSweep(NoiseSweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArchArg {
    Fanout,
    Bucket,
}

impl From<ArchArg> for QramArchitecture {
    fn from(a: ArchArg) -> Self {
        match a {
            ArchArg::Fanout => QramArchitecture::Fanout,
            ArchArg::Bucket => QramArchitecture::BucketBrigade,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepArchArg {
    Fanout,
    Bucket,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Copy,
    Swap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GeometryArg {
    #[value(name = "1d")]
    OneDim,
    #[value(name = "2d")]
    TwoDim,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    RouteFlip,
    QutritDepolarize,
    PayloadFlip,
}

impl From<ChannelArg> for ErrorChannel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::RouteFlip => ErrorChannel::RouteFlip,
            ChannelArg::QutritDepolarize => ErrorChannel::QutritDepolarize,
            ChannelArg::PayloadFlip => ErrorChannel::PayloadFlip,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountingArg {
    PerActiveSwitch,
    PerGateEvent,
}

impl From<CountingArg> for CountingMode {
    fn from(c: CountingArg) -> Self {
        match c {
            CountingArg::PerActiveSwitch => CountingMode::PerActiveSwitch,
            CountingArg::PerGateEvent => CountingMode::PerGateEvent,
        }
    }
}

#[derive(Args)]
struct CallArgs {
    #[arg(long, value_enum)]
    arch: ArchArg,
    /// Address width; the memory holds 2^n cells.
    #[arg(long)]
    n: usize,
    /// Memory source: zeros, ones, random, or a file path (JSON {n, d,
    /// cells} or one cell value per line).
    #[arg(long, default_value = "zeros")]
    memory: String,
    /// Bits per memory cell for generated patterns.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Address spec: "uniform" (equal superposition of all addresses), a
    /// single integer, or "addr:re[:im],addr:re[:im],..."
    #[arg(long, default_value = "uniform")]
    address: String,
    #[arg(long, value_enum, default_value = "copy")]
    mode: ModeArg,
    /// Seed for the random memory pattern, making reports self-reproducing.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fold the memory cells into the state as quantum degrees of freedom.
    #[arg(long)]
    quantum_memory: bool,
    /// Run above the size cap anyway (memory use grows with 2^n per
    /// configuration).
    #[arg(long)]
    force_capacity: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Output path; defaults to stdout. Relative paths honor QRAM_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CountsArgs {
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, value_enum, default_value = "1d")]
    geometry: GeometryArg,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseSweepArgs {
    #[arg(long, value_enum, default_value = "both")]
    arch: SweepArchArg,
    /// Per-switching-event error probability; comma-separated list allowed.
    #[arg(long, default_value = "0.01")]
    epsilon: String,
    /// Address width or inclusive range "lo..hi".
    #[arg(long, default_value = "4")]
    n: String,
    /// Monte Carlo trials per row; 0 tabulates analytic rates only.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "route-flip")]
    channel: ChannelArg,
    #[arg(long, value_enum, default_value = "per-active-switch")]
    counting: CountingArg,
    /// Memory source for the trials: zeros, ones, random, or a file path.
    #[arg(long, default_value = "random")]
    memory: String,
    /// Address spec per trial: "uniform" (random basis address each trial),
    /// a single integer, or a superposition list.
    #[arg(long, default_value = "uniform")]
    address: String,
    #[arg(long)]
    force_capacity: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Validation(String),
    Capacity(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Capacity(msg) => f.write_str(msg),
        }
    }
}

impl From<qram_core::SimError> for CliError {
    fn from(e: qram_core::SimError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Call(args) => cmd_call(args),
        Command::Counts(args) => cmd_counts(args),
        Command::NoiseSweep(args) => cmd_noise_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Capacity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn check_capacity(n: usize, cap: usize, force: bool, what: &str) -> Result<(), CliError> {
    if n > cap {
        if force {
            eprintln!(
                "warning: {what} at n={n} exceeds the default cap of {cap}; \
                 memory use grows with 2^n per configuration"
            );
        } else {
            return Err(CliError::Capacity(format!(
                "{what} at n={n} exceeds the default cap of {cap} \
                 (pass --force-capacity to run anyway)"
            )));
        }
    }
    Ok(())
}

fn load_memory(source: &str, n: usize, d: usize, seed: u64) -> Result<MemoryArray, CliError> {
    let memory = match source {
        "zeros" => MemoryArray::zeros(n, d)?,
        "ones" => MemoryArray::ones(n, d)?,
        "random" => MemoryArray::random(n, d, seed)?,
        path => {
            let memory = MemoryArray::from_file(Path::new(path))
                .map_err(|e| CliError::Validation(format!("--memory {path}: {e}")))?;
            if memory.n() != n {
                return Err(CliError::Validation(format!(
                    "--memory file holds {} cells but --n {n} needs {}",
                    1u64 << memory.n(),
                    1u64 << n
                )));
            }
            memory
        }
    };
    Ok(memory)
}

fn parse_address_terms(spec: &str, n: usize) -> Result<Vec<(u64, Complex64)>, CliError> {
    let mut terms = Vec::new();
    for part in spec.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(CliError::Validation(format!(
                "--address entry {part:?} must be addr:re or addr:re:im"
            )));
        }
        let addr: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("--address entry {part:?}: bad address")))?;
        let re: f64 = fields[1].trim().parse().map_err(|_| {
            CliError::Validation(format!("--address entry {part:?}: bad amplitude"))
        })?;
        let im: f64 = if fields.len() == 3 {
            fields[2].trim().parse().map_err(|_| {
                CliError::Validation(format!("--address entry {part:?}: bad amplitude"))
            })?
        } else {
            0.0
        };
        terms.push((addr, Complex64::new(re, im)));
    }
    let _ = n;
    Ok(terms)
}

fn build_address_state(spec: &str, n: usize) -> Result<QuantumState, CliError> {
    if spec == "uniform" {
        let amp = Complex64::new(1.0 / ((1u64 << n) as f64).sqrt(), 0.0);
        let terms: Vec<(u64, Complex64)> = (0..(1u64 << n)).map(|k| (k, amp)).collect();
        return Ok(make_address_state(n, &terms)?);
    }
    if let Ok(k) = spec.trim().parse::<u64>() {
        return Ok(make_address_state(n, &[(k, Complex64::ONE)])?);
    }
    Ok(make_address_state(n, &parse_address_terms(spec, n)?)?)
}

fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os("QRAM_OUT_DIR") {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(format: FormatArg, out: Option<&PathBuf>, json: &str, csv: &str) -> Result<(), CliError> {
    match out {
        None => match format {
            FormatArg::Json => println!("{json}"),
            FormatArg::Csv => print!("{csv}"),
            FormatArg::Both => {
                return Err(CliError::Validation("--format both requires --out".into()))
            }
        },
        Some(path) => {
            let path = resolve_out(path);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .map_err(|e| CliError::Validation(format!("--out: {e}")))?;
                }
            }
            let write = |p: &Path, body: &str| {
                std::fs::write(p, body).map_err(|e| CliError::Validation(format!("--out: {e}")))
            };
            match format {
                FormatArg::Json => write(&path, json)?,
                FormatArg::Csv => write(&path, csv)?,
                FormatArg::Both => {
                    write(&path.with_extension("json"), json)?;
                    write(&path.with_extension("csv"), csv)?;
                }
            }
        }
    }
    Ok(())
}

fn state_csv(state: &QuantumState) -> String {
    let mut out = String::from("q,bus,qutrits,a,m,re,im\n");
    for entry in state.dump() {
        let cfg = &entry.configuration;
        let bus = cfg
            .bus
            .as_ref()
            .map(|b| format!("{}|{}|{:?}", b.position, b.payload, b.direction))
            .unwrap_or_default();
        let m = cfg.m.as_ref().map(|m| m.join(";")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            cfg.q, bus, cfg.qutrits, cfg.a, m, entry.re, entry.im
        );
    }
    out
}

fn cmd_call(args: CallArgs) -> Result<(), CliError> {
    if args.n < 1 {
        return Err(CliError::Validation(format!(
            "--n must be at least 1, got {}",
            args.n
        )));
    }
    let cap = if args.quantum_memory {
        QUANTUM_MEMORY_CAP
    } else {
        QUANTUM_CAP
    };
    check_capacity(args.n, cap, args.force_capacity, "quantum call")?;

    let mut memory = load_memory(&args.memory, args.n, args.d, args.seed)?;
    let mut state = build_address_state(&args.address, args.n)?;
    if args.quantum_memory {
        memory = memory.into_quantum();
        state = attach_quantum_memory(&state, &memory)?;
    }
    let mode = match args.mode {
        ModeArg::Copy => AccessMode::Copy,
        ModeArg::Swap => AccessMode::Swap,
    };

    let (json, csv) = match args.arch {
        ArchArg::Fanout => {
            let report = qram_core::fanout::fanout_call(&state, &memory, mode)?;
            let json = serde_json::json!({
                "architecture": "fanout",
                "n": args.n,
                "d": memory.d(),
                "mode": args.mode_name(),
                "memory": memory.cells(),
                "index_bus_interactions": report.index_bus_interactions,
                "routing_nodes_traversed_per_branch": report.routing_nodes_traversed_per_branch,
                "final_state": report.final_state.dump(),
                "gate_events": report.gate_events,
            });
            (
                serde_json::to_string_pretty(&json).expect("report serialization"),
                state_csv(&report.final_state),
            )
        }
        ArchArg::Bucket => {
            let report = qram_core::bucket::bb_call(&state, &memory, mode)?;
            let json = serde_json::json!({
                "architecture": "bucket-brigade",
                "n": args.n,
                "d": memory.d(),
                "mode": args.mode_name(),
                "memory": memory.cells(),
                "active_switches_per_branch": report.active_switches_per_branch,
                "time_steps": report.time_steps,
                "level_timing": report.level_timing,
                "final_state": report.final_state.dump(),
                "gate_events": report.gate_events,
            });
            (
                serde_json::to_string_pretty(&json).expect("report serialization"),
                state_csv(&report.final_state),
            )
        }
    };
    emit(args.format, args.out.as_ref(), &json, &csv)
}

impl CallArgs {
    fn mode_name(&self) -> &'static str {
        match self.mode {
            ModeArg::Copy => "copy",
            ModeArg::Swap => "swap",
        }
    }
}

fn cmd_counts(args: CountsArgs) -> Result<(), CliError> {
    if args.n_max < 1 {
        return Err(CliError::Validation(format!(
            "--n-max must be at least 1, got {}",
            args.n_max
        )));
    }
    if args.n_max > CLASSICAL_CAP {
        return Err(CliError::Capacity(format!(
            "--n-max {} exceeds the classical counting cap of {CLASSICAL_CAP}",
            args.n_max
        )));
    }
    match args.geometry {
        GeometryArg::OneDim => {
            let mut rows = Vec::new();
            let mut csv = String::from(
                "n,fanout_total,fanout_activated,modified_activated,bucket_active,bucket_waiting\n",
            );
            for n in 1..=args.n_max {
                let fanout = simulate_fanout_classical(n, 0)?;
                let modified = simulate_modified_fanout(n, 0)?;
                let bucket = simulate_bucket_classical(n, 0)?;
                let _ = writeln!(
                    csv,
                    "{n},{},{},{},{},{}",
                    fanout.total_elements,
                    fanout.activated_count,
                    modified.activated_count,
                    bucket.activated_count,
                    bucket.waiting_trits.unwrap_or(0)
                );
                rows.push(serde_json::json!({
                    "n": n,
                    "fanout_total": fanout.total_elements,
                    "fanout_activated": fanout.activated_count,
                    "modified_activated": modified.activated_count,
                    "bucket_active": bucket.activated_count,
                    "bucket_waiting": bucket.waiting_trits.unwrap_or(0),
                }));
            }
            let json = serde_json::to_string_pretty(&rows).expect("counts serialization");
            emit(args.format, args.out.as_ref(), &json, &csv)
        }
        GeometryArg::TwoDim => {
            if args.n_max < 2 {
                return Err(CliError::Validation(
                    "--geometry 2d needs --n-max of at least 2".into(),
                ));
            }
            let mut rows = Vec::new();
            let mut csv = String::from("n,elements_1d,elements_2d\n");
            for n in 2..=args.n_max {
                let e = elements_2d(n)?;
                let _ = writeln!(csv, "{n},{},{}", e.elements_1d, e.elements_2d);
                rows.push(serde_json::json!({
                    "n": n,
                    "elements_1d": e.elements_1d,
                    "elements_2d": e.elements_2d,
                }));
            }
            let json = serde_json::to_string_pretty(&rows).expect("counts serialization");
            emit(args.format, args.out.as_ref(), &json, &csv)
        }
    }
}

fn parse_epsilons(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("--epsilon entry {s:?} is not a number")))
        })
        .collect()
}

fn parse_n_range(spec: &str) -> Result<Vec<usize>, CliError> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("--n range {spec:?}: bad lower bound")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("--n range {spec:?}: bad upper bound")))?;
        if lo < 1 || hi < lo {
            return Err(CliError::Validation(format!(
                "--n range {spec:?} must satisfy 1 <= lo <= hi"
            )));
        }
        Ok((lo..=hi).collect())
    } else {
        let n: usize = spec
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("--n {spec:?} is not a number")))?;
        if n < 1 {
            return Err(CliError::Validation("--n must be at least 1".into()));
        }
        Ok(vec![n])
    }
}

fn cmd_noise_sweep(args: NoiseSweepArgs) -> Result<(), CliError> {
    let epsilons = parse_epsilons(&args.epsilon)?;
    let ns = parse_n_range(&args.n)?;
    let max_n = *ns.iter().max().expect("nonempty range");
    check_capacity(max_n, QUANTUM_CAP, args.force_capacity, "noise sweep")?;

    let architectures: Vec<QramArchitecture> = match args.arch {
        SweepArchArg::Fanout => vec![QramArchitecture::Fanout],
        SweepArchArg::Bucket => vec![QramArchitecture::BucketBrigade],
        SweepArchArg::Both => vec![QramArchitecture::BucketBrigade, QramArchitecture::Fanout],
    };

    let mut rows = Vec::new();
    if args.trials == 0 {
        let table = error_scaling_table(&epsilons, &ns)?;
        rows = table
            .rows
            .into_iter()
            .filter(|r| architectures.contains(&r.architecture))
            .collect();
    } else {
        for &architecture in &architectures {
            for &epsilon in &epsilons {
                for &n in &ns {
                    let memory = load_memory(&args.memory, n, 1, args.seed)?;
                    let dist = if args.address == "uniform" {
                        AddressDistribution::UniformRandom
                    } else if let Ok(k) = args.address.trim().parse::<u64>() {
                        AddressDistribution::Fixed(k)
                    } else {
                        AddressDistribution::Superposition(parse_address_terms(&args.address, n)?)
                    };
                    let model = NoiseModel::new(
                        epsilon,
                        args.channel.into(),
                        args.counting.into(),
                        args.seed,
                    )?;
                    rows.push(monte_carlo_failure(
                        architecture,
                        n,
                        &model,
                        args.trials,
                        &memory,
                        &dist,
                    )?);
                }
            }
        }
    }
    let result = NoiseSweepResult { rows };
    emit(
        args.format,
        args.out.as_ref(),
        &result.to_json(),
        &result.to_csv(),
    )
}
