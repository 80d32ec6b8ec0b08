//! Command-line front end for the simulation toolkit: run scenarios,
//! export the free-space power curve, dump spreading codes, and replay
//! recorded observation files through the majority vote.
//!
//! Exit codes form a small contract for shell pipelines: 0 success,
//! 1 attack detected (from `detect`), 2 bad input or arguments, 3 I/O
//! failure.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use spoofwatch_core::detector::{
    majority_vote, ComparisonConfig, PmuObservation, UnitObservation, VerdictRecord, VerdictState,
};
use spoofwatch_core::rfmodel::{power_curve, wavelength, LinkBudget};
use spoofwatch_core::signal::generate_ca_code;
use spoofwatch_core::simkit::{run, EventLog, Scenario};
use spoofwatch_core::telemetry::{decode_frame, ReceivedFrameRecord, FRAME_LEN_V1, FRAME_MAGIC};

// ---- exit codes ----

const EXIT_OK: u8 = 0;
const EXIT_ATTACK: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;

/// Failures split by exit code: bad input (2) versus I/O trouble (3).
enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(msg) | CliError::Io(msg) => msg,
        }
    }
}

fn invalid(err: impl std::fmt::Display) -> CliError {
    CliError::Invalid(err.to_string())
}

fn io_fail(err: impl std::fmt::Display) -> CliError {
    CliError::Io(err.to_string())
}

// ---- argument surface ----

/// Desk-scale toolkit for studying GPS time spoofing against PMUs and a
/// remote-unit majority-vote countermeasure.
#[derive(Parser)]
#[command(name = "spoofwatch", version, about)]
struct Cli {
    /// Output location: a directory for `run`, a file for everything else
    /// (omitted or "-" means stdout).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Output format. Default: jsonl for `run` and `detect`, csv for
    /// `curve` and `codegen`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Override the scenario seed (applies to `run`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress the one-line result summary.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario; write the per-tick event log and a run summary
    /// into the output directory.
    Run(RunArgs),
    /// Sweep received-to-transmitted power ratio over a logarithmic
    /// distance grid.
    Curve(CurveArgs),
    /// Emit spreading-code chips for one PRN or all 32.
    Codegen(CodegenArgs),
    /// Replay a recorded PMU clock stream and unit report files through
    /// the majority vote. Exits 1 when any tick shows an attack.
    Detect(DetectArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON). Runs the built-in default scenario when
    /// omitted.
    scenario: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// Transmit power, watts.
    #[arg(long, default_value_t = 0.035)]
    tx_power_w: f64,
    /// Transmit antenna gain, dBi.
    #[arg(long, default_value_t = 10.0)]
    tx_gain_dbi: f64,
    /// Receive antenna gain, dBi.
    #[arg(long, default_value_t = 10.0)]
    rx_gain_dbi: f64,
    /// Carrier frequency, Hz.
    #[arg(long, default_value_t = 1.57542e9)]
    freq_hz: f64,
    /// Smallest distance, meters.
    #[arg(long, default_value_t = 160.934)]
    d_min: f64,
    /// Largest distance, meters.
    #[arg(long, default_value_t = 16093.4)]
    d_max: f64,
    /// Number of grid points, log-spaced from d_min to d_max.
    #[arg(long, default_value_t = 201)]
    steps: usize,
}

#[derive(Args)]
struct CodegenArgs {
    /// PRN in 1..=32.
    #[arg(long, conflicts_with = "all")]
    prn: Option<u8>,
    /// Emit all 32 PRNs.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct DetectArgs {
    /// PMU clock stream: JSON lines of {"tick", "utc_time", "lat", "lon"}.
    #[arg(long)]
    pmu: PathBuf,
    /// Unit report file, repeatable: either concatenated 28-byte binary
    /// frames or JSON lines of received-frame records. Records align with
    /// the PMU stream by position.
    #[arg(long = "unit", required = true)]
    units: Vec<PathBuf>,
    /// Comparison settings (JSON); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

// ---- output plumbing ----

/// Writer for a file path, with "-" and "absent" meaning stdout.
fn open_sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match output {
        Some(path) if path.as_os_str() != "-" => {
            let file = File::create(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

// ---- run ----

fn events_csv<W: Write>(log: &EventLog, mut out: W) -> io::Result<()> {
    // The CSV view flattens each tick to the PMU-and-verdict columns;
    // per-unit detail stays in the jsonl format.
    writeln!(
        out,
        "tick,true_utc_ms,spoof_power_dbm,pmu_capture,pmu_utc_ms,\
         phase_angle_error_deg,phase_alarm,verdict,disagreeing_units,corrected_time_ms"
    )?;
    for t in &log.ticks {
        let spoof = t
            .spoof_power_dbm
            .map(|v| v.to_string())
            .unwrap_or_default();
        let corrected = t
            .verdict
            .corrected_time_ms
            .map(|v| v.to_string())
            .unwrap_or_default();
        let mut disagreeing = String::new();
        for (i, id) in t.verdict.disagreeing_units.iter().enumerate() {
            if i > 0 {
                disagreeing.push(';');
            }
            let _ = write!(disagreeing, "{id}");
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            t.tick,
            t.true_utc_ms,
            spoof,
            label(serde_json::to_value(t.pmu_capture)),
            t.pmu_utc_ms,
            t.phase_angle_error_deg,
            t.phase_alarm,
            label(serde_json::to_value(t.verdict.state)),
            disagreeing,
            corrected,
        )?;
    }
    Ok(())
}

/// The serde name of a unit-variant enum value, as a plain string.
fn label(value: serde_json::Result<serde_json::Value>) -> String {
    match value {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> Result<u8, CliError> {
    let mut scenario = match &args.scenario {
        Some(path) => {
            let bytes = read_file(path)?;
            serde_json::from_slice::<Scenario>(&bytes)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
        }
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let log = run(&scenario).map_err(invalid)?;
    let summary = log.summary();

    let dir = cli.output.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let format = cli.format.unwrap_or(Format::Jsonl);
    let events_path = dir.join(match format {
        Format::Jsonl => "events.jsonl",
        Format::Csv => "events.csv",
    });
    let events_file = File::create(&events_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", events_path.display())))?;
    let mut events_out = BufWriter::new(events_file);
    match format {
        Format::Jsonl => log.write_jsonl(&mut events_out).map_err(io_fail)?,
        Format::Csv => events_csv(&log, &mut events_out).map_err(io_fail)?,
    }
    events_out.flush().map_err(io_fail)?;

    let summary_path = dir.join("summary.json");
    let mut summary_json = serde_json::to_string_pretty(&summary).map_err(io_fail)?;
    summary_json.push('\n');
    fs::write(&summary_path, summary_json)
        .map_err(|e| CliError::Io(format!("{}: {e}", summary_path.display())))?;

    if !cli.quiet {
        let detection = match summary.first_detection_tick {
            Some(t) => format!("attack detected on {} ticks (first at tick {t})", summary.attack_ticks),
            None => "no attack detected".to_string(),
        };
        println!(
            "run: {} ticks, {}; events -> {}, summary -> {}",
            summary.ticks,
            detection,
            events_path.display(),
            summary_path.display()
        );
    }
    Ok(EXIT_OK)
}

// ---- curve ----

fn cmd_curve(cli: &Cli, args: &CurveArgs) -> Result<u8, CliError> {
    if !(args.d_min.is_finite() && args.d_min > 0.0) {
        return Err(CliError::Invalid("d_min must be positive".into()));
    }
    if !(args.d_max.is_finite() && args.d_max > args.d_min) {
        return Err(CliError::Invalid("d_max must exceed d_min".into()));
    }
    if args.steps < 2 {
        return Err(CliError::Invalid("steps must be at least 2".into()));
    }
    let lambda = wavelength(args.freq_hz).map_err(invalid)?;
    let template = LinkBudget::with_gains_dbi(
        args.tx_power_w,
        args.tx_gain_dbi,
        args.rx_gain_dbi,
        lambda,
        args.d_min,
    )
    .map_err(invalid)?;
    let span = args.d_max / args.d_min;
    let distances: Vec<f64> = (0..args.steps)
        .map(|i| args.d_min * span.powf(i as f64 / (args.steps - 1) as f64))
        .collect();
    let curve = power_curve(&template, &distances).map_err(invalid)?;

    let mut out = open_sink(&cli.output)?;
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "distance_m,ratio").map_err(io_fail)?;
            for (d, ratio) in &curve {
                writeln!(out, "{d},{ratio:e}").map_err(io_fail)?;
            }
        }
        Format::Jsonl => {
            for (d, ratio) in &curve {
                let row = serde_json::json!({ "distance_m": d, "ratio": ratio });
                writeln!(out, "{row}").map_err(io_fail)?;
            }
        }
    }
    out.flush().map_err(io_fail)?;
    Ok(EXIT_OK)
}

// ---- codegen ----

fn cmd_codegen(cli: &Cli, args: &CodegenArgs) -> Result<u8, CliError> {
    let prns: Vec<u8> = if args.all {
        (1..=32).collect()
    } else {
        match args.prn {
            Some(prn) => vec![prn],
            None => return Err(CliError::Invalid("pass --prn <N> or --all".into())),
        }
    };
    let mut out = open_sink(&cli.output)?;
    for prn in prns {
        let code = generate_ca_code(prn).map_err(invalid)?;
        match cli.format.unwrap_or(Format::Csv) {
            Format::Csv => writeln!(out, "{},{}", prn, code.csv_row()).map_err(io_fail)?,
            Format::Jsonl => {
                let row = serde_json::json!({ "prn": prn, "chips": code.chips().to_vec() });
                writeln!(out, "{row}").map_err(io_fail)?;
            }
        }
    }
    out.flush().map_err(io_fail)?;
    Ok(EXIT_OK)
}

// ---- detect ----

/// One line of the PMU clock stream.
#[derive(Deserialize)]
struct PmuLine {
    tick: u64,
    utc_time: u64,
    lat: f64,
    lon: f64,
}

/// One unit's decoded report for one tick slot.
struct UnitRecord {
    unit_id: u8,
    utc_time: u64,
    lat: f64,
    lon: f64,
}

/// One unit report file after decoding: per-slot records (None where a
/// frame failed its checks) plus the identity taken from the first good
/// record.
struct UnitStream {
    unit_id: u8,
    /// Reference position: the first decoded fix. Later fixes are
    /// compared against it, so a mid-stream position jump disagrees.
    reference: (f64, f64),
    records: Vec<Option<UnitRecord>>,
}

fn read_unit_file(path: &Path) -> Result<Option<UnitStream>, CliError> {
    let bytes = read_file(path)?;
    let mut records: Vec<Option<UnitRecord>> = Vec::new();
    if bytes.len() >= 2 && bytes[0..2] == FRAME_MAGIC {
        for (i, chunk) in bytes.chunks(FRAME_LEN_V1).enumerate() {
            match decode_frame(chunk) {
                Ok(report) => records.push(Some(UnitRecord {
                    unit_id: report.unit_id,
                    utc_time: report.fix.utc_time_ms,
                    lat: report.fix.latitude_deg,
                    lon: report.fix.longitude_deg,
                })),
                Err(e) => {
                    eprintln!("warning: {}: frame {i}: {e}; treating as no data", path.display());
                    records.push(None);
                }
            }
        }
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::Invalid(format!("{}: neither frames nor text", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<ReceivedFrameRecord>(line) {
                Ok(r) => records.push(Some(UnitRecord {
                    unit_id: r.unit_id,
                    utc_time: r.utc_time,
                    lat: r.lat,
                    lon: r.lon,
                })),
                Err(e) => {
                    eprintln!(
                        "warning: {}:{}: {e}; treating as no data",
                        path.display(),
                        lineno + 1
                    );
                    records.push(None);
                }
            }
        }
    }
    let first = records.iter().flatten().next();
    match first {
        Some(r) => Ok(Some(UnitStream {
            unit_id: r.unit_id,
            reference: (r.lat, r.lon),
            records,
        })),
        None => {
            // A unit nothing decodes from cannot even be named; it would
            // contribute no-data rows anyway, so the vote is unaffected.
            eprintln!("warning: {}: no decodable records, skipping", path.display());
            Ok(None)
        }
    }
}

fn cmd_detect(cli: &Cli, args: &DetectArgs) -> Result<u8, CliError> {
    let config = match &args.config {
        Some(path) => {
            let bytes = read_file(path)?;
            serde_json::from_slice::<ComparisonConfig>(&bytes)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
        }
        None => ComparisonConfig::default(),
    };
    config.validate().map_err(invalid)?;

    let pmu_bytes = read_file(&args.pmu)?;
    let pmu_text = String::from_utf8(pmu_bytes)
        .map_err(|_| CliError::Invalid(format!("{}: not text", args.pmu.display())))?;
    let mut pmu_lines: Vec<PmuLine> = Vec::new();
    for (lineno, line) in pmu_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<PmuLine>(line).map_err(|e| {
            CliError::Invalid(format!("{}:{}: {e}", args.pmu.display(), lineno + 1))
        })?;
        pmu_lines.push(parsed);
    }

    let mut streams: Vec<UnitStream> = Vec::new();
    for path in &args.units {
        if let Some(stream) = read_unit_file(path)? {
            streams.push(stream);
        }
    }

    let mut out = open_sink(&cli.output)?;
    let format = cli.format.unwrap_or(Format::Jsonl);
    if format == Format::Csv {
        writeln!(out, "tick,state,disagreeing_units,corrected_time_ms").map_err(io_fail)?;
    }
    let mut attack_ticks = 0u64;
    let mut first_detection: Option<u64> = None;
    for (slot, line) in pmu_lines.iter().enumerate() {
        let pmu = PmuObservation {
            utc_time_ms: line.utc_time,
            position: (line.lat, line.lon),
        };
        let units: Vec<UnitObservation> = streams
            .iter()
            .map(|stream| match stream.records.get(slot) {
                Some(Some(r)) => {
                    UnitObservation::received(r.unit_id, r.utc_time, r.lat, r.lon)
                        .with_expected_position(stream.reference)
                }
                _ => UnitObservation::missing(stream.unit_id)
                    .with_expected_position(stream.reference),
            })
            .collect();
        let verdict = majority_vote(&pmu, &units, &config);
        if verdict.state == VerdictState::AttackDetected {
            attack_ticks += 1;
            first_detection.get_or_insert(line.tick);
        }
        let record = VerdictRecord {
            tick: line.tick,
            state: verdict.state,
            disagreeing_units: verdict.disagreeing_units,
            corrected_time_ms: verdict.corrected_time_ms,
        };
        match format {
            Format::Jsonl => {
                let json = serde_json::to_string(&record).map_err(io_fail)?;
                writeln!(out, "{json}").map_err(io_fail)?;
            }
            Format::Csv => {
                let mut disagreeing = String::new();
                for (i, id) in record.disagreeing_units.iter().enumerate() {
                    if i > 0 {
                        disagreeing.push(';');
                    }
                    let _ = write!(disagreeing, "{id}");
                }
                let corrected = record
                    .corrected_time_ms
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{}",
                    record.tick,
                    label(serde_json::to_value(record.state)),
                    disagreeing,
                    corrected
                )
                .map_err(io_fail)?;
            }
        }
    }
    out.flush().map_err(io_fail)?;

    if !cli.quiet {
        let note = match first_detection {
            Some(t) => format!("attack detected on {attack_ticks} ticks (first at tick {t})"),
            None => "no attack detected".to_string(),
        };
        eprintln!("detect: {} ticks, {}", pmu_lines.len(), note);
    }
    Ok(if attack_ticks > 0 { EXIT_ATTACK } else { EXIT_OK })
}

// ---- entry point ----

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(&cli, args),
        Command::Curve(args) => cmd_curve(&cli, args),
        Command::Codegen(args) => cmd_codegen(&cli, args),
        Command::Detect(args) => cmd_detect(&cli, args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
