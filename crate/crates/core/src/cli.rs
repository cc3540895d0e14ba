//! Command line front end.
//!
//! Exit codes: 0 success, 1 verification failure or I/O error, 2 bad flags or
//! configuration, 3 unreadable or malformed trace file. Machine output (JSON,
//! CSV) goes to stdout or the requested files; everything meant for humans
//! goes to stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arbiter::{Arbiter, ArbiterConfig, Policy, StepOutput, TimeSlice};
use crate::error::Error;
use crate::metrics::analyze;
use crate::netlist::depth_row;
use crate::ports::RequestVector;
use crate::verify::{self, MAX_EXHAUSTIVE_PORTS};
use crate::workload::{generate, read_trace, TraceRecord, WorkloadKind, WorkloadSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TRACE: i32 = 3;

const DEFAULT_PORTS: usize = 6;

#[derive(Debug, Parser)]
#[command(
    name = "rr-arbiter",
    version,
    about = "Cycle-accurate N-port round-robin arbiter simulator",
    after_help = "Ports are numbered from 0: port 0 is the first device."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a workload through the arbiter and report fairness metrics as JSON.
    Simulate(SimulateArgs),
    /// Print combinational depth of the chain and tree grant logic per port count.
    Depth(DepthArgs),
    /// Check the arbiter and gate models against the reference models exhaustively.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Skipscan,
    Tokenrotate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WorkloadArg {
    Saturated,
    Bernoulli,
    Onoff,
}

#[derive(Debug, Clone, Copy)]
struct SliceArg(TimeSlice);

impl FromStr for SliceArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("unlimited") {
            return Ok(SliceArg(TimeSlice::Unlimited));
        }
        s.parse::<u32>()
            .map(|c| SliceArg(TimeSlice::Cycles(c)))
            .map_err(|_| format!("`{s}` is neither a cycle count nor `unlimited`"))
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Number of ports [default: 6, or the trace width with --trace]
    #[arg(long)]
    ports: Option<usize>,
    #[arg(long, value_enum, default_value = "skipscan")]
    policy: PolicyArg,
    /// Cycles per grant, or `unlimited`
    #[arg(long, default_value = "1")]
    slice: SliceArg,
    #[arg(long, value_enum, default_value = "saturated")]
    workload: WorkloadArg,
    /// Per-port request probability for the bernoulli workload
    #[arg(long = "p", default_value_t = 0.5)]
    p: f64,
    /// Requesting run length for the onoff workload
    #[arg(long, default_value_t = 4)]
    burst: u64,
    /// Quiet run length for the onoff workload
    #[arg(long, default_value_t = 4)]
    idle: u64,
    #[arg(long, default_value_t = 1000)]
    cycles: u64,
    #[arg(long, env = "RR_ARBITER_SEED", default_value_t = 0)]
    seed: u64,
    /// Replay a CSV trace instead of generating a workload
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-cycle grants as CSV
    #[arg(long)]
    grants_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DepthArgs {
    /// Comma-separated port counts
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10,12")]
    ports: Vec<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Largest port count to sweep exhaustively (at most 12)
    #[arg(long, default_value_t = 6)]
    max_ports: usize,
    #[arg(long, env = "RR_ARBITER_SEED", default_value_t = 0)]
    seed: u64,
}

/// Parse `args` (program name first) and run the selected command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match cli.command {
        Command::Simulate(args) => simulate(args, stdout, stderr),
        Command::Depth(args) => depth(args, stdout, stderr),
        Command::Verify(args) => {
            if args.max_ports == 0 || args.max_ports > MAX_EXHAUSTIVE_PORTS {
                let _ = writeln!(
                    stderr,
                    "error: --max-ports must be between 1 and {MAX_EXHAUSTIVE_PORTS}"
                );
                return EXIT_CONFIG;
            }
            let result = verify::verify_all(args.max_ports, args.seed);
            report_verify(result, stdout, stderr)
        }
    }
}

/// Run the verification checks with a substitute scan implementation and
/// report like `verify` does.
pub fn verify_with<F>(max_ports: usize, seed: u64, select: F, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    F: Fn(usize, &RequestVector) -> Option<usize>,
{
    report_verify(verify::verify_with(max_ports, seed, select), stdout, stderr)
}

fn report_verify(
    result: Result<verify::Summary, verify::Counterexample>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    match result {
        Ok(s) => {
            let json = serde_json::json!({
                "scan_cases": s.scan_cases,
                "gate_cases": s.gate_cases,
                "fsm_cycles": s.fsm_cycles,
            });
            let _ = writeln!(stdout, "{json}");
            let _ = writeln!(
                stderr,
                "ok: {} scan cases, {} gate cases, {} fixed-priority cycles",
                s.scan_cases, s.gate_cases, s.fsm_cycles
            );
            EXIT_OK
        }
        Err(cex) => {
            let _ = writeln!(stderr, "counterexample: {cex}");
            EXIT_FAILURE
        }
    }
}

fn depth(args: DepthArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if args.ports.is_empty() || args.ports.contains(&0) {
        let _ = writeln!(stderr, "error: every port count must be at least 1");
        return EXIT_CONFIG;
    }
    for n in args.ports {
        match depth_row(n) {
            Ok(row) => {
                let _ = writeln!(stdout, "{}", serde_json::to_string(&row).expect("plain struct"));
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    EXIT_OK
}

fn simulate(args: SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match try_simulate(&args, stdout) {
        Ok(summary) => {
            let _ = writeln!(stderr, "{summary}");
            EXIT_OK
        }
        Err((code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

type Failure = (i32, String);

fn config_error(e: impl std::fmt::Display) -> Failure {
    (EXIT_CONFIG, e.to_string())
}

fn io_error(e: impl std::fmt::Display) -> Failure {
    (EXIT_FAILURE, e.to_string())
}

fn load_workload(args: &SimulateArgs) -> Result<(usize, Vec<TraceRecord>), Failure> {
    if let Some(path) = &args.trace {
        let trace = read_trace(path).map_err(|e| (EXIT_TRACE, format!("{}: {e}", path.display())))?;
        let width = trace.first().map(|r| r.requests.len());
        let ports = match (args.ports, width) {
            (Some(p), Some(w)) if p != w => {
                return Err(config_error(format!(
                    "--ports {p} does not match the {w}-port trace"
                )))
            }
            (_, Some(w)) => w,
            (Some(p), None) => p,
            (None, None) => DEFAULT_PORTS,
        };
        return Ok((ports, trace));
    }

    let ports = args.ports.unwrap_or(DEFAULT_PORTS);
    let kind = match args.workload {
        WorkloadArg::Saturated => WorkloadKind::Saturated,
        WorkloadArg::Bernoulli => WorkloadKind::Bernoulli { p: vec![args.p] },
        WorkloadArg::Onoff => WorkloadKind::OnOff {
            burst_len: args.burst,
            idle_len: args.idle,
        },
    };
    let spec = WorkloadSpec::new(kind, args.cycles, args.seed);
    let trace = generate(&spec, ports).map_err(config_error)?;
    Ok((ports, trace))
}

fn try_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<String, Failure> {
    let (ports, trace) = load_workload(args)?;
    let policy = match args.policy {
        PolicyArg::Skipscan => Policy::SkipScan,
        PolicyArg::Tokenrotate => Policy::TokenRotate,
    };
    let config = ArbiterConfig::new(ports, args.slice.0, policy);
    let mut arbiter = Arbiter::new(config).map_err(config_error)?;
    let outputs = arbiter
        .run(trace.iter().map(|r| (r.reset, &r.requests)))
        .map_err(|e| match e {
            Error::Dimension { .. } => (EXIT_TRACE, e.to_string()),
            other => io_error(other),
        })?;
    let report = analyze(&trace, &outputs).map_err(io_error)?;

    let json = serde_json::to_string(&report).expect("plain struct");
    match &args.out {
        Some(path) => std::fs::write(path, format!("{json}\n")).map_err(io_error)?,
        None => writeln!(stdout, "{json}").map_err(io_error)?,
    }
    if let Some(path) = &args.grants_csv {
        write_grants(&trace, &outputs, ports, path).map_err(io_error)?;
    }

    let slice = match args.slice.0 {
        TimeSlice::Cycles(c) => c.to_string(),
        TimeSlice::Unlimited => "unlimited".into(),
    };
    Ok(format!(
        "simulated {} cycles on {ports} ports ({policy}, slice {slice}): jain {:.4}, utilization {:.4}, {} hits, {} misses",
        report.total_cycles, report.jain_index, report.utilization, report.turn_hits, report.turn_misses
    ))
}

/// Per-cycle grant CSV: `cycle,event,termination,gnt0,...,gnt{N-1}`.
fn write_grants(
    trace: &[TraceRecord],
    outputs: &[StepOutput],
    ports: usize,
    path: &PathBuf,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "cycle,event,termination")?;
    for i in 0..ports {
        write!(w, ",gnt{i}")?;
    }
    writeln!(w)?;
    for (rec, out) in trace.iter().zip(outputs) {
        let term = out.termination.map_or_else(|| "none".to_string(), |t| t.to_string());
        write!(w, "{},{},{term}", rec.cycle, out.event)?;
        for i in 0..ports {
            write!(w, ",{}", out.grant.get(i) as u8)?;
        }
        writeln!(w)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["rr-arbiter"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn slice_arg_parses() {
        assert!(matches!("unlimited".parse::<SliceArg>(), Ok(SliceArg(TimeSlice::Unlimited))));
        assert!(matches!("3".parse::<SliceArg>(), Ok(SliceArg(TimeSlice::Cycles(3)))));
        assert!("x".parse::<SliceArg>().is_err());
    }

    #[test]
    fn simulate_saturated_is_fair() {
        let (code, out, _) = run_capture(&["simulate", "--ports", "6", "--workload", "saturated", "--cycles", "600"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["jain_index"], 1.0);
        assert_eq!(v["grants_per_port"], serde_json::json!([100, 100, 100, 100, 100, 100]));
    }

    #[test]
    fn bad_config_exits_2() {
        assert_eq!(run_capture(&["simulate", "--ports", "0"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["simulate", "--slice", "0"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["simulate", "--workload", "bernoulli", "--p", "2"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["simulate", "--policy", "lottery"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["depth", "--ports", "0"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["verify", "--max-ports", "20"]).0, EXIT_CONFIG);
    }

    #[test]
    fn depth_rows() {
        let (code, out, _) = run_capture(&["depth", "--ports", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "{\"n\":1,\"chain_depth\":1,\"tree_depth\":1}\n");
    }

    #[test]
    fn verify_small() {
        let (code, out, _) = run_capture(&["verify", "--max-ports", "3"]);
        assert_eq!(code, 0);
        assert!(out.contains("scan_cases"));
    }
}
