//! Request traces: synthetic generation and CSV I/O.
//!
//! Generated traces are a pure function of `(spec, num_ports)`. Randomness
//! comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`; only raw `next_u64` draws are used, so the stream
//! does not depend on any distribution code that could change between crate
//! versions.
//!
//! CSV schema: a header `cycle,reset,req0,...,req{N-1}` followed by one row per
//! cycle. `cycle` is decimal and starts at 0 with no gaps, every other field is
//! `0` or `1`. Lines end with LF.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ports::RequestVector;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub cycle: u64,
    pub reset: bool,
    pub requests: RequestVector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadKind {
    /// Every port requests every cycle.
    Saturated,
    /// Each port requests independently each cycle with its own probability.
    /// A single entry applies to all ports; otherwise one entry per port.
    Bernoulli { p: Vec<f64> },
    /// Each port alternates `burst_len` requesting cycles with `idle_len`
    /// quiet cycles, with a per-port phase drawn from the seed.
    OnOff { burst_len: u64, idle_len: u64 },
    /// Replay a CSV trace. `length` and `seed` are ignored.
    Explicit(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub length: u64,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn new(kind: WorkloadKind, length: u64, seed: u64) -> Self {
        Self { kind, length, seed }
    }

    pub fn validate(&self, num_ports: usize) -> Result<()> {
        if num_ports == 0 {
            return Err(Error::Config("num_ports must be at least 1".into()));
        }
        match &self.kind {
            WorkloadKind::Bernoulli { p } => {
                if p.len() != 1 && p.len() != num_ports {
                    return Err(Error::Config(format!(
                        "expected 1 or {num_ports} request probabilities, got {}",
                        p.len()
                    )));
                }
                if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return Err(Error::Config(format!(
                        "request probability {bad} outside [0, 1]"
                    )));
                }
            }
            WorkloadKind::OnOff {
                burst_len,
                idle_len,
            } => {
                if *burst_len == 0 || *idle_len == 0 {
                    return Err(Error::Config(
                        "burst and idle lengths must be at least 1".into(),
                    ));
                }
            }
            WorkloadKind::Saturated | WorkloadKind::Explicit(_) => {}
        }
        Ok(())
    }
}

/// Uniform draw in `[0, 1)` from the top 53 bits of one `next_u64`.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn generate(spec: &WorkloadSpec, num_ports: usize) -> Result<Vec<TraceRecord>> {
    spec.validate(num_ports)?;
    let n = num_ports;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let record = |cycle, requests| TraceRecord {
        cycle,
        reset: false,
        requests,
    };

    let trace = match &spec.kind {
        WorkloadKind::Saturated => (0..spec.length)
            .map(|c| record(c, RequestVector::ones(n)))
            .collect(),
        WorkloadKind::Bernoulli { p } => {
            let probs: Vec<f64> = if p.len() == 1 { vec![p[0]; n] } else { p.clone() };
            (0..spec.length)
                .map(|c| {
                    let mut r = RequestVector::zeros(n);
                    for (port, &prob) in probs.iter().enumerate() {
                        r.set(port, unit(&mut rng) < prob);
                    }
                    record(c, r)
                })
                .collect()
        }
        WorkloadKind::OnOff {
            burst_len,
            idle_len,
        } => {
            let period = burst_len + idle_len;
            let phases: Vec<u64> = (0..n).map(|_| rng.next_u64() % period).collect();
            (0..spec.length)
                .map(|c| {
                    let mut r = RequestVector::zeros(n);
                    for (port, phase) in phases.iter().enumerate() {
                        r.set(port, (c + phase) % period < *burst_len);
                    }
                    record(c, r)
                })
                .collect()
        }
        WorkloadKind::Explicit(path) => {
            let trace = read_trace(path)?;
            if let Some(first) = trace.first() {
                if first.requests.len() != n {
                    return Err(Error::dimension(n, first.requests.len()));
                }
            }
            trace
        }
    };
    Ok(trace)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    parse_trace(BufReader::new(File::open(path)?))
}

pub fn write_trace(records: &[TraceRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    format_trace(records, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Parse a CSV trace from any reader.
pub fn parse_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut rows = reader.records();

    let header = match rows.next() {
        Some(row) => row.map_err(csv_error)?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
    };
    let width = check_header(&header)?;

    let mut trace = Vec::new();
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != width + 2 {
            return Err(Error::RowWidth {
                line,
                expected: width + 2,
                actual: row.len(),
            });
        }
        let cycle: u64 = row[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid cycle `{}`", &row[0]),
        })?;
        let expected_cycle = trace.len() as u64;
        if cycle != expected_cycle {
            return Err(Error::Parse {
                line,
                message: format!("expected cycle {expected_cycle}, found {cycle}"),
            });
        }
        let bit = |col: usize| match &row[col] {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::Parse {
                line,
                message: format!("field {} must be 0 or 1, found `{other}`", col + 1),
            }),
        };
        let reset = bit(1)?;
        let mut requests = RequestVector::zeros(width);
        for port in 0..width {
            requests.set(port, bit(port + 2)?);
        }
        trace.push(TraceRecord {
            cycle,
            reset,
            requests,
        });
    }
    Ok(trace)
}

fn check_header(header: &csv::StringRecord) -> Result<usize> {
    let bad = |message: String| Error::Parse { line: 1, message };
    if header.len() < 3 {
        return Err(bad(format!(
            "header needs cycle, reset and at least one request column, found {} columns",
            header.len()
        )));
    }
    if &header[0] != "cycle" || &header[1] != "reset" {
        return Err(bad("header must start with `cycle,reset`".into()));
    }
    for (i, name) in header.iter().skip(2).enumerate() {
        if name != format!("req{i}") {
            return Err(bad(format!("expected column `req{i}`, found `{name}`")));
        }
    }
    Ok(header.len() - 2)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Write a trace as CSV. An empty trace has no width, so it is written as
/// a single-port header.
pub fn format_trace<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let width = records.first().map_or(1, |r| r.requests.len());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["cycle".to_string(), "reset".to_string()];
    header.extend((0..width).map(|i| format!("req{i}")));
    w.write_record(&header).map_err(csv_error)?;
    for rec in records {
        if rec.requests.len() != width {
            return Err(Error::dimension(width, rec.requests.len()).at(rec.cycle));
        }
        let mut row = Vec::with_capacity(width + 2);
        row.push(rec.cycle.to_string());
        row.push(if rec.reset { "1" } else { "0" }.to_string());
        row.extend(rec.requests.iter().map(|b| if b { "1" } else { "0" }.to_string()));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
