//! Fairness, starvation and utilization statistics over a finished run.
//!
//! A port is *waiting* on a cycle when reset is low, its request bit is set
//! and it is not granted. A wait run is a maximal stretch of consecutive
//! waiting cycles; it ends at the first granted cycle (exclusive) or when the
//! request drops. Reset cycles break wait runs.

use serde::{Deserialize, Serialize};

use crate::arbiter::{Event, StepOutput};
use crate::error::{Error, Result};
use crate::workload::TraceRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Cycles each port held the grant.
    pub grants_per_port: Vec<u64>,
    /// Newly issued grants.
    pub turn_hits: u64,
    /// Cycles where the token holder was not requesting while someone was.
    pub turn_misses: u64,
    /// Longest wait run per port, in cycles.
    pub max_wait_per_port: Vec<u64>,
    /// Granted cycles divided by cycles with a pending request (0 when no
    /// request was ever pending).
    pub utilization: f64,
    /// Jain's index over `grants_per_port`; 1 when nothing was granted.
    pub jain_index: f64,
    pub total_cycles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub port: usize,
    /// Trace cycle on which the over-long wait run began.
    pub start_cycle: u64,
}

/// `(Σx)² / (n·Σx²)`, or 1 when every share is zero.
pub fn jain_index(shares: &[u64]) -> f64 {
    let sum: f64 = shares.iter().map(|&x| x as f64).sum();
    let sum_sq: f64 = shares.iter().map(|&x| (x as f64) * (x as f64)).sum();
    if sum_sq == 0.0 {
        1.0
    } else {
        sum * sum / (shares.len() as f64 * sum_sq)
    }
}

fn check_lengths(trace: &[TraceRecord], outputs: &[StepOutput]) -> Result<usize> {
    if trace.len() != outputs.len() {
        return Err(Error::dimension(trace.len(), outputs.len()));
    }
    let width = trace.first().map_or(0, |r| r.requests.len());
    for (i, (rec, out)) in trace.iter().zip(outputs).enumerate() {
        if rec.requests.len() != width {
            return Err(Error::dimension(width, rec.requests.len()).at(i as u64));
        }
        if out.grant.width() != width {
            return Err(Error::dimension(width, out.grant.width()).at(i as u64));
        }
    }
    Ok(width)
}

/// Wait runs for every port as `(port, start_cycle, length)`.
fn wait_runs(trace: &[TraceRecord], outputs: &[StepOutput], width: usize) -> Vec<(usize, u64, u64)> {
    let mut runs = Vec::new();
    let mut open: Vec<Option<(u64, u64)>> = vec![None; width];
    for (rec, out) in trace.iter().zip(outputs) {
        for (port, slot) in open.iter_mut().enumerate() {
            let waiting = !rec.reset && rec.requests.get(port) && !out.grant.get(port);
            match (waiting, slot.as_mut()) {
                (true, Some((_, len))) => *len += 1,
                (true, None) => *slot = Some((rec.cycle, 1)),
                (false, Some(&mut (start, len))) => {
                    runs.push((port, start, len));
                    *slot = None;
                }
                (false, None) => {}
            }
        }
    }
    for (port, slot) in open.into_iter().enumerate() {
        if let Some((start, len)) = slot {
            runs.push((port, start, len));
        }
    }
    runs
}

pub fn analyze(trace: &[TraceRecord], outputs: &[StepOutput]) -> Result<SimReport> {
    let width = check_lengths(trace, outputs)?;
    let mut grants_per_port = vec![0u64; width];
    let (mut turn_hits, mut turn_misses) = (0u64, 0u64);
    let (mut pending_cycles, mut served_cycles) = (0u64, 0u64);

    for (rec, out) in trace.iter().zip(outputs) {
        if let Some(p) = out.grant.port() {
            grants_per_port[p] += 1;
        }
        match out.event {
            Event::TurnHit(_) => turn_hits += 1,
            Event::TurnMiss(_) => turn_misses += 1,
            Event::Held(_) | Event::None => {}
        }
        if !rec.reset && rec.requests.any() {
            pending_cycles += 1;
            if !out.grant.is_zero() {
                served_cycles += 1;
            }
        }
    }

    let mut max_wait_per_port = vec![0u64; width];
    for (port, _, len) in wait_runs(trace, outputs, width) {
        max_wait_per_port[port] = max_wait_per_port[port].max(len);
    }

    let utilization = if pending_cycles == 0 {
        0.0
    } else {
        served_cycles as f64 / pending_cycles as f64
    };

    Ok(SimReport {
        jain_index: jain_index(&grants_per_port),
        grants_per_port,
        turn_hits,
        turn_misses,
        max_wait_per_port,
        utilization,
        total_cycles: trace.len() as u64,
    })
}

/// Every wait run longer than `bound` cycles, ordered by start cycle then port.
pub fn starvation_check(
    trace: &[TraceRecord],
    outputs: &[StepOutput],
    bound: u64,
) -> Result<Vec<Violation>> {
    if bound == 0 {
        return Err(Error::Config("starvation bound must be at least 1".into()));
    }
    let width = check_lengths(trace, outputs)?;
    let mut found: Vec<Violation> = wait_runs(trace, outputs, width)
        .into_iter()
        .filter(|&(_, _, len)| len > bound)
        .map(|(port, start_cycle, _)| Violation { port, start_cycle })
        .collect();
    found.sort_by_key(|v| (v.start_cycle, v.port));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ports::{GrantVector, RequestVector};

    fn rec(cycle: u64, n: usize, ports: &[usize]) -> TraceRecord {
        TraceRecord {
            cycle,
            reset: false,
            requests: RequestVector::from_ports(n, ports),
        }
    }

    fn out(n: usize, port: Option<usize>) -> StepOutput {
        StepOutput {
            grant: port.map_or(GrantVector::none(n), |p| GrantVector::one(n, p)),
            event: port.map_or(Event::None, Event::Held),
            termination: None,
        }
    }

    #[test]
    fn jain_examples() {
        assert_eq!(jain_index(&[100, 100, 100, 100]), 1.0);
        assert_eq!(jain_index(&[0, 0, 0]), 1.0);
        assert!((jain_index(&[1, 0]) - 0.5).abs() < 1e-12);
        assert!((jain_index(&[3, 1]) - 16.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_trace_conventions() {
        let trace: Vec<_> = (0..10).map(|c| rec(c, 3, &[])).collect();
        let outs: Vec<_> = (0..10).map(|_| out(3, None)).collect();
        let r = analyze(&trace, &outs).unwrap();
        assert_eq!(r.grants_per_port, [0, 0, 0]);
        assert_eq!(r.max_wait_per_port, [0, 0, 0]);
        assert_eq!((r.turn_hits, r.turn_misses), (0, 0));
        assert_eq!(r.utilization, 0.0);
        assert_eq!(r.jain_index, 1.0);
        assert_eq!(r.total_cycles, 10);
    }

    #[test]
    fn wait_is_inclusive_exclusive() {
        // port 1 requests on cycles 0..4, granted on cycle 3
        let trace: Vec<_> = (0..5).map(|c| rec(c, 2, &[1])).collect();
        let grants = [None, None, None, Some(1), Some(1)];
        let outs: Vec<_> = grants.iter().map(|&g| out(2, g)).collect();
        let r = analyze(&trace, &outs).unwrap();
        assert_eq!(r.max_wait_per_port, [0, 3]);
        assert_eq!(r.utilization, 0.4);
    }

    #[test]
    fn reset_breaks_wait_runs() {
        let mut trace: Vec<_> = (0..6).map(|c| rec(c, 1, &[0])).collect();
        trace[3].reset = true;
        let outs: Vec<_> = (0..6).map(|_| out(1, None)).collect();
        let r = analyze(&trace, &outs).unwrap();
        assert_eq!(r.max_wait_per_port, [3]);
        assert_eq!(starvation_check(&trace, &outs, 1).unwrap().len(), 2);
        assert_eq!(starvation_check(&trace, &outs, 2).unwrap().len(), 1);
    }

    #[test]
    fn length_mismatch_is_dimension_error() {
        let trace = vec![rec(0, 2, &[0])];
        assert!(matches!(analyze(&trace, &[]), Err(Error::Dimension { .. })));
        assert!(starvation_check(&trace, &[], 4).is_err());
    }

    #[test]
    fn broken_arbiter_starving_port_2() {
        // a stub that serves ports 0 and 1 alternately and never port 2
        let trace: Vec<_> = (0..20).map(|c| rec(c, 3, &[0, 1, 2])).collect();
        let outs: Vec<_> = (0..20).map(|c| out(3, Some(c % 2))).collect();
        let v = starvation_check(&trace, &outs, 6).unwrap();
        assert_eq!(v, [Violation { port: 2, start_cycle: 0 }]);
    }

    #[test]
    fn empty_trace_no_violations() {
        assert!(starvation_check(&[], &[], 1).unwrap().is_empty());
        assert!(starvation_check(&[], &[], 0).is_err());
    }

    #[test]
    fn report_json_field_names() {
        let trace = vec![rec(0, 2, &[0])];
        let outs = vec![out(2, Some(0))];
        let json = serde_json::to_value(analyze(&trace, &outs).unwrap()).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        for k in [
            "grants_per_port",
            "turn_hits",
            "turn_misses",
            "max_wait_per_port",
            "utilization",
            "jain_index",
            "total_cycles",
        ] {
            assert!(keys.contains(&k), "{k}");
        }
        assert_eq!(keys.len(), 7);
    }
}
