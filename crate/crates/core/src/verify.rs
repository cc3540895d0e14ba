//! Exhaustive and randomized equivalence checks against [`crate::oracle`].

use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arbiter::{Arbiter, ArbiterConfig, ArbiterState, Fsm, Policy, TimeSlice};
use crate::error::Result;
use crate::netlist::{build_chain, build_tree, evaluate_grants};
use crate::oracle::{fixed_priority_step, scan_next, FixedPriorityState};
use crate::ports::RequestVector;

/// Largest port count the exhaustive sweeps accept (`N * 2^N` cases each).
pub const MAX_EXHAUSTIVE_PORTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub check: &'static str,
    pub num_ports: usize,
    pub token: usize,
    pub requests: RequestVector,
    pub expected: Option<usize>,
    pub actual: Option<usize>,
    /// Cycle within a random trace, for sequential checks.
    pub cycle: Option<usize>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: N={} token={} requests={} expected={:?} actual={:?}",
            self.check, self.num_ports, self.token, self.requests, self.expected, self.actual
        )?;
        if let Some(c) = self.cycle {
            write!(f, " cycle={c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Summary {
    pub scan_cases: u64,
    pub gate_cases: u64,
    pub fsm_cycles: u64,
}

/// The grant a freshly idle SkipScan arbiter issues at `token`.
pub fn skipscan_fresh_grant(token: usize, requests: &RequestVector) -> Result<Option<usize>> {
    let config = ArbiterConfig::new(requests.len(), TimeSlice::Cycles(1), Policy::SkipScan);
    let state = ArbiterState {
        token_index: token,
        fsm: Fsm::Idle,
        slice_remaining: None,
        cycle_count: 0,
    };
    let mut arbiter = Arbiter::with_state(config, state)?;
    Ok(arbiter.step(requests, false)?.grant.port())
}

fn each_case(max_ports: usize, mut f: impl FnMut(usize, usize, RequestVector) -> Result<(), Counterexample>) -> Result<u64, Counterexample> {
    let mut cases = 0;
    for n in 1..=max_ports {
        for mask in 0u64..(1 << n) {
            let requests = RequestVector::from_mask(n, mask);
            for token in 0..n {
                f(n, token, requests.clone())?;
                cases += 1;
            }
        }
    }
    Ok(cases)
}

/// Compare `select` with [`scan_next`] over every `(N, token, requests)` for
/// `N <= max_ports`.
pub fn check_scan_equivalence<F>(max_ports: usize, select: F) -> Result<u64, Counterexample>
where
    F: Fn(usize, &RequestVector) -> Option<usize>,
{
    each_case(max_ports, |n, token, requests| {
        let expected = scan_next(token, &requests);
        let actual = select(token, &requests);
        if expected == actual {
            Ok(())
        } else {
            Err(Counterexample {
                check: "scan",
                num_ports: n,
                token,
                requests,
                expected,
                actual,
                cycle: None,
            })
        }
    })
}

/// Chain and tree gate models against [`scan_next`] over every input.
pub fn check_gate_equivalence(max_ports: usize) -> Result<u64, Counterexample> {
    let graphs: Vec<_> = (1..=max_ports).map(|n| (build_chain(n), build_tree(n))).collect();
    each_case(max_ports, |n, token, requests| {
        let expected = scan_next(token, &requests);
        let (chain, tree) = &graphs[n - 1];
        for (check, graph) in [("gate-chain", chain), ("gate-tree", tree)] {
            let out = evaluate_grants(graph, token, &requests).expect("arbiter circuit evaluates");
            let set: Vec<usize> = (0..n).filter(|&i| out[i]).collect();
            let actual = match set.as_slice() {
                [] => None,
                [p] => Some(*p),
                // more than one grant: report the second as the offender
                [_, p, ..] => Some(*p),
            };
            if set.len() > 1 || actual != expected {
                return Err(Counterexample {
                    check,
                    num_ports: n,
                    token,
                    requests,
                    expected,
                    actual,
                    cycle: None,
                });
            }
        }
        Ok(())
    })
}

/// Pinned-token SkipScan with an unlimited slice against the fixed-priority
/// FSM, over `traces` random traces of `length` cycles for each
/// `N <= max_ports`.
pub fn check_fixed_priority_equivalence(
    max_ports: usize,
    traces: usize,
    length: usize,
    seed: u64,
) -> Result<u64, Counterexample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cycles = 0;
    for n in 1..=max_ports {
        let mut config = ArbiterConfig::new(n, TimeSlice::Unlimited, Policy::SkipScan);
        config.pin_token = true;
        for _ in 0..traces {
            let mut arbiter = Arbiter::new(config.clone()).expect("valid config");
            let mut fsm = FixedPriorityState::Idle;
            // bias per trace so both sparse and dense traffic show up
            let density = rng.next_u64() % 7 + 1;
            for cycle in 0..length {
                let mut requests = RequestVector::zeros(n);
                for port in 0..n {
                    requests.set(port, rng.next_u64() % 8 < density);
                }
                let reset = rng.next_u64() % 32 == 0;
                let out = arbiter.step(&requests, reset).expect("sized trace");
                let (next, grant) = fixed_priority_step(n, fsm, &requests, reset).expect("sized trace");
                fsm = next;
                cycles += 1;
                if out.grant != grant {
                    return Err(Counterexample {
                        check: "fixed-priority",
                        num_ports: n,
                        token: 0,
                        requests,
                        expected: grant.port(),
                        actual: out.grant.port(),
                        cycle: Some(cycle),
                    });
                }
            }
        }
    }
    Ok(cycles)
}

/// Run every check with the real arbiter as the scan implementation.
pub fn verify_all(max_ports: usize, seed: u64) -> Result<Summary, Counterexample> {
    verify_with(max_ports, seed, |token, requests| {
        skipscan_fresh_grant(token, requests).expect("valid token")
    })
}

/// Like [`verify_all`] but with a caller-supplied scan implementation.
pub fn verify_with<F>(max_ports: usize, seed: u64, select: F) -> Result<Summary, Counterexample>
where
    F: Fn(usize, &RequestVector) -> Option<usize>,
{
    Ok(Summary {
        scan_cases: check_scan_equivalence(max_ports, select)?,
        gate_cases: check_gate_equivalence(max_ports)?,
        fsm_cycles: check_fixed_priority_equivalence(max_ports, 1000 / max_ports.max(1), 50, seed)?,
    })
}
