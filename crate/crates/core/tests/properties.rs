use proptest::prelude::*;

use rr_arbiter::workload::{format_trace, parse_trace};
use rr_arbiter::{
    analyze, generate, starvation_check, Arbiter, ArbiterConfig, Event, Policy, RequestVector,
    TimeSlice, TraceRecord, WorkloadKind, WorkloadSpec,
};

fn policy() -> impl Strategy<Value = Policy> {
    prop_oneof![Just(Policy::SkipScan), Just(Policy::TokenRotate)]
}

fn slice() -> impl Strategy<Value = TimeSlice> {
    prop_oneof![(1u32..=5).prop_map(TimeSlice::Cycles), Just(TimeSlice::Unlimited)]
}

/// `(num_ports, cycles)` where each cycle is `(reset, requests)`.
fn trace(max_ports: usize, max_len: usize) -> impl Strategy<Value = (usize, Vec<(bool, RequestVector)>)> {
    (1..=max_ports).prop_flat_map(move |n| {
        let cycle = (prop::bool::weighted(0.05), prop::collection::vec(any::<bool>(), n))
            .prop_map(|(reset, bits)| (reset, RequestVector::from_bools(&bits)));
        (Just(n), prop::collection::vec(cycle, 0..max_len))
    })
}

fn records(cycles: &[(bool, RequestVector)]) -> Vec<TraceRecord> {
    cycles
        .iter()
        .enumerate()
        .map(|(c, (reset, requests))| TraceRecord {
            cycle: c as u64,
            reset: *reset,
            requests: requests.clone(),
        })
        .collect()
}

proptest! {
    #[test]
    fn grant_is_one_hot_and_requested((n, cycles) in trace(16, 80), policy in policy(), slice in slice()) {
        let mut a = Arbiter::new(ArbiterConfig::new(n, slice, policy)).unwrap();
        for (reset, req) in &cycles {
            let out = a.step(req, *reset).unwrap();
            prop_assert!(out.grant.to_bools().iter().filter(|&&b| b).count() <= 1);
            if let Some(p) = out.grant.port() {
                prop_assert!(req.get(p));
                prop_assert!(!reset);
            }
            if let Event::TurnHit(p) | Event::Held(p) = out.event {
                prop_assert_eq!(out.grant.port(), Some(p));
            }
        }
    }

    #[test]
    fn skipscan_is_work_conserving((n, cycles) in trace(12, 80), slice in slice()) {
        let mut a = Arbiter::new(ArbiterConfig::new(n, slice, Policy::SkipScan)).unwrap();
        for (reset, req) in &cycles {
            let out = a.step(req, *reset).unwrap();
            prop_assert_eq!(!out.grant.is_zero(), !reset && req.any());
            prop_assert!(!matches!(out.event, Event::TurnMiss(_)));
        }
    }

    #[test]
    fn tokenrotate_accounts_every_busy_cycle((n, cycles) in trace(8, 80), slice in slice()) {
        let mut a = Arbiter::new(ArbiterConfig::new(n, slice, Policy::TokenRotate)).unwrap();
        for (reset, req) in &cycles {
            let out = a.step(req, *reset).unwrap();
            let accounted = matches!(out.event, Event::TurnHit(_) | Event::TurnMiss(_) | Event::Held(_));
            prop_assert_eq!(accounted, !reset && req.any());
        }
    }

    #[test]
    fn step_is_deterministic((n, cycles) in trace(10, 40), policy in policy(), slice in slice()) {
        let mut a = Arbiter::new(ArbiterConfig::new(n, slice, policy)).unwrap();
        for (reset, req) in &cycles {
            let mut twin = a.clone();
            let out = a.step(req, *reset).unwrap();
            prop_assert_eq!(twin.step(req, *reset).unwrap(), out);
            prop_assert_eq!(twin, a.clone());
        }
    }

    #[test]
    fn run_equals_fold((n, cycles) in trace(8, 40), policy in policy(), slice in slice()) {
        let config = ArbiterConfig::new(n, slice, policy);
        let batch = Arbiter::new(config.clone()).unwrap().run(cycles.iter().map(|(r, q)| (*r, q))).unwrap();
        let mut a = Arbiter::new(config).unwrap();
        let folded: Vec<_> = cycles.iter().map(|(r, q)| a.step(q, *r).unwrap()).collect();
        prop_assert_eq!(batch, folded);
    }

    #[test]
    fn reset_always_clears((n, cycles) in trace(8, 40), policy in policy(), slice in slice()) {
        let mut a = Arbiter::new(ArbiterConfig::new(n, slice, policy)).unwrap();
        for (reset, req) in &cycles {
            a.step(req, *reset).unwrap();
        }
        let out = a.step(&RequestVector::ones(n), true).unwrap();
        prop_assert!(out.grant.is_zero());
        prop_assert_eq!(a.state().token_index, 0);
    }

    #[test]
    fn continuous_requester_served_within_bound(
        (n, cycles) in trace(8, 120),
        s in 1u32..=4,
        hog_seed in any::<usize>(),
    ) {
        let hog = hog_seed % n;
        let cycles: Vec<_> = cycles
            .into_iter()
            .map(|(_, mut r)| { r.set(hog, true); (false, r) })
            .collect();
        let recs = records(&cycles);
        let mut a = Arbiter::new(ArbiterConfig::new(n, TimeSlice::Cycles(s), Policy::SkipScan)).unwrap();
        let outs = a.run(cycles.iter().map(|(r, q)| (*r, q))).unwrap();
        let bound = ((n - 1) as u64 * s as u64).max(1);
        prop_assert!(starvation_check(&recs, &outs, bound).unwrap().is_empty());
        let report = analyze(&recs, &outs).unwrap();
        if let Some(&wait) = report.max_wait_per_port.get(hog) {
            prop_assert!(wait <= (n - 1) as u64 * s as u64);
        }
    }

    #[test]
    fn saturated_shares_are_exact(n in 1usize..=8, s in 1u32..=4, k in 1u64..=5) {
        let len = k * n as u64 * s as u64;
        let recs = generate(&WorkloadSpec::new(WorkloadKind::Saturated, len, 0), n).unwrap();
        let mut a = Arbiter::new(ArbiterConfig::new(n, TimeSlice::Cycles(s), Policy::SkipScan)).unwrap();
        let outs = a.run(recs.iter().map(|r| (r.reset, &r.requests))).unwrap();
        let report = analyze(&recs, &outs).unwrap();
        prop_assert!(report.grants_per_port.iter().all(|&g| g == k * s as u64));
        prop_assert_eq!(report.jain_index, 1.0);
        prop_assert_eq!(report.turn_misses, 0);
        for (c, out) in outs.iter().enumerate() {
            prop_assert_eq!(out.grant.port(), Some(c / s as usize % n));
        }
    }

    #[test]
    fn report_invariants((n, cycles) in trace(8, 100), policy in policy(), slice in slice()) {
        let recs = records(&cycles);
        let mut a = Arbiter::new(ArbiterConfig::new(n, slice, policy)).unwrap();
        let outs = a.run(cycles.iter().map(|(r, q)| (*r, q))).unwrap();
        let report = analyze(&recs, &outs).unwrap();
        prop_assert!(report.grants_per_port.iter().sum::<u64>() <= report.total_cycles);
        prop_assert!(report.jain_index > 0.0 && report.jain_index <= 1.0 + 1e-12);
        prop_assert!((0.0..=1.0).contains(&report.utilization));
    }

    #[test]
    fn csv_round_trip((n, cycles) in trace(20, 60)) {
        prop_assume!(!cycles.is_empty());
        let recs = records(&cycles);
        let mut buf = Vec::new();
        format_trace(&recs, &mut buf).unwrap();
        prop_assert_eq!(parse_trace(buf.as_slice()).unwrap(), recs);
        prop_assert!(n >= 1);
    }

    #[test]
    fn generated_traces_are_well_formed(
        n in 1usize..=16,
        len in 0u64..200,
        seed in any::<u64>(),
        p in 0.0f64..=1.0,
        burst in 1u64..6,
        idle in 1u64..6,
    ) {
        for kind in [
            WorkloadKind::Saturated,
            WorkloadKind::Bernoulli { p: vec![p] },
            WorkloadKind::OnOff { burst_len: burst, idle_len: idle },
        ] {
            let spec = WorkloadSpec::new(kind, len, seed);
            let t = generate(&spec, n).unwrap();
            prop_assert_eq!(t.len() as u64, len);
            for (c, r) in t.iter().enumerate() {
                prop_assert_eq!(r.cycle, c as u64);
                prop_assert_eq!(r.requests.len(), n);
            }
            prop_assert_eq!(generate(&spec, n).unwrap(), t);
        }
    }
}

#[test]
fn csv_file_round_trip_100_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let spec = WorkloadSpec::new(WorkloadKind::Bernoulli { p: vec![0.3] }, 100, 77);
    let t = generate(&spec, 5).unwrap();
    rr_arbiter::write_trace(&t, &path).unwrap();
    assert_eq!(rr_arbiter::read_trace(&path).unwrap(), t);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("cycle,reset,req0,req1,req2,req3,req4\n"));
    assert!(!text.contains('\r'));
}
