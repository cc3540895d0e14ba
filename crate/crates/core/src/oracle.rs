//! Reference models used as ground truth in equivalence checks.
//!
//! These are deliberately naive and share no code with [`crate::arbiter`]
//! beyond the plain vector types: explicit loops, per-bit reads, no masks.

use crate::error::{Error, Result};
use crate::ports::{GrantVector, RequestVector};

/// First requesting port visiting `token_index, token_index + 1, ...` modulo
/// N, one port per loop iteration.
pub fn scan_next(token_index: usize, requests: &RequestVector) -> Option<usize> {
    let n = requests.len();
    let mut port = token_index;
    for _ in 0..n {
        if requests.get(port) {
            return Some(port);
        }
        port += 1;
        if port == n {
            port = 0;
        }
    }
    None
}

/// State of the fixed-priority ASM: idle, or granting port `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FixedPriorityState {
    #[default]
    Idle,
    Gnt(usize),
}

/// One clock edge of the fixed-priority ASM.
///
/// From `Idle` the decision boxes are checked in order `r0, r1, ...` and the
/// first set request wins. `Gnt(k)` is held while `r_k` stays high. When `r_k`
/// drops the machine leaves `Gnt(k)` and the same edge falls through the idle
/// decision chain, so the next grant (if any) appears without a dead cycle.
/// Reset forces `Idle`.
pub fn fixed_priority_step(
    num_ports: usize,
    state: FixedPriorityState,
    requests: &RequestVector,
    reset: bool,
) -> Result<(FixedPriorityState, GrantVector)> {
    if requests.len() != num_ports {
        return Err(Error::dimension(num_ports, requests.len()));
    }
    if reset {
        return Ok((FixedPriorityState::Idle, GrantVector::none(num_ports)));
    }
    if let FixedPriorityState::Gnt(k) = state {
        if requests.get(k) {
            return Ok((FixedPriorityState::Gnt(k), GrantVector::one(num_ports, k)));
        }
    }
    let mut k = 0;
    while k < num_ports {
        if requests.get(k) {
            return Ok((FixedPriorityState::Gnt(k), GrantVector::one(num_ports, k)));
        }
        k += 1;
    }
    Ok((FixedPriorityState::Idle, GrantVector::none(num_ports)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_next_examples() {
        assert_eq!(scan_next(0, &RequestVector::zeros(4)), None);
        assert_eq!(scan_next(2, &RequestVector::from_ports(4, &[0, 3])), Some(3));
        for p in 0..5 {
            assert_eq!(scan_next(p, &RequestVector::from_ports(5, &[p])), Some(p));
        }
    }

    #[test]
    fn scan_next_none_iff_all_clear() {
        for n in 1..=6 {
            for mask in 0u64..(1 << n) {
                let r = RequestVector::from_mask(n, mask);
                for t in 0..n {
                    assert_eq!(scan_next(t, &r).is_none(), mask == 0);
                }
            }
        }
    }

    #[test]
    fn idle_picks_lowest_request() {
        let (s, g) =
            fixed_priority_step(4, FixedPriorityState::Idle, &RequestVector::from_ports(4, &[1, 2]), false)
                .unwrap();
        assert_eq!(s, FixedPriorityState::Gnt(1));
        assert_eq!(g.port(), Some(1));
    }

    #[test]
    fn lowest_index_rule_exhaustive() {
        for n in 1..=6 {
            for mask in 1u64..(1 << n) {
                let r = RequestVector::from_mask(n, mask);
                let (s, _) = fixed_priority_step(n, FixedPriorityState::Idle, &r, false).unwrap();
                let lowest = mask.trailing_zeros() as usize;
                assert_eq!(s, FixedPriorityState::Gnt(lowest));
            }
        }
    }

    #[test]
    fn grant_held_while_request_high() {
        let r = RequestVector::from_ports(3, &[0]);
        let (s, g) = fixed_priority_step(3, FixedPriorityState::Gnt(0), &r, false).unwrap();
        assert_eq!(s, FixedPriorityState::Gnt(0));
        assert_eq!(g.port(), Some(0));
        let r = RequestVector::from_ports(3, &[0, 2]);
        let (s, _) = fixed_priority_step(3, FixedPriorityState::Gnt(2), &r, false).unwrap();
        assert_eq!(s, FixedPriorityState::Gnt(2));
    }

    #[test]
    fn release_returns_to_idle_chain() {
        let (s, g) =
            fixed_priority_step(3, FixedPriorityState::Gnt(1), &RequestVector::zeros(3), false).unwrap();
        assert_eq!(s, FixedPriorityState::Idle);
        assert!(g.is_zero());
        let (s, _) = fixed_priority_step(
            3,
            FixedPriorityState::Gnt(1),
            &RequestVector::from_ports(3, &[2]),
            false,
        )
        .unwrap();
        assert_eq!(s, FixedPriorityState::Gnt(2));
    }

    #[test]
    fn reset_forces_idle() {
        let (s, g) =
            fixed_priority_step(3, FixedPriorityState::Gnt(2), &RequestVector::ones(3), true).unwrap();
        assert_eq!(s, FixedPriorityState::Idle);
        assert!(g.is_zero());
    }

    #[test]
    fn size_mismatch_is_dimension_error() {
        let e = fixed_priority_step(3, FixedPriorityState::Idle, &RequestVector::zeros(2), false);
        assert!(matches!(e, Err(Error::Dimension { expected: 3, actual: 2, .. })));
    }
}
