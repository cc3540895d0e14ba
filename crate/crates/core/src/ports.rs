//! Request and grant vectors.
//!
//! A [`RequestVector`] is a packed bit set with one bit per port. A
//! [`GrantVector`] stores at most one granted port, so the one-hot-or-zero
//! property of the arbiter output is carried by the type itself.

use std::fmt;

const WORD_BITS: usize = 64;

/// One request bit per port, bit `i` set iff device `i` wants the bus.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RequestVector {
    len: usize,
    words: Vec<u64>,
}

impl RequestVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Build a vector of width `len` with the listed ports set.
    ///
    /// Panics if a port is out of range.
    pub fn from_ports(len: usize, ports: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &p in ports {
            assert!(p < len, "port {p} out of range for width {len}");
            v.set(p, true);
        }
        v
    }

    /// Build a vector from the low `len` bits of `mask` (bit `i` is port `i`).
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= WORD_BITS, "from_mask supports at most 64 ports");
        let mut v = Self::zeros(len);
        if len > 0 {
            let keep = if len == WORD_BITS {
                u64::MAX
            } else {
                (1u64 << len) - 1
            };
            v.words[0] = mask & keep;
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the vector has zero width.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True when at least one port is requesting.
    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn get(&self, port: usize) -> bool {
        assert!(port < self.len, "port {port} out of range for width {}", self.len);
        self.words[port / WORD_BITS] >> (port % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, port: usize, value: bool) {
        assert!(port < self.len, "port {port} out of range for width {}", self.len);
        let bit = 1u64 << (port % WORD_BITS);
        if value {
            self.words[port / WORD_BITS] |= bit;
        } else {
            self.words[port / WORD_BITS] &= !bit;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// Lowest set port in `[lo, hi)`.
    fn first_set_in(&self, lo: usize, hi: usize) -> Option<usize> {
        if lo >= hi {
            return None;
        }
        let (first, last) = (lo / WORD_BITS, (hi - 1) / WORD_BITS);
        for w in first..=last {
            let mut word = self.words[w];
            if w == first {
                word &= u64::MAX << (lo % WORD_BITS);
            }
            if w == last && !hi.is_multiple_of(WORD_BITS) {
                word &= (1u64 << (hi % WORD_BITS)) - 1;
            }
            if word != 0 {
                return Some(w * WORD_BITS + word.trailing_zeros() as usize);
            }
        }
        None
    }

    /// First requesting port in cyclic order starting at `start`.
    ///
    /// Works as a split priority encoder: ports at or above `start` win over
    /// the wrapped-around ports below it.
    pub(crate) fn first_set_cyclic(&self, start: usize) -> Option<usize> {
        debug_assert!(start < self.len.max(1));
        self.first_set_in(start, self.len)
            .or_else(|| self.first_set_in(0, start))
    }
}

impl fmt::Display for RequestVector {
    /// Port 0 first, e.g. `1001` for ports 0 and 3 of four.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for RequestVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RequestVector({self})")
    }
}

/// Grant/acknowledge output: all-zero or exactly one port.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GrantVector {
    width: usize,
    port: Option<usize>,
}

impl GrantVector {
    pub fn none(width: usize) -> Self {
        Self { width, port: None }
    }

    pub fn one(width: usize, port: usize) -> Self {
        assert!(port < width, "port {port} out of range for width {width}");
        Self {
            width,
            port: Some(port),
        }
    }

    /// The granted port, if any.
    pub fn port(&self) -> Option<usize> {
        self.port
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, port: usize) -> bool {
        self.port == Some(port)
    }

    pub fn is_zero(&self) -> bool {
        self.port.is_none()
    }

    pub fn count_ones(&self) -> usize {
        self.port.is_some() as usize
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.width).map(|i| self.get(i)).collect()
    }
}

impl fmt::Display for GrantVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for GrantVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrantVector({self})")
    }
}
