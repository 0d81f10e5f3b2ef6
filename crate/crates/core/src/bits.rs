//! Bitstrings with exact lengths.
//!
//! Protocol values travel as bitstrings; the canonical order everywhere is
//! (length, lexicographic), which is total on distinct strings. Bits are
//! stored MSB-first within each byte.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

impl Bits {
    pub fn new() -> Self {
        Bits { bytes: Vec::new(), len: 0 }
    }

    pub fn with_capacity(bits: usize) -> Self {
        Bits { bytes: Vec::with_capacity(bits.div_ceil(8)), len: 0 }
    }

    /// Interprets all bits of `bytes` (len = 8 * bytes.len()).
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let len = bytes.len() * 8;
        Bits { bytes, len }
    }

    /// First `len` bits of `bytes`; trailing bits of the last byte must be zero.
    pub fn from_bytes_len(mut bytes: Vec<u8>, len: usize) -> Self {
        assert!(len <= bytes.len() * 8);
        bytes.truncate(len.div_ceil(8));
        let mut b = Bits { bytes, len };
        b.mask_tail();
        b
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let i = self.len;
            self.bytes[i / 8] |= 1 << (7 - i % 8);
        }
        self.len += 1;
    }

    pub fn extend(&mut self, other: &Bits) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    /// Big-endian unsigned value in `width` bits.
    pub fn push_uint(&mut self, v: u64, width: usize) {
        debug_assert!(width == 64 || v < (1u64 << width));
        for i in (0..width).rev() {
            self.push(v >> i & 1 == 1);
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl Ord for Bits {
    fn cmp(&self, other: &Self) -> Ordering {
        // (length, lexicographic); tail bits are kept zeroed so byte compare
        // matches bit-lexicographic compare at equal lengths.
        self.len
            .cmp(&other.len)
            .then_with(|| self.bytes.cmp(&other.bytes))
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits[")?;
        for b in self.iter() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        write!(f, "]")
    }
}

/// Cursor for sequential decoding.
pub struct BitReader<'a> {
    bits: &'a Bits,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a Bits) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn read(&mut self) -> Option<bool> {
        if self.pos < self.bits.len() {
            let b = self.bits.get(self.pos);
            self.pos += 1;
            Some(b)
        } else {
            None
        }
    }

    pub fn read_uint(&mut self, width: usize) -> Option<u64> {
        if self.remaining() < width {
            return None;
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = v << 1 | self.read().unwrap() as u64;
        }
        Some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_get_roundtrip() {
        let mut b = Bits::new();
        let pattern = [true, false, true, true, false, false, false, true, true, false];
        for &bit in &pattern {
            b.push(bit);
        }
        assert_eq!(b.len(), 10);
        for (i, &bit) in pattern.iter().enumerate() {
            assert_eq!(b.get(i), bit);
        }
    }

    #[test]
    fn order_is_length_then_lex() {
        let mk = |s: &str| {
            let mut b = Bits::new();
            for c in s.chars() {
                b.push(c == '1');
            }
            b
        };
        assert!(mk("") < mk("0"));
        assert!(mk("1") < mk("00"));
        assert!(mk("01") < mk("10"));
        assert!(mk("111") < mk("0000"));
    }

    #[test]
    fn uint_roundtrip() {
        let mut b = Bits::new();
        b.push_uint(0xdead, 16);
        b.push_uint(5, 3);
        let mut r = BitReader::new(&b);
        assert_eq!(r.read_uint(16), Some(0xdead));
        assert_eq!(r.read_uint(3), Some(5));
        assert_eq!(r.read_uint(1), None);
    }
}
