use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use rand::Rng;

use crate::error::{ensure, Error, Result};

/// A packed bit string.
///
/// Bit 0 is the first bit of the sequence and the least significant bit of
/// word 0. Bits past `len` in the last word are always zero, so derived
/// equality and hashing are bitwise.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { words: vec![0; words_for(len)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec { words: vec![u64::MAX; words_for(len)], len };
        v.trim();
        v
    }

    /// The low `len` bits of `value` (`len` ≤ 64).
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut v = BitVec { words: if len == 0 { vec![] } else { vec![value] }, len };
        v.trim();
        v
    }

    pub fn from_words(words: Vec<u64>, len: usize) -> Self {
        assert!(words.len() == words_for(len), "word count does not match length");
        let mut v = BitVec { words, len };
        v.trim();
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = BitVec::zeros(0);
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Parses a string of `0`/`1` characters; the first character is bit 0.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVec::from_bits)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.gen::<u64>()).collect();
        BitVec::from_words(words, len)
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        let i = self.len - 1;
        self.set(i, bit);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Value as an integer, for vectors of at most 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 on a {}-bit vector", self.len);
        self.words.first().copied().unwrap_or(0)
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        ones & 1 == 1
    }

    pub fn checked_xor(&self, other: &BitVec) -> Result<BitVec> {
        ensure(self.len == other.len, || {
            format!("xor of {}-bit and {}-bit vectors", self.len, other.len)
        })?;
        Ok(self ^ other)
    }

    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        out.or_shifted(other, self.len);
        out
    }

    pub fn concat_all<'a, I: IntoIterator<Item = &'a BitVec>>(parts: I) -> BitVec {
        let parts: Vec<&BitVec> = parts.into_iter().collect();
        let total = parts.iter().map(|p| p.len).sum();
        let mut out = BitVec::zeros(total);
        let mut at = 0;
        for p in parts {
            out.or_shifted(p, at);
            at += p.len;
        }
        out
    }

    // ORs `src` into self starting at bit `at`.
    fn or_shifted(&mut self, src: &BitVec, at: usize) {
        debug_assert!(at + src.len <= self.len);
        let (w, s) = (at / 64, at % 64);
        for (k, &word) in src.words.iter().enumerate() {
            self.words[w + k] |= word << s;
            if s != 0 && w + k + 1 < self.words.len() {
                self.words[w + k + 1] |= word >> (64 - s);
            }
        }
    }

    /// Bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.len, "slice {start}+{len} out of range for {}", self.len);
        let mut out = BitVec::zeros(len);
        let (w, s) = (start / 64, start % 64);
        for k in 0..out.words.len() {
            let lo = self.words[w + k] >> s;
            let hi = if s != 0 && w + k + 1 < self.words.len() {
                self.words[w + k + 1] << (64 - s)
            } else {
                0
            };
            out.words[k] = lo | hi;
        }
        out.trim();
        out
    }

    pub fn reversed(&self) -> BitVec {
        BitVec::from_bits((0..self.len).rev().map(|i| self.get(i)))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions of the set bits, ascending.
    pub fn ones_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count_ones());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(wi * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    /// Packed bytes, bit `8i + j` in bit `j` (LSB = 0) of byte `i`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        (0..nbytes).map(|i| (self.words[i / 8] >> ((i % 8) * 8)) as u8).collect()
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<BitVec> {
        ensure(bytes.len() == len.div_ceil(8), || {
            format!("{} bytes cannot hold exactly {len} bits", bytes.len())
        })?;
        let mut v = BitVec::zeros(len);
        for (i, &b) in bytes.iter().enumerate() {
            v.words[i / 8] |= (b as u64) << ((i % 8) * 8);
        }
        let before = v.clone();
        v.trim();
        if v != before {
            return Err(Error::Parse(format!("padding bits set beyond length {len}")));
        }
        Ok(v)
    }

    /// Lowercase hex of [`BitVec::to_bytes`], two digits per byte.
    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<BitVec> {
        if !hex.len().is_multiple_of(2) {
            return Err(Error::Parse(format!("odd-length hex string {hex:?}")));
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| {
                u8::from_str_radix(&hex[i..i + 2], 16)
                    .map_err(|e| Error::Parse(format!("bad hex {hex:?}: {e}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        BitVec::from_bytes(&bytes, len)
    }

    /// Length-prefixed form `len:hex` used in transcript dumps.
    pub fn to_len_hex(&self) -> String {
        format!("{}:{}", self.len, self.to_hex())
    }

    pub fn parse_len_hex(s: &str) -> Result<BitVec> {
        let (len, hex) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected len:hex, got {s:?}")))?;
        let len: usize = len.parse().map_err(|e| Error::Parse(format!("bad length in {s:?}: {e}")))?;
        BitVec::from_hex(hex, len)
    }
}

impl BitXorAssign<&BitVec> for BitVec {
    fn bitxor_assign(&mut self, rhs: &BitVec) {
        assert_eq!(self.len, rhs.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl BitXor for &BitVec {
    type Output = BitVec;
    fn bitxor(self, rhs: &BitVec) -> BitVec {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

/// Shorter vectors first; equal lengths compare as unsigned integers.
impl Ord for BitVec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bit_string_order_is_index_order() {
        let v = BitVec::from_bit_str("1011").unwrap();
        assert!(v.get(0) && !v.get(1) && v.get(2) && v.get(3));
        assert_eq!(v.to_u64(), 0b1101);
        assert_eq!(v.to_string(), "1011");
    }

    #[test]
    fn hex_is_little_endian_within_byte() {
        let v = BitVec::from_bit_str("1000000001").unwrap();
        assert_eq!(v.to_hex(), "0102");
        assert_eq!(v.to_len_hex(), "10:0102");
        assert_eq!(BitVec::parse_len_hex("10:0102").unwrap(), v);
        assert!(BitVec::parse_len_hex("10:01ff").is_err());
        assert_eq!(BitVec::zeros(0).to_len_hex(), "0:");
    }

    #[test]
    fn slice_and_concat_across_words() {
        let mut rng = rand::thread_rng();
        let a = BitVec::random(100, &mut rng);
        let b = BitVec::random(37, &mut rng);
        let c = a.concat(&b);
        assert_eq!(c.len(), 137);
        assert_eq!(c.slice(0, 100), a);
        assert_eq!(c.slice(100, 37), b);
        assert_eq!(c.slice(63, 5).to_string(), c.to_string()[63..68]);
    }

    #[test]
    fn ordering_is_numeric() {
        let a = BitVec::from_u64(3, 8);
        let b = BitVec::from_u64(200, 8);
        assert!(a < b);
        assert!(BitVec::from_u64(255, 8) < BitVec::zeros(9));
    }

    proptest! {
        #[test]
        fn len_hex_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let v = BitVec::from_bits(bits);
            prop_assert_eq!(BitVec::parse_len_hex(&v.to_len_hex()).unwrap(), v);
        }

        #[test]
        fn reverse_is_involution(bits in proptest::collection::vec(any::<bool>(), 0..150)) {
            let v = BitVec::from_bits(bits);
            prop_assert_eq!(v.reversed().reversed(), v);
        }
    }
}
