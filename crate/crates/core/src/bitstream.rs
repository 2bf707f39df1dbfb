//! Packed binary sequences.
//!
//! Bits are stored eight to a byte, most significant bit first, so the
//! byte image of an 8-bit-aligned sequence is the same whether it was read
//! from `ascii01` text or from a `raw_packed` file. Pad bits in the final
//! byte are always zero.
//!
//! # File formats
//!
//! * `ascii01`: one ASCII `'0'`/`'1'` per bit. Whitespace is ignored on
//!   read; writes emit the bits followed by a single `'\n'`.
//! * `raw_packed`: an 8-byte little-endian bit-length header followed by
//!   `ceil(len / 8)` packed bytes (MSB-first, zero padded).

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BitError {
    #[error("invalid character at position {0}")]
    InvalidCharacter(usize),
    #[error("range {start}..{end} out of bounds for sequence of length {len}")]
    OutOfRange { start: usize, end: usize, len: usize },
    #[error("truncated file: header declares {declared} bits but only {available} bytes of data follow")]
    TruncatedFile { declared: u64, available: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// On-disk encodings understood by [`load_bits`] and [`save_bits`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitFormat {
    Ascii01,
    RawPacked,
}

impl FromStr for BitFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii01" => Ok(BitFormat::Ascii01),
            "raw_packed" => Ok(BitFormat::RawPacked),
            other => Err(format!("unknown bit format `{other}` (expected ascii01 or raw_packed)")),
        }
    }
}

impl fmt::Display for BitFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BitFormat::Ascii01 => "ascii01",
            BitFormat::RawPacked => "raw_packed",
        })
    }
}

/// An immutable, length-tagged sequence of bits.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSequence {
    len: usize,
    bytes: Vec<u8>,
}

impl BitSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitSequence { len, bytes: vec![0; len.div_ceil(8)] }
    }

    /// Builds a sequence from packed MSB-first bytes, keeping the first
    /// `len` bits. Excess bits are cleared.
    pub fn from_packed(mut bytes: Vec<u8>, len: usize) -> Result<Self, BitError> {
        let need = len.div_ceil(8);
        if bytes.len() < need {
            return Err(BitError::OutOfRange { start: 0, end: len, len: bytes.len() * 8 });
        }
        bytes.truncate(need);
        let mut seq = BitSequence { len, bytes };
        seq.clear_padding();
        Ok(seq)
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut builder = BitBuilder::new();
        for b in bits {
            builder.push(b);
        }
        builder.finish()
    }

    /// Parses `'0'`/`'1'` text. Whitespace is skipped; the reported
    /// position of a bad byte is its offset in `text`.
    pub fn from_ascii(text: &str) -> Result<Self, BitError> {
        let mut builder = BitBuilder::with_capacity(text.len());
        for (pos, c) in text.bytes().enumerate() {
            match c {
                b'0' => builder.push(false),
                b'1' => builder.push(true),
                c if c.is_ascii_whitespace() => {}
                _ => return Err(BitError::InvalidCharacter(pos)),
            }
        }
        Ok(builder.finish())
    }

    pub fn to_ascii(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The packed byte image, including zeroed padding.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// # Panics
    ///
    /// If `i >= self.len()`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.bytes[i >> 3] >> (7 - (i & 7))) & 1 == 1
    }

    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        self.get(i) as u8
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter { seq: self, pos: 0 }
    }

    /// Unpacks into one byte (0 or 1) per bit.
    pub fn to_bit_vec(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn ones_count(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn zeros_count(&self) -> usize {
        self.len - self.ones_count()
    }

    pub fn slice(&self, start: usize, len: usize) -> Result<BitSequence, BitError> {
        let end = start.checked_add(len).filter(|&e| e <= self.len).ok_or(BitError::OutOfRange {
            start,
            end: start.saturating_add(len),
            len: self.len,
        })?;
        if start == end {
            return Ok(BitSequence::new());
        }
        if start.is_multiple_of(8) {
            let mut bytes = self.bytes[start / 8..end.div_ceil(8)].to_vec();
            bytes.truncate(len.div_ceil(8));
            let mut out = BitSequence { len, bytes };
            out.clear_padding();
            return Ok(out);
        }
        let mut builder = BitBuilder::with_capacity(len);
        for i in start..end {
            builder.push(self.get(i));
        }
        Ok(builder.finish())
    }

    /// Reads `width` (≤ 64) bits starting at `start` as an unsigned integer,
    /// first bit most significant.
    pub fn word(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= 64 && start + width <= self.len);
        let mut v = 0u64;
        let mut i = start;
        let end = start + width;
        while i < end && !i.is_multiple_of(8) {
            v = (v << 1) | self.bit(i) as u64;
            i += 1;
        }
        while i + 8 <= end {
            v = (v << 8) | self.bytes[i >> 3] as u64;
            i += 8;
        }
        while i < end {
            v = (v << 1) | self.bit(i) as u64;
            i += 1;
        }
        v
    }

    pub fn concat(&self, other: &BitSequence) -> BitSequence {
        let mut builder = BitBuilder::with_capacity(self.len + other.len);
        builder.extend_from(self);
        builder.extend_from(other);
        builder.finish()
    }

    pub fn reversed(&self) -> BitSequence {
        BitSequence::from_bools((0..self.len).rev().map(|i| self.get(i)))
    }

    /// Bitwise XOR; `None` when lengths differ.
    pub fn xor(&self, other: &BitSequence) -> Option<BitSequence> {
        if self.len != other.len {
            return None;
        }
        let bytes = self.bytes.iter().zip(&other.bytes).map(|(a, b)| a ^ b).collect();
        Some(BitSequence { len: self.len, bytes })
    }

    /// Number of positions where the two sequences differ; `None` when
    /// lengths differ.
    pub fn hamming_distance(&self, other: &BitSequence) -> Option<usize> {
        self.xor(other).map(|x| x.ones_count())
    }

    /// Packs the bits into `u64` limbs, bit `i` of the sequence landing in
    /// bit `i % 64` of limb `i / 64` (LSB-first within a limb).
    pub fn to_limbs(&self) -> Vec<u64> {
        let mut limbs = vec![0u64; self.len.div_ceil(64)];
        for (i, b) in self.iter().enumerate() {
            if b {
                limbs[i / 64] |= 1 << (i % 64);
            }
        }
        limbs
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 64;
        let head: String = self.iter().take(SHOWN).map(|b| if b { '1' } else { '0' }).collect();
        if self.len > SHOWN {
            write!(f, "BitSequence({} bits: {head}…)", self.len)
        } else {
            write!(f, "BitSequence({} bits: {head})", self.len)
        }
    }
}

impl FromStr for BitSequence {
    type Err = BitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BitSequence::from_ascii(s)
    }
}

impl FromIterator<bool> for BitSequence {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitSequence::from_bools(iter)
    }
}

impl<'a> IntoIterator for &'a BitSequence {
    type Item = bool;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

pub struct Iter<'a> {
    seq: &'a BitSequence,
    pos: usize,
}

impl Iterator for Iter<'_> {
    type Item = bool;

    #[inline]
    fn next(&mut self) -> Option<bool> {
        if self.pos < self.seq.len {
            let b = self.seq.get(self.pos);
            self.pos += 1;
            Some(b)
        } else {
            None
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = self.seq.len - self.pos;
        (rem, Some(rem))
    }
}

impl ExactSizeIterator for Iter<'_> {}

/// Append-only builder for [`BitSequence`].
#[derive(Debug, Default)]
pub struct BitBuilder {
    len: usize,
    bytes: Vec<u8>,
}

impl BitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitBuilder { len: 0, bytes: Vec::with_capacity(bits.div_ceil(8)) }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn extend_from(&mut self, seq: &BitSequence) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&seq.bytes);
            self.len += seq.len;
        } else {
            for b in seq.iter() {
                self.push(b);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> BitSequence {
        BitSequence { len: self.len, bytes: self.bytes }
    }
}

pub fn load_bits(path: impl AsRef<Path>, format: BitFormat) -> Result<BitSequence, BitError> {
    let data = fs::read(path)?;
    decode_bits(&data, format)
}

pub fn save_bits(seq: &BitSequence, path: impl AsRef<Path>, format: BitFormat) -> Result<(), BitError> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    file.write_all(&encode_bits(seq, format))?;
    file.flush()?;
    Ok(())
}

pub fn encode_bits(seq: &BitSequence, format: BitFormat) -> Vec<u8> {
    match format {
        BitFormat::Ascii01 => {
            let mut out = Vec::with_capacity(seq.len() + 1);
            out.extend(seq.iter().map(|b| if b { b'1' } else { b'0' }));
            out.push(b'\n');
            out
        }
        BitFormat::RawPacked => {
            let mut out = Vec::with_capacity(8 + seq.bytes.len());
            out.extend_from_slice(&(seq.len() as u64).to_le_bytes());
            out.extend_from_slice(&seq.bytes);
            out
        }
    }
}

pub fn decode_bits(data: &[u8], format: BitFormat) -> Result<BitSequence, BitError> {
    match format {
        BitFormat::Ascii01 => {
            let mut builder = BitBuilder::with_capacity(data.len());
            for (pos, &c) in data.iter().enumerate() {
                match c {
                    b'0' => builder.push(false),
                    b'1' => builder.push(true),
                    c if c.is_ascii_whitespace() => {}
                    _ => return Err(BitError::InvalidCharacter(pos)),
                }
            }
            Ok(builder.finish())
        }
        BitFormat::RawPacked => {
            if data.len() < 8 {
                return Err(BitError::TruncatedFile { declared: 0, available: 0 });
            }
            let declared = u64::from_le_bytes(data[..8].try_into().expect("8-byte header"));
            let body = &data[8..];
            let need = declared.div_ceil(8);
            if (body.len() as u64) < need {
                return Err(BitError::TruncatedFile { declared, available: body.len() });
            }
            let len = usize::try_from(declared)
                .map_err(|_| BitError::TruncatedFile { declared, available: body.len() })?;
            BitSequence::from_packed(body[..need as usize].to_vec(), len)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(len: usize, seed: u64) -> BitSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random::<bool>()).collect()
    }

    #[test]
    fn ascii_parsing() {
        let s = BitSequence::from_ascii("0110").unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.to_bit_vec(), vec![0, 1, 1, 0]);
        assert_eq!(BitSequence::from_ascii("").unwrap().len(), 0);
        assert!(matches!(BitSequence::from_ascii("01x1"), Err(BitError::InvalidCharacter(2))));
        let spaced = BitSequence::from_ascii(" 01\n1\t0 ").unwrap();
        assert_eq!(spaced.to_ascii(), "0110");
    }

    #[test]
    fn counting() {
        let z = BitSequence::from_ascii("0000").unwrap();
        assert_eq!(z.ones_count(), 0);
        assert_eq!(z.zeros_count(), 4);
        assert_eq!(BitSequence::from_ascii("0110").unwrap().ones_count(), 2);

        let s = random_seq(10_000, 7);
        let mut naive = 0;
        for i in 0..s.len() {
            if s.get(i) {
                naive += 1;
            }
        }
        assert_eq!(s.ones_count(), naive);
    }

    #[test]
    fn slicing() {
        let s = BitSequence::from_ascii("0110").unwrap();
        assert_eq!(s.slice(1, 2).unwrap().to_ascii(), "11");
        assert_eq!(s.slice(0, s.len()).unwrap(), s);
        assert!(matches!(s.slice(s.len(), 1), Err(BitError::OutOfRange { .. })));
        assert!(s.slice(4, 0).unwrap().is_empty());
        assert!(matches!(s.slice(usize::MAX, 2), Err(BitError::OutOfRange { .. })));
    }

    #[test]
    fn padding_stays_zero() {
        let s = BitSequence::from_ascii("1111111111").unwrap();
        assert_eq!(s.as_bytes(), &[0xff, 0xc0]);
        let t = s.slice(0, 3).unwrap();
        assert_eq!(t.as_bytes(), &[0xe0]);
        let p = BitSequence::from_packed(vec![0xff, 0xff], 9).unwrap();
        assert_eq!(p.as_bytes(), &[0xff, 0x80]);
    }

    #[test]
    fn words_msb_first() {
        let s = BitSequence::from_ascii("1011 0000 1111 0001 1").unwrap();
        assert_eq!(s.word(0, 4), 0b1011);
        assert_eq!(s.word(2, 8), 0b11000011);
        assert_eq!(s.word(4, 13), 0b0000111100011);
    }

    #[test]
    fn ascii_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bits.txt");
        let s = BitSequence::from_ascii("101").unwrap();
        save_bits(&s, &path, BitFormat::Ascii01).unwrap();
        assert_eq!(load_bits(&path, BitFormat::Ascii01).unwrap(), s);
    }

    #[test]
    fn packed_round_trip_unaligned() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bits.bin");
        let s = random_seq(100_003, 11);
        save_bits(&s, &path, BitFormat::RawPacked).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 8 + 100_003usize.div_ceil(8));
        assert_eq!(&bytes[..8], &100_003u64.to_le_bytes());
        assert_eq!(load_bits(&path, BitFormat::RawPacked).unwrap(), s);
    }

    #[test]
    fn packed_truncated() {
        let mut data = 16u64.to_le_bytes().to_vec();
        data.push(0xaa);
        assert!(matches!(
            decode_bits(&data, BitFormat::RawPacked),
            Err(BitError::TruncatedFile { declared: 16, available: 1 })
        ));
        assert!(matches!(decode_bits(&[1, 2], BitFormat::RawPacked), Err(BitError::TruncatedFile { .. })));
    }

    #[test]
    fn aligned_images_agree() {
        let s = BitSequence::from_ascii("10100101 11110000").unwrap();
        let packed = encode_bits(&s, BitFormat::RawPacked);
        assert_eq!(&packed[8..], &[0xa5, 0xf0]);
    }

    #[test]
    fn missing_file_is_io() {
        let err = load_bits("/definitely/not/here.bits", BitFormat::Ascii01).unwrap_err();
        assert!(matches!(err, BitError::Io(_)));
    }

    proptest! {
        #[test]
        fn round_trip_both_formats(bits in proptest::collection::vec(any::<bool>(), 0..2000)) {
            let s = BitSequence::from_bools(bits.iter().copied());
            for f in [BitFormat::Ascii01, BitFormat::RawPacked] {
                let back = decode_bits(&encode_bits(&s, f), f).unwrap();
                prop_assert_eq!(&back, &s);
            }
        }

        #[test]
        fn split_and_concat(bits in proptest::collection::vec(any::<bool>(), 0..600), k in 0usize..600) {
            let s = BitSequence::from_bools(bits.iter().copied());
            let k = k.min(s.len());
            let joined = s.slice(0, k).unwrap().concat(&s.slice(k, s.len() - k).unwrap());
            prop_assert_eq!(joined, s);
        }

        #[test]
        fn ones_plus_zeros(bits in proptest::collection::vec(any::<bool>(), 0..3000)) {
            let s = BitSequence::from_bools(bits.iter().copied());
            prop_assert_eq!(s.ones_count(), bits.iter().filter(|b| **b).count());
            prop_assert_eq!(s.ones_count() + s.zeros_count(), s.len());
        }
    }
}
