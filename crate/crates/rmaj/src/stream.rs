//! Little-endian word streams used by every serializable structure.
//!
//! A component serializes into a sequence of `u64` words plus a bit length;
//! the index container stores each component as a length-prefixed section.

use crate::error::{Error, Result};

/// Append-only bit/word writer over `u64` words.
#[derive(Default)]
pub struct WordWriter {
    words: Vec<u64>,
    bit_len: u64,
}

impl WordWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits written so far.
    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    pub fn push_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value < (1u64 << width));
        if width == 0 {
            return;
        }
        let word = (self.bit_len / 64) as usize;
        let off = (self.bit_len % 64) as u32;
        if word == self.words.len() {
            self.words.push(0);
        }
        self.words[word] |= value << off;
        if off + width > 64 {
            self.words.push(value >> (64 - off));
        }
        self.bit_len += width as u64;
    }

    pub fn push_u64(&mut self, value: u64) {
        self.push_bits(value, 64);
    }

    /// Pad to a word boundary so the next field starts word-aligned.
    pub fn align(&mut self) {
        let rem = self.bit_len % 64;
        if rem != 0 {
            self.push_bits(0, (64 - rem) as u32);
        }
    }

    /// Append a raw word slice holding `bits` meaningful bits (word aligned).
    pub fn push_words(&mut self, words: &[u64], bits: u64) {
        self.align();
        debug_assert!(words.len() as u64 * 64 >= bits);
        self.words.extend_from_slice(words);
        self.bit_len += words.len() as u64 * 64;
    }

    pub fn finish(self) -> (Vec<u64>, u64) {
        (self.words, self.bit_len)
    }
}

/// Cursor-based reader matching [`WordWriter`].
pub struct WordReader<'a> {
    words: &'a [u64],
    bit_len: u64,
    pos: u64,
}

impl<'a> WordReader<'a> {
    pub fn new(words: &'a [u64], bit_len: u64) -> Self {
        Self { words, bit_len, pos: 0 }
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        debug_assert!(width <= 64);
        if width == 0 {
            return Ok(0);
        }
        if self.pos + width as u64 > self.bit_len {
            return Err(Error::format("truncated stream"));
        }
        let word = (self.pos / 64) as usize;
        let off = (self.pos % 64) as u32;
        let mut value = self.words[word] >> off;
        if off + width > 64 {
            value |= self.words[word + 1] << (64 - off);
        }
        if width < 64 {
            value &= (1u64 << width) - 1;
        }
        self.pos += width as u64;
        Ok(value)
    }

    pub fn read_u64(&mut self) -> Result<u64> {
        self.read_bits(64)
    }

    pub fn align(&mut self) {
        let rem = self.pos % 64;
        if rem != 0 {
            self.pos += 64 - rem;
        }
    }

    /// Read `n_words` aligned raw words.
    pub fn read_words(&mut self, n_words: usize) -> Result<&'a [u64]> {
        self.align();
        let start = (self.pos / 64) as usize;
        if self.pos + n_words as u64 * 64 > self.bit_len + 63 {
            return Err(Error::format("truncated stream"));
        }
        if start + n_words > self.words.len() {
            return Err(Error::format("truncated stream"));
        }
        self.pos += n_words as u64 * 64;
        Ok(&self.words[start..start + n_words])
    }
}
