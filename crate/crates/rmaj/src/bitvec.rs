//! Compressed bit vectors with constant-time access/rank/select.
//!
//! Two layouts are provided. [`RankSelectBitVector`] stores the bits plainly
//! with a two-level rank directory plus sampled select hints, and answers
//! access/rank/select without scanning. [`SparseSelectVector`] is an
//! Elias-Fano layout for sparse sets of one-positions where only select and
//! access are needed; it is the cheaper choice when the number of ones is far
//! below the universe size.
//!
//! Positions are 1-based throughout, matching the array indexing used by the
//! rest of the crate. `rank(i)` counts ones in positions `1..=i`, with
//! `rank(0) = 0`; `select(j)` returns the position of the j-th one.

use crate::error::{Error, Result};
use crate::stream::{WordReader, WordWriter};

const SUPERBLOCK_BITS: u64 = 4096;
const WORDS_PER_SUPERBLOCK: usize = (SUPERBLOCK_BITS / 64) as usize;
const SELECT_SAMPLE: u64 = 512;

/// Raw packed bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainBits {
    len: u64,
    words: Vec<u64>,
}

impl PlainBits {
    pub fn new(len: u64) -> Self {
        let n_words = len.div_ceil(64) as usize;
        Self { len, words: vec![0; n_words] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut pb = Self::new(bits.len() as u64);
        for (idx, &b) in bits.iter().enumerate() {
            if b {
                pb.set(idx as u64 + 1);
            }
        }
        pb
    }

    /// Parse a string of '0'/'1' characters, most significant first.
    pub fn from_bit_str(s: &str) -> Self {
        let mut pb = Self::new(s.len() as u64);
        for (idx, ch) in s.chars().enumerate() {
            if ch == '1' {
                pb.set(idx as u64 + 1);
            }
        }
        pb
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Set bit at 1-based position `i`.
    pub fn set(&mut self, i: u64) {
        debug_assert!(i >= 1 && i <= self.len);
        let b = i - 1;
        self.words[(b / 64) as usize] |= 1u64 << (b % 64);
    }

    /// Read bit at 1-based position `i`.
    pub fn get(&self, i: u64) -> bool {
        debug_assert!(i >= 1 && i <= self.len);
        let b = i - 1;
        self.words[(b / 64) as usize] >> (b % 64) & 1 == 1
    }

    pub fn popcount(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Wrap a finished writer's buffer as packed bits.
    pub fn from_writer(w: WordWriter) -> Self {
        let (words, len) = w.finish();
        debug_assert_eq!(words.len(), len.div_ceil(64) as usize);
        Self { len, words }
    }

    /// Read `width` bits starting at 0-based bit offset `start`.
    pub fn bits_at(&self, start: u64, width: u32) -> u64 {
        debug_assert!(start + width as u64 <= self.len && width <= 64);
        if width == 0 {
            return 0;
        }
        let word = (start / 64) as usize;
        let off = (start % 64) as u32;
        let mut v = self.words[word] >> off;
        if off + width > 64 {
            v |= self.words[word + 1] << (64 - off);
        }
        if width < 64 {
            v &= (1u64 << width) - 1;
        }
        v
    }

    pub fn serialize(&self, w: &mut WordWriter) {
        w.push_u64(self.len);
        w.push_words(&self.words, self.len);
    }

    pub fn deserialize(r: &mut WordReader) -> Result<Self> {
        let len = r.read_u64()?;
        let n_words = len.div_ceil(64) as usize;
        let words = r.read_words(n_words)?.to_vec();
        // bits past `len` must be zero
        if len % 64 != 0 {
            if let Some(&last) = words.last() {
                if last >> (len % 64) != 0 {
                    return Err(Error::format("nonzero bits past end of bit vector"));
                }
            }
        }
        Ok(Self { len, words })
    }

    /// Serialized payload size in bits (length prefix + packed words).
    pub fn payload_bits(&self) -> u64 {
        64 + self.words.len() as u64 * 64
    }
}

/// Space accounting for a built structure: the information-bearing leading
/// term versus directory/header redundancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceBits {
    pub leading: u64,
    pub redundancy: u64,
}

impl SpaceBits {
    pub fn total(&self) -> u64 {
        self.leading + self.redundancy
    }
}

/// Plain bits plus a two-level rank directory and sampled select hints.
#[derive(Debug, Clone)]
pub struct RankSelectBitVector {
    bits: PlainBits,
    /// Cumulative popcount at each superblock boundary.
    superblocks: Vec<u64>,
    /// Popcount from the superblock start to each word start, relative.
    blocks: Vec<u16>,
    /// Bit position (0-based) of every `SELECT_SAMPLE`-th one.
    select_hints: Vec<u64>,
    ones: u64,
}

impl RankSelectBitVector {
    pub fn build(bits: PlainBits) -> Self {
        let n_words = bits.words.len();
        let mut superblocks = Vec::with_capacity(n_words / WORDS_PER_SUPERBLOCK + 1);
        let mut blocks = Vec::with_capacity(n_words);
        let mut select_hints = Vec::new();
        let mut total: u64 = 0;
        let mut sb_base: u64 = 0;
        for (wi, &word) in bits.words.iter().enumerate() {
            if wi % WORDS_PER_SUPERBLOCK == 0 {
                superblocks.push(total);
                sb_base = total;
            }
            blocks.push((total - sb_base) as u16);
            let pc = word.count_ones() as u64;
            if pc > 0 {
                let lo = total / SELECT_SAMPLE;
                let hi = (total + pc - 1) / SELECT_SAMPLE;
                if lo != hi || total % SELECT_SAMPLE == 0 {
                    // at least one sampled one falls in this word
                    let mut seen = total;
                    let mut w = word;
                    while w != 0 {
                        let tz = w.trailing_zeros() as u64;
                        if seen % SELECT_SAMPLE == 0 {
                            select_hints.push(wi as u64 * 64 + tz);
                        }
                        seen += 1;
                        w &= w - 1;
                    }
                }
            }
            total += pc;
        }
        // sentinel entries so rank at a word boundary (including i == n) works
        if n_words % WORDS_PER_SUPERBLOCK == 0 {
            superblocks.push(total);
            sb_base = total;
        }
        blocks.push((total - sb_base) as u16);
        Self { bits, superblocks, blocks, select_hints, ones: total }
    }

    pub fn len(&self) -> u64 {
        self.bits.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.len == 0
    }

    /// Number of ones.
    pub fn ones(&self) -> u64 {
        self.ones
    }

    /// Bit at 1-based position `i`.
    pub fn access(&self, i: u64) -> Result<bool> {
        Error::check_range(i, 1, self.bits.len)?;
        Ok(self.bits.get(i))
    }

    /// Ones in the prefix of length `i` (0 <= i <= n).
    pub fn rank(&self, i: u64) -> Result<u64> {
        Error::check_range(i, 0, self.bits.len)?;
        Ok(self.rank_unchecked(i))
    }

    pub(crate) fn rank_unchecked(&self, i: u64) -> u64 {
        if i == 0 {
            return 0;
        }
        let b = i; // count bits [0, i)
        let word = (b / 64) as usize;
        let sb = word / WORDS_PER_SUPERBLOCK;
        let mut r = self.superblocks[sb] + self.blocks[word] as u64;
        let rem = b % 64;
        if rem != 0 {
            r += (self.bits.words[word] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        r
    }

    /// Position of the j-th one (j >= 1), or `None` past the last one.
    pub fn select(&self, j: u64) -> Option<u64> {
        if j == 0 || j > self.ones {
            return None;
        }
        let hint = (j - 1) / SELECT_SAMPLE;
        let start_bit = self.select_hints[hint as usize];
        let mut remaining = j - hint * SELECT_SAMPLE; // ones still to see from start_bit
        let mut wi = (start_bit / 64) as usize;
        // mask off bits below the hint position in its word
        let mut word = self.bits.words[wi] & !((1u64 << (start_bit % 64)) - 1);
        loop {
            let pc = word.count_ones() as u64;
            if pc >= remaining {
                let pos = wi as u64 * 64 + select_in_word(word, remaining as u32);
                return Some(pos + 1);
            }
            remaining -= pc;
            wi += 1;
            word = self.bits.words[wi];
        }
    }

    /// Serialized payload: the raw bits. Directories are rebuilt on load.
    pub fn space_bits(&self) -> SpaceBits {
        SpaceBits {
            leading: self.bits.payload_bits(),
            redundancy: (self.superblocks.len() * 8 + self.blocks.len() * 2 + self.select_hints.len() * 8)
                as u64
                * 8,
        }
    }

    pub fn serialize(&self, w: &mut WordWriter) {
        self.bits.serialize(w);
    }

    pub fn deserialize(r: &mut WordReader) -> Result<Self> {
        Ok(Self::build(PlainBits::deserialize(r)?))
    }

    pub fn plain(&self) -> &PlainBits {
        &self.bits
    }
}

/// Position of the k-th (1-based) set bit inside a word.
fn select_in_word(mut word: u64, k: u32) -> u64 {
    debug_assert!(k >= 1 && word.count_ones() >= k);
    for _ in 1..k {
        word &= word - 1;
    }
    word.trailing_zeros() as u64
}

/// Elias-Fano layout over strictly increasing 1-based one-positions.
#[derive(Debug, Clone)]
pub struct SparseSelectVector {
    ones: u64,
    universe: u64,
    low_width: u32,
    /// Packed low parts, `low_width` bits each.
    lows: PlainBits,
    /// Unary-coded high parts with select acceleration.
    highs: RankSelectBitVector,
}

impl SparseSelectVector {
    /// Build from strictly increasing positions in `[1, n]`.
    pub fn build(positions: &[u64], n: u64) -> Result<Self> {
        for w in positions.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid(format!(
                    "positions not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = positions.last() {
            if last > n || positions[0] < 1 {
                return Err(Error::invalid("position outside universe"));
            }
        }
        let m = positions.len() as u64;
        let low_width = if m == 0 || n / m < 2 {
            0
        } else {
            (n / m).ilog2()
        };
        let mut lows = PlainBits::new(m * low_width as u64);
        let mut low_writer = WordWriter::new();
        let max_high = if m == 0 { 0 } else { (positions[m as usize - 1] - 1) >> low_width };
        let mut high_bits = PlainBits::new(m + max_high + 1);
        for (idx, &p) in positions.iter().enumerate() {
            let v = p - 1;
            if low_width > 0 {
                low_writer.push_bits(v & ((1u64 << low_width) - 1), low_width);
            }
            let high = v >> low_width;
            high_bits.set(high + idx as u64 + 1);
        }
        if low_width > 0 {
            let (words, _) = low_writer.finish();
            let n_words = lows.words.len();
            lows.words.copy_from_slice(&words[..n_words]);
        }
        Ok(Self {
            ones: m,
            universe: n,
            low_width,
            lows,
            highs: RankSelectBitVector::build(high_bits),
        })
    }

    pub fn ones(&self) -> u64 {
        self.ones
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    /// Position of the j-th one, or `None` when j > m.
    pub fn select(&self, j: u64) -> Option<u64> {
        if j == 0 || j > self.ones {
            return None;
        }
        let high = self.highs.select(j).expect("high stream holds m ones") - j;
        let low = if self.low_width == 0 {
            0
        } else {
            self.read_low(j - 1)
        };
        Some((high << self.low_width | low) + 1)
    }

    fn read_low(&self, idx: u64) -> u64 {
        let start = idx * self.low_width as u64;
        let word = (start / 64) as usize;
        let off = (start % 64) as u32;
        let mut v = self.lows.words[word] >> off;
        if off + self.low_width > 64 {
            v |= self.lows.words[word + 1] << (64 - off);
        }
        v & ((1u64 << self.low_width) - 1)
    }

    /// Bit at position `i`, answered by searching the select stream.
    pub fn access(&self, i: u64) -> Result<bool> {
        Error::check_range(i, 1, self.universe)?;
        Ok(self.rank_unchecked(i) != self.rank_unchecked(i - 1))
    }

    /// Ones in positions `1..=i`; O(lg m) by binary search over selects.
    pub fn rank(&self, i: u64) -> Result<u64> {
        Error::check_range(i, 0, self.universe)?;
        Ok(self.rank_unchecked(i))
    }

    fn rank_unchecked(&self, i: u64) -> u64 {
        let (mut lo, mut hi) = (0u64, self.ones); // invariant: select(lo) <= i < select(hi+1)
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.select(mid).expect("mid <= m") <= i {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Serialized payload split into the `m * low_width` leading term and
    /// the unary high stream plus header as redundancy.
    pub fn space_bits(&self) -> SpaceBits {
        SpaceBits {
            leading: self.ones * self.low_width as u64,
            // header: m, universe, low_width byte
            redundancy: self.highs.plain().len() + 64 + 64 + 8,
        }
    }

    pub fn serialize(&self, w: &mut WordWriter) {
        w.push_u64(self.ones);
        w.push_u64(self.universe);
        w.push_bits(self.low_width as u64, 8);
        w.align();
        w.push_words(&self.lows.words, self.lows.len);
        self.highs.serialize(w);
    }

    /// Headerless payload: packed low parts, then the high parts as unary
    /// gaps. The caller records `ones` and `universe` out of band.
    pub fn serialize_compact(&self, w: &mut WordWriter) {
        for idx in 0..self.ones {
            if self.low_width > 0 {
                w.push_bits(self.read_low(idx), self.low_width);
            }
        }
        let mut prev = 0u64;
        for j in 1..=self.ones {
            let high = (self.select(j).expect("j <= m") - 1) >> self.low_width;
            for _ in 0..high - prev {
                w.push_bits(0, 1);
            }
            w.push_bits(1, 1);
            prev = high;
        }
    }

    /// Exact bit length written by [`Self::serialize_compact`].
    pub fn compact_bits(&self) -> u64 {
        if self.ones == 0 {
            return 0;
        }
        let max_high = (self.select(self.ones).expect("nonempty") - 1) >> self.low_width;
        self.ones * self.low_width as u64 + self.ones + max_high
    }

    pub fn deserialize_compact(r: &mut WordReader, ones: u64, universe: u64) -> Result<Self> {
        let low_width = if ones == 0 || universe / ones < 2 {
            0
        } else {
            (universe / ones).ilog2()
        };
        let mut lows = Vec::with_capacity(ones as usize);
        for _ in 0..ones {
            lows.push(r.read_bits(low_width)?);
        }
        let mut positions = Vec::with_capacity(ones as usize);
        let mut high = 0u64;
        for &low in &lows {
            while r.read_bits(1)? == 0 {
                high += 1;
                if high > universe {
                    return Err(Error::format("runaway unary high stream"));
                }
            }
            positions.push((high << low_width | low) + 1);
        }
        let v = Self::build(&positions, universe)?;
        if v.low_width != low_width {
            return Err(Error::format("low width mismatch"));
        }
        Ok(v)
    }

    pub fn deserialize(r: &mut WordReader) -> Result<Self> {
        let ones = r.read_u64()?;
        let universe = r.read_u64()?;
        let low_width = r.read_bits(8)? as u32;
        if low_width > 63 {
            return Err(Error::format("low width out of range"));
        }
        let low_len = ones * low_width as u64;
        let words = r.read_words(low_len.div_ceil(64) as usize)?.to_vec();
        let lows = PlainBits { len: low_len, words };
        let highs = RankSelectBitVector::deserialize(r)?;
        if highs.ones() != ones {
            return Err(Error::format("high stream popcount mismatch"));
        }
        Ok(Self { ones, universe, low_width, lows, highs })
    }
}
