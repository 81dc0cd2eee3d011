//! Self-contained pointer-free majority encoding used for branch-2 micro
//! arrays.
//!
//! Same top-down pruning as the main structure, but occurrence vectors are
//! select-only (Elias-Fano) and inactive candidates are found by climbing
//! levels at query time instead of following pointers. Slow to query on its
//! own; the micro store memoizes its answers, which is sound because the
//! answer is fully determined by the serialized bits and the endpoints.

use crate::bitvec::SparseSelectVector;
use crate::decomposition::{self, locate, padded_len, Quadruple};
use crate::error::{Error, Result};
use crate::stream::{WordReader, WordWriter};

#[derive(Debug, Clone)]
struct InnerLevel {
    /// Stored-vector count per quadruple, ascending offset.
    counts: Vec<u64>,
    /// Occurrence vectors in (quadruple, slot) order; universe = extent length.
    vecs: Vec<SparseSelectVector>,
}

#[derive(Debug, Clone)]
pub struct InnerEncoding {
    n: u64,
    /// Query threshold.
    p: u64,
    q: u64,
    /// Candidate threshold (query threshold clamped to 1/2).
    pe: u64,
    qe: u64,
    /// Ascending by level, k = 0 ..= top_level(n).
    levels: Vec<InnerLevel>,
}

impl InnerEncoding {
    /// `p/q` is the query threshold; candidates are computed for
    /// `min(p/q, 1/2)`.
    pub fn build(a: &[u64], p: u64, q: u64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("empty array"));
        }
        if p == 0 || p >= q {
            return Err(Error::invalid("threshold must be in (0, 1)"));
        }
        if a.len() as u64 > u32::MAX as u64 || q > u32::MAX as u64 {
            return Err(Error::invalid("inner encoding limited to 32-bit sizes"));
        }
        let (pe, qe) = if 2 * p > q { (1, 2) } else { (p, q) };
        let n = a.len() as u64;
        let mut active = vec![true; a.len()];
        let table = decomposition::level_table(n);
        let mut levels: Vec<InnerLevel> = Vec::with_capacity(table.len());
        for level in table.iter().rev() {
            let mut counts = Vec::with_capacity((level.n_k / 2) as usize);
            let mut vecs = Vec::new();
            let mut pending: Vec<u64> = Vec::new();
            for d in decomposition::quadruple_list(level) {
                let mut stored = 0u64;
                for y in decomposition::candidates(a, &d, pe, qe) {
                    let in_range: Vec<u64> = d
                        .range_positions(n)
                        .into_iter()
                        .filter(|&pos| a[pos as usize - 1] == y)
                        .collect();
                    if !in_range.iter().all(|&pos| active[pos as usize - 1]) {
                        continue; // reachable through a higher-level vector
                    }
                    let mut locals: Vec<u64> = d
                        .extent_positions(n)
                        .into_iter()
                        .filter(|&pos| a[pos as usize - 1] == y)
                        .map(|pos| d.extent_local(pos) + 1)
                        .collect();
                    locals.sort_unstable();
                    vecs.push(SparseSelectVector::build(&locals, d.extent_len())?);
                    stored += 1;
                    pending.extend(in_range);
                }
                counts.push(stored);
            }
            for pos in pending {
                active[pos as usize - 1] = false;
            }
            levels.push(InnerLevel { counts, vecs });
        }
        levels.reverse();
        Ok(Self { n, p, q, pe, qe, levels })
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First in-range position of every majority of `[i, j]`, ascending.
    ///
    /// Checks the located quadruple and every quadruple at that level or
    /// higher whose extent covers the query, deduplicating by position.
    pub fn query(&self, i: u64, j: u64) -> Result<Vec<u64>> {
        let loc = locate(self.n, i, j)?;
        let len = j - i + 1;
        let n_pad = padded_len(self.n);
        let mut out: Vec<u64> = Vec::new();
        for level in decomposition::level_table(self.n) {
            if level.k < loc.k {
                continue;
            }
            let data = &self.levels[level.k as usize];
            let mut slot_base = 0u64;
            for d in decomposition::quadruple_list(&level) {
                let stored = data.counts[d.offset as usize];
                if d.extent_contains_interval(i, j) {
                    let windows = super::extent_windows(&d, i, j);
                    for s in 0..stored {
                        let v = &data.vecs[(slot_base + s) as usize];
                        let mut freq = 0;
                        let mut first = None;
                        for &(lo, hi) in &windows {
                            let below = v.rank(lo)?;
                            let f = v.rank(hi + 1)? - below;
                            freq += f;
                            if first.is_none() && f > 0 {
                                first = v.select(below + 1);
                            }
                        }
                        if freq * self.q >= self.p * len {
                            let first = first.expect("freq >= 1");
                            let pos = (d.extent_start0() + first - 1) % n_pad + 1;
                            debug_assert!(pos >= i && pos <= j);
                            if !out.contains(&pos) {
                                out.push(pos);
                            }
                        }
                    }
                }
                slot_base += stored;
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Serialized payload size in bits.
    pub fn space_bits(&self) -> u64 {
        let (_, bits) = self.to_words();
        bits
    }

    /// Deterministic word-stream image; also the memo key.
    pub fn to_words(&self) -> (Vec<u64>, u64) {
        let mut w = WordWriter::new();
        self.serialize(&mut w);
        w.finish()
    }

    /// Compact layout: 32-bit n/p/q header, then per level the per-quadruple
    /// vector counts in `ceil_lg(cap+1)` bits each (cap = max candidates) and
    /// each vector as a one-count plus headerless Elias-Fano payload.
    pub fn serialize(&self, w: &mut WordWriter) {
        w.push_bits(self.n, 32);
        w.push_bits(self.p, 32);
        w.push_bits(self.q, 32);
        let cw = super::ceil_lg(self.slot_capacity() + 1).max(1);
        for (level, info) in self.levels.iter().zip(decomposition::level_table(self.n)) {
            let ext = Quadruple::new(&info, 0).extent_len();
            let mw = super::ceil_lg(ext + 1).max(1);
            for &c in &level.counts {
                w.push_bits(c, cw);
            }
            for v in &level.vecs {
                w.push_bits(v.ones(), mw);
                v.serialize_compact(w);
            }
        }
    }

    pub fn deserialize(r: &mut WordReader) -> Result<Self> {
        let n = r.read_bits(32)?;
        let p = r.read_bits(32)?;
        let q = r.read_bits(32)?;
        if n == 0 || p == 0 || p >= q {
            return Err(Error::format("bad inner encoding header"));
        }
        let (pe, qe) = if 2 * p > q { (1, 2) } else { (p, q) };
        let cw = super::ceil_lg(4 * qe / pe + 1).max(1);
        let mut levels = Vec::new();
        for level in decomposition::level_table(n) {
            let ext = Quadruple::new(&level, 0).extent_len();
            let mw = super::ceil_lg(ext + 1).max(1);
            let mut counts = Vec::with_capacity((level.n_k / 2) as usize);
            for _ in 0..level.n_k / 2 {
                counts.push(r.read_bits(cw)?);
            }
            let total: u64 = counts.iter().sum();
            let mut vecs = Vec::with_capacity(total as usize);
            for _ in 0..total {
                let m = r.read_bits(mw)?;
                vecs.push(SparseSelectVector::deserialize_compact(r, m, ext)?);
            }
            levels.push(InnerLevel { counts, vecs });
        }
        Ok(Self { n, p, q, pe, qe, levels })
    }

    fn slot_capacity(&self) -> u64 {
        4 * self.qe / self.pe
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_majorities;
    use proptest::prelude::*;

    fn check(a: &[u64], p: u64, q: u64) {
        let enc = InnerEncoding::build(a, p, q).unwrap();
        let n = a.len() as u64;
        for i in 1..=n {
            for j in i..=n {
                let got = enc.query(i, j).unwrap();
                let want: Vec<u64> = oracle_majorities(a, p, q, i, j)
                    .unwrap()
                    .entries
                    .iter()
                    .map(|e| e.first_pos)
                    .collect();
                assert_eq!(got, want, "a={a:?} tau={p}/{q} [{i},{j}]");
            }
        }
    }

    #[test]
    fn small_fixed_arrays() {
        check(&[1, 2, 1], 1, 2);
        check(&[1, 1, 2, 2, 3], 1, 3);
        check(&[5; 9], 1, 2);
        check(&(1..=11).collect::<Vec<u64>>(), 1, 2);
        check(&[2, 1, 1, 2, 1, 2, 2, 2, 1, 1], 2, 5);
        check(&[1], 1, 2);
        // threshold above 1/2 still answers with the exact threshold
        check(&[1, 1, 1, 2, 1], 3, 4);
    }

    #[test]
    fn round_trip() {
        let a = [3u64, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5];
        let enc = InnerEncoding::build(&a, 1, 3).unwrap();
        let (words, bits) = enc.to_words();
        let mut r = WordReader::new(&words, bits);
        let enc2 = InnerEncoding::deserialize(&mut r).unwrap();
        assert_eq!(enc2.to_words(), (words, bits));
        assert_eq!(enc.query(2, 9).unwrap(), enc2.query(2, 9).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn matches_oracle(
            a in proptest::collection::vec(1u64..6, 1..40),
            (p, q) in prop_oneof![Just((1u64, 2u64)), Just((1, 3)), Just((1, 4)), Just((2, 3))],
        ) {
            check(&a, p, q);
        }
    }
}
