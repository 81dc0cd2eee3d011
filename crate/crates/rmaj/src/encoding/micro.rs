//! Micro store: answers for query ranges short enough that their levels were
//! dropped from the main structure.
//!
//! Every dropped-level query range lies inside one quadruple at the deepest
//! dropped level, found in O(1). Its four-block span is held either as a
//! rank-reduced copy (alphabet remapped to first-appearance codes, scanned
//! per query) or as a pointer-free encoding whose answers are memoized per
//! (bit image, endpoints) — so identical spans share one table entry.

use std::collections::HashMap;
use std::sync::Mutex;

use super::{InnerEncoding, MicroBranch};
use crate::bitvec::PlainBits;
use crate::decomposition::{padded_len, LevelInfo, Quadruple, QueryLocation};
use crate::error::{Error, Result};
use crate::stream::WordWriter;

#[derive(Debug)]
pub enum MicroData {
    RankReduced {
        /// Bits per entry; code 0 marks positions past the array end.
        entry_width: u32,
        /// Quadruple `l`'s four-block span starts at entry `l * 4 * 2^level`.
        arrays: PlainBits,
    },
    Encoded {
        /// Per quadruple: the encoding of its span clipped to `[1, n]`, with
        /// its serialized image (the memo key). `None` for all-virtual spans.
        inners: Vec<Option<(InnerEncoding, Vec<u64>, u64)>>,
        /// `(image, i, j) -> first positions`, in span-local coordinates.
        memo: Mutex<HashMap<(Vec<u64>, u64, u64), Vec<u64>>>,
    },
}

#[derive(Debug)]
pub struct MicroStore {
    pub(crate) n: u64,
    pub(crate) p: u64,
    pub(crate) q: u64,
    /// Deepest dropped level.
    pub(crate) level: u32,
    pub(crate) data: MicroData,
}

impl MicroStore {
    pub(crate) fn build(
        a: &[u64],
        p: u64,
        q: u64,
        level: u32,
        branch: MicroBranch,
        strict_table: bool,
    ) -> Result<Self> {
        let n = a.len() as u64;
        let info = Self::level_info(n, level);
        let quads: Vec<Quadruple> =
            (0..info.n_k / 2).map(|l| Quadruple::new(&info, l)).collect();
        let data = match branch {
            MicroBranch::RankReduced => {
                let mut coded: Vec<Vec<u64>> = Vec::with_capacity(quads.len());
                let mut max_code = 0u64;
                for d in &quads {
                    let n_pad = d.n_pad();
                    let start0 = d.range_start0();
                    let mut codes = Vec::with_capacity(d.range_len() as usize);
                    let mut seen: Vec<u64> = Vec::new();
                    for off in 0..d.range_len() {
                        let pos = (start0 + off) % n_pad + 1;
                        if pos > n {
                            codes.push(0);
                            continue;
                        }
                        let v = a[pos as usize - 1];
                        let code = match seen.iter().position(|&s| s == v) {
                            Some(idx) => idx as u64 + 1,
                            None => {
                                seen.push(v);
                                seen.len() as u64
                            }
                        };
                        codes.push(code);
                    }
                    max_code = max_code.max(seen.len() as u64);
                    coded.push(codes);
                }
                let entry_width = super::ceil_lg(max_code + 1).max(1);
                let mut w = WordWriter::new();
                for codes in &coded {
                    for &c in codes {
                        w.push_bits(c, entry_width);
                    }
                }
                MicroData::RankReduced { entry_width, arrays: PlainBits::from_writer(w) }
            }
            MicroBranch::Encoded => {
                let mut inners = Vec::with_capacity(quads.len());
                let memo = Mutex::new(HashMap::new());
                for d in &quads {
                    let sub: Vec<u64> = d
                        .range_positions(n)
                        .into_iter()
                        .map(|pos| a[pos as usize - 1])
                        .collect();
                    if sub.is_empty() {
                        inners.push(None);
                        continue;
                    }
                    let inner = InnerEncoding::build(&sub, p, q)?;
                    let (words, bits) = inner.to_words();
                    if strict_table {
                        let m = sub.len() as u64;
                        let mut memo = memo.lock().unwrap();
                        for li in 1..=m {
                            for lj in li..=m {
                                memo.entry((words.clone(), li, lj))
                                    .or_insert(inner.query(li, lj)?);
                            }
                        }
                    }
                    inners.push(Some((inner, words, bits)));
                }
                MicroData::Encoded { inners, memo }
            }
        };
        Ok(Self { n, p, q, level, data })
    }

    /// First in-range position of every majority of `[i, j]`, ascending.
    /// Requires `loc.k <= self.level`.
    pub(crate) fn query(
        &self,
        i: u64,
        j: u64,
        loc: QueryLocation,
        stats: &mut super::QueryStats,
    ) -> Result<Vec<u64>> {
        let info = Self::level_info(self.n, self.level);
        // A range located at the deepest dropped level maps to its quadruple
        // directly; a shorter one fits inside a single two-block half, so the
        // quadruple starting at that half covers it.
        let l = if loc.k == self.level {
            loc.offset
        } else {
            (i - 1) / (2 * info.block_size)
        };
        let d = Quadruple::new(&info, l);
        debug_assert!(d.range_contains_interval(i, j));
        let len = j - i + 1;
        let n_pad = d.n_pad();
        let start0 = d.range_start0();
        let mut out: Vec<u64> = match &self.data {
            MicroData::RankReduced { entry_width, arrays } => {
                let lo = (i - 1 + n_pad - start0) % n_pad;
                let base = l * d.range_len();
                let mut counts: Vec<u64> = Vec::new();
                let mut firsts: Vec<u64> = Vec::new();
                for off in lo..lo + len {
                    let code =
                        arrays.bits_at((base + off) * *entry_width as u64, *entry_width);
                    debug_assert!(code > 0, "virtual position inside [1, n] query");
                    let idx = code as usize - 1;
                    if counts.len() <= idx {
                        counts.resize(idx + 1, 0);
                        firsts.resize(idx + 1, 0);
                    }
                    if counts[idx] == 0 {
                        firsts[idx] = off;
                    }
                    counts[idx] += 1;
                }
                stats.verified_candidates += counts.len() as u64;
                counts
                    .iter()
                    .zip(&firsts)
                    .filter(|&(&c, _)| c * self.q >= self.p * len)
                    .map(|(_, &off)| (start0 + off) % n_pad + 1)
                    .collect()
            }
            MicroData::Encoded { inners, memo } => {
                let (inner, words, _) = inners[l as usize]
                    .as_ref()
                    .ok_or_else(|| Error::addressing("query in all-virtual span"))?;
                // Span-local index: positions from the span start to `n`
                // come first, then the wrapped head of the array.
                let start = start0 + 1;
                let first_len = (self.n + 1).saturating_sub(start);
                let local = |pos: u64| {
                    if pos >= start {
                        pos - start
                    } else {
                        first_len + (pos - 1)
                    }
                };
                let li = local(i) + 1;
                let lj = local(j) + 1;
                let key = (words.clone(), li, lj);
                let cached = memo.lock().unwrap().get(&key).cloned();
                let locals = match cached {
                    Some(v) => v,
                    None => {
                        let v = inner.query(li, lj)?;
                        memo.lock().unwrap().insert(key, v.clone());
                        v
                    }
                };
                stats.verified_candidates += locals.len() as u64;
                locals
                    .into_iter()
                    .map(|lp| {
                        let off = lp - 1;
                        if off < first_len {
                            start + off
                        } else {
                            off - first_len + 1
                        }
                    })
                    .collect()
            }
        };
        out.sort_unstable();
        debug_assert!(out.iter().all(|&pos| pos >= i && pos <= j));
        Ok(out)
    }

    fn level_info(n: u64, level: u32) -> LevelInfo {
        let n_pad = padded_len(n);
        LevelInfo { k: level, block_size: 1u64 << level, n_k: n_pad >> level }
    }
}
