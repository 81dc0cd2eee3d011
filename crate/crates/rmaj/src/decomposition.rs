//! Block decomposition of the input array.
//!
//! The array is padded virtually to `n_pad`, the next power of two (at least
//! 4). Level `k` partitions `[1, n_pad]` into `n_k = n_pad / 2^k` blocks of
//! `2^k` positions; levels exist while `n_k >= 4`. Each level carries
//! `n_k / 2` quadruples of four consecutive blocks staggered by two, the last
//! one wrapping around, so every block lies in exactly two quadruples. A
//! query range maps in O(1) to one quadruple whose middle two blocks witness
//! it; the quadruple's extent (range widened by one block on each side,
//! circularly) is where per-candidate occurrence vectors live.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelInfo {
    pub k: u32,
    pub block_size: u64,
    pub n_k: u64,
}

/// Virtual padded length: next power of two, at least 4.
pub fn padded_len(n: u64) -> u64 {
    n.max(4).next_power_of_two()
}

/// Index of the deepest level (the one with four blocks).
pub fn top_level(n: u64) -> u32 {
    padded_len(n).ilog2() - 2
}

/// All levels `k = 0 ..= top_level(n)`, shallowest (unit blocks) first.
pub fn level_table(n: u64) -> Vec<LevelInfo> {
    let n_pad = padded_len(n);
    (0..=top_level(n))
        .map(|k| LevelInfo { k, block_size: 1u64 << k, n_k: n_pad >> k })
        .collect()
}

/// One group of four consecutive blocks at a level. `offset` is the
/// quadruple index `l` in `[0, n_k/2)`; the covered blocks are
/// `2l .. 2l+3 (mod n_k)`, so only the last quadruple wraps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadruple {
    pub k: u32,
    pub offset: u64,
    pub block_size: u64,
    pub n_k: u64,
}

impl Quadruple {
    pub fn new(level: &LevelInfo, offset: u64) -> Self {
        debug_assert!(offset < level.n_k / 2);
        Self { k: level.k, offset, block_size: level.block_size, n_k: level.n_k }
    }

    pub fn n_pad(&self) -> u64 {
        self.block_size * self.n_k
    }

    /// The four covered block ids (0-based), in circular order.
    pub fn blocks(&self) -> [u64; 4] {
        let s = 2 * self.offset;
        [s, s + 1, (s + 2) % self.n_k, (s + 3) % self.n_k]
    }

    /// The middle two blocks; a query maps here only if it fully contains
    /// one of them.
    pub fn middle_blocks(&self) -> [u64; 2] {
        let s = 2 * self.offset;
        [s + 1, (s + 2) % self.n_k]
    }

    pub fn range_len(&self) -> u64 {
        4 * self.block_size
    }

    /// 0-based start position of the range arc.
    pub fn range_start0(&self) -> u64 {
        2 * self.offset * self.block_size
    }

    /// Extent length: one extra block on each side, capped at the universe
    /// (the four-block level's extents cover everything).
    pub fn extent_len(&self) -> u64 {
        (6 * self.block_size).min(self.n_pad())
    }

    /// 0-based start position of the extent arc.
    pub fn extent_start0(&self) -> u64 {
        let start_block = (2 * self.offset + self.n_k - 1) % self.n_k;
        start_block * self.block_size
    }

    /// Whether 1-based position `pos` (in `[1, n_pad]`) lies in the range.
    pub fn range_contains(&self, pos: u64) -> bool {
        let b = (pos - 1) / self.block_size;
        (b + self.n_k - 2 * self.offset) % self.n_k < 4
    }

    pub fn extent_contains(&self, pos: u64) -> bool {
        ((pos - 1) + self.n_pad() - self.extent_start0()) % self.n_pad() < self.extent_len()
    }

    /// Whether the linear interval `[i, j]` lies inside the range arc.
    pub fn range_contains_interval(&self, i: u64, j: u64) -> bool {
        arc_contains_arc(
            self.range_start0(),
            self.range_len(),
            i - 1,
            j - i + 1,
            self.n_pad(),
        )
    }

    pub fn extent_contains_interval(&self, i: u64, j: u64) -> bool {
        arc_contains_arc(
            self.extent_start0(),
            self.extent_len(),
            i - 1,
            j - i + 1,
            self.n_pad(),
        )
    }

    /// Offset of position `pos` within the extent arc.
    pub fn extent_local(&self, pos: u64) -> u64 {
        debug_assert!(self.extent_contains(pos));
        ((pos - 1) + self.n_pad() - self.extent_start0()) % self.n_pad()
    }

    /// Positions of the range clipped to `[1, n]`, in circular scan order
    /// from the range start (the order defining "first occurrence").
    pub fn range_positions(&self, n: u64) -> Vec<u64> {
        let n_pad = self.n_pad();
        let start0 = self.range_start0();
        (0..self.range_len())
            .map(|off| (start0 + off) % n_pad + 1)
            .filter(|&p| p <= n)
            .collect()
    }

    /// Positions of the extent clipped to `[1, n]`, in arc order.
    pub fn extent_positions(&self, n: u64) -> Vec<u64> {
        let n_pad = self.n_pad();
        let start0 = self.extent_start0();
        (0..self.extent_len())
            .map(|off| (start0 + off) % n_pad + 1)
            .filter(|&p| p <= n)
            .collect()
    }
}

/// `[a, a+la)` contained in `[b, b+lb)` over a circle of size `n`.
fn arc_contains_arc(b: u64, lb: u64, a: u64, la: u64, n: u64) -> bool {
    lb >= n || (la <= lb && (a + n - b) % n + la <= lb)
}

/// All quadruples of a level, by ascending offset.
pub fn quadruple_list(level: &LevelInfo) -> Vec<Quadruple> {
    (0..level.n_k / 2).map(|l| Quadruple::new(level, l)).collect()
}

/// Whether `inner`'s range lies inside `outer`'s extent (both from the same
/// decomposition), with wrap-around arithmetic.
pub fn extent_contains(outer: &Quadruple, inner: &Quadruple) -> bool {
    debug_assert_eq!(outer.n_pad(), inner.n_pad());
    arc_contains_arc(
        outer.extent_start0(),
        outer.extent_len(),
        inner.range_start0(),
        inner.range_len(),
        outer.n_pad(),
    )
}

/// The quadruple a query range is associated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryLocation {
    pub k: u32,
    pub offset: u64,
}

impl QueryLocation {
    pub fn quadruple(&self, n: u64) -> Quadruple {
        let n_pad = padded_len(n);
        Quadruple {
            k: self.k,
            offset: self.offset,
            block_size: 1u64 << self.k,
            n_k: n_pad >> self.k,
        }
    }
}

/// Map `[i, j]` to its quadruple in constant time.
///
/// With `k0 = floor(lg(j-i+1))`, the range fully contains one or two blocks
/// at level `k0` or `k0 - 1` (two only in the non-sibling, odd-first
/// configuration); the first such block determines the quadruple whose
/// middle it is. Ranges longer than half the universe may contain too many
/// blocks at every level; they always contain the middle of the first
/// four-block quadruple, which serves as the deterministic fallback.
pub fn locate(n: u64, i: u64, j: u64) -> Result<QueryLocation> {
    Error::check_range(i, 1, n)?;
    Error::check_range(j, i, n)?;
    let n_pad = padded_len(n);
    let top = top_level(n);
    let len = j - i + 1;
    let k0 = len.ilog2();
    for k in [Some(k0), k0.checked_sub(1)].into_iter().flatten() {
        if k > top {
            continue;
        }
        let bs = 1u64 << k;
        let n_k = n_pad >> k;
        let first = (i - 1).div_ceil(bs);
        let past = j / bs; // blocks [first, past) are fully contained
        if past <= first || past - first > 2 {
            continue;
        }
        if past - first == 2 && first % 2 == 0 {
            continue;
        }
        let offset = if first % 2 == 1 {
            (first - 1) / 2
        } else {
            ((first + n_k - 2) % n_k) / 2
        };
        return Ok(QueryLocation { k, offset });
    }
    Ok(QueryLocation { k: top, offset: 0 })
}

/// Elements occurring at least `p/q * 2^k` times in the quadruple's range
/// clipped to `[1, n]`, ordered by first occurrence in the range. At most
/// `floor(4q/p)` elements qualify.
pub fn candidates(a: &[u64], d: &Quadruple, p: u64, q: u64) -> Vec<u64> {
    let n = a.len() as u64;
    let mut order = Vec::new();
    let mut counts = std::collections::HashMap::new();
    for pos in d.range_positions(n) {
        let v = a[pos as usize - 1];
        let c = counts.entry(v).or_insert(0u64);
        if *c == 0 {
            order.push(v);
        }
        *c += 1;
    }
    order.retain(|v| counts[v] * q >= p * d.block_size);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_tables() {
        let ls = level_table(16);
        assert_eq!(ls.len(), 3);
        assert_eq!(
            ls.iter().map(|l| (l.k, l.block_size, l.n_k)).collect::<Vec<_>>(),
            vec![(0, 1, 16), (1, 2, 8), (2, 4, 4)]
        );
        assert_eq!(level_table(4).len(), 1);
        assert_eq!(level_table(1).len(), 1); // padded to 4
        assert_eq!(level_table(13), level_table(16));
        for l in level_table(13) {
            assert_eq!(l.block_size * l.n_k, 16);
            assert!(l.n_k >= 4);
        }
    }

    #[test]
    fn quadruple_lists() {
        let ls = level_table(16);
        let top = quadruple_list(&ls[2]);
        assert_eq!(top.len(), 2);
        assert_eq!(top[0].blocks(), [0, 1, 2, 3]);
        assert_eq!(top[1].blocks(), [2, 3, 0, 1]);
        assert_eq!(quadruple_list(&ls[1]).len(), 4);

        // each block (hence each position) lies in exactly two quadruples
        for l in &ls {
            let quads = quadruple_list(l);
            for b in 0..l.n_k {
                let hits = quads.iter().filter(|d| d.blocks().contains(&b)).count();
                assert_eq!(hits, 2, "block {b} at level {}", l.k);
            }
            for pos in 1..=16u64 {
                let hits = quads.iter().filter(|d| d.range_contains(pos)).count();
                assert_eq!(hits, 2);
            }
        }
    }

    #[test]
    fn extent_geometry() {
        let ls = level_table(16);
        // wrap-around quadruple at k=1: blocks 6,7,0,1; extent blocks 5..=2
        let d = Quadruple::new(&ls[1], 3);
        assert_eq!(d.blocks(), [6, 7, 0, 1]);
        assert_eq!(d.extent_start0(), 10);
        assert_eq!(d.extent_len(), 12);
        assert!(d.extent_contains(11));
        assert!(d.extent_contains(6));
        assert!(!d.extent_contains(7));
        assert!(!d.extent_contains(10));
        assert_eq!(d.extent_local(11), 0);
        assert_eq!(d.extent_local(1), 6);
        assert_eq!(d.extent_local(4), 9);

        // top level extents cover the whole universe
        let t = Quadruple::new(&ls[2], 1);
        assert_eq!(t.extent_len(), 16);
        for pos in 1..=16 {
            assert!(t.extent_contains(pos));
        }
    }

    #[test]
    fn extent_contains_lower_level_overlaps() {
        // any lower-level quadruple overlapping D lies inside E(D)
        for n in [16u64, 64] {
            let ls = level_table(n);
            for lo in &ls {
                for lhi in &ls {
                    if lhi.k <= lo.k {
                        continue;
                    }
                    for dhi in quadruple_list(lhi) {
                        for dlo in quadruple_list(lo) {
                            let overlaps = dlo
                                .range_positions(n)
                                .iter()
                                .any(|&p| dhi.range_contains(p));
                            if overlaps {
                                assert!(
                                    extent_contains(&dhi, &dlo),
                                    "n={n} k={} l={} vs k={} l={}",
                                    dhi.k,
                                    dhi.offset,
                                    dlo.k,
                                    dlo.offset
                                );
                            }
                        }
                    }
                }
            }
        }
        // far-apart quadruples at the same low level are not contained
        let ls = level_table(64);
        let a = Quadruple::new(&ls[0], 0);
        let b = Quadruple::new(&ls[0], 10);
        assert!(!extent_contains(&a, &b));
    }

    #[test]
    fn locate_examples() {
        let loc = locate(16, 5, 12).unwrap();
        assert_eq!((loc.k, loc.offset), (2, 0));
        assert_eq!(locate(16, 1, 1).unwrap().k, 0);
        let loc = locate(16, 7, 10).unwrap();
        assert_eq!(loc.k, 1);
        // contained blocks 3 and 4 (0-based) are non-siblings
        let d = loc.quadruple(16);
        assert_eq!(d.middle_blocks(), [3, 4]);
        assert!(locate(16, 0, 1).is_err());
        assert!(locate(16, 5, 4).is_err());
        assert!(locate(16, 1, 17).is_err());
    }

    #[test]
    fn locate_maps_to_witnessing_quadruple() {
        // the located quadruple's range covers [i,j] and a middle block of it
        // lies inside [i,j]
        for n in [5u64, 8, 16, 33, 64] {
            for i in 1..=n {
                for j in i..=n {
                    let loc = locate(n, i, j).unwrap();
                    let d = loc.quadruple(n);
                    assert!(d.range_contains_interval(i, j), "n={n} [{i},{j}] {loc:?}");
                    let bs = d.block_size;
                    let middle_hit = d.middle_blocks().iter().any(|&b| {
                        b * bs + 1 >= i && (b + 1) * bs <= j
                    });
                    assert!(middle_hit, "n={n} [{i},{j}] {loc:?}");
                    // the middle blocks are never siblings: they straddle a
                    // parent-block boundary at level k+1
                    let [m1, m2] = d.middle_blocks();
                    assert_ne!(m1 / 2, m2 / 2);
                }
            }
        }
    }

    #[test]
    fn candidate_lists() {
        let ls = level_table(16);
        let d = Quadruple::new(&ls[2], 0);

        let constant = vec![7u64; 16];
        assert_eq!(candidates(&constant, &d, 1, 2), vec![7]);

        let a = vec![1u64, 1, 2, 3, 1, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11, 12];
        // threshold 2 occurrences in [1,16]
        assert_eq!(candidates(&a, &d, 1, 2), vec![1, 2]);

        // all-distinct array: nothing reaches the two-occurrence bar of a
        // size-4 block; the one-occurrence bar of smaller blocks passes all
        let distinct: Vec<u64> = (1..=16).collect();
        assert!(candidates(&distinct, &d, 1, 2).is_empty());
        assert_eq!(candidates(&distinct, &Quadruple::new(&ls[1], 0), 1, 2).len(), 8);
        assert_eq!(candidates(&distinct, &Quadruple::new(&ls[0], 0), 1, 2).len(), 4);
    }

    #[test]
    fn candidate_count_bounded() {
        // |candidates| <= floor(4q/p) at every quadruple of every level
        let a: Vec<u64> = (0..37).map(|i| i % 5 + 1).collect();
        for (p, q) in [(1u64, 2u64), (1, 3), (2, 5)] {
            for l in level_table(a.len() as u64) {
                for d in quadruple_list(&l) {
                    let c = candidates(&a, &d, p, q);
                    assert!(c.len() as u64 <= 4 * q / p);
                    // ordered by first occurrence in the range
                    let order = d.range_positions(a.len() as u64);
                    let firsts: Vec<usize> = c
                        .iter()
                        .map(|&v| {
                            order.iter().position(|&pos| a[pos as usize - 1] == v).unwrap()
                        })
                        .collect();
                    assert!(firsts.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn wrapped_range_positions_clip_to_n() {
        let ls = level_table(13); // n_pad = 16
        let d = Quadruple::new(&ls[1], 3); // blocks 6,7,0,1 -> positions 13..16, 1..4
        assert_eq!(d.range_positions(13), vec![13, 1, 2, 3, 4]);
    }
}
