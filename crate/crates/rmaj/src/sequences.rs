//! Sequences over alphabet `[1, sigma]` with rank/select/access and batch
//! rank, plus the grouped two-level layout used for multi-symbol frequency
//! queries.
//!
//! The wavelet tree is balanced, binary, and pointerless: level `l` holds one
//! concatenated bit vector, and a node occupying `[a, b)` at level `l` splits
//! in place into `[a, a+z)` and `[a+z, b)` at level `l+1`, where `z` is the
//! number of zero bits the node holds at level `l`.

use crate::bitvec::{PlainBits, RankSelectBitVector};
use crate::error::{Error, Result};
use crate::stream::{WordReader, WordWriter};

#[derive(Debug, Clone)]
pub struct WaveletSequence {
    n: u64,
    sigma: u64,
    /// One bit vector per symbol bit, most significant first.
    levels: Vec<RankSelectBitVector>,
}

impl WaveletSequence {
    pub fn build(symbols: &[u64], sigma: u64) -> Result<Self> {
        if sigma < 1 {
            return Err(Error::invalid("alphabet size must be at least 1"));
        }
        for (idx, &s) in symbols.iter().enumerate() {
            if s < 1 || s > sigma {
                return Err(Error::invalid(format!(
                    "symbol {s} at index {} outside [1, {sigma}]",
                    idx + 1
                )));
            }
        }
        let width = bits_for(sigma);
        let n = symbols.len() as u64;
        let mut level_bits: Vec<PlainBits> = (0..width).map(|_| PlainBits::new(n)).collect();
        let values: Vec<u64> = symbols.iter().map(|&s| s - 1).collect();
        fill_levels(&values, width, 0, 0, &mut level_bits);
        Ok(Self {
            n,
            sigma,
            levels: level_bits.into_iter().map(RankSelectBitVector::build).collect(),
        })
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn access(&self, i: u64) -> Result<u64> {
        Error::check_range(i, 1, self.n)?;
        let (mut a, mut b) = (0u64, self.n);
        let mut p = i - 1; // offset within current node
        let mut value = 0u64;
        for lv in &self.levels {
            let ones_before = lv.rank_unchecked(a + p) - lv.rank_unchecked(a);
            let z = node_zeros(lv, a, b);
            value <<= 1;
            if lv.access(a + p + 1).expect("in range") {
                value |= 1;
                p = ones_before;
                a += z;
            } else {
                p -= ones_before;
                b = a + z;
            }
        }
        Ok(value + 1)
    }

    pub fn rank(&self, symbol: u64, i: u64) -> Result<u64> {
        self.check_symbol(symbol)?;
        Error::check_range(i, 0, self.n)?;
        let width = self.levels.len() as u32;
        let v = symbol - 1;
        let (mut a, mut b) = (0u64, self.n);
        let mut p = i; // members of the node among the first i elements
        for (l, lv) in self.levels.iter().enumerate() {
            let bit = v >> (width - 1 - l as u32) & 1;
            let ones = lv.rank_unchecked(a + p) - lv.rank_unchecked(a);
            let z = node_zeros(lv, a, b);
            if bit == 1 {
                p = ones;
                a += z;
            } else {
                p -= ones;
                b = a + z;
            }
        }
        Ok(p)
    }

    pub fn select(&self, symbol: u64, j: u64) -> Result<Option<u64>> {
        self.check_symbol(symbol)?;
        if j == 0 {
            return Err(Error::OutOfRange { got: 0, lo: 1, hi: u64::MAX });
        }
        if self.rank(symbol, self.n)? < j {
            return Ok(None);
        }
        let width = self.levels.len() as u32;
        let v = symbol - 1;
        // walk down recording node bounds, then map the offset back up
        let mut bounds = Vec::with_capacity(width as usize);
        let (mut a, mut b) = (0u64, self.n);
        for (l, lv) in self.levels.iter().enumerate() {
            let bit = v >> (width - 1 - l as u32) & 1;
            let z = node_zeros(lv, a, b);
            bounds.push((a, b, bit));
            if bit == 1 {
                a += z;
            } else {
                b = a + z;
            }
        }
        let mut p = j - 1; // offset within leaf node
        for (l, &(na, nb, bit)) in bounds.iter().enumerate().rev() {
            let lv = &self.levels[l];
            let _ = nb;
            // global position of the (p+1)-th matching bit in node [na, nb),
            // mapped back to a node-relative offset
            p = self.select_in_node(lv, na, bit == 1, p + 1) - na;
        }
        Ok(Some(p + 1))
    }

    /// `rank(alpha, i)` for every symbol at once, in one traversal.
    pub fn batch_rank(&self, i: u64) -> Result<Vec<u64>> {
        Error::check_range(i, 0, self.n)?;
        let mut out = vec![0u64; self.sigma as usize];
        if self.levels.is_empty() {
            // unary alphabet
            if self.sigma >= 1 && !out.is_empty() {
                out[0] = i;
            }
            return Ok(out);
        }
        self.batch_rec(0, 0, self.n, i, 0, &mut out);
        Ok(out)
    }

    fn batch_rec(&self, level: usize, a: u64, b: u64, p: u64, prefix: u64, out: &mut [u64]) {
        if p == 0 && level > 0 {
            return; // no members of the prefix in this subtree
        }
        let width = self.levels.len() as u32;
        if level as u32 == width {
            if prefix < self.sigma {
                out[prefix as usize] = p;
            }
            return;
        }
        // prune subtrees entirely above the alphabet
        if prefix << (width - level as u32) >= self.sigma {
            return;
        }
        let lv = &self.levels[level];
        let ones = lv.rank_unchecked(a + p) - lv.rank_unchecked(a);
        let z = node_zeros(lv, a, b);
        self.batch_rec(level + 1, a, a + z, p - ones, prefix << 1, out);
        self.batch_rec(level + 1, a + z, b, ones, (prefix << 1) | 1, out);
    }

    fn select_in_node(&self, lv: &RankSelectBitVector, a: u64, one: bool, k: u64) -> u64 {
        // binary search the first t in (a, n] with node-local rank == k
        let (mut lo, mut hi) = (a, self.n);
        let base1 = lv.rank_unchecked(a);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            let r = if one {
                lv.rank_unchecked(mid) - base1
            } else {
                (mid - a) - (lv.rank_unchecked(mid) - base1)
            };
            if r < k {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo // 0-based position of the k-th matching bit is lo (next position)
    }

    fn check_symbol(&self, symbol: u64) -> Result<()> {
        if symbol < 1 || symbol > self.sigma {
            return Err(Error::OutOfRange { got: symbol, lo: 1, hi: self.sigma });
        }
        Ok(())
    }

    pub fn space_bits(&self) -> u64 {
        64 + 64 + self.levels.iter().map(|l| l.space_bits().leading).sum::<u64>()
    }

    pub fn serialize(&self, w: &mut WordWriter) {
        w.push_u64(self.n);
        w.push_u64(self.sigma);
        for lv in &self.levels {
            lv.serialize(w);
        }
    }

    pub fn deserialize(r: &mut WordReader) -> Result<Self> {
        let n = r.read_u64()?;
        let sigma = r.read_u64()?;
        if sigma < 1 {
            return Err(Error::format("alphabet size zero"));
        }
        let width = bits_for(sigma);
        let mut levels = Vec::with_capacity(width as usize);
        for _ in 0..width {
            let lv = RankSelectBitVector::deserialize(r)?;
            if lv.len() != n {
                return Err(Error::format("wavelet level length mismatch"));
            }
            levels.push(lv);
        }
        Ok(Self { n, sigma, levels })
    }
}

fn bits_for(sigma: u64) -> u32 {
    if sigma <= 1 {
        0
    } else {
        64 - (sigma - 1).leading_zeros()
    }
}

fn node_zeros(lv: &RankSelectBitVector, a: u64, b: u64) -> u64 {
    (b - a) - (lv.rank_unchecked(b) - lv.rank_unchecked(a))
}

fn fill_levels(values: &[u64], width: u32, level: u32, offset: u64, out: &mut [PlainBits]) {
    if level == width || values.is_empty() {
        return;
    }
    let shift = width - 1 - level;
    let mut zeros = Vec::new();
    let mut ones = Vec::new();
    for (idx, &v) in values.iter().enumerate() {
        if v >> shift & 1 == 1 {
            out[level as usize].set(offset + idx as u64 + 1);
            ones.push(v);
        } else {
            zeros.push(v);
        }
    }
    fill_levels(&zeros, width, level + 1, offset, out);
    fill_levels(&ones, width, level + 1, offset + zeros.len() as u64, out);
}

/// Two-level grouped sequence: symbols are bucketed into groups of
/// `group_size`, a wavelet tree over group ids routes queries to per-group
/// subsequences that are concatenated into one low-alphabet wavelet tree.
#[derive(Debug, Clone)]
pub struct GroupedSequence {
    n: u64,
    sigma: u64,
    group_size: u64,
    s_prime: WaveletSequence,
    concat: WaveletSequence,
    group_offsets: Vec<u64>,
}

impl GroupedSequence {
    /// Build with the default group size `ceil(lg n)` of this sequence.
    pub fn build(symbols: &[u64], sigma: u64) -> Result<Self> {
        let n = symbols.len() as u64;
        Self::build_with_group_size(symbols, sigma, default_group_size(n))
    }

    /// Build with an explicit group size (the encoding passes `ceil(lg n)`
    /// of the global input array).
    pub fn build_with_group_size(symbols: &[u64], sigma: u64, group_size: u64) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::invalid("grouped sequence requires a nonempty input"));
        }
        let group_size = group_size.max(1);
        // small alphabets degenerate to a single group
        let group_size = if sigma < group_size { sigma } else { group_size };
        let n_groups = sigma.div_ceil(group_size);
        let group_of = |s: u64| (s - 1) / group_size; // 0-based
        let mut gids = Vec::with_capacity(symbols.len());
        for &s in symbols {
            if s < 1 || s > sigma {
                return Err(Error::invalid(format!("symbol {s} outside [1, {sigma}]")));
            }
            gids.push(group_of(s) + 1);
        }
        let s_prime = WaveletSequence::build(&gids, n_groups)?;
        let mut per_group: Vec<Vec<u64>> = vec![Vec::new(); n_groups as usize];
        for &s in symbols {
            per_group[group_of(s) as usize].push(s - group_of(s) * group_size);
        }
        let mut group_offsets = Vec::with_capacity(n_groups as usize + 1);
        let mut concat_syms = Vec::with_capacity(symbols.len());
        let mut off = 0u64;
        for g in &per_group {
            group_offsets.push(off);
            concat_syms.extend_from_slice(g);
            off += g.len() as u64;
        }
        group_offsets.push(off);
        let concat = WaveletSequence::build(&concat_syms, group_size)?;
        Ok(Self { n: symbols.len() as u64, sigma, group_size, s_prime, concat, group_offsets })
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn group_size(&self) -> u64 {
        self.group_size
    }

    pub fn group_of(&self, symbol: u64) -> u64 {
        (symbol - 1) / self.group_size
    }

    pub fn access(&self, i: u64) -> Result<u64> {
        let gid = self.s_prime.access(i)?;
        let idx = self.s_prime.rank(gid, i)?;
        let off = self.group_offsets[gid as usize - 1];
        let local = self.concat.access(off + idx)?;
        Ok((gid - 1) * self.group_size + local)
    }

    pub fn rank(&self, symbol: u64, i: u64) -> Result<u64> {
        self.check_symbol(symbol)?;
        Error::check_range(i, 0, self.n)?;
        let g = self.group_of(symbol);
        let local = symbol - g * self.group_size;
        let off = self.group_offsets[g as usize];
        let in_group = self.s_prime.rank(g + 1, i)?;
        Ok(self.concat.rank(local, off + in_group)? - self.concat.rank(local, off)?)
    }

    /// Position in the original sequence of the t-th occurrence of `symbol`.
    pub fn select(&self, symbol: u64, t: u64) -> Result<Option<u64>> {
        self.check_symbol(symbol)?;
        let g = self.group_of(symbol);
        let local = symbol - g * self.group_size;
        let off = self.group_offsets[g as usize];
        let base = self.concat.rank(local, off)?;
        match self.concat.select(local, base + t)? {
            None => Ok(None),
            Some(pos) if pos > self.group_offsets[g as usize + 1] => Ok(None),
            Some(pos) => self.s_prime.select(g + 1, pos - off),
        }
    }

    /// Exact frequency of every `y` in `symbols` within `S[i..=j]`, computed
    /// with one batch-rank pass over the group sequence plus one constant-
    /// alphabet rank pair per requested symbol.
    pub fn multi_freq(&self, symbols: &[u64], i: u64, j: u64) -> Result<Vec<u64>> {
        Error::check_range(i, 1, self.n)?;
        Error::check_range(j, i, self.n)?;
        for &y in symbols {
            self.check_symbol(y)?;
        }
        let lo = self.s_prime.batch_rank(i - 1)?;
        let hi = self.s_prime.batch_rank(j)?;
        let mut out = Vec::with_capacity(symbols.len());
        for &y in symbols {
            let g = self.group_of(y) as usize;
            let local = y - g as u64 * self.group_size;
            let off = self.group_offsets[g];
            let c = self.concat.rank(local, off + hi[g])? - self.concat.rank(local, off + lo[g])?;
            out.push(c);
        }
        Ok(out)
    }

    fn check_symbol(&self, symbol: u64) -> Result<()> {
        if symbol < 1 || symbol > self.sigma {
            return Err(Error::OutOfRange { got: symbol, lo: 1, hi: self.sigma });
        }
        Ok(())
    }

    pub fn space_bits(&self) -> u64 {
        64 * 3
            + self.s_prime.space_bits()
            + self.concat.space_bits()
            + self.group_offsets.len() as u64 * 64
    }

    pub fn serialize(&self, w: &mut WordWriter) {
        w.push_u64(self.n);
        w.push_u64(self.sigma);
        w.push_u64(self.group_size);
        self.s_prime.serialize(w);
        self.concat.serialize(w);
        w.push_u64(self.group_offsets.len() as u64);
        for &o in &self.group_offsets {
            w.push_u64(o);
        }
    }

    pub fn deserialize(r: &mut WordReader) -> Result<Self> {
        let n = r.read_u64()?;
        let sigma = r.read_u64()?;
        let group_size = r.read_u64()?;
        let s_prime = WaveletSequence::deserialize(r)?;
        let concat = WaveletSequence::deserialize(r)?;
        let len = r.read_u64()? as usize;
        let mut group_offsets = Vec::with_capacity(len);
        for _ in 0..len {
            group_offsets.push(r.read_u64()?);
        }
        if group_offsets.last().copied() != Some(n) || concat.len() != n {
            return Err(Error::format("grouped sequence offsets inconsistent"));
        }
        Ok(Self { n, sigma, group_size, s_prime, concat, group_offsets })
    }
}

pub fn default_group_size(n: u64) -> u64 {
    if n <= 2 {
        1
    } else {
        (n - 1).ilog2() as u64 + 1 // ceil(lg n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scan_rank(s: &[u64], sym: u64, i: u64) -> u64 {
        s[..i as usize].iter().filter(|&&x| x == sym).count() as u64
    }

    fn scan_select(s: &[u64], sym: u64, j: u64) -> Option<u64> {
        let mut seen = 0;
        for (idx, &x) in s.iter().enumerate() {
            if x == sym {
                seen += 1;
                if seen == j {
                    return Some(idx as u64 + 1);
                }
            }
        }
        None
    }

    #[test]
    fn unary_alphabet() {
        let ws = WaveletSequence::build(&[1], 1).unwrap();
        assert_eq!(ws.access(1).unwrap(), 1);
        assert_eq!(ws.rank(1, 1).unwrap(), 1);
        assert_eq!(ws.batch_rank(1).unwrap(), vec![1]);
    }

    #[test]
    fn spec_examples() {
        let s = [1u64, 2, 1, 3];
        let ws = WaveletSequence::build(&s, 3).unwrap();
        assert_eq!(ws.rank(1, 3).unwrap(), 2);
        assert_eq!(ws.rank(1, 4).unwrap(), 2);
        assert_eq!(ws.select(2, 1).unwrap(), Some(2));
        assert_eq!(ws.rank(2, 0).unwrap(), 0);
        assert_eq!(ws.batch_rank(0).unwrap(), vec![0, 0, 0]);
        assert_eq!(ws.batch_rank(4).unwrap(), vec![2, 1, 1]);

        let ws3 = WaveletSequence::build(&[3, 3, 3], 3).unwrap();
        assert_eq!(ws3.select(3, 2).unwrap(), Some(2));
    }

    #[test]
    fn symbol_out_of_range_rejected() {
        assert!(WaveletSequence::build(&[1, 4], 3).is_err());
        assert!(WaveletSequence::build(&[0], 3).is_err());
        let ws = WaveletSequence::build(&[1, 2], 2).unwrap();
        assert!(ws.rank(3, 1).is_err());
        assert!(ws.access(3).is_err());
        assert!(ws.batch_rank(3).is_err());
    }

    #[test]
    fn grouped_spec_examples() {
        // n=8, sigma=2: single group, subsequence equals input
        let s: Vec<u64> = vec![1, 2, 2, 1, 1, 2, 1, 2];
        let gs = GroupedSequence::build(&s, 2).unwrap();
        assert_eq!(gs.group_size(), 2);
        for i in 1..=8u64 {
            assert_eq!(gs.access(i).unwrap(), s[i as usize - 1]);
        }

        // n=16, sigma=8, group_size=4 -> g(5)=2
        let s: Vec<u64> = (0..16).map(|i| i % 8 + 1).collect();
        let gs = GroupedSequence::build_with_group_size(&s, 8, 4).unwrap();
        assert_eq!(gs.group_of(5) + 1, 2);

        let ws = GroupedSequence::build(&[1, 2, 1, 3], 3).unwrap();
        assert_eq!(ws.multi_freq(&[1, 3], 1, 4).unwrap(), vec![2, 1]);
        assert_eq!(ws.multi_freq(&[], 1, 4).unwrap(), Vec::<u64>::new());
    }

    fn random_case(s: Vec<u64>, sigma: u64) {
        let ws = WaveletSequence::build(&s, sigma).unwrap();
        let n = s.len() as u64;
        for i in 1..=n {
            assert_eq!(ws.access(i).unwrap(), s[i as usize - 1]);
        }
        for sym in 1..=sigma {
            for i in 0..=n {
                assert_eq!(ws.rank(sym, i).unwrap(), scan_rank(&s, sym, i), "rank({sym},{i})");
            }
            let total = scan_rank(&s, sym, n);
            for j in 1..=total + 1 {
                assert_eq!(ws.select(sym, j).unwrap(), scan_select(&s, sym, j));
            }
        }
        for i in 0..=n {
            let br = ws.batch_rank(i).unwrap();
            assert_eq!(br.iter().sum::<u64>(), i);
            for sym in 1..=sigma {
                assert_eq!(br[sym as usize - 1], ws.rank(sym, i).unwrap());
            }
        }
    }

    #[test]
    fn wavelet_fixed_cases() {
        random_case(vec![5, 1, 5, 2, 4, 3, 5, 5, 1], 5);
        random_case(vec![1, 1, 1], 1);
        random_case((1..=17).collect(), 17);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn wavelet_matches_scan(
            (sigma, s) in (1u64..12).prop_flat_map(|sigma| {
                (Just(sigma), proptest::collection::vec(1..=sigma, 1..200))
            })
        ) {
            random_case(s, sigma);
        }

        #[test]
        fn grouped_reconstructs_and_counts(
            (sigma, s) in (1u64..40).prop_flat_map(|sigma| {
                (Just(sigma), proptest::collection::vec(1..=sigma, 1..150))
            }),
            gsz in 1u64..6,
        ) {
            let gs = GroupedSequence::build_with_group_size(&s, sigma, gsz).unwrap();
            let n = s.len() as u64;
            for i in 1..=n {
                prop_assert_eq!(gs.access(i).unwrap(), s[i as usize - 1]);
            }
            // multi_freq equals per-symbol scan on a random subrange
            let (i, j) = (1, n);
            let ys: Vec<u64> = (1..=sigma).collect();
            let freqs = gs.multi_freq(&ys, i, j).unwrap();
            for (y, f) in ys.iter().zip(&freqs) {
                prop_assert_eq!(*f, scan_rank(&s, *y, j) - scan_rank(&s, *y, i - 1));
            }
            // select round trip
            for &y in &ys {
                let total = scan_rank(&s, y, n);
                for t in 1..=total {
                    prop_assert_eq!(gs.select(y, t).unwrap(), scan_select(&s, y, t));
                }
                prop_assert_eq!(gs.select(y, total + 1).unwrap(), None);
                for i in 0..=n {
                    prop_assert_eq!(gs.rank(y, i).unwrap(), scan_rank(&s, y, i));
                }
            }
        }
    }
}
