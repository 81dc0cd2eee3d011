//! Construction of the majority index.

use super::{
    effective_tau, lg_one_over_tau, BackendKind, BuildOptions, LevelData, MajorityEncoding,
    MicroBranch, MicroStore, INNER_SPACE_C,
};
use crate::bitvec::{PlainBits, RankSelectBitVector, SparseSelectVector};
use crate::decomposition::{self, padded_len, top_level};
use crate::error::{Error, Result};
use crate::sequences::GroupedSequence;
use crate::stream::WordWriter;

impl MajorityEncoding {
    pub fn build(a: &[u64], p: u64, q: u64) -> Result<Self> {
        Self::build_with(a, p, q, &BuildOptions::default())
    }

    pub fn build_with(a: &[u64], p: u64, q: u64, opts: &BuildOptions) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("empty array"));
        }
        if p == 0 || p >= q {
            return Err(Error::invalid("threshold must be in (0, 1)"));
        }
        if q > u32::MAX as u64 {
            return Err(Error::invalid("threshold denominator exceeds 32 bits"));
        }
        let n = a.len() as u64;
        let n_pad = padded_len(n);
        let (pe, qe) = effective_tau(p, q);
        let lg_n = n_pad.ilog2() as u64;

        // Drop threshold: levels whose quadruples span at most Z positions
        // move to the micro store. The scan branch needs Z >= 1/tau so that a
        // kept level always exists above any range a scan can't afford; the
        // encoded branch can push Z up to the point where the pointer-free
        // encodings still fit in o(lg n) bits each.
        let z1 = qe.div_ceil(pe);
        let l1t = lg_one_over_tau(pe, qe);
        let z2 = lg_n / (2 * INNER_SPACE_C * l1t);
        let auto_branch =
            if z2 > z1 { MicroBranch::Encoded } else { MicroBranch::RankReduced };
        let branch = opts.branch.unwrap_or(auto_branch);
        let z = opts.z_override.unwrap_or(match branch {
            MicroBranch::RankReduced => z1,
            MicroBranch::Encoded => z2.max(z1),
        });
        let top = top_level(n);
        let micro_level = (0..=top).rev().find(|&k| 4 * (1u64 << k) <= z);

        // With very small 1/tau the per-candidate vectors are wide relative
        // to their one-counts; the grouped backend then stores them sparsely.
        let auto_backend = if qe > pe * lg_n * lg_n {
            BackendKind::Grouped
        } else {
            BackendKind::PerCandidate
        };
        let backend = opts.backend.unwrap_or(auto_backend);

        let slot_cap = 4 * qe / pe;
        let lvl_w = super::ceil_lg(lg_n).max(1);
        let slot_w = super::ceil_lg(slot_cap).max(1);

        // Top-down pruning over the kept levels. `active` tracks positions
        // not yet represented by a stored vector; `made_by` records which
        // (level, quadruple, slot) deactivated a position, so a lower-level
        // candidate sharing that position can point at the vector instead of
        // storing its own. Deactivations of a level apply once the whole
        // level is built, so sibling quadruples at the same level are
        // independent.
        let mut active = vec![true; a.len()];
        let mut made_by: Vec<Option<(u32, u64, u64)>> = vec![None; a.len()];
        let k_min = micro_level.map_or(0, |m| m + 1);
        let table = decomposition::level_table(n);
        let mut levels: Vec<LevelData> = Vec::new();
        for info in table.iter().rev() {
            if info.k < k_min {
                break;
            }
            let n_quads = (info.n_k / 2) as usize;
            let ext_len = decomposition::Quadruple::new(info, 0).extent_len();
            let mut ef_vecs: Vec<SparseSelectVector> = Vec::new();
            let mut m_bits: Vec<bool> = vec![false; n_quads * ext_len as usize];
            let mut p_symbols_by_pos: Vec<(u64, u64)> = Vec::new(); // (global mark pos, slot)
            let mut l_counts = vec![0u64; n_quads];
            let mut p_counts = vec![0u64; n_quads];
            let mut ptr_w = WordWriter::new();
            let mut pending: Vec<(u64, (u32, u64, u64))> = Vec::new();
            for d in decomposition::quadruple_list(info) {
                let l = d.offset as usize;
                for y in decomposition::candidates(a, &d, pe, qe) {
                    let in_range: Vec<u64> = d
                        .range_positions(n)
                        .into_iter()
                        .filter(|&pos| a[pos as usize - 1] == y)
                        .collect();
                    if let Some(&dead) =
                        in_range.iter().find(|&&pos| !active[pos as usize - 1])
                    {
                        // Covered by a higher-level vector: store a pointer.
                        let (tk, tl, ts) =
                            made_by[dead as usize - 1].expect("inactive implies recorded");
                        debug_assert!(tk > info.k);
                        let n_half = (d.n_pad() >> tk) / 2;
                        let b = d.range_start0() >> tk;
                        let base_l = (b / 2 + n_half - 2) % n_half;
                        let rel = (tl + n_half - base_l) % n_half;
                        assert!(rel < 4, "pointer target out of tag reach");
                        ptr_w.push_bits(tk as u64, lvl_w);
                        ptr_w.push_bits(ts, slot_w);
                        ptr_w.push_bits(rel, 2);
                        p_counts[l] += 1;
                        continue;
                    }
                    let slot = l_counts[l];
                    let mut locals: Vec<u64> = d
                        .extent_positions(n)
                        .into_iter()
                        .filter(|&pos| a[pos as usize - 1] == y)
                        .map(|pos| d.extent_local(pos) + 1)
                        .collect();
                    locals.sort_unstable();
                    match backend {
                        BackendKind::PerCandidate => {
                            ef_vecs.push(SparseSelectVector::build(&locals, ext_len)?)
                        }
                        BackendKind::Grouped => {
                            for &local in &locals {
                                let g = l as u64 * ext_len + local - 1;
                                m_bits[g as usize] = true;
                                p_symbols_by_pos.push((g, slot + 1));
                            }
                        }
                    }
                    l_counts[l] += 1;
                    for pos in in_range {
                        pending.push((pos, (info.k, d.offset, slot)));
                    }
                }
            }
            for (pos, src) in pending {
                let idx = pos as usize - 1;
                if active[idx] {
                    active[idx] = false;
                    made_by[idx] = Some(src);
                }
            }
            let (vectors, m_vec, p_seq) = match backend {
                BackendKind::PerCandidate => (Some(ef_vecs), None, None),
                BackendKind::Grouped => {
                    p_symbols_by_pos.sort_unstable_by_key(|&(g, _)| g);
                    let symbols: Vec<u64> =
                        p_symbols_by_pos.iter().map(|&(_, s)| s).collect();
                    let seq = if symbols.is_empty() {
                        None
                    } else {
                        Some(GroupedSequence::build_with_group_size(
                            &symbols,
                            slot_cap + 1,
                            crate::sequences::default_group_size(n).max(1),
                        )?)
                    };
                    (None, Some(RankSelectBitVector::build(PlainBits::from_bools(&m_bits))), seq)
                }
            };
            levels.push(LevelData {
                k: info.k,
                vectors,
                l_dir: unary_directory(&l_counts),
                pointers: PlainBits::from_writer(ptr_w),
                p_dir: unary_directory(&p_counts),
                m_vec,
                p_seq,
            });
        }
        levels.reverse();

        let strict_table =
            opts.strict_table || INNER_SPACE_C * z * l1t <= super::STRICT_TABLE_BITS;
        let micro = match micro_level {
            Some(km) => Some(MicroStore::build(a, p, q, km, branch, strict_table)?),
            None => None,
        };
        Ok(Self {
            n,
            p,
            q,
            pe,
            qe,
            backend,
            branch,
            z,
            micro_level,
            levels,
            micro,
        })
    }
}

/// `1 0^c0 1 0^c1 ... 1`: select(t) locates quadruple `t`'s span in O(1).
fn unary_directory(counts: &[u64]) -> RankSelectBitVector {
    let total: u64 = counts.iter().sum();
    let mut bits = Vec::with_capacity(counts.len() + 1 + total as usize);
    for &c in counts {
        bits.push(true);
        bits.extend(std::iter::repeat(false).take(c as usize));
    }
    bits.push(true);
    RankSelectBitVector::build(PlainBits::from_bools(&bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary_directory_shape() {
        let dir = unary_directory(&[2, 6, 4]);
        let s: String = (1..=dir.len())
            .map(|i| if dir.access(i).unwrap() { '1' } else { '0' })
            .collect();
        assert_eq!(s, "1001000000100001");
        // span of quadruple l: items before and count, via two selects
        assert_eq!(dir.select(1), Some(1));
        assert_eq!(dir.select(2), Some(4));
        assert_eq!(dir.select(3), Some(11));
        assert_eq!(dir.select(4), Some(16));
    }
}
