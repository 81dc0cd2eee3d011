//! The majority index.
//!
//! Build: top-down pruning stores one occurrence vector per quadruple and
//! still-active candidate; candidates already covered by a higher-level
//! vector get a fixed-width pointer to it instead. Per-level unary
//! directories address vectors and pointers in O(1). A bottom-up threshold
//! `Z` drops every level whose quadruples span at most `Z` positions; those
//! queries go to a micro store holding either rank-reduced copies of the
//! small ranges or self-contained pointer-free encodings with a memoized
//! answer table. When the threshold is very small, the per-candidate vectors
//! are replaced by a grouped backend: one mark vector per quadruple plus a
//! two-level sequence of candidate slots supporting batched frequency
//! queries.
//!
//! Query: the range maps to one quadruple in O(1); every stored vector and
//! every pointer target of that quadruple is verified against the exact
//! rational threshold, deduplicating elements by their first marked position
//! inside the range.

mod build;
pub mod inner;
mod micro;
mod query;
mod serialize;

pub use inner::InnerEncoding;
pub use micro::{MicroData, MicroStore};

use crate::bitvec::{PlainBits, RankSelectBitVector, SparseSelectVector};
use crate::decomposition::{padded_len, top_level, Quadruple};
use crate::error::{Error, Result};
use crate::sequences::GroupedSequence;
use serde::Serialize;

/// Space constant of the pointer-free encoding: measured worst-case bits per
/// element per `lg(1/tau)` over calibration inputs up to micro scale.
pub const INNER_SPACE_C: u64 = 40;

/// Memoized micro answers are precomputed eagerly when the encodings are at
/// most this many bits.
pub const STRICT_TABLE_BITS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BackendKind {
    /// One rank/select vector per stored candidate.
    PerCandidate,
    /// Shared mark vector per quadruple plus a grouped slot sequence.
    Grouped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MicroBranch {
    /// Micro ranges copied in rank space and scanned per query.
    RankReduced,
    /// Micro ranges held as pointer-free encodings with memoized answers.
    Encoded,
}

/// Build-time overrides, used by tests and the bench harness; `default()`
/// selects everything automatically.
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub backend: Option<BackendKind>,
    pub branch: Option<MicroBranch>,
    pub z_override: Option<u64>,
    /// Precompute the micro answer table even above [`STRICT_TABLE_BITS`].
    pub strict_table: bool,
}

/// Per-level storage. Exactly one of the vector backends is populated,
/// matching the encoding's `backend`.
#[derive(Debug)]
pub(crate) struct LevelData {
    pub(crate) k: u32,
    /// Per-candidate occurrence vectors over extents, select-only so each
    /// costs bits proportional to its one-count, in (quadruple, slot) order.
    pub(crate) vectors: Option<Vec<SparseSelectVector>>,
    /// Unary per-quadruple vector counts: `1 0^c0 1 0^c1 ... 1`.
    pub(crate) l_dir: RankSelectBitVector,
    /// Packed pointer records (target level, target slot, quadruple tag).
    pub(crate) pointers: PlainBits,
    /// Unary per-quadruple pointer counts, same shape as `l_dir`.
    pub(crate) p_dir: RankSelectBitVector,
    /// Grouped backend: concatenated per-quadruple mark vectors over extents.
    pub(crate) m_vec: Option<RankSelectBitVector>,
    /// Grouped backend: candidate slots of the marked positions.
    pub(crate) p_seq: Option<GroupedSequence>,
}

#[derive(Debug)]
pub struct MajorityEncoding {
    pub(crate) n: u64,
    /// Query threshold as given.
    pub(crate) p: u64,
    pub(crate) q: u64,
    /// Structural threshold: the query threshold clamped to 1/2.
    pub(crate) pe: u64,
    pub(crate) qe: u64,
    pub(crate) backend: BackendKind,
    pub(crate) branch: MicroBranch,
    pub(crate) z: u64,
    /// Deepest dropped level; levels at or below answer via the micro store.
    pub(crate) micro_level: Option<u32>,
    /// Kept levels ascending by k, from `micro_level+1` to the top.
    pub(crate) levels: Vec<LevelData>,
    pub(crate) micro: Option<MicroStore>,
}

/// Per-query verification work, reported by the bench harness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub verified_candidates: u64,
    pub followed_pointers: u64,
}

/// Exact serialized size of each component, in bits.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpaceReport {
    pub n: u64,
    pub candidate_bits: u64,
    pub directory_bits: u64,
    pub pointer_bits: u64,
    pub micro_bits: u64,
    pub backend_bits: u64,
    pub header_bits: u64,
    pub total_bits: u64,
    pub bits_per_element: f64,
}

impl MajorityEncoding {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// The query threshold `(p, q)` as supplied at build.
    pub fn tau(&self) -> (u64, u64) {
        (self.p, self.q)
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend
    }

    pub fn micro_branch(&self) -> MicroBranch {
        self.branch
    }

    pub fn z_threshold(&self) -> u64 {
        self.z
    }

    pub fn micro_level(&self) -> Option<u32> {
        self.micro_level
    }

    pub(crate) fn n_pad(&self) -> u64 {
        padded_len(self.n)
    }

    pub(crate) fn level_data(&self, k: u32) -> Result<&LevelData> {
        let k_min = self.micro_level.map_or(0, |m| m + 1);
        if k < k_min || k > top_level(self.n) {
            return Err(Error::addressing(format!("level {k} not stored")));
        }
        let ld = &self.levels[(k - k_min) as usize];
        debug_assert_eq!(ld.k, k);
        Ok(ld)
    }

    /// Candidate-slot capacity per quadruple.
    pub(crate) fn slot_capacity(&self) -> u64 {
        4 * self.qe / self.pe
    }

    /// Packed pointer record widths: target level, target slot, quadruple tag.
    pub(crate) fn pointer_widths(&self) -> (u32, u32, u32) {
        let lvl = ceil_lg(self.n_pad().ilog2() as u64).max(1);
        let slot = ceil_lg(self.slot_capacity()).max(1);
        (lvl, slot, 2)
    }
}

impl LevelData {
    /// Stored vectors before quadruple `l` and the count for `l`.
    pub(crate) fn vector_span(&self, l: u64) -> (u64, u64) {
        dir_span(&self.l_dir, l)
    }

    /// Pointers before quadruple `l` and the count for `l`.
    pub(crate) fn pointer_span(&self, l: u64) -> (u64, u64) {
        dir_span(&self.p_dir, l)
    }
}

fn dir_span(dir: &RankSelectBitVector, l: u64) -> (u64, u64) {
    let t = l + 1;
    let s = dir.select(t).expect("directory covers every quadruple");
    let e = dir.select(t + 1).expect("directory covers every quadruple");
    (s - t, e - s - 1)
}

/// Effective structural threshold: the query threshold clamped to 1/2.
pub(crate) fn effective_tau(p: u64, q: u64) -> (u64, u64) {
    if 2 * p > q {
        (1, 2)
    } else {
        (p, q)
    }
}

/// Local-offset windows of the query `[i, j]` inside the extent of `d`, in
/// ascending global-position order. One window normally; two when the extent
/// covers the whole padded universe and the query straddles its seam.
pub(crate) fn extent_windows(d: &Quadruple, i: u64, j: u64) -> Vec<(u64, u64)> {
    let li = d.extent_local(i);
    let lj = d.extent_local(j);
    if li <= lj {
        vec![(li, lj)]
    } else {
        vec![(li, d.extent_len() - 1), (0, lj)]
    }
}

/// Bits needed to write any value in `[0, x)`.
pub(crate) fn ceil_lg(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// `ceil(lg(1/tau))`, at least 1.
pub(crate) fn lg_one_over_tau(pe: u64, qe: u64) -> u64 {
    (ceil_lg(qe.div_ceil(pe)) as u64).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_majorities;
    use proptest::prelude::*;

    fn check_with(a: &[u64], p: u64, q: u64, opts: &BuildOptions) -> MajorityEncoding {
        let enc = MajorityEncoding::build_with(a, p, q, opts).unwrap();
        let n = a.len() as u64;
        for i in 1..=n {
            for j in i..=n {
                let want: Vec<u64> = oracle_majorities(a, p, q, i, j)
                    .unwrap()
                    .entries
                    .iter()
                    .map(|e| e.first_pos)
                    .collect();
                let (got, _) = enc.query_positions_with_stats(i, j).unwrap();
                assert_eq!(got, want, "a={a:?} tau={p}/{q} [{i},{j}] {opts:?}");
                assert_eq!(enc.query_decision(i, j).unwrap(), !want.is_empty());
                assert_eq!(enc.query_count(i, j).unwrap(), want.len() as u64);
            }
        }
        enc
    }

    fn check(a: &[u64], p: u64, q: u64) -> MajorityEncoding {
        check_with(a, p, q, &BuildOptions::default())
    }

    #[test]
    fn fixed_arrays_match_oracle() {
        check(&[1], 1, 2);
        check(&[1, 2, 1], 1, 2);
        check(&[7; 16], 1, 2);
        check(&(1..=20).collect::<Vec<u64>>(), 1, 2);
        check(&[2, 1, 1, 2, 1, 2, 2, 2, 1, 1], 2, 5);
        check(&[1, 1, 1, 2, 1], 3, 4); // threshold above 1/2
        let mixed: Vec<u64> = (0..50).map(|i| [3, 1, 4, 1, 5, 9, 2][i % 7]).collect();
        check(&mixed, 1, 3);
        check(&mixed, 1, 8);
    }

    #[test]
    fn exhaustive_ternary_arrays() {
        // every array over {1,2,3} of length <= 5, every range, tau = 1/2
        for n in 1usize..=5 {
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let a: Vec<u64> = (0..n)
                    .map(|_| {
                        let v = (c % 3) as u64 + 1;
                        c /= 3;
                        v
                    })
                    .collect();
                check(&a, 1, 2);
            }
        }
    }

    #[test]
    fn forced_backends_and_branches_agree() {
        let a: Vec<u64> = (0..70).map(|i| [5, 5, 2, 7, 5, 1][i % 6]).collect();
        for backend in [BackendKind::PerCandidate, BackendKind::Grouped] {
            for branch in [MicroBranch::RankReduced, MicroBranch::Encoded] {
                for z in [None, Some(4), Some(16)] {
                    let opts = BuildOptions {
                        backend: Some(backend),
                        branch: Some(branch),
                        z_override: z,
                        strict_table: false,
                    };
                    let enc = check_with(&a, 1, 4, &opts);
                    assert_eq!(enc.backend_kind(), backend);
                    assert_eq!(enc.micro_branch(), branch);
                    if z == Some(16) {
                        assert_eq!(enc.micro_level(), Some(2));
                    }
                }
            }
        }
    }

    #[test]
    fn strict_table_precomputes_answers() {
        let a: Vec<u64> = (0..40).map(|i| (i % 3 + 1) as u64).collect();
        let opts = BuildOptions {
            branch: Some(MicroBranch::Encoded),
            z_override: Some(8),
            strict_table: true,
            ..Default::default()
        };
        let enc = check_with(&a, 1, 2, &opts);
        if let Some(MicroStore { data: MicroData::Encoded { memo, .. }, .. }) = &enc.micro {
            assert!(!memo.lock().unwrap().is_empty());
        } else {
            panic!("expected encoded micro store");
        }
    }

    #[test]
    fn pointers_are_created_and_followed() {
        // long constant run: deep-level candidates are deactivated by the
        // top-level vector, so short in-run queries must follow pointers
        let mut a = vec![9u64; 40];
        a.extend((1..=24).map(|v| v));
        let enc = check(&a, 1, 2);
        let total_pointers: u64 = enc
            .levels
            .iter()
            .map(|ld| {
                let (lw, sw, tw) = enc.pointer_widths();
                ld.pointers.len() / (lw + sw + tw) as u64
            })
            .sum();
        assert!(total_pointers > 0, "expected pointer records");
        let (_, stats) = enc.query_positions_with_stats(8, 23).unwrap();
        assert!(stats.followed_pointers > 0, "{stats:?}");
    }

    #[test]
    fn per_query_work_is_bounded() {
        // verifications per query stay within O(q/p) of the located quadruple
        let a: Vec<u64> = (0..200).map(|i| (i * 7 % 13) as u64).collect();
        for (p, q) in [(1u64, 2u64), (1, 6), (2, 9)] {
            let enc = MajorityEncoding::build(&a, p, q).unwrap();
            let cap = enc.slot_capacity();
            for (i, j) in [(1, 200), (17, 61), (100, 101), (5, 5), (64, 193)] {
                let (_, stats) = enc.query_positions_with_stats(i, j).unwrap();
                assert!(
                    stats.verified_candidates <= 2 * cap,
                    "tau={p}/{q} [{i},{j}] {stats:?} cap={cap}"
                );
            }
        }
    }

    #[test]
    fn container_round_trip() {
        let a: Vec<u64> = (0..90).map(|i| (i % 11) as u64 + 1).collect();
        for opts in [
            BuildOptions::default(),
            BuildOptions { backend: Some(BackendKind::Grouped), ..Default::default() },
            BuildOptions {
                branch: Some(MicroBranch::Encoded),
                z_override: Some(8),
                ..Default::default()
            },
        ] {
            let enc = MajorityEncoding::build_with(&a, 1, 5, &opts).unwrap();
            let bytes = enc.to_bytes();
            let enc2 = MajorityEncoding::from_bytes(&bytes).unwrap();
            assert_eq!(enc2.to_bytes(), bytes, "{opts:?}");
            for (i, j) in [(1, 90), (3, 17), (40, 41), (88, 90)] {
                assert_eq!(
                    enc.query_positions(i, j).unwrap(),
                    enc2.query_positions(i, j).unwrap()
                );
            }
        }
    }

    #[test]
    fn container_rejects_garbage() {
        let enc = MajorityEncoding::build(&[1, 2, 3, 4, 2, 2], 1, 3).unwrap();
        let bytes = enc.to_bytes();
        assert!(MajorityEncoding::from_bytes(&[]).is_err());
        assert!(MajorityEncoding::from_bytes(b"NOPE").is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(MajorityEncoding::from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 99; // version
        assert!(MajorityEncoding::from_bytes(&bad).is_err());
        assert!(MajorityEncoding::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(MajorityEncoding::build(&[], 1, 2).is_err());
        assert!(MajorityEncoding::build(&[1], 0, 2).is_err());
        assert!(MajorityEncoding::build(&[1], 2, 2).is_err());
        assert!(MajorityEncoding::build(&[1], 3, 2).is_err());
    }

    #[test]
    fn query_rejects_bad_range() {
        let enc = MajorityEncoding::build(&[1, 2, 3], 1, 2).unwrap();
        assert!(enc.query_positions(0, 2).is_err());
        assert!(enc.query_positions(2, 1).is_err());
        assert!(enc.query_positions(1, 4).is_err());
    }

    #[test]
    fn space_report_accounts_for_container() {
        let a: Vec<u64> = (0..300).map(|i| (i % 17) as u64).collect();
        let enc = MajorityEncoding::build(&a, 1, 4).unwrap();
        let rep = enc.space_report();
        assert_eq!(rep.total_bits, enc.to_bytes().len() as u64 * 8);
        assert!(rep.candidate_bits > 0);
        assert!(rep.directory_bits > 0);
        assert!(rep.bits_per_element > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn random_arrays_match_oracle(
            a in proptest::collection::vec(1u64..7, 1..48),
            (p, q) in prop_oneof![
                Just((1u64, 2u64)), Just((1, 3)), Just((1, 5)), Just((2, 3)), Just((3, 7)),
            ],
            grouped in any::<bool>(),
        ) {
            let opts = BuildOptions {
                backend: grouped.then_some(BackendKind::Grouped),
                ..Default::default()
            };
            check_with(&a, p, q, &opts);
        }
    }
}
