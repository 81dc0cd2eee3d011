//! Query evaluation.
//!
//! A range maps to one quadruple; its stored candidates and pointer targets
//! together cover every possible majority. Each is verified against the
//! exact rational threshold via rank/select on the occurrence vectors, and
//! reported by its first occurrence in the range. Ranges below the kept
//! levels go to the micro store.

use super::{extent_windows, BackendKind, LevelData, MajorityEncoding, QueryStats};
use crate::decomposition::{locate, Quadruple, QueryLocation};
use crate::error::{Error, Result};

impl MajorityEncoding {
    /// First in-range position of every majority of `[i, j]`, ascending.
    pub fn query_positions(&self, i: u64, j: u64) -> Result<Vec<u64>> {
        Ok(self.query_positions_with_stats(i, j)?.0)
    }

    pub fn query_positions_with_stats(
        &self,
        i: u64,
        j: u64,
    ) -> Result<(Vec<u64>, QueryStats)> {
        let mut stats = QueryStats::default();
        let out = self.run(i, j, false, &mut stats)?;
        Ok((out, stats))
    }

    /// Whether `[i, j]` has any majority; stops at the first verified one.
    pub fn query_decision(&self, i: u64, j: u64) -> Result<bool> {
        let mut stats = QueryStats::default();
        Ok(!self.run(i, j, true, &mut stats)?.is_empty())
    }

    /// Number of distinct majorities of `[i, j]`.
    pub fn query_count(&self, i: u64, j: u64) -> Result<u64> {
        Ok(self.query_positions(i, j)?.len() as u64)
    }

    fn run(
        &self,
        i: u64,
        j: u64,
        decision: bool,
        stats: &mut QueryStats,
    ) -> Result<Vec<u64>> {
        let loc = locate(self.n, i, j)?;
        if let (Some(km), Some(micro)) = (self.micro_level, &self.micro) {
            if loc.k <= km {
                return micro.query(i, j, loc, stats);
            }
        }
        let len = j - i + 1;
        let d = loc.quadruple(self.n);
        let ld = self.level_data(loc.k)?;
        let windows = extent_windows(&d, i, j);
        let mut out: Vec<u64> = Vec::new();
        let push = |pos: u64, out: &mut Vec<u64>| {
            if !out.contains(&pos) {
                out.push(pos);
            }
        };

        let (x, stored) = ld.vector_span(loc.offset);
        match self.backend {
            BackendKind::PerCandidate => {
                for s in 0..stored {
                    stats.verified_candidates += 1;
                    if let Some(pos) =
                        self.verify_plain(ld, &d, x + s, &windows, len)?
                    {
                        push(pos, &mut out);
                        if decision {
                            return Ok(out);
                        }
                    }
                }
            }
            BackendKind::Grouped => {
                stats.verified_candidates += stored;
                for pos in self.verify_grouped_all(ld, &d, stored, &windows, len)? {
                    push(pos, &mut out);
                    if decision {
                        return Ok(out);
                    }
                }
            }
        }

        let (px, pointers) = ld.pointer_span(loc.offset);
        let (lw, sw, rw) = {
            let (a, b, c) = self.pointer_widths();
            (a, b, (a + b + c) as u64)
        };
        for r in 0..pointers {
            stats.followed_pointers += 1;
            stats.verified_candidates += 1;
            let base = (px + r) * rw;
            let tk = ld.pointers.bits_at(base, lw) as u32;
            let ts = ld.pointers.bits_at(base + lw as u64, sw);
            let rel = ld.pointers.bits_at(base + (lw + sw) as u64, 2);
            let n_half = (self.n_pad() >> tk) / 2;
            let b = d.range_start0() >> tk;
            let tl = ((b / 2 + n_half - 2) % n_half + rel) % n_half;
            let ld2 = self.level_data(tk)?;
            let d2 = QueryLocation { k: tk, offset: tl }.quadruple(self.n);
            // The target extent covers the pointing quadruple's whole range,
            // hence the query.
            let windows2 = extent_windows(&d2, i, j);
            let (x2, stored2) = ld2.vector_span(tl);
            if ts >= stored2 {
                return Err(Error::addressing("pointer past stored candidates"));
            }
            let pos = match self.backend {
                BackendKind::PerCandidate => {
                    self.verify_plain(ld2, &d2, x2 + ts, &windows2, len)?
                }
                BackendKind::Grouped => {
                    self.verify_grouped_one(ld2, &d2, ts + 1, &windows2, len)?
                }
            };
            if let Some(pos) = pos {
                push(pos, &mut out);
                if decision {
                    return Ok(out);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Per-candidate backend: threshold-check vector `seg` of the level;
    /// returns the first in-range position on success.
    fn verify_plain(
        &self,
        ld: &LevelData,
        d: &Quadruple,
        seg: u64,
        windows: &[(u64, u64)],
        len: u64,
    ) -> Result<Option<u64>> {
        let v = &ld.vectors.as_ref().expect("per-candidate backend")[seg as usize];
        let mut freq = 0;
        let mut first = None;
        for &(lo, hi) in windows {
            let below = v.rank(lo)?;
            let f = v.rank(hi + 1)? - below;
            freq += f;
            if first.is_none() && f > 0 {
                let local = v.select(below + 1).expect("f >= 1");
                first = Some(local - 1);
            }
        }
        Ok(self.admit(d, freq, first, len))
    }

    /// Grouped backend: frequencies of all `stored` slots of the quadruple
    /// in one batched pass; returns the first positions of the qualifiers.
    fn verify_grouped_all(
        &self,
        ld: &LevelData,
        d: &Quadruple,
        stored: u64,
        windows: &[(u64, u64)],
        len: u64,
    ) -> Result<Vec<u64>> {
        if stored == 0 {
            return Ok(Vec::new());
        }
        let m = ld.m_vec.as_ref().expect("grouped backend");
        let seq = ld.p_seq.as_ref().expect("stored > 0 implies marks");
        let base = d.offset * d.extent_len();
        let slots: Vec<u64> = (1..=stored).collect();
        let mut freq = vec![0u64; stored as usize];
        let mut first: Vec<Option<u64>> = vec![None; stored as usize];
        for &(lo, hi) in windows {
            let l1 = m.rank(base + lo)?;
            let l2 = m.rank(base + hi + 1)?;
            if l1 == l2 {
                continue;
            }
            for (s, f) in seq.multi_freq(&slots, l1 + 1, l2)?.into_iter().enumerate() {
                freq[s] += f;
                if f > 0 && first[s].is_none() {
                    let t = seq.rank(s as u64 + 1, l1)? + 1;
                    let gidx = seq.select(s as u64 + 1, t)?.expect("f >= 1");
                    let gpos = m.select(gidx).expect("marked");
                    first[s] = Some(gpos - base - 1);
                }
            }
        }
        let mut out = Vec::new();
        for s in 0..stored as usize {
            if let Some(pos) = self.admit(d, freq[s], first[s], len) {
                out.push(pos);
            }
        }
        Ok(out)
    }

    /// Grouped backend, single slot (pointer target).
    fn verify_grouped_one(
        &self,
        ld: &LevelData,
        d: &Quadruple,
        slot: u64,
        windows: &[(u64, u64)],
        len: u64,
    ) -> Result<Option<u64>> {
        let m = ld.m_vec.as_ref().expect("grouped backend");
        let seq = ld.p_seq.as_ref().expect("pointer target stored");
        let base = d.offset * d.extent_len();
        let mut freq = 0;
        let mut first = None;
        for &(lo, hi) in windows {
            let l1 = m.rank(base + lo)?;
            let l2 = m.rank(base + hi + 1)?;
            let f = seq.rank(slot, l2)? - seq.rank(slot, l1)?;
            freq += f;
            if f > 0 && first.is_none() {
                let t = seq.rank(slot, l1)? + 1;
                let gidx = seq.select(slot, t)?.expect("f >= 1");
                let gpos = m.select(gidx).expect("marked");
                first = Some(gpos - base - 1);
            }
        }
        Ok(self.admit(d, freq, first, len))
    }

    /// Exact threshold test; maps the extent-local first offset to a global
    /// position.
    fn admit(&self, d: &Quadruple, freq: u64, first: Option<u64>, len: u64) -> Option<u64> {
        if freq * self.q >= self.p * len {
            let off = first.expect("freq >= 1");
            Some((d.extent_start0() + off) % self.n_pad() + 1)
        } else {
            None
        }
    }
}
