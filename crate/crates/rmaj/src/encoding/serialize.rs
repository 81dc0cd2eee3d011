//! On-disk container.
//!
//! Layout (little-endian): magic "RMAJ", version u16, n u64, p u32, q u32,
//! backend u8, branch u8, z u64, micro level u8 (0xFF = none), section count
//! u32, then per section: id u16, bit length u64, byte offset u64 (from the
//! start of the container). Section 1 holds the kept levels, section 2 the
//! micro store. Rank/select directories are rebuilt on load, so the stored
//! bits carry no redundancy.

use std::collections::HashMap;
use std::sync::Mutex;

use super::{
    BackendKind, LevelData, MajorityEncoding, MicroBranch, MicroData, MicroStore, SpaceReport,
};
use crate::bitvec::{PlainBits, RankSelectBitVector, SparseSelectVector};
use crate::decomposition::{LevelInfo, Quadruple};
use crate::decomposition::{padded_len, top_level};
use crate::error::{Error, Result};
use crate::sequences::GroupedSequence;
use crate::stream::{WordReader, WordWriter};

const MAGIC: &[u8; 4] = b"RMAJ";
const VERSION: u16 = 1;
const SECTION_LEVELS: u16 = 1;
const SECTION_MICRO: u16 = 2;

impl MajorityEncoding {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut sections: Vec<(u16, Vec<u64>, u64)> = Vec::new();

        let mut w = WordWriter::new();
        for ld in &self.levels {
            let ext_len = level_extent_len(self.n, ld.k);
            let mw = super::ceil_lg(ext_len + 1).max(1);
            ld.l_dir.serialize(&mut w);
            ld.p_dir.serialize(&mut w);
            ld.pointers.serialize(&mut w);
            match self.backend {
                BackendKind::PerCandidate => {
                    // the directory already fixes the vector count; each
                    // vector stores its one-count and a compact payload
                    for v in ld.vectors.as_ref().expect("per-candidate backend") {
                        w.push_bits(v.ones(), mw);
                        v.serialize_compact(&mut w);
                    }
                }
                BackendKind::Grouped => {
                    ld.m_vec.as_ref().expect("grouped backend").serialize(&mut w);
                    match &ld.p_seq {
                        Some(seq) => {
                            w.push_bits(1, 1);
                            seq.serialize(&mut w);
                        }
                        None => w.push_bits(0, 1),
                    }
                }
            }
        }
        let (words, bits) = w.finish();
        sections.push((SECTION_LEVELS, words, bits));

        if let Some(micro) = &self.micro {
            let mut w = WordWriter::new();
            match &micro.data {
                MicroData::RankReduced { entry_width, arrays } => {
                    w.push_bits(*entry_width as u64, 8);
                    arrays.serialize(&mut w);
                }
                MicroData::Encoded { inners, .. } => {
                    for inner in inners {
                        match inner {
                            Some((enc, _, _)) => {
                                w.push_bits(1, 1);
                                enc.serialize(&mut w);
                            }
                            None => w.push_bits(0, 1),
                        }
                    }
                }
            }
            let (words, bits) = w.finish();
            sections.push((SECTION_MICRO, words, bits));
        }

        let header_len = 4 + 2 + 8 + 4 + 4 + 1 + 1 + 8 + 1 + 4 + sections.len() * 18;
        let mut out = Vec::with_capacity(header_len);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&(self.p as u32).to_le_bytes());
        out.extend_from_slice(&(self.q as u32).to_le_bytes());
        out.push(match self.backend {
            BackendKind::PerCandidate => 0,
            BackendKind::Grouped => 1,
        });
        out.push(match self.branch {
            MicroBranch::RankReduced => 0,
            MicroBranch::Encoded => 1,
        });
        out.extend_from_slice(&self.z.to_le_bytes());
        out.push(self.micro_level.map_or(0xFF, |k| k as u8));
        out.extend_from_slice(&(sections.len() as u32).to_le_bytes());
        let mut offset = header_len as u64;
        for (id, _, bits) in &sections {
            out.extend_from_slice(&id.to_le_bytes());
            out.extend_from_slice(&bits.to_le_bytes());
            out.extend_from_slice(&offset.to_le_bytes());
            offset += bits.div_ceil(8);
        }
        debug_assert_eq!(out.len(), header_len);
        for (_, words, bits) in &sections {
            push_words_as_bytes(&mut out, words, *bits);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut c = Cursor { bytes, at: 0 };
        if c.take(4)? != MAGIC {
            return Err(Error::format("bad magic"));
        }
        if u16::from_le_bytes(c.take(2)?.try_into().unwrap()) != VERSION {
            return Err(Error::format("unsupported version"));
        }
        let n = c.u64()?;
        let p = u32::from_le_bytes(c.take(4)?.try_into().unwrap()) as u64;
        let q = u32::from_le_bytes(c.take(4)?.try_into().unwrap()) as u64;
        if n == 0 || p == 0 || p >= q {
            return Err(Error::format("bad header parameters"));
        }
        let backend = match c.u8()? {
            0 => BackendKind::PerCandidate,
            1 => BackendKind::Grouped,
            _ => return Err(Error::format("unknown backend")),
        };
        let branch = match c.u8()? {
            0 => MicroBranch::RankReduced,
            1 => MicroBranch::Encoded,
            _ => return Err(Error::format("unknown micro branch")),
        };
        let z = c.u64()?;
        let micro_level = match c.u8()? {
            0xFF => None,
            k if (k as u32) <= top_level(n) => Some(k as u32),
            _ => return Err(Error::format("micro level out of range")),
        };
        let n_sections = u32::from_le_bytes(c.take(4)?.try_into().unwrap());
        let mut table: Vec<(u16, u64, u64)> = Vec::new();
        for _ in 0..n_sections {
            let id = u16::from_le_bytes(c.take(2)?.try_into().unwrap());
            let bits = c.u64()?;
            let off = c.u64()?;
            table.push((id, bits, off));
        }
        let section = |id: u16| -> Result<Option<(Vec<u64>, u64)>> {
            match table.iter().find(|&&(sid, _, _)| sid == id) {
                None => Ok(None),
                Some(&(_, bits, off)) => {
                    let len = bits.div_ceil(8) as usize;
                    let start = off as usize;
                    if start + len > bytes.len() {
                        return Err(Error::format("section past end of container"));
                    }
                    Ok(Some((bytes_to_words(&bytes[start..start + len]), bits)))
                }
            }
        };

        let (pe, qe) = super::effective_tau(p, q);
        let (words, bits) =
            section(SECTION_LEVELS)?.ok_or_else(|| Error::format("missing levels section"))?;
        let mut r = WordReader::new(&words, bits);
        let k_min = micro_level.map_or(0, |m| m + 1);
        let mut levels = Vec::new();
        for k in k_min..=top_level(n) {
            let ext_len = level_extent_len(n, k);
            let mw = super::ceil_lg(ext_len + 1).max(1);
            let l_dir = RankSelectBitVector::deserialize(&mut r)?;
            let p_dir = RankSelectBitVector::deserialize(&mut r)?;
            let pointers = PlainBits::deserialize(&mut r)?;
            let (vectors, m_vec, p_seq) = match backend {
                BackendKind::PerCandidate => {
                    let total = l_dir.len() - l_dir.ones();
                    let mut vecs = Vec::with_capacity(total as usize);
                    for _ in 0..total {
                        let ones = r.read_bits(mw)?;
                        vecs.push(SparseSelectVector::deserialize_compact(
                            &mut r, ones, ext_len,
                        )?);
                    }
                    (Some(vecs), None, None)
                }
                BackendKind::Grouped => {
                    let m_vec = RankSelectBitVector::deserialize(&mut r)?;
                    let p_seq = if r.read_bits(1)? == 1 {
                        Some(GroupedSequence::deserialize(&mut r)?)
                    } else {
                        None
                    };
                    (None, Some(m_vec), p_seq)
                }
            };
            levels.push(LevelData { k, vectors, l_dir, pointers, p_dir, m_vec, p_seq });
        }

        let micro = match micro_level {
            None => None,
            Some(km) => {
                let (words, bits) = section(SECTION_MICRO)?
                    .ok_or_else(|| Error::format("missing micro section"))?;
                let mut r = WordReader::new(&words, bits);
                let data = match branch {
                    MicroBranch::RankReduced => {
                        let entry_width = r.read_bits(8)? as u32;
                        if entry_width == 0 || entry_width > 64 {
                            return Err(Error::format("bad micro entry width"));
                        }
                        MicroData::RankReduced {
                            entry_width,
                            arrays: PlainBits::deserialize(&mut r)?,
                        }
                    }
                    MicroBranch::Encoded => {
                        let n_quads = (padded_len(n) >> km) / 2;
                        let mut inners = Vec::with_capacity(n_quads as usize);
                        for _ in 0..n_quads {
                            if r.read_bits(1)? == 1 {
                                let enc = super::InnerEncoding::deserialize(&mut r)?;
                                let (w, b) = enc.to_words();
                                inners.push(Some((enc, w, b)));
                            } else {
                                inners.push(None);
                            }
                        }
                        MicroData::Encoded { inners, memo: Mutex::new(HashMap::new()) }
                    }
                };
                Some(MicroStore { n, p, q, level: km, data })
            }
        };
        Ok(Self { n, p, q, pe, qe, backend, branch, z, micro_level, levels, micro })
    }

    /// Component payload sizes; `total_bits` is the actual container size,
    /// including length prefixes and the header.
    pub fn space_report(&self) -> SpaceReport {
        let mut candidate_bits = 0;
        let mut directory_bits = 0;
        let mut pointer_bits = 0;
        let mut backend_bits = 0;
        for ld in &self.levels {
            directory_bits += ld.l_dir.plain().len() + ld.p_dir.plain().len();
            pointer_bits += ld.pointers.len();
            if let Some(vecs) = &ld.vectors {
                let mw = super::ceil_lg(level_extent_len(self.n, ld.k) + 1).max(1) as u64;
                candidate_bits +=
                    vecs.iter().map(|v| mw + v.compact_bits()).sum::<u64>();
            }
            if let Some(m) = &ld.m_vec {
                backend_bits += m.plain().len();
            }
            if let Some(seq) = &ld.p_seq {
                backend_bits += seq.space_bits();
            }
        }
        let micro_bits = match self.micro.as_ref().map(|m| &m.data) {
            None => 0,
            Some(MicroData::RankReduced { arrays, .. }) => 8 + arrays.len(),
            Some(MicroData::Encoded { inners, .. }) => inners
                .iter()
                .map(|o| 1 + o.as_ref().map_or(0, |&(_, _, bits)| bits))
                .sum(),
        };
        let total_bits = self.to_bytes().len() as u64 * 8;
        SpaceReport {
            n: self.n,
            candidate_bits,
            directory_bits,
            pointer_bits,
            micro_bits,
            backend_bits,
            header_bits: total_bits
                .saturating_sub(candidate_bits + directory_bits + pointer_bits + micro_bits + backend_bits),
            total_bits,
            bits_per_element: total_bits as f64 / self.n as f64,
        }
    }
}

fn level_extent_len(n: u64, k: u32) -> u64 {
    let n_pad = padded_len(n);
    let info = LevelInfo { k, block_size: 1u64 << k, n_k: n_pad >> k };
    Quadruple::new(&info, 0).extent_len()
}

fn push_words_as_bytes(out: &mut Vec<u8>, words: &[u64], bits: u64) {
    let n_bytes = bits.div_ceil(8) as usize;
    let mut raw = Vec::with_capacity(words.len() * 8);
    for w in words {
        raw.extend_from_slice(&w.to_le_bytes());
    }
    raw.truncate(n_bytes);
    out.extend_from_slice(&raw);
}

fn bytes_to_words(bytes: &[u8]) -> Vec<u64> {
    let mut words = Vec::with_capacity(bytes.len().div_ceil(8));
    for chunk in bytes.chunks(8) {
        let mut b = [0u8; 8];
        b[..chunk.len()].copy_from_slice(chunk);
        words.push(u64::from_le_bytes(b));
    }
    words
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(Error::format("truncated container"));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
