//! Brute-force reference implementations used as ground truth in tests and
//! by the `verify` command.

use crate::decomposition::{self, padded_len, top_level, LevelInfo, Quadruple, QueryLocation};
use crate::error::{Error, Result};

/// One majority element with its first in-range position and exact count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleEntry {
    pub value: u64,
    pub first_pos: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleAnswer {
    pub entries: Vec<OracleEntry>,
}

/// All elements with at least `p/q * (j-i+1)` occurrences in `a[i..=j]`
/// (1-based, inclusive), by counting scan; entries sorted by first position.
pub fn oracle_majorities(a: &[u64], p: u64, q: u64, i: u64, j: u64) -> Result<OracleAnswer> {
    let n = a.len() as u64;
    Error::check_range(i, 1, n)?;
    Error::check_range(j, i, n)?;
    let len = j - i + 1;
    let mut entries: Vec<OracleEntry> = Vec::new();
    for pos in i..=j {
        let v = a[pos as usize - 1];
        match entries.iter_mut().find(|e| e.value == v) {
            Some(e) => e.count += 1,
            None => entries.push(OracleEntry { value: v, first_pos: pos, count: 1 }),
        }
    }
    entries.retain(|e| e.count * q >= p * len);
    Ok(OracleAnswer { entries })
}

/// Every `(k, l)` whose quadruple covers `[i, j]` and has a middle block
/// fully inside `[i, j]` — the raw association predicate, by exhaustive scan.
pub fn raw_quadruple_matches(n: u64, i: u64, j: u64) -> Vec<QueryLocation> {
    let mut out = Vec::new();
    for level in decomposition::level_table(n) {
        for d in decomposition::quadruple_list(&level) {
            if covers_and_witnesses(&d, i, j) {
                out.push(QueryLocation { k: d.k, offset: d.offset });
            }
        }
    }
    out
}

fn covers_and_witnesses(d: &Quadruple, i: u64, j: u64) -> bool {
    if !d.range_contains_interval(i, j) {
        return false;
    }
    let bs = d.block_size;
    d.middle_blocks().iter().any(|&b| b * bs + 1 >= i && (b + 1) * bs <= j)
}

/// Exhaustive-scan counterpart of `decomposition::locate`: the deepest level
/// where `[i, j]` fully contains one block, or two blocks starting at an odd
/// id, determines the quadruple; ranges with no such level fall back to the
/// first four-block quadruple. Errors if the scan's answer fails the raw
/// association predicate.
pub fn oracle_locate(n: u64, i: u64, j: u64) -> Result<QueryLocation> {
    Error::check_range(i, 1, n)?;
    Error::check_range(j, i, n)?;
    let n_pad = padded_len(n);
    for k in (0..=top_level(n)).rev() {
        let bs = 1u64 << k;
        let n_k = n_pad >> k;
        let level = LevelInfo { k, block_size: bs, n_k };
        let contained: Vec<u64> =
            (0..n_k).filter(|&b| b * bs + 1 >= i && (b + 1) * bs <= j).collect();
        let ok = match contained.len() {
            1 => true,
            2 => contained[0] % 2 == 1 && contained[1] == contained[0] + 1,
            _ => false,
        };
        if !ok {
            continue;
        }
        // the first contained block is a middle block of exactly one quadruple
        let matches: Vec<QueryLocation> = decomposition::quadruple_list(&level)
            .iter()
            .filter(|d| d.middle_blocks()[0] == contained[0] || d.middle_blocks()[1] == contained[0])
            .filter(|d| covers_and_witnesses(d, i, j))
            .map(|d| QueryLocation { k, offset: d.offset })
            .collect();
        if matches.len() != 1 {
            return Err(Error::invalid(format!(
                "association not unique for n={n} [{i},{j}] at level {k}: {} matches",
                matches.len()
            )));
        }
        return Ok(matches[0]);
    }
    let fallback = QueryLocation { k: top_level(n), offset: 0 };
    if !covers_and_witnesses(&fallback.quadruple(n), i, j) {
        return Err(Error::invalid(format!(
            "no quadruple witnesses n={n} [{i},{j}]"
        )));
    }
    Ok(fallback)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::locate;

    #[test]
    fn majority_examples() {
        let ans = oracle_majorities(&[1, 2, 1], 1, 2, 1, 3).unwrap();
        assert_eq!(ans.entries, vec![OracleEntry { value: 1, first_pos: 1, count: 2 }]);

        let ans = oracle_majorities(&[1, 1, 2, 2, 3], 1, 3, 1, 5).unwrap();
        assert_eq!(
            ans.entries.iter().map(|e| e.value).collect::<Vec<_>>(),
            vec![1, 2]
        );

        let a = [9u64, 8, 7, 6];
        for i in 1..=4 {
            let ans = oracle_majorities(&a, 1, 1, i, i).unwrap();
            assert_eq!(ans.entries.len(), 1);
            assert_eq!(ans.entries[0].value, a[i as usize - 1]);
        }

        assert!(oracle_majorities(&a, 1, 2, 0, 2).is_err());
        assert!(oracle_majorities(&a, 1, 2, 3, 2).is_err());
    }

    #[test]
    fn majority_self_consistency() {
        let a: Vec<u64> = (0..50).map(|i| i * 7 % 4 + 1).collect();
        for (p, q) in [(1u64, 2u64), (1, 3), (2, 7)] {
            for i in 1..=a.len() as u64 {
                for j in i..=a.len() as u64 {
                    let ans = oracle_majorities(&a, p, q, i, j).unwrap();
                    let total: u64 = ans.entries.iter().map(|e| e.count).sum();
                    assert!(total <= j - i + 1);
                    assert!(ans.entries.len() as u64 <= q / p);
                    assert!(ans
                        .entries
                        .windows(2)
                        .all(|w| w[0].first_pos < w[1].first_pos));
                    for e in &ans.entries {
                        assert!(e.count * q >= p * (j - i + 1));
                        assert_eq!(a[e.first_pos as usize - 1], e.value);
                    }
                }
            }
        }
    }

    #[test]
    fn locate_examples() {
        let loc = oracle_locate(16, 5, 12).unwrap();
        assert_eq!((loc.k, loc.offset), (2, 0));
        assert_eq!(oracle_locate(16, 1, 16).unwrap().k, 2);
        for i in 1..=8u64 {
            for j in i..=8 {
                oracle_locate(8, i, j).unwrap();
            }
        }
    }

    #[test]
    fn locate_agrees_with_constant_time_rule() {
        for n in [1u64, 2, 4, 5, 8, 13, 16, 31, 32, 64, 100, 256] {
            for i in 1..=n {
                for j in i..=n {
                    let fast = locate(n, i, j).unwrap();
                    let slow = oracle_locate(n, i, j).unwrap();
                    assert_eq!(fast, slow, "n={n} [{i},{j}]");
                    // and both satisfy the raw association predicate
                    assert!(
                        raw_quadruple_matches(n, i, j).contains(&fast),
                        "n={n} [{i},{j}] {fast:?}"
                    );
                }
            }
        }
    }
}
