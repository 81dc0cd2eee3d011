//! Adversarial constructions exercising the encoding as a black box.
//!
//! Two reductions: a bad string whose permutation payload can be recovered
//! through (1/k)-majority decision queries alone, pinning the information
//! the structure must retain; and a set-intersection instance whose pair
//! queries translate to 1/(2X)-majority decision queries.

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Symbols `alpha_1..alpha_k` are encoded as `1..=k`; every dummy gets a
/// fresh id above the live alphabet so it occurs exactly once.
#[derive(Debug, Clone)]
pub struct BadString {
    pub k: u64,
    pub m: u64,
    pub symbols: Vec<u64>,
    /// `landmark_l[i-1][x-1]` = position of the x-th-from-the-right
    /// occurrence of `alpha_i` inside gadget `G(k, i)`.
    pub landmark_l: Vec<Vec<u64>>,
    /// `landmark_r[j-1][x-1]` = position of the x-th symbol of permutation
    /// `pi_j`, left to right.
    pub landmark_r: Vec<Vec<u64>>,
}

/// `G(k, i)`: a full-length run of every symbol except `alpha_i`, then k
/// occurrences of `alpha_i` diluted by dummies so that every other symbol
/// has density exactly 1/k over the whole gadget. Dummy ids start at
/// `*next_dummy` and advance it.
fn gadget_into(k: u64, i: u64, next_dummy: &mut u64, out: &mut Vec<u64>) {
    let kp = k * k - k + 2;
    for j in 1..=k {
        if j != i {
            out.extend(std::iter::repeat(j).take(kp as usize));
        }
    }
    for _ in 0..k - 1 {
        out.push(i);
        for _ in 0..k - 2 {
            out.push(*next_dummy);
            *next_dummy += 1;
        }
    }
    out.push(i);
    for _ in 0..k {
        out.push(*next_dummy);
        *next_dummy += 1;
    }
}

/// Standalone gadget; dummies are fresh relative to the `k`-symbol alphabet.
pub fn gadget(k: u64, i: u64) -> Result<Vec<u64>> {
    if k < 2 {
        return Err(Error::invalid("gadget needs k >= 2"));
    }
    Error::check_range(i, 1, k)?;
    let mut out = Vec::new();
    let mut dummy = k + 1;
    gadget_into(k, i, &mut dummy, &mut out);
    debug_assert_eq!(out.len() as u64, k * (k * k - k + 2));
    Ok(out)
}

/// Padding `G(k,k) ... G(k,1)` followed by the permutations, with landmark
/// tables recorded as the array is laid out.
pub fn bad_array(k: u64, perms: &[Vec<u64>]) -> Result<BadString> {
    if k < 2 {
        return Err(Error::invalid("bad string needs k >= 2"));
    }
    let m = perms.len() as u64;
    for p in perms {
        let mut seen = vec![false; k as usize];
        if p.len() as u64 != k {
            return Err(Error::invalid("permutation has wrong length"));
        }
        for &s in p {
            if s < 1 || s > k || seen[s as usize - 1] {
                return Err(Error::invalid("not a permutation of the alphabet"));
            }
            seen[s as usize - 1] = true;
        }
    }
    let mut symbols = Vec::new();
    let mut dummy = k + 1;
    let mut landmark_l = vec![Vec::new(); k as usize];
    for i in (1..=k).rev() {
        let base = symbols.len() as u64;
        let start = symbols.len();
        gadget_into(k, i, &mut dummy, &mut symbols);
        let mut occ: Vec<u64> = symbols[start..]
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == i)
            .map(|(off, _)| base + off as u64 + 1)
            .collect();
        occ.reverse(); // subscript 1 is the rightmost occurrence
        landmark_l[i as usize - 1] = occ;
    }
    let mut landmark_r = Vec::with_capacity(perms.len());
    for p in perms {
        let base = symbols.len() as u64;
        landmark_r.push((1..=k).map(|x| base + x).collect());
        symbols.extend_from_slice(p);
    }
    debug_assert_eq!(symbols.len() as u64, k * k * (k * k - k + 2) + m * k);
    Ok(BadString { k, m, symbols, landmark_l, landmark_r })
}

/// Recover every permutation using only (1/k)-majority decision queries on
/// the bad string: for each symbol, probe its gadget landmark against the
/// permutation positions left to right and stop at the first YES, which can
/// only fire where the permutation holds that symbol. Returns the
/// permutations and the number of queries issued.
pub fn recover<F>(mut decide: F, bad: &BadString) -> Result<(Vec<Vec<u64>>, u64)>
where
    F: FnMut(u64, u64) -> Result<bool>,
{
    let k = bad.k;
    let mut queries = 0;
    let mut perms = Vec::with_capacity(bad.m as usize);
    for j in 0..bad.m as usize {
        let mut perm = vec![0u64; k as usize];
        for i in 1..=k {
            let mut found = false;
            for x in 1..=k as usize {
                queries += 1;
                let l = bad.landmark_l[i as usize - 1][x - 1];
                let r = bad.landmark_r[j][x - 1];
                if decide(l, r)? {
                    perm[x - 1] = i;
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::invalid(format!(
                    "no YES for symbol {i} in permutation {}",
                    j + 1
                )));
            }
        }
        perms.push(perm);
    }
    Ok((perms, queries))
}

/// Exact occurrence density of `alpha` in `a[x..=y]`.
pub fn density(a: &[u64], x: u64, y: u64, alpha: u64) -> Result<Ratio<u64>> {
    Error::check_range(x, 1, a.len() as u64)?;
    Error::check_range(y, x, a.len() as u64)?;
    let f = a[x as usize - 1..y as usize]
        .iter()
        .filter(|&&s| s == alpha)
        .count() as u64;
    Ok(Ratio::new(f, y - x + 1))
}

/// Set-intersection instance over universe `[1, X]`, laid out as the set
/// blocks, a dummy block between every two, two dummy blocks at the center,
/// and the reversed blocks in the same set order: the blocks strictly
/// between `B_i` and reversed `B_j` then hold every universe element exactly
/// `t = n - i + j - 1` times alongside `t + 2` dummy blocks, which makes an
/// element a 1/(2X)-majority of the pair query iff both sets contain it.
#[derive(Debug, Clone)]
pub struct SetIntersectionInstance {
    pub n: u64,
    pub x: u64,
    pub sets: Vec<Vec<u64>>,
    pub symbols: Vec<u64>,
}

pub fn si_build(sets: &[Vec<u64>], x: u64) -> Result<SetIntersectionInstance> {
    if sets.is_empty() || x == 0 {
        return Err(Error::invalid("need at least one set and a universe"));
    }
    let mut norm = Vec::with_capacity(sets.len());
    for s in sets {
        let mut s: Vec<u64> = s.clone();
        s.sort_unstable();
        s.dedup();
        if s.iter().any(|&e| e < 1 || e > x) {
            return Err(Error::invalid("set element outside the universe"));
        }
        norm.push(s);
    }
    let n = norm.len() as u64;
    let mut symbols = Vec::with_capacity((4 * n * x) as usize);
    let mut dummy = x + 1;
    let mut push_dummies = |symbols: &mut Vec<u64>| {
        for _ in 0..x {
            symbols.push(dummy);
            dummy += 1;
        }
    };
    let block = |s: &[u64]| -> Vec<u64> {
        // non-members in ascending order, then members
        let mut b: Vec<u64> = (1..=x).filter(|e| !s.contains(e)).collect();
        b.extend_from_slice(s);
        b
    };
    for (idx, s) in norm.iter().enumerate() {
        if idx > 0 {
            push_dummies(&mut symbols);
        }
        symbols.extend(block(s));
    }
    push_dummies(&mut symbols);
    push_dummies(&mut symbols);
    for (idx, s) in norm.iter().enumerate() {
        if idx > 0 {
            push_dummies(&mut symbols);
        }
        let mut b = block(s);
        b.reverse();
        symbols.extend(b);
    }
    debug_assert_eq!(symbols.len() as u64, 4 * n * x);
    Ok(SetIntersectionInstance { n, x, sets: norm, symbols })
}

impl SetIntersectionInstance {
    /// Query range for the pair `(i, j)`: from the first member of `S_i` in
    /// its forward block to the last member of `S_j` in its reversed block.
    pub fn query_range(&self, i: u64, j: u64) -> Result<(u64, u64)> {
        Error::check_range(i, 1, self.n)?;
        Error::check_range(j, i + 1, self.n)?;
        let (si, sj) = (
            self.sets[i as usize - 1].len() as u64,
            self.sets[j as usize - 1].len() as u64,
        );
        if si == 0 || sj == 0 {
            return Err(Error::invalid("query range undefined for an empty set"));
        }
        let lo = 2 * (i - 1) * self.x + (self.x - si) + 1;
        let hi = (2 * self.n + 1 + 2 * (j - 1)) * self.x + sj;
        Ok((lo, hi))
    }

    /// Number of whole set blocks strictly between the pair's endpoints.
    pub fn t(&self, i: u64, j: u64) -> u64 {
        self.n - i + j - 1
    }
}

/// Decide `S_i ∩ S_j ≠ ∅` through a 1/(2X)-majority decision query.
pub fn si_query<F>(inst: &SetIntersectionInstance, i: u64, j: u64, mut decide: F) -> Result<bool>
where
    F: FnMut(u64, u64) -> Result<bool>,
{
    let (lo, hi) = inst.query_range(i, j)?;
    decide(lo, hi)
}
