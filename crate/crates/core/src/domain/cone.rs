//! The dominance cone `{ν ∈ ℤⁿ : ν_1 + ... + ν_k ≥ 0}` graded by
//! `<ν, ρ>`, ρ = (n, ..., 1).
//!
//! Writing `s_k = ν_1 + ... + ν_k`, the level is `s_1 + ... + s_n`, so the
//! vectors of level m correspond to weak compositions of m into n parts.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::roots::RootData;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConeVector {
    entries: Vec<i32>,
    partial_sums: Vec<u32>,
    level: u32,
    norm2: i64,
}

impl ConeVector {
    /// Returns `None` when `entries` is not dominant.
    pub fn new(entries: Vec<i32>) -> Option<Self> {
        let mut partial_sums = Vec::with_capacity(entries.len());
        let mut s = 0i64;
        for &v in &entries {
            s += v as i64;
            if s < 0 {
                return None;
            }
            partial_sums.push(s as u32);
        }
        let level = partial_sums.iter().sum();
        let norm2 = entries.iter().map(|&v| (v as i64) * (v as i64)).sum();
        Some(ConeVector { entries, partial_sums, level, norm2 })
    }

    fn from_partial_sums(partial_sums: Vec<u32>) -> Self {
        let mut prev = 0i64;
        let entries: Vec<i32> = partial_sums
            .iter()
            .map(|&s| {
                let v = s as i64 - prev;
                prev = s as i64;
                v as i32
            })
            .collect();
        let level = partial_sums.iter().sum();
        let norm2 = entries.iter().map(|&v| (v as i64) * (v as i64)).sum();
        ConeVector { entries, partial_sums, level, norm2 }
    }

    pub fn entries(&self) -> &[i32] {
        &self.entries
    }

    pub fn partial_sums(&self) -> &[u32] {
        &self.partial_sums
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `<ν, ν>`.
    pub fn norm2(&self) -> i64 {
        self.norm2
    }

    pub fn is_zero(&self) -> bool {
        self.level == 0
    }
}

fn compositions(n: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<ConeVector>) {
    if prefix.len() == n - 1 {
        prefix.push(m);
        out.push(ConeVector::from_partial_sums(prefix.clone()));
        prefix.pop();
        return;
    }
    for s in 0..=m {
        prefix.push(s);
        compositions(n, m - s, prefix, out);
        prefix.pop();
    }
}

/// All dominant vectors of level `m`, lexicographically ordered.
pub fn cone_level(n: usize, m: u32) -> Vec<ConeVector> {
    assert!(n >= 1, "dimension must be positive");
    let mut out = Vec::new();
    compositions(n, m, &mut Vec::with_capacity(n), &mut out);
    out.sort_by(|a, b| a.entries.cmp(&b.entries));
    out
}

/// Level m ↦ dominant vectors of level m, for `0 ≤ m ≤ max_level`.
pub fn cone_enumerate(n: usize, max_level: u32) -> Vec<Vec<ConeVector>> {
    (0..=max_level).map(|m| cone_level(n, m)).collect()
}

/// `C(n + m - 1, m)`, the number of dominant vectors of level m.
pub fn level_count(n: usize, m: u32) -> u64 {
    let mut c = 1u64;
    for i in 1..=m as u64 {
        c = c * (n as u64 - 1 + i) / i;
    }
    c
}

/// A predecessor `ν - l α` of a cone vector inside the cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    /// Index into the relevant root list.
    pub root: usize,
    /// Multiplicity `l` (always 1 for the Toda set).
    pub mult: u32,
    /// Index of `ν - l α` in [`Cone::vectors`].
    pub pred: usize,
}

/// The flattened cone up to a maximal level, with recurrence links.
#[derive(Debug)]
pub struct Cone {
    n: usize,
    max_level: u32,
    vectors: Vec<ConeVector>,
    level_start: Vec<usize>,
    index: HashMap<Vec<i32>, usize>,
    roots: RootData,
    toda_links: Vec<Vec<Link>>,
    cs_links: OnceLock<Vec<Vec<Link>>>,
}

impl Cone {
    pub fn build(n: usize, max_level: u32) -> Self {
        let roots = RootData::new(n);
        let mut vectors = Vec::new();
        let mut level_start = Vec::with_capacity(max_level as usize + 2);
        for m in 0..=max_level {
            level_start.push(vectors.len());
            vectors.extend(cone_level(n, m));
        }
        level_start.push(vectors.len());
        let index: HashMap<Vec<i32>, usize> = vectors.iter().enumerate().map(|(i, v)| (v.entries.clone(), i)).collect();
        let toda_links = vectors
            .iter()
            .map(|v| {
                roots
                    .toda
                    .iter()
                    .enumerate()
                    .filter_map(|(r, alpha)| {
                        let pred: Vec<i32> = v.entries.iter().zip(&alpha.vector).map(|(a, b)| a - b).collect();
                        index.get(&pred).map(|&p| Link { root: r, mult: 1, pred: p })
                    })
                    .collect()
            })
            .collect();
        Cone { n, max_level, vectors, level_start, index, roots, toda_links, cs_links: OnceLock::new() }
    }

    /// Shared cone for rank `n` covering at least `max_level`.
    pub fn shared(n: usize, max_level: u32) -> Arc<Cone> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Cone>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(c) = guard.get(&n) {
            if c.max_level >= max_level {
                return Arc::clone(c);
            }
        }
        let cone = Arc::new(Cone::build(n, max_level));
        guard.insert(n, Arc::clone(&cone));
        cone
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn roots(&self) -> &RootData {
        &self.roots
    }

    pub fn vectors(&self) -> &[ConeVector] {
        &self.vectors
    }

    /// Index range of the vectors of level `m`.
    pub fn level_range(&self, m: u32) -> std::ops::Range<usize> {
        let m = m as usize;
        self.level_start[m]..self.level_start[m + 1]
    }

    /// Number of vectors with level at most `m`.
    pub fn count_through(&self, m: u32) -> usize {
        self.level_start[m as usize + 1]
    }

    pub fn position(&self, nu: &[i32]) -> Option<usize> {
        self.index.get(nu).copied()
    }

    /// Predecessors `ν - α`, α in the Toda set, that lie in the cone.
    pub fn toda_links(&self, i: usize) -> &[Link] {
        &self.toda_links[i]
    }

    /// Predecessors `ν - l α`, α ∈ R₊, l ≥ 1, that lie in the cone.
    pub fn cs_links(&self, i: usize) -> &[Link] {
        &self.cs_links.get_or_init(|| self.build_cs_links())[i]
    }

    fn build_cs_links(&self) -> Vec<Vec<Link>> {
        self.vectors
            .iter()
            .map(|v| {
                let mut links = Vec::new();
                for (r, alpha) in self.roots.positive.iter().enumerate() {
                    let mut l = 1u32;
                    // every positive root has nonnegative partial sums, so
                    // ν - lα leaves the cone for good once it leaves it
                    while l * alpha.height <= v.level {
                        let pred: Vec<i32> =
                            v.entries.iter().zip(&alpha.vector).map(|(a, b)| a - l as i32 * b).collect();
                        match self.index.get(&pred) {
                            Some(&p) => links.push(Link { root: r, mult: l, pred: p }),
                            None => break,
                        }
                        l += 1;
                    }
                }
                links
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_two_in_rank_two() {
        let level: Vec<Vec<i32>> = cone_level(2, 2).iter().map(|v| v.entries.clone()).collect();
        assert_eq!(level, vec![vec![0, 2], vec![1, 0], vec![2, -2]]);
    }

    #[test]
    fn level_zero_is_the_origin() {
        for n in 1..=4 {
            let l = cone_level(n, 0);
            assert_eq!(l.len(), 1);
            assert!(l[0].is_zero());
        }
    }

    #[test]
    fn counts_match_exhaustive_scan() {
        // brute force over a box that contains every dominant vector of level <= 6
        for n in 1..=3usize {
            let mut counts = [0u64; 7];
            let span = 13i32;
            let total = (2 * span + 1).pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let nu: Vec<i32> = (0..n)
                    .map(|_| {
                        let d = c % (2 * span + 1) - span;
                        c /= 2 * span + 1;
                        d
                    })
                    .collect();
                if let Some(v) = ConeVector::new(nu) {
                    if v.level <= 6 {
                        counts[v.level as usize] += 1;
                    }
                }
            }
            for m in 0..=6u32 {
                assert_eq!(counts[m as usize], level_count(n, m), "n={n} m={m}");
                assert_eq!(cone_level(n, m).len() as u64, level_count(n, m));
            }
        }
    }

    #[test]
    fn non_dominant_vectors_are_rejected() {
        assert!(ConeVector::new(vec![-1, 2]).is_none());
        assert!(ConeVector::new(vec![1, -2]).is_none());
        assert_eq!(ConeVector::new(vec![2, -1]).unwrap().level(), 3);
    }

    #[test]
    fn cone_links_point_one_level_down() {
        let cone = Cone::build(3, 8);
        for (i, v) in cone.vectors().iter().enumerate() {
            for link in cone.toda_links(i) {
                let pred = &cone.vectors()[link.pred];
                let h = cone.roots().toda[link.root].height;
                assert_eq!(pred.level + h, v.level);
            }
            for link in cone.cs_links(i) {
                let pred = &cone.vectors()[link.pred];
                let h = cone.roots().positive[link.root].height;
                assert_eq!(pred.level + link.mult * h, v.level);
            }
        }
        let i = cone.position(&[0, 0, 2]).unwrap();
        assert_eq!(cone.toda_links(i).len(), 2);
    }

    #[test]
    fn shared_cone_grows() {
        let small = Cone::shared(2, 3);
        assert!(small.max_level() >= 3);
        let big = Cone::shared(2, 11);
        assert!(big.max_level() >= 11);
        assert_eq!(big.count_through(3), small.count_through(3));
    }
}
