//! The Foata–Fuchs bijection between words and labeled trees with given
//! degrees, and what it buys: counting, exact uniform sampling, and exact
//! expected heights for small degree sequences.
//!
//! Labels are 1-based throughout, as in the bijection's statement.

use std::cmp::Ordering;

use rand::seq::SliceRandom;

use crate::dist::OffspringDist;
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::sample::sample_degrees;

/// d_i is the number of children of label i; Σ d_i = n − 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DegreeSequence {
    d: Vec<u32>,
}

/// A word of length n − 1 in which label i occurs d_i times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FFSequence {
    pub v: Vec<u32>,
}

/// A rooted tree on labels 1..=n; `parent[i − 1]` is 0 for the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    root: u32,
    parent: Vec<u32>,
}

impl DegreeSequence {
    pub fn new(d: Vec<u32>) -> Result<Self> {
        let sum: u64 = d.iter().map(|&x| x as u64).sum();
        if d.is_empty() || sum + 1 != d.len() as u64 {
            return Err(Error::InvalidDegrees(format!(
                "{d:?} does not sum to n − 1"
            )));
        }
        Ok(DegreeSequence { d })
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of internal vertices m.
    pub fn internal(&self) -> usize {
        self.d.iter().filter(|&&x| x > 0).count()
    }

    /// Nonzero entries all come before the zeros.
    pub fn is_compressed(&self) -> bool {
        let m = self.internal();
        self.d[..m].iter().all(|&x| x > 0)
    }

    /// The word in S_d listing every label d_i times in increasing order.
    pub fn first_word(&self) -> FFSequence {
        let mut v = Vec::with_capacity(self.d.len() - 1);
        for (i, &k) in self.d.iter().enumerate() {
            v.extend(std::iter::repeat(i as u32 + 1).take(k as usize));
        }
        FFSequence { v }
    }
}

impl FFSequence {
    pub fn contains_in(&self, d: &DegreeSequence) -> bool {
        if self.v.len() + 1 != d.len() {
            return false;
        }
        let mut count = vec![0u32; d.len()];
        for &x in &self.v {
            if x == 0 || x as usize > d.len() {
                return false;
            }
            count[x as usize - 1] += 1;
        }
        count == d.d
    }

    /// Rearranges into the next word in lexicographic order; false after
    /// the last one.
    fn advance(&mut self) -> bool {
        let v = &mut self.v;
        if v.len() < 2 {
            return false;
        }
        let mut i = v.len() - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = v.len() - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        true
    }
}

impl LabeledTree {
    pub fn new(root: u32, parent: Vec<u32>) -> Result<Self> {
        let n = parent.len() as u32;
        let bad = |m: &str| Error::InvalidDegrees(format!("not a rooted tree: {m}"));
        if root == 0 || root > n || parent[root as usize - 1] != 0 {
            return Err(bad("root"));
        }
        if parent
            .iter()
            .enumerate()
            .any(|(i, &p)| p > n || (p == 0) != (i as u32 + 1 == root))
        {
            return Err(bad("parent labels"));
        }
        let t = LabeledTree { root, parent };
        // every walk upwards must reach the root within n steps
        for v in 1..=n {
            let mut u = v;
            let mut steps = 0;
            while u != root {
                u = t.parent[u as usize - 1];
                steps += 1;
                if steps > n {
                    return Err(bad("cycle"));
                }
            }
        }
        Ok(t)
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        match self.parent[v as usize - 1] {
            0 => None,
            p => Some(p),
        }
    }

    /// (parent, child) pairs in increasing order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut e: Vec<(u32, u32)> = self
            .parent
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0)
            .map(|(i, &p)| (p, i as u32 + 1))
            .collect();
        e.sort_unstable();
        e
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.len()];
        for &p in &self.parent {
            if p != 0 {
                d[p as usize - 1] += 1;
            }
        }
        d
    }

    pub fn height(&self) -> usize {
        let n = self.len();
        let mut depth = vec![usize::MAX; n];
        depth[self.root as usize - 1] = 0;
        let mut h = 0;
        let mut stack = Vec::new();
        for v in 1..=n as u32 {
            let mut u = v;
            while depth[u as usize - 1] == usize::MAX {
                stack.push(u);
                u = self.parent[u as usize - 1];
            }
            let mut dep = depth[u as usize - 1];
            while let Some(w) = stack.pop() {
                dep += 1;
                depth[w as usize - 1] = dep;
            }
            h = h.max(depth[v as usize - 1]);
        }
        h
    }

    /// Renames label i to `map[i − 1]`.
    pub fn relabel(&self, map: &[u32]) -> LabeledTree {
        let mut parent = vec![0u32; self.len()];
        for (i, &p) in self.parent.iter().enumerate() {
            parent[map[i] as usize - 1] = if p == 0 { 0 } else { map[p as usize - 1] };
        }
        LabeledTree {
            root: map[self.root as usize - 1],
            parent,
        }
    }
}

/// Moves the nonzero degrees to the front, keeping their order. The second
/// value maps each new label i to its old label `perm[i − 1]`.
pub fn compress(d: &DegreeSequence) -> (DegreeSequence, Vec<u32>) {
    let mut perm: Vec<u32> = (1..=d.len() as u32)
        .filter(|&i| d.d[i as usize - 1] > 0)
        .collect();
    perm.extend((1..=d.len() as u32).filter(|&i| d.d[i as usize - 1] == 0));
    let c = perm.iter().map(|&i| d.d[i as usize - 1]).collect();
    (DegreeSequence { d: c }, perm)
}

/// Cuts the word at its repeats into paths P_1..P_{n−m}; path i ends at the
/// leaf m + i.
pub fn ff_decode(v: &FFSequence, d: &DegreeSequence) -> Result<LabeledTree> {
    if !d.is_compressed() {
        return Err(Error::InvalidDegrees(format!(
            "{:?} is not compressed",
            d.d
        )));
    }
    if !v.contains_in(d) {
        return Err(Error::NotInSd(format!("{:?}", v.v)));
    }
    let n = d.len();
    let m = d.internal() as u32;
    if n == 1 {
        return LabeledTree::new(1, vec![0]);
    }
    let mut parent = vec![0u32; n];
    let mut seen = vec![false; n];
    let mut leaf = m;
    let mut prev: Option<u32> = None;
    for &x in &v.v {
        if seen[x as usize - 1] {
            // a repeat closes the current path with the next leaf
            leaf += 1;
            parent[leaf as usize - 1] = prev.expect("a repeat is never first");
            prev = None;
        }
        if let Some(p) = prev {
            parent[x as usize - 1] = p;
        }
        seen[x as usize - 1] = true;
        prev = Some(x);
    }
    leaf += 1;
    parent[leaf as usize - 1] = prev.expect("nonempty word");
    LabeledTree::new(v.v[0], parent)
}

/// Inverse of [`ff_decode`]: for each leaf m + i in turn, the path from the
/// vertices already visited down to it, leaf excluded.
pub fn ff_encode(t: &LabeledTree) -> Result<FFSequence> {
    let d = DegreeSequence::new(t.degrees())?;
    if !d.is_compressed() {
        return Err(Error::InvalidDegrees(format!(
            "{:?} is not compressed",
            d.d
        )));
    }
    let n = t.len();
    let m = d.internal();
    let mut visited = vec![false; n];
    visited[t.root as usize - 1] = true;
    let mut v = Vec::with_capacity(n - 1);
    let mut up = Vec::new();
    for leaf in (m + 1..=n).map(|x| x as u32) {
        up.clear();
        let mut u = leaf;
        while !visited[u as usize - 1] {
            up.push(u);
            u = t.parent[u as usize - 1];
        }
        v.push(u);
        for &w in up.iter().rev() {
            visited[w as usize - 1] = true;
            if w != leaf {
                v.push(w);
            }
        }
    }
    if t.len() == 1 {
        v.clear();
    }
    Ok(FFSequence { v })
}

/// |S_d| = (n − 1)! / Π d_i!.
pub fn count_sd(d: &DegreeSequence) -> Result<u128> {
    let mut total = 0u128;
    let mut count = 1u128;
    for &k in &d.d {
        // multiply by C(total + k, k) one factor at a time; each partial
        // product is itself a binomial coefficient, so the division is exact
        for i in 1..=k as u128 {
            total += 1;
            count = count
                .checked_mul(total)
                .ok_or(Error::Overflow("count_sd"))?
                / i;
        }
    }
    Ok(count)
}

/// Calls `f` on every word of S_d in lexicographic order.
pub fn for_each_word(d: &DegreeSequence, mut f: impl FnMut(&FFSequence)) {
    let mut w = d.first_word();
    loop {
        f(&w);
        if !w.advance() {
            break;
        }
    }
}

/// A uniform element of T_d.
pub fn sample_tree_with_degrees(d: &DegreeSequence, rng: &mut SimRng) -> LabeledTree {
    let (c, perm) = compress(d);
    let mut w = c.first_word();
    w.v.shuffle(rng);
    ff_decode(&w, &c)
        .expect("a shuffled word stays in S_d")
        .relabel(&perm)
}

/// T_n with uniformly random labels: the degree multiset of T_n, spread
/// over the labels at random, then a uniform tree with those degrees.
pub fn hat_tn(
    d: &OffspringDist,
    n: usize,
    rng: &mut SimRng,
    max_tries: u64,
) -> Result<LabeledTree> {
    let mut deg = sample_degrees(d, n, rng, max_tries)?;
    deg.shuffle(rng);
    Ok(sample_tree_with_degrees(&DegreeSequence::new(deg)?, rng))
}

/// Some(Less) when `a` is strictly more skewed than `b` (a majorizes b, so
/// b is reached from a by moving children from larger to smaller degrees),
/// Some(Equal) when they agree up to order, None when incomparable.
pub fn skew_order(a: &DegreeSequence, b: &DegreeSequence) -> Option<Ordering> {
    if a.len() != b.len() {
        return None;
    }
    let sorted = |d: &DegreeSequence| {
        let mut v = d.d.clone();
        v.sort_unstable_by(|x, y| y.cmp(x));
        v
    };
    let (x, y) = (sorted(a), sorted(b));
    if x == y {
        return Some(Ordering::Equal);
    }
    let (mut sx, mut sy) = (0u64, 0u64);
    let (mut x_ge, mut y_ge) = (true, true);
    for (p, q) in x.iter().zip(&y) {
        sx += *p as u64;
        sy += *q as u64;
        x_ge &= sx >= sy;
        y_ge &= sy >= sx;
    }
    match (x_ge, y_ge) {
        (true, false) => Some(Ordering::Less),
        (false, true) => Some(Ordering::Greater),
        _ => None,
    }
}

/// E[H(T_d)] by walking all of S_{d'}, with d' the compressed form (the
/// relabeling does not change heights).
pub fn expected_height(d: &DegreeSequence, limit: u128) -> Result<f64> {
    let (c, _) = compress(d);
    let size = count_sd(&c)?;
    if size > limit {
        return Err(Error::TooLarge(format!("|S_d| = {size} exceeds {limit}")));
    }
    let mut total = 0u64;
    for_each_word(&c, |w| {
        total += ff_decode(w, &c).expect("word in S_d").height() as u64
    });
    Ok(total as f64 / size as f64)
}
