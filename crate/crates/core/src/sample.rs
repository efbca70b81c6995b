//! Samplers for unconditioned and size-conditioned trees.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dist::OffspringDist;
use crate::error::{Error, Result};
use crate::paths::{all_excursions, decode, first_argmin, Order};
use crate::rng::{seed_of, SimRng};
use crate::tree::PlaneTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerTag {
    /// rejection on S_n = −1, then the cyclic shift
    Exact,
    /// one walk of length n − 1 closed by a single jump to −1
    Tprime,
    /// exact degree multiset from a small atom enumeration
    ExactMultiset,
}

impl SamplerTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplerTag::Exact => "exact",
            SamplerTag::Tprime => "tprime",
            SamplerTag::ExactMultiset => "exact-multiset",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub tree: PlaneTree,
    /// walks drawn, the accepted one included
    pub tries: u64,
    pub sampler: SamplerTag,
    pub seed: u64,
    pub stream: u64,
    /// tprime only: the walk ended above 0 and the path tree was returned
    pub sentinel: bool,
}

impl SampleOutcome {
    fn new(tree: PlaneTree, tries: u64, sampler: SamplerTag, rng: &SimRng, sentinel: bool) -> Self {
        SampleOutcome {
            tree,
            tries,
            sampler,
            seed: seed_of(rng),
            stream: rng.get_stream(),
            sentinel,
        }
    }
}

/// Draws Y clamped to `cap`; callers pick `cap` so that clamping cannot
/// change the outcome.
fn draw(d: &OffspringDist, rng: &mut SimRng, cap: u64) -> i64 {
    d.sample_y(rng).min(cap) as i64
}

/// An unconditioned tree, explored depth-first until the walk hits −1.
pub fn sample_t(d: &OffspringDist, rng: &mut SimRng, cap: usize) -> Result<PlaneTree> {
    if d.pmf(0) <= 0.0 {
        return Err(Error::NoLeaves);
    }
    if d.mean() > 1.0 + 1e-9 {
        return Err(Error::NotCritical { mean: d.mean() });
    }
    let mut deg = Vec::new();
    let mut s = 0i64;
    while s >= 0 {
        if deg.len() == cap {
            return Err(Error::CapExceeded { cap });
        }
        // a vertex with more children than the cap forces the walk past it
        let y = draw(d, rng, cap as u64 + 1);
        deg.push(y as u32);
        s += y - 1;
    }
    PlaneTree::from_lex_degrees(&deg)
}

fn check_conditioning(d: &OffspringDist, n: usize) -> Result<()> {
    if d.pmf(0) <= 0.0 {
        return Err(Error::NoLeaves);
    }
    if n == 0 || !d.is_feasible(n) {
        return Err(Error::InfeasibleSize {
            n,
            span: d.span().unwrap_or(0),
        });
    }
    Ok(())
}

/// Fills `deg` with the offspring counts of one accepted bridge, rotated at
/// its first minimum, in BFS order. Returns the number of walks drawn.
fn exact_degrees(
    d: &OffspringDist,
    n: usize,
    rng: &mut SimRng,
    max_tries: u64,
    deg: &mut Vec<u32>,
) -> Result<u64> {
    let mut inc: Vec<i64> = Vec::with_capacity(n);
    let mut tries = 0u64;
    'walk: loop {
        if tries == max_tries {
            return Err(Error::MaxTriesExhausted {
                tries,
                rate_bound: 3.0 / tries.max(1) as f64,
            });
        }
        tries += 1;
        inc.clear();
        let mut s = 0i64;
        for i in 0..n {
            let x = draw(d, rng, n as u64 + 1) - 1;
            s += x;
            inc.push(x);
            // each later step is ≥ −1, so S_n = −1 needs S_i ≤ n − i − 1
            if s > (n - i - 1) as i64 - 1 {
                continue 'walk;
            }
        }
        if s == -1 {
            break;
        }
    }
    let mut values = Vec::with_capacity(n + 1);
    values.push(0i64);
    let mut s = 0;
    for &x in &inc {
        s += x;
        values.push(s);
    }
    let m = first_argmin(&values);
    deg.clear();
    deg.extend((0..n).map(|i| (inc[(m + i) % n] + 1) as u32));
    Ok(tries)
}

/// A tree with exactly the law of T conditioned on n vertices.
pub fn sample_tn_exact(
    d: &OffspringDist,
    n: usize,
    rng: &mut SimRng,
    max_tries: u64,
) -> Result<SampleOutcome> {
    check_conditioning(d, n)?;
    if n == 1 {
        return Ok(SampleOutcome::new(
            PlaneTree::from_bfs_degrees(&[0])?,
            1,
            SamplerTag::Exact,
            rng,
            false,
        ));
    }
    if d.is_degenerate() {
        return Err(Error::Degenerate);
    }
    let mut deg = Vec::with_capacity(n);
    let tries = exact_degrees(d, n, rng, max_tries, &mut deg)?;
    let tree = PlaneTree::from_bfs_degrees(&deg)?;
    Ok(SampleOutcome::new(
        tree,
        tries,
        SamplerTag::Exact,
        rng,
        false,
    ))
}

/// The O(n) surrogate for heavy tails: walk n − 1 steps, then close the
/// path with one jump to −1 when S_{n−1} ≤ 0.
pub fn sample_tn_prime(d: &OffspringDist, n: usize, rng: &mut SimRng) -> Result<SampleOutcome> {
    if n == 0 {
        return Err(Error::InfeasibleSize {
            n,
            span: d.span().unwrap_or(0),
        });
    }
    let mut inc: Vec<i64> = Vec::with_capacity(n);
    let mut s = 0i64;
    for _ in 1..n {
        // a single value ≥ 2n already leaves S_{n−1} > 0
        let x = draw(d, rng, 2 * n as u64) - 1;
        s += x;
        inc.push(x);
    }
    let sentinel = s > 0;
    let deg: Vec<u32> = if sentinel {
        let mut v = vec![1u32; n];
        v[n - 1] = 0;
        v
    } else {
        inc.push(-1 - s);
        let mut values = Vec::with_capacity(n + 1);
        values.push(0i64);
        let mut t = 0;
        for &x in &inc {
            t += x;
            values.push(t);
        }
        let m = first_argmin(&values);
        (0..n).map(|i| (inc[(m + i) % n] + 1) as u32).collect()
    };
    let tree = PlaneTree::from_bfs_degrees(&deg)?;
    Ok(SampleOutcome::new(
        tree,
        1,
        SamplerTag::Tprime,
        rng,
        sentinel,
    ))
}

/// Degrees of T_n as a multiset, sorted in decreasing order.
pub fn sample_degrees(
    d: &OffspringDist,
    n: usize,
    rng: &mut SimRng,
    max_tries: u64,
) -> Result<Vec<u32>> {
    check_conditioning(d, n)?;
    let mut deg = Vec::with_capacity(n);
    if n == 1 {
        deg.push(0);
    } else {
        exact_degrees(d, n, rng, max_tries, &mut deg)?;
    }
    deg.sort_unstable_by(|a, b| b.cmp(a));
    Ok(deg)
}

/// Every plane tree with n vertices and its probability under T_n.
pub fn enumerate_conditional(d: &OffspringDist, n: usize) -> Result<Vec<(PlaneTree, f64)>> {
    if n > 12 {
        return Err(Error::TooLarge(format!(
            "enumeration needs n ≤ 12, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut total = 0.0;
    for p in all_excursions(n) {
        let w: f64 = p
            .increments()
            .iter()
            .map(|&x| d.pmf((x + 1) as u64))
            .product();
        if w > 0.0 {
            total += w;
            out.push((decode(&p, Order::Bfs)?, w));
        }
    }
    if out.is_empty() {
        return Err(Error::InfeasibleSize {
            n,
            span: d.span().unwrap_or(0),
        });
    }
    for e in &mut out {
        e.1 /= total;
    }
    Ok(out)
}

/// The exact law of the degree multiset of T_n (decreasing order).
pub fn conditional_degree_law(d: &OffspringDist, n: usize) -> Result<HashMap<Vec<u32>, f64>> {
    let mut law = HashMap::new();
    for (t, p) in enumerate_conditional(d, n)? {
        let mut k = t.child_counts().to_vec();
        k.sort_unstable_by(|a, b| b.cmp(a));
        *law.entry(k).or_insert(0.0) += p;
    }
    Ok(law)
}
