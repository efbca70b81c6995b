use std::collections::{HashMap, HashSet};

use bienayme::foata::{count_sd, ff_decode, ff_encode, for_each_word, sample_tree_with_degrees};
use bienayme::paths::{all_excursions, decode, encode, vervaat};
use bienayme::rng::{mix, stream};
use bienayme::sample::{enumerate_conditional, sample_tn_exact};
use bienayme::stats::{chi_square_uniform, tv_distance};
use bienayme::{DegreeSequence, LatticePath, OffspringDist, Order, PlaneTree};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s += &format!(
                "{} {}: {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        s
    }
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

pub const SUITES: [&str; 3] = ["bijections", "oracle-tv", "width-not-fat"];

pub fn run(suite: &str, reps: u64, seed: u64) -> anyhow::Result<SuiteReport> {
    let checks = match suite {
        "bijections" => bijections(reps, seed)?,
        "oracle-tv" => oracle_tv(reps, seed)?,
        "width-not-fat" => width_not_fat(reps, seed)?,
        _ => {
            return crate::config_err(format!(
                "unknown suite {suite:?}; expected one of {SUITES:?}"
            ))
        }
    };
    Ok(SuiteReport {
        suite: suite.into(),
        checks,
    })
}

fn catalan(k: u64) -> u64 {
    (0..k).fold(1u64, |c, i| c * 2 * (2 * i + 1) / (i + 2))
}

pub fn figure1() -> anyhow::Result<Check> {
    let bridge = LatticePath::new(vec![0, -1, -2, -3, -1, -1, 0, -1, -2, -3, -1])?;
    let (exc, m) = vervaat(&bridge)?;
    let want = [0, 2, 2, 3, 2, 1, 0, 2, 1, 0, -1];
    let tree = decode(&exc, Order::Bfs)?;
    let degrees = [3, 1, 2, 0, 0, 0, 3, 0, 0, 0];
    let pass = exc.values() == want && m == 3 && tree.child_counts() == degrees;
    Ok(check(
        "figure-1 vervaat",
        pass,
        format!("m = {m}, excursion {:?}", exc.values()),
    ))
}

/// Every excursion of length n ≤ `n_max` decodes and re-encodes to itself in
/// both orders, the trees are distinct, and there are Catalan(n − 1) of them.
pub fn codec_round_trip(n_max: usize) -> anyhow::Result<Check> {
    let mut total = 0usize;
    for n in 1..=n_max {
        let paths = all_excursions(n);
        if paths.len() as u64 != catalan(n as u64 - 1) {
            return Ok(check(
                "codec round trip",
                false,
                format!("n = {n}: {} excursions", paths.len()),
            ));
        }
        for order in [Order::Lex, Order::Bfs] {
            let mut seen = HashSet::new();
            for p in &paths {
                let t = decode(p, order)?;
                if encode(&t, order) != *p || !seen.insert(t.child_counts().to_vec()) {
                    return Ok(check(
                        "codec round trip",
                        false,
                        format!("n = {n}, {order:?}: {:?}", p.values()),
                    ));
                }
                total += 1;
            }
        }
    }
    Ok(check(
        "codec round trip",
        true,
        format!("{total} trees, n ≤ {n_max}, both orders"),
    ))
}

/// Each bridge in the cyclic class of an excursion rotates back to it, and
/// the n rotations are distinct.
pub fn cycle_lemma(n_max: usize) -> anyhow::Result<Check> {
    for n in 1..=n_max {
        for p in all_excursions(n) {
            let inc = p.increments();
            let mut rotations = HashSet::new();
            for r in 0..n {
                let rot: Vec<i64> = inc[r..].iter().chain(&inc[..r]).copied().collect();
                let bridge = LatticePath::from_increments(&rot)?;
                if vervaat(&bridge)?.0 != p {
                    return Ok(check(
                        "cycle lemma",
                        false,
                        format!("rotation {r} of {:?}", p.values()),
                    ));
                }
                rotations.insert(rot);
            }
            if rotations.len() != n {
                return Ok(check(
                    "cycle lemma",
                    false,
                    format!("{:?} has {} rotations", p.values(), rotations.len()),
                ));
            }
        }
    }
    Ok(check(
        "cycle lemma",
        true,
        format!("n ≤ {n_max}: every class has n bridges"),
    ))
}

/// Compressed degree sequences of length n: nonincreasing is not required,
/// only nonzero entries first, summing to n − 1.
pub fn compressed_sequences(n: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            if cur.len() < n {
                let mut d = cur.clone();
                d.resize(n, 0);
                out.push(d);
            }
            return;
        }
        if cur.len() + 1 >= n {
            return;
        }
        for v in 1..=left {
            cur.push(v);
            rec(n, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n as u32 - 1, &mut Vec::new(), &mut out);
    out
}

pub fn foata_round_trip(n_max: usize) -> anyhow::Result<Check> {
    let mut classes = 0;
    let mut words = 0u128;
    for n in 2..=n_max {
        for d in compressed_sequences(n) {
            let d = DegreeSequence::new(d)?;
            let mut fail = None;
            let mut trees = HashSet::new();
            for_each_word(&d, |w| {
                if fail.is_some() {
                    return;
                }
                match ff_decode(w, &d) {
                    Ok(t) => {
                        let back = ff_encode(&t);
                        if t.degrees() != d.as_slice()
                            || back.as_ref().ok() != Some(w)
                            || !trees.insert(t.edges())
                        {
                            fail = Some(format!("d = {:?}, word {:?}", d.as_slice(), w.v));
                        }
                    }
                    Err(e) => fail = Some(format!("d = {:?}: {e}", d.as_slice())),
                }
            });
            if let Some(f) = fail {
                return Ok(check("foata-fuchs round trip", false, f));
            }
            let size = count_sd(&d)?;
            if trees.len() as u128 != size {
                return Ok(check(
                    "foata-fuchs round trip",
                    false,
                    format!("d = {:?}: {} trees", d.as_slice(), trees.len()),
                ));
            }
            classes += 1;
            words += size;
        }
    }
    Ok(check(
        "foata-fuchs round trip",
        true,
        format!("{classes} sequences, {words} words, n ≤ {n_max}"),
    ))
}

/// |S_(1,3,2,0,0,0,0)| = 60 and the uniform sampler is not rejected at
/// α = 1e−6 over `draws` draws.
pub fn foata_uniform(draws: u64, seed: u64) -> anyhow::Result<Vec<Check>> {
    let d = DegreeSequence::new(vec![1, 3, 2, 0, 0, 0, 0])?;
    let size = count_sd(&d)?;
    let mut rng = stream(mix(seed, 7), 0);
    let mut counts: HashMap<Vec<(u32, u32)>, u64> = HashMap::new();
    for _ in 0..draws {
        *counts
            .entry(sample_tree_with_degrees(&d, &mut rng).edges())
            .or_insert(0) += 1;
    }
    let (stat, p) = chi_square_uniform(&counts, size as usize);
    Ok(vec![
        check(
            "|S_d| for d = (1,3,2,0,0,0,0)",
            size == 60,
            format!("{size}"),
        ),
        check(
            "foata-fuchs sampler uniform",
            p > 1e-6 && counts.len() as u128 == size,
            format!("χ² = {stat:.2}, p = {p:.3e}, {} classes seen", counts.len()),
        ),
    ])
}

fn bijections(reps: u64, seed: u64) -> anyhow::Result<Vec<Check>> {
    let mut out = vec![
        figure1()?,
        codec_round_trip(10)?,
        cycle_lemma(8)?,
        foata_round_trip(7)?,
    ];
    out.extend(foata_uniform(reps, seed)?);
    Ok(out)
}

/// Empirical law of the exact sampler against the enumeration oracle.
pub fn oracle_pair(d: &OffspringDist, n: usize, draws: u64, key: u64) -> anyhow::Result<f64> {
    let exact: HashMap<Vec<u32>, f64> = enumerate_conditional(d, n)?
        .into_iter()
        .map(|(t, p)| (t.child_counts().to_vec(), p))
        .collect();
    let counts = sample_counts(d, n, draws, key)?;
    Ok(tv_distance(&counts, &exact))
}

/// Tree-shape counts over `draws` exact draws, split over rayon in chunks
/// with their own streams.
pub fn sample_counts(
    d: &OffspringDist,
    n: usize,
    draws: u64,
    key: u64,
) -> anyhow::Result<HashMap<Vec<u32>, u64>> {
    const CHUNK: u64 = 10_000;
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<anyhow::Result<HashMap<Vec<u32>, u64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(key, c);
            let mut m = HashMap::new();
            for _ in 0..CHUNK.min(draws - c * CHUNK) {
                let t = sample_tn_exact(d, n, &mut rng, 1 << 32)?.tree;
                *m.entry(t.child_counts().to_vec()).or_insert(0) += 1;
            }
            Ok(m)
        })
        .collect();
    let mut total = HashMap::new();
    for p in parts {
        for (k, v) in p? {
            *total.entry(k).or_insert(0) += v;
        }
    }
    Ok(total)
}

fn oracle_tv(reps: u64, seed: u64) -> anyhow::Result<Vec<Check>> {
    let laws = [
        ("geometric", OffspringDist::geometric()),
        (
            "tabulated[0.5,0,0.5]",
            OffspringDist::tabulated(&[0.5, 0.0, 0.5])?,
        ),
    ];
    let mut out = Vec::new();
    for (i, (name, d)) in laws.iter().enumerate() {
        for n in 3..=8usize {
            if !d.is_feasible(n) {
                continue;
            }
            let key = mix(mix(seed, i as u64), n as u64);
            let tv = oracle_pair(d, n, reps, key)?;
            out.push(check(
                format!("{name} n = {n}"),
                tv < 0.02,
                format!("TV = {tv:.4}"),
            ));
        }
    }
    // geometric T_n is uniform over the Catalan(n − 1) plane trees
    for n in 3..=8usize {
        let uniform: HashMap<Vec<u32>, f64> = all_excursions(n)
            .iter()
            .map(|p| decode(p, Order::Bfs).map(|t: PlaneTree| t.child_counts().to_vec()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|k| (k, 1.0 / catalan(n as u64 - 1) as f64))
            .collect();
        let counts = sample_counts(&laws[0].1, n, reps, mix(mix(seed, 99), n as u64))?;
        let tv = tv_distance(&counts, &uniform);
        out.push(check(
            format!("geometric uniform n = {n}"),
            tv < 0.02,
            format!("TV = {tv:.4}"),
        ));
    }
    Ok(out)
}

pub const WIDTH_SIZES: [u64; 3] = [64, 256, 1024];

/// Empirical P(Width(T_n) ≥ n/4) for geometric.
pub fn fat_width_frequency(n: u64, reps: u64, seed: u64) -> anyhow::Result<f64> {
    let d = OffspringDist::geometric();
    let key = mix(seed, n);
    let hits: anyhow::Result<Vec<bool>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let t = sample_tn_exact(&d, n as usize, &mut stream(key, r), 1 << 32)?.tree;
            Ok(4 * t.width() as u64 >= n)
        })
        .collect();
    Ok(hits?.iter().filter(|&&h| h).count() as f64 / reps as f64)
}

fn width_not_fat(reps: u64, seed: u64) -> anyhow::Result<Vec<Check>> {
    let freq: Vec<f64> = WIDTH_SIZES
        .iter()
        .map(|&n| fat_width_frequency(n, reps, seed))
        .collect::<anyhow::Result<_>>()?;
    let pass = freq.windows(2).all(|w| w[1] <= w[0]) && freq[2] < freq[0];
    Ok(vec![check(
        "geometric P(Width ≥ n/4) decreasing over n = 64, 256, 1024",
        pass,
        format!("{freq:?}"),
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_numbers() {
        let c: Vec<u64> = (0..10).map(catalan).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862]);
    }

    #[test]
    fn compressed_counts() {
        // compositions of n − 1 into at most n − 1 parts
        let counts: Vec<usize> = (2..=6).map(|n| compressed_sequences(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 8, 16]);
        assert!(compressed_sequences(7).contains(&vec![1, 3, 2, 0, 0, 0, 0]));
    }

    #[test]
    fn small_suites_pass() {
        assert!(figure1().unwrap().pass);
        assert!(codec_round_trip(7).unwrap().pass);
        assert!(cycle_lemma(6).unwrap().pass);
        assert!(foata_round_trip(5).unwrap().pass);
        assert!(run("nope", 1, 0).is_err());
    }
}
