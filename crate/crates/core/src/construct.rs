//! A critical offspring law whose size-conditioned trees carry a vertex of
//! near-linear degree along a sequence of sizes n_k*.
//!
//! Levels carry exact rationals: with p_0 = 1/2, p_1 = p_2 = 1/8 at degrees
//! 0, 1, 2, each new level k + 1 puts mass p = δ_k / (2(n − 1)) on degree n,
//! which halves δ. Finitely many levels leave a deficit δ_K in the mean, so
//! one closing atom of mass δ_K/(n − 1) is added past the last level.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::dist::OffspringDist;
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::sample::{sample_tn_exact, sample_tn_prime, SamplerTag};
use crate::scaling::lambda_est_sparse;
use crate::stats::wilson;

/// Sizes above this are never searched.
const N_CAP: u64 = 1 << 50;

/// Growth functions f with f(n) → ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthPreset {
    /// ln ln m
    LnLn,
    /// √(ln m)
    SqrtLn,
    /// √m
    Power,
}

impl GrowthPreset {
    pub fn eval(self, m: f64) -> f64 {
        match self {
            GrowthPreset::LnLn => m.ln().ln(),
            GrowthPreset::SqrtLn => m.ln().sqrt(),
            GrowthPreset::Power => m.sqrt(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lnln" => Some(GrowthPreset::LnLn),
            "sqrtln" => Some(GrowthPreset::SqrtLn),
            "power" => Some(GrowthPreset::Power),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GrowthPreset::LnLn => "lnln",
            GrowthPreset::SqrtLn => "sqrtln",
            GrowthPreset::Power => "power",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Level {
    pub n: u64,
    #[serde(serialize_with = "ser_rational")]
    pub p: BigRational,
    /// ε_k = 1 − Σ_{i≤k} p_i
    #[serde(serialize_with = "ser_rational")]
    pub eps: BigRational,
    /// δ_k = −Σ_{i≤k} (n_i − 1) p_i
    #[serde(serialize_with = "ser_rational")]
    pub delta: BigRational,
    /// ⌈n_k / δ_{k−1}⌉
    pub n_star: Option<u64>,
    /// λ_k from the tilting root, and the enlarged value used in (ii)
    pub lambda: Option<f64>,
    pub lambda_used: Option<f64>,
    /// the condition that fixed n_k
    pub binding: Option<&'static str>,
}

fn ser_rational<S: serde::Serializer>(
    r: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructedDist {
    pub preset: GrowthPreset,
    pub levels: Vec<Level>,
    /// (degree, mass) of the atom that makes the law critical
    pub closing: (u64, f64),
    pub mu1_mass: f64,
    pub lambda_safety: &'static str,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite")
}

fn ceil_u64(r: &BigRational) -> Option<u64> {
    r.ceil().to_integer().to_u64()
}

/// λ enlarged by 10% but kept below 1.
fn enlarge(lambda: f64) -> f64 {
    (1.1 * lambda).min(0.5 * (1.0 + lambda))
}

pub fn build_short_fat(f: GrowthPreset, k_max: usize) -> Result<ConstructedDist> {
    if !(2..=8).contains(&k_max) {
        return Err(Error::OutOfDomain {
            what: "K",
            value: k_max as f64,
        });
    }
    let mut levels: Vec<Level> = Vec::new();
    let (mut eps, mut delta) = (BigRational::one(), BigRational::zero());
    let mut prev_delta = rat(1, 2);
    for (n, p) in [(0u64, rat(1, 2)), (1, rat(1, 8)), (2, rat(1, 8))] {
        eps -= &p;
        delta -= (BigRational::from_integer(BigInt::from(n)) - BigRational::one()) * &p;
        let n_star = ceil_u64(&(BigRational::from_integer(BigInt::from(n.max(1))) / &prev_delta));
        levels.push(Level {
            n,
            p,
            eps: eps.clone(),
            delta: delta.clone(),
            n_star,
            lambda: None,
            lambda_used: None,
            binding: None,
        });
        prev_delta = delta.clone();
    }
    while levels.len() <= k_max {
        let level = levels.len();
        let last = levels.last().expect("seeded");
        let (eps_k, delta_k, n_k) = (last.eps.clone(), last.delta.clone(), last.n);
        let (e, dlt) = (to_f64(&eps_k), to_f64(&delta_k));
        let head: Vec<(u64, f64)> = levels.iter().map(|l| (l.n, to_f64(&l.p))).collect();
        let lambda = lambda_est_sparse(&head, e, dlt)?;
        let lam = enlarge(lambda);

        // (i) n − 1 ≥ δ_k/ε_k
        let n_i = ceil_u64(&(&delta_k / &eps_k)).expect("small") + 1;
        // (iii) f(⌈n/δ_k⌉) > 10/δ_k, monotone in n
        let goal = 10.0 / dlt;
        let ok_iii = |n: u64| f.eval((n as f64 / dlt).ceil()) > goal;
        let n_iii = smallest_from(1, N_CAP, ok_iii).ok_or(Error::NoFeasibleLevel {
            level,
            condition: "(iii) f(⌈n/δ⌉) > 10/δ",
        })?;
        let start = (n_k + 1).max(n_i).max(n_iii);
        // (ii) λ^{n−1} < δ/(2n); the left side minus the right is unimodal
        let ok_ii = |n: u64| (n as f64 - 1.0) * lam.ln() < (dlt / (2.0 * n as f64)).ln();
        let turn = (1.0 / -lam.ln()).ceil() as u64;
        let n_next = if !ok_ii(start) && start < turn {
            (start..turn)
                .find(|&n| ok_ii(n))
                .or_else(|| smallest_from(turn, N_CAP, ok_ii))
        } else {
            smallest_from(start, N_CAP, ok_ii)
        }
        .ok_or(Error::NoFeasibleLevel {
            level,
            condition: "(ii) λ^{n−1} < δ/(2n)",
        })?;
        let binding = if n_next > start {
            "(ii) λ^{n−1} < δ/(2n)"
        } else if n_next == n_iii {
            "(iii) f(⌈n/δ⌉) > 10/δ"
        } else if n_next == n_i {
            "(i) n − 1 ≥ δ/ε"
        } else {
            "n > n_k"
        };
        let n_star = ceil_u64(&(BigRational::from_integer(BigInt::from(n_next)) / &delta_k))
            .filter(|&s| s < N_CAP)
            .ok_or(Error::NoFeasibleLevel {
                level,
                condition: "n* overflow",
            })?;
        let nm1 = BigRational::from_integer(BigInt::from(n_next - 1));
        let p = &delta_k / (BigRational::from_integer(BigInt::from(2)) * &nm1);
        let eps_next = &eps_k - &p;
        let delta_next = &delta_k - &nm1 * &p;
        debug_assert!(delta_next == &delta_k / BigRational::from_integer(BigInt::from(2)));
        levels.push(Level {
            n: n_next,
            p,
            eps: eps_next,
            delta: delta_next,
            n_star: Some(n_star),
            lambda: Some(lambda),
            lambda_used: Some(lam),
            binding: Some(binding),
        });
    }
    let last = levels.last().expect("nonempty");
    let n_close = (last.n + 1).max(ceil_u64(&(&last.delta / &last.eps)).expect("small") + 1);
    let p_close = &last.delta / BigRational::from_integer(BigInt::from(n_close - 1));
    let eps_final = &last.eps - &p_close;
    debug_assert!(!eps_final.is_negative());
    let mu1 = to_f64(&(&levels[1].p + &eps_final));
    Ok(ConstructedDist {
        preset: f,
        levels,
        closing: (n_close, to_f64(&p_close)),
        mu1_mass: mu1,
        lambda_safety: "lambda_used = min(1.1 lambda, (1 + lambda)/2)",
    })
}

/// Smallest n in [lo, hi] with `ok(n)`, for a predicate that stays true
/// once it holds.
fn smallest_from(lo: u64, hi: u64, ok: impl Fn(u64) -> bool) -> Option<u64> {
    if ok(lo) {
        return Some(lo);
    }
    let mut step = 1u64;
    let mut below = lo;
    loop {
        let probe = lo.checked_add(step)?;
        if probe > hi {
            return if ok(hi) { bisect(below, hi, &ok) } else { None };
        }
        if ok(probe) {
            return bisect(below, probe, &ok);
        }
        below = probe;
        step *= 2;
    }
}

/// ok(lo) false, ok(hi) true.
fn bisect(mut lo: u64, mut hi: u64, ok: &impl Fn(u64) -> bool) -> Option<u64> {
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

impl ConstructedDist {
    /// (degree, mass) of every atom except the one at degree 1.
    pub fn atoms(&self) -> Vec<(u64, f64)> {
        let mut v: Vec<(u64, f64)> = self
            .levels
            .iter()
            .filter(|l| l.n != 1)
            .map(|l| (l.n, to_f64(&l.p)))
            .collect();
        v.push(self.closing);
        v
    }

    pub fn to_offspring(&self) -> Result<OffspringDist> {
        OffspringDist::constructed(&self.atoms(), self.mu1_mass)
    }

    pub fn n_star(&self, level: usize) -> Option<u64> {
        self.levels.get(level).and_then(|l| l.n_star)
    }

    /// (i), (ii) and (iii) rechecked from the stored values, plus
    /// n_k ≥ n_k*/f(n_k*).
    pub fn recheck(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for w in 2..self.levels.len() - 1 {
            let (prev, cur) = (&self.levels[w], &self.levels[w + 1]);
            let (e, d) = (to_f64(&prev.eps), to_f64(&prev.delta));
            let n = cur.n as f64;
            if n - 1.0 < d / e - 1e-12 {
                bad.push(format!("level {}: (i)", w + 1));
            }
            let lam = cur.lambda_used.unwrap_or(1.0);
            if (n - 1.0) * lam.ln() >= (d / (2.0 * n)).ln() {
                bad.push(format!("level {}: (ii)", w + 1));
            }
            let s = cur.n_star.unwrap_or(0) as f64;
            if self.preset.eval(s) <= 10.0 / d {
                bad.push(format!("level {}: (iii)", w + 1));
            }
            if n < s / self.preset.eval(s) {
                bad.push(format!("level {}: n_k < n_k*/f(n_k*)", w + 1));
            }
        }
        bad
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FatnessReport {
    pub level: usize,
    pub n_k: u64,
    pub n_star: u64,
    pub reps: u64,
    pub hits: u64,
    pub frequency: f64,
    pub ci: (f64, f64),
    pub sampler: SamplerTag,
    /// exact P(Δ ≥ n_k) when the multiset law was enumerated
    pub exact: Option<f64>,
    /// the bound 1 − 1/n_k
    pub target: f64,
}

/// Empirical P(Δ ≥ n_k) at size n_k*.
pub fn verify_fatness(
    cd: &ConstructedDist,
    level: usize,
    reps: u64,
    rng: &mut SimRng,
) -> Result<FatnessReport> {
    let lv = cd.levels.get(level).ok_or(Error::OutOfDomain {
        what: "level",
        value: level as f64,
    })?;
    let n_k = lv.n;
    let n_star = lv.n_star.ok_or(Error::OutOfDomain {
        what: "level",
        value: level as f64,
    })?;
    if n_star > 10_000_000 {
        return Err(Error::TooLarge(format!(
            "n* = {n_star} exceeds the sampling budget"
        )));
    }
    let d = cd.to_offspring()?;
    let n = n_star as usize;
    let mut report = FatnessReport {
        level,
        n_k,
        n_star,
        reps,
        hits: 0,
        frequency: 0.0,
        ci: (0.0, 1.0),
        sampler: SamplerTag::ExactMultiset,
        exact: None,
        target: 1.0 - 1.0 / n_k as f64,
    };
    if let Some(law) = multiset_law(&cd.atoms(), cd.mu1_mass, n)? {
        let exact: f64 = law.iter().filter(|e| e.0 >= n_k).map(|e| e.1).sum();
        let cdf: Vec<f64> = law
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e.1;
                Some(*acc)
            })
            .collect();
        let total = *cdf.last().expect("nonempty");
        for _ in 0..reps {
            let u: f64 = rng.random::<f64>() * total;
            let i = cdf.partition_point(|&c| c <= u).min(law.len() - 1);
            if law[i].0 >= n_k {
                report.hits += 1;
            }
        }
        report.exact = Some(exact.min(1.0));
    } else {
        let exact_ok = n <= 200_000;
        for _ in 0..reps {
            let o = if exact_ok {
                sample_tn_exact(&d, n, rng, 1 << 24)?
            } else {
                sample_tn_prime(&d, n, rng)?
            };
            report.sampler = o.sampler;
            if o.tree.max_degree().0 as u64 >= n_k {
                report.hits += 1;
            }
        }
    }
    report.frequency = report.hits as f64 / reps as f64;
    report.ci = wilson(report.hits, reps);
    Ok(report)
}

/// Outer states of the multiset enumeration.
const MULTISET_CAP: usize = 5_000_000;
/// Terms this many nats below the peak are dropped.
const PRUNE_NATS: f64 = 60.0;

fn ln_fact(k: u64) -> f64 {
    statrs::function::gamma::ln_gamma(k as f64 + 1.0)
}

/// Counts of the atoms of degree ≥ 2 except the smallest one.
struct Outer {
    used: u64,
    excess: u64,
    lw: f64,
    top: u64,
}

/// Law of Δ(T_n) from the degree multiset. By the cycle lemma a multiset
/// with c_j vertices of degree v_j has probability proportional to
/// n!/Π c_j! · Π μ_{v_j}^{c_j}, and c_0 = 1 + Σ c_j (v_j − 1) is forced.
/// The count of the smallest atom of degree ≥ 2 is summed out: its log
/// weight is concave, so each inner sum is a walk away from the mode.
/// Returns (Δ, probability) pairs, or None past the enumeration budget.
fn multiset_law(atoms: &[(u64, f64)], mu1: f64, n: usize) -> Result<Option<Vec<(u64, f64)>>> {
    let mu0 = atoms.iter().find(|a| a.0 == 0).map_or(0.0, |a| a.1);
    if mu0 <= 0.0 {
        return Err(Error::ConcentratedAtZero);
    }
    let mut big: Vec<(u64, f64)> = atoms
        .iter()
        .copied()
        .filter(|a| a.0 >= 2 && a.1 > 0.0)
        .collect();
    big.sort_by_key(|a| a.0);
    let n = n as u64;
    let inner = if big.is_empty() {
        None
    } else {
        Some(big.remove(0))
    };

    let mut outer = Vec::new();
    let mut counts = vec![0u64; big.len()];
    if !enumerate_outer(0, 0, 0, 0.0, n, &big, &mut counts, &mut outer) {
        return Ok(None);
    }

    // log weight of the inner count c for a given outer state, or None when
    // the leaf and degree-one counts do not fit
    let (l0, l1) = (
        mu0.ln(),
        if mu1 > 0.0 {
            mu1.ln()
        } else {
            f64::NEG_INFINITY
        },
    );
    let term = |o: &Outer, c: u64| -> Option<f64> {
        let (step, lp) = inner.map_or((0, 0.0), |(v, p)| (v - 1, p.ln()));
        let leaves = 1 + o.excess + c * step;
        let ones = n.checked_sub(leaves + o.used + c)?;
        if ones > 0 && mu1 <= 0.0 {
            return None;
        }
        let mut w = ln_fact(n) - ln_fact(leaves) - ln_fact(ones) + leaves as f64 * l0 + o.lw;
        if ones > 0 {
            w += ones as f64 * l1;
        }
        if c > 0 {
            w += c as f64 * lp - ln_fact(c);
        }
        Some(w)
    };
    let c_max = |o: &Outer| -> u64 {
        inner.map_or(0, |(v, _)| n.saturating_sub(1 + o.excess + o.used) / v)
    };

    // pass 1: the mode of each inner sum
    let mut peaks = Vec::with_capacity(outer.len());
    for o in &outer {
        let hi = c_max(o);
        let peak = if mu1 > 0.0 {
            // the first c whose successor is no larger
            let (mut lo, mut up) = (0u64, hi);
            while lo < up {
                let mid = lo + (up - lo) / 2;
                let (a, b) = (term(o, mid), term(o, mid + 1));
                match (a, b) {
                    (Some(a), Some(b)) if b > a => lo = mid + 1,
                    _ => up = mid,
                }
            }
            lo
        } else {
            // every vertex that is not a leaf has degree ≥ 2: c is forced
            hi
        };
        peaks.push((peak, term(o, peak)));
    }
    let top = peaks
        .iter()
        .filter_map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::InfeasibleSize {
            n: n as usize,
            span: 1,
        });
    }

    // pass 2: sum outward from each mode, split at c = 0 since Δ depends on it
    let mut law: Vec<(u64, f64)> = Vec::new();
    for (o, &(peak, pw)) in outer.iter().zip(&peaks) {
        let Some(pw) = pw else { continue };
        if pw < top - PRUNE_NATS {
            continue;
        }
        let (mut with, mut without) = (0.0, 0.0);
        let mut add = |c: u64, w: f64| {
            if c == 0 {
                without += (w - top).exp();
            } else {
                with += (w - top).exp();
            }
        };
        add(peak, pw);
        for c in (0..peak).rev() {
            match term(o, c) {
                Some(w) if w >= pw - PRUNE_NATS => add(c, w),
                _ => break,
            }
        }
        for c in peak + 1..=c_max(o) {
            match term(o, c) {
                Some(w) if w >= pw - PRUNE_NATS => add(c, w),
                _ => break,
            }
        }
        if with > 0.0 {
            law.push((o.top.max(inner.map_or(0, |a| a.0)), with));
        }
        if without > 0.0 {
            let ones_possible = mu1 > 0.0 && n > 1 + o.excess + o.used;
            law.push((o.top.max(u64::from(ones_possible)), without));
        }
    }
    let z: f64 = law.iter().map(|e| e.1).sum();
    for e in &mut law {
        e.1 /= z;
    }
    Ok(Some(law))
}

/// Depth-first over the counts; `used` = Σ c_j and `excess` = Σ c_j (v_j − 1).
#[allow(clippy::too_many_arguments)]
fn enumerate_outer(
    j: usize,
    used: u64,
    excess: u64,
    lw: f64,
    n: u64,
    big: &[(u64, f64)],
    counts: &mut Vec<u64>,
    out: &mut Vec<Outer>,
) -> bool {
    if j == big.len() {
        if out.len() >= MULTISET_CAP {
            return false;
        }
        let top = big
            .iter()
            .zip(counts.iter())
            .filter(|(_, &c)| c > 0)
            .map(|(a, _)| a.0)
            .max()
            .unwrap_or(0);
        out.push(Outer {
            used,
            excess,
            lw,
            top,
        });
        return true;
    }
    let (v, p) = big[j];
    let mut c = 0u64;
    // the leaves and the internal vertices must fit in n
    while used + c + 1 + excess + c * (v - 1) <= n {
        counts[j] = c;
        let w = lw + c as f64 * p.ln() - ln_fact(c);
        if !enumerate_outer(
            j + 1,
            used + c,
            excess + c * (v - 1),
            w,
            n,
            big,
            counts,
            out,
        ) {
            return false;
        }
        c += 1;
    }
    counts[j] = 0;
    true
}

/// Exact law of the maximal degree of T_n from the multiset enumeration,
/// for laws with few atoms.
pub fn max_degree_law(
    atoms: &[(u64, f64)],
    mu1: f64,
    n: usize,
) -> Result<Option<HashMap<u64, f64>>> {
    Ok(multiset_law(atoms, mu1, n)?.map(|law| {
        let mut m = HashMap::new();
        for (k, p) in law {
            *m.entry(k).or_insert(0.0) += p;
        }
        m
    }))
}
