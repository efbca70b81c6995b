//! Offspring distributions: an exact head of atoms plus an optional
//! parametric tail, with tail sums, truncated moments, the pgf machinery
//! and sampling.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{weighted::WeightedAliasIndex, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{exp_sinh, Kahan};
use crate::rng::SimRng;

/// Power-log tails are summed exactly below this index; beyond it an
/// Euler–Maclaurin remainder with a quadrature integral takes over.
const TABLE_END: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
}

/// The JSON distribution spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DistSpec {
    #[serde(rename = "geometric")]
    Geometric,
    #[serde(rename = "tabulated")]
    Tabulated { probs: Vec<f64> },
    #[serde(rename = "cauchy_A")]
    CauchyA(CauchyParams),
    #[serde(rename = "cauchy_B")]
    CauchyB(CauchyParams),
    #[serde(rename = "cauchy_C")]
    CauchyC(CauchyParams),
    #[serde(rename = "constructed")]
    Constructed { levels: Vec<(u64, f64)>, mu1: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CauchyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// μ_n = c·L(n)/n² for n ≥ cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PowerLog {
    pub family: Family,
    pub beta: f64,
    pub k: u32,
    pub c: f64,
    pub cutoff: u64,
}

impl PowerLog {
    /// L(e^t).
    fn l_log(&self, t: f64) -> f64 {
        match self.family {
            Family::A => self.beta * t.powf(-1.0 - self.beta),
            Family::B => {
                let mut li = t;
                let mut prod = 1.0;
                for _ in 1..self.k {
                    prod /= li;
                    li = li.ln();
                }
                prod / (li * li)
            }
            Family::C => {
                let b = self.beta;
                let tb = t.powf(b);
                (1.0 - b) / b * (-tb).exp() / t.powf(b)
            }
        }
    }

    fn pmf(&self, x: f64) -> f64 {
        self.c * self.l_log(x.ln()) / (x * x)
    }

    /// ∫_u^∞ c L(x)/x² dx.
    fn mass_integral(&self, u: f64) -> f64 {
        self.c * exp_sinh(|t| self.l_log(t) * (-t).exp(), u.ln())
    }

    /// ∫_u^∞ c L(x)/x dx.
    fn moment_integral(&self, u: f64) -> f64 {
        let lu = u.ln();
        let v = match self.family {
            Family::A => lu.powf(-self.beta),
            Family::B => {
                let mut li = lu;
                for _ in 1..self.k {
                    li = li.ln();
                }
                1.0 / li
            }
            Family::C => exp_sinh(|t| self.l_log(t), lu),
        };
        self.c * v
    }

    /// Σ_{k≥u} F(k) = ∫_u^∞ F + F(u)/2 − F'(u)/12 (higher terms are below
    /// 1e-15 relative for u ≥ 2^16).
    fn euler_maclaurin<F: Fn(f64) -> f64>(f: F, integral: f64, u: f64) -> f64 {
        let h = (1e-3 * u).max(0.5);
        let d = (f(u + h) - f(u - h)) / (2.0 * h);
        integral + 0.5 * f(u) - d / 12.0
    }

    fn em_tail(&self, u: u64) -> f64 {
        let u = u as f64;
        Self::euler_maclaurin(|x| self.pmf(x), self.mass_integral(u), u)
    }

    fn em_moment(&self, u: u64) -> f64 {
        let u = u as f64;
        Self::euler_maclaurin(|x| x * self.pmf(x), self.moment_integral(u), u)
    }

    fn table_start(&self) -> u64 {
        self.cutoff
    }

    fn table_end(&self) -> u64 {
        self.cutoff.max(TABLE_END)
    }
}

#[derive(Debug, Clone)]
enum Tail {
    None,
    Geometric,
    PowerLog(PowerLog),
}

#[derive(Debug)]
struct PlTables {
    /// μ_k for k in [cutoff, end)
    pmf: Vec<f64>,
    /// P(Y ≥ k) restricted to the tail, k in [cutoff, end]
    tail: Vec<f64>,
    /// E[Y 1{Y ≥ k}] restricted to the tail, k in [cutoff, end]
    moment: Vec<f64>,
}

impl PlTables {
    fn build(pl: &PowerLog) -> Self {
        let (start, end) = (pl.table_start(), pl.table_end());
        let pmf: Vec<f64> = (start..end).map(|k| pl.pmf(k as f64)).collect();
        let len = (end - start) as usize + 1;
        let mut tail = vec![0.0; len];
        let mut moment = vec![0.0; len];
        let mut kt = Kahan::default();
        let mut km = Kahan::default();
        kt.add(pl.em_tail(end));
        km.add(pl.em_moment(end));
        tail[len - 1] = kt.value();
        moment[len - 1] = km.value();
        for i in (0..len - 1).rev() {
            let k = start + i as u64;
            kt.add(pmf[i]);
            km.add(k as f64 * pmf[i]);
            tail[i] = kt.value();
            moment[i] = km.value();
        }
        PlTables { pmf, tail, moment }
    }
}

#[derive(Debug)]
struct Derived {
    atom_tail: Vec<f64>,
    atom_moment: Vec<f64>,
    alias: Option<WeightedAliasIndex<f64>>,
    pl: Option<PlTables>,
    mass: f64,
    mean: f64,
}

/// A law μ on the nonnegative integers. Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct OffspringDist {
    spec: DistSpec,
    atoms: Vec<(u64, f64)>,
    tail: Tail,
    mean_target: Option<f64>,
    derived: Arc<Derived>,
}

/// The increment law X = Y − 1.
#[derive(Debug, Clone, Copy)]
pub struct IncrementLaw<'a>(&'a OffspringDist);

impl IncrementLaw<'_> {
    pub fn pmf(&self, k: i64) -> f64 {
        if k < -1 {
            0.0
        } else {
            self.0.pmf((k + 1) as u64)
        }
    }

    pub fn mean(&self) -> f64 {
        self.0.mean() - 1.0
    }

    pub fn sample(&self, rng: &mut SimRng) -> i64 {
        self.0.sample_y(rng) as i64 - 1
    }
}

pub fn load_spec(text: &str) -> Result<OffspringDist> {
    let spec: DistSpec = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    OffspringDist::from_spec(spec)
}

fn ln_iter(x: f64, k: u32) -> f64 {
    let mut v = x;
    for _ in 0..k {
        v = v.ln();
    }
    v
}

impl OffspringDist {
    pub fn from_spec(spec: DistSpec) -> Result<Self> {
        match &spec {
            DistSpec::Geometric => Ok(Self::geometric()),
            DistSpec::Tabulated { probs } => Self::tabulated(probs),
            DistSpec::CauchyA(p) => Self::cauchy(Family::A, p),
            DistSpec::CauchyB(p) => Self::cauchy(Family::B, p),
            DistSpec::CauchyC(p) => Self::cauchy(Family::C, p),
            DistSpec::Constructed { levels, mu1 } => Self::constructed(levels, *mu1),
        }
    }

    /// μ_k = 2^{-(k+1)}.
    pub fn geometric() -> Self {
        Self::assemble(DistSpec::Geometric, Vec::new(), Tail::Geometric, Some(1.0))
    }

    pub fn tabulated(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Malformed("empty probability table".into()));
        }
        let mut atoms = Vec::new();
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Malformed(format!("probability {p} at index {i}")));
            }
            if p < 0.0 {
                return Err(Error::NegativeProbability {
                    index: i as u64,
                    value: p,
                });
            }
            if p > 0.0 {
                atoms.push((i as u64, p));
            }
        }
        check_mass(&atoms, 0.0)?;
        Ok(Self::assemble(
            DistSpec::Tabulated {
                probs: probs.to_vec(),
            },
            atoms,
            Tail::None,
            None,
        ))
    }

    /// Atoms at n_k with mass p_k, except μ_1 = `mu1`.
    pub fn constructed(levels: &[(u64, f64)], mu1: f64) -> Result<Self> {
        let mut atoms: Vec<(u64, f64)> = Vec::new();
        for &(n, p) in levels {
            if !p.is_finite() {
                return Err(Error::Malformed(format!(
                    "probability {p} at level n = {n}"
                )));
            }
            if p < 0.0 {
                return Err(Error::NegativeProbability { index: n, value: p });
            }
            if n != 1 && p > 0.0 {
                atoms.push((n, p));
            }
        }
        if mu1 < 0.0 {
            return Err(Error::NegativeProbability {
                index: 1,
                value: mu1,
            });
        }
        if mu1 > 0.0 {
            atoms.push((1, mu1));
        }
        atoms.sort_by_key(|a| a.0);
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Malformed("repeated level".into()));
        }
        check_mass(&atoms, 0.0)?;
        let d = Self::assemble(
            DistSpec::Constructed {
                levels: levels.to_vec(),
                mu1,
            },
            atoms,
            Tail::None,
            Some(1.0),
        );
        d.check_critical()?;
        Ok(d)
    }

    /// Power-log tail μ_n = c L(n)/n² for n ≥ cutoff, with (μ_0, μ_1) solved
    /// for unit mass and unit mean. Without an explicit c the largest
    /// feasible one is used, which puts μ_1 = 0.
    pub fn cauchy(family: Family, p: &CauchyParams) -> Result<Self> {
        let beta = match family {
            Family::A => p.beta.unwrap_or(1.0),
            Family::B => p.beta.unwrap_or(0.0),
            Family::C => p.beta.unwrap_or(0.5),
        };
        let k = p.k.unwrap_or(2);
        match family {
            Family::A if !(beta > 0.0 && beta.is_finite()) => {
                return Err(Error::Malformed(format!(
                    "family A needs beta > 0, got {beta}"
                )))
            }
            Family::B if k < 2 => {
                return Err(Error::Malformed(format!("family B needs k >= 2, got {k}")))
            }
            Family::C if !(beta > 0.0 && beta < 1.0) => {
                return Err(Error::Malformed(format!(
                    "family C needs beta in (0,1), got {beta}"
                )))
            }
            _ => {}
        }
        let cutoff = match (p.cutoff, family) {
            (Some(c), _) => c,
            (None, Family::B) => {
                // smallest n with ln_(k)(n) >= 1
                let mut x = 1.0f64;
                for _ in 0..k {
                    x = x.exp();
                }
                if !x.is_finite() || x > 1e15 {
                    return Err(Error::Malformed(format!(
                        "family B with k = {k} needs an explicit cutoff"
                    )));
                }
                x.ceil() as u64
            }
            (None, _) => 2,
        };
        if cutoff < 2 {
            return Err(Error::Malformed("cutoff must be at least 2".into()));
        }
        if family == Family::B && !(ln_iter(cutoff as f64, k) > 0.0) {
            return Err(Error::Malformed(format!(
                "ln_({k})(cutoff) must be positive"
            )));
        }
        let unit = PowerLog {
            family,
            beta,
            k,
            c: 1.0,
            cutoff,
        };
        let t = PlTables::build(&unit);
        let (m0, m1) = (t.tail[0], t.moment[0]);
        let c = match p.c {
            Some(c) if !(c > 0.0 && c.is_finite()) => {
                return Err(Error::Malformed(format!(
                    "normalizer c must be positive, got {c}"
                )))
            }
            Some(c) => c,
            None => 1.0 / m1,
        };
        let mu1 = 1.0 - c * m1;
        if mu1 < -1e-12 {
            return Err(Error::Infeasible(format!(
                "c = {c} exceeds the criticality bound {}",
                1.0 / m1
            )));
        }
        let mu1 = mu1.max(0.0);
        let mu0 = 1.0 - mu1 - c * m0;
        if mu0 <= 0.0 {
            return Err(Error::Infeasible(format!("c = {c} leaves no mass at 0")));
        }
        let mut atoms = vec![(0, mu0)];
        if mu1 > 0.0 {
            atoms.push((1, mu1));
        }
        let params = CauchyParams {
            beta: Some(beta),
            k: Some(k),
            cutoff: Some(cutoff),
            c: Some(c),
        };
        let spec = match family {
            Family::A => DistSpec::CauchyA(params),
            Family::B => DistSpec::CauchyB(params),
            Family::C => DistSpec::CauchyC(params),
        };
        let d = Self::assemble(
            spec,
            atoms,
            Tail::PowerLog(PowerLog { c, ..unit }),
            Some(1.0),
        );
        if (d.mass() - 1.0).abs() > 1e-12 {
            return Err(Error::Infeasible(format!("total mass {}", d.mass())));
        }
        d.check_critical()?;
        Ok(d)
    }

    fn assemble(
        spec: DistSpec,
        atoms: Vec<(u64, f64)>,
        tail: Tail,
        mean_target: Option<f64>,
    ) -> Self {
        let n = atoms.len();
        let mut atom_tail = vec![0.0; n + 1];
        let mut atom_moment = vec![0.0; n + 1];
        let (mut kt, mut km) = (Kahan::default(), Kahan::default());
        for i in (0..n).rev() {
            kt.add(atoms[i].1);
            km.add(atoms[i].0 as f64 * atoms[i].1);
            atom_tail[i] = kt.value();
            atom_moment[i] = km.value();
        }
        let alias = if n > 0 {
            WeightedAliasIndex::new(atoms.iter().map(|a| a.1).collect()).ok()
        } else {
            None
        };
        let pl = match &tail {
            Tail::PowerLog(p) => Some(PlTables::build(p)),
            _ => None,
        };
        let (mass, mean) = match (&tail, &pl) {
            (Tail::Geometric, _) => (1.0, 1.0),
            (Tail::PowerLog(_), Some(t)) => {
                (atom_tail[0] + t.tail[0], atom_moment[0] + t.moment[0])
            }
            _ => (atom_tail[0], atom_moment[0]),
        };
        OffspringDist {
            spec,
            atoms,
            tail,
            mean_target,
            derived: Arc::new(Derived {
                atom_tail,
                atom_moment,
                alias,
                pl,
                mass,
                mean,
            }),
        }
    }

    fn check_critical(&self) -> Result<()> {
        if (self.mean() - 1.0).abs() > 1e-9 {
            return Err(Error::NotCritical { mean: self.mean() });
        }
        Ok(())
    }

    pub fn spec(&self) -> &DistSpec {
        &self.spec
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.spec).expect("spec serializes")
    }

    pub fn mean_target(&self) -> Option<f64> {
        self.mean_target
    }

    pub fn mass(&self) -> f64 {
        self.derived.mass
    }

    pub fn mean(&self) -> f64 {
        self.derived.mean
    }

    pub fn is_critical(&self) -> bool {
        (self.mean() - 1.0).abs() <= 1e-9
    }

    /// True when the law has a regularly varying power-log tail.
    pub fn has_cauchy_tail(&self) -> bool {
        matches!(self.tail, Tail::PowerLog(_))
    }

    pub(crate) fn power_log(&self) -> Option<&PowerLog> {
        match &self.tail {
            Tail::PowerLog(p) => Some(p),
            _ => None,
        }
    }

    /// μ_0 + μ_1 = 1: every conditioned tree is a path.
    pub fn is_degenerate(&self) -> bool {
        (self.pmf(0) + self.pmf(1) - 1.0).abs() < 1e-15
    }

    pub fn increments(&self) -> IncrementLaw<'_> {
        IncrementLaw(self)
    }

    /// Largest index of the support, if finite.
    pub fn support_max(&self) -> Option<u64> {
        match self.tail {
            Tail::None => self.atoms.last().map(|a| a.0),
            _ => None,
        }
    }

    fn atom_index(&self, k: u64) -> usize {
        self.atoms.partition_point(|a| a.0 < k)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        match &self.tail {
            Tail::Geometric => pow2(-(k as f64) - 1.0),
            Tail::PowerLog(p) if k >= p.cutoff => {
                let t = self.derived.pl.as_ref().expect("tables");
                if k < p.table_end() {
                    t.pmf[(k - p.cutoff) as usize]
                } else {
                    p.pmf(k as f64)
                }
            }
            _ => {
                let i = self.atom_index(k);
                match self.atoms.get(i) {
                    Some(&(j, p)) if j == k => p,
                    _ => 0.0,
                }
            }
        }
    }

    /// P(Y ≥ u).
    pub fn tail(&self, u: u64) -> f64 {
        let head = self.derived.atom_tail[self.atom_index(u)];
        match &self.tail {
            Tail::None => head,
            Tail::Geometric => pow2(-(u as f64)),
            Tail::PowerLog(p) => head + self.pl_tail(p, u),
        }
    }

    fn pl_tail(&self, p: &PowerLog, u: u64) -> f64 {
        let t = self.derived.pl.as_ref().expect("tables");
        let u = u.max(p.cutoff);
        if u <= p.table_end() {
            t.tail[(u - p.cutoff) as usize]
        } else {
            p.em_tail(u)
        }
    }

    /// ℓ*(x) = E[Y 1{Y ≥ x}].
    pub fn tail_moment(&self, x: u64) -> f64 {
        let head = self.derived.atom_moment[self.atom_index(x)];
        match &self.tail {
            Tail::None => head,
            Tail::Geometric => (x as f64 + 1.0) * pow2(-(x as f64)),
            Tail::PowerLog(p) => {
                let t = self.derived.pl.as_ref().expect("tables");
                let u = x.max(p.cutoff);
                head + if u <= p.table_end() {
                    t.moment[(u - p.cutoff) as usize]
                } else {
                    p.em_moment(u)
                }
            }
        }
    }

    /// First index from which [`Self::tail_moment_smooth`] is available.
    pub(crate) fn smooth_from(&self) -> Option<u64> {
        self.power_log().map(|p| p.table_end())
    }

    /// ℓ*(x) for real x past the tables of a power-log tail, continued
    /// smoothly through the Euler–Maclaurin form; agrees with
    /// [`Self::tail_moment`] at integers.
    pub(crate) fn tail_moment_smooth(&self, x: f64) -> f64 {
        let p = self.power_log().expect("power-log tail");
        PowerLog::euler_maclaurin(|y| y * p.pmf(y), p.moment_integral(x), x)
    }

    /// All atoms k ≤ max with positive mass, in increasing order.
    pub fn support_upto(&self, max: u64) -> Vec<(u64, f64)> {
        match &self.tail {
            Tail::Geometric => (0..=max.min(1100))
                .map(|k| (k, self.pmf(k)))
                .filter(|a| a.1 > 0.0)
                .collect(),
            Tail::None => self
                .atoms
                .iter()
                .copied()
                .take_while(|a| a.0 <= max)
                .collect(),
            Tail::PowerLog(p) => {
                let mut v: Vec<(u64, f64)> = self
                    .atoms
                    .iter()
                    .copied()
                    .take_while(|a| a.0 <= max)
                    .collect();
                if max >= p.cutoff {
                    v.extend((p.cutoff..=max).map(|k| (k, self.pmf(k))));
                }
                v
            }
        }
    }

    /// gcd{i > 0 : μ_i > 0}.
    pub fn span(&self) -> Result<u64> {
        let mut g = 0u64;
        if !matches!(self.tail, Tail::None) {
            g = 1;
        }
        for &(k, _) in &self.atoms {
            if k > 0 {
                g = gcd(g, k);
            }
        }
        if g == 0 {
            Err(Error::ConcentratedAtZero)
        } else {
            Ok(g)
        }
    }

    /// Whether P(|T| = n) > 0. Exact for n ≤ 64; beyond that the span
    /// congruence plus support reachability.
    pub fn is_feasible(&self, n: usize) -> bool {
        if n == 0 || self.pmf(0) <= 0.0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let span = match self.span() {
            Ok(r) => r,
            Err(_) => return false,
        };
        if (n as u64 - 1) % span != 0 {
            return false;
        }
        let support: Vec<usize> = self
            .support_upto(n as u64 - 1)
            .iter()
            .map(|a| a.0 as usize)
            .collect();
        if n <= 64 {
            // reach[c][s]: c degrees chosen with sum s
            let target = n - 1;
            let mut reach = vec![false; target + 1];
            reach[0] = true;
            for _ in 0..n {
                let mut next = vec![false; target + 1];
                for s in 0..=target {
                    if reach[s] {
                        for &d in &support {
                            if s + d <= target {
                                next[s + d] = true;
                            }
                        }
                    }
                }
                reach = next;
            }
            reach[target]
        } else {
            support.iter().any(|&d| d >= 2) || self.pmf(1) > 0.0 && support.len() > 1
        }
    }

    pub fn sample_y(&self, rng: &mut SimRng) -> u64 {
        match &self.tail {
            Tail::Geometric => {
                let mut k = 0u64;
                loop {
                    let r: u64 = rng.random();
                    if r != 0 {
                        return k + r.trailing_zeros() as u64;
                    }
                    k += 64;
                }
            }
            Tail::None => self.draw_atom(rng),
            Tail::PowerLog(p) => {
                let v = 1.0 - rng.random::<f64>();
                let t = self.derived.pl.as_ref().expect("tables");
                if v > t.tail[0] {
                    self.draw_atom(rng)
                } else {
                    self.tail_inverse(p, t, v)
                }
            }
        }
    }

    fn draw_atom(&self, rng: &mut SimRng) -> u64 {
        let alias = self.derived.alias.as_ref().expect("head atoms");
        self.atoms[alias.sample(rng)].0
    }

    /// Largest k ≥ cutoff with P(Y ≥ k, tail) ≥ v.
    fn tail_inverse(&self, p: &PowerLog, t: &PlTables, v: f64) -> u64 {
        let last = t.tail.len() - 1;
        if t.tail[last] < v {
            // tail[0] >= v > tail[last]
            let i = t.tail.partition_point(|&x| x >= v);
            return p.cutoff + i as u64 - 1;
        }
        let mut lo = p.table_end();
        let mut hi = lo.saturating_mul(2);
        while hi < (1u64 << 62) && p.em_tail(hi) >= v {
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if p.em_tail(mid) >= v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// ℓ(s) = μ_0 − Σ_{k≥1} μ([k+1,∞)) (1−s)^k, for s ∈ (0,1].
    ///
    /// Evaluated as (1 − m) + Σ_j μ_j g_j(s) with g_j(s) = Σ_{k<j} (1 − (1−s)^k),
    /// a sum of nonnegative terms, so small s loses no precision.
    pub fn ell(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::OutOfDomain {
                what: "s",
                value: s,
            });
        }
        if let Tail::Geometric = self.tail {
            return Ok(s / (1.0 + s));
        }
        let g = GFun::new(s);
        let mut acc = Kahan::default();
        acc.add(1.0 - self.mean());
        for &(j, p) in &self.atoms {
            if j >= 2 {
                acc.add(p * g.g(j as f64 - 1.0));
            }
        }
        if let Tail::PowerLog(pl) = &self.tail {
            let t = self.derived.pl.as_ref().expect("tables");
            for (i, &p) in t.pmf.iter().enumerate() {
                let j = pl.cutoff + i as u64;
                if j >= 2 {
                    acc.add(p * g.g(j as f64 - 1.0));
                }
            }
            let u = pl.table_end() as f64;
            let h_part = pl.c * exp_sinh(|t| pl.l_log(t) * (-t).exp() * g.h(t.exp()), u.ln());
            let integral = (pl.moment_integral(u) - pl.mass_integral(u)) - h_part;
            acc.add(PowerLog::euler_maclaurin(
                |x| pl.pmf(x) * g.g(x - 1.0),
                integral,
                u,
            ));
        }
        Ok(acc.value())
    }

    /// G_μ(t) = Σ μ_k t^k for t ∈ [0,1].
    pub fn pgf(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain {
                what: "t",
                value: t,
            });
        }
        if let Tail::Geometric = self.tail {
            return Ok(1.0 / (2.0 - t));
        }
        let pw = |k: f64| if k == 0.0 { 1.0 } else { t.powf(k) };
        let mut acc = Kahan::default();
        for &(j, p) in &self.atoms {
            acc.add(p * pw(j as f64));
        }
        if let Tail::PowerLog(pl) = &self.tail {
            let tb = self.derived.pl.as_ref().expect("tables");
            for (i, &p) in tb.pmf.iter().enumerate() {
                acc.add(p * pw((pl.cutoff + i as u64) as f64));
            }
            let u = pl.table_end() as f64;
            let lt = t.ln();
            let integral = if t == 1.0 {
                pl.mass_integral(u)
            } else {
                pl.c * exp_sinh(|s| pl.l_log(s) * (-s).exp() * (s.exp() * lt).exp(), u.ln())
            };
            acc.add(PowerLog::euler_maclaurin(
                |x| pl.pmf(x) * pw(x),
                integral,
                u,
            ));
        }
        Ok(acc.value())
    }
}

/// Helpers for g_j(s) = Σ_{k=1}^{j-1} (1 − (1−s)^k) evaluated at a = j − 1,
/// and h(x) = (1−s)(1 − (1−s)^{x−1})/s, so that g = (x − 1) − h.
struct GFun {
    s: f64,
    t: f64,
    big_l: f64,
    l_minus_s: f64,
}

impl GFun {
    fn new(s: f64) -> Self {
        let big_l = -(-s).ln_1p();
        let l_minus_s = if s < 1e-3 {
            s * s * (0.5 + s * (1.0 / 3.0 + s * (0.25 + s * (0.2 + s / 6.0))))
        } else {
            big_l - s
        };
        GFun {
            s,
            t: 1.0 - s,
            big_l,
            l_minus_s,
        }
    }

    fn g(&self, a: f64) -> f64 {
        if self.s == 1.0 {
            return a;
        }
        let y = a * self.big_l;
        // e^{-y} − 1 + y
        let e = if y < 1e-3 {
            y * y * (0.5 - y * (1.0 / 6.0 - y * (1.0 / 24.0 - y / 120.0)))
        } else {
            (-y).exp_m1() + y
        };
        a * self.s + self.t * (e - a * self.l_minus_s) / self.s
    }

    fn h(&self, x: f64) -> f64 {
        if self.s == 1.0 {
            return 0.0;
        }
        self.t * (-(-(x - 1.0) * self.big_l).exp_m1()) / self.s
    }
}

fn check_mass(atoms: &[(u64, f64)], extra: f64) -> Result<()> {
    let mut k = Kahan::default();
    for a in atoms {
        k.add(a.1);
    }
    k.add(extra);
    let m = k.value();
    if (m - 1.0).abs() > 1e-12 {
        return Err(Error::Infeasible(format!("probabilities sum to {m}")));
    }
    Ok(())
}

fn pow2(e: f64) -> f64 {
    e.exp2()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
