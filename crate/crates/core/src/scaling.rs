//! Scalar sequences and analytic tools: a_n, b_n, h_n, V, V_*, the Q
//! recursion, exact convolutions, the max-degree bound and Cramér tilting.

use serde::Serialize;

use crate::dist::OffspringDist;
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre3, gauss_legendre8, Kahan};

/// The piecewise sums below run exactly up to this index.
const EXACT_UPTO: u64 = 1 << 16;

/// inf{u ≥ 0 : P(Y ≥ u) ≤ 1/n}.
pub fn a_n(d: &OffspringDist, n: u64) -> u64 {
    let level = 1.0 / n as f64;
    if d.tail(0) <= level {
        return 0;
    }
    let mut hi = 1u64;
    while d.tail(hi) > level {
        hi *= 2;
    }
    let mut lo = hi / 2;
    // tail(lo) > level ≥ tail(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if d.tail(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn check_critical(d: &OffspringDist) -> Result<()> {
    if d.is_critical() {
        Ok(())
    } else {
        Err(Error::NotCritical { mean: d.mean() })
    }
}

/// b_n = n E[X 1{|X| > a_n}] with X = Y − 1.
pub fn b_n(d: &OffspringDist, n: u64) -> Result<f64> {
    check_critical(d)?;
    let a = a_n(d, n);
    if a == 0 {
        // −n E[X 1{|X| ≤ 0}] = 0
        return Ok(0.0);
    }
    Ok(n as f64 * (d.tail_moment(a + 2) - d.tail(a + 2)))
}

/// V(y) = ∫_1^y dx / (x ℓ*(x)), with ℓ*(x) = E[Y 1{Y ≥ ⌊x⌋}] constant on
/// each [k, k+1).
pub fn big_v(d: &OffspringDist, y: f64) -> Result<f64> {
    if !(y >= 1.0) {
        return Err(Error::OutOfDomain {
            what: "y",
            value: y,
        });
    }
    let mut acc = Kahan::default();
    let top = y.ceil() as u64;
    let exact_end = match d.smooth_from() {
        Some(s) => top.min(s.max(EXACT_UPTO)),
        None => top,
    };
    let mut k = 1u64;
    while k < exact_end {
        let m = d.tail_moment(k);
        if m <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let w = if ((k + 1) as f64) <= y {
            (1.0 / k as f64).ln_1p()
        } else {
            (y / k as f64).ln()
        };
        acc.add(w / m);
        k += 1;
    }
    if k < top {
        acc.add(smooth_part(d, k as f64, y));
    }
    Ok(acc.value())
}

/// Σ_{k=A}^{⌈y⌉−1} ln(min(y,k+1)/k)/ℓ*(k) for a smooth ℓ*, by Euler–Maclaurin:
/// the integral in t = ln x on octaves plus the endpoint corrections.
fn smooth_part(d: &OffspringDist, a: f64, y: f64) -> f64 {
    let f = |x: f64| (1.0 / x).ln_1p() / d.tail_moment_smooth(x);
    // the last, partial piece [⌊y⌋, y) is handled exactly
    let b = y.floor();
    let mut acc = Kahan::default();
    let (la, lb) = (a.ln(), b.ln());
    let blocks = ((lb - la) / std::f64::consts::LN_2).ceil().max(1.0) as usize;
    let step = (lb - la) / blocks as f64;
    for i in 0..blocks {
        let (t0, t1) = (la + i as f64 * step, la + (i + 1) as f64 * step);
        acc.add(gauss_legendre8(|t| t.exp() * f(t.exp()), t0, t1));
    }
    let h = 1e-3 * a;
    let df = |x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    acc.add(0.5 * (f(a) - f(b)) + (df(b) - df(a)) / 12.0);
    if y > b {
        acc.add((y / b).ln() / d.tail_moment_smooth(b));
    }
    acc.value()
}

/// h_n = V(n ℓ*(a_n)).
pub fn h_n(d: &OffspringDist, n: u64) -> Result<f64> {
    let u = n as f64 * d.tail_moment(a_n(d, n));
    if !(u > 1.0) {
        return Err(Error::OutOfDomain {
            what: "n ℓ*(a_n)",
            value: u,
        });
    }
    big_v(d, u)
}

pub fn ell(d: &OffspringDist, s: f64) -> Result<f64> {
    d.ell(s)
}

pub fn gpgf(d: &OffspringDist, t: f64) -> Result<f64> {
    d.pgf(t)
}

/// V_*(y) = ∫_y^1 dx / (x ℓ(x)), with ℓ the pgf form.
pub fn v_star(d: &OffspringDist, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::OutOfDomain {
            what: "y",
            value: y,
        });
    }
    let top = -y.ln();
    let blocks = (top / 0.5).ceil() as usize;
    let step = top / blocks as f64;
    let mut acc = Kahan::default();
    for i in 0..blocks {
        acc.add(v_star_piece(d, i as f64 * step, (i + 1) as f64 * step)?);
    }
    Ok(acc.value())
}

/// ∫ dt / ℓ(e^{−t}) over [t0, t1].
fn v_star_piece(d: &OffspringDist, t0: f64, t1: f64) -> Result<f64> {
    let err = std::cell::RefCell::new(None);
    let f = |t: f64| match d.ell((-t).exp()) {
        Ok(l) => 1.0 / l,
        Err(e) => {
            *err.borrow_mut() = Some(e);
            0.0
        }
    };
    let v = if t1 - t0 > 0.1 {
        gauss_legendre8(f, t0, t1)
    } else {
        gauss_legendre3(f, t0, t1)
    };
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Survival probabilities Q_n = P(H ≥ n) from Q_{n+1} = Q_n (1 − ℓ(Q_n)).
#[derive(Debug, Clone, Serialize)]
pub struct QTable {
    pub q: Vec<f64>,
    /// ℓ(Q_n), 0 once Q_n = 0
    pub ell: Vec<f64>,
}

pub fn q_table(d: &OffspringDist, n_max: usize) -> Result<QTable> {
    let mut q = Vec::with_capacity(n_max + 1);
    let mut ell = Vec::with_capacity(n_max + 1);
    let mut cur = 1.0f64;
    for _ in 0..=n_max {
        let l = if cur > 0.0 { d.ell(cur)? } else { 0.0 };
        q.push(cur);
        ell.push(l);
        cur *= 1.0 - l;
    }
    Ok(QTable { q, ell })
}

impl QTable {
    /// max_n |Q_{n+1} − Q_n(1 − ℓ(Q_n))|, recomputing ℓ.
    pub fn recursion_residual(&self, d: &OffspringDist) -> Result<f64> {
        let mut worst = 0.0f64;
        for w in self.q.windows(2) {
            let l = if w[0] > 0.0 { d.ell(w[0])? } else { 0.0 };
            worst = worst.max((w[1] - w[0] * (1.0 - l)).abs());
        }
        Ok(worst)
    }

    /// max_n |Q_{n+1} − (1 − G(1 − Q_n))|.
    pub fn pgf_residual(&self, d: &OffspringDist) -> Result<f64> {
        let mut worst = 0.0f64;
        for w in self.q.windows(2) {
            worst = worst.max((w[1] - (1.0 - d.pgf(1.0 - w[0])?)).abs());
        }
        Ok(worst)
    }

    /// V_*(Q_n) for n ≥ 1 (index 0 holds V_*(1) = 0), accumulated interval
    /// by interval.
    pub fn v_star_values(&self, d: &OffspringDist) -> Result<Vec<f64>> {
        let mut out = vec![0.0];
        let mut acc = Kahan::default();
        for w in self.q.windows(2) {
            if w[1] <= 0.0 {
                break;
            }
            acc.add(v_star_piece(d, -w[0].ln(), -w[1].ln())?);
            out.push(acc.value());
        }
        Ok(out)
    }

    /// First n with ℓ(Q_n)/ℓ(Q_{n+1}) > exp(ℓ(Q_n)/(1 − ℓ(Q_n))), if any.
    pub fn ratio_bound_violation(&self) -> Option<usize> {
        (0..self.ell.len().saturating_sub(1)).find(|&n| {
            let (a, b) = (self.ell[n], self.ell[n + 1]);
            b > 0.0 && a / b > (a / (1.0 - a)).exp()
        })
    }
}

/// P(S_n = k) on a window of states.
#[derive(Debug, Clone)]
pub struct ConvTable {
    pub lo: i64,
    pub probs: Vec<f64>,
    /// mass that left the window
    pub truncated: f64,
}

impl ConvTable {
    pub fn get(&self, k: i64) -> f64 {
        if k < self.lo {
            return 0.0;
        }
        self.probs
            .get((k - self.lo) as usize)
            .copied()
            .unwrap_or(0.0)
    }
}

/// n-fold convolution of a law on {−1, …, K} (`law[i]` = P(X = i − 1)),
/// keeping states in `window`.
pub fn conv_dp(law: &[f64], n: usize, window: Option<(i64, i64)>) -> Result<ConvTable> {
    if law.is_empty() {
        return Err(Error::Malformed("empty law".into()));
    }
    let k = law.len() as i64 - 2;
    let (wlo, whi) = window.unwrap_or((-(n as i64), n as i64 * k.max(0)));
    let lo = wlo.max(-(n as i64));
    let hi = whi.min(n as i64 * k.max(0)).max(lo);
    let width = (hi - lo + 1) as usize;
    if (width as u128) * (n as u128) * (law.len() as u128) > 4_000_000_000 {
        return Err(Error::TooLarge(format!(
            "convolution of {n} steps over {width} states"
        )));
    }
    let mut cur = vec![0.0; width];
    let mut truncated = 0.0;
    if (lo..=hi).contains(&0) {
        cur[(-lo) as usize] = 1.0;
    } else {
        truncated = 1.0;
    }
    let mut next = vec![0.0; width];
    for _ in 0..n {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &p) in cur.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &q) in law.iter().enumerate() {
                let t = i as i64 + j as i64 - 1;
                if (0..width as i64).contains(&t) {
                    next[t as usize] += p * q;
                } else {
                    truncated += p * q;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(ConvTable {
        lo,
        probs: cur,
        truncated,
    })
}

/// ln Σ_i law[i] e^{(i−1) y} and the tilted mean at b = e^y.
fn log_mgf(law: &[(i64, f64)], y: f64) -> (f64, f64) {
    let m = law
        .iter()
        .map(|&(x, _)| x as f64 * y)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut zx) = (0.0, 0.0);
    for &(x, p) in law {
        let w = p * (x as f64 * y - m).exp();
        z += w;
        zx += w * x as f64;
    }
    (m + z.ln(), zx / z)
}

/// ln P(X_1 + … + X_n = target) for a law on {−1, …, K}: the walk is tilted
/// so that the target is its mean, which keeps the convolution well away
/// from underflow, and the tilt is undone in closed form.
pub fn ln_prob_sum(law: &[f64], n: usize, target: i64) -> Result<f64> {
    let k = law.len() as i64 - 2;
    let atoms: Vec<(i64, f64)> = law
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (i as i64 - 1, p))
        .collect();
    let (xmin, xmax) = (atoms[0].0, atoms[atoms.len() - 1].0);
    let n_i = n as i64;
    if n == 0 {
        return Ok(if target == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if target < xmin * n_i || target > xmax * n_i {
        return Ok(f64::NEG_INFINITY);
    }
    if xmin == xmax {
        return Ok(n as f64 * atoms[0].1.ln());
    }
    if target == xmin * n_i || target == xmax * n_i {
        let p = if target == xmin * n_i {
            atoms[0].1
        } else {
            atoms[atoms.len() - 1].1
        };
        return Ok(n as f64 * p.ln());
    }
    let goal = target as f64 / n as f64;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while log_mgf(&atoms, lo).1 > goal {
        lo *= 2.0;
    }
    while log_mgf(&atoms, hi).1 < goal {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_mgf(&atoms, mid).1 < goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = 0.5 * (lo + hi);
    let (lz, _) = log_mgf(&atoms, y);
    let tilted: Vec<(i64, f64)> = atoms
        .iter()
        .map(|&(x, p)| (x, (p.ln() + x as f64 * y - lz).exp()))
        .collect();
    let cost: u128 = (n as u128).pow(2) * (k.max(1) as u128) * tilted.len() as u128 / 4;
    if cost > 20_000_000_000 {
        return Err(Error::TooLarge(format!(
            "convolution of {n} steps with support up to {k}"
        )));
    }
    // states that can still reach the target
    let mut cur = vec![1.0f64];
    let mut cur_lo = 0i64;
    for i in 1..=n_i {
        let lo_i = (-i).max(target - (n_i - i) * k);
        let hi_i = (i * k).min(target + (n_i - i));
        let width = (hi_i - lo_i + 1).max(0) as usize;
        let mut next = vec![0.0; width];
        for (a, &p) in cur.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let s = cur_lo + a as i64;
            for &(x, q) in &tilted {
                let t = s + x - lo_i;
                if t >= 0 && (t as usize) < width {
                    next[t as usize] += p * q;
                }
            }
        }
        cur = next;
        cur_lo = lo_i;
    }
    let p = cur.get((target - cur_lo) as usize).copied().unwrap_or(0.0);
    Ok(n as f64 * lz - target as f64 * y + p.ln())
}

/// The bound P(Δ_n ≤ N) ≤ P(ΣX^{<N}_{1..n} = −1) / (n μ_{N+1} P(ΣX^{<N}_{2..n} = −N−1)),
/// X^{<N} being X conditioned on X < N.
pub fn delta_upper_bound(d: &OffspringDist, n: usize, big_n: u64) -> Result<f64> {
    let hit = d.pmf(big_n + 1);
    if hit <= 0.0 {
        return Err(Error::OutOfDomain {
            what: "P(X = N)",
            value: hit,
        });
    }
    if n as u64 <= big_n + 1 {
        return Err(Error::OutOfDomain {
            what: "n − N − 1",
            value: n as f64 - big_n as f64 - 1.0,
        });
    }
    let head: Vec<f64> = (0..=big_n).map(|y| d.pmf(y)).collect();
    let mass: f64 = head.iter().sum();
    let law: Vec<f64> = head.iter().map(|p| p / mass).collect();
    let num = ln_prob_sum(&law, n, -1)?;
    if num == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let den = ln_prob_sum(&law, n - 1, -(big_n as i64) - 1)?;
    if den == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok((num - den - (n as f64).ln() - hit.ln()).exp())
}

/// The root b of b G_c'(b)/G_c(b) = −δ + s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltSolution {
    pub c: f64,
    pub s: f64,
    pub delta: f64,
    pub eps: f64,
    pub b: f64,
    /// b^{−1/2}
    pub lambda: f64,
}

/// Head law ν_0..ν_K given densely.
pub fn tilt_root(nu: &[f64], c: f64, s: f64, delta: f64, eps: f64) -> Result<TiltSolution> {
    let atoms: Vec<(u64, f64)> = nu.iter().enumerate().map(|(i, &p)| (i as u64, p)).collect();
    tilt_root_sparse(&atoms, c, s, delta, eps)
}

/// X^{(c)} puts ν_{k+1}/(1−ε+c) on k ≠ 0 and (ν_1 + c)/(1−ε+c) on 0; its
/// tilted mean at b is increasing, so the root is found by bisection in ln b.
pub fn tilt_root_sparse(
    nu: &[(u64, f64)],
    c: f64,
    s: f64,
    delta: f64,
    eps: f64,
) -> Result<TiltSolution> {
    check_head(nu, delta, eps)?;
    if !(0.0..=eps).contains(&c) {
        return Err(Error::OutOfDomain {
            what: "c",
            value: c,
        });
    }
    if !(0.0..=delta).contains(&s) {
        return Err(Error::OutOfDomain {
            what: "s",
            value: s,
        });
    }
    let mut atoms: Vec<(i64, f64)> = nu
        .iter()
        .filter(|a| a.1 > 0.0)
        .map(|&(i, p)| (i as i64 - 1, p))
        .collect();
    atoms.push((0, c));
    let target = s - delta;
    let top = atoms.iter().map(|a| a.0).max().expect("nonempty");
    if top as f64 <= target {
        return Err(Error::Infeasible(format!(
            "tilted mean {target} is not attainable"
        )));
    }
    let mean_at = |y: f64| log_mgf(&atoms, y).1;
    let y = if mean_at(0.0) >= target {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while mean_at(hi) < target {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mean_at(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let b = y.exp();
    Ok(TiltSolution {
        c,
        s,
        delta,
        eps,
        b,
        lambda: b.powf(-0.5),
    })
}

fn check_head(nu: &[(u64, f64)], delta: f64, eps: f64) -> Result<()> {
    if let Some(&(i, p)) = nu.iter().find(|a| a.1 < 0.0) {
        return Err(Error::NegativeProbability { index: i, value: p });
    }
    let mass: f64 = nu.iter().map(|a| a.1).sum();
    let mean: f64 = nu.iter().map(|a| a.0 as f64 * a.1).sum();
    if (mass - (1.0 - eps)).abs() > 1e-9 || !(eps > 0.0) {
        return Err(Error::Malformed(format!(
            "head mass {mass} is not 1 − ε = {}",
            1.0 - eps
        )));
    }
    if (mean + eps - (1.0 - delta)).abs() > 1e-9 || !(delta > 0.0) {
        return Err(Error::Malformed(format!(
            "Σ iν_i + ε = {} is not 1 − δ",
            mean + eps
        )));
    }
    let at = |k: u64| nu.iter().find(|a| a.0 == k).map_or(0.0, |a| a.1);
    if !(at(0) > 0.0 && at(1) > 0.0 && nu.iter().any(|a| a.0 > 1 && a.1 > 0.0)) {
        return Err(Error::Malformed(
            "need ν_0, ν_1 and some ν_i with i > 1 positive".into(),
        ));
    }
    Ok(())
}

/// λ = b_{ε,δ/4}^{−1/2}.
pub fn lambda_est(nu: &[f64], eps: f64, delta: f64) -> Result<f64> {
    let atoms: Vec<(u64, f64)> = nu.iter().enumerate().map(|(i, &p)| (i as u64, p)).collect();
    lambda_est_sparse(&atoms, eps, delta)
}

pub fn lambda_est_sparse(nu: &[(u64, f64)], eps: f64, delta: f64) -> Result<f64> {
    let sol = tilt_root_sparse(nu, eps, delta / 4.0, delta, eps)?;
    if !(sol.lambda > 0.0 && sol.lambda < 1.0) {
        return Err(Error::OutOfDomain {
            what: "lambda",
            value: sol.lambda,
        });
    }
    Ok(sol.lambda)
}

/// The law of X̂^{(c,s)}, with pgf G_c(tb)/G_c(b), as (value, probability).
pub fn tilted_law(nu: &[(u64, f64)], c: f64, b: f64) -> Vec<(i64, f64)> {
    let mut atoms: Vec<(i64, f64)> = nu
        .iter()
        .filter(|a| a.1 > 0.0)
        .map(|&(i, p)| (i as i64 - 1, p))
        .collect();
    match atoms.iter_mut().find(|a| a.0 == 0) {
        Some(a) => a.1 += c,
        None => atoms.push((0, c)),
    }
    let y = b.ln();
    let (lz, _) = log_mgf(&atoms, y);
    atoms
        .iter()
        .map(|&(x, p)| (x, (p.ln() + x as f64 * y - lz).exp()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub n: u64,
    pub a_n: u64,
    pub b_n: f64,
    /// n ℓ*(a_n)
    pub upper: f64,
    /// None when n ℓ*(a_n) ≤ 1
    pub h_n: Option<f64>,
    pub v_bn: Option<f64>,
}

pub fn scaling_row(d: &OffspringDist, n: u64) -> Result<ScalingRow> {
    let a = a_n(d, n);
    let b = b_n(d, n)?;
    let upper = n as f64 * d.tail_moment(a);
    let h = h_n(d, n).ok();
    let v_bn = if b >= 1.0 { Some(big_v(d, b)?) } else { None };
    Ok(ScalingRow {
        n,
        a_n: a,
        b_n: b,
        upper,
        h_n: h,
        v_bn,
    })
}
