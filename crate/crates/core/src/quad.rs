//! Exp-sinh quadrature for smooth integrands on a half line, plus the small
//! compensated accumulator used for long tail sums.

use std::f64::consts::FRAC_PI_2;

/// ∫_a^∞ f(t) dt via t = a + exp(π/2 sinh τ), trapezoid in τ with step
/// halving until two successive levels agree to ~1e-15.
pub(crate) fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64) -> f64 {
    const TAU_MAX: f64 = 4.5;
    let term = |tau: f64| -> f64 {
        let e = FRAC_PI_2 * tau.sinh();
        let x = e.exp();
        let w = FRAC_PI_2 * tau.cosh() * x;
        let v = f(a + x);
        if w == 0.0 || v == 0.0 || !w.is_finite() {
            0.0
        } else {
            v * w
        }
    };
    let mut h = 0.5;
    let n0 = (TAU_MAX / h) as i64;
    let mut sum = Kahan::default();
    for k in -n0..=n0 {
        sum.add(term(k as f64 * h));
    }
    let mut prev = sum.value() * h;
    for _ in 0..9 {
        h *= 0.5;
        let n = (TAU_MAX / h) as i64;
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        while k <= n {
            sum.add(term(k as f64 * h));
            k += 2;
        }
        let cur = sum.value() * h;
        if (cur - prev).abs() <= 1e-15 * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// 8-point Gauss–Legendre on [a, b].
pub(crate) fn gauss_legendre8<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut s = 0.0;
    for i in 0..4 {
        s += W[i] * (f(m - r * X[i]) + f(m + r * X[i]));
    }
    s * r
}

/// 3-point Gauss–Legendre on [a, b].
pub(crate) fn gauss_legendre3<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let x = (0.6f64).sqrt();
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    r * (5.0 * f(m - r * x) + 8.0 * f(m) + 5.0 * f(m + r * x)) / 9.0
}

/// Kahan–Babuška compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
