//! Special-function kernel: log-gamma, Pochhammer symbols, generalized
//! Laguerre polynomials and the terminating Gauss hypergeometric series.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(lgamma(x))
}

/// Unchecked `ln Γ(x)`, `x > 0`. Lanczos (g = 7) with reflection below 1/2.
pub(crate) fn lgamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - lgamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln n!`, exact summation for small `n`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 32 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        lgamma(n as f64 + 1.0)
    }
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

/// Generalized Laguerre polynomial `L_n^{(ν)}(x)` by upward recurrence in `n`.
pub fn laguerre(n: usize, nu: f64, x: f64) -> f64 {
    LaguerreIter::new(nu, x).nth(n).unwrap_or(f64::NAN)
}

/// `[L_0^{(ν)}(x), ..., L_n^{(ν)}(x)]`.
pub fn laguerre_sequence(n: usize, nu: f64, x: f64) -> Vec<f64> {
    LaguerreIter::new(nu, x).take(n + 1).collect()
}

/// Streams `L_0^{(ν)}(x), L_1^{(ν)}(x), ...` using
/// `(k+1) L_{k+1} = (2k+1+ν-x) L_k - (k+ν) L_{k-1}`.
#[derive(Debug, Clone)]
pub struct LaguerreIter {
    nu: f64,
    x: f64,
    k: usize,
    prev: f64,
    curr: f64,
}

impl LaguerreIter {
    pub fn new(nu: f64, x: f64) -> Self {
        Self {
            nu,
            x,
            k: 0,
            prev: 0.0,
            curr: 1.0,
        }
    }
}

impl Iterator for LaguerreIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.curr;
        let k = self.k as f64;
        let next = if self.k == 0 {
            1.0 + self.nu - self.x
        } else {
            ((2.0 * k + 1.0 + self.nu - self.x) * self.curr - (k + self.nu) * self.prev) / (k + 1.0)
        };
        self.prev = self.curr;
        self.curr = next;
        self.k += 1;
        Some(out)
    }
}

/// Terminating `₂F₁(-m, b; c; z) = Σ_{k=0}^{m} (-m)_k (b)_k / ((c)_k k!) z^k`.
///
/// The series also stops early when `b` is a non-positive integer. A vanishing
/// denominator `(c)_k` reached before termination is a domain error.
pub fn hyp2f1_terminating(m: usize, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..m {
        let kf = k as f64;
        if b + kf == 0.0 {
            break;
        }
        if c + kf == 0.0 {
            return Err(Error::Domain(format!(
                "2F1 denominator (c)_k vanishes at k={} before the series terminates (c={c})",
                k + 1
            )));
        }
        term *= (kf - m as f64) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
    }
    Ok(sum)
}

/// Partial sum `Σ_{n=0}^{N} t^n L_n^{(ν)}(u)` of the Laguerre generating series.
pub fn laguerre_generating_sum(nu: f64, t: f64, u: f64, terms: usize) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "generating series needs |t| < 1, got t={t}"
        )));
    }
    let mut power = 1.0;
    let mut sum = 0.0;
    for l in LaguerreIter::new(nu, u).take(terms + 1) {
        sum += power * l;
        power *= t;
    }
    Ok(sum)
}
