//! Tridiagonal operators, their ladder factorization `H = A†A`, and the
//! partner `H⁺ = AA†`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix section: diagonal `a_n`, off-diagonal `b_n`,
/// `n = 0..=n_max`. `b[n_max]` couples to the first row outside the section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator")]
pub struct TridiagonalOperator {
    n_max: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    #[serde(skip)]
    decoupled_at: Option<usize>,
}

#[derive(Deserialize)]
struct RawOperator {
    n_max: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<RawOperator> for TridiagonalOperator {
    type Error = Error;

    fn try_from(raw: RawOperator) -> Result<Self> {
        if raw.a.len() != raw.n_max + 1 {
            return Err(Error::InvalidParameter(format!(
                "operator has n_max={} but {} diagonal entries",
                raw.n_max,
                raw.a.len()
            )));
        }
        Self::new(raw.a, raw.b)
    }
}

impl TridiagonalOperator {
    /// Validated constructor. `b` may have `a.len()` entries or one fewer
    /// (then the outgoing coupling is taken as zero).
    pub fn new(a: Vec<f64>, mut b: Vec<f64>) -> Result<Self> {
        let op = Self::checked_shape(a, &mut b)?;
        if let Some(n) = op.decoupled_at {
            return Err(Error::Decoupled { n });
        }
        Ok(op)
    }

    /// Like [`new`](Self::new) but zero off-diagonals are recorded instead of rejected.
    pub fn new_flagged(a: Vec<f64>, mut b: Vec<f64>) -> Result<Self> {
        Self::checked_shape(a, &mut b)
    }

    fn checked_shape(a: Vec<f64>, b: &mut Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidParameter("operator needs at least one row".into()));
        }
        if b.len() + 1 == a.len() {
            b.push(0.0);
        }
        if b.len() != a.len() {
            return Err(Error::InvalidParameter(format!(
                "diagonal has {} entries, off-diagonal {}",
                a.len(),
                b.len()
            )));
        }
        if let Some(n) = a.iter().chain(b.iter()).position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite matrix element at position {n}")));
        }
        let n_max = a.len() - 1;
        let decoupled_at = b[..n_max].iter().position(|&v| v == 0.0);
        Ok(Self {
            n_max,
            a,
            b: std::mem::take(b),
            decoupled_at,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// First `n < n_max` with `b_n = 0`, if any.
    pub fn decoupled_at(&self) -> Option<usize> {
        self.decoupled_at
    }

    pub fn is_decoupled(&self) -> bool {
        self.decoupled_at.is_some()
    }

    /// Adds a constant to the diagonal.
    pub fn shifted(&self, e: f64) -> Self {
        Self {
            a: self.a.iter().map(|v| v + e).collect(),
            ..self.clone()
        }
    }

    /// Matrix–vector product on the section (coefficients beyond `v` are zero).
    pub fn apply(&self, v: &ExpansionVector) -> ExpansionVector {
        let x = &v.coeffs;
        let n = x.len().min(self.n_max + 1);
        let out = (0..n)
            .map(|i| {
                let mut s = self.a[i] * x[i];
                if i > 0 {
                    s += self.b[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.b[i] * x[i + 1];
                }
                s
            })
            .collect();
        ExpansionVector::new(out)
    }

    /// Largest `|a_n - a'_n| / max(|a_n|, floor)` and likewise for `b`, over `n ≤ upto`.
    pub fn max_relative_deviation(&self, other: &Self, upto: usize, floor: f64) -> (f64, f64) {
        let rel = |x: &[f64], y: &[f64]| {
            x.iter()
                .zip(y)
                .take(upto + 1)
                .map(|(p, q)| (p - q).abs() / p.abs().max(floor))
                .fold(0.0, f64::max)
        };
        (rel(&self.a, &other.a), rel(&self.b, &other.b))
    }
}

/// Ladder data: `A|φ_m⟩ = c_m|φ_m⟩ + d_m|φ_{m-1}⟩`. `c` has `n_max+1`
/// entries, `d` has `n_max+2` with `d[0] = 0` and `d_n ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLadder")]
pub struct LadderCoefficients {
    n_max: usize,
    c: Vec<f64>,
    d: Vec<f64>,
}

#[derive(Deserialize)]
struct RawLadder {
    n_max: usize,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl TryFrom<RawLadder> for LadderCoefficients {
    type Error = Error;

    fn try_from(raw: RawLadder) -> Result<Self> {
        if raw.c.len() != raw.n_max + 1 {
            return Err(Error::InvalidParameter(format!(
                "ladder has n_max={} but {} c entries",
                raw.n_max,
                raw.c.len()
            )));
        }
        Self::new(raw.c, raw.d)
    }
}

impl LadderCoefficients {
    pub fn new(c: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if c.is_empty() || d.len() != c.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "ladder needs len(d) = len(c) + 1 >= 2, got {} and {}",
                c.len(),
                d.len()
            )));
        }
        if d[0] != 0.0 {
            return Err(Error::InvalidParameter("ladder requires d_0 = 0".into()));
        }
        if let Some(n) = c.iter().chain(d.iter()).position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite ladder entry at position {n}")));
        }
        if let Some(n) = d.iter().position(|&v| v < 0.0) {
            return Err(Error::Negativity {
                n,
                quantity: "d_n",
                value: d[n],
            });
        }
        Ok(Self {
            n_max: c.len() - 1,
            c,
            d,
        })
    }

    /// Builds from squares, taking `d ≥ 0` and `c_n` with the sign of `c_sign[n]`.
    pub fn from_squares(c_sq: &[f64], d_sq: &[f64], c_sign: impl Fn(usize) -> f64) -> Result<Self> {
        let root = |n: usize, v: f64, q: &'static str| {
            if v < 0.0 {
                Err(Error::Negativity { n, quantity: q, value: v })
            } else {
                Ok(v.sqrt())
            }
        };
        let c = c_sq
            .iter()
            .enumerate()
            .map(|(n, &v)| root(n, v, "c_n^2").map(|r| if c_sign(n) < 0.0 { -r } else { r }))
            .collect::<Result<Vec<_>>>()?;
        let d = d_sq
            .iter()
            .enumerate()
            .map(|(n, &v)| root(n, v, "d_n^2"))
            .collect::<Result<Vec<_>>>()?;
        Self::new(c, d)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn c_sq(&self) -> Vec<f64> {
        self.c.iter().map(|v| v * v).collect()
    }

    pub fn d_sq(&self) -> Vec<f64> {
        self.d.iter().map(|v| v * v).collect()
    }

    /// First `n+1` rows only.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.n_max);
        Self {
            n_max: n,
            c: self.c[..=n].to_vec(),
            d: self.d[..=n + 1].to_vec(),
        }
    }
}

/// State coefficients over the basis `{|φ_n⟩}`, `n = 0..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionVector {
    pub coeffs: Vec<f64>,
}

impl ExpansionVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn unit(n: usize, len: usize) -> Self {
        let mut coeffs = vec![0.0; len];
        coeffs[n] = 1.0;
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Truncation index `N` (`len - 1`).
    pub fn n(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x * y).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|v| v * s).collect())
    }

    /// `max_n |self_n - other_n|` over the common length, treating missing entries as 0.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|i| {
                let x = self.coeffs.get(i).copied().unwrap_or(0.0);
                let y = other.coeffs.get(i).copied().unwrap_or(0.0);
                (x - y).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `P_0..P_N` of the three-term recursion at energy `eps`.
pub fn recursion_polynomials(h: &TridiagonalOperator, eps: f64, n: usize) -> Result<Vec<f64>> {
    if n > h.n_max {
        return Err(Error::Range {
            index: n,
            last: h.n_max,
        });
    }
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    for k in 0..n {
        if h.b[k] == 0.0 {
            return Err(Error::Decoupled { n: k });
        }
        let prev = if k > 0 { h.b[k - 1] * p[k - 1] } else { 0.0 };
        p.push(((eps - h.a[k]) * p[k] - prev) / h.b[k]);
    }
    Ok(p)
}

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Factorizes `H - eps0 = A†A` on rows `0..=n` (`n ≤ n_max`).
///
/// Two sweeps compute `c_n²`: the forward one (`d_0 = 0` upward) and a
/// backward continued fraction seeded at `n_max`. Each carries a running
/// relative-error estimate and the better one is kept per row; the forward
/// sweep is exact in exact arithmetic but amplifies roundoff by `d_n²/c_n²`
/// per step. Signs: `d_n ≥ 0`, `c_n` carries the sign of `b_n`.
pub fn factorize(h: &TridiagonalOperator, eps0: f64, n: usize) -> Result<LadderCoefficients> {
    if n > h.n_max {
        return Err(Error::Range {
            index: n,
            last: h.n_max,
        });
    }
    if let Some(k) = h.decoupled_at.filter(|&k| k < n) {
        return Err(Error::Decoupled { n: k });
    }
    let u = UNIT_ROUNDOFF;
    let alpha: Vec<f64> = h.a.iter().map(|a| a - eps0).collect();

    // forward: c_k² = α_k - b_{k-1}²/c_{k-1}²
    let mut fwd = vec![f64::NAN; n + 1];
    let mut est_f = vec![f64::INFINITY; n + 1];
    for k in 0..=n {
        let (d_sq, prev_est) = if k == 0 {
            (0.0, 0.0)
        } else {
            (h.b[k - 1] * h.b[k - 1] / fwd[k - 1], est_f[k - 1])
        };
        let c_sq = alpha[k] - d_sq;
        fwd[k] = c_sq;
        est_f[k] = (d_sq / c_sq.abs()) * (prev_est + u) + u * alpha[k].abs() / c_sq.abs();
        if c_sq <= 0.0 {
            break;
        }
    }

    // backward from the top of the section
    let top = h.n_max;
    let mut bwd = vec![f64::NAN; top + 1];
    let mut est_b = vec![f64::INFINITY; top + 1];
    {
        let (at, bt) = (alpha[top], h.b[top]);
        let disc = (at * at - 4.0 * bt * bt).max(0.0);
        bwd[top] = if at > 0.0 { 2.0 * bt * bt / (at + disc.sqrt()) } else { f64::NAN };
        est_b[top] = 1.0;
        for k in (1..=top).rev() {
            let d_sq = alpha[k] - bwd[k];
            if !(bwd[k] > 0.0 || (bwd[k] == 0.0 && h.b[k] == 0.0)) || !(d_sq > 0.0) {
                break;
            }
            bwd[k - 1] = h.b[k - 1] * h.b[k - 1] / d_sq;
            est_b[k - 1] = (bwd[k] / d_sq) * est_b[k] + u * alpha[k].abs() / d_sq + 2.0 * u;
        }
    }

    // a reliable backward value at the bottom row must agree with d_0 = 0
    if est_b[0] < 1e-8 && est_b[0].is_finite() {
        let gap = (fwd[0] - bwd[0]).abs() / fwd[0].abs().max(f64::MIN_POSITIVE);
        if gap > 1e-6 + 100.0 * (est_b[0] + est_f[0]) {
            return Err(Error::GroundEnergyMismatch { n: 0, eps0 });
        }
    }

    let mut c_sq = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let use_fwd = est_f[k] <= est_b[k];
        let v = if use_fwd { fwd[k] } else { bwd[k] };
        if v.is_nan() || v < 0.0 {
            return Err(Error::Negativity {
                n: k,
                quantity: "c_n^2",
                value: v,
            });
        }
        c_sq.push(v);
    }
    let mut d_sq = Vec::with_capacity(n + 2);
    d_sq.push(0.0);
    for (k, &c) in c_sq.iter().enumerate().take(n + 1) {
        if c == 0.0 {
            if h.b[k] != 0.0 {
                return Err(Error::Singular { n: k + 1 });
            }
            d_sq.push(0.0);
        } else {
            d_sq.push(h.b[k] * h.b[k] / c);
        }
    }
    let signs: Vec<f64> = h.b.iter().map(|b| if *b < 0.0 { -1.0 } else { 1.0 }).collect();
    LadderCoefficients::from_squares(&c_sq, &d_sq, |k| signs[k])
}

/// `a_n = c_n² + d_n²`, `b_n = c_n d_{n+1}`. Zero couplings are flagged, not rejected.
pub fn compose(l: &LadderCoefficients) -> TridiagonalOperator {
    compose_parts(&l.c, &l.d)
}

/// Composition for generic `(c, d)` sequences where `d_0` need not vanish
/// (hierarchy levels). `d` must have at least `c.len() + 1` entries.
pub fn compose_parts(c: &[f64], d: &[f64]) -> TridiagonalOperator {
    let a = c.iter().zip(d).map(|(c, d)| c * c + d * d).collect();
    let b = c.iter().zip(&d[1..]).map(|(c, d)| c * d).collect();
    TridiagonalOperator::new_flagged(a, b).expect("ladder entries are finite")
}

/// `a⁺_n = c_n² + d_{n+1}²`, `b⁺_n = c_{n+1} d_{n+1}`; the last coupling is unknown and set to 0.
pub fn partner(l: &LadderCoefficients) -> TridiagonalOperator {
    let n = l.n_max;
    let a = (0..=n).map(|k| l.c[k] * l.c[k] + l.d[k + 1] * l.d[k + 1]).collect();
    let b = (0..=n)
        .map(|k| if k < n { l.c[k + 1] * l.d[k + 1] } else { 0.0 })
        .collect();
    TridiagonalOperator::new_flagged(a, b).expect("ladder entries are finite")
}

/// `(Av)_n = c_n v_n + d_{n+1} v_{n+1}` on the first `len(v)` rows.
pub fn apply_a(l: &LadderCoefficients, v: &ExpansionVector) -> ExpansionVector {
    let x = &v.coeffs;
    let n = x.len().min(l.n_max + 1);
    let out = (0..n)
        .map(|k| {
            let up = if k + 1 < x.len() { l.d[k + 1] * x[k + 1] } else { 0.0 };
            l.c[k] * x[k] + up
        })
        .collect();
    ExpansionVector::new(out)
}

/// `(A†v)_n = c_n v_n + d_n v_{n-1}` on the first `len(v)` rows.
pub fn apply_adagger(l: &LadderCoefficients, v: &ExpansionVector) -> ExpansionVector {
    let x = &v.coeffs;
    let n = x.len().min(l.n_max + 1);
    let out = (0..n)
        .map(|k| {
            let down = if k > 0 { l.d[k] * x[k - 1] } else { 0.0 };
            l.c[k] * x[k] + down
        })
        .collect();
    ExpansionVector::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ladder(c_sq: impl Fn(f64) -> f64, d_sq: impl Fn(f64) -> f64, sign: f64, n_max: usize) -> LadderCoefficients {
        let c: Vec<f64> = (0..=n_max).map(|n| c_sq(n as f64)).collect();
        let d: Vec<f64> = (0..=n_max + 1).map(|n| d_sq(n as f64)).collect();
        LadderCoefficients::from_squares(&c, &d, |_| sign).unwrap()
    }

    fn oscillator_like(n_max: usize) -> LadderCoefficients {
        // ω = 1, λ = 2, l = 0
        ladder(|n| 1.125 * (n + 1.5), |n| 3.125 * n, 1.0, n_max)
    }

    fn morse_like(n_max: usize) -> LadderCoefficients {
        // α = 1, γ = 2, D = 2
        ladder(|n| 0.5 * (n + 0.5).powi(2), |n| 0.5 * n * (n + 4.0), -1.0, n_max)
    }

    #[test]
    fn polynomials_seed_and_hand_recursion() {
        let h = TridiagonalOperator::new(vec![1.0, 3.0, 5.0], vec![-1.0, -2.0, -3.0]).unwrap();
        assert_eq!(recursion_polynomials(&h, 0.0, 0).unwrap(), vec![1.0]);
        let p = recursion_polynomials(&h, 0.0, 2).unwrap();
        assert_eq!(p, vec![1.0, 1.0, 1.0]);
        assert_eq!(recursion_polynomials(&h, 1.0, 1).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(recursion_polynomials(&h, 0.0, 3), Err(Error::Range { .. })));
    }

    #[test]
    fn decoupled_operator_rejected() {
        let err = TridiagonalOperator::new(vec![1.0, 2.0, 3.0], vec![1.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::Decoupled { n: 1 });
        let flagged = TridiagonalOperator::new_flagged(vec![1.0, 2.0, 3.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(flagged.decoupled_at(), Some(1));
    }

    #[test]
    fn polynomials_nonzero_on_oscillator_chain() {
        let h = compose(&oscillator_like(60));
        let p = recursion_polynomials(&h, 0.0, 40).unwrap();
        assert!(p.iter().all(|v| *v != 0.0));
    }

    #[test]
    fn factorization_via_polynomials_at_low_order() {
        // c_n² = -b_n P_{n+1}/P_n directly, where forward evaluation is still accurate
        let l = oscillator_like(30);
        let h = compose(&l);
        let p = recursion_polynomials(&h, 0.0, 6).unwrap();
        for n in 0..5 {
            let c_sq = -h.b()[n] * p[n + 1] / p[n];
            assert_relative_eq!(c_sq, 1.125 * (n as f64 + 1.5), max_relative = 1e-10);
            let d_sq = -h.b()[n] * p[n] / p[n + 1];
            assert_relative_eq!(d_sq, 3.125 * (n as f64 + 1.0), max_relative = 1e-10);
        }
    }

    #[test]
    fn factorize_recovers_oscillator_closed_forms() {
        let h = compose(&oscillator_like(400));
        let l = factorize(&h, 0.0, 40).unwrap();
        for n in 0..=40 {
            assert_relative_eq!(l.c_sq()[n], 1.125 * (n as f64 + 1.5), max_relative = 1e-10);
            assert_relative_eq!(l.d_sq()[n + 1], 3.125 * (n as f64 + 1.0), max_relative = 1e-10);
        }
    }

    #[test]
    fn factorize_recovers_morse_closed_forms() {
        let h = compose(&morse_like(400));
        let l = factorize(&h, 0.0, 40).unwrap();
        for n in 0..=40 {
            let nf = n as f64;
            assert_relative_eq!(l.c_sq()[n], 0.5 * (nf + 0.5).powi(2), max_relative = 1e-10);
            assert_relative_eq!(l.d_sq()[n + 1], 0.5 * (nf + 1.0) * (nf + 5.0), max_relative = 1e-10);
            assert!(l.c()[n] < 0.0);
        }
    }

    #[test]
    fn factorize_with_offset_ground_energy() {
        let h = compose(&morse_like(200)).shifted(0.5);
        let l = factorize(&h, 0.5, 20).unwrap();
        assert_relative_eq!(l.c_sq()[3], 0.5 * 3.5f64.powi(2), max_relative = 1e-10);
    }

    #[test]
    fn factorize_rejects_energy_above_ground() {
        let h = compose(&oscillator_like(200));
        let err = factorize(&h, 0.3, 40).unwrap_err();
        assert!(matches!(err, Error::Negativity { .. } | Error::GroundEnergyMismatch { .. }), "{err:?}");
    }

    #[test]
    fn factorize_rejects_energy_below_ground() {
        let h = compose(&oscillator_like(200));
        let err = factorize(&h, -0.3, 40).unwrap_err();
        assert!(matches!(err, Error::GroundEnergyMismatch { .. }), "{err:?}");
    }

    #[test]
    fn factorize_non_psd_input() {
        let h = TridiagonalOperator::new(vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 0.0]).unwrap();
        assert!(matches!(factorize(&h, 0.0, 2), Err(Error::Negativity { n: 1, .. })));
    }

    #[test]
    fn compose_examples() {
        let l = morse_like(4);
        let h = compose(&l);
        assert_relative_eq!(h.a()[0], 0.125, max_relative = 1e-15);
        assert_relative_eq!(h.b()[0], -(0.125f64).sqrt() * 2.5f64.sqrt(), max_relative = 1e-15);
        let zero = LadderCoefficients::new(vec![0.0; 3], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let h = compose(&zero);
        assert_eq!(h.a(), &[0.0, 1.0, 4.0]);
        assert!(h.is_decoupled());
        let hp = partner(&zero);
        assert_eq!(hp.a(), &[1.0, 4.0, 9.0]);
        assert!(hp.b().iter().all(|b| *b == 0.0));
    }

    #[test]
    fn partner_of_oscillator_is_shifted_copy() {
        // c_n²(η+1) = c_{n+1}²(η) and ε₁ = 2
        let l = oscillator_like(40);
        let hp = partner(&l);
        let shifted = compose(&ladder(|n| 1.125 * (n + 2.5), |n| 3.125 * n, 1.0, 40));
        for n in 0..39 {
            assert_relative_eq!(hp.a()[n] - shifted.a()[n], 2.0, max_relative = 1e-12);
            assert_relative_eq!(hp.b()[n], shifted.b()[n], max_relative = 1e-12);
        }
    }

    #[test]
    fn ladder_actions_on_unit_vectors() {
        let l = oscillator_like(10);
        let e0 = ExpansionVector::unit(0, 5);
        assert_eq!(apply_a(&l, &e0).coeffs, vec![l.c()[0], 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(apply_adagger(&l, &e0).coeffs, vec![l.c()[0], l.d()[1], 0.0, 0.0, 0.0]);
    }

    #[test]
    fn products_reproduce_h_and_partner() {
        let l = morse_like(20);
        let h = compose(&l);
        let hp = partner(&l);
        let len = 21;
        for n in 0..=len - 3 {
            let e = ExpansionVector::unit(n, len);
            let col = apply_adagger(&l, &apply_a(&l, &e));
            let col_p = apply_a(&l, &apply_adagger(&l, &e));
            let want = h.apply(&e);
            let want_p = hp.apply(&e);
            for k in 0..=len - 3 {
                assert!((col.coeffs[k] - want.coeffs[k]).abs() <= 1e-10 * want.coeffs[k].abs().max(1.0));
                assert!((col_p.coeffs[k] - want_p.coeffs[k]).abs() <= 1e-10 * want_p.coeffs[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn json_shapes() {
        let l = oscillator_like(2);
        let s = serde_json::to_value(&l).unwrap();
        assert_eq!(s["n_max"], 2);
        assert_eq!(s["c"].as_array().unwrap().len(), 3);
        let back: LadderCoefficients = serde_json::from_value(s).unwrap();
        assert_eq!(back, l);
        let h = compose(&l);
        let s = serde_json::to_string(&h).unwrap();
        assert!(s.starts_with("{\"n_max\":2,\"a\":["));
        let back: TridiagonalOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back.a(), h.a());
        let bad = r#"{"n_max":2,"a":[1,2,3],"b":[1,0,1]}"#;
        assert!(serde_json::from_str::<TridiagonalOperator>(bad).is_err());
    }

    proptest! {
        #[test]
        fn compose_factorize_roundtrip(
            c in prop::collection::vec(1.0f64..2.0, 3..10),
            d_tail in prop::collection::vec(1.0f64..2.0, 10),
        ) {
            let n = c.len() - 1;
            let mut d = vec![0.0];
            d.extend_from_slice(&d_tail[..=n]);
            let l = LadderCoefficients::new(c, d).unwrap();
            let back = factorize(&compose(&l), 0.0, n).unwrap();
            for k in 0..=n {
                prop_assert!((back.c_sq()[k] - l.c_sq()[k]).abs() <= 1e-7 * l.c_sq()[k]);
                prop_assert!((back.d_sq()[k + 1] - l.d_sq()[k + 1]).abs() <= 1e-7 * l.d_sq()[k + 1]);
            }
        }

        #[test]
        fn adjointness(
            u in prop::collection::vec(-1.0f64..1.0, 12),
            v in prop::collection::vec(-1.0f64..1.0, 12),
        ) {
            // keep support away from the truncation edge
            let l = morse_like(20);
            let mut u = u; u.extend([0.0; 4]);
            let mut v = v; v.extend([0.0; 4]);
            let (u, v) = (ExpansionVector::new(u), ExpansionVector::new(v));
            let lhs = apply_adagger(&l, &u).dot(&v);
            let rhs = u.dot(&apply_a(&l, &v));
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }
    }
}
