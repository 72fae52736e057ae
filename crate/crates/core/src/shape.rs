//! Consequences of shape invariance: ε₁, the spectrum and its partner,
//! `[B, B†]`, the partner hierarchy and the inverse spectrum → chain map.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{compose, compose_parts, partner, LadderCoefficients, TridiagonalOperator};

/// Closed-form ladder squares of one model family, `c_n²(η)` and `d_n²`.
pub trait CoefficientFamily: Send + Sync + fmt::Debug {
    fn c_sq(&self, n: usize, eta: f64) -> f64;

    fn d_sq(&self, n: usize) -> f64;

    /// Sign attached to `c_n(η)`; `d_n` is always taken nonnegative.
    fn c_sign(&self, _n: usize, _eta: f64) -> f64 {
        1.0
    }

    /// Last bound-state index at this `η`, if the family has a finite window.
    fn window(&self, _eta: f64) -> Option<usize> {
        None
    }
}

/// A family evaluated at a concrete `η`, with shift `δ`.
#[derive(Debug, Clone)]
pub struct ShapeInvariantModel {
    pub label: String,
    pub eta: f64,
    pub delta: f64,
    family: Arc<dyn CoefficientFamily>,
}

impl ShapeInvariantModel {
    pub fn new(label: impl Into<String>, eta: f64, delta: f64, family: Arc<dyn CoefficientFamily>) -> Self {
        Self {
            label: label.into(),
            eta,
            delta,
            family,
        }
    }

    /// Same family at `η + kδ`.
    pub fn shifted(&self, k: i64) -> Self {
        Self {
            eta: self.eta + k as f64 * self.delta,
            ..self.clone()
        }
    }

    pub fn c_sq(&self, n: usize) -> f64 {
        self.family.c_sq(n, self.eta)
    }

    pub fn d_sq(&self, n: usize) -> f64 {
        self.family.d_sq(n)
    }

    pub fn c(&self, n: usize) -> f64 {
        self.family.c_sign(n, self.eta) * self.c_sq(n).max(0.0).sqrt()
    }

    pub fn d(&self, n: usize) -> f64 {
        self.d_sq(n).max(0.0).sqrt()
    }

    pub fn m_max(&self) -> Option<usize> {
        self.family.window(self.eta)
    }

    /// Ladder coefficients on rows `0..=n_max`.
    pub fn ladder(&self, n_max: usize) -> Result<LadderCoefficients> {
        let c: Vec<f64> = (0..=n_max).map(|n| self.c_sq(n)).collect();
        let d: Vec<f64> = (0..=n_max + 1).map(|n| self.d_sq(n)).collect();
        LadderCoefficients::from_squares(&c, &d, |n| self.family.c_sign(n, self.eta))
    }

    /// `H = A†A` on rows `0..=n_max`.
    pub fn operator(&self, n_max: usize) -> Result<TridiagonalOperator> {
        Ok(compose(&self.ladder(n_max)?))
    }

    /// Copy with `c_n² += amount` at a single index (for defect-detection checks).
    pub fn with_perturbation(&self, n: usize, amount: f64) -> Self {
        Self {
            label: format!("{} (c_{n}^2 {amount:+})", self.label),
            family: Arc::new(Perturbed {
                inner: self.family.clone(),
                index: n,
                amount,
            }),
            ..self.clone()
        }
    }
}

#[derive(Debug)]
struct Perturbed {
    inner: Arc<dyn CoefficientFamily>,
    index: usize,
    amount: f64,
}

impl CoefficientFamily for Perturbed {
    fn c_sq(&self, n: usize, eta: f64) -> f64 {
        let v = self.inner.c_sq(n, eta);
        if n == self.index {
            v + self.amount
        } else {
            v
        }
    }

    fn d_sq(&self, n: usize) -> f64 {
        self.inner.d_sq(n)
    }

    fn c_sign(&self, n: usize, eta: f64) -> f64 {
        self.inner.c_sign(n, eta)
    }

    fn window(&self, eta: f64) -> Option<usize> {
        self.inner.window(eta)
    }
}

/// `m ↦ ε_m`, with `ε_0 = 0` and an optional last valid index.
#[derive(Clone)]
pub struct SpectrumFunction {
    eval: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    pub m_max: Option<usize>,
}

impl fmt::Debug for SpectrumFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectrumFunction").field("m_max", &self.m_max).finish_non_exhaustive()
    }
}

impl SpectrumFunction {
    pub fn new(eval: impl Fn(usize) -> f64 + Send + Sync + 'static, m_max: Option<usize>) -> Self {
        Self {
            eval: Arc::new(eval),
            m_max,
        }
    }

    /// Tabulated levels `ε_0, ε_1, ...`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter("spectrum needs at least ε_0 and ε_1".into()));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidParameter(format!("spectrum must start at ε_0 = 0, got {}", values[0])));
        }
        let m_max = values.len() - 1;
        Ok(Self::new(move |m| values[m], Some(m_max)))
    }

    /// The closed-form spectrum of a model, limited to its window.
    pub fn of_model(model: &ShapeInvariantModel) -> Self {
        let m = model.clone();
        Self::new(move |k| closed_form_level(&m, k), model.m_max())
    }

    pub fn get(&self, m: usize) -> Result<f64> {
        match self.m_max {
            Some(last) if m > last => Err(Error::Range { index: m, last }),
            _ => Ok((self.eval)(m)),
        }
    }
}

fn check_window(model: &ShapeInvariantModel, m: usize) -> Result<()> {
    match model.m_max() {
        Some(last) if m > last => Err(Error::Range { index: m, last }),
        _ => Ok(()),
    }
}

fn closed_form_level(model: &ShapeInvariantModel, m: usize) -> f64 {
    if m == 0 {
        0.0
    } else {
        (model.c_sq(0) - model.c_sq(m)) + m as f64 * model.d_sq(1)
    }
}

/// `ε₁(η) = (c_0² - c_1²) + d_1²`.
pub fn epsilon1(model: &ShapeInvariantModel) -> f64 {
    (model.c_sq(0) - model.c_sq(1)) + model.d_sq(1)
}

/// Per-row values `(c_n² - c_{n+1}²) + (d_{n+1}² - d_n²) - ε₁`, `n = 0..=n`.
pub fn epsilon1_row_deviations(model: &ShapeInvariantModel, n: usize) -> Vec<f64> {
    let e1 = epsilon1(model);
    (0..=n)
        .map(|k| (model.c_sq(k) - model.c_sq(k + 1)) + (model.d_sq(k + 1) - model.d_sq(k)) - e1)
        .collect()
}

/// Largest `|row value - ε₁|` over rows `n ≤ N`.
pub fn epsilon1_n_independence(model: &ShapeInvariantModel, n: usize) -> f64 {
    epsilon1_row_deviations(model, n).into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// `ε_m = (c_0² - c_m²) + m d_1²`.
pub fn spectrum(model: &ShapeInvariantModel, m: usize) -> Result<f64> {
    check_window(model, m)?;
    Ok(closed_form_level(model, m))
}

/// `|Σ_{k<m} ε₁(η + kδ) - ε_m|`.
pub fn telescoping_check(model: &ShapeInvariantModel, m: usize) -> Result<f64> {
    let sum: f64 = (0..m).map(|k| epsilon1(&model.shifted(k as i64))).sum();
    Ok((sum - spectrum(model, m)?).abs())
}

/// `ε⁺_m(η) = ε_m(η + δ) + ε₁(η)`.
pub fn partner_spectrum(model: &ShapeInvariantModel, m: usize) -> Result<f64> {
    check_window(model, m + 1)?;
    Ok(closed_form_level(&model.shifted(1), m) + epsilon1(model))
}

/// Diagonal of `[B, B†]` at row `n`: `[c_{n-1}² + d_{n+1}²] - [c_n² + d_n²]`,
/// with `c_{-1}²(η)` read as `c_0²(η - δ)`.
pub fn commutator_diagonal(model: &ShapeInvariantModel, n: usize) -> f64 {
    let c_prev = if n == 0 {
        model.shifted(-1).c_sq(0)
    } else {
        model.c_sq(n - 1)
    };
    (c_prev + model.d_sq(n + 1)) - (model.c_sq(n) + model.d_sq(n))
}

/// Row-wise deviations of a two-sequence identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Residual {
    pub fn max_a(&self) -> f64 {
        self.a.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_b(&self) -> f64 {
        self.b.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.max_a().max(self.max_b())
    }
}

/// `a⁺_n(η) - a_n(η+δ) - ε₁(η)` and `b⁺_n(η) - b_n(η+δ)` over rows `n ≤ N-2`.
pub fn shape_invariance_residual(model: &ShapeInvariantModel, n: usize) -> Result<Residual> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("residual needs N >= 2, got {n}")));
    }
    let hp = partner(&model.ladder(n)?);
    let hs = model.shifted(1).operator(n)?;
    let e1 = epsilon1(model);
    let rows = 0..=n - 2;
    Ok(Residual {
        a: rows.clone().map(|k| hp.a()[k] - hs.a()[k] - e1).collect(),
        b: rows.map(|k| hp.b()[k] - hs.b()[k]).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelKind {
    /// `H̃^{k(+)}`: re-zeroed, ground energy 0.
    ZeroedPartner,
    /// `H^{(k+1)(+)}`: partner of the level-`k` zeroed operator.
    ShiftedPartner,
}

/// One row of the partner hierarchy on rows `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyLevel {
    pub level: usize,
    pub kind: LevelKind,
    pub c_like: Vec<f64>,
    pub d_like: Vec<f64>,
    pub ground_energy: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl HierarchyLevel {
    /// Symbolic rules for the `(c, d)` columns.
    pub fn rules(&self) -> (String, String) {
        let k = self.level;
        let idx = |s: &str, off: usize| if off == 0 { format!("{s}_n") } else { format!("{s}_(n+{off})") };
        match self.kind {
            LevelKind::ZeroedPartner => (idx("c", k), idx("d", 0)),
            LevelKind::ShiftedPartner => (idx("d", 1), idx("c", k)),
        }
    }
}

/// Level `k` of the hierarchy: the zeroed operator `(c_{n+k}, d_n)` with ground
/// energy 0, and its partner `(d_{n+1}, c_{n+k})` whose ground energy is
/// `ε₁(η + kδ)`.
pub fn hierarchy(model: &ShapeInvariantModel, k: usize, n_max: usize) -> (HierarchyLevel, HierarchyLevel) {
    let c: Vec<f64> = (0..=n_max + k + 1).map(|n| model.c(n)).collect();
    let d: Vec<f64> = (0..=n_max + 2).map(|n| model.d(n)).collect();

    let zc: Vec<f64> = (0..=n_max).map(|n| c[n + k]).collect();
    let zd: Vec<f64> = (0..=n_max + 1).map(|n| d[n]).collect();
    let zh = compose_parts(&zc, &zd);
    let zeroed = HierarchyLevel {
        level: k,
        kind: LevelKind::ZeroedPartner,
        a: zh.a().to_vec(),
        b: zh.b().to_vec(),
        c_like: zc,
        d_like: zd,
        ground_energy: 0.0,
    };

    let pc: Vec<f64> = (0..=n_max).map(|n| d[n + 1]).collect();
    let pd: Vec<f64> = (0..=n_max + 1).map(|n| c[n + k]).collect();
    let ph = compose_parts(&pc, &pd);
    let shifted = HierarchyLevel {
        level: k,
        kind: LevelKind::ShiftedPartner,
        a: ph.a().to_vec(),
        b: ph.b().to_vec(),
        c_like: pc,
        d_like: pd,
        ground_energy: epsilon1(&model.shifted(k as i64)),
    };
    (zeroed, shifted)
}

/// `H^{(k+1)(+)}(η) - H̃^{k(+)}(η+δ) - ε₁(η+kδ)` on rows `n ≤ N-2`.
pub fn hierarchy_residual(model: &ShapeInvariantModel, k: usize, n: usize) -> Result<Residual> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("residual needs N >= 2, got {n}")));
    }
    let (_, upper) = hierarchy(model, k, n);
    let (lower, _) = hierarchy(&model.shifted(1), k, n);
    let rows = 0..=n - 2;
    Ok(Residual {
        a: rows.clone().map(|i| upper.a[i] - lower.a[i] - upper.ground_energy).collect(),
        b: rows.map(|i| upper.b[i] - lower.b[i]).collect(),
    })
}

/// Rebuilds the chain from its spectrum and two seeds:
/// `d_{m+1}² = (m+1) d_1² + [(m+1) ε₁ - ε_{m+1}]`,
/// `c_{m+1}² = c_0² + [(m+1) d_1² - ε_{m+1}]`, returned on rows `0..=M`.
pub fn inverse_construct(spec: &SpectrumFunction, c0_sq: f64, d1_sq: f64, m: usize) -> Result<LadderCoefficients> {
    let e0 = spec.get(0)?;
    if e0 != 0.0 {
        return Err(Error::InvalidParameter(format!("spectrum must start at ε_0 = 0, got {e0}")));
    }
    let e1 = spec.get(1)?;
    let mut c_sq = vec![c0_sq];
    let mut d_sq = vec![0.0, d1_sq];
    for j in 1..=m {
        let jf = j as f64;
        let ej = spec.get(j)?;
        c_sq.push(c0_sq + (jf * d1_sq - ej));
        let ej1 = spec.get(j + 1)?;
        d_sq.push((jf + 1.0) * d1_sq + ((jf + 1.0) * e1 - ej1));
    }
    LadderCoefficients::from_squares(&c_sq, &d_sq, |_| 1.0)
}

/// Spectrum recovered from a constructed chain: `ε_m = (c_0² - c_m²) + m d_1²`.
pub fn spectrum_from_ladder(l: &LadderCoefficients) -> Vec<f64> {
    let c = l.c_sq();
    let d1 = l.d_sq()[1];
    (0..=l.n_max()).map(|m| (c[0] - c[m]) + m as f64 * d1).collect()
}
