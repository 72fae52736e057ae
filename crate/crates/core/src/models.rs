//! The three closed-form models: free radial motion, the radial oscillator and
//! the Morse oscillator, with their bases, potentials and known ground states.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::{CoefficientFamily, ShapeInvariantModel};
use crate::special::{lgamma, LaguerreIter};

/// Model parameters. `lambda` / `gamma` is the free basis scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Kinetic {
        l: u32,
        lambda: f64,
    },
    Oscillator {
        l: u32,
        omega: f64,
        lambda: f64,
    },
    Morse {
        alpha: f64,
        #[serde(rename = "D")]
        depth: f64,
        gamma: f64,
    },
}

/// Which potential of a partner pair to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    V,
    VPlus,
}

impl ModelParams {
    /// Morse parameters from the well depth `V₀` instead of `D`.
    pub fn morse_from_v0(alpha: f64, v0: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(v0 > 0.0) {
            return Err(Error::InvalidParameter(format!("need alpha > 0 and V0 > 0, got {alpha}, {v0}")));
        }
        Ok(ModelParams::Morse {
            alpha,
            depth: (2.0 * v0).sqrt() / alpha - 0.5,
            gamma,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::Kinetic { .. } => "kinetic",
            ModelParams::Oscillator { .. } => "oscillator",
            ModelParams::Morse { .. } => "morse",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            ModelParams::Kinetic { lambda, .. } if !(lambda > 0.0 && lambda.is_finite()) => {
                bad(format!("lambda must be positive, got {lambda}"))
            }
            ModelParams::Oscillator { omega, lambda, .. } => {
                if !(omega > 0.0 && omega.is_finite()) {
                    bad(format!("omega must be positive, got {omega}"))
                } else if !(lambda > 0.0 && lambda.is_finite()) {
                    bad(format!("lambda must be positive, got {lambda}"))
                } else {
                    Ok(())
                }
            }
            ModelParams::Morse { alpha, depth, gamma } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    bad(format!("alpha must be positive, got {alpha}"))
                } else if !(depth > 0.5 && depth.is_finite()) {
                    bad(format!("D must exceed 1/2, got {depth}"))
                } else if !(gamma > 0.0 && gamma.is_finite()) {
                    bad(format!("gamma must be positive, got {gamma}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Non-fatal remarks about degenerate parameter choices.
    pub fn warnings(&self) -> Vec<String> {
        match *self {
            ModelParams::Oscillator { omega, lambda, .. } if lambda * lambda == omega => {
                vec!["lambda^2 = omega: c_n = 0, the chain is decoupled (basis is already the eigenbasis)".into()]
            }
            ModelParams::Kinetic { .. } => {
                vec!["kinetic model has epsilon_1 = 0 (continuous spectrum); only parameter identities apply".into()]
            }
            _ => vec![],
        }
    }

    /// Shape parameter `η` (`ν = l + ½` for radial models, `D` for Morse).
    pub fn eta(&self) -> f64 {
        match *self {
            ModelParams::Kinetic { l, .. } | ModelParams::Oscillator { l, .. } => l as f64 + 0.5,
            ModelParams::Morse { depth, .. } => depth,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            ModelParams::Morse { .. } => -1.0,
            _ => 1.0,
        }
    }

    /// Parameters at `η + δ` (`l → l+1`, or `D → D-1`).
    pub fn shifted(&self) -> Self {
        match *self {
            ModelParams::Kinetic { l, lambda } => ModelParams::Kinetic { l: l + 1, lambda },
            ModelParams::Oscillator { l, omega, lambda } => ModelParams::Oscillator { l: l + 1, omega, lambda },
            ModelParams::Morse { alpha, depth, gamma } => ModelParams::Morse {
                alpha,
                depth: depth - 1.0,
                gamma,
            },
        }
    }

    /// Same model with a different free basis scale.
    pub fn with_basis_scale(&self, s: f64) -> Self {
        match *self {
            ModelParams::Kinetic { l, .. } => ModelParams::Kinetic { l, lambda: s },
            ModelParams::Oscillator { l, omega, .. } => ModelParams::Oscillator { l, omega, lambda: s },
            ModelParams::Morse { alpha, depth, .. } => ModelParams::Morse { alpha, depth, gamma: s },
        }
    }

    /// Morse well depth `V₀ = α²(D+½)²/2`.
    pub fn v0(&self) -> Option<f64> {
        match *self {
            ModelParams::Morse { alpha, depth, .. } => Some(alpha * alpha * (depth + 0.5).powi(2) / 2.0),
            _ => None,
        }
    }

    /// True for models whose coordinate is a radius `r > 0`.
    pub fn is_radial(&self) -> bool {
        !matches!(self, ModelParams::Morse { .. })
    }
}

/// `c_n² = p (n + η + 1)`, `d_n² = q n`: the radial families.
#[derive(Debug)]
struct RadialFamily {
    p: f64,
    q: f64,
    sign: f64,
}

impl CoefficientFamily for RadialFamily {
    fn c_sq(&self, n: usize, eta: f64) -> f64 {
        self.p * (n as f64 + eta + 1.0)
    }

    fn d_sq(&self, n: usize) -> f64 {
        self.q * n as f64
    }

    fn c_sign(&self, _n: usize, _eta: f64) -> f64 {
        self.sign
    }
}

/// `c_n² = (α²/2)(n + γ + ½ - η)²`, `d_n² = (α²/2) n (n + 2γ)`.
#[derive(Debug)]
struct MorseFamily {
    alpha: f64,
    gamma: f64,
}

impl CoefficientFamily for MorseFamily {
    fn c_sq(&self, n: usize, eta: f64) -> f64 {
        0.5 * self.alpha * self.alpha * (n as f64 + self.gamma + 0.5 - eta).powi(2)
    }

    fn d_sq(&self, n: usize) -> f64 {
        let n = n as f64;
        0.5 * self.alpha * self.alpha * n * (n + 2.0 * self.gamma)
    }

    /// `c_n ∝ (η - γ - ½ - n)`, the sign that makes the ground-state series
    /// coefficients `(γ + ½ - D)_n / √(n! (2γ+1)_n)` come out positive.
    fn c_sign(&self, n: usize, eta: f64) -> f64 {
        if eta - self.gamma - 0.5 - n as f64 >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Levels increase while `m < D + ½`.
    fn window(&self, eta: f64) -> Option<usize> {
        Some(((eta + 0.5).ceil() - 1.0).max(0.0) as usize)
    }
}

/// The shape-invariant descriptor for a parameter set.
pub fn make_model(p: &ModelParams) -> Result<ShapeInvariantModel> {
    p.validate()?;
    let family: Arc<dyn CoefficientFamily> = match *p {
        ModelParams::Kinetic { lambda, .. } => Arc::new(RadialFamily {
            p: lambda * lambda / 2.0,
            q: lambda * lambda / 2.0,
            sign: 1.0,
        }),
        ModelParams::Oscillator { omega, lambda, .. } => {
            let minus = lambda - omega / lambda;
            let plus = lambda + omega / lambda;
            Arc::new(RadialFamily {
                p: minus * minus / 2.0,
                q: plus * plus / 2.0,
                sign: if minus < 0.0 { -1.0 } else { 1.0 },
            })
        }
        ModelParams::Morse { alpha, gamma, .. } => Arc::new(MorseFamily { alpha, gamma }),
    };
    Ok(ShapeInvariantModel::new(p.name(), p.eta(), p.delta(), family))
}

fn radial_check(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radial coordinate must be positive, got r={x}")))
    }
}

/// Basis variable, Laguerre index and `ln` of the `n`-independent prefactor
/// `ln(K_0 · y^{power} e^{-y/2})` at `x`, where `φ_n = K_n/K_0 · prefactor · L_n(arg)`.
struct BasisPoint {
    arg: f64,
    index: f64,
    ln_prefactor: f64,
    /// `K_{n+1}/K_n = √((n+1)/(n + index + 1))`
    ratio_shift: f64,
}

fn basis_point(p: &ModelParams, x: f64) -> Result<BasisPoint> {
    match *p {
        ModelParams::Kinetic { l, lambda } | ModelParams::Oscillator { l, lambda, .. } => {
            radial_check(x)?;
            let nu = l as f64 + 0.5;
            let y = lambda * x;
            Ok(BasisPoint {
                arg: y * y,
                index: nu,
                ln_prefactor: 0.5 * ((2.0 * lambda).ln() - lgamma(nu + 1.0)) + (nu + 0.5) * y.ln() - 0.5 * y * y,
                ratio_shift: nu,
            })
        }
        ModelParams::Morse { alpha, gamma, .. } => {
            let y = morse_zeta(p, x);
            let two_g = 2.0 * gamma;
            Ok(BasisPoint {
                arg: y,
                index: two_g,
                ln_prefactor: 0.5 * (alpha.ln() - lgamma(two_g + 1.0)) + (gamma + 0.5) * y.ln() - 0.5 * y,
                ratio_shift: two_g,
            })
        }
    }
}

/// Morse basis variable `ζ = (2D+1) e^{-αx}` (equal to `√(8V₀)/α · e^{-αx}`).
pub fn morse_zeta(p: &ModelParams, x: f64) -> f64 {
    match *p {
        ModelParams::Morse { alpha, depth, .. } => (2.0 * depth + 1.0) * (-alpha * x).exp(),
        _ => f64::NAN,
    }
}

/// `φ_n(x)`.
pub fn basis_eval(p: &ModelParams, n: usize, x: f64) -> Result<f64> {
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    basis_series(p, &coeffs, x)
}

/// `Σ_n coeffs[n] φ_n(x)`, streaming the Laguerre recurrence and `K_n` ratios.
pub fn basis_series(p: &ModelParams, coeffs: &[f64], x: f64) -> Result<f64> {
    let bp = basis_point(p, x)?;
    let mut k_ratio = 1.0;
    let mut sum = 0.0;
    for (n, (l, &q)) in LaguerreIter::new(bp.index, bp.arg).zip(coeffs).enumerate() {
        sum += q * k_ratio * l;
        k_ratio *= ((n + 1) as f64 / (n as f64 + bp.ratio_shift + 1.0)).sqrt();
    }
    Ok(sum * bp.ln_prefactor.exp())
}

/// `[φ_0(x), ..., φ_n(x)]`.
pub fn basis_values(p: &ModelParams, n: usize, x: f64) -> Result<Vec<f64>> {
    let bp = basis_point(p, x)?;
    let pref = bp.ln_prefactor.exp();
    let mut k_ratio = 1.0;
    Ok(LaguerreIter::new(bp.index, bp.arg)
        .take(n + 1)
        .enumerate()
        .map(|(k, l)| {
            let v = pref * k_ratio * l;
            k_ratio *= ((k + 1) as f64 / (k as f64 + bp.ratio_shift + 1.0)).sqrt();
            v
        })
        .collect())
}

/// Oscillator eigenfunction
/// `χ_m(r) = √(2√ω m!/Γ(m+ν+1)) (√ω r)^{l+1} e^{-ωr²/2} L_m^{(ν)}(ωr²)`.
pub fn eigenstate_eval_oscillator(p: &ModelParams, m: usize, r: f64) -> Result<f64> {
    match *p {
        ModelParams::Oscillator { l, omega, .. } => {
            // the eigenbasis is the basis with λ = √ω
            basis_eval(&ModelParams::Oscillator { l, omega, lambda: omega.sqrt() }, m, r)
        }
        _ => Err(Error::Unsupported {
            operation: "closed-form eigenstates",
            model: p.name(),
        }),
    }
}

/// `V(x)` or `V⁺(x)`, with the ground energy of `V` at zero.
pub fn potential_eval(p: &ModelParams, which: Potential, x: f64) -> Result<f64> {
    match *p {
        ModelParams::Kinetic { l, .. } => {
            radial_check(x)?;
            let l = l as f64;
            let num = match which {
                Potential::V => l * (l + 1.0),
                Potential::VPlus => (l + 1.0) * (l + 2.0),
            };
            Ok(num / (2.0 * x * x))
        }
        ModelParams::Oscillator { l, omega, .. } => {
            radial_check(x)?;
            let l = l as f64;
            let (centrifugal, offset) = match which {
                Potential::V => (l * (l + 1.0), l + 1.5),
                Potential::VPlus => ((l + 1.0) * (l + 2.0), l + 0.5),
            };
            Ok(centrifugal / (2.0 * x * x) + 0.5 * omega * omega * x * x - offset * omega)
        }
        ModelParams::Morse { alpha, depth, .. } => {
            let e = (-alpha * x).exp();
            let s = match which {
                Potential::V => depth + 0.5,
                Potential::VPlus => depth - 0.5,
            };
            Ok(0.5 * alpha * alpha * (s * s * (e * e - 2.0 * e) + depth * depth))
        }
    }
}

/// Known normalized ground state (oscillator and Morse).
pub fn ground_state_closed_form(p: &ModelParams, x: f64) -> Result<f64> {
    match *p {
        ModelParams::Oscillator { .. } => eigenstate_eval_oscillator(p, 0, x),
        ModelParams::Morse { alpha, depth, .. } => {
            let z = morse_zeta(p, x);
            Ok((0.5 * (alpha.ln() - lgamma(2.0 * depth)) + depth * z.ln() - 0.5 * z).exp())
        }
        ModelParams::Kinetic { .. } => Err(Error::Unsupported {
            operation: "normalizable ground state",
            model: "kinetic",
        }),
    }
}

/// Known superpotential `W = -ψ₀'/(√2 ψ₀)`.
pub fn superpotential_closed_form(p: &ModelParams, x: f64) -> Result<f64> {
    match *p {
        ModelParams::Oscillator { l, omega, .. } => {
            radial_check(x)?;
            Ok((omega * x - (l as f64 + 1.0) / x) / SQRT_2)
        }
        ModelParams::Morse { alpha, depth, .. } => Ok(alpha / (2.0 * SQRT_2) * (2.0 * depth - morse_zeta(p, x))),
        ModelParams::Kinetic { .. } => Err(Error::Unsupported {
            operation: "superpotential",
            model: "kinetic",
        }),
    }
}

/// Translation `x₀` such that `W² + W'/√2` at `x` equals the tabulated Morse
/// `V⁺` at `x - x₀`: `x₀ = ln((2D+1)/(2D-1))/α`. Zero for radial models.
pub fn partner_origin_shift(p: &ModelParams) -> f64 {
    match *p {
        ModelParams::Morse { alpha, depth, .. } => ((2.0 * depth + 1.0) / (2.0 * depth - 1.0)).ln() / alpha,
        _ => 0.0,
    }
}

/// Sampled real function on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionGrid {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl WavefunctionGrid {
    pub fn new(x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x.len() != values.len() {
            return Err(Error::InvalidParameter(format!("{} grid points but {} values", x.len(), values.len())));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at x={}", x[i])));
        }
        Ok(Self { x, values })
    }

    /// Evaluates `f` on `x`, propagating the first error.
    pub fn tabulate(x: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = x.iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
        Self::new(x.to_vec(), values)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `x,value` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.x.iter().zip(&self.values) {
            out.push_str(&format!("{x:.10e},{v:.16e}\n"));
        }
        out
    }
}

/// `n` equally spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}
