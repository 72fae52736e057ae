//! States built from the ladder data: the ground-state series and its
//! wavefunction, oscillator eigenvectors and the raising/lowering ladder,
//! coherent states, the moment condition and the superpotential.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{basis_series, make_model, ModelParams, WavefunctionGrid};
use crate::operator::{apply_a, apply_adagger, ExpansionVector, LadderCoefficients};
use crate::quadrature::gauss_laguerre;
use crate::shape::{epsilon1, ShapeInvariantModel};
use crate::special::{lgamma, ln_factorial, pochhammer, LaguerreIter};

/// Ground state over the basis: `|ε₀⟩ = Λ₀ Σ Q_n |φ_n⟩`, `Q_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateExpansion {
    pub q: Vec<f64>,
    pub lambda0: f64,
    /// `Λ₀² Q_N²`, a rough size of the neglected tail.
    pub tail: f64,
}

impl GroundStateExpansion {
    pub fn n(&self) -> usize {
        self.q.len() - 1
    }

    /// Normalized coefficients `Λ₀ Q_n`.
    pub fn vector(&self) -> ExpansionVector {
        ExpansionVector::new(self.q.iter().map(|q| q * self.lambda0).collect())
    }
}

/// `Q_n = Π_{j<n} (-c_j / d_{j+1})` for `n ≤ N`, and `Λ₀ = (Σ Q_n²)^{-1/2}`.
pub fn ground_state_from_ladder(l: &LadderCoefficients, n: usize) -> Result<GroundStateExpansion> {
    if n > l.n_max() {
        return Err(Error::Range {
            index: n,
            last: l.n_max(),
        });
    }
    let mut q = Vec::with_capacity(n + 1);
    q.push(1.0);
    for j in 0..n {
        let d = l.d()[j + 1];
        if d == 0.0 {
            return Err(Error::Singular { n: j + 1 });
        }
        q.push(q[j] * (-l.c()[j] / d));
    }
    // ratio test over the last stretch of terms
    let window = (n / 4).clamp(1, 10);
    if n >= 8 {
        let ratios: Vec<f64> = (n - window..n)
            .filter(|&k| q[k] != 0.0)
            .map(|k| (q[k + 1] / q[k]).abs())
            .collect();
        if !ratios.is_empty() && ratios.iter().all(|&r| r >= 1.0) {
            return Err(Error::Divergence {
                n,
                ratio: ratios[ratios.len() - 1],
            });
        }
    }
    let norm_sq: f64 = q.iter().map(|v| v * v).sum();
    let lambda0 = norm_sq.sqrt().recip();
    Ok(GroundStateExpansion {
        tail: (lambda0 * q[n]).powi(2),
        q,
        lambda0,
    })
}

pub fn ground_state_coefficients(model: &ShapeInvariantModel, n: usize) -> Result<GroundStateExpansion> {
    ground_state_from_ladder(&model.ladder(n)?, n)
}

/// `‖A|ε₀⟩‖` over rows `n ≤ N-2` (the last rows see the truncated tail).
pub fn annihilation_residual(model: &ShapeInvariantModel, n: usize) -> Result<f64> {
    let l = model.ladder(n)?;
    let g = ground_state_from_ladder(&l, n)?;
    let r = apply_a(&l, &g.vector());
    Ok(r.coeffs[..n.saturating_sub(1)].iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `ψ₀(x) = Λ₀ Σ_{n≤N} Q_n φ_n(x)` on `grid`.
pub fn ground_wavefunction(p: &ModelParams, grid: &[f64], n: usize) -> Result<WavefunctionGrid> {
    let g = ground_state_coefficients(&make_model(p)?, n)?;
    let coeffs: Vec<f64> = g.vector().coeffs;
    WavefunctionGrid::tabulate(grid, |x| basis_series(p, &coeffs, x))
}

/// Partial sum `Σ_{n≤N} (γ+½-D)_n/(2γ+1)_n L_n^{(2γ)}(ζ)` of the Morse ground-state
/// series with the basis normalization stripped, and its limit
/// `ζ^{D-γ-½} Γ(2γ+1)/Γ(γ+½+D)`.
pub fn morse_laguerre_series(p: &ModelParams, zeta: f64, n: usize) -> Result<(f64, f64)> {
    let ModelParams::Morse { depth, gamma, .. } = *p else {
        return Err(Error::Unsupported {
            operation: "Morse ground-state series",
            model: p.name(),
        });
    };
    let a = gamma + 0.5 - depth;
    let c = 2.0 * gamma + 1.0;
    let mut coef = 1.0;
    let mut sum = 0.0;
    for (k, lag) in LaguerreIter::new(2.0 * gamma, zeta).take(n + 1).enumerate() {
        sum += coef * lag;
        coef *= (a + k as f64) / (c + k as f64);
    }
    let limit = ((depth - gamma - 0.5) * zeta.ln() + lgamma(c) - lgamma(gamma + 0.5 + depth)).exp();
    Ok((sum, limit))
}

fn oscillator_parts(p: &ModelParams) -> Result<(f64, f64, f64)> {
    match *p {
        ModelParams::Oscillator { l, omega, lambda } => Ok((l as f64 + 0.5, omega, lambda)),
        _ => Err(Error::Unsupported {
            operation: "oscillator overlaps",
            model: p.name(),
        }),
    }
}

/// `Γ_{n,m} = ⟨φ_n | ε_m⟩` for the oscillator: the `n`-th basis coefficient of
/// the `m`-th eigenstate, in closed form (a terminating ₂F₁ in `t²`,
/// `t = (ω-λ²)/(ω+λ²)`, summed term by term in log space).
pub fn oscillator_overlap(p: &ModelParams, n: usize, m: usize) -> Result<f64> {
    let (nu, omega, lambda) = oscillator_parts(p)?;
    let s = lambda * lambda;
    let t = (omega - s) / (omega + s);
    if t == 0.0 {
        return Ok(if n == m { 1.0 } else { 0.0 });
    }
    let ln_pref = 0.5
        * ((4.0 * lambda * omega.sqrt()).ln() + ln_factorial(n) + ln_factorial(m)
            - lgamma(n as f64 + nu + 1.0)
            - lgamma(m as f64 + nu + 1.0))
        + (nu + 0.5) * (lambda * omega.sqrt()).ln()
        - 2f64.ln()
        - (nu + 1.0) * ((omega + s) / 2.0).ln();
    let ln_t = t.abs().ln();
    let mut sum = 0.0;
    for k in 0..=n.min(m) {
        let power = n + m - 2 * k;
        let ln_term = lgamma((n + m) as f64 + nu + 1.0 - k as f64)
            - ln_factorial(m - k)
            - ln_factorial(n - k)
            - ln_factorial(k)
            + power as f64 * ln_t;
        let mut sign = if (m + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        if t < 0.0 && !power.is_multiple_of(2) {
            sign = -sign;
        }
        sum += sign * (ln_term + ln_pref).exp();
    }
    Ok(sum)
}

/// Column `m` of the overlap matrix: `[Γ_{0,m}, ..., Γ_{N,m}]`.
pub fn oscillator_eigenvector(p: &ModelParams, m: usize, n: usize) -> Result<ExpansionVector> {
    let coeffs = (0..=n).map(|k| oscillator_overlap(p, k, m)).collect::<Result<Vec<_>>>()?;
    Ok(ExpansionVector::new(coeffs))
}

/// `√(Σ_{k≤m} ε₁(η + kδ))`, the norm of `B†|ε_m⟩`.
pub fn raising_normalization(model: &ShapeInvariantModel, m: usize) -> f64 {
    (0..=m).map(|k| epsilon1(&model.shifted(k as i64))).sum::<f64>().sqrt()
}

/// `|ε_{m+1}⟩ = B†|ε_m⟩ / √(Σ_{k≤m} ε₁(η+kδ))` with `B† = A† T†`.
///
/// `T†` carries the state to `η + δ`: `v` is resolved on the eigenvectors
/// `Γ_{·,k}(η)`, `k ≤ m + 12`, and rebuilt from `Γ_{·,k}(η+δ)`. Only the
/// oscillator has these overlaps in closed form.
pub fn raise_state(p: &ModelParams, v: &ExpansionVector, m: usize) -> Result<ExpansionVector> {
    oscillator_parts(p).map_err(|_| Error::Unsupported {
        operation: "raise_state",
        model: p.name(),
    })?;
    let model = make_model(p)?;
    let n = v.n();
    let k_top = (m + 12).min(n);
    let up = p.shifted();
    let mut shifted = vec![0.0; n + 1];
    for k in 0..=k_top {
        let amp = oscillator_eigenvector(p, k, n)?.dot(v);
        if amp == 0.0 {
            continue;
        }
        for (s, g) in shifted.iter_mut().zip(oscillator_eigenvector(&up, k, n)?.coeffs) {
            *s += amp * g;
        }
    }
    let raised = apply_adagger(&model.ladder(n)?, &ExpansionVector::new(shifted));
    Ok(raised.scaled(1.0 / raising_normalization(&model, m)))
}

/// `‖A(η)Γ_{·,m}(η) - √(2mω) Γ_{·,m-1}(η+δ)‖` over rows `n ≤ N`; for `m = 0`
/// the target is zero.
pub fn lowering_check_oscillator(p: &ModelParams, m: usize, n: usize) -> Result<f64> {
    let (_, omega, _) = oscillator_parts(p)?;
    let model = make_model(p)?;
    let col = oscillator_eigenvector(p, m, n + 1)?;
    let edge = col.coeffs[n].abs();
    if edge > 1e-10 {
        return Err(Error::Truncation {
            n,
            tail: edge,
            tolerance: 1e-10,
        });
    }
    let lowered = apply_a(&model.ladder(n + 1)?, &col);
    let target = if m == 0 {
        ExpansionVector::new(vec![0.0; n + 1])
    } else {
        oscillator_eigenvector(&p.shifted(), m - 1, n)?.scaled((2.0 * m as f64 * omega).sqrt())
    };
    Ok((0..=n)
        .map(|k| (lowered.coeffs[k] - target.coeffs[k]).powi(2))
        .sum::<f64>()
        .sqrt())
}

fn check_window(model: &ShapeInvariantModel, n: usize) -> Result<()> {
    match model.m_max() {
        Some(last) if n > last => Err(Error::Range { index: n, last }),
        _ => Ok(()),
    }
}

/// `ln Π_{j<n} Σ_{k=j}^{n-1} ε₁(η + kδ)`.
pub fn ln_product_term(model: &ShapeInvariantModel, n: usize) -> Result<f64> {
    check_window(model, n)?;
    let e: Vec<f64> = (0..n).map(|k| epsilon1(&model.shifted(k as i64))).collect();
    let mut acc = 0.0;
    let mut partial = 0.0;
    // partial sums from the top: Σ_{k=j}^{n-1}
    for j in (0..n).rev() {
        partial += e[j];
        if !(partial > 0.0) {
            return Err(Error::Domain(format!(
                "partial energy sum {partial} is not positive at j={j}"
            )));
        }
        acc += partial.ln();
    }
    Ok(acc)
}

/// `Π_{j<n} Σ_{k=j}^{n-1} ε₁(η + kδ)`; 1 for `n = 0`.
pub fn product_term(model: &ShapeInvariantModel, n: usize) -> Result<f64> {
    ln_product_term(model, n).map(f64::exp)
}

/// Coherent state over the energy eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub z: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl CoherentState {
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl Serialize for CoherentState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            z: [f64; 2],
            n: usize,
            real: Vec<f64>,
            imag: Vec<f64>,
        }
        Repr {
            z: [self.z.re, self.z.im],
            n: self.coeffs.len().saturating_sub(1),
            real: self.coeffs.iter().map(|c| c.re).collect(),
            imag: self.coeffs.iter().map(|c| c.im).collect(),
        }
        .serialize(s)
    }
}

/// `⟨ε_n|z⟩ = e^{-|z|² ε₁(η-δ)/2} zⁿ/n! √(product_term(n))`, `n ≤ N`.
pub fn coherent_coefficients(model: &ShapeInvariantModel, z: Complex64, n: usize) -> Result<CoherentState> {
    check_window(model, n)?;
    let e_back = epsilon1(&model.shifted(-1));
    let r = z.norm();
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if r == 0.0 {
            coeffs.push(if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
            continue;
        }
        let ln_mag = -0.5 * r * r * e_back + k as f64 * r.ln() - ln_factorial(k) + 0.5 * ln_product_term(model, k)?;
        coeffs.push(Complex64::from_polar(ln_mag.exp(), k as f64 * z.arg()));
    }
    Ok(CoherentState { z, coeffs })
}

/// Outcome of a moment-condition check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCheck {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

/// `∫₀^∞ xⁿ e^{-x ε₁(η-δ)} ρ(x) dx` against `2 (n!)² / product_term(n)`.
///
/// The exponential is absorbed into a Gauss–Laguerre weight; the rule with
/// `nodes` points is compared with one of `2·nodes` points.
pub fn moment_check(model: &ShapeInvariantModel, rho: &dyn Fn(f64) -> f64, n: usize, nodes: usize) -> Result<MomentCheck> {
    let w = epsilon1(&model.shifted(-1));
    if !(w > 0.0) {
        return Err(Error::Domain(format!("moment weight needs ε₁(η-δ) > 0, got {w}")));
    }
    let rhs = 2.0 * (2.0 * ln_factorial(n) - ln_product_term(model, n)?).exp();
    let integral = |k: usize| {
        gauss_laguerre(k, 0.0).apply(|y| {
            let x = y / w;
            x.powi(n as i32) * rho(x)
        }) / w
    };
    let coarse = integral(nodes);
    let fine = integral(2 * nodes);
    if (coarse - fine).abs() > 1e-10 * fine.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Quadrature { coarse, fine });
    }
    Ok(MomentCheck {
        n,
        lhs: fine,
        rhs,
        rel_error: (fine - rhs).abs() / rhs.abs(),
    })
}

/// Superpotential on a grid: the series channel and a finite-difference channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperpotentialGrid {
    pub x: Vec<f64>,
    /// `W̃` from the ladder series; only the Morse basis carries it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<f64>>,
    /// `-ψ₀'/(√2 ψ₀)` with a five-point derivative of the series `ψ₀`.
    pub finite_difference: Vec<f64>,
}

impl SuperpotentialGrid {
    /// The series channel where available, otherwise the finite-difference one.
    pub fn best(&self) -> &[f64] {
        self.series.as_deref().unwrap_or(&self.finite_difference)
    }
}

struct SeriesData {
    psi: Vec<f64>,
    wpsi: Option<Vec<f64>>,
    scale: f64,
    h: f64,
}

// The antisymmetric combination d_n φ_{n-1} - d_{n+1} φ_{n+1} stands for
// √2 d/dx only in the Morse basis; the radial bases get no series channel.
fn superpotential_series(p: &ModelParams, n: usize, h: f64) -> Result<SeriesData> {
    let model = make_model(p)?;
    let l = model.ladder(n + 1)?;
    let g = ground_state_from_ladder(&l, n)?;
    let d = l.d();
    let q = &g.q;
    let wpsi = matches!(p, ModelParams::Morse { .. }).then(|| {
        // W̃ψ₀ = -½ Λ₀ Σ_k [Q_{k+1} d_{k+1} - Q_{k-1} d_k] φ_k
        (0..=n + 1)
            .map(|k| {
                let up = if k < n { q[k + 1] * d[k + 1] } else { 0.0 };
                let down = if k >= 1 { q[k - 1] * d[k] } else { 0.0 };
                -0.5 * g.lambda0 * (up - down)
            })
            .collect()
    });
    Ok(SeriesData {
        psi: g.vector().coeffs,
        wpsi,
        scale: 0.0,
        h,
    })
}

fn five_point(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

fn psi_checked(p: &ModelParams, s: &SeriesData, x: f64) -> Result<f64> {
    let psi = basis_series(p, &s.psi, x)?;
    if psi.abs() <= s.scale || psi == 0.0 {
        return Err(Error::Domain(format!("ground state vanishes near x={x}; W is undefined")));
    }
    Ok(psi)
}

fn fd_w(p: &ModelParams, s: &SeriesData, x: f64) -> Result<f64> {
    let psi = psi_checked(p, s, x)?;
    Ok(-five_point(|y| basis_series(p, &s.psi, y), x, s.h)? / (SQRT_2 * psi))
}

fn best_w(p: &ModelParams, s: &SeriesData, x: f64) -> Result<f64> {
    match &s.wpsi {
        Some(wpsi) => Ok(basis_series(p, wpsi, x)? / psi_checked(p, s, x)?),
        None => fd_w(p, s, x),
    }
}

fn prepare(p: &ModelParams, grid: &[f64], n: usize, h: f64) -> Result<SeriesData> {
    let mut s = superpotential_series(p, n, h)?;
    let peak = grid
        .iter()
        .map(|&x| basis_series(p, &s.psi, x).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    s.scale = 1e-12 * peak;
    Ok(s)
}

/// `W̃(x)` on `grid` from the ground-state series (`N` terms), with the
/// finite-difference cross-check at step `h`.
pub fn superpotential_eval(p: &ModelParams, grid: &[f64], n: usize, h: f64) -> Result<SuperpotentialGrid> {
    let s = prepare(p, grid, n, h)?;
    let series = match s.wpsi {
        Some(_) => Some(grid.iter().map(|&x| best_w(p, &s, x)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    let finite_difference = grid.iter().map(|&x| fd_w(p, &s, x)).collect::<Result<Vec<_>>>()?;
    Ok(SuperpotentialGrid {
        x: grid.to_vec(),
        series,
        finite_difference,
    })
}

/// `V^{(∓)} = W̃² ∓ W̃'/√2` with `W̃'` by five-point differences (step `h`) of
/// the best available `W̃`.
pub fn reconstructed_potentials(p: &ModelParams, grid: &[f64], n: usize, h: f64) -> Result<(WavefunctionGrid, WavefunctionGrid)> {
    let s = prepare(p, grid, n, h)?;
    let mut minus = Vec::with_capacity(grid.len());
    let mut plus = Vec::with_capacity(grid.len());
    for &x in grid {
        let w = best_w(p, &s, x)?;
        let dw = five_point(|y| best_w(p, &s, y), x, h)?;
        minus.push(w * w - dw / SQRT_2);
        plus.push(w * w + dw / SQRT_2);
    }
    Ok((
        WavefunctionGrid::new(grid.to_vec(), minus)?,
        WavefunctionGrid::new(grid.to_vec(), plus)?,
    ))
}

/// `Γ(γ+½+D)/√(Γ(2γ+1)Γ(2D))`, the Morse normalization in closed form.
pub fn morse_lambda0_closed_form(p: &ModelParams) -> Result<f64> {
    match *p {
        ModelParams::Morse { depth, gamma, .. } => {
            Ok((lgamma(gamma + 0.5 + depth) - 0.5 * (lgamma(2.0 * gamma + 1.0) + lgamma(2.0 * depth))).exp())
        }
        _ => Err(Error::Unsupported {
            operation: "Morse normalization",
            model: p.name(),
        }),
    }
}

/// `(γ+½-D)_n / √(n! (2γ+1)_n)`.
pub fn morse_q_closed_form(p: &ModelParams, n: usize) -> Result<f64> {
    match *p {
        ModelParams::Morse { depth, gamma, .. } => {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            Ok(pochhammer(gamma + 0.5 - depth, n) / (fact * pochhammer(2.0 * gamma + 1.0, n)).sqrt())
        }
        _ => Err(Error::Unsupported {
            operation: "Morse series coefficients",
            model: p.name(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{basis_eval, eigenstate_eval_oscillator, ground_state_closed_form, linspace, superpotential_closed_form};
    use crate::quadrature::integrate;
    use crate::shape::spectrum;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const HO: ModelParams = ModelParams::Oscillator { l: 0, omega: 1.0, lambda: 2.0 };
    const HO15: ModelParams = ModelParams::Oscillator { l: 0, omega: 1.0, lambda: 1.5 };
    const MORSE: ModelParams = ModelParams::Morse { alpha: 1.0, depth: 2.0, gamma: 2.0 };

    fn gamma_fn(x: f64) -> f64 {
        lgamma(x).exp()
    }

    #[test]
    fn oscillator_q_closed_form() {
        let g = ground_state_coefficients(&make_model(&HO).unwrap(), 30).unwrap();
        let nu = 0.5;
        for n in 0..=30 {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let want = (-0.6f64).powi(n as i32) * (gamma_fn(n as f64 + nu + 1.0) / (fact * gamma_fn(nu + 1.0))).sqrt();
            assert_relative_eq!(g.q[n], want, max_relative = 1e-12);
        }
    }

    #[test]
    fn morse_q_and_normalization() {
        let g = ground_state_coefficients(&make_model(&MORSE).unwrap(), 2000).unwrap();
        for n in 0..40 {
            assert_relative_eq!(g.q[n], morse_q_closed_form(&MORSE, n).unwrap(), max_relative = 1e-12);
        }
        let want = gamma_fn(4.5) / (gamma_fn(5.0) * gamma_fn(4.0)).sqrt();
        assert_relative_eq!(morse_lambda0_closed_form(&MORSE).unwrap(), want, max_relative = 1e-13);
        assert_relative_eq!(g.lambda0, want, max_relative = 1e-6);
    }

    #[test]
    fn kinetic_series_diverges() {
        let ke = make_model(&ModelParams::Kinetic { l: 0, lambda: 1.0 }).unwrap();
        assert!(matches!(ground_state_coefficients(&ke, 60), Err(Error::Divergence { .. })));
    }

    #[test]
    fn annihilation() {
        for p in [HO, MORSE] {
            assert!(annihilation_residual(&make_model(&p).unwrap(), 60).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn oscillator_ground_wavefunction() {
        let grid = linspace(0.05, 6.0, 120);
        let exact = WavefunctionGrid::tabulate(&grid, |r| ground_state_closed_form(&HO, r)).unwrap();
        for lambda in [1.3, 2.0] {
            let p = HO.with_basis_scale(lambda);
            let psi = ground_wavefunction(&p, &grid, 80).unwrap();
            assert!(psi.max_abs_diff(&exact) <= 1e-7, "lambda={lambda}");
        }
        let norm = integrate(
            |r| basis_series(&HO, &ground_state_coefficients(&make_model(&HO).unwrap(), 80).unwrap().vector().coeffs, r).unwrap().powi(2),
            1e-9,
            10.0,
            20,
            16,
        );
        assert_relative_eq!(norm, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn morse_exact_case_is_single_term() {
        // γ + ½ = D: Q_n = 0 for n ≥ 1 and φ₀ is already the ground state
        let p = ModelParams::Morse { alpha: 1.0, depth: 2.0, gamma: 1.5 };
        let g = ground_state_coefficients(&make_model(&p).unwrap(), 10).unwrap();
        assert!(g.q[1..].iter().all(|q| *q == 0.0));
        for &x in &[-1.0, 0.3, 2.0] {
            assert_relative_eq!(basis_eval(&p, 0, x).unwrap(), ground_state_closed_form(&p, x).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn morse_series_limit() {
        for &z in &[0.5, 1.0, 2.0] {
            let (sum, limit) = morse_laguerre_series(&MORSE, z, 400).unwrap();
            assert!((sum - limit).abs() <= 1e-3 * limit.abs(), "zeta={z}: {sum} vs {limit}");
        }
    }

    #[test]
    fn overlaps_match_quadrature() {
        for p in [HO15, ModelParams::Oscillator { l: 1, omega: 2.0, lambda: 0.9 }] {
            for n in 0..6 {
                for m in 0..4 {
                    let q = integrate(
                        |r| basis_eval(&p, n, r).unwrap() * eigenstate_eval_oscillator(&p, m, r).unwrap(),
                        1e-12,
                        14.0,
                        28,
                        20,
                    );
                    assert!((oscillator_overlap(&p, n, m).unwrap() - q).abs() < 1e-10, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn overlap_identity_at_matched_scale() {
        let p = ModelParams::Oscillator { l: 0, omega: 2.25, lambda: 1.5 };
        assert_eq!(oscillator_overlap(&p, 3, 3).unwrap(), 1.0);
        assert_eq!(oscillator_overlap(&p, 2, 3).unwrap(), 0.0);
        assert!(lowering_check_oscillator(&p, 2, 40).unwrap() <= 1e-10);
    }

    #[test]
    fn eigenvectors_are_eigenvectors() {
        let model = make_model(&HO15).unwrap();
        let h = model.operator(60).unwrap();
        for m in 0..4 {
            let v = oscillator_eigenvector(&HO15, m, 60).unwrap();
            assert_relative_eq!(v.norm(), 1.0, max_relative = 1e-12);
            let hv = h.apply(&v);
            let e = spectrum(&model, m).unwrap();
            for n in 0..58 {
                assert!((hv.coeffs[n] - e * v.coeffs[n]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lowering_identity() {
        for m in 1..=3 {
            assert!(lowering_check_oscillator(&HO15, m, 60).unwrap() <= 1e-7, "m={m}");
        }
        assert!(lowering_check_oscillator(&HO15, 0, 60).unwrap() <= 1e-8);
        assert!(matches!(lowering_check_oscillator(&HO, 1, 10), Err(Error::Truncation { .. })));
        assert!(matches!(lowering_check_oscillator(&MORSE, 1, 10), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn raising_from_ground_state() {
        let model = make_model(&HO15).unwrap();
        let v0 = oscillator_eigenvector(&HO15, 0, 60).unwrap();
        let v1 = raise_state(&HO15, &v0, 0).unwrap();
        let target = oscillator_eigenvector(&HO15, 1, 60).unwrap();
        assert!(v1.dot(&target).abs() >= 1.0 - 1e-6);
        assert_relative_eq!(v1.norm(), 1.0, max_relative = 1e-6);
        let hv = model.operator(60).unwrap().apply(&v1);
        for n in 0..58 {
            assert!((hv.coeffs[n] - 2.0 * v1.coeffs[n]).abs() < 1e-6);
        }
        let v2 = raise_state(&HO15, &v1, 1).unwrap();
        assert!(v2.dot(&oscillator_eigenvector(&HO15, 2, 60).unwrap()).abs() >= 1.0 - 1e-6);
        assert!(matches!(raise_state(&MORSE, &v0, 0), Err(Error::Unsupported { .. })));
        assert_relative_eq!(raising_normalization(&make_model(&MORSE).unwrap(), 1), 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn product_terms() {
        let ho = make_model(&HO).unwrap();
        assert_eq!(product_term(&ho, 0).unwrap(), 1.0);
        assert_relative_eq!(product_term(&ho, 3).unwrap(), 48.0, max_relative = 1e-13);
        for &d in &[2.0, 3.7, 6.0] {
            let p = ModelParams::Morse { alpha: 0.8, depth: d, gamma: 1.0 };
            let m = make_model(&p).unwrap();
            for n in 0..=m.m_max().unwrap() {
                let nf = n as f64;
                let want = (nf * (0.32f64).ln() + ln_factorial(n) + lgamma(2.0 * d - nf + 1.0) - lgamma(2.0 * d - 2.0 * nf + 1.0)).exp();
                assert_relative_eq!(product_term(&m, n).unwrap(), want, max_relative = 1e-10);
            }
            assert!(matches!(product_term(&m, m.m_max().unwrap() + 1), Err(Error::Range { .. })));
        }
    }

    #[test]
    fn coherent_states() {
        let ho = make_model(&HO).unwrap();
        let zero = coherent_coefficients(&ho, Complex64::new(0.0, 0.0), 10).unwrap();
        assert_eq!(zero.coeffs[0], Complex64::new(1.0, 0.0));
        assert!(zero.coeffs[1..].iter().all(|c| c.norm() == 0.0));
        let z = Complex64::new(0.5, 0.0);
        let cs = coherent_coefficients(&ho, z, 60).unwrap();
        for n in 0..10 {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let want = (-0.25f64).exp() * 0.5f64.powi(n as i32) * (2f64.powi(n as i32) / fact).sqrt();
            assert_relative_eq!(cs.coeffs[n].re, want, max_relative = 1e-12);
        }
        for &z in &[Complex64::new(0.3, -0.8), Complex64::from_polar(1.0, 2.0)] {
            let cs = coherent_coefficients(&ho, z, 60).unwrap();
            assert!((cs.norm_sq() - 1.0).abs() <= 1e-8);
        }
        let json = serde_json::to_value(&cs).unwrap();
        assert_eq!(json["real"].as_array().unwrap().len(), 61);
    }

    #[test]
    fn moments() {
        let ho = make_model(&HO).unwrap();
        for n in 0..=8 {
            let r = moment_check(&ho, &|_| 4.0, n, 32).unwrap();
            assert!(r.rel_error <= 1e-8, "n={n}: {r:?}");
        }
        let r = moment_check(&ho, &|_| 4.0, 3, 32).unwrap();
        assert_relative_eq!(r.rhs, 1.5, max_relative = 1e-13);
        let ke = make_model(&ModelParams::Kinetic { l: 0, lambda: 1.0 }).unwrap();
        assert!(moment_check(&ke, &|_| 1.0, 1, 16).is_err());
        // a non-smooth density: the two rules disagree
        assert!(matches!(moment_check(&ho, &|x| if x < 1.0 { 1.0 } else { 0.0 }, 0, 8), Err(Error::Quadrature { .. })));
    }

    #[test]
    fn oscillator_superpotential() {
        let grid = linspace(0.3, 3.0, 28);
        let w = superpotential_eval(&HO15, &grid, 80, 1e-3).unwrap();
        assert!(w.series.is_none());
        for (i, &r) in grid.iter().enumerate() {
            let exact = superpotential_closed_form(&HO15, r).unwrap();
            assert!((w.finite_difference[i] - exact).abs() < 1e-6, "r={r}");
        }
        let (vm, _) = reconstructed_potentials(&HO15, &grid, 80, 1e-2).unwrap();
        for (i, &r) in grid.iter().enumerate() {
            let v = crate::models::potential_eval(&HO15, crate::models::Potential::V, r).unwrap();
            assert!((vm.values[i] - v).abs() < 1e-4, "r={r}");
        }
    }

    #[test]
    fn morse_superpotential() {
        let grid = linspace(-1.0, 3.0, 21);
        let w = superpotential_eval(&MORSE, &grid, 20000, 1e-3).unwrap();
        let series = w.series.as_ref().unwrap();
        for (i, &x) in grid.iter().enumerate() {
            let exact = superpotential_closed_form(&MORSE, x).unwrap();
            assert!((series[i] - exact).abs() < 1e-5, "x={x}: {} vs {exact}", series[i]);
            assert!((series[i] - w.finite_difference[i]).abs() < 1e-4);
        }
    }

    proptest! {
        #[test]
        fn coherent_normalization_any_phase(r in 0.0f64..1.0, phi in -3.2f64..3.2, omega in 0.3f64..2.0) {
            let p = ModelParams::Oscillator { l: 1, omega, lambda: 1.1 };
            let cs = coherent_coefficients(&make_model(&p).unwrap(), Complex64::from_polar(r, phi), 80).unwrap();
            prop_assert!((cs.norm_sq() - 1.0).abs() <= 1e-8);
        }

        #[test]
        fn overlap_columns_orthonormal(lambda in 0.8f64..1.6, m in 0usize..4, k in 0usize..4) {
            let p = ModelParams::Oscillator { l: 0, omega: 1.0, lambda };
            let a = oscillator_eigenvector(&p, m, 90).unwrap();
            let b = oscillator_eigenvector(&p, k, 90).unwrap();
            let want = if m == k { 1.0 } else { 0.0 };
            prop_assert!((a.dot(&b) - want).abs() < 1e-10);
        }
    }
}
