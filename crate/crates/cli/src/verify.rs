//! The `verify` report: every identity, per model, against a fixed threshold.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use shapeinv::models::{
    ground_state_closed_form, linspace, make_model, partner_origin_shift, potential_eval, superpotential_closed_form,
    ModelParams, Potential,
};
use shapeinv::operator::{compose, factorize};
use shapeinv::shape::{
    commutator_diagonal, epsilon1, epsilon1_n_independence, hierarchy_residual, inverse_construct, partner_spectrum,
    shape_invariance_residual, spectrum, telescoping_check, ShapeInvariantModel, SpectrumFunction,
};
use shapeinv::special::{ln_gamma, ln_factorial};
use shapeinv::states::{
    annihilation_residual, coherent_coefficients, ground_wavefunction, lowering_check_oscillator, moment_check,
    product_term, reconstructed_potentials, superpotential_eval,
};

use crate::commands::{offset_deviation, Perturb};
use crate::config::{defaults, Format, ModelKind};
use crate::output::{Report, Table};
use crate::CliError;

/// Identity names and pass thresholds. Algebraic identities are held to
/// roundoff; series and finite-difference checks are looser.
pub const THRESHOLDS: &[(&str, f64)] = &[
    ("factorization_roundtrip", 1e-9),
    ("epsilon1_closed_form", 1e-12),
    ("epsilon1_n_independence", 1e-10),
    ("spectrum_closed_form", 1e-10),
    ("spectrum_telescoping", 1e-10),
    ("partner_spectrum", 1e-10),
    ("commutator_diagonal", 1e-10),
    ("shape_invariance", 1e-9),
    ("hierarchy", 1e-9),
    ("inverse_roundtrip", 1e-10),
    ("ground_state_annihilation", 1e-8),
    ("ground_state_wavefunction", 1e-6),
    ("coherent_vacuum", 0.0),
    ("coherent_normalization", 1e-8),
    ("moment_condition", 1e-8),
    ("product_term_closed_form", 1e-9),
    ("lowering_operator", 1e-7),
    ("superpotential", 1e-5),
    ("partner_potentials", 1e-4),
];

pub fn threshold(name: &str) -> f64 {
    THRESHOLDS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .expect("every check has a threshold")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct Line {
    pub model: &'static str,
    pub identity: &'static str,
    pub deviation: Option<f64>,
    pub threshold: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// Outcome of one check: a deviation, not applicable, or an error.
enum Outcome {
    Value(f64),
    Skip(String),
}

type Check = Result<Outcome, CliError>;

fn val(v: f64) -> Check {
    Ok(Outcome::Value(v))
}

fn skip(why: &str) -> Check {
    Ok(Outcome::Skip(why.into()))
}

/// Series-based checks use at least this many terms for Morse.
const MORSE_TERMS: usize = 20000;

struct Ctx {
    p: ModelParams,
    /// possibly perturbed
    model: ShapeInvariantModel,
    n: usize,
}

impl Ctx {
    fn levels(&self) -> usize {
        match self.model.m_max() {
            Some(w) => w.min(10),
            None => 10,
        }
    }
}

type LevelFn = Box<dyn Fn(usize) -> f64 + Send + Sync>;

/// `(ε₁, ε₁(η-δ), ε_m, ε⁺_m)` as tabulated for each family.
fn table_values(p: &ModelParams) -> (f64, f64, LevelFn, LevelFn) {
    match *p {
        ModelParams::Kinetic { .. } => (0.0, 0.0, Box::new(|_| 0.0), Box::new(|_| 0.0)),
        ModelParams::Oscillator { omega, .. } => (
            2.0 * omega,
            2.0 * omega,
            Box::new(move |m| 2.0 * m as f64 * omega),
            Box::new(move |m| 2.0 * (m as f64 + 1.0) * omega),
        ),
        ModelParams::Morse { alpha, depth, .. } => {
            let k = alpha * alpha / 2.0;
            (
                k * (2.0 * depth - 1.0),
                k * (2.0 * depth + 1.0),
                Box::new(move |m| k * m as f64 * (2.0 * depth - m as f64)),
                Box::new(move |m| k * (m as f64 + 1.0) * (2.0 * depth - m as f64 - 1.0)),
            )
        }
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

fn factorization_roundtrip(c: &Ctx) -> Check {
    if matches!(c.p, ModelParams::Kinetic { .. }) {
        return skip("continuous spectrum: no normalizable ground state to factor around");
    }
    let rows = 40;
    let h = c.model.operator((50 * rows).max(4000))?;
    let l = factorize(&h, 0.0, rows)?;
    let (da, db) = compose(&l).max_relative_deviation(&h, rows, 1e-12);
    val(da.max(db))
}

fn epsilon1_closed_form(c: &Ctx) -> Check {
    let (e1, ..) = table_values(&c.p);
    val(rel(epsilon1(&c.model), e1))
}

fn spectrum_closed_form(c: &Ctx) -> Check {
    let (_, _, eps, _) = table_values(&c.p);
    let mut dev: f64 = 0.0;
    for m in 0..=c.levels() {
        dev = dev.max(rel(spectrum(&c.model, m)?, eps(m)));
    }
    val(dev)
}

fn spectrum_telescoping(c: &Ctx) -> Check {
    let mut dev: f64 = 0.0;
    for m in 0..=c.levels() {
        dev = dev.max(telescoping_check(&c.model, m)?);
    }
    val(dev)
}

fn partner_spectrum_check(c: &Ctx) -> Check {
    let (_, _, _, eps_plus) = table_values(&c.p);
    let top = match c.model.m_max() {
        Some(0) => return skip("window holds a single level"),
        Some(w) => (w - 1).min(10),
        None => 10,
    };
    let mut dev: f64 = 0.0;
    for m in 0..=top {
        dev = dev.max(rel(partner_spectrum(&c.model, m)?, eps_plus(m)));
    }
    val(dev)
}

fn commutator(c: &Ctx) -> Check {
    let (_, e_back, ..) = table_values(&c.p);
    let dev = (0..=40)
        .map(|n| rel(commutator_diagonal(&c.model, n), e_back))
        .fold(0.0, f64::max);
    val(dev)
}

fn shape_invariance(c: &Ctx) -> Check {
    val(shape_invariance_residual(&c.model, c.n)?.max())
}

fn hierarchy_check(c: &Ctx) -> Check {
    let mut dev: f64 = 0.0;
    for k in 0..=3 {
        dev = dev.max(hierarchy_residual(&c.model, k, c.n)?.max());
    }
    val(dev)
}

fn inverse_roundtrip(c: &Ctx) -> Check {
    let (_, _, eps, _) = table_values(&c.p);
    let spec = SpectrumFunction::new(eps, None);
    let m = 20;
    let l = inverse_construct(&spec, c.model.c_sq(0), c.model.d_sq(1), m)?;
    let mut dev: f64 = 0.0;
    for j in 0..=m {
        dev = dev.max(rel(l.c_sq()[j], c.model.c_sq(j)));
        dev = dev.max(rel(l.d_sq()[j + 1], c.model.d_sq(j + 1)));
    }
    val(dev)
}

fn annihilation(c: &Ctx) -> Check {
    if matches!(c.p, ModelParams::Kinetic { .. }) {
        return skip("ground-state series diverges (no bound state)");
    }
    val(annihilation_residual(&c.model, c.n)?)
}

fn wavefunction(c: &Ctx) -> Check {
    let (grid, terms) = match c.p {
        ModelParams::Kinetic { .. } => return skip("no normalizable ground state"),
        ModelParams::Oscillator { .. } => (linspace(0.05, 6.0, 60), c.n.max(80)),
        ModelParams::Morse { .. } => (linspace(-1.0, 3.0, 41), c.n.max(MORSE_TERMS)),
    };
    let psi = ground_wavefunction(&c.p, &grid, terms)?;
    let mut dev: f64 = 0.0;
    for (x, v) in grid.iter().zip(&psi.values) {
        dev = dev.max((v - ground_state_closed_form(&c.p, *x)?).abs());
    }
    val(dev)
}

fn coherent_vacuum(c: &Ctx) -> Check {
    let n = c.model.m_max().map_or(c.n, |w| w.min(c.n));
    let cs = coherent_coefficients(&c.model, Complex64::new(0.0, 0.0), n)?;
    let dev = cs
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, z)| (z - if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).norm())
        .fold(0.0, f64::max);
    val(dev)
}

fn coherent_normalization(c: &Ctx) -> Check {
    if c.model.m_max().is_some() || matches!(c.p, ModelParams::Kinetic { .. }) {
        return skip("finite or empty level set: the expansion does not close");
    }
    let mut dev: f64 = 0.0;
    for z in [Complex64::new(0.5, 0.0), Complex64::from_polar(1.0, 2.0)] {
        dev = dev.max((coherent_coefficients(&c.model, z, c.n)?.norm_sq() - 1.0).abs());
    }
    val(dev)
}

fn moment(c: &Ctx) -> Check {
    let ModelParams::Oscillator { omega, .. } = c.p else {
        return skip("no closed-form density");
    };
    let mut dev: f64 = 0.0;
    for n in 0..=8 {
        dev = dev.max(moment_check(&c.model, &|_| 4.0 * omega, n, 40)?.rel_error);
    }
    val(dev)
}

fn product_closed_form(c: &Ctx) -> Check {
    let ModelParams::Morse { alpha, depth, .. } = c.p else {
        return skip("constant summands; covered by moment_condition");
    };
    let mut dev: f64 = 0.0;
    for n in 0..=c.model.m_max().unwrap_or(0) {
        let nf = n as f64;
        let want = (nf * (alpha * alpha / 2.0).ln() + ln_factorial(n) + ln_gamma(2.0 * depth - nf + 1.0)?
            - ln_gamma(2.0 * depth - 2.0 * nf + 1.0)?)
        .exp();
        dev = dev.max(rel(product_term(&c.model, n)?, want));
    }
    val(dev)
}

fn lowering(c: &Ctx) -> Check {
    if !matches!(c.p, ModelParams::Oscillator { .. }) {
        return skip("closed-form overlaps only for the oscillator");
    }
    let mut dev: f64 = 0.0;
    for m in 0..=3 {
        dev = dev.max(lowering_check_oscillator(&c.p, m, c.n.max(80))?);
    }
    val(dev)
}

fn superpotential(c: &Ctx) -> Check {
    let (grid, terms, h) = match c.p {
        ModelParams::Kinetic { .. } => return skip("no normalizable ground state"),
        ModelParams::Oscillator { .. } => (linspace(0.3, 3.0, 28), c.n.max(80), 1e-3),
        ModelParams::Morse { .. } => (linspace(-1.0, 3.0, 21), c.n.max(MORSE_TERMS), 1e-2),
    };
    let w = superpotential_eval(&c.p, &grid, terms, h)?;
    let mut dev: f64 = 0.0;
    for (x, v) in grid.iter().zip(w.best()) {
        dev = dev.max((v - superpotential_closed_form(&c.p, *x)?).abs());
    }
    val(dev)
}

fn partner_potentials(c: &Ctx) -> Check {
    let (grid, terms) = match c.p {
        ModelParams::Kinetic { .. } => return skip("no normalizable ground state"),
        ModelParams::Oscillator { .. } => (linspace(0.3, 3.0, 28), c.n.max(80)),
        ModelParams::Morse { .. } => (linspace(-1.0, 3.0, 21), c.n.max(MORSE_TERMS)),
    };
    let (vm, vp) = reconstructed_potentials(&c.p, &grid, terms, 1e-2)?;
    let x0 = partner_origin_shift(&c.p);
    let vt = grid.iter().map(|&x| potential_eval(&c.p, Potential::V, x)).collect::<Result<Vec<_>, _>>()?;
    let vpt = grid
        .iter()
        .map(|&x| potential_eval(&c.p, Potential::VPlus, x - x0))
        .collect::<Result<Vec<_>, _>>()?;
    val(offset_deviation(&vm.values, &vt).0.max(offset_deviation(&vp.values, &vpt).0))
}

type CheckFn = fn(&Ctx) -> Check;

const CHECKS: &[(&str, CheckFn)] = &[
    ("factorization_roundtrip", factorization_roundtrip),
    ("epsilon1_closed_form", epsilon1_closed_form),
    ("epsilon1_n_independence", |c| val(epsilon1_n_independence(&c.model, 40))),
    ("spectrum_closed_form", spectrum_closed_form),
    ("spectrum_telescoping", spectrum_telescoping),
    ("partner_spectrum", partner_spectrum_check),
    ("commutator_diagonal", commutator),
    ("shape_invariance", shape_invariance),
    ("hierarchy", hierarchy_check),
    ("inverse_roundtrip", inverse_roundtrip),
    ("ground_state_annihilation", annihilation),
    ("ground_state_wavefunction", wavefunction),
    ("coherent_vacuum", coherent_vacuum),
    ("coherent_normalization", coherent_normalization),
    ("moment_condition", moment),
    ("product_term_closed_form", product_closed_form),
    ("lowering_operator", lowering),
    ("superpotential", superpotential),
    ("partner_potentials", partner_potentials),
];

/// Runs every check for every model, in a fixed order.
pub fn run(models: &[ModelParams], n: usize, perturb: Option<Perturb>) -> Result<Vec<Line>, CliError> {
    let mut lines = Vec::new();
    for p in models {
        let clean = make_model(p)?;
        let model = match perturb {
            Some(d) => d.apply(&clean),
            None => clean.clone(),
        };
        let ctx = Ctx { p: *p, model, n };
        for (name, check) in CHECKS {
            let t = threshold(name);
            let (deviation, status, note) = match check(&ctx) {
                Ok(Outcome::Value(v)) => (Some(v), if v <= t { Status::Pass } else { Status::Fail }, String::new()),
                Ok(Outcome::Skip(why)) => (None, Status::Skip, why),
                Err(e) => (None, Status::Fail, e.to_string()),
            };
            lines.push(Line {
                model: p.name(),
                identity: name,
                deviation,
                threshold: t,
                status,
                note,
            });
        }
    }
    Ok(lines)
}

pub fn default_models() -> Vec<ModelParams> {
    [ModelKind::Oscillator, ModelKind::Morse, ModelKind::Kinetic]
        .into_iter()
        .map(defaults)
        .collect()
}

pub fn report(lines: &[Line]) -> Report {
    let mut table = Table::new(&["model", "identity", "deviation", "threshold", "status"]);
    for l in lines {
        let dev = match l.deviation {
            Some(d) => format!("{d:.3e}"),
            None => "-".into(),
        };
        let status = match l.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        table.push(vec![l.model.into(), l.identity.into(), dev.into(), format!("{:.0e}", l.threshold).into(), status.into()]);
    }
    let failed = lines.iter().filter(|l| l.status == Status::Fail).count();
    let notes = lines
        .iter()
        .filter(|l| !l.note.is_empty())
        .map(|l| format!("{} {}: {}", l.model, l.identity, l.note))
        .collect();
    Report {
        table,
        json: json!({ "passed": failed == 0, "failed": failed, "checks": lines }),
        default_format: Format::Table,
        notes,
    }
}
