//! One function per subcommand; each returns a [`Report`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use num_complex::Complex64;
use serde_json::{json, Value};
use shapeinv::models::{
    ground_state_closed_form, linspace, make_model, partner_origin_shift, potential_eval, superpotential_closed_form,
    ModelParams, Potential,
};
use shapeinv::operator::{compose, factorize, partner, LadderCoefficients, TridiagonalOperator};
use shapeinv::shape::{
    epsilon1, hierarchy, hierarchy_residual, inverse_construct, partner_spectrum, shape_invariance_residual, spectrum,
    spectrum_from_ladder, ShapeInvariantModel, SpectrumFunction,
};
use shapeinv::special::{ln_factorial, ln_gamma};
use shapeinv::states::{
    coherent_coefficients, ground_state_coefficients, ground_wavefunction, reconstructed_potentials, superpotential_eval,
};

use crate::config::{Format, RunConfig};
use crate::output::{Cell, Report, Table};
use crate::CliError;

/// A defect injected into `c_n²`, written `n=5` or `n=5,amount=0.1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturb {
    pub n: usize,
    pub amount: f64,
}

impl FromStr for Perturb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut n = None;
        let mut amount = 0.1;
        for part in s.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            match key.trim() {
                "n" => n = Some(value.trim().parse().map_err(|e| format!("bad index `{value}`: {e}"))?),
                "amount" => amount = value.trim().parse().map_err(|e| format!("bad amount `{value}`: {e}"))?,
                other => return Err(format!("unknown key `{other}`")),
            }
        }
        Ok(Perturb {
            n: n.ok_or("missing n=<index>")?,
            amount,
        })
    }
}

impl Perturb {
    pub fn apply(&self, model: &ShapeInvariantModel) -> ShapeInvariantModel {
        model.with_perturbation(self.n, self.amount)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Left end of the grid [default: 0.05 radial, -1 Morse]
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    /// Right end of the grid [default: 6 radial, 3 Morse]
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
}

impl GridArgs {
    fn grid(&self, p: &ModelParams) -> Result<Vec<f64>, CliError> {
        let (a0, b0) = if p.is_radial() { (0.05, 6.0) } else { (-1.0, 3.0) };
        let (a, b) = (self.x_min.unwrap_or(a0), self.x_max.unwrap_or(b0));
        if !(a < b) || self.points < 2 {
            return Err(CliError::Config(format!(
                "grid needs x_min < x_max and at least 2 points, got [{a}, {b}] with {}",
                self.points
            )));
        }
        if p.is_radial() && a <= 0.0 {
            return Err(CliError::Config(format!("radial grid must start at r > 0, got {a}")));
        }
        Ok(linspace(a, b, self.points))
    }
}

fn num_or_dash(v: Option<f64>) -> Cell {
    v.map_or(Cell::Text("-".into()), Cell::Num)
}

fn model_json(p: &ModelParams) -> Value {
    serde_json::to_value(p).expect("parameters serialize")
}

pub fn spectrum_cmd(cfg: &RunConfig, m_max: usize) -> Result<Report, CliError> {
    let p = cfg.require_model()?;
    let model = make_model(&p)?;
    let mut notes = Vec::new();
    if matches!(p, ModelParams::Kinetic { .. }) {
        notes.push("degenerate case: ε₁ = 0 and the spectrum is continuous; all listed levels are 0".into());
    }
    let last = match model.m_max() {
        Some(w) if w < m_max => {
            notes.push(format!("m_max clipped from {m_max} to the bound-state window m <= {w}"));
            w
        }
        _ => m_max,
    };
    let mut table = Table::new(&["m", "eps", "eps_plus"]);
    for m in 0..=last {
        let e = spectrum(&model, m)?;
        let ep = partner_spectrum(&model, m).ok();
        table.push(vec![m.into(), e.into(), num_or_dash(ep)]);
    }
    let json = json!({ "model": model_json(&p), "window": model.m_max(), "levels": table.to_json() });
    Ok(Report {
        table,
        json,
        default_format: Format::Table,
        notes,
    })
}

fn read_operator(path: &Path) -> Result<TridiagonalOperator, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Rows of the model matrix handed to the factorization: the backward sweep
/// needs headroom above `N` to forget its seed.
fn section_rows(n: usize) -> usize {
    (50 * n).max(4000)
}

#[derive(Debug, Clone, Args)]
pub struct FactorArgs {
    /// Operator JSON `{"n_max", "a", "b"}` instead of a catalogue model
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Ground energy to factor out
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eps0: f64,
}

fn factor_source(cfg: &RunConfig, args: &FactorArgs, notes: &mut Vec<String>) -> Result<(TridiagonalOperator, usize), CliError> {
    match &args.input {
        Some(path) => {
            let h = read_operator(path)?;
            let n = cfg.n.min(h.n_max());
            if n < cfg.n {
                notes.push(format!("N reduced to the {} rows of the input section", h.n_max()));
            }
            Ok((h, n))
        }
        None => {
            let p = cfg.require_model()?;
            Ok((make_model(&p)?.operator(section_rows(cfg.n))?, cfg.n))
        }
    }
}

fn ladder_table(l: &LadderCoefficients) -> Table {
    let mut t = Table::new(&["n", "c", "d", "c_sq", "d_sq"]);
    for n in 0..=l.n_max() {
        let (c, d) = (l.c()[n], l.d()[n]);
        t.push(vec![n.into(), c.into(), d.into(), (c * c).into(), (d * d).into()]);
    }
    t
}

pub fn factorize_cmd(cfg: &RunConfig, args: &FactorArgs, roundtrip: bool) -> Result<Report, CliError> {
    let mut notes = Vec::new();
    let (h, n) = factor_source(cfg, args, &mut notes)?;
    let l = factorize(&h, args.eps0, n)?;
    let mut json = json!({
        "n_max": n,
        "eps0": args.eps0,
        "c": l.c(),
        "d": l.d(),
        "c_sq": l.c_sq(),
        "d_sq": l.d_sq(),
    });
    if roundtrip {
        let (da, db) = compose(&l).max_relative_deviation(&h.shifted(args.eps0), n, 1e-12);
        let residual = da.max(db);
        notes.push(format!("roundtrip residual: {residual:.3e}"));
        json["roundtrip_residual"] = json!(residual);
    }
    Ok(Report {
        table: ladder_table(&l),
        json,
        default_format: Format::Json,
        notes,
    })
}

fn operator_table(h: &TridiagonalOperator) -> Table {
    let mut t = Table::new(&["n", "a", "b"]);
    for n in 0..=h.n_max() {
        t.push(vec![n.into(), h.a()[n].into(), h.b()[n].into()]);
    }
    t
}

pub fn partner_cmd(cfg: &RunConfig, args: &FactorArgs) -> Result<Report, CliError> {
    let mut notes = Vec::new();
    let (h, n) = factor_source(cfg, args, &mut notes)?;
    let l = factorize(&h, args.eps0, n)?;
    let hp = partner(&l);
    notes.push(format!("last off-diagonal b_{n} needs c_{} and is set to 0", n + 1));
    let ground = match (&args.input, cfg.model) {
        (None, Some(p)) => Some(epsilon1(&make_model(&p)?) + args.eps0),
        _ => None,
    };
    let json = json!({ "n_max": n, "a": hp.a(), "b": hp.b(), "ground_energy": ground });
    Ok(Report {
        table: operator_table(&hp),
        json,
        default_format: Format::Json,
        notes,
    })
}

pub fn hierarchy_cmd(cfg: &RunConfig, k_max: usize, perturb: Option<Perturb>) -> Result<Report, CliError> {
    let p = cfg.require_model()?;
    let mut model = make_model(&p)?;
    if let Some(d) = perturb {
        model = d.apply(&model);
    }
    let mut notes = Vec::new();
    let si = shape_invariance_residual(&model, cfg.n)?.max();
    let flagged = si > cfg.tolerance;
    if flagged {
        notes.push(format!(
            "model `{}` is not shape invariant: residual {si:.3e} > {:.1e}",
            model.label, cfg.tolerance
        ));
    }
    let mut table = Table::new(&[
        "level", "kind", "ground_energy", "c_rule", "d_rule", "a_0", "a_1", "a_2", "b_0", "b_1", "b_2", "residual",
    ]);
    for k in 0..=k_max {
        let (zeroed, shifted) = hierarchy(&model, k, cfg.n);
        let residual = hierarchy_residual(&model, k, cfg.n)?.max();
        for (level, res) in [(zeroed, None), (shifted, Some(residual))] {
            let (cr, dr) = level.rules();
            let kind = match level.kind {
                shapeinv::shape::LevelKind::ZeroedPartner => "zeroed",
                shapeinv::shape::LevelKind::ShiftedPartner => "partner",
            };
            let mut row: Vec<Cell> = vec![k.into(), kind.into(), level.ground_energy.into(), cr.into(), dr.into()];
            row.extend((0..3).map(|n| Cell::Num(level.a[n])));
            row.extend((0..3).map(|n| Cell::Num(level.b[n])));
            row.push(num_or_dash(res));
            table.push(row);
        }
    }
    let json = json!({
        "model": model_json(&p),
        "label": model.label,
        "shape_invariance_residual": si,
        "flagged": flagged,
        "levels": table.to_json(),
    });
    Ok(Report {
        table,
        json,
        default_format: Format::Table,
        notes,
    })
}

#[derive(Debug, Clone, Args)]
pub struct InverseArgs {
    /// Levels ε_0, ε_1, ... as a JSON array or whitespace/comma separated numbers
    #[arg(long)]
    pub spectrum_file: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub c0_sq: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d1_sq: Option<f64>,
    /// Highest row of the constructed chain
    #[arg(short = 'M', default_value_t = 10)]
    pub m: usize,
    /// Recompute the spectrum from the chain and report the deviation
    #[arg(long)]
    pub validate: bool,
}

fn read_levels(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| CliError::Config(format!("{}: bad level `{t}`: {e}", path.display())))
        })
        .collect()
}

pub fn inverse_cmd(cfg: &RunConfig, args: &InverseArgs) -> Result<Report, CliError> {
    let mut notes = Vec::new();
    let model = match cfg.model {
        Some(p) if args.spectrum_file.is_none() => Some(make_model(&p)?),
        _ => None,
    };
    let (spec, c0_sq, d1_sq) = match (&args.spectrum_file, &model) {
        (Some(path), _) => {
            let levels = read_levels(path)?;
            let (Some(c0), Some(d1)) = (args.c0_sq, args.d1_sq) else {
                return Err(CliError::Config("--spectrum-file needs --c0-sq and --d1-sq".into()));
            };
            (SpectrumFunction::from_values(levels)?, c0, d1)
        }
        (None, Some(model)) => {
            // the level formula is continued past the Morse window: the
            // chain itself is defined there
            let m2 = model.clone();
            let spec = SpectrumFunction::new(
                move |m| if m == 0 { 0.0 } else { (m2.c_sq(0) - m2.c_sq(m)) + m as f64 * m2.d_sq(1) },
                None,
            );
            (spec, args.c0_sq.unwrap_or(model.c_sq(0)), args.d1_sq.unwrap_or(model.d_sq(1)))
        }
        (None, None) => return Err(CliError::Config("inverse needs --spectrum-file or a model".into())),
    };
    let l = inverse_construct(&spec, c0_sq, d1_sq, args.m)?;
    let mut json = json!({ "n_max": args.m, "c0_sq": c0_sq, "d1_sq": d1_sq, "c_sq": l.c_sq(), "d_sq": l.d_sq() });
    if args.validate {
        let back = spectrum_from_ladder(&l);
        let mut dev: f64 = 0.0;
        for (m, e) in back.iter().enumerate() {
            dev = dev.max((e - spec.get(m)?).abs());
        }
        notes.push(format!("spectrum from chain: max deviation {dev:.3e}"));
        json["spectrum_deviation"] = json!(dev);
        if let Some(model) = &model {
            let mut rel: f64 = 0.0;
            for m in 0..=args.m {
                let pairs = [(l.c_sq()[m], model.c_sq(m)), (l.d_sq()[m + 1], model.d_sq(m + 1))];
                for (got, want) in pairs {
                    rel = rel.max((got - want).abs() / want.abs().max(1.0));
                }
            }
            notes.push(format!("closed-form coefficients: max deviation {rel:.3e}"));
            json["closed_form_deviation"] = json!(rel);
        }
    }
    Ok(Report {
        table: ladder_table(&l),
        json,
        default_format: Format::Json,
        notes,
    })
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn tail_note(p: &ModelParams, cfg: &RunConfig, notes: &mut Vec<String>) -> Result<(), CliError> {
    let g = ground_state_coefficients(&make_model(p)?, cfg.n)?;
    if g.tail > cfg.tolerance {
        notes.push(format!(
            "truncation: tail estimate {:.3e} at N={} exceeds tolerance {:.1e}",
            g.tail, cfg.n, cfg.tolerance
        ));
    }
    Ok(())
}

pub fn groundstate_cmd(cfg: &RunConfig, grid: &GridArgs, compare: bool) -> Result<Report, CliError> {
    let p = cfg.require_model()?;
    let x = grid.grid(&p)?;
    let mut notes = Vec::new();
    tail_note(&p, cfg, &mut notes)?;
    let psi = ground_wavefunction(&p, &x, cfg.n)?;
    let mut json = json!({ "x": psi.x, "values": psi.values });
    let oracle = if compare {
        let exact = x.iter().map(|&v| ground_state_closed_form(&p, v)).collect::<Result<Vec<_>, _>>()?;
        let dev = max_dev(&psi.values, &exact);
        notes.push(format!("max deviation from closed form: {dev:.3e}"));
        json["closed_form"] = json!(exact);
        json["max_deviation"] = json!(dev);
        Some(exact)
    } else {
        None
    };
    let table = match &oracle {
        Some(exact) => {
            let mut t = Table::new(&["x", "value", "closed_form"]);
            for ((&xi, &v), &e) in x.iter().zip(&psi.values).zip(exact.iter()) {
                t.push(vec![xi.into(), v.into(), e.into()]);
            }
            t
        }
        None => {
            let mut t = Table::new(&["x", "value"]);
            for (&xi, &v) in x.iter().zip(&psi.values) {
                t.push(vec![xi.into(), v.into()]);
            }
            t
        }
    };
    Ok(Report {
        table,
        json,
        default_format: Format::Csv,
        notes,
    })
}

/// `|⟨ε_n|z⟩|` from the closed-form product terms.
fn coherent_closed_form(p: &ModelParams, z: Complex64, n: usize) -> Result<Option<f64>, CliError> {
    let r = z.norm();
    let ln_r = |k: usize| if k == 0 { 0.0 } else { k as f64 * r.ln() };
    Ok(match *p {
        ModelParams::Oscillator { omega, .. } => {
            if r == 0.0 {
                return Ok(Some(if n == 0 { 1.0 } else { 0.0 }));
            }
            let nf = n as f64;
            Some((-r * r * omega + ln_r(n) + 0.5 * (nf * (2.0 * omega).ln() - ln_factorial(n))).exp())
        }
        ModelParams::Morse { alpha, depth, .. } => {
            if r == 0.0 {
                return Ok(Some(if n == 0 { 1.0 } else { 0.0 }));
            }
            let nf = n as f64;
            let e_back = 0.5 * alpha * alpha * (2.0 * depth + 1.0);
            let ln_prod = nf * (alpha * alpha / 2.0).ln() + ln_factorial(n) + ln_gamma(2.0 * depth - nf + 1.0)?
                - ln_gamma(2.0 * depth - 2.0 * nf + 1.0)?;
            Some((-0.5 * r * r * e_back + ln_r(n) - ln_factorial(n) + 0.5 * ln_prod).exp())
        }
        ModelParams::Kinetic { .. } => None,
    })
}

pub fn coherent_cmd(cfg: &RunConfig, z: Complex64, compare: bool) -> Result<Report, CliError> {
    let p = cfg.require_model()?;
    let model = make_model(&p)?;
    let mut notes = Vec::new();
    let n = match model.m_max() {
        Some(w) if w < cfg.n => {
            notes.push(format!("N clipped from {} to the bound-state window n <= {w}", cfg.n));
            w
        }
        _ => cfg.n,
    };
    let cs = coherent_coefficients(&model, z, n)?;
    if z.norm() == 0.0 {
        notes.push("z = 0: the coherent state is the ground state".into());
    }
    let mut json = serde_json::to_value(&cs).expect("coherent state serializes");
    let mut cols = vec!["n", "re", "im", "abs_sq"];
    let mut oracle = None;
    if compare {
        match coherent_closed_form(&p, z, 0)? {
            None => notes.push(format!("no closed form for the {} model", p.name())),
            Some(_) => {
                let exact = (0..=n).map(|k| coherent_closed_form(&p, z, k).map(Option::unwrap_or_default)).collect::<Result<Vec<_>, _>>()?;
                let mags: Vec<f64> = cs.coeffs.iter().map(|c| c.norm()).collect();
                let dev = max_dev(&mags, &exact);
                notes.push(format!("max deviation of |coefficient| from closed form: {dev:.3e}"));
                json["closed_form_abs"] = json!(exact);
                json["max_deviation"] = json!(dev);
                cols.push("closed_form_abs");
                oracle = Some(exact);
            }
        }
    }
    notes.push(format!("norm: {:.15e}", cs.norm_sq()));
    let mut table = Table::new(&cols);
    for (k, c) in cs.coeffs.iter().enumerate() {
        let mut row: Vec<Cell> = vec![k.into(), c.re.into(), c.im.into(), c.norm_sqr().into()];
        if let Some(exact) = &oracle {
            row.push(exact[k].into());
        }
        table.push(row);
    }
    Ok(Report {
        table,
        json,
        default_format: Format::Csv,
        notes,
    })
}

#[derive(Debug, Clone, Args)]
pub struct SuperArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add the closed-form superpotential column
    #[arg(long)]
    pub compare_closed_form: bool,
    /// Also reconstruct V and its partner from W
    #[arg(long)]
    pub potentials: bool,
    /// Finite-difference step
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
}

pub fn superpotential_cmd(cfg: &RunConfig, args: &SuperArgs) -> Result<Report, CliError> {
    let p = cfg.require_model()?;
    let x = args.grid.grid(&p)?;
    let mut notes = Vec::new();
    tail_note(&p, cfg, &mut notes)?;
    let h = args.step;
    let w = superpotential_eval(&p, &x, cfg.n, h)?;
    if w.series.is_none() {
        notes.push(format!("no series channel for the {} basis; w is the finite-difference value", p.name()));
    }
    let best = w.best().to_vec();
    let mut cols = vec!["x", "w", "w_fd"];
    let mut extra: Vec<Vec<f64>> = Vec::new();
    let mut json = json!({ "x": x, "w": best, "w_fd": w.finite_difference });
    if args.compare_closed_form {
        let exact = x.iter().map(|&v| superpotential_closed_form(&p, v)).collect::<Result<Vec<_>, _>>()?;
        let dev = max_dev(&best, &exact);
        notes.push(format!("max deviation from closed form: {dev:.3e}"));
        json["closed_form"] = json!(exact);
        json["max_deviation"] = json!(dev);
        cols.push("closed_form");
        extra.push(exact);
    }
    if args.potentials {
        let (vm, vp) = reconstructed_potentials(&p, &x, cfg.n, h)?;
        let x0 = partner_origin_shift(&p);
        let vt = x.iter().map(|&v| potential_eval(&p, Potential::V, v)).collect::<Result<Vec<_>, _>>()?;
        let vpt = x.iter().map(|&v| potential_eval(&p, Potential::VPlus, v - x0)).collect::<Result<Vec<_>, _>>()?;
        let (dm, om) = offset_deviation(&vm.values, &vt);
        let (dp, op) = offset_deviation(&vp.values, &vpt);
        notes.push(format!("V- vs table: offset {om:.3e}, deviation {dm:.3e}"));
        notes.push(format!("V+ vs table at x - {x0:.6}: offset {op:.3e}, deviation {dp:.3e}"));
        json["v_minus"] = json!(vm.values);
        json["v_plus"] = json!(vp.values);
        json["partner_origin_shift"] = json!(x0);
        json["offsets"] = json!([om, op]);
        json["potential_deviation"] = json!([dm, dp]);
        cols.extend(["v_minus", "v_plus"]);
        extra.push(vm.values);
        extra.push(vp.values);
    }
    let mut table = Table::new(&cols);
    for i in 0..x.len() {
        let mut row: Vec<Cell> = vec![x[i].into(), best[i].into(), w.finite_difference[i].into()];
        row.extend(extra.iter().map(|col| Cell::Num(col[i])));
        table.push(row);
    }
    Ok(Report {
        table,
        json,
        default_format: Format::Csv,
        notes,
    })
}

/// Mean offset of `got - want` and the largest deviation once it is removed.
pub fn offset_deviation(got: &[f64], want: &[f64]) -> (f64, f64) {
    let diff: Vec<f64> = got.iter().zip(want).map(|(g, w)| g - w).collect();
    let offset = diff.iter().sum::<f64>() / diff.len() as f64;
    let dev = diff.iter().map(|d| (d - offset).abs()).fold(0.0, f64::max);
    (dev, offset)
}
