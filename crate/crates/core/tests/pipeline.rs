use num_complex::Complex64;
use shapeinv::models::{make_model, ModelParams};
use shapeinv::operator::{apply_a, compose, factorize, partner, ExpansionVector, TridiagonalOperator};
use shapeinv::shape::{epsilon1, inverse_construct, spectrum, spectrum_from_ladder, SpectrumFunction};
use shapeinv::states::{coherent_coefficients, ground_state_from_ladder};
use shapeinv::Error;

const HO: ModelParams = ModelParams::Oscillator { l: 1, omega: 0.7, lambda: 1.2 };
const MORSE: ModelParams = ModelParams::Morse { alpha: 0.9, depth: 3.4, gamma: 1.0 };

// Only H is handed over: factorize it, then check the partner against the
// operator built at the shifted parameter.
#[test]
fn partner_from_factorized_matrix() {
    for p in [HO, MORSE] {
        let model = make_model(&p).unwrap();
        // the backward sweep converges only algebraically for Morse: seed far out
        let h = model.operator(4000).unwrap();
        let l = factorize(&h, 0.0, 40).unwrap();
        let hp = partner(&l);
        let up = make_model(&p.shifted()).unwrap().operator(40).unwrap();
        let e1 = epsilon1(&model);
        for n in 0..40 {
            assert!((hp.a()[n] - up.a()[n] - e1).abs() <= 1e-9 * up.a()[n].abs().max(1.0), "{} n={n} {} {}", p.name(), hp.a()[n], up.a()[n] + e1);
        }
        for n in 0..39 {
            assert!((hp.b()[n] - up.b()[n]).abs() <= 1e-9 * up.b()[n].abs().max(1.0), "{} n={n}", p.name());
        }
    }
}

#[test]
fn ground_state_from_factorized_matrix() {
    let h = make_model(&HO).unwrap().operator(300).unwrap();
    let l = factorize(&h, 0.0, 60).unwrap();
    let g = ground_state_from_ladder(&l, 60).unwrap();
    let hv = h.apply(&ExpansionVector::new([g.vector().coeffs, vec![0.0; 240]].concat()));
    assert!(hv.coeffs[..58].iter().all(|v| v.abs() < 1e-9));
    let a0 = apply_a(&l, &g.vector());
    assert!(a0.coeffs[..59].iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn spectrum_survives_inverse_roundtrip() {
    let model = make_model(&HO).unwrap();
    let spec = SpectrumFunction::of_model(&model);
    let l = inverse_construct(&spec, model.c_sq(0), model.d_sq(1), 25).unwrap();
    let back = spectrum_from_ladder(&l);
    for (m, e) in back.iter().enumerate() {
        assert!((e - spectrum(&model, m).unwrap()).abs() < 1e-10);
    }
    let h = compose(&l);
    let reference = model.operator(25).unwrap();
    let (da, db) = h.max_relative_deviation(&reference, 24, 1.0);
    assert!(da < 1e-12 && db < 1e-12);
}

#[test]
fn operator_json_roundtrip_and_rejection() {
    let h = make_model(&MORSE).unwrap().operator(10).unwrap();
    let text = serde_json::to_string(&h).unwrap();
    let back: TridiagonalOperator = serde_json::from_str(&text).unwrap();
    assert_eq!(back, h);
    let bad = r#"{"n_max": 2, "a": [1.0, 2.0], "b": [0.5, 0.5]}"#;
    assert!(serde_json::from_str::<TridiagonalOperator>(bad).is_err());
    let p: ModelParams = serde_json::from_str(r#"{"model":"morse","alpha":0.9,"D":3.4,"gamma":1.0}"#).unwrap();
    assert_eq!(p, MORSE);
}

#[test]
fn coherent_state_window_and_vacuum() {
    let model = make_model(&MORSE).unwrap();
    let vac = coherent_coefficients(&model, Complex64::new(0.0, 0.0), 3).unwrap();
    assert_eq!(vac.coeffs, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
    assert!(matches!(coherent_coefficients(&model, Complex64::new(0.1, 0.0), 4), Err(Error::Range { .. })));
}
