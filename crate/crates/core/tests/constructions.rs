use nalgebra::{Matrix2, Matrix3, Vector3};
use ribbonlab::constructions::*;
use ribbonlab::fields::{FnSymField, SmoothField1D, StripSymField, SymSample};
use ribbonlab::geometry::PresetSpec;

fn preset(name: &str, params: &[(&str, f64)]) -> ribbonlab::geometry::RibbonGeometry {
    PresetSpec::new(name, params).build().unwrap()
}

#[test]
fn ruled_isometry_on_presets() {
    let cases = [
        (preset("cylinder", &[("l", 1.5)]), 0.3, 0.2),
        (preset("fig1c", &[("kappa", 0.8), ("l", 1.0), ("m", 0.5)]), -0.4, 0.1),
        (preset("fig1c", &[("kappa", -0.5), ("l", -2.0), ("m", 0.3)]), 0.5, -0.2),
    ];
    for (g, a, b) in cases {
        let v = ruled_isometry(&g, &SmoothField1D::Constant(a), &SmoothField1D::Constant(b), 0.05).unwrap();
        let iso = v.isometry_residual(20, 6).unwrap();
        let mid = v.midline_form_error(20).unwrap();
        println!("{} iso {iso:e} mid {mid:e}", g.name);
        assert!(iso <= 1e-8, "{iso}");
        assert!(mid <= 1e-6, "{mid}");
    }
}

#[test]
fn ansatz_fields_solve_gauss_codazzi() {
    let gd = preset("fig1d", &[("kappa", 1.0), ("n", 1.0)]);
    let gb = preset("fig1b", &[]);
    for w in [1e-4, 1e-3, 1e-2] {
        let d = ansatz_field(AnsatzKind::D, &gd, w, None).unwrap();
        let b = ansatz_field(AnsatzKind::B, &gb, w, None).unwrap();
        let rd = gc_residual(&gd, w, &d, 16, 16).max();
        let rb = gc_residual(&gb, w, &b, 16, 16).max();
        println!("w {w} d {rd:e} b {rb:e}");
        assert!(rd <= 1e-8 && rb <= 1e-8);
    }
}

#[test]
fn ansatz_d_below_threshold_is_rejected() {
    let g = preset("fig1d", &[]);
    let t = AnsatzField::delta_threshold(1.0, 0.01);
    assert!(ansatz_field(AnsatzKind::D, &g, 0.01, Some(0.5 * t)).is_err());
}

fn const_form(m: Matrix2<f64>) -> impl Fn(f64, f64) -> SymSample {
    move |_, _| SymSample { value: m, d1: Matrix2::zeros(), d2: Matrix2::zeros() }
}

#[test]
fn forms_reconstruct_cylinder() {
    let l = 2.0;
    let a = const_form(Matrix2::identity());
    let ii = const_form(Matrix2::new(l, 0.0, 0.0, 0.0));
    let s = surface_from_forms(&a, &ii, [0.0, 1.0], [-0.5, 0.5], 21, 11, BaseFrame::default()).unwrap();
    assert!(s.residual < 1e-10, "{}", s.residual);
    for i in [0usize, 7, 20] {
        let (x, y) = s.node(i, 3);
        let expect = Vector3::new((l * x).sin() / l, y + 0.5, (1.0 - (l * x).cos()) / l);
        assert!((s.positions[i * 11 + 3] - expect).norm() < 1e-6);
    }
    let (a1, ii1) = s.extracted_forms(10, 5).unwrap();
    assert!((a1 - Matrix2::identity()).amax() < 1e-9);
    assert!((ii1 - Matrix2::new(l, 0.0, 0.0, 0.0)).amax() < 1e-5);
}

#[test]
fn forms_incompatible_pair_has_residual() {
    let a = const_form(Matrix2::identity());
    let ii = |x: f64, _y: f64| SymSample { value: Matrix2::new(0.0, 0.0, 0.0, x), d1: Matrix2::new(0.0, 0.0, 0.0, 1.0), d2: Matrix2::zeros() };
    let s = surface_from_forms(&a, &ii, [0.0, 1.0], [-0.5, 0.5], 21, 11, BaseFrame::default()).unwrap();
    assert!(s.residual >= 1e-3, "{}", s.residual);
    let _ = Matrix3::<f64>::identity();
    let _ = FnSymField(|_: f64, _: f64| SymSample { value: Matrix2::zeros(), d1: Matrix2::zeros(), d2: Matrix2::zeros() }).sample(0.0, 0.0);
}
