use nalgebra::{Matrix2, Matrix3, Vector3};
use ribbonlab::euclidean::{build_euclidean_ribbon, expansion_residual, EuclideanRibbon};
use ribbonlab::fields::{SmoothField1D, StripField, SymField2x2};
use ribbonlab::geometry::{planar_immersion, PresetSpec, RibbonGeometry};
use ribbonlab::jet::Jet;

fn preset(name: &str, p: &[(&str, f64)]) -> RibbonGeometry {
    PresetSpec::new(name, p).build().unwrap()
}

fn wavy_kappa() -> SmoothField1D {
    SmoothField1D::custom(|s| {
        let (a, b) = ((3.0 * s).sin(), (3.0 * s).cos());
        Jet([0.4 + 0.3 * a, 0.9 * b, -2.7 * a, -8.1 * b])
    })
}

#[test]
fn codazzi_deficit_presets() {
    let d = preset("fig1d", &[("kappa", 0.7), ("n", 1.3)]);
    let b = preset("fig1b", &[]);
    for x in [0.0, 0.25, 0.5, 1.0] {
        assert_eq!(d.codazzi_deficit(x), [0.7 * 1.3, 0.0]);
        assert_eq!(b.codazzi_deficit(x), [0.0, -1.0]);
    }
    let c = RibbonGeometry::flat("c", 1.0, SmoothField1D::Constant(0.0), SymField2x2::constant(0.3, -0.2, 0.5));
    assert_eq!(c.codazzi_deficit(0.4), [0.0, 0.0]);
}

#[test]
fn gauss_deficit_examples() {
    assert_eq!(preset("fig1d", &[]).gauss_deficit(0.3), 0.0);
    assert_eq!(preset("fig1a", &[]).gauss_deficit(0.3), 1.0);
    let g = RibbonGeometry::curved(
        "k",
        1.0,
        SmoothField1D::Constant(0.0),
        StripField::constant(-1.0),
        SymField2x2::constant(1.0, 2.0, 1.0),
    );
    assert!((g.gauss_deficit(0.5) + 2.0).abs() < 1e-14);
}

#[test]
fn first_order_gauss_deficit() {
    let n = 1.7;
    let (l1, m1, n1) = (0.3, -0.4, 0.9);
    let ii = SymField2x2::new(
        StripField::from_coeffs(vec![0.0.into(), l1.into()]),
        StripField::from_coeffs(vec![0.0.into(), m1.into()]),
        StripField::from_coeffs(vec![n.into(), n1.into()]),
    );
    let g = RibbonGeometry::flat("g", 1.0, SmoothField1D::Constant(0.0), ii);
    assert!((g.gauss_deficit_1(0.5).unwrap() - l1 * n).abs() < 1e-14);
    assert_eq!(preset("fig1d", &[]).gauss_deficit_1(0.5).unwrap(), 0.0);
    assert_eq!(preset("fig1b", &[]).gauss_deficit_1(0.5).unwrap(), 0.0);
}

#[test]
fn midsurface_metric_is_upper_block() {
    let g = RibbonGeometry::flat(
        "w",
        1.0,
        wavy_kappa(),
        SymField2x2::new(StripField::constant(0.5), StripField::constant(0.1), StripField::constant(-0.3)),
    );
    for i in 0..100 {
        let z1 = (i as f64 * 0.618).fract();
        let z2 = 0.1 * ((i as f64 * 0.377).fract() - 0.5);
        let a = g.midsurface_metric(z1, z2).unwrap();
        let m = g.metric_at([z1, z2, 0.0]).unwrap();
        assert_eq!(a, m.fixed_view::<2, 2>(0, 0).into_owned());
        let k = g.kappa_at(z1);
        assert_eq!(m.determinant(), (1.0 - k * z2).powi(2));
    }
    let e = preset("euclidean", &[("kappa", 1.0)]);
    assert_eq!(e.midsurface_metric(0.0, 0.1).unwrap(), Matrix2::new(0.81, 0.0, 0.0, 1.0));
}

#[test]
fn planar_immersion_circle_and_isometry() {
    let g = preset("euclidean", &[("kappa", 1.0)]);
    let chi = planar_immersion(&g, 0.2).unwrap();
    for s in [0.1, 0.5, 0.9] {
        let p = chi.point(s, 0.0);
        assert!((p.x - s.sin()).abs() < 1e-8 && (p.y - (1.0 - s.cos())).abs() < 1e-8);
    }
    let g = RibbonGeometry::flat("w", 1.0, wavy_kappa(), SymField2x2::zero());
    let chi = planar_immersion(&g, 0.2).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 1..10 {
        for j in 0..5 {
            let (z1, z2) = (i as f64 / 10.0, -0.08 + 0.04 * j as f64);
            let d1 = (chi.point(z1 + h, z2) - chi.point(z1 - h, z2)) / (2.0 * h);
            let d2 = (chi.point(z1, z2 + h) - chi.point(z1, z2 - h)) / (2.0 * h);
            let j = nalgebra::Matrix2::from_columns(&[d1, d2]);
            worst = worst.max((j.transpose() * j - g.midsurface_metric(z1, z2).unwrap()).amax());
        }
    }
    assert!(worst < 1e-8, "pullback residual {worst:e}");
}

#[test]
fn euclidean_ribbon_of_trivial_data_is_identity() {
    let r = EuclideanRibbon::new(&preset("euclidean", &[]));
    for z in [[0.2, 0.03, -0.01], [0.9, -0.04, 0.02]] {
        let (p, d) = r.psi(z);
        assert!((p - Vector3::from(z)).amax() < 1e-12);
        assert!((d - Matrix3::identity()).amax() < 1e-12);
    }
    let rep = expansion_residual(&r);
    assert!(rep.exact && rep.max_residual <= 1e-12);
}

#[test]
fn cylinder_midline_closed_form() {
    let l = 1.5;
    let r = EuclideanRibbon::new(&preset("cylinder", &[("l", l)]));
    for s in [0.2, 0.6, 1.0] {
        let p = r.midline_point(s);
        let expect = Vector3::new((l * s).sin() / l, 0.0, (1.0 - (l * s).cos()) / l);
        assert!((p - expect).amax() < 1e-8, "{p:?} vs {expect:?}");
    }
}

#[test]
fn q0_is_rotation_along_the_midline() {
    let g = RibbonGeometry::flat(
        "w",
        1.0,
        wavy_kappa(),
        SymField2x2::new(StripField::constant(0.8), StripField::constant(0.3), StripField::constant(0.4)),
    );
    let r = build_euclidean_ribbon(&g, 1e-3, 0.05).unwrap();
    let h = 1e-5;
    for s in [0.1, 0.45, 0.8] {
        let q = r.q0(s);
        assert!((q.transpose() * q - Matrix3::identity()).amax() < 1e-8);
        assert!((q.determinant() - 1.0).abs() < 1e-8);
        let dphi = (r.phi(s + h, 0.0) - r.phi(s - h, 0.0)) / (2.0 * h);
        assert!((q.column(0) - dphi).amax() < 1e-8);
        let (_, d) = r.psi([s, 0.0, 0.0]);
        assert!((d.transpose() * d - Matrix3::identity()).amax() < 1e-8);
    }
}

#[test]
fn expansion_orders() {
    let g = RibbonGeometry::flat(
        "w",
        1.0,
        wavy_kappa(),
        SymField2x2::new(StripField::constant(0.8), StripField::constant(0.3), StripField::constant(0.4)),
    );
    let rep = expansion_residual(&EuclideanRibbon::new(&g));
    assert!(rep.slope_z2 >= 2.8, "z2 slope {}", rep.slope_z2);
    assert!(rep.slope_z3 >= 1.8, "z3 slope {}", rep.slope_z3);
    let compatible = preset("fig1c", &[]);
    let rep = expansion_residual(&EuclideanRibbon::new(&compatible));
    assert!(rep.gauss_coefficient.abs() < 1e-4, "z2^2 coefficient {}", rep.gauss_coefficient);
}

#[test]
fn realizable_pair_has_no_codazzi_deficit() {
    // Second form of Phi read back off the constructed mid-surface, fitted in z2.
    let g = preset("fig1c", &[("kappa", 0.6), ("l", 1.2), ("m", 0.4)]);
    let r = EuclideanRibbon::new(&g);
    let h = 1e-3;
    let sample = |z1: f64, z2: f64| r.mid_surface(z1, z2).second_form();
    let mut worst: f64 = 0.0;
    for z1 in [0.3, 0.5, 0.7] {
        let d2 = (sample(z1, h) - sample(z1, -h)) / (2.0 * h);
        let d1 = (sample(z1 + h, 0.0) - sample(z1 - h, 0.0)) / (2.0 * h);
        let ii = sample(z1, 0.0);
        let k = g.kappa_at(z1);
        let c1 = d2[(0, 0)] - d1[(0, 1)] + k * (ii[(0, 0)] + ii[(1, 1)]);
        let c2 = d2[(0, 1)] - d1[(1, 1)] - k * ii[(0, 1)];
        worst = worst.max(c1.abs()).max(c2.abs());
    }
    assert!(worst < 1e-5, "codazzi residual {worst:e}");
}

#[test]
fn smooth_field_derivatives_match_differences() {
    let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).sin() + x * x).collect();
    let fields = [
        wavy_kappa(),
        SmoothField1D::Polynomial(vec![0.5, -1.0, 2.0, 0.3]),
        SmoothField1D::from_samples(&xs, &ys).unwrap(),
    ];
    let h = 1e-4;
    for f in &fields {
        for x in [0.2, 0.5, 0.8] {
            let j = f.eval(x);
            let d1 = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
            let d2 = (f.eval(x + h).d(1) - f.eval(x - h).d(1)) / (2.0 * h);
            assert!((j.d(1) - d1).abs() <= 1e-6 * j.d(1).abs().max(1.0));
            assert!((j.d(2) - d2).abs() <= 1e-6 * j.d(2).abs().max(1.0));
        }
    }
}
