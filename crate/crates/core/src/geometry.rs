//! Reference ribbon geometries, their metrics and incompatibility deficits.

use crate::error::{Error, Result};
use crate::fields::{SmoothField1D, StripField, SymField2x2};
use crate::frame::{FramePath, Generator, DEFAULT_STEP};
use crate::jet::Jet;
use nalgebra::{Matrix2, Matrix3, Vector2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Positivity margin on 1 - kappa z2.
pub const MIN_GEODESIC_FACTOR: f64 = 0.1;
/// Lower bound on metric eigenvalues over the admissible domain.
pub const MIN_METRIC_EIGENVALUE: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct RibbonGeometry {
    pub name: String,
    pub length: f64,
    pub kappa: SmoothField1D,
    pub gaussian_curvature: StripField,
    pub second_form: SymField2x2,
    pub flat: bool,
}

/// Midline data: kappa and the z2^0, z2^1 coefficients of II as jets in z1.
#[derive(Clone, Copy, Debug)]
pub struct MidlineData {
    pub kappa: Jet,
    pub l0: Jet,
    pub m0: Jet,
    pub n0: Jet,
    pub l1: Jet,
    pub m1: Jet,
    pub n1: Jet,
}

impl MidlineData {
    pub fn ii0(&self) -> Matrix2<f64> {
        Matrix2::new(self.l0.v(), self.m0.v(), self.m0.v(), self.n0.v())
    }
}

impl RibbonGeometry {
    pub fn flat(name: &str, length: f64, kappa: SmoothField1D, second_form: SymField2x2) -> Self {
        RibbonGeometry {
            name: name.to_string(),
            length,
            kappa,
            gaussian_curvature: StripField::zero(),
            second_form,
            flat: true,
        }
    }

    pub fn curved(
        name: &str,
        length: f64,
        kappa: SmoothField1D,
        gaussian_curvature: StripField,
        second_form: SymField2x2,
    ) -> Self {
        RibbonGeometry {
            name: name.to_string(),
            length,
            kappa,
            gaussian_curvature,
            second_form,
            flat: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::Domain(format!("length must be positive, got {}", self.length)));
        }
        if self.flat && !self.gaussian_curvature.is_zero() {
            return Err(Error::Domain("flat geometry with nonzero Gaussian curvature".into()));
        }
        Ok(())
    }

    pub fn kappa_at(&self, z1: f64) -> f64 {
        self.kappa.value(z1)
    }

    fn k_s(&self, z1: f64, z2: f64) -> f64 {
        if self.flat {
            0.0
        } else {
            self.gaussian_curvature.value(z1, z2)
        }
    }

    pub fn midline(&self, z1: f64) -> MidlineData {
        let [l0, m0, n0] = self.second_form.coeff(0, z1);
        let [l1, m1, n1] = self.second_form.coeff(1, z1);
        MidlineData { kappa: self.kappa.eval(z1), l0, m0, n0, l1, m1, n1 }
    }

    pub fn ii0(&self, z1: f64) -> Matrix2<f64> {
        self.second_form.value(z1, 0.0)
    }

    fn model_metric(&self, z: [f64; 3]) -> Matrix3<f64> {
        let [z1, z2, z3] = z;
        let k = self.kappa_at(z1);
        let g11 = (1.0 - k * z2).powi(2) - self.k_s(z1, 0.0) * z2 * z2;
        let ii = self.second_form.value(z1, z2);
        Matrix3::new(
            g11 - 2.0 * z3 * ii[(0, 0)],
            -2.0 * z3 * ii[(0, 1)],
            0.0,
            -2.0 * z3 * ii[(1, 0)],
            1.0 - 2.0 * z3 * ii[(1, 1)],
            0.0,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Model metric in ribbon coordinates (expansion truncated after the displayed terms).
    pub fn metric_at(&self, z: [f64; 3]) -> Result<Matrix3<f64>> {
        let g = self.model_metric(z);
        if g.cholesky().is_none() {
            return Err(Error::Domain(format!("metric not positive definite at z = {z:?}")));
        }
        Ok(g)
    }

    /// Unchecked variant for inner loops whose domain has been validated.
    pub fn metric_unchecked(&self, z: [f64; 3]) -> Matrix3<f64> {
        self.model_metric(z)
    }

    pub fn midsurface_metric(&self, z1: f64, z2: f64) -> Result<Matrix2<f64>> {
        let g = self.metric_at([z1, z2, 0.0])?;
        Ok(g.fixed_view::<2, 2>(0, 0).into_owned())
    }

    pub fn gauss_deficit(&self, z1: f64) -> f64 {
        self.ii0(z1).determinant() - self.k_s(z1, 0.0)
    }

    pub fn codazzi_deficit(&self, z1: f64) -> [f64; 2] {
        let s = self.second_form.eval(z1, 0.0);
        let k = self.kappa_at(z1);
        let ii = s.value;
        [
            s.d2[(0, 0)] - s.d1[(0, 1)] + k * (ii[(0, 0)] + ii[(1, 1)]),
            s.d2[(0, 1)] - s.d1[(1, 1)] - k * ii[(0, 1)],
        ]
    }

    pub fn gauss_deficit_1(&self, z1: f64) -> Result<f64> {
        let d = self.ii0(z1).determinant();
        if d.abs() > 1e-10 {
            return Err(Error::Domain(format!(
                "first-order deficit undefined off the Gauss-compatible stratum (det II = {d:e} at z1 = {z1})"
            )));
        }
        let m = self.midline(z1);
        Ok(m.l1.v() * m.n0.v() + m.n1.v() * m.l0.v() - 2.0 * m.m0.v() * m.m1.v())
    }

    /// Checks positivity margins on the strip of width `w` and thickness `t`.
    pub fn check_admissible(&self, w: f64, t: f64) -> Result<()> {
        let n1 = 64;
        let n2 = 8;
        for i in 0..=n1 {
            let z1 = self.length * i as f64 / n1 as f64;
            for j in 0..=n2 {
                let z2 = w * (j as f64 / n2 as f64 - 0.5);
                let f = 1.0 - self.kappa_at(z1) * z2;
                if f < MIN_GEODESIC_FACTOR {
                    return Err(Error::Domain(format!(
                        "1 - kappa z2 = {f:.4} < {MIN_GEODESIC_FACTOR} at z = ({z1}, {z2})"
                    )));
                }
                for &z3 in &[-0.5 * t, 0.0, 0.5 * t] {
                    let g = self.model_metric([z1, z2, z3]);
                    let ev = g.symmetric_eigenvalues().min();
                    if ev < MIN_METRIC_EIGENVALUE {
                        return Err(Error::Domain(format!(
                            "metric eigenvalue {ev:.4} < {MIN_METRIC_EIGENVALUE} at z = ({z1}, {z2}, {z3})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parameters of a named preset.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub preset: String,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn default_length() -> f64 {
    1.0
}

impl PresetSpec {
    pub fn new(preset: &str, params: &[(&str, f64)]) -> Self {
        PresetSpec {
            preset: preset.to_string(),
            length: 1.0,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn build(&self) -> Result<RibbonGeometry> {
        preset(&self.preset, self.length, &self.params)
    }
}

pub const PRESET_NAMES: [&str; 7] = ["euclidean", "cylinder", "fig1a", "fig1b", "fig1c", "fig1d", "fig1e"];

/// Named closed-form geometries.
///
/// * `euclidean {kappa}`: II = 0.
/// * `cylinder {l}`: kappa = 0, II = diag(l, 0).
/// * `fig1a {kappa, curvature}`: II = c I, Gauss-incompatible.
/// * `fig1b {slope}`: kappa = 0, II = diag(0, slope z1).
/// * `fig1c {kappa, l, m}`: II = [[l, m], [m, m^2/l]] constant.
/// * `fig1d {kappa, n}`: II = diag(0, n).
/// * `fig1e {kappa, l, l1}`: II = diag(l + l1 z2, 0).
pub fn preset(name: &str, length: f64, params: &BTreeMap<String, f64>) -> Result<RibbonGeometry> {
    let allowed: &[&str] = match name {
        "euclidean" => &["kappa"],
        "cylinder" => &["l"],
        "fig1a" => &["kappa", "curvature"],
        "fig1b" => &["slope"],
        "fig1c" => &["kappa", "l", "m"],
        "fig1d" => &["kappa", "n"],
        "fig1e" => &["kappa", "l", "l1"],
        _ => {
            return Err(Error::Config(format!(
                "unknown preset '{name}' (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Config(format!("preset '{name}' has no parameter '{k}'")));
    }
    let p = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let c = SmoothField1D::Constant;
    let g = match name {
        "euclidean" => RibbonGeometry::flat(name, length, c(p("kappa", 0.0)), SymField2x2::zero()),
        "cylinder" => RibbonGeometry::flat(name, length, c(0.0), SymField2x2::constant(p("l", 1.0), 0.0, 0.0)),
        "fig1a" => {
            let k = p("curvature", 1.0);
            RibbonGeometry::flat(name, length, c(p("kappa", 0.0)), SymField2x2::constant(k, 0.0, k))
        }
        "fig1b" => RibbonGeometry::flat(
            name,
            length,
            c(0.0),
            SymField2x2::new(
                StripField::zero(),
                StripField::zero(),
                StripField::midline(SmoothField1D::Polynomial(vec![0.0, p("slope", 1.0)])),
            ),
        ),
        "fig1c" => {
            let l = p("l", 1.0);
            let m = p("m", 0.5);
            if l == 0.0 {
                return Err(Error::Config("fig1c requires l != 0".into()));
            }
            RibbonGeometry::flat(name, length, c(p("kappa", 1.0)), SymField2x2::constant(l, m, m * m / l))
        }
        "fig1d" => RibbonGeometry::flat(name, length, c(p("kappa", 1.0)), SymField2x2::constant(0.0, 0.0, p("n", 1.0))),
        "fig1e" => RibbonGeometry::flat(
            name,
            length,
            c(p("kappa", 0.5)),
            SymField2x2::new(
                StripField::from_coeffs(vec![c(p("l", 1.0)), c(p("l1", 0.0))]),
                StripField::zero(),
                StripField::zero(),
            ),
        ),
        _ => unreachable!(),
    };
    g.validate()?;
    Ok(g)
}

/// The planar isometric immersion of the flat strip and its rotation path.
#[derive(Clone, Debug)]
pub struct PlanarImmersion {
    pub frame: FramePath,
    kappa: SmoothField1D,
    pub warnings: Vec<String>,
}

impl PlanarImmersion {
    pub fn rotation(&self, z1: f64) -> Matrix2<f64> {
        self.frame.eval(z1).fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn point(&self, z1: f64, z2: f64) -> Vector2<f64> {
        let i = self.frame.integral(z1);
        let p = self.rotation(z1);
        Vector2::new(i[(0, 0)], i[(1, 0)]) + p.column(1) * z2
    }

    pub fn jacobian(&self, z1: f64, z2: f64) -> Matrix2<f64> {
        let p = self.rotation(z1);
        let k = self.kappa.value(z1);
        Matrix2::from_columns(&[p.column(0) * (1.0 - k * z2), p.column(1).into_owned()])
    }

    pub fn kappa(&self, z1: f64) -> f64 {
        self.kappa.value(z1)
    }
}

/// chi(z1, z2) = int_0^z1 P e1 + z2 P e2 with P' = P [[0,-k],[k,0]], P(0) = I.
pub fn planar_immersion(geom: &RibbonGeometry, w: f64) -> Result<PlanarImmersion> {
    if !geom.flat {
        return Err(Error::Domain("planar immersion requires a flat geometry".into()));
    }
    geom.check_admissible(w, 0.0)?;
    let kappa = geom.kappa.clone();
    let k2 = kappa.clone();
    let gen: Generator = Arc::new(move |s| {
        let k = k2.value(s);
        Matrix3::new(0.0, -k, 0.0, k, 0.0, 0.0, 0.0, 0.0, 0.0)
    });
    let pad = 0.1 * geom.length;
    let frame = FramePath::integrate(gen, Matrix3::identity(), 0.0, -pad, geom.length + pad, DEFAULT_STEP);
    let mut imm = PlanarImmersion { frame, kappa, warnings: Vec::new() };
    imm.warnings = self_intersection_warnings(geom.length, w, |s| imm.point(s, 0.0));
    for msg in &imm.warnings {
        log::warn!("{msg}");
    }
    Ok(imm)
}

/// Flags pairs of midline points that are far apart along the curve but closer than the
/// strip width in space.
pub(crate) fn self_intersection_warnings(
    length: f64,
    w: f64,
    midline: impl Fn(f64) -> Vector2<f64>,
) -> Vec<String> {
    let n = 200;
    let pts: Vec<(f64, Vector2<f64>)> = (0..=n)
        .map(|i| {
            let s = length * i as f64 / n as f64;
            (s, midline(s))
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (si, pi) = pts[i];
            let (sj, pj) = pts[j];
            if sj - si > 2.0 * w && (pi - pj).norm() < w {
                out.push(format!("possible self-intersection: midline points s = {si:.4} and s = {sj:.4}"));
                return out;
            }
        }
    }
    out
}
