use super::{SurfaceMap, SurfacePoint};
use crate::error::{Error, Result};
use crate::fields::{StripSymField, SymSample};
use crate::geometry::RibbonGeometry;
use nalgebra::{Matrix2, Matrix3, Vector3};

/// Position and orientation of the frame at the base corner.
#[derive(Clone, Copy, Debug)]
pub struct BaseFrame {
    pub origin: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl Default for BaseFrame {
    fn default() -> Self {
        BaseFrame { origin: Vector3::zeros(), rotation: Matrix3::identity() }
    }
}

/// Surface integrated from (a, II) on a rectangular grid.
#[derive(Clone, Debug)]
pub struct FormsSurface {
    pub n1: usize,
    pub n2: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    /// Nodal positions, index i * n2 + j (integrated along x1 first, then x2).
    pub positions: Vec<Vector3<f64>>,
    /// Nodal frames (d1 f | d2 f | nu).
    pub frames: Vec<Matrix3<f64>>,
    /// Max difference between the two integration orders over all nodes.
    pub residual: f64,
}

impl FormsSurface {
    fn h(&self) -> (f64, f64) {
        (
            (self.x_range[1] - self.x_range[0]) / (self.n1 - 1) as f64,
            (self.y_range[1] - self.y_range[0]) / (self.n2 - 1) as f64,
        )
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let (h1, h2) = self.h();
        (self.x_range[0] + i as f64 * h1, self.y_range[0] + j as f64 * h2)
    }

    /// First and second fundamental forms at an interior node (at least two nodes from the
    /// boundary), from the nodal frames with 4th-order differences.
    pub fn extracted_forms(&self, i: usize, j: usize) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
        if i < 2 || j < 2 || i + 2 >= self.n1 || j + 2 >= self.n2 {
            return Err(Error::Domain(format!("node ({i}, {j}) too close to the boundary")));
        }
        let (h1, h2) = self.h();
        let fr = |a: usize, b: usize| self.frames[a * self.n2 + b];
        let d = |m: [Matrix3<f64>; 4], h: f64| (8.0 * (m[0] - m[1]) - (m[2] - m[3])) / (12.0 * h);
        let dx = d([fr(i + 1, j), fr(i - 1, j), fr(i + 2, j), fr(i - 2, j)], h1);
        let dy = d([fr(i, j + 1), fr(i, j - 1), fr(i, j + 2), fr(i, j - 2)], h2);
        let f = fr(i, j);
        let (f1, f2) = (f.column(0).into_owned(), f.column(1).into_owned());
        let nu = f1.cross(&f2).normalize();
        let a = Matrix2::new(f1.dot(&f1), f1.dot(&f2), f1.dot(&f2), f2.dot(&f2));
        let ii = Matrix2::new(
            nu.dot(&dx.column(0)),
            0.5 * (nu.dot(&dx.column(1)) + nu.dot(&dy.column(0))),
            0.5 * (nu.dot(&dx.column(1)) + nu.dot(&dy.column(0))),
            nu.dot(&dy.column(1)),
        );
        Ok((a, ii))
    }
}

type Fields<'a> = (&'a dyn Fn(f64, f64) -> SymSample, &'a dyn Fn(f64, f64) -> SymSample);

fn connection(fields: Fields<'_>, x: f64, y: f64, dir: usize) -> Matrix3<f64> {
    let sa = (fields.0)(x, y);
    let sb = (fields.1)(x, y);
    let a = sa.value;
    let ainv = a.try_inverse().unwrap_or_else(Matrix2::zeros);
    let da = [sa.d1, sa.d2];
    let ii = sb.value;
    let mut g = Matrix3::zeros();
    let i = dir;
    for k in 0..2 {
        for j in 0..2 {
            let mut s = 0.0;
            for l in 0..2 {
                s += ainv[(k, l)] * (da[i][(l, j)] + da[j][(l, i)] - da[l][(i, j)]);
            }
            g[(k, j)] = 0.5 * s;
        }
        let mut up = 0.0;
        for l in 0..2 {
            up += ainv[(k, l)] * ii[(l, i)];
        }
        g[(k, 2)] = -up;
    }
    for j in 0..2 {
        g[(2, j)] = ii[(i, j)];
    }
    g
}

/// One RK4 step of dF = F Gamma_dir, df = F e_dir along direction `dir`.
fn rk4(fields: Fields<'_>, f: &Matrix3<f64>, p: &Vector3<f64>, x: f64, y: f64, dir: usize, h: f64) -> (Matrix3<f64>, Vector3<f64>) {
    let at = |s: f64| if dir == 0 { (x + s, y) } else { (x, y + s) };
    let rhs = |fm: &Matrix3<f64>, s: f64| {
        let (u, v) = at(s);
        (fm * connection(fields, u, v, dir), fm.column(dir).into_owned())
    };
    let (k1, l1) = rhs(f, 0.0);
    let (k2, l2) = rhs(&(f + k1 * (0.5 * h)), 0.5 * h);
    let (k3, l3) = rhs(&(f + k2 * (0.5 * h)), 0.5 * h);
    let (k4, l4) = rhs(&(f + k3 * h), h);
    (
        f + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0),
        p + (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (h / 6.0),
    )
}

const SUBSTEPS: usize = 4;

fn march(fields: Fields<'_>, f: Matrix3<f64>, p: Vector3<f64>, x: f64, y: f64, dir: usize, h: f64) -> (Matrix3<f64>, Vector3<f64>) {
    let hs = h / SUBSTEPS as f64;
    let (mut f, mut p) = (f, p);
    for k in 0..SUBSTEPS {
        let s = k as f64 * hs;
        let (u, v) = if dir == 0 { (x + s, y) } else { (x, y + s) };
        let r = rk4(fields, &f, &p, u, v, dir, hs);
        f = r.0;
        p = r.1;
    }
    (f, p)
}

/// Integrates the moving-frame system of (a, II) over [x0, x1] x [y0, y1] on an n1 x n2 node
/// grid, once along x1 then x2 and once in the opposite order; the mismatch is returned as
/// the path-dependence residual.
pub fn surface_from_forms(
    a: &dyn Fn(f64, f64) -> SymSample,
    ii: &dyn Fn(f64, f64) -> SymSample,
    x_range: [f64; 2],
    y_range: [f64; 2],
    n1: usize,
    n2: usize,
    base: BaseFrame,
) -> Result<FormsSurface> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::Domain("surface_from_forms needs at least 2 nodes per direction".into()));
    }
    let fields: Fields<'_> = (a, ii);
    let a0 = a(x_range[0], y_range[0]).value;
    let chol = a0
        .cholesky()
        .ok_or_else(|| Error::Domain(format!("first form not positive definite at ({}, {})", x_range[0], y_range[0])))?;
    let lt = chol.l().transpose();
    let f0 = base.rotation * Matrix3::new(lt[(0, 0)], lt[(0, 1)], 0.0, 0.0, lt[(1, 1)], 0.0, 0.0, 0.0, 1.0);
    let h1 = (x_range[1] - x_range[0]) / (n1 - 1) as f64;
    let h2 = (y_range[1] - y_range[0]) / (n2 - 1) as f64;
    let x = |i: usize| x_range[0] + i as f64 * h1;
    let y = |j: usize| y_range[0] + j as f64 * h2;
    let idx = |i: usize, j: usize| i * n2 + j;

    let mut fa = vec![Matrix3::zeros(); n1 * n2];
    let mut pa = vec![Vector3::zeros(); n1 * n2];
    fa[0] = f0;
    pa[0] = base.origin;
    for i in 1..n1 {
        let (f, p) = march(fields, fa[idx(i - 1, 0)], pa[idx(i - 1, 0)], x(i - 1), y(0), 0, h1);
        fa[idx(i, 0)] = f;
        pa[idx(i, 0)] = p;
    }
    for i in 0..n1 {
        for j in 1..n2 {
            let (f, p) = march(fields, fa[idx(i, j - 1)], pa[idx(i, j - 1)], x(i), y(j - 1), 1, h2);
            fa[idx(i, j)] = f;
            pa[idx(i, j)] = p;
        }
    }

    let mut fb = vec![Matrix3::zeros(); n1 * n2];
    let mut pb = vec![Vector3::zeros(); n1 * n2];
    fb[0] = f0;
    pb[0] = base.origin;
    for j in 1..n2 {
        let (f, p) = march(fields, fb[idx(0, j - 1)], pb[idx(0, j - 1)], x(0), y(j - 1), 1, h2);
        fb[idx(0, j)] = f;
        pb[idx(0, j)] = p;
    }
    for j in 0..n2 {
        for i in 1..n1 {
            let (f, p) = march(fields, fb[idx(i - 1, j)], pb[idx(i - 1, j)], x(i - 1), y(j), 0, h1);
            fb[idx(i, j)] = f;
            pb[idx(i, j)] = p;
        }
    }
    let residual = (0..n1 * n2)
        .map(|k| (fa[k] - fb[k]).amax().max((pa[k] - pb[k]).amax()))
        .fold(0.0, f64::max);
    Ok(FormsSurface { n1, n2, x_range, y_range, positions: pa, frames: fa, residual })
}

/// Rescaled Gauss-Codazzi residuals of a second-form field on S for a flat first form.
#[derive(Clone, Debug)]
pub struct GcResidual {
    /// (x1, x2, det II, codazzi 1, codazzi 2) per sample.
    pub samples: Vec<[f64; 5]>,
    pub max_gauss: f64,
    pub max_codazzi: [f64; 2],
}

impl GcResidual {
    pub fn max(&self) -> f64 {
        self.max_gauss.max(self.max_codazzi[0]).max(self.max_codazzi[1])
    }
}

/// Evaluates det II and the two rescaled Codazzi residuals on an (n1 + 1) x (n2 + 1) grid
/// of S.
pub fn gc_residual(geom: &RibbonGeometry, w: f64, field: &dyn StripSymField, n1: usize, n2: usize) -> GcResidual {
    let mut samples = Vec::with_capacity((n1 + 1) * (n2 + 1));
    let (mut mg, mut mc) = (0.0f64, [0.0f64; 2]);
    for i in 0..=n1 {
        let x1 = geom.length * i as f64 / n1 as f64;
        let kj = geom.kappa.eval(x1);
        let (k, kd) = (kj.v(), kj.d(1));
        for j in 0..=n2 {
            let x2 = j as f64 / n2 as f64 - 0.5;
            let s = field.sample(x1, x2);
            let (v, d1, d2) = (s.value, s.d1, s.d2);
            let u = 1.0 - k * w * x2;
            let gauss = v.determinant();
            let c1 = u * (d2[(0, 0)] / w - d1[(0, 1)]) + k * v[(0, 0)] - kd * w * x2 * v[(0, 1)] + k * u * u * v[(1, 1)];
            let c2 = u * (d2[(0, 1)] / w - d1[(1, 1)]) - k * v[(0, 1)];
            mg = mg.max(gauss.abs());
            mc[0] = mc[0].max(c1.abs());
            mc[1] = mc[1].max(c2.abs());
            samples.push([x1, x2, gauss, c1, c2]);
        }
    }
    GcResidual { samples, max_gauss: mg, max_codazzi: mc }
}

/// The rescaled second form II^w(x1, x2) = II_v(x1, w x2) of a surface, with partials by
/// 4th-order differences.
pub struct RescaledSecondForm<'a> {
    pub surface: &'a dyn SurfaceMap,
    pub w: f64,
}

impl RescaledSecondForm<'_> {
    fn ii(&self, z1: f64, z2: f64) -> Matrix2<f64> {
        self.surface.point(z1, z2).map(|p: SurfacePoint| p.second_form).unwrap_or_else(|_| Matrix2::repeat(f64::NAN))
    }
}

impl StripSymField for RescaledSecondForm<'_> {
    fn sample(&self, x1: f64, x2: f64) -> SymSample {
        let z2 = self.w * x2;
        let h = 1e-3 * self.surface.length().min(1.0);
        let hz = 0.05 * self.w;
        let d = |f: &dyn Fn(f64) -> Matrix2<f64>, h: f64| (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
        let d1 = d(&|s| self.ii(x1 + s, z2), h);
        let d2 = d(&|s| self.ii(x1, z2 + s), hz) * self.w;
        SymSample { value: self.ii(x1, z2), d1, d2 }
    }
}
