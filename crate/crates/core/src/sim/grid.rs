use crate::constructions::{AnalyticConfig3, SurfaceMap};
use crate::error::{Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Node grid on U = (0, L) x (-1/2, 1/2)^2; cells are trilinear elements with 2x2x2 Gauss
/// points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub n: [usize; 3],
    pub length: f64,
}

impl Grid3 {
    pub fn new(n1: usize, n2: usize, n3: usize, length: f64) -> Result<Self> {
        if n1 < 4 || n2 < 2 || n3 < 2 {
            return Err(Error::Domain(format!("Grid3 needs n1 >= 4, n2 >= 2, n3 >= 2 (got {n1} x {n2} x {n3})")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("Grid3 needs a positive length, got {length}")));
        }
        Ok(Grid3 { n: [n1, n2, n3], length })
    }

    pub fn spacing(&self) -> [f64; 3] {
        [self.length / (self.n[0] - 1) as f64, 1.0 / (self.n[1] - 1) as f64, 1.0 / (self.n[2] - 1) as f64]
    }

    pub fn node_count(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn cell_count(&self) -> usize {
        (self.n[0] - 1) * (self.n[1] - 1) * (self.n[2] - 1)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing();
        [i as f64 * h[0], -0.5 + j as f64 * h[1], -0.5 + k as f64 * h[2]]
    }

    /// Lower corner (i, j, k) of cell number `c`.
    pub fn cell(&self, c: usize) -> [usize; 3] {
        let (m2, m3) = (self.n[1] - 1, self.n[2] - 1);
        [c / (m2 * m3), (c / m3) % m2, c % m3]
    }

    /// Node indices of cell `c`, ordered by local corner bits (a, b, c) -> 4a + 2b + c.
    pub fn cell_nodes(&self, c: usize) -> [usize; 8] {
        let [i, j, k] = self.cell(c);
        let mut out = [0; 8];
        for (m, o) in out.iter_mut().enumerate() {
            *o = self.index(i + (m >> 2), j + ((m >> 1) & 1), k + (m & 1));
        }
        out
    }
}

/// Nodal positions of a deformation of U.
#[derive(Clone, Debug, PartialEq)]
pub struct Config3 {
    pub grid: Grid3,
    pub positions: Vec<Vector3<f64>>,
}

impl Config3 {
    pub fn new(grid: Grid3, positions: Vec<Vector3<f64>>) -> Result<Self> {
        if positions.len() != grid.node_count() {
            return Err(Error::Domain(format!(
                "config has {} nodes, grid expects {}",
                positions.len(),
                grid.node_count()
            )));
        }
        if positions.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(Error::Numeric("non-finite nodal position".into()));
        }
        Ok(Config3 { grid, positions })
    }

    /// The identity map x -> x.
    pub fn identity(grid: Grid3) -> Self {
        let mut positions = Vec::with_capacity(grid.node_count());
        for i in 0..grid.n[0] {
            for j in 0..grid.n[1] {
                for k in 0..grid.n[2] {
                    positions.push(Vector3::from(grid.node(i, j, k)));
                }
            }
        }
        Config3 { grid, positions }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        flatten(&self.positions)
    }

    pub fn from_flat(grid: Grid3, x: &[f64]) -> Result<Self> {
        Config3::new(grid, unflatten(x))
    }
}

/// Node grid on the physical strip S_w = (0, L) x (-w/2, w/2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub n: [usize; 2],
    pub length: f64,
    pub width: f64,
}

impl Grid2 {
    pub fn new(n1: usize, n2: usize, length: f64, width: f64) -> Result<Self> {
        if n1 < 4 || n2 < 4 {
            return Err(Error::Domain(format!("surface grid needs at least 4 x 4 nodes (got {n1} x {n2})")));
        }
        if !(length > 0.0 && width > 0.0) {
            return Err(Error::Domain(format!("surface grid needs L, w > 0 (got {length}, {width})")));
        }
        Ok(Grid2 { n: [n1, n2], length, width })
    }

    pub fn spacing(&self) -> [f64; 2] {
        [self.length / (self.n[0] - 1) as f64, self.width / (self.n[1] - 1) as f64]
    }

    pub fn node_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n[1] + j
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [i as f64 * h[0], -0.5 * self.width + j as f64 * h[1]]
    }
}

/// Nodal positions of a surface over S_w.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceConfig {
    pub grid: Grid2,
    pub positions: Vec<Vector3<f64>>,
}

impl SurfaceConfig {
    pub fn new(grid: Grid2, positions: Vec<Vector3<f64>>) -> Result<Self> {
        if positions.len() != grid.node_count() {
            return Err(Error::Domain(format!(
                "surface has {} nodes, grid expects {}",
                positions.len(),
                grid.node_count()
            )));
        }
        if positions.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(Error::Numeric("non-finite nodal position".into()));
        }
        Ok(SurfaceConfig { grid, positions })
    }

    /// The flat embedding (z1, z2, 0).
    pub fn flat(grid: Grid2) -> Self {
        let positions = (0..grid.n[0])
            .flat_map(|i| (0..grid.n[1]).map(move |j| (i, j)))
            .map(|(i, j)| {
                let [z1, z2] = grid.node(i, j);
                Vector3::new(z1, z2, 0.0)
            })
            .collect();
        SurfaceConfig { grid, positions }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        flatten(&self.positions)
    }

    pub fn from_flat(grid: Grid2, x: &[f64]) -> Result<Self> {
        SurfaceConfig::new(grid, unflatten(x))
    }
}

pub(crate) fn flatten(p: &[Vector3<f64>]) -> Vec<f64> {
    p.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
}

pub(crate) fn unflatten(x: &[f64]) -> Vec<Vector3<f64>> {
    x.chunks_exact(3).map(|c| Vector3::new(c[0], c[1], c[2])).collect()
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Samples an analytic deformation of U at the grid nodes.
pub fn sample_config(u: &dyn AnalyticConfig3, grid: Grid3) -> Result<Config3> {
    if !same(u.length(), grid.length) {
        return Err(Error::Domain(format!("map defined on length {}, grid has length {}", u.length(), grid.length)));
    }
    let mut positions = Vec::with_capacity(grid.node_count());
    for i in 0..grid.n[0] {
        for j in 0..grid.n[1] {
            for k in 0..grid.n[2] {
                positions.push(u.eval(grid.node(i, j, k)).0);
            }
        }
    }
    Config3::new(grid, positions)
}

/// Samples a surface at the nodes of a strip grid.
pub fn sample_surface(f: &dyn SurfaceMap, grid: Grid2) -> Result<SurfaceConfig> {
    if !same(f.length(), grid.length) || !same(f.width(), grid.width) {
        return Err(Error::Domain(format!(
            "surface defined on {} x {}, grid covers {} x {}",
            f.length(),
            f.width(),
            grid.length,
            grid.width
        )));
    }
    let mut positions = Vec::with_capacity(grid.node_count());
    for i in 0..grid.n[0] {
        for j in 0..grid.n[1] {
            let [z1, z2] = grid.node(i, j);
            positions.push(f.point(z1, z2)?.f);
        }
    }
    SurfaceConfig::new(grid, positions)
}
