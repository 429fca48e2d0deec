use crate::error::{Error, Result};
use crate::sim::{Config3, SurfaceConfig};
use nalgebra::Vector3;
use std::fmt::Write as _;
use std::path::Path;

/// Triangle mesh; faces are counter-clockwise seen from the side of d1 x d2.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// Triangulates an n1 x n2 lattice stored row-major (index i n2 + j).
    pub fn from_lattice(n1: usize, n2: usize, vertices: Vec<Vector3<f64>>, flip: bool) -> Self {
        let mut faces = Vec::with_capacity(2 * (n1 - 1) * (n2 - 1));
        let id = |i: usize, j: usize| i * n2 + j;
        for i in 0..n1 - 1 {
            for j in 0..n2 - 1 {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if flip {
                    faces.push([a, c, b]);
                    faces.push([a, d, c]);
                } else {
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                }
            }
        }
        Mesh { vertices, faces }
    }

    pub fn from_surface(f: &SurfaceConfig) -> Self {
        Self::from_lattice(f.grid.n[0], f.grid.n[1], f.positions.clone(), false)
    }

    /// The faces x3 = 1/2 (outward +) and x3 = -1/2 of a 3D configuration.
    pub fn from_config_faces(u: &Config3) -> Self {
        let [n1, n2, n3] = u.grid.n;
        let sheet = |k: usize| -> Vec<Vector3<f64>> {
            (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).map(|(i, j)| u.positions[u.grid.index(i, j, k)]).collect()
        };
        let mut top = Self::from_lattice(n1, n2, sheet(n3 - 1), false);
        top.append(Self::from_lattice(n1, n2, sheet(0), true));
        top
    }

    pub fn append(&mut self, other: Mesh) {
        let off = self.vertices.len();
        self.vertices.extend(other.vertices);
        self.faces.extend(other.faces.into_iter().map(|f| f.map(|k| k + off)));
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            writeln!(s, "v {:.12e} {:.12e} {:.12e}", v.x, v.y, v.z).unwrap();
        }
        for f in &self.faces {
            writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
        }
        s
    }

    /// Parses the v/f subset written by [`Mesh::to_obj`].
    pub fn from_obj(text: &str) -> Result<Self> {
        let mut m = Mesh::default();
        for line in text.lines() {
            let mut it = line.split_whitespace();
            let bad = || Error::Config(format!("bad obj line: {line}"));
            match it.next() {
                Some("v") => {
                    let c: Vec<f64> = it.map(|x| x.parse().map_err(|_| bad())).collect::<Result<_>>()?;
                    if c.len() != 3 {
                        return Err(bad());
                    }
                    m.vertices.push(Vector3::new(c[0], c[1], c[2]));
                }
                Some("f") => {
                    let c: Vec<usize> = it.map(|x| x.parse().map_err(|_| bad())).collect::<Result<_>>()?;
                    if c.len() != 3 || c.iter().any(|&k| k == 0) {
                        return Err(bad());
                    }
                    m.faces.push([c[0] - 1, c[1] - 1, c[2] - 1]);
                }
                _ => {}
            }
        }
        Ok(m)
    }
}

pub fn export_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, mesh.to_obj()).map_err(|e| Error::io(path, e))
}
