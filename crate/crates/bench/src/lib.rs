//! Shared fixtures for the criterion benchmarks.

use ribbonlab::constructions::PsiConfig;
use ribbonlab::geometry::{PresetSpec, RibbonGeometry};
use ribbonlab::quadform::IsotropicModuli;
use ribbonlab::sim::{sample_config, Config3, Discrete3d, Energy3d, Grid3};

pub fn preset(name: &str) -> RibbonGeometry {
    PresetSpec::new(name, &[]).build().expect("preset builds")
}

/// Discretized 3D energy of geometry (c) with sampled Psi_t on an n1 x n2 x 3 grid.
pub fn energy3d_fixture(n1: usize, n2: usize) -> (Discrete3d, Config3) {
    let g = preset("fig1c");
    let (t, w) = (0.01, 0.1);
    let e = Energy3d::new(&g, IsotropicModuli::default(), t, w).expect("energy");
    let grid = Grid3::new(n1, n2, 3, g.length).expect("grid");
    let u = sample_config(&PsiConfig { ribbon: e.ribbon.clone(), t, w }, grid).expect("sample");
    (e.discretize(grid).expect("discretize"), u)
}
