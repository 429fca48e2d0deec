use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ribbonlab::constructions::{ansatz_field, AnsatzKind};
use ribbonlab::euclidean::EuclideanRibbon;
use ribbonlab::limits::{min_j, plate_energy, FormField};
use ribbonlab::quadform::{IsotropicModuli, QuadForm3};
use ribbonlab::sim::{Grid2, ReducedModel, ReducedWeights, SurfaceConfig};
use ribbonlab_bench::{energy3d_fixture, preset};

fn energy3d(c: &mut Criterion) {
    let (d, u) = energy3d_fixture(33, 9);
    c.bench_function("energy3d_gradient_33x9x3", |b| b.iter(|| d.energy_and_gradient(black_box(&u)).unwrap()));
}

fn reduced(c: &mut Criterion) {
    let g = preset("fig1a");
    let grid = Grid2::new(41, 9, g.length, 0.05).unwrap();
    let model = ReducedModel::new(&g, 1e-3, grid, ReducedWeights::default()).unwrap();
    let f = SurfaceConfig::flat(grid);
    c.bench_function("reduced_gradient_41x9", |b| b.iter(|| model.energy_and_gradient(black_box(&f)).unwrap()));
    c.bench_function("reduced_gauss_newton_41x9", |b| b.iter(|| model.gauss_newton(black_box(&f)).unwrap()));
}

fn plate(c: &mut Criterion) {
    let g = preset("fig1d");
    let ribbon = EuclideanRibbon::new(&g);
    let q3 = QuadForm3::isotropic(&IsotropicModuli::default());
    let w = 1e-3;
    let field = ansatz_field(AnsatzKind::D, &g, w, None).unwrap();
    c.bench_function("plate_energy_ansatz_d", |b| b.iter(|| plate_energy(&ribbon, &q3, black_box(w), &field).unwrap()));
}

fn wide(c: &mut Criterion) {
    let g = preset("fig1a");
    let f = FormField::isotropic(&IsotropicModuli::default());
    c.bench_function("min_j_fig1a", |b| b.iter(|| min_j(black_box(&g), &f).unwrap()));
}

criterion_group!(benches, energy3d, reduced, plate, wide);
criterion_main!(benches);
