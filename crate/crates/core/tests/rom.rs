mod common;

use common::{letter, random_vec};
use heatsrc::linalg::{dot, sym_eig_small};
use heatsrc::measure::GaussianStream;
use heatsrc::oracle::mode;
use heatsrc::rom::{rom_forward_solve_with_stats, DEFAULT_ELL, DEFAULT_TOL};
use heatsrc::sources::rasterize_image_source;
use heatsrc::{
    assemble, build_mesh, fem_forward_solve, get_matrix_q, load_pgm, reduce, DenseSymMatrix, FemSystem,
    NodalFunction, RomBasis, TimeGrid,
};

fn gram_defect(sys: &FemSystem, basis: &RomBasis) -> f64 {
    let r = basis.rank();
    let aq: Vec<Vec<f64>> = basis.q().iter().map(|c| sys.stiffness().spmv(c).unwrap()).collect();
    let mut err = 0.0;
    for i in 0..r {
        for j in 0..r {
            let want = if i == j { 1.0 } else { 0.0 };
            err += (dot(&basis.q()[i], &aq[j]) - want).powi(2);
        }
    }
    err.sqrt()
}

fn sources(h: f64) -> (FemSystem, Vec<NodalFunction>) {
    let mesh = build_mesh(1.0, 1.0, h).unwrap();
    let sys = assemble(&mesh).unwrap();
    let mut list = vec![
        NodalFunction::interpolate(&mesh, mode(1, 1, 1.0, 1.0)),
        NodalFunction::interpolate(&mesh, mode(2, 1, 1.0, 1.0)),
    ];
    for name in ["A", "C", "M", "U"] {
        list.push(rasterize_image_source(&load_pgm(letter(name)).unwrap(), &mesh, 128));
    }
    let mut rng = GaussianStream::new(4);
    list.push(NodalFunction::new(random_vec(sys.n_dofs(), &mut rng)));
    (sys, list)
}

#[test]
fn basis_is_energy_orthonormal() {
    let (sys, list) = sources(1.0 / 32.0);
    for f in &list {
        let b = sys.load_vector(f).unwrap();
        let basis = get_matrix_q(&sys, &b, DEFAULT_ELL, DEFAULT_TOL).unwrap();
        assert!(basis.rank() >= 1 && basis.rank() <= DEFAULT_ELL);
        assert!(basis.retained_eigenvalues().iter().all(|&l| l > DEFAULT_TOL));

        assert!(gram_defect(&sys, &basis) <= 1e-8);
        let red = reduce(&sys, &basis, &b).unwrap();
        let eye = DenseSymMatrix::from_fn(basis.rank(), |i, j| if i == j { 1.0 } else { 0.0 });
        assert!(red.a_r.combine(1.0, &eye, -1.0).frobenius_norm() <= 1e-8);
    }
}

#[test]
fn bordering_interlaces() {
    let (sys, list) = sources(1.0 / 32.0);
    for f in &list {
        let b = sys.load_vector(f).unwrap();
        let basis = get_matrix_q(&sys, &b, DEFAULT_ELL, DEFAULT_TOL).unwrap();
        let spectra = basis.bordering_spectra();
        assert_eq!(spectra.len(), basis.krylov_vectors());
        for w in spectra.windows(2) {
            let (old, new) = (&w[0], &w[1]);
            let slack = 1e-12 * new[0];
            assert!(new[0] >= old[0] - slack);
            assert!(new.last().unwrap() <= &(old.last().unwrap() + slack));
            // Cauchy interlacing on every interior pair
            for k in 0..old.len() {
                assert!(new[k] >= old[k] - slack && old[k] >= new[k + 1] - slack);
            }
        }
    }
}

#[test]
fn bordered_gram_matches_direct_gram() {
    let (sys, list) = sources(1.0 / 32.0);
    for f in &list {
        let b = sys.load_vector(f).unwrap();
        let basis = get_matrix_q(&sys, &b, DEFAULT_ELL, DEFAULT_TOL).unwrap();
        let u = basis.krylov();
        let au: Vec<Vec<f64>> = u.iter().map(|v| sys.stiffness().spmv(v).unwrap()).collect();
        let direct = DenseSymMatrix::from_fn(u.len(), |i, j| 0.5 * (dot(&u[i], &au[j]) + dot(&u[j], &au[i])));
        let e = sym_eig_small(&direct).unwrap();
        let bordered = sym_eig_small(basis.gram()).unwrap();
        let top = e.eigenvalues[0];
        for (k, &lam) in basis.retained_eigenvalues().iter().enumerate() {
            assert!((bordered.eigenvalues[k] - lam).abs() <= 1e-14 * top);
            let d = (e.eigenvalues[k] - lam).abs();
            assert!(d <= 1e-10 * lam.max(1e-6 * top), "k={k} lam={lam} direct={}", e.eigenvalues[k]);
        }
    }
}

#[test]
fn energy_projector_is_idempotent() {
    let (sys, list) = sources(1.0 / 16.0);
    let a = sys.stiffness();
    let mut rng = GaussianStream::new(8);
    for f in &list {
        let b = sys.load_vector(f).unwrap();
        let basis = get_matrix_q(&sys, &b, DEFAULT_ELL, DEFAULT_TOL).unwrap();
        let a_r = reduce(&sys, &basis, &b).unwrap().a_r;
        let project = |v: &[f64]| basis.prolong(&a_r.matvec(&basis.restrict(&a.spmv(v).unwrap())));
        for _ in 0..3 {
            let v = random_vec(sys.n_dofs(), &mut rng);
            let once = project(&v);
            let twice = project(&once);
            assert!(common::rel_diff(&twice, &once) <= 1e-8);
        }
    }
}

#[test]
fn eigenfunction_source_has_tiny_rank() {
    let (sys, list) = sources(1.0 / 32.0);
    let b = sys.load_vector(&list[0]).unwrap();
    let basis = get_matrix_q(&sys, &b, DEFAULT_ELL, DEFAULT_TOL).unwrap();
    assert!(basis.rank() <= 3, "rank {}", basis.rank());
}

#[test]
fn solve_counts_are_instrumented() {
    let h = 1.0 / 32.0;
    let (sys, list) = sources(h);
    let grid = TimeGrid::new(1.0, h).unwrap();
    for f in &list {
        let before = sys.stiffness_factor().solve_count();
        let (_, stats) = rom_forward_solve_with_stats(&sys, f, grid, DEFAULT_ELL, DEFAULT_TOL).unwrap();
        assert_eq!(sys.stiffness_factor().solve_count() - before, stats.krylov_vectors);
        assert_eq!(stats.dense_solves, grid.n_steps());
        assert!(stats.rank <= stats.krylov_vectors);
    }
}

#[test]
fn rom_agrees_with_fom() {
    for (h, bound) in [(1.0 / 32.0, 1e-6), (1.0 / 64.0, 1e-4)] {
        let (sys, list) = sources(h);
        let grid = TimeGrid::new(1.0, h).unwrap();
        for (k, f) in list.iter().enumerate() {
            let fom = fem_forward_solve(&sys, f, grid).unwrap();
            let (rom, _) = rom_forward_solve_with_stats(&sys, f, grid, DEFAULT_ELL, DEFAULT_TOL).unwrap();
            let d: Vec<f64> = rom.values().iter().zip(fom.values()).map(|(a, b)| a - b).collect();
            let rel = sys.m_norm(&d).unwrap() / sys.m_norm(fom.values()).unwrap();
            assert!(rel <= bound, "h={h} source {k}: {rel}");
        }
    }
}
