use bbpyramid::analysis::extreme_eigenvalues;
use bbpyramid::assembly::{
    dirichlet_partition, mass_matrix, reference_mass_exact, restrict, stiffness_matrix, tet_matrices,
    weak_derivative_matrices, ElementMatrix,
};
use bbpyramid::bases::Shape;
use bbpyramid::geometry::{random_pyramid, BaseKind, VertexPyramid};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn rel_diff(a: &ElementMatrix, b: &ElementMatrix) -> f64 {
    max_abs(&(&a.entries - &b.entries)) / max_abs(&a.entries).max(1e-300)
}

fn sample(seed: u64, kind: BaseKind, count: usize) -> Vec<VertexPyramid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_pyramid(&mut rng, kind)).collect()
}

#[test]
fn reference_mass_matches_exact_integrals() {
    for n in 0..=4 {
        let m = mass_matrix(n, &VertexPyramid::reference(), n + 2).unwrap();
        let exact = reference_mass_exact(n);
        assert!(max_abs(&(&m.entries - &exact)) <= 1e-11);
    }
}

#[test]
fn mass_and_weak_are_quadrature_exact() {
    for kind in [BaseKind::Parallelogram, BaseKind::Planar, BaseKind::NonPlanar] {
        for p in sample(20, kind, 3) {
            for n in 1..=4 {
                let nq = n + 2;
                let m0 = mass_matrix(n, &p, nq).unwrap();
                let m1 = mass_matrix(n, &p, nq + 2).unwrap();
                assert!(rel_diff(&m0, &m1) <= 1e-12, "mass N={n} {kind:?}");
                let w0 = weak_derivative_matrices(n, &p, nq).unwrap();
                let w1 = weak_derivative_matrices(n, &p, nq + 2).unwrap();
                for (x, y) in w0.iter().zip(&w1) {
                    assert!(rel_diff(x, y) <= 1e-12, "{} N={n} {kind:?}", x.kind);
                }
            }
        }
    }
}

#[test]
fn stiffness_exact_only_for_affine_maps() {
    for p in sample(21, BaseKind::Parallelogram, 3) {
        for n in 1..=4 {
            let k0 = stiffness_matrix(n, &p, n + 2).unwrap();
            let k1 = stiffness_matrix(n, &p, n + 4).unwrap();
            assert!(rel_diff(&k0, &k1) <= 1e-12);
        }
    }
    for p in sample(22, BaseKind::NonPlanar, 3) {
        let n = 2;
        let k0 = stiffness_matrix(n, &p, n + 2).unwrap();
        let k1 = stiffness_matrix(n, &p, n + 4).unwrap();
        let k2 = stiffness_matrix(n, &p, n + 8).unwrap();
        let d1 = rel_diff(&k0, &k1);
        let d2 = rel_diff(&k1, &k2);
        assert!(d1 > 1e-10, "{d1}");
        assert!(d2 < d1, "{d2} vs {d1}");
    }
}

#[test]
fn derivative_matrices_annihilate_constants() {
    for p in sample(23, BaseKind::NonPlanar, 2)
        .into_iter()
        .chain([VertexPyramid::reference()])
    {
        for n in 1..=6 {
            let ones = DVector::from_element(bbpyramid::bases::pyramid_dim(n), 1.0);
            for w in weak_derivative_matrices(n, &p, n + 2).unwrap() {
                let r = (&w.entries * &ones).amax() / max_abs(&w.entries);
                assert!(r <= 1e-10, "{} N={n}: {r}", w.kind);
            }
            let k = stiffness_matrix(n, &p, n + 2).unwrap();
            assert!((&k.entries * &ones).amax() / max_abs(&k.entries) <= 1e-10);
        }
    }
}

#[test]
fn mass_and_restricted_stiffness_are_spd() {
    for p in sample(24, BaseKind::Planar, 2)
        .into_iter()
        .chain([VertexPyramid::reference()])
    {
        for n in 0..=6 {
            let m = mass_matrix(n, &p, n + 2).unwrap();
            assert!(m.asymmetry <= 1e-12, "{}", m.asymmetry);
            let (lo, _) = extreme_eigenvalues(&m.entries).unwrap();
            assert!(lo > 0.0, "mass N={n}");
            let k = stiffness_matrix(n, &p, n + 2).unwrap();
            assert!(k.asymmetry <= 1e-12, "{}", k.asymmetry);
            let kr = restrict(&k, &dirichlet_partition(n, Shape::Pyramid)).unwrap();
            if n < 3 {
                assert!(kr.is_empty());
                continue;
            }
            let (lo, _) = extreme_eigenvalues(&kr.entries).unwrap();
            assert!(lo > 0.0, "stiffness N={n}");
        }
    }
}

#[test]
fn tetrahedron_matrices_are_consistent() {
    for n in 1..=5 {
        let (m, k) = tet_matrices(n, n + 2).unwrap();
        assert!((m.entries.sum() - 1.0 / 6.0).abs() <= 1e-14);
        let ones = DVector::from_element(m.dim(), 1.0);
        assert!((&k.entries * &ones).amax() <= 1e-10 * max_abs(&k.entries));
    }
}

#[test]
fn interior_counts() {
    for n in 0..=8 {
        let pyr = dirichlet_partition(n, Shape::Pyramid).interior.len();
        let want: usize = (1..n).map(|k| (n - k).saturating_sub(1).pow(2)).sum();
        assert_eq!(pyr, want, "pyramid N={n}");
        let tet = dirichlet_partition(n, Shape::Tetrahedron).interior.len();
        let want = if n >= 4 { (n - 1) * (n - 2) * (n - 3) / 6 } else { 0 };
        assert_eq!(tet, want, "tet N={n}");
    }
}
