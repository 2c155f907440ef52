use bbpyramid::bases::{pyramid_dim, pyramid_eval, pyramid_eval_rst, pyramid_indices};
use bbpyramid::verify::{gradient_errors, partition_and_positivity, trace_errors, VerifyConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn partition_of_unity_and_positivity_up_to_order_8() {
    let (pou, min_val) = partition_and_positivity(&VerifyConfig::new(8, 0), 200);
    assert!(pou <= 1e-12, "{pou}");
    assert!(min_val >= 0.0, "{min_val}");
}

#[test]
fn face_traces_up_to_order_6() {
    for seed in [0, 1] {
        let (paired, unpaired) = trace_errors(&VerifyConfig::new(6, seed), 50);
        assert!(paired <= 1e-12, "{paired}");
        assert!(unpaired <= 1e-13, "{unpaired}");
    }
}

#[test]
fn gradients_match_differences_up_to_order_6() {
    let (worst, apex) = gradient_errors(&VerifyConfig::new(6, 0), 100).unwrap();
    assert!(worst <= 1e-6, "{worst}");
    assert_eq!(apex, 0.0);
}

#[test]
fn vandermonde_has_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=6 {
        let np = pyramid_dim(n);
        let m = 3 * np + 20;
        let mut v = DMatrix::zeros(m, np);
        for row in 0..m {
            let vals = pyramid_eval(n, rng.gen(), rng.gen(), rng.gen());
            let nrm = vals.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (col, x) in vals.iter().enumerate() {
                v[(row, col)] = x / nrm;
            }
        }
        let sv = v.singular_values();
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(smin > 1e-8, "N={n} smallest singular value {smin}");
    }
}

#[test]
fn apex_limit_is_continuous_along_rays() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=6 {
        let at_apex = pyramid_eval_rst(n, 0.0, 0.0, 1.0).unwrap();
        let apex_pos = pyramid_indices(n).iter().position(|m| m.k == n).unwrap();
        assert_eq!(at_apex[apex_pos], 1.0);
        for _ in 0..10 {
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let eps = 1e-12;
            let vals = pyramid_eval(n, a, b, 1.0 - eps);
            let gap = vals
                .iter()
                .zip(&at_apex)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(gap <= 1e-10, "N={n} a={a} b={b} gap={gap}");
        }
    }
}

#[test]
fn rst_and_collapsed_evaluation_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 0..=5 {
        for _ in 0..20 {
            let (a, b, c): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen_range(0.0..0.99));
            let direct = pyramid_eval(n, a, b, c);
            let via = pyramid_eval_rst(n, a * (1.0 - c), b * (1.0 - c), c).unwrap();
            for (x, y) in direct.iter().zip(&via) {
                assert!((x - y).abs() <= 1e-13);
            }
        }
    }
}

#[test]
fn outside_point_is_rejected() {
    assert!(pyramid_eval_rst(2, 0.9, 0.9, 0.5).is_err());
    assert!(pyramid_eval_rst(2, -0.1, 0.2, 0.1).is_err());
    assert!(pyramid_eval_rst(2, 0.2, 0.2, 1.1).is_err());
}
