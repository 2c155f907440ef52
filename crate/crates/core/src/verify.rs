//! Property suites for the pyramid basis: positivity and partition of unity,
//! face traces, gradients, span equivalence with the semi-nodal basis, and
//! reproduction of physical polynomials on mapped pyramids.
//!
//! Every suite is driven by a seeded ChaCha generator, so a summary is a pure
//! function of its [`VerifyConfig`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{polynomial_reproduction, span_equivalence_with};
use crate::bases::{pyramid_eval, pyramid_eval_rst, pyramid_grad_rst, pyramid_indices, trace_map, FaceId};
use crate::error::{Error, Result};
use crate::geometry::{random_pyramid, BaseKind, VertexPyramid};

pub const PARTITION_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const TRACE_VANISH_TOL: f64 = 1e-13;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const GRADIENT_STEP: f64 = 1e-5;
pub const SPAN_TOL: f64 = 1e-8;
pub const SPAN_CONTROL_MIN: f64 = 1e-3;
pub const REPRODUCTION_TOL: f64 = 1e-8;
pub const REPRODUCTION_CONTROL_MIN: f64 = 1e-4;

/// Highest order for which the span check's `c^{N+1}` control is guaranteed
/// to stay above [`SPAN_CONTROL_MIN`]; it decays roughly like `4^{-N}`.
pub const SPAN_CONTROL_MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub seed: u64,
    /// Scales the first basis function by `1 + perturbation` in every suite
    /// that evaluates basis values. Used to check that the suites can fail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<f64>,
}

impl VerifyConfig {
    pub fn new(n_max: usize, seed: u64) -> Self {
        Self {
            n_max,
            seed,
            perturbation: None,
        }
    }

    fn basis(&self, order: usize, a: f64, b: f64, c: f64) -> Vec<f64> {
        let mut v = pyramid_eval(order, a, b, c);
        if let Some(eps) = self.perturbation {
            v[0] *= 1.0 + eps;
        }
        v
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    /// `"max"` when `max_error` must not exceed `tolerance`, `"min"` when it
    /// must not fall below it.
    pub bound: String,
    pub orders: Vec<usize>,
}

impl SuiteResult {
    fn upper(name: &str, max_error: f64, tolerance: f64, orders: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            passed: max_error <= tolerance,
            max_error,
            tolerance,
            bound: "max".into(),
            orders,
        }
    }

    fn lower(name: &str, min_value: f64, floor: f64, orders: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            passed: min_value >= floor,
            max_error: min_value,
            tolerance: floor,
            bound: "min".into(),
            orders,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub n_max: usize,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

impl VerifySummary {
    pub fn failed(&self) -> impl Iterator<Item = &SuiteResult> {
        self.suites.iter().filter(|s| !s.passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

fn orders(n_max: usize) -> Vec<usize> {
    (1..=n_max).collect()
}

/// Worst `|Σ B - 1|` and most negative basis value over `points` random
/// cube points per order.
pub fn partition_and_positivity(cfg: &VerifyConfig, points: usize) -> (f64, f64) {
    let mut rng = cfg.rng(1);
    let mut worst_sum = 0.0f64;
    let mut min_val = f64::INFINITY;
    for n in orders(cfg.n_max) {
        for _ in 0..points {
            let v = cfg.basis(n, rng.gen(), rng.gen(), rng.gen());
            worst_sum = worst_sum.max((v.iter().sum::<f64>() - 1.0).abs());
            min_val = v.iter().copied().fold(min_val, f64::min);
        }
    }
    (worst_sum, min_val)
}

/// Worst mismatch between paired pyramid functions and the face basis, and
/// worst magnitude of an unpaired function, over `points` face points per
/// face.
pub fn trace_errors(cfg: &VerifyConfig, points: usize) -> (f64, f64) {
    let mut rng = cfg.rng(2);
    let mut paired = 0.0f64;
    let mut unpaired = 0.0f64;
    for n in orders(cfg.n_max) {
        for face in FaceId::ALL {
            let map = trace_map(n, face);
            let mut on_face = vec![false; crate::bases::pyramid_dim(n)];
            for (idx, _) in &map.pairs {
                on_face[idx.position()] = true;
            }
            for _ in 0..points {
                let (u, v): (f64, f64) = (rng.gen(), rng.gen());
                let [a, b, c] = face.cube_point(u, v);
                let vals = cfg.basis(n, a, b, c);
                let face_vals = face.face_basis(n, u, v);
                for (idx, fidx) in &map.pairs {
                    let diff = (vals[idx.position()] - face_vals[fidx.position(n)]).abs();
                    paired = paired.max(diff);
                }
                for (pos, x) in vals.iter().enumerate() {
                    if !on_face[pos] {
                        unpaired = unpaired.max(x.abs());
                    }
                }
            }
        }
    }
    (paired, unpaired)
}

/// Worst relative gap between analytic `(r, s, t)` gradients and central
/// differences of [`pyramid_eval_rst`], and the largest `k = N` entry of
/// `∂/∂r`, `∂/∂s` (which must be exactly zero).
///
/// Points are drawn with `a, b ∈ [0.05, 0.95]`, `c ∈ [0.05, 0.75]` so that the
/// difference stencil stays inside the pyramid and away from the apex.
/// Relative error is `|g - fd| / max(|g|, 1)`.
pub fn gradient_errors(cfg: &VerifyConfig, points: usize) -> Result<(f64, f64)> {
    let mut rng = cfg.rng(3);
    let h = GRADIENT_STEP;
    let mut worst = 0.0f64;
    let mut apex_layer = 0.0f64;
    for n in orders(cfg.n_max) {
        let idx = pyramid_indices(n);
        for _ in 0..points {
            let a = rng.gen_range(0.05..0.95);
            let b = rng.gen_range(0.05..0.95);
            let c = rng.gen_range(0.05..0.75);
            let g = pyramid_grad_rst(n, a, b, c)?;
            let (r, s, t) = (a * (1.0 - c), b * (1.0 - c), c);
            let shifts = [[h, 0.0, 0.0], [0.0, h, 0.0], [0.0, 0.0, h]];
            for (d, sh) in shifts.iter().enumerate() {
                let plus = pyramid_eval_rst(n, r + sh[0], s + sh[1], t + sh[2])?;
                let minus = pyramid_eval_rst(n, r - sh[0], s - sh[1], t - sh[2])?;
                for m in 0..idx.len() {
                    let fd = (plus[m] - minus[m]) / (2.0 * h);
                    worst = worst.max((g[d][m] - fd).abs() / g[d][m].abs().max(1.0));
                }
            }
            for (m, mi) in idx.iter().enumerate() {
                if mi.k == n {
                    apex_layer = apex_layer.max(g[0][m].abs()).max(g[1][m].abs());
                }
            }
        }
    }
    Ok((worst, apex_layer))
}

/// The five pyramids used by the reproduction suite: three with a flat base,
/// one parallelogram and one non-planar.
pub fn reproduction_pyramids(seed: u64) -> Vec<VertexPyramid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
    vec![
        random_pyramid(&mut rng, BaseKind::Planar),
        random_pyramid(&mut rng, BaseKind::Planar),
        random_pyramid(&mut rng, BaseKind::Planar),
        random_pyramid(&mut rng, BaseKind::Parallelogram),
        random_pyramid(&mut rng, BaseKind::NonPlanar),
    ]
}

/// Largest `n_max` accepted by [`run`].
pub const MAX_ORDER: usize = 8;

pub fn run(cfg: &VerifyConfig) -> Result<VerifySummary> {
    if cfg.n_max > MAX_ORDER {
        return Err(Error::usage(format!(
            "verify supports orders up to {MAX_ORDER}, got {}",
            cfg.n_max
        )));
    }
    let ords = orders(cfg.n_max);
    let mut suites = Vec::new();

    let (pou, min_val) = partition_and_positivity(cfg, 200);
    suites.push(SuiteResult::upper(
        "partition_of_unity",
        pou,
        PARTITION_TOL,
        ords.clone(),
    ));
    suites.push(SuiteResult::lower("positivity", min_val, 0.0, ords.clone()));

    let (paired, unpaired) = trace_errors(cfg, 50);
    suites.push(SuiteResult::upper("trace_identity", paired, TRACE_TOL, ords.clone()));
    suites.push(SuiteResult::upper(
        "trace_vanishing",
        unpaired,
        TRACE_VANISH_TOL,
        ords.clone(),
    ));

    let (grad, apex) = gradient_errors(cfg, 100)?;
    suites.push(SuiteResult::upper("gradient", grad, GRADIENT_TOL, ords.clone()));
    suites.push(SuiteResult::upper("gradient_apex_layer", apex, 0.0, ords.clone()));

    let mut span_worst = 0.0f64;
    let mut control_min = f64::INFINITY;
    let mut control_orders = Vec::new();
    for &n in &ords {
        let rep = span_equivalence_with(n, SPAN_TOL, cfg.seed.wrapping_add(n as u64), |n, a, b, c| {
            cfg.basis(n, a, b, c)
        })?;
        let w = rep.semi_nodal_in_bernstein.max(rep.bernstein_in_semi_nodal);
        span_worst = span_worst.max(if rep.rank_deficient { f64::INFINITY } else { w });
        if n <= SPAN_CONTROL_MAX_ORDER {
            control_min = control_min.min(rep.negative_control);
            control_orders.push(n);
        }
    }
    suites.push(SuiteResult::upper(
        "span_equivalence",
        span_worst,
        SPAN_TOL,
        ords.clone(),
    ));
    if !control_orders.is_empty() {
        suites.push(SuiteResult::lower(
            "span_negative_control",
            control_min,
            SPAN_CONTROL_MIN,
            control_orders,
        ));
    }

    let mut repro_worst = 0.0f64;
    let mut repro_control = f64::INFINITY;
    for (g, p) in reproduction_pyramids(cfg.seed).iter().enumerate() {
        for &n in &ords {
            let rep =
                polynomial_reproduction(n, p, REPRODUCTION_TOL, cfg.seed.wrapping_add(100 * g as u64 + n as u64))?;
            repro_worst = repro_worst.max(rep.max_residual);
            repro_control = repro_control.min(rep.degree_above_residual);
        }
    }
    suites.push(SuiteResult::upper(
        "polynomial_reproduction",
        repro_worst,
        REPRODUCTION_TOL,
        ords.clone(),
    ));
    suites.push(SuiteResult::lower(
        "reproduction_negative_control",
        repro_control,
        REPRODUCTION_CONTROL_MIN,
        ords,
    ));

    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifySummary {
        n_max: cfg.n_max,
        seed: cfg.seed,
        passed,
        suites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let s = run(&VerifyConfig::new(3, 0)).unwrap();
        assert!(s.passed, "{:#?}", s.failed().collect::<Vec<_>>());
        assert!(s.suite("partition_of_unity").unwrap().max_error <= 1e-12);
    }

    #[test]
    fn perturbed_basis_fails_named_suites() {
        let cfg = VerifyConfig {
            perturbation: Some(1e-6),
            ..VerifyConfig::new(2, 0)
        };
        let s = run(&cfg).unwrap();
        assert!(!s.passed);
        let failed: Vec<_> = s.failed().map(|f| f.name.as_str()).collect();
        assert!(failed.contains(&"partition_of_unity"));
        assert!(failed.contains(&"trace_identity"));
    }

    #[test]
    fn rejects_high_orders() {
        assert!(matches!(run(&VerifyConfig::new(9, 0)), Err(Error::Usage(_))));
    }

    #[test]
    fn deterministic() {
        let a = run(&VerifyConfig::new(2, 11)).unwrap();
        let b = run(&VerifyConfig::new(2, 11)).unwrap();
        assert_eq!(a, b);
    }
}
