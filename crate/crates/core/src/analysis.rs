//! Conditioning of element matrices and numerical checks of what the pyramid
//! space spans.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{
    default_nq, dirichlet_partition, mass_matrix, restrict, stiffness_matrix, tet_matrices, ElementMatrix, MatrixKind,
};
use crate::bases::{pyramid_dim, pyramid_eval, Shape};
use crate::error::{Error, Result};
use crate::geometry::VertexPyramid;
use crate::polynomials::{jacobi_eval, JacobiParams};
use crate::quadrature::gauss_legendre;

/// Relative asymmetry above which a matrix is refused by [`condition_number`].
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningRecord {
    pub shape: Shape,
    pub kind: MatrixKind,
    #[serde(rename = "N")]
    pub order: usize,
    pub nq: usize,
    pub dof_count: usize,
    pub restricted: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `lambda_max / lambda_min`; absent when the matrix is not positive definite.
    pub cond: Option<f64>,
}

impl ConditioningRecord {
    pub fn is_singular(&self) -> bool {
        self.cond.is_none()
    }
}

/// Extreme eigenvalues and 2-norm condition number of a symmetric matrix.
pub fn condition_number(m: &ElementMatrix) -> Result<ConditioningRecord> {
    let (lambda_min, lambda_max) = extreme_eigenvalues(&m.entries)?;
    let cond = (lambda_min > 0.0).then(|| lambda_max / lambda_min);
    Ok(ConditioningRecord {
        shape: m.shape,
        kind: m.kind,
        order: m.order,
        nq: m.nq,
        dof_count: m.dim(),
        restricted: m.restricted,
        lambda_min,
        lambda_max,
        cond,
    })
}

/// Smallest and largest eigenvalue from a full dense symmetric
/// eigendecomposition.
pub fn extreme_eigenvalues(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    if a.nrows() == 0 || a.nrows() != a.ncols() {
        return Err(Error::usage(format!(
            "condition number needs a nonempty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.norm();
    let skew = (a - a.transpose()).norm();
    if scale > 0.0 && skew > SYMMETRY_TOL * scale {
        return Err(Error::usage(format!(
            "matrix is not symmetric (relative asymmetry {:e})",
            skew / scale
        )));
    }
    let eig = SymmetricEigen::new(a.clone()).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// The comparison basis built from Lagrange factors in `a, b` and Jacobi
/// radial factors in `c`: layer `k` holds
/// `ℓ^{N-k}_i(a) ℓ^{N-k}_j(b) ((1 - c̃)/2)^{N-k} P^{(2(N-k)+3, 0)}_k(c̃)` with
/// `c̃ = 2c - 1`, ordered exactly like the Bernstein pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiNodalBasis {
    order: usize,
    /// Interpolation nodes for degree `d` Lagrange factors, `d = 0..=N`.
    nodes: Vec<Vec<f64>>,
    /// Radial Jacobi polynomial of each layer `k`.
    radial: Vec<JacobiParams>,
}

impl SemiNodalBasis {
    /// Lagrange factors interpolate at Gauss-Legendre points.
    pub fn new(order: usize) -> Result<Self> {
        let nodes = (0..=order)
            .map(|d| gauss_legendre(d + 1).map(|r| r.nodes().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let radial = (0..=order)
            .map(|k| JacobiParams::new((2 * (order - k) + 3) as f64, 0.0, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { order, nodes, radial })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        pyramid_dim(self.order)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, a: f64, b: f64, c: f64) -> Vec<f64> {
        let n = self.order;
        let ct = 2.0 * c - 1.0;
        let mut out = Vec::with_capacity(self.len());
        for k in 0..=n {
            let d = n - k;
            let radial = (0.5 * (1.0 - ct)).powi(d as i32) * jacobi_eval(self.radial[k], ct);
            let la = lagrange_all(&self.nodes[d], a);
            let lb = lagrange_all(&self.nodes[d], b);
            for x in &la {
                for y in &lb {
                    out.push(x * y * radial);
                }
            }
        }
        out
    }
}

fn lagrange_all(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != i)
                .map(|(_, &xm)| (x - xm) / (nodes[i] - xm))
                .product()
        })
        .collect()
}

fn random_cube_points(count: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    (0..count).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect()
}

fn sample_matrix<F: Fn(f64, f64, f64) -> Vec<f64>>(points: &[[f64; 3]], cols: usize, f: F) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(points.len(), cols);
    for (r, &[a, b, c]) in points.iter().enumerate() {
        for (col, x) in f(a, b, c).into_iter().enumerate() {
            v[(r, col)] = x;
        }
    }
    v
}

/// Orthonormal basis of the numerical column space of `v` (columns
/// normalized first) and the singular values of the normalized matrix.
pub struct ColumnSpace {
    basis: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Singular values below this fraction of the largest are treated as zero.
const RANK_RTOL: f64 = 1e-12;

impl ColumnSpace {
    pub fn new(v: &DMatrix<f64>) -> Self {
        let mut vn = v.clone();
        for mut col in vn.column_iter_mut() {
            let nrm = col.norm();
            if nrm > 0.0 {
                col /= nrm;
            }
        }
        let svd = vn.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
        let sv: Vec<f64> = order.iter().map(|&p| svd.singular_values[p]).collect();
        let smax = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > RANK_RTOL * smax).count();
        let cols: Vec<DVector<f64>> = order[..rank].iter().map(|&p| u.column(p).into_owned()).collect();
        let basis = if cols.is_empty() {
            DMatrix::zeros(v.nrows(), 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        Self {
            basis,
            singular_values: sv,
            rank,
        }
    }

    pub fn full_rank(&self) -> bool {
        self.rank == self.singular_values.len()
    }

    pub fn min_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// `‖y - P y‖ / ‖y‖` for the orthogonal projection `P` onto the space.
    pub fn relative_residual(&self, y: &DVector<f64>) -> f64 {
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        let coeff = self.basis.transpose() * y;
        let proj = &self.basis * coeff;
        (y - proj).norm() / ny
    }

    pub fn max_residual(&self, targets: &DMatrix<f64>) -> f64 {
        targets
            .column_iter()
            .map(|c| self.relative_residual(&c.into_owned()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanReport {
    #[serde(rename = "N")]
    pub order: usize,
    pub points: usize,
    pub tol: f64,
    /// Worst relative residual of a semi-nodal function projected onto the
    /// Bernstein span.
    pub semi_nodal_in_bernstein: f64,
    /// Worst relative residual of a Bernstein function projected onto the
    /// semi-nodal span.
    pub bernstein_in_semi_nodal: f64,
    /// Residual of `c^{N+1}`, which lies outside both spans.
    pub negative_control: f64,
    pub bernstein_min_singular: f64,
    pub semi_nodal_min_singular: f64,
    pub rank_deficient: bool,
    pub passed: bool,
}

impl SpanReport {
    /// Which projection direction failed, if any.
    pub fn failed_direction(&self) -> Option<&'static str> {
        if self.rank_deficient {
            Some("rank")
        } else if self.semi_nodal_in_bernstein > self.tol {
            Some("semi_nodal_in_bernstein")
        } else if self.bernstein_in_semi_nodal > self.tol {
            Some("bernstein_in_semi_nodal")
        } else {
            None
        }
    }
}

/// Cross-projects the Bernstein pyramid basis and the semi-nodal basis onto
/// each other's span at `3 N_p + 20` random cube points.
pub fn span_equivalence(order: usize, tol: f64, seed: u64) -> Result<SpanReport> {
    span_equivalence_with(order, tol, seed, pyramid_eval)
}

pub(crate) fn span_equivalence_with<F>(order: usize, tol: f64, seed: u64, basis: F) -> Result<SpanReport>
where
    F: Fn(usize, f64, f64, f64) -> Vec<f64>,
{
    if order > 8 {
        return Err(Error::domain(format!("span check supports N <= 8, got {order}")));
    }
    let np = pyramid_dim(order);
    let semi = SemiNodalBasis::new(order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = random_cube_points(3 * np + 20, &mut rng);

    let vb = sample_matrix(&points, np, |a, b, c| basis(order, a, b, c));
    let vs = sample_matrix(&points, np, |a, b, c| semi.eval(a, b, c));
    let sb = ColumnSpace::new(&vb);
    let ss = ColumnSpace::new(&vs);

    let outside = DVector::from_iterator(points.len(), points.iter().map(|p| p[2].powi(order as i32 + 1)));
    let semi_in_b = sb.max_residual(&vs);
    let b_in_semi = ss.max_residual(&vb);
    let negative_control = sb.relative_residual(&outside);
    let rank_deficient = !(sb.full_rank() && ss.full_rank());
    Ok(SpanReport {
        order,
        points: points.len(),
        tol,
        semi_nodal_in_bernstein: semi_in_b,
        bernstein_in_semi_nodal: b_in_semi,
        negative_control,
        bernstein_min_singular: sb.min_singular_value(),
        semi_nodal_min_singular: ss.min_singular_value(),
        rank_deficient,
        passed: !rank_deficient && semi_in_b <= tol && b_in_semi <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    #[serde(rename = "N")]
    pub order: usize,
    pub tol: f64,
    /// Worst relative residual over monomials of total degree `≤ N`.
    pub max_residual: f64,
    /// Exponents `(α, β, γ)` of the worst monomial.
    pub worst_monomial: [usize; 3],
    /// Worst residual over monomials of total degree `N + 1`.
    pub degree_above_residual: f64,
    pub passed: bool,
}

fn monomials_of_degree(deg: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in (0..=deg).rev() {
        for b in (0..=deg - a).rev() {
            out.push([a, b, deg - a - b]);
        }
    }
    out
}

/// Least-squares fits every physical monomial `x^α y^β z^γ` with
/// `α + β + γ ≤ N` by the pulled-back Bernstein pyramid basis.
///
/// Coordinates are centred on the vertex centroid and scaled by the element
/// diameter before the monomials are formed.
pub fn polynomial_reproduction(order: usize, p: &VertexPyramid, tol: f64, seed: u64) -> Result<ReproductionReport> {
    p.validate()?;
    let np = pyramid_dim(order);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = random_cube_points(3 * np + 20, &mut rng);
    let vb = sample_matrix(&points, np, |a, b, c| pyramid_eval(order, a, b, c));
    let space = ColumnSpace::new(&vb);

    let centroid: [f64; 3] = std::array::from_fn(|d| p.vertices.iter().map(|v| v[d]).sum::<f64>() / 5.0);
    let diameter = p
        .vertices
        .iter()
        .flat_map(|u| {
            p.vertices
                .iter()
                .map(move |v| (0..3).map(|d| (u[d] - v[d]).powi(2)).sum::<f64>())
        })
        .fold(0.0, f64::max)
        .sqrt();
    let physical: Vec<[f64; 3]> = points
        .iter()
        .map(|&[a, b, c]| {
            let x = p.map_point(a, b, c);
            std::array::from_fn(|d| (x[d] - centroid[d]) / diameter)
        })
        .collect();
    let residual = |e: [usize; 3]| {
        let y = DVector::from_iterator(
            physical.len(),
            physical
                .iter()
                .map(|x| x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32)),
        );
        space.relative_residual(&y)
    };

    let mut max_residual = 0.0;
    let mut worst_monomial = [0, 0, 0];
    for deg in 0..=order {
        for e in monomials_of_degree(deg) {
            let r = residual(e);
            if r > max_residual {
                max_residual = r;
                worst_monomial = e;
            }
        }
    }
    let degree_above_residual = monomials_of_degree(order + 1)
        .into_iter()
        .map(residual)
        .fold(0.0, f64::max);
    Ok(ReproductionReport {
        order,
        tol,
        max_residual,
        worst_monomial,
        degree_above_residual,
        passed: space.full_rank() && max_residual <= tol,
    })
}

/// What a conditioning study computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub orders: std::ops::RangeInclusive<usize>,
    pub shapes: Vec<Shape>,
    pub kinds: Vec<MatrixKind>,
    /// Fixed points per direction; `None` uses `N + 2` for each order.
    pub nq: Option<usize>,
    pub restrict_mass: bool,
    pub restrict_stiffness: bool,
}

impl StudyConfig {
    /// Mass (full) and Dirichlet-restricted stiffness for the tetrahedron and
    /// pyramid on their reference elements.
    pub fn reference(orders: std::ops::RangeInclusive<usize>) -> Self {
        Self {
            orders,
            shapes: vec![Shape::Tetrahedron, Shape::Pyramid],
            kinds: vec![MatrixKind::Mass, MatrixKind::Stiffness],
            nq: None,
            restrict_mass: false,
            restrict_stiffness: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub shape: Shape,
    pub kind: MatrixKind,
    #[serde(rename = "N")]
    pub order: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub records: Vec<ConditioningRecord>,
    pub skipped: Vec<SkippedRecord>,
}

/// Condition numbers of reference-element matrices, sorted by
/// `(shape, kind, N)` with shapes in [`Shape`] declaration order.
pub fn conditioning_study(config: &StudyConfig) -> Result<StudyResult> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut shapes = config.shapes.clone();
    shapes.sort();
    shapes.dedup();
    let mut kinds = config.kinds.clone();
    kinds.sort();
    kinds.dedup();
    if let Some(k) = kinds
        .iter()
        .find(|k| !matches!(k, MatrixKind::Mass | MatrixKind::Stiffness))
    {
        return Err(Error::usage(format!("conditioning study does not cover {k} matrices")));
    }

    for &shape in &shapes {
        for &kind in &kinds {
            for order in config.orders.clone() {
                let nq = config.nq.unwrap_or_else(|| default_nq(order));
                let full = reference_matrix(shape, kind, order, nq)?;
                let restrict_it = match kind {
                    MatrixKind::Mass => config.restrict_mass,
                    _ => config.restrict_stiffness,
                };
                let m = if restrict_it {
                    restrict(&full, &dirichlet_partition(order, shape))?
                } else {
                    full
                };
                if m.is_empty() {
                    skipped.push(SkippedRecord {
                        shape,
                        kind,
                        order,
                        reason: "no interior degrees of freedom".into(),
                    });
                    continue;
                }
                let rec = condition_number(&m)?;
                if rec.is_singular() {
                    skipped.push(SkippedRecord {
                        shape,
                        kind,
                        order,
                        reason: format!("singular matrix (lambda_min = {:e})", rec.lambda_min),
                    });
                    continue;
                }
                records.push(rec);
            }
        }
    }
    Ok(StudyResult { records, skipped })
}

fn reference_matrix(shape: Shape, kind: MatrixKind, order: usize, nq: usize) -> Result<ElementMatrix> {
    match shape {
        Shape::Pyramid => {
            let p = VertexPyramid::reference();
            match kind {
                MatrixKind::Mass => mass_matrix(order, &p, nq),
                _ => stiffness_matrix(order, &p, nq),
            }
        }
        Shape::Tetrahedron => {
            let (m, k) = tet_matrices(order, nq)?;
            Ok(if kind == MatrixKind::Mass { m } else { k })
        }
        other => Err(Error::usage(format!("conditioning study does not cover {other}"))),
    }
}

/// Least-squares line through `(x, y)`: returns `(slope, intercept, R²)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}
