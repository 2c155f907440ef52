//! Element matrices for the Bernstein pyramid on vertex-mapped pyramids, and
//! for the Bernstein tetrahedron on the reference tetrahedron.
//!
//! All matrices are dense and assembled by quadrature on the unit cube. For a
//! vertex-mapped pyramid the mass and weak derivative integrands are
//! polynomial in `(a, b, c)` against the `(1 - c)²` measure, so a rule with
//! `nq ≥ N + 2` points per direction integrates them exactly. The stiffness
//! integrand carries a `1 / J` factor and is only exact when the base is a
//! parallelogram.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bases::{
    pyramid_dim, pyramid_eval, pyramid_grad_rst, pyramid_indices, tet_eval, tet_grad, BasisDescriptor, BasisIndex,
    Shape,
};
use crate::error::{Error, Result};
use crate::geometry::{metric_factors, VertexPyramid};
use crate::polynomials::{bernstein_pair_integral_exact, bernstein_pair_integral_weighted_exact};
use crate::quadrature::{pyramid_rule, tet_rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Mass,
    WeakX,
    WeakY,
    WeakZ,
    Stiffness,
}

impl MatrixKind {
    pub fn name(&self) -> &'static str {
        match self {
            MatrixKind::Mass => "mass",
            MatrixKind::WeakX => "weak_x",
            MatrixKind::WeakY => "weak_y",
            MatrixKind::WeakZ => "weak_z",
            MatrixKind::Stiffness => "stiffness",
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self, MatrixKind::Mass | MatrixKind::Stiffness)
    }
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrix {
    pub shape: Shape,
    pub order: usize,
    pub kind: MatrixKind,
    /// Quadrature points per direction used to build the matrix.
    pub nq: usize,
    pub entries: DMatrix<f64>,
    pub symmetry: Symmetry,
    /// `‖A - Aᵀ‖_F / ‖A‖_F` before symmetrization (0 for general matrices).
    pub asymmetry: f64,
    /// Set once the matrix has been reduced to its interior DOFs.
    pub restricted: bool,
}

impl ElementMatrix {
    fn new(shape: Shape, order: usize, kind: MatrixKind, nq: usize, mut entries: DMatrix<f64>) -> Self {
        let (symmetry, asymmetry) = if kind.is_symmetric() {
            let skew = (&entries - entries.transpose()).norm();
            let scale = entries.norm();
            let asym = if scale > 0.0 { skew / scale } else { 0.0 };
            entries = (&entries + entries.transpose()) * 0.5;
            (Symmetry::Symmetric, asym)
        } else {
            (Symmetry::General, 0.0)
        };
        Self {
            shape,
            order,
            kind,
            nq,
            entries,
            symmetry,
            asymmetry,
            restricted: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }
}

/// Points per direction used when the caller does not choose: `N + 2`.
pub fn default_nq(order: usize) -> usize {
    order + 2
}

/// Basis values and physical gradients at the nodes of a pyramid rule (one
/// row per node); `weights` holds `w_q J_q`.
struct PyramidSamples {
    values: DMatrix<f64>,
    grads: [DMatrix<f64>; 3],
    weights: Vec<f64>,
}

fn sample_pyramid(order: usize, p: &VertexPyramid, nq: usize, with_grads: bool) -> Result<PyramidSamples> {
    let rule = pyramid_rule(nq)?;
    let metric = metric_factors(p, &rule)?;
    let np = pyramid_dim(order);
    let nn = rule.len();
    let mut values = DMatrix::zeros(nn, np);
    let mut grads = [DMatrix::zeros(0, 0), DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)];
    if with_grads {
        grads = [DMatrix::zeros(nn, np), DMatrix::zeros(nn, np), DMatrix::zeros(nn, np)];
    }
    let mut weights = Vec::with_capacity(nn);
    for (q, ([a, b, c], w)) in rule.iter().enumerate() {
        weights.push(w * metric.jacobian[q]);
        for (col, v) in pyramid_eval(order, a, b, c).into_iter().enumerate() {
            values[(q, col)] = v;
        }
        if with_grads {
            let g_ref = pyramid_grad_rst(order, a, b, c)?;
            let inv = &metric.inverse[q];
            for col in 0..np {
                for (phys, g) in grads.iter_mut().enumerate() {
                    // ∂/∂x_phys = Σ_ρ ∂ρ/∂x_phys ∂/∂ρ
                    g[(q, col)] = inv[(0, phys)] * g_ref[0][col]
                        + inv[(1, phys)] * g_ref[1][col]
                        + inv[(2, phys)] * g_ref[2][col];
                }
            }
        }
    }
    Ok(PyramidSamples { values, grads, weights })
}

/// `Aᵀ diag(w) B`.
fn weighted_gram(a: &DMatrix<f64>, w: &[f64], b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut wb = b.clone();
    for (q, wq) in w.iter().enumerate() {
        wb.row_mut(q).scale_mut(*wq);
    }
    a.transpose() * wb
}

fn check_nq(nq: usize) -> Result<()> {
    if nq == 0 {
        return Err(Error::domain("quadrature needs at least one point per direction"));
    }
    Ok(())
}

/// `M[m, n] = ∫_P B_m B_n`.
pub fn mass_matrix(order: usize, p: &VertexPyramid, nq: usize) -> Result<ElementMatrix> {
    check_nq(nq)?;
    let s = sample_pyramid(order, p, nq, false)?;
    let m = weighted_gram(&s.values, &s.weights, &s.values);
    Ok(ElementMatrix::new(Shape::Pyramid, order, MatrixKind::Mass, nq, m))
}

/// `S^x[m, n] = ∫_P B_m ∂B_n/∂x`, and likewise for `y`, `z`.
pub fn weak_derivative_matrices(order: usize, p: &VertexPyramid, nq: usize) -> Result<[ElementMatrix; 3]> {
    check_nq(nq)?;
    let s = sample_pyramid(order, p, nq, true)?;
    let kinds = [MatrixKind::WeakX, MatrixKind::WeakY, MatrixKind::WeakZ];
    let mats: Vec<ElementMatrix> = kinds
        .iter()
        .zip(&s.grads)
        .map(|(kind, g)| {
            let m = weighted_gram(&s.values, &s.weights, g);
            ElementMatrix::new(Shape::Pyramid, order, *kind, nq, m)
        })
        .collect();
    Ok(mats.try_into().expect("three derivative directions"))
}

/// `K[m, n] = ∫_P ∇B_m · ∇B_n`, by the same tensor quadrature. Exact only
/// for pyramids with a parallelogram base.
pub fn stiffness_matrix(order: usize, p: &VertexPyramid, nq: usize) -> Result<ElementMatrix> {
    check_nq(nq)?;
    let s = sample_pyramid(order, p, nq, true)?;
    let mut k = weighted_gram(&s.grads[0], &s.weights, &s.grads[0]);
    k += weighted_gram(&s.grads[1], &s.weights, &s.grads[1]);
    k += weighted_gram(&s.grads[2], &s.weights, &s.grads[2]);
    Ok(ElementMatrix::new(Shape::Pyramid, order, MatrixKind::Stiffness, nq, k))
}

/// Mass and stiffness matrices of the Bernstein tetrahedron on the reference
/// tetrahedron, integrated with the collapsed rule of `nq` points per
/// direction (`nq ≥ N + 1` is exact).
pub fn tet_matrices(order: usize, nq: usize) -> Result<(ElementMatrix, ElementMatrix)> {
    check_nq(nq)?;
    let rule = tet_rule(nq)?;
    let np = BasisDescriptor::new(Shape::Tetrahedron, order).dimension();
    let nn = rule.len();
    let mut values = DMatrix::zeros(nn, np);
    let mut grads = [DMatrix::zeros(nn, np), DMatrix::zeros(nn, np), DMatrix::zeros(nn, np)];
    for (q, [a, b, c]) in rule.nodes().iter().copied().enumerate() {
        let x = a * (1.0 - b) * (1.0 - c);
        let y = b * (1.0 - c);
        let z = c;
        let lam = [(1.0 - x - y - z).max(0.0), x, y, z];
        for (col, v) in tet_eval(order, lam)?.into_iter().enumerate() {
            values[(q, col)] = v;
        }
        let g = tet_grad(order, [x, y, z])?;
        for d in 0..3 {
            for col in 0..np {
                grads[d][(q, col)] = g[d][col];
            }
        }
    }
    let w = rule.weights();
    let mass = weighted_gram(&values, w, &values);
    let mut stiff = weighted_gram(&grads[0], w, &grads[0]);
    stiff += weighted_gram(&grads[1], w, &grads[1]);
    stiff += weighted_gram(&grads[2], w, &grads[2]);
    Ok((
        ElementMatrix::new(Shape::Tetrahedron, order, MatrixKind::Mass, nq, mass),
        ElementMatrix::new(Shape::Tetrahedron, order, MatrixKind::Stiffness, nq, stiff),
    ))
}

/// Mass matrix of the reference pyramid from exact one-dimensional integrals:
///
/// ```text
/// M[(i,j,k), (l,m,n)] = ∫ B^{N-k}_i B^{N-n}_l da · ∫ B^{N-k}_j B^{N-n}_m db
///                       · ∫ B^N_k B^N_n (1 - c)² dc
/// ```
///
/// Each factor is a ratio of binomial coefficients computed in exact
/// rational arithmetic. Independent of the quadrature path.
pub fn reference_mass_exact(order: usize) -> DMatrix<f64> {
    use num_traits::ToPrimitive;
    let idx = pyramid_indices(order);
    let np = idx.len();
    let mut m = DMatrix::zeros(np, np);
    for (p, u) in idx.iter().enumerate() {
        for (q, v) in idx.iter().enumerate() {
            let (du, dv) = (order - u.k, order - v.k);
            let fa = bernstein_pair_integral_exact(du, u.i, dv, v.i).expect("valid index");
            let fb = bernstein_pair_integral_exact(du, u.j, dv, v.j).expect("valid index");
            let fc = bernstein_pair_integral_weighted_exact(order, u.k, order, v.k).expect("valid index");
            m[(p, q)] = (fa * fb * fc).to_f64().expect("finite rational");
        }
    }
    m
}

/// Boundary / interior split of the DOFs of a basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofPartition {
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
}

impl DofPartition {
    pub fn len(&self) -> usize {
        self.boundary.len() + self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Splits DOFs into those whose basis function vanishes on the whole element
/// boundary (interior) and the rest. Purely structural: for the pyramid a
/// function is interior iff `k ≥ 1` and `1 ≤ i, j ≤ N - k - 1`; for simplices
/// iff every barycentric exponent is positive; for the quad iff
/// `1 ≤ i, j ≤ N - 1`.
pub fn dirichlet_partition(order: usize, shape: Shape) -> DofPartition {
    let mut part = DofPartition {
        boundary: Vec::new(),
        interior: Vec::new(),
    };
    for (pos, idx) in BasisDescriptor::new(shape, order).index_set().iter().enumerate() {
        if is_interior(order, idx) {
            part.interior.push(pos);
        } else {
            part.boundary.push(pos);
        }
    }
    part
}

fn is_interior(order: usize, idx: &BasisIndex) -> bool {
    match idx {
        BasisIndex::Pyramid(m) => m.is_interior(),
        BasisIndex::Triangle(a) => a.iter().all(|&x| x >= 1),
        BasisIndex::Tetrahedron(a) => a.iter().all(|&x| x >= 1),
        BasisIndex::Quad([i, j]) => (1..order).contains(i) && (1..order).contains(j),
    }
}

/// Interior-interior block of a matrix. An empty interior yields a `0 × 0`
/// matrix, flagged through [`ElementMatrix::is_empty`].
pub fn restrict(matrix: &ElementMatrix, part: &DofPartition) -> Result<ElementMatrix> {
    if matrix.entries.nrows() != part.len() || matrix.entries.ncols() != part.len() {
        return Err(Error::usage(format!(
            "matrix is {}x{} but the partition covers {} DOFs",
            matrix.entries.nrows(),
            matrix.entries.ncols(),
            part.len()
        )));
    }
    let n = part.interior.len();
    let entries = DMatrix::from_fn(n, n, |r, c| matrix.entries[(part.interior[r], part.interior[c])]);
    Ok(ElementMatrix {
        entries,
        restricted: true,
        ..matrix.clone()
    })
}
