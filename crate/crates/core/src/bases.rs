//! Bernstein-Bezier bases on the triangle, quadrilateral, tetrahedron and
//! pyramid.
//!
//! # Ordering
//!
//! Every basis has a fixed linear order; the position of a function in that
//! order is its DOF index in all assembled matrices.
//!
//! * pyramid, index `(i, j, k)` for `B^{N-k}_i(a) B^{N-k}_j(b) B^N_k(c)`:
//!   `k` outermost (`0..=N`), then `i` (`0..=N-k`), then `j` (`0..=N-k`).
//!   The `k = 0` layer (the quadrilateral base) is therefore contiguous.
//! * quadrilateral, `(i, j)` for `B^N_i(a) B^N_j(b)`: `i` outer, `j` inner.
//! * triangle, `(i, j, k)` for `λ1^i λ2^j λ3^k` with `i + j + k = N`:
//!   `k` outer, then `j`, with `i = N - j - k`.
//! * tetrahedron, `(i, j, k, l)` for `λ1^i λ2^j λ3^k λ4^l`: `l` outer, then
//!   `k`, then `j`, with `i = N - j - k - l`.
//!
//! # Coordinates
//!
//! The pyramid is the image of the unit cube `(a, b, c)` under
//! `r = a(1 - c)`, `s = b(1 - c)`, `t = c`. The reference tetrahedron has
//! vertices at the origin and the three unit points, with barycentric
//! coordinates `(1 - x - y - z, x, y, z)`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomials::{bernstein_eval_all, bernstein_table, deriv_from_lower};

const BARY_TOL: f64 = 1e-12;
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Triangle,
    Quad,
    Tetrahedron,
    Pyramid,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Triangle => "triangle",
            Shape::Quad => "quad",
            Shape::Tetrahedron => "tetrahedron",
            Shape::Pyramid => "pyramid",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangle" | "tri" => Ok(Shape::Triangle),
            "quad" | "quadrilateral" => Ok(Shape::Quad),
            "tetrahedron" | "tet" => Ok(Shape::Tetrahedron),
            "pyramid" | "pyr" => Ok(Shape::Pyramid),
            other => Err(Error::usage(format!("unknown shape '{other}'"))),
        }
    }
}

/// Index `(i, j, k)` of a pyramid basis function of order `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex3 {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub order: usize,
}

impl MultiIndex3 {
    pub fn new(i: usize, j: usize, k: usize, order: usize) -> Result<Self> {
        if k > order || i > order - k || j > order - k {
            return Err(Error::domain(format!(
                "({i},{j},{k}) is not a pyramid index of order {order}"
            )));
        }
        Ok(Self { i, j, k, order })
    }

    /// True when the function vanishes on all five faces:
    /// `k ≥ 1` and `1 ≤ i, j ≤ N - k - 1`.
    pub fn is_interior(&self) -> bool {
        let top = self.order - self.k;
        self.k >= 1 && (1..top).contains(&self.i) && (1..top).contains(&self.j)
    }

    /// Linear DOF position in the pyramid ordering.
    pub fn position(&self) -> usize {
        pyramid_layer_offset(self.order, self.k) + self.i * (self.order - self.k + 1) + self.j
    }
}

impl fmt::Display for MultiIndex3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

/// Multi-index of a function in any of the supported bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisIndex {
    Triangle([usize; 3]),
    Quad([usize; 2]),
    Tetrahedron([usize; 4]),
    Pyramid(MultiIndex3),
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisIndex::Triangle([i, j, k]) => write!(f, "({i},{j},{k})"),
            BasisIndex::Quad([i, j]) => write!(f, "({i},{j})"),
            BasisIndex::Tetrahedron([i, j, k, l]) => write!(f, "({i},{j},{k},{l})"),
            BasisIndex::Pyramid(m) => m.fmt(f),
        }
    }
}

/// An element shape together with a polynomial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub shape: Shape,
    pub order: usize,
}

impl BasisDescriptor {
    pub fn new(shape: Shape, order: usize) -> Self {
        Self { shape, order }
    }

    pub fn dimension(&self) -> usize {
        let n = self.order;
        match self.shape {
            Shape::Triangle => (n + 1) * (n + 2) / 2,
            Shape::Quad => (n + 1) * (n + 1),
            Shape::Tetrahedron => (n + 1) * (n + 2) * (n + 3) / 6,
            Shape::Pyramid => pyramid_dim(n),
        }
    }

    pub fn index_set(&self) -> Vec<BasisIndex> {
        let n = self.order;
        match self.shape {
            Shape::Triangle => triangle_indices(n).into_iter().map(BasisIndex::Triangle).collect(),
            Shape::Quad => quad_indices(n).into_iter().map(BasisIndex::Quad).collect(),
            Shape::Tetrahedron => tet_indices(n).into_iter().map(BasisIndex::Tetrahedron).collect(),
            Shape::Pyramid => pyramid_indices(n).into_iter().map(BasisIndex::Pyramid).collect(),
        }
    }

    /// Evaluates the whole basis at a point given in reference coordinates:
    /// `(r, s)` on the triangle `r, s ≥ 0, r + s ≤ 1`, `(a, b)` on the unit
    /// square, `(x, y, z)` on the reference tetrahedron and `(r, s, t)` on
    /// the reference pyramid.
    pub fn eval_reference(&self, point: &[f64]) -> Result<Vec<f64>> {
        let n = self.order;
        let want = match self.shape {
            Shape::Triangle | Shape::Quad => 2,
            Shape::Tetrahedron | Shape::Pyramid => 3,
        };
        if point.len() != want {
            return Err(Error::usage(format!(
                "{} points have {want} coordinates, got {}",
                self.shape,
                point.len()
            )));
        }
        match self.shape {
            Shape::Triangle => triangle_eval(n, [1.0 - point[0] - point[1], point[0], point[1]]),
            Shape::Quad => {
                let [a, b] = [point[0], point[1]];
                if !in_unit(a) || !in_unit(b) {
                    return Err(Error::domain(format!("({a}, {b}) is outside the unit square")));
                }
                Ok(quad_eval(n, a, b))
            }
            Shape::Tetrahedron => {
                let [x, y, z] = [point[0], point[1], point[2]];
                tet_eval(n, [1.0 - x - y - z, x, y, z])
            }
            Shape::Pyramid => pyramid_eval_rst(n, point[0], point[1], point[2]),
        }
    }
}

fn in_unit(x: f64) -> bool {
    (-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&x)
}

pub fn pyramid_dim(order: usize) -> usize {
    (order + 1) * (order + 2) * (2 * order + 3) / 6
}

fn pyramid_layer_offset(order: usize, k: usize) -> usize {
    (0..k).map(|kk| (order - kk + 1) * (order - kk + 1)).sum()
}

pub fn pyramid_indices(order: usize) -> Vec<MultiIndex3> {
    let mut out = Vec::with_capacity(pyramid_dim(order));
    for k in 0..=order {
        for i in 0..=order - k {
            for j in 0..=order - k {
                out.push(MultiIndex3 { i, j, k, order });
            }
        }
    }
    out
}

pub fn quad_indices(order: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::with_capacity((order + 1) * (order + 1));
    for i in 0..=order {
        for j in 0..=order {
            out.push([i, j]);
        }
    }
    out
}

pub fn triangle_indices(order: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for k in 0..=order {
        for j in 0..=order - k {
            out.push([order - j - k, j, k]);
        }
    }
    out
}

pub fn tet_indices(order: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for l in 0..=order {
        for k in 0..=order - l {
            for j in 0..=order - l - k {
                out.push([order - j - k - l, j, k, l]);
            }
        }
    }
    out
}

/// Pyramid basis `B^{N-k}_i(a) B^{N-k}_j(b) B^N_k(c)` at a cube point.
pub fn pyramid_eval(order: usize, a: f64, b: f64, c: f64) -> Vec<f64> {
    let ta = bernstein_table(order, a);
    let tb = bernstein_table(order, b);
    let bc = bernstein_eval_all(order, c);
    let mut out = Vec::with_capacity(pyramid_dim(order));
    for k in 0..=order {
        let d = order - k;
        for i in 0..=d {
            let ai = ta[d][i] * bc[k];
            for j in 0..=d {
                out.push(ai * tb[d][j]);
            }
        }
    }
    out
}

/// Pyramid basis at a point `(r, s, t)` of the reference pyramid.
///
/// At the apex `t = 1` the collapsed coordinates are undefined but the basis
/// has a continuous limit: the apex function `(0, 0, N)` is 1 and all others
/// vanish.
pub fn pyramid_eval_rst(order: usize, r: f64, s: f64, t: f64) -> Result<Vec<f64>> {
    let (a, b, c) = rst_to_abc(r, s, t)?;
    if c >= 1.0 {
        let mut out = vec![0.0; pyramid_dim(order)];
        *out.last_mut().expect("basis is never empty") = 1.0;
        return Ok(out);
    }
    Ok(pyramid_eval(order, a, b, c))
}

/// Collapsed coordinates of a reference pyramid point; `a = b = 0` at the apex.
pub fn rst_to_abc(r: f64, s: f64, t: f64) -> Result<(f64, f64, f64)> {
    let inside = (-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&t)
        && r >= -DOMAIN_TOL
        && s >= -DOMAIN_TOL
        && r <= 1.0 - t + DOMAIN_TOL
        && s <= 1.0 - t + DOMAIN_TOL;
    if !inside || !(r.is_finite() && s.is_finite() && t.is_finite()) {
        return Err(Error::domain(format!(
            "({r}, {s}, {t}) is outside the reference pyramid"
        )));
    }
    let t = t.clamp(0.0, 1.0);
    if t >= 1.0 {
        return Ok((0.0, 0.0, 1.0));
    }
    let w = 1.0 - t;
    Ok(((r / w).clamp(0.0, 1.0), (s / w).clamp(0.0, 1.0), t))
}

/// Gradients of the pyramid basis with respect to `(r, s, t)`, evaluated at a
/// cube point with `c < 1`.
///
/// `∂/∂r = B'^{N-k}_i(a) B^{N-k}_j(b) B^N_k(c) / (1 - c)` and likewise for
/// `s`; `∂/∂t = a ∂/∂r + b ∂/∂s + B^{N-k}_i(a) B^{N-k}_j(b) B'^N_k(c)`.
/// The quotient `B^N_k(c) / (1 - c)` is evaluated as
/// `N / (N - k) · B^{N-1}_k(c)`, which has no singularity for `k < N`. The
/// `k = N` layer is constant in `a` and `b`, so its `r` and `s` derivatives
/// are exactly zero.
pub fn pyramid_grad_rst(order: usize, a: f64, b: f64, c: f64) -> Result<[Vec<f64>; 3]> {
    if !(c < 1.0) {
        return Err(Error::domain(format!(
            "pyramid gradient requested at c = {c}; the apex is singular in collapsed coordinates"
        )));
    }
    let np = pyramid_dim(order);
    let mut dr = Vec::with_capacity(np);
    let mut ds = Vec::with_capacity(np);
    let mut dt = Vec::with_capacity(np);

    let ta = bernstein_table(order, a);
    let tb = bernstein_table(order, b);
    let bc = bernstein_table(order, c);
    let bc_lower = if order > 0 { Some(&bc[order - 1]) } else { None };

    for k in 0..=order {
        let d = order - k;
        let dc = match bc_lower {
            Some(lower) => deriv_from_lower(order, k, lower),
            None => 0.0,
        };
        // B^N_k(c) / (1 - c)
        let ck_over = match bc_lower {
            Some(lower) if k < order => order as f64 / d as f64 * lower[k],
            _ => 0.0,
        };
        for i in 0..=d {
            let da_i = if d > 0 { deriv_from_lower(d, i, &ta[d - 1]) } else { 0.0 };
            for j in 0..=d {
                let db_j = if d > 0 { deriv_from_lower(d, j, &tb[d - 1]) } else { 0.0 };
                let gr = da_i * tb[d][j] * ck_over;
                let gs = ta[d][i] * db_j * ck_over;
                let gc = ta[d][i] * tb[d][j] * dc;
                dr.push(gr);
                ds.push(gs);
                dt.push(a * gr + b * gs + gc);
            }
        }
    }
    Ok([dr, ds, dt])
}

/// Multinomial coefficient `N! / (α_1! ... α_m!)` as a double.
fn multinomial(alpha: &[usize]) -> f64 {
    let mut acc = 1.0;
    let mut total = 0usize;
    for &a in alpha {
        for t in 1..=a {
            total += 1;
            acc *= total as f64 / t as f64;
        }
    }
    acc
}

fn check_barycentric(lam: &[f64]) -> Result<()> {
    let sum: f64 = lam.iter().sum();
    if lam.iter().any(|l| !l.is_finite() || *l < -BARY_TOL) || (sum - 1.0).abs() > BARY_TOL {
        return Err(Error::domain(format!(
            "{lam:?} are not barycentric coordinates (sum {sum})"
        )));
    }
    Ok(())
}

fn simplex_eval<const D: usize>(indices: &[[usize; D]], lam: &[f64; D]) -> Vec<f64> {
    indices
        .iter()
        .map(|alpha| {
            let mut v = multinomial(alpha);
            for (l, &p) in lam.iter().zip(alpha.iter()) {
                v *= l.max(0.0).powi(p as i32);
            }
            v
        })
        .collect()
}

/// Triangle basis `N! / (i! j! k!) λ1^i λ2^j λ3^k`.
pub fn triangle_eval(order: usize, lam: [f64; 3]) -> Result<Vec<f64>> {
    check_barycentric(&lam)?;
    Ok(simplex_eval(&triangle_indices(order), &lam))
}

/// Tensor-product basis `B^N_i(a) B^N_j(b)` on the unit square.
pub fn quad_eval(order: usize, a: f64, b: f64) -> Vec<f64> {
    let ba = bernstein_eval_all(order, a);
    let bb = bernstein_eval_all(order, b);
    let mut out = Vec::with_capacity((order + 1) * (order + 1));
    for x in &ba {
        for y in &bb {
            out.push(x * y);
        }
    }
    out
}

/// Tetrahedron basis in barycentric coordinates.
pub fn tet_eval(order: usize, lam: [f64; 4]) -> Result<Vec<f64>> {
    check_barycentric(&lam)?;
    Ok(simplex_eval(&tet_indices(order), &lam))
}

/// Constant gradients of the tetrahedron barycentric coordinates.
pub const TET_BARY_GRADS: [[f64; 3]; 4] = [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Gradients of the tetrahedron basis with respect to `(x, y, z)` at a point
/// of the reference tetrahedron.
///
/// Uses `∂B^N_α / ∂λ_m = N B^{N-1}_{α - e_m}` and the chain rule through the
/// constant barycentric gradients.
pub fn tet_grad(order: usize, point: [f64; 3]) -> Result<[Vec<f64>; 3]> {
    let [x, y, z] = point;
    let lam = [1.0 - x - y - z, x, y, z];
    check_barycentric(&lam)?;
    let indices = tet_indices(order);
    let mut grads = [
        vec![0.0; indices.len()],
        vec![0.0; indices.len()],
        vec![0.0; indices.len()],
    ];
    if order == 0 {
        return Ok(grads);
    }
    let lower_idx = tet_indices(order - 1);
    let lower_val = simplex_eval(&lower_idx, &lam);
    let lookup: HashMap<[usize; 4], f64> = lower_idx.into_iter().zip(lower_val).collect();
    let n = order as f64;
    for (pos, alpha) in indices.iter().enumerate() {
        for (m, grad_lambda) in TET_BARY_GRADS.iter().enumerate() {
            if alpha[m] == 0 {
                continue;
            }
            let mut beta = *alpha;
            beta[m] -= 1;
            let dl = n * lookup[&beta];
            for d in 0..3 {
                grads[d][pos] += dl * grad_lambda[d];
            }
        }
    }
    Ok(grads)
}

/// The five faces of the pyramid, named by the cube face they come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceId {
    /// `c = 0`, the quadrilateral base.
    QuadBase,
    TriA0,
    TriA1,
    TriB0,
    TriB1,
}

impl FaceId {
    pub const ALL: [FaceId; 5] = [
        FaceId::QuadBase,
        FaceId::TriA0,
        FaceId::TriA1,
        FaceId::TriB0,
        FaceId::TriB1,
    ];

    pub fn is_triangle(&self) -> bool {
        !matches!(self, FaceId::QuadBase)
    }

    /// Cube point of the face parameterized by `(u, v) ∈ [0, 1]²`.
    ///
    /// The quadrilateral base uses `(u, v) = (a, b)`. A triangular face uses
    /// its two surviving cube coordinates in order, so `(u, v) = (b, c)` on
    /// `a = 0, 1` and `(u, v) = (a, c)` on `b = 0, 1`; the collapsed edge is
    /// `v = 1`.
    pub fn cube_point(&self, u: f64, v: f64) -> [f64; 3] {
        match self {
            FaceId::QuadBase => [u, v, 0.0],
            FaceId::TriA0 => [0.0, u, v],
            FaceId::TriA1 => [1.0, u, v],
            FaceId::TriB0 => [u, 0.0, v],
            FaceId::TriB1 => [u, 1.0, v],
        }
    }

    /// The face Bernstein basis at face coordinates `(u, v)`, in the face
    /// ordering (quad ordering on the base, triangle ordering otherwise).
    ///
    /// Triangular faces use the collapsed barycentric coordinates
    /// `λ = ((1 - u)(1 - v), u (1 - v), v)`.
    pub fn face_basis(&self, order: usize, u: f64, v: f64) -> Vec<f64> {
        match self {
            FaceId::QuadBase => quad_eval(order, u, v),
            _ => {
                let lam = [(1.0 - u) * (1.0 - v), u * (1.0 - v), v];
                simplex_eval(&triangle_indices(order), &lam)
            }
        }
    }
}

/// Index of a face Bernstein function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceIndex {
    Quad([usize; 2]),
    Triangle([usize; 3]),
}

impl FaceIndex {
    /// Position in the face basis ordering of the given order.
    pub fn position(&self, order: usize) -> usize {
        match *self {
            FaceIndex::Quad([i, j]) => i * (order + 1) + j,
            FaceIndex::Triangle([_, j, k]) => {
                // rows k' < k hold N - k' + 1 entries each
                (0..k).map(|kk| order - kk + 1).sum::<usize>() + j
            }
        }
    }
}

/// Which pyramid functions survive on a face, and the face function each one
/// restricts to.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceTraceMap {
    pub face_id: FaceId,
    pub order: usize,
    pub pairs: Vec<(MultiIndex3, FaceIndex)>,
}

impl FaceTraceMap {
    pub fn contains(&self, idx: &MultiIndex3) -> bool {
        self.pairs.iter().any(|(p, _)| p == idx)
    }
}

/// Builds the trace map of a face: on `c = 0` the `k = 0` functions restrict
/// to the quad basis; on a triangular face the functions whose pinned index
/// sits at the matching end (`i = 0` for `a = 0`, `i = N - k` for `a = 1`,
/// likewise `j` for `b`) restrict to the triangle function
/// `(N - k - m, m, k)`, `m` being the free in-face index.
pub fn trace_map(order: usize, face: FaceId) -> FaceTraceMap {
    let mut pairs = Vec::new();
    for idx in pyramid_indices(order) {
        let MultiIndex3 { i, j, k, .. } = idx;
        let top = order - k;
        let face_idx = match face {
            FaceId::QuadBase if k == 0 => Some(FaceIndex::Quad([i, j])),
            FaceId::TriA0 if i == 0 => Some(FaceIndex::Triangle([top - j, j, k])),
            FaceId::TriA1 if i == top => Some(FaceIndex::Triangle([top - j, j, k])),
            FaceId::TriB0 if j == 0 => Some(FaceIndex::Triangle([top - i, i, k])),
            FaceId::TriB1 if j == top => Some(FaceIndex::Triangle([top - i, i, k])),
            _ => None,
        };
        if let Some(f) = face_idx {
            pairs.push((idx, f));
        }
    }
    FaceTraceMap {
        face_id: face,
        order,
        pairs,
    }
}
