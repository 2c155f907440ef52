//! Gauss-Legendre and Gauss-Jacobi rules on `[0, 1]`, and the tensor rules
//! on the unit cube used to integrate over collapsed pyramids and tetrahedra.
//!
//! One-dimensional rules come from the Golub-Welsch construction: the nodes
//! are the eigenvalues of the symmetric tridiagonal Jacobi matrix of the
//! weight, and each weight is `mu0 * z0^2` where `z0` is the first component
//! of the corresponding normalized eigenvector.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta;

use crate::error::{Error, Result};

/// Where a rule lives and which weight function is folded into its weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `[0, 1]` with weight `(1 - x)^alpha x^beta`; Gauss-Legendre is `(0, 0)`.
    Interval { alpha: f64, beta: f64 },
    /// Unit cube `(a, b, c)` with the pyramid measure `(1 - c)^2 da db dc`.
    PyramidCube,
    /// Unit cube `(a, b, c)` with the collapsed tetrahedron measure
    /// `(1 - b)(1 - c)^2 da db dc`.
    TetCube,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P> {
    nodes: Vec<P>,
    weights: Vec<f64>,
    exactness_degree: usize,
    domain: Domain,
}

pub type Rule1D = QuadratureRule<f64>;
pub type Rule3D = QuadratureRule<[f64; 3]>;

impl<P: Copy> QuadratureRule<P> {
    pub fn nodes(&self) -> &[P] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest polynomial degree integrated exactly (per coordinate direction
    /// for the cube rules).
    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Weighted sum `Σ w_q f(x_q)`, accumulated in node order.
    pub fn integrate<F: FnMut(P) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`, exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<Rule1D> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// `n`-point Gauss-Jacobi rule for `∫₀¹ p(c) (1 - c)² dc`, exact for
/// `deg p ≤ 2n - 1`.
pub fn gauss_jacobi_20(n: usize) -> Result<Rule1D> {
    gauss_jacobi(n, 2.0, 0.0)
}

/// `n`-point Gauss rule for the weight `(1 - x)^alpha x^beta` on `[0, 1]`.
///
/// Nodes are returned in ascending order.
pub fn gauss_jacobi(n: usize, alpha: f64, beta_exp: f64) -> Result<Rule1D> {
    if n == 0 {
        return Err(Error::domain("quadrature needs at least one point"));
    }
    if !(alpha > -1.0 && beta_exp > -1.0) {
        return Err(Error::domain(format!(
            "Jacobi weight exponents must exceed -1, got ({alpha}, {beta_exp})"
        )));
    }
    let (diag, mut off) = jacobi_matrix_unit_interval(n + 1, alpha, beta_exp);
    let (nodes, _) = tridiagonal_eigen(diag[..n].to_vec(), off[..n - 1].to_vec())?;
    let mu0 = weight_mass(alpha, beta_exp);
    off.truncate(n);

    // One Newton step on the recurrence polishes each eigenvalue to full
    // accuracy; the Christoffel function then gives weights that are more
    // accurate than squared eigenvector components.
    let mut pairs: Vec<(f64, f64)> = nodes
        .into_iter()
        .map(|x0| {
            let (p, dp, _) = orthonormal_recurrence(&diag[..n], &off, x0);
            let x = if dp != 0.0 { x0 - p / dp } else { x0 };
            let (_, _, christoffel) = orthonormal_recurrence(&diag[..n], &off, x);
            (x, mu0 / christoffel)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (nodes, mut weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    if alpha == beta_exp {
        for i in 0..n / 2 {
            let w = 0.5 * (weights[i] + weights[n - 1 - i]);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
    }
    // Pin the total to the exact weight mass; this only moves weights by a
    // few ulps but keeps low-order moments such as volumes exact.
    let total = compensated_sum(&weights);
    for w in weights.iter_mut() {
        *w *= mu0 / total;
    }

    Ok(QuadratureRule {
        nodes,
        weights,
        exactness_degree: 2 * n - 1,
        domain: Domain::Interval { alpha, beta: beta_exp },
    })
}

/// Tensor rule on the unit cube for the pyramid measure `(1 - c)² da db dc`:
/// Gauss-Legendre in `a` and `b`, Gauss-Jacobi(2, 0) in `c`.
///
/// Node order is `a` outermost, then `b`, then `c`.
pub fn pyramid_rule(n: usize) -> Result<Rule3D> {
    let gl = gauss_legendre(n)?;
    let gj = gauss_jacobi_20(n)?;
    Ok(tensor(&gl, &gl, &gj, Domain::PyramidCube))
}

/// Collapsed-coordinate rule for the tetrahedron measure
/// `(1 - b)(1 - c)² da db dc`, matching the map
/// `x = a(1 - b)(1 - c)`, `y = b(1 - c)`, `z = c`.
pub fn tet_rule(n: usize) -> Result<Rule3D> {
    let ga = gauss_legendre(n)?;
    let gb = gauss_jacobi(n, 1.0, 0.0)?;
    let gc = gauss_jacobi_20(n)?;
    Ok(tensor(&ga, &gb, &gc, Domain::TetCube))
}

fn tensor(ra: &Rule1D, rb: &Rule1D, rc: &Rule1D, domain: Domain) -> Rule3D {
    let cap = ra.len() * rb.len() * rc.len();
    let mut nodes = Vec::with_capacity(cap);
    let mut weights = Vec::with_capacity(cap);
    for (a, wa) in ra.iter() {
        for (b, wb) in rb.iter() {
            for (c, wc) in rc.iter() {
                nodes.push([a, b, c]);
                weights.push(wa * wb * wc);
            }
        }
    }
    QuadratureRule {
        nodes,
        weights,
        exactness_degree: ra.exactness_degree.min(rb.exactness_degree).min(rc.exactness_degree),
        domain,
    }
}

/// `∫₀¹ (1 - x)^alpha x^beta dx`, exact for integer exponents.
fn weight_mass(alpha: f64, beta_exp: f64) -> f64 {
    let is_int = |v: f64| v.fract() == 0.0 && v < 64.0;
    if is_int(alpha) && is_int(beta_exp) {
        // alpha! beta! / (alpha + beta + 1)!
        let (a, b) = (alpha as u64, beta_exp as u64);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut num = 1.0;
        for t in 1..=lo {
            num *= t as f64;
        }
        let mut den = 1.0;
        for t in (hi + 1)..=(a + b + 1) {
            den *= t as f64;
        }
        num / den
    } else {
        beta(alpha + 1.0, beta_exp + 1.0)
    }
}

/// Diagonal and off-diagonal of the Jacobi matrix of `(1 - x)^a x^b` on `[0, 1]`.
///
/// The classical `[-1, 1]` recurrence coefficients are remapped by
/// `x -> (x + 1) / 2`.
fn jacobi_matrix_unit_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = a + b;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        diag.push(0.5 * (d + 1.0));
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let sq = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off.push(0.5 * sq.sqrt());
    }
    (diag, off)
}

fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Orthonormal polynomials of a Jacobi matrix at `x`, scaled so `p_0 = 1`.
/// Returns `p_n(x)`, `p_n'(x)` and `Σ_{k<n} p_k(x)²`; `off` holds
/// `β_1, …, β_n`.
fn orthonormal_recurrence(diag: &[f64], off: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    let mut sum = 0.0;
    for k in 0..diag.len() {
        sum += p * p;
        let beta_prev = if k == 0 { 0.0 } else { off[k - 1] };
        let p_next = ((x - diag[k]) * p - beta_prev * p_prev) / off[k];
        let d_next = ((x - diag[k]) * d + p - beta_prev * d_prev) / off[k];
        (p_prev, p) = (p, p_next);
        (d_prev, d) = (d, d_next);
    }
    (p, d, sum)
}

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each normalized eigenvector.
///
/// Implicit-shift QL iteration; only the first row of the accumulated
/// rotation matrix is tracked since that is all Golub-Welsch needs.
pub fn tridiagonal_eigen(mut d: Vec<f64>, off: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    if off.len() + 1 != n.max(1) {
        return Err(Error::usage("off-diagonal must have one entry fewer than the diagonal"));
    }
    let mut e = off;
    e.push(0.0);
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::usage("tridiagonal QL iteration did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}
