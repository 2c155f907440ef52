//! One-dimensional Bernstein and Jacobi polynomials.
//!
//! Bernstein values are produced with the triangular recurrence
//! `B^d_k(x) = (1 - x) B^{d-1}_k(x) + x B^{d-1}_{k-1}(x)`, which only ever forms
//! convex combinations of nonnegative numbers. No binomial coefficient is
//! materialized, so the evaluation stays accurate well past the order where
//! `binom(N, k)` stops fitting in 64 bits.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// The `N + 1` Bernstein polynomials of order `N` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BernsteinBasis1D {
    order: usize,
}

impl BernsteinBasis1D {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        bernstein_eval_all(self.order, x)
    }

    pub fn deriv(&self, x: f64) -> Vec<f64> {
        bernstein_deriv_all(self.order, x)
    }
}

/// Values of every Bernstein polynomial of every order `0..=max_order` at `x`.
///
/// Row `d` holds `B^d_0(x), ..., B^d_d(x)`. The pyramid basis needs all the
/// lower orders at once, and the recurrence produces them for free.
pub fn bernstein_table(max_order: usize, x: f64) -> Vec<Vec<f64>> {
    let mut table = Vec::with_capacity(max_order + 1);
    table.push(vec![1.0]);
    let y = 1.0 - x;
    for d in 1..=max_order {
        let prev: &Vec<f64> = &table[d - 1];
        let mut row = vec![0.0; d + 1];
        row[0] = y * prev[0];
        for k in 1..d {
            row[k] = y * prev[k] + x * prev[k - 1];
        }
        row[d] = x * prev[d - 1];
        table.push(row);
    }
    table
}

/// All `N + 1` members of the order-`N` Bernstein basis at `x`.
pub fn bernstein_eval_all(order: usize, x: f64) -> Vec<f64> {
    let y = 1.0 - x;
    let mut row = vec![0.0; order + 1];
    row[0] = 1.0;
    for d in 1..=order {
        row[d] = x * row[d - 1];
        for k in (1..d).rev() {
            row[k] = y * row[k] + x * row[k - 1];
        }
        row[0] *= y;
    }
    row
}

/// `B^N_k(x) = binom(N, k) x^k (1 - x)^(N - k)`.
pub fn bernstein_eval(order: usize, k: usize, x: f64) -> Result<f64> {
    check_index(order, k)?;
    // Only the band of the recurrence that can reach index k is needed.
    let lo_skip = order - k;
    let mut row = vec![0.0; k + 1];
    row[0] = 1.0;
    let y = 1.0 - x;
    for d in 1..=order {
        let hi = d.min(k);
        let lo = d.saturating_sub(lo_skip);
        for m in (lo.max(1)..=hi).rev() {
            row[m] = y * row[m] + x * row[m - 1];
        }
        if lo == 0 {
            row[0] *= y;
        }
    }
    Ok(row[k])
}

/// `d/dx B^N_k(x) = N (B^{N-1}_{k-1}(x) - B^{N-1}_k(x))`.
pub fn bernstein_deriv(order: usize, k: usize, x: f64) -> Result<f64> {
    check_index(order, k)?;
    if order == 0 {
        return Ok(0.0);
    }
    let lower = bernstein_eval_all(order - 1, x);
    Ok(deriv_from_lower(order, k, &lower))
}

/// Derivatives of all `N + 1` members of the order-`N` basis at `x`.
pub fn bernstein_deriv_all(order: usize, x: f64) -> Vec<f64> {
    if order == 0 {
        return vec![0.0];
    }
    let lower = bernstein_eval_all(order - 1, x);
    (0..=order).map(|k| deriv_from_lower(order, k, &lower)).collect()
}

/// Derivative of `B^N_k` given the order `N - 1` values.
pub(crate) fn deriv_from_lower(order: usize, k: usize, lower: &[f64]) -> f64 {
    let left = if k >= 1 { lower[k - 1] } else { 0.0 };
    let right = if k < order { lower[k] } else { 0.0 };
    order as f64 * (left - right)
}

fn check_index(order: usize, k: usize) -> Result<()> {
    if k > order {
        return Err(Error::domain(format!(
            "Bernstein index {k} out of range for order {order}"
        )));
    }
    Ok(())
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for t in 0..k {
        acc *= BigUint::from(n - t);
        acc /= BigUint::from(t + 1);
    }
    acc
}

/// Exact value of `∫₀¹ B^n_i(x) B^m_j(x) dx`
/// `= binom(n, i) binom(m, j) / ((n + m + 1) binom(n + m, i + j))`.
pub fn bernstein_pair_integral_exact(n: usize, i: usize, m: usize, j: usize) -> Result<BigRational> {
    check_index(n, i)?;
    check_index(m, j)?;
    let num = binomial(n, i) * binomial(m, j);
    let den = BigUint::from(n + m + 1) * binomial(n + m, i + j);
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// [`bernstein_pair_integral_exact`] rounded to the nearest double.
pub fn bernstein_pair_integral(n: usize, i: usize, m: usize, j: usize) -> Result<f64> {
    let exact = bernstein_pair_integral_exact(n, i, m, j)?;
    Ok(exact.to_f64().expect("ratio of positive integers is finite"))
}

/// Exact `∫₀¹ B^n_i(x) B^m_j(x) (1 - x)² dx`.
///
/// Uses `B^n_i(x) (1 - x)² = binom(n, i) / binom(n + 2, i) · B^{n+2}_i(x)`,
/// which turns the weighted integral into an unweighted pair integral.
pub fn bernstein_pair_integral_weighted_exact(n: usize, i: usize, m: usize, j: usize) -> Result<BigRational> {
    check_index(n, i)?;
    let shift = BigRational::new(BigInt::from(binomial(n, i)), BigInt::from(binomial(n + 2, i)));
    Ok(shift * bernstein_pair_integral_exact(n + 2, i, m, j)?)
}

pub fn bernstein_pair_integral_weighted(n: usize, i: usize, m: usize, j: usize) -> Result<f64> {
    let exact = bernstein_pair_integral_weighted_exact(n, i, m, j)?;
    Ok(exact.to_f64().expect("ratio of positive integers is finite"))
}

/// Parameters of a Jacobi polynomial `P^{(alpha, beta)}_degree` on `[-1, 1]`,
/// orthogonal against `(1 - x)^alpha (1 + x)^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
    degree: usize,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64, degree: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) || !(beta.is_finite() && beta > -1.0) {
            return Err(Error::domain(format!(
                "Jacobi parameters must exceed -1, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta, degree })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Evaluates `P^{(alpha, beta)}_n(x)` in the classical normalization
/// (`P_0 = 1`, `P_1 = ((alpha + beta + 2) x + alpha - beta) / 2`).
pub fn jacobi_eval(params: JacobiParams, x: f64) -> f64 {
    let JacobiParams {
        alpha: a,
        beta: b,
        degree,
    } = params;
    if degree == 0 {
        return 1.0;
    }
    let mut p_prev = 1.0;
    let mut p = 0.5 * ((a + b + 2.0) * x + (a - b));
    for n in 2..=degree {
        let n = n as f64;
        let s = 2.0 * n + a + b;
        let c1 = 2.0 * n * (n + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        let next = (c2 * p - c3 * p_prev) / c1;
        p_prev = p;
        p = next;
    }
    p
}
