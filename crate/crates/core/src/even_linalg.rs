//! Linear algebra over the commutative even subalgebra.
//!
//! Pivoting on a nilpotent body is never done: determinants are expanded by
//! cofactors up to 4×4 and by Bird's division-free recursion above; inverses
//! split `M = M₀ + N` into body and nilpotent part and sum the Neumann series.

use crate::error::{Error, Result};
use crate::grassmann::{AlgebraContext, Complex, Multivector};

pub type EvenMatrix = Vec<Vec<Multivector>>;

fn check_square(m: &EvenMatrix) -> Result<usize> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix with {n} rows"
        )));
    }
    Ok(n)
}

pub fn det(ctx: &AlgebraContext, m: &EvenMatrix) -> Result<Multivector> {
    let n = check_square(m)?;
    if n <= 4 {
        Ok(det_cofactor(ctx, m))
    } else {
        Ok(det_bird(ctx, m))
    }
}

fn det_cofactor(ctx: &AlgebraContext, m: &EvenMatrix) -> Multivector {
    let n = m.len();
    match n {
        0 => ctx.one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = ctx.zero();
            for (j, pivot) in m[0].iter().enumerate() {
                if pivot.is_zero() {
                    continue;
                }
                let minor: EvenMatrix = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = pivot * &det_cofactor(ctx, &minor);
                if j % 2 == 0 {
                    acc += &term;
                } else {
                    acc = &acc - &term;
                }
            }
            acc
        }
    }
}

/// Bird (2011): `X₁ = A`, `X_{k+1} = μ(X_k) A`, `det A = (−1)^{n−1} (X_n)₀₀`,
/// where `μ` keeps the strict upper triangle and puts `−Σ_{j>i} X_jj` on the
/// diagonal.
pub(crate) fn det_bird(ctx: &AlgebraContext, a: &EvenMatrix) -> Multivector {
    let n = a.len();
    if n == 0 {
        return ctx.one();
    }
    let mut x = a.clone();
    for _ in 1..n {
        let mut mu: EvenMatrix = vec![vec![ctx.zero(); n]; n];
        let mut tail = ctx.zero();
        for i in (0..n).rev() {
            mu[i][i] = -&tail;
            tail += &x[i][i];
            for j in i + 1..n {
                mu[i][j] = x[i][j].clone();
            }
        }
        x = mul(ctx, &mu, a);
    }
    if n % 2 == 1 {
        x[0][0].clone()
    } else {
        -&x[0][0]
    }
}

pub fn mul(ctx: &AlgebraContext, a: &EvenMatrix, b: &EvenMatrix) -> EvenMatrix {
    let rows = a.len();
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let mut acc = ctx.zero();
                    for k in 0..inner {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            acc += &(&a[i][k] * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn is_zero_matrix(m: &EvenMatrix) -> bool {
    m.iter().all(|row| row.iter().all(Multivector::is_zero))
}

/// Inverse of a complex matrix by Gauss–Jordan with partial pivoting.
pub(crate) fn invert_complex(m: &[Vec<Complex>], tol: f64) -> Option<Vec<Vec<Complex>>> {
    let n = m.len();
    let mut a: Vec<Vec<Complex>> = m.to_vec();
    let mut inv: Vec<Vec<Complex>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))?;
        if a[pivot][col].norm() <= tol {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].inv();
        for j in 0..n {
            a[col][j] *= p;
            inv[col][j] *= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != Complex::new(0.0, 0.0) {
                    for j in 0..n {
                        let (ac, ic) = (a[col][j], inv[col][j]);
                        a[r][j] -= f * ac;
                        inv[r][j] -= f * ic;
                    }
                }
            }
        }
    }
    Some(inv)
}

/// `M⁻¹ = Σ_k (−M₀⁻¹N)^k M₀⁻¹`; the series stops once a power vanishes.
pub fn inverse(ctx: &AlgebraContext, m: &EvenMatrix) -> Result<EvenMatrix> {
    let n = check_square(m)?;
    let body: Vec<Vec<Complex>> = m
        .iter()
        .map(|row| row.iter().map(Multivector::body).collect())
        .collect();
    let body_tol = ctx.zero_tolerance().max(1e-300);
    let b_inv = invert_complex(&body, body_tol).ok_or(Error::NonInvertible("even matrix"))?;
    let b_inv: EvenMatrix = b_inv
        .into_iter()
        .map(|row| row.into_iter().map(|c| ctx.scalar(c)).collect())
        .collect();
    let soul: EvenMatrix = m
        .iter()
        .map(|row| row.iter().map(Multivector::soul).collect())
        .collect();
    let step: EvenMatrix = mul(ctx, &b_inv, &soul)
        .into_iter()
        .map(|row| row.into_iter().map(|x| -&x).collect())
        .collect();
    let mut sum = b_inv.clone();
    let mut term = b_inv;
    for _ in 0..=ctx.n_generators() {
        term = mul(ctx, &step, &term);
        if is_zero_matrix(&term) {
            break;
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += &term[i][j];
            }
        }
    }
    Ok(sum)
}
