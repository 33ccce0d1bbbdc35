//! Moment-map matrices of point embeddings C^{0|n} → P^{1|n} and of the section
//! embeddings of P^{1|2}, with balancing solvers.
//!
//! A matrix is balanced when its even block equals `λ·𝕀` and its odd block
//! `η·𝕀`. Constants are fitted as the mean real part of the block diagonal and
//! residuals are max-abs deviations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grassmann::{AlgebraContext, Complex, Multivector, Parity};
use crate::integrate::{
    berezin_point_integrate, cy_integrate_p12_many, exp_weight, ChartDensity, PointWeight,
    QuadratureSpec,
};
use crate::projective::{veronese_map_scaled, veronese_sections, ProjectivePoint};

pub type Matrix = Vec<Vec<Complex>>;

const I: Complex = Complex::new(0.0, 1.0);

fn zeros(n: usize) -> Matrix {
    vec![vec![Complex::new(0.0, 0.0); n]; n]
}

/// Pullback data `X_I = P*(x_I)`, `Θ_i = P*(θ_i)` of a point C^{0|n} → P^{1|n},
/// valued in the algebra on `η_1..η_n, η̄_1..η̄_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEmbedding {
    ctx: AlgebraContext,
    x: [Multivector; 2],
    theta: Vec<Multivector>,
}

impl PointEmbedding {
    pub fn new(x0: Multivector, x1: Multivector, theta: Vec<Multivector>) -> Result<Self> {
        let ctx = *x0.context();
        if *x1.context() != ctx || theta.iter().any(|t| *t.context() != ctx) {
            return Err(Error::ContextMismatch);
        }
        if theta.len() != ctx.n_pairs() {
            return Err(Error::DimensionMismatch(format!(
                "{} odd pullbacks for an algebra with {} generator pairs",
                theta.len(),
                ctx.n_pairs()
            )));
        }
        for x in [&x0, &x1] {
            if !x.is_zero() && !x.is_even() {
                return Err(Error::ParityViolation { expected: Parity::Even });
            }
        }
        if theta.iter().any(|t| !t.is_zero() && !t.is_odd()) {
            return Err(Error::ParityViolation { expected: Parity::Odd });
        }
        if x0.body().norm() == 0.0 && x1.body().norm() == 0.0 {
            return Err(Error::DegeneratePoint);
        }
        Ok(PointEmbedding {
            ctx,
            x: [x0, x1],
            theta,
        })
    }

    /// `X_I = α_I + α̃_I η₁η₂`, `Θ_i = Σ_j σ_{ij} η_j`, with `n = σ.len()`.
    pub fn linear(alpha: [Complex; 2], alpha_tilde: [Complex; 2], sigma: &[Vec<Complex>]) -> Result<Self> {
        let n = sigma.len();
        if n == 0 || sigma.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch("σ must be a non-empty square matrix".into()));
        }
        let ctx = AlgebraContext::new(n)?;
        let e12 = if n >= 2 {
            &ctx.eta(0)? * &ctx.eta(1)?
        } else if alpha_tilde.iter().all(|a| a.norm() == 0.0) {
            ctx.zero()
        } else {
            return Err(Error::DimensionMismatch("α̃ needs at least two generators".into()));
        };
        let x = |i: usize| &ctx.scalar(alpha[i]) + &e12.scale(alpha_tilde[i]);
        let mut theta = Vec::with_capacity(n);
        for row in sigma {
            let mut t = ctx.zero();
            for (j, s) in row.iter().enumerate() {
                t += &ctx.eta(j)?.scale(*s);
            }
            theta.push(t);
        }
        PointEmbedding::new(x(0), x(1), theta)
    }

    pub fn context(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn x(&self) -> &[Multivector; 2] {
        &self.x
    }

    pub fn theta(&self) -> &[Multivector] {
        &self.theta
    }

    /// Same embedding with every `Θ_j` multiplied by `e^{iφ}`.
    pub fn with_theta_phase(&self, phi: f64) -> PointEmbedding {
        let ph = Complex::from_polar(1.0, phi);
        PointEmbedding {
            theta: self.theta.iter().map(|t| t.scale(ph)).collect(),
            ..self.clone()
        }
    }

    /// `|X₀|² + |X₁|² + i Σ Θ_j Θ̄_j`.
    pub fn denominator(&self) -> Multivector {
        let mut d = self.ctx.zero();
        for x in &self.x {
            d += &(x * &x.conjugate());
        }
        for t in &self.theta {
            d += &(t * &t.conjugate()).scale(I);
        }
        d
    }

    fn integrate_all(&self, numerators: &[Multivector], weight: PointWeight) -> Result<Vec<Complex>> {
        let inv = self.denominator().invert()?;
        let w = match weight {
            PointWeight::None => inv,
            PointWeight::Exp => &inv * &exp_weight(&self.ctx, &self.theta)?,
        };
        numerators
            .iter()
            .map(|num| berezin_point_integrate(&(num * &w), PointWeight::None, &[]))
            .collect()
    }
}

/// `∫ Π dη_i dη̄_i (X_I X̄_J) / (|X₀|² + |X₁|² + iΣΘΘ̄)`, optionally weighted.
pub fn moment_matrix_point(e: &PointEmbedding, weight: PointWeight) -> Result<Matrix> {
    let nums: Vec<Multivector> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| &e.x[i] * &e.x[j].conjugate())
        .collect();
    let v = e.integrate_all(&nums, weight)?;
    Ok(vec![vec![v[0], v[1]], vec![v[2], v[3]]])
}

/// Odd-block moment matrix with entries `∫ iΘ_kΘ̄_l / (…)`.
pub fn su_block_matrix(e: &PointEmbedding, weight: PointWeight) -> Result<Matrix> {
    let n = e.n();
    let nums: Vec<Multivector> = (0..n)
        .flat_map(|k| (0..n).map(move |l| (k, l)))
        .map(|(k, l)| (&e.theta[k] * &e.theta[l].conjugate()).scale(I))
        .collect();
    let v = e.integrate_all(&nums, weight)?;
    Ok(v.chunks(n).map(<[Complex]>::to_vec).collect())
}

pub fn su_block_point(e: &PointEmbedding, k: usize, l: usize) -> Result<Complex> {
    let n = e.n();
    for i in [k, l] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, size: n });
        }
    }
    let num = (&e.theta[k] * &e.theta[l].conjugate()).scale(I);
    Ok(e.integrate_all(&[num], PointWeight::None)?[0])
}

/// Largest magnitude among `∫ X_I Θ̄_K / (…)` and `∫ Θ_K X̄_I / (…)`.
pub fn mixed_block_max(e: &PointEmbedding, weight: PointWeight) -> Result<f64> {
    let mut nums = Vec::new();
    for x in &e.x {
        for t in &e.theta {
            nums.push(x * &t.conjugate());
            nums.push(t * &x.conjugate());
        }
    }
    Ok(e.integrate_all(&nums, weight)?
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max))
}

/// `B[x₀:x₁]_{IJ} = α_I ᾱ_J / Σ|α|²`.
pub fn classical_b_matrix(alpha: [Complex; 2]) -> Matrix {
    let a = alpha[0].norm_sqr() + alpha[1].norm_sqr();
    (0..2)
        .map(|i| (0..2).map(|j| alpha[i] * alpha[j].conj() / a).collect())
        .collect()
}

/// `|det σ|²`; for square σ this equals `det(σσ†)`.
pub fn det_sigma_sq(sigma: &[Vec<Complex>]) -> Result<f64> {
    let n = sigma.len();
    if sigma.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("σ must be square".into()));
    }
    let ctx = AlgebraContext::new(0)?;
    let m: Vec<Vec<Multivector>> = sigma
        .iter()
        .map(|r| r.iter().map(|c| ctx.scalar(*c)).collect())
        .collect();
    Ok(crate::even_linalg::det(&ctx, &m)?.body().norm_sqr())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub even_block: Matrix,
    pub odd_block: Matrix,
    pub mixed_max: f64,
    pub lambda: f64,
    pub eta: f64,
    /// `max |even − λ𝕀|`.
    pub even_residual: f64,
    /// `max |odd − η𝕀|`.
    pub odd_residual: f64,
    pub residual: f64,
    /// `max |M_ij − conj(M_ji)|` of the even block.
    pub even_hermiticity: f64,
    /// `max |M_IK − conj(M_KI)|` of the odd block.
    pub odd_hermiticity: f64,
    /// `max |conj(M_IK) + M_KI|` of the odd block.
    pub odd_anti_hermiticity: f64,
    /// True when both blocks have equal size.
    pub equal_blocks: bool,
    pub lambda_plus_eta: Option<f64>,
}

fn fit(block: &Matrix) -> (f64, f64) {
    let n = block.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let lambda = block.iter().enumerate().map(|(i, r)| r[i].re).sum::<f64>() / n as f64;
    let mut res: f64 = 0.0;
    for (i, row) in block.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if i == j { lambda } else { 0.0 };
            res = res.max((x - want).norm());
        }
    }
    (lambda, res)
}

fn hermiticity(block: &Matrix, sign: f64) -> f64 {
    let mut r: f64 = 0.0;
    for (i, row) in block.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            r = r.max((x - block[j][i].conj() * sign).norm());
        }
    }
    r
}

impl BalanceReport {
    pub fn from_blocks(even_block: Matrix, odd_block: Matrix, mixed_max: f64) -> BalanceReport {
        let (lambda, even_residual) = fit(&even_block);
        let (eta, odd_residual) = fit(&odd_block);
        let equal_blocks = even_block.len() == odd_block.len();
        BalanceReport {
            even_hermiticity: hermiticity(&even_block, 1.0),
            odd_hermiticity: hermiticity(&odd_block, 1.0),
            odd_anti_hermiticity: hermiticity(&odd_block, -1.0),
            even_block,
            odd_block,
            mixed_max,
            lambda,
            eta,
            even_residual,
            odd_residual,
            residual: even_residual.max(odd_residual),
            equal_blocks,
            lambda_plus_eta: equal_blocks.then_some(lambda + eta),
        }
    }
}

/// Sums moment matrices over points and fits both blocks.
pub fn balance_residual_points(
    es: &[PointEmbedding],
    weight: PointWeight,
    exec: Execution,
) -> Result<BalanceReport> {
    let first = es
        .first()
        .ok_or_else(|| Error::InvalidInput("no points to balance".into()))?;
    let n = first.n();
    if es.iter().any(|e| e.n() != n) {
        return Err(Error::DimensionMismatch("points of different odd dimension".into()));
    }
    let parts = exec.map_slice(es, |e| -> Result<(Matrix, Matrix, f64)> {
        Ok((
            moment_matrix_point(e, weight)?,
            su_block_matrix(e, weight)?,
            mixed_block_max(e, weight)?,
        ))
    });
    let (mut even, mut odd, mut mixed) = (zeros(2), zeros(n), 0.0f64);
    for part in parts {
        let (m, s, x) = part?;
        for (acc, row) in even.iter_mut().zip(&m) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        for (acc, row) in odd.iter_mut().zip(&s) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        mixed = mixed.max(x);
    }
    Ok(BalanceReport::from_blocks(even, odd, mixed))
}

/// Tolerance the solved point must meet under the exact moment matrix.
pub const POINT_BALANCE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSolution {
    pub sigma: Matrix,
    pub alpha: [Complex; 2],
    pub alpha_tilde: [Complex; 2],
    pub det_sigma_sq: f64,
    /// `|det σ|² / (Σ|α|²)²`, the predicted odd-block constant.
    pub predicted_eta: f64,
    pub report: BalanceReport,
    pub verified: bool,
    #[serde(skip)]
    pub embedding: PointEmbedding,
}

/// Balances the point `P = [1:0]`, `n = 2`, for a given linear σ.
///
/// `α̃₀ = |det σ|` (real, non-negative), which fixes `Re(α̃₀²) = |det σ|²`.
/// `α̃₁` is then taken real and non-negative, chosen as the smallest root of
/// `M₀₀ − M₁₁` as a function of `α̃₁`; the exact moment matrix is quadratic in
/// it, so three evaluations determine it. The result is verified against the
/// exact moment matrix.
pub fn solve_point_balance(sigma: &[Vec<Complex>]) -> Result<PointSolution> {
    if sigma.len() != 2 || sigma.iter().any(|r| r.len() != 2) {
        return Err(Error::DimensionMismatch("point balancing needs a 2×2 σ".into()));
    }
    let alpha = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
    let d = det_sigma_sq(sigma)?;
    let a0 = Complex::new(d.sqrt(), 0.0);
    let gap = |s: f64| -> Result<f64> {
        let e = PointEmbedding::linear(alpha, [a0, Complex::new(s, 0.0)], sigma)?;
        let m = moment_matrix_point(&e, PointWeight::None)?;
        Ok((m[0][0] - m[1][1]).re)
    };
    let (g0, g1, g2) = (gap(0.0)?, gap(1.0)?, gap(2.0)?);
    let c2 = 0.5 * (g2 - 2.0 * g1 + g0);
    let c1 = g1 - g0 - c2;
    let c0 = g0;
    let scale = g0.abs().max(g1.abs()).max(g2.abs()).max(1.0);
    let roots: Vec<f64> = if c2.abs() <= 1e-14 * scale {
        if c1.abs() <= 1e-14 * scale {
            if c0.abs() <= 1e-14 * scale {
                vec![0.0]
            } else {
                vec![]
            }
        } else {
            vec![-c0 / c1]
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < -1e-14 * scale * scale {
            vec![]
        } else {
            let s = disc.max(0.0).sqrt();
            vec![(-c1 - s) / (2.0 * c2), (-c1 + s) / (2.0 * c2)]
        }
    };
    let a1 = roots
        .into_iter()
        .map(|r| if r.abs() < 1e-12 { 0.0 } else { r })
        .filter(|r| *r >= 0.0)
        .fold(f64::INFINITY, f64::min);
    let a1 = if a1.is_finite() { a1 } else { 0.0 };
    let alpha_tilde = [a0, Complex::new(a1, 0.0)];
    let embedding = PointEmbedding::linear(alpha, alpha_tilde, sigma)?;
    let report = balance_residual_points(
        std::slice::from_ref(&embedding),
        PointWeight::None,
        Execution::Sequential,
    )?;
    Ok(PointSolution {
        sigma: sigma.to_vec(),
        alpha,
        alpha_tilde,
        det_sigma_sq: d,
        predicted_eta: d,
        verified: report.even_residual <= POINT_BALANCE_TOLERANCE,
        report,
        embedding,
    })
}

/// Positive multipliers of the degree-`m` monomial sections of P^{1|2}, in
/// the order of [`veronese_sections`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionScaling {
    pub m: usize,
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
}

impl SectionScaling {
    pub fn new(m: usize, even: Vec<f64>, odd: Vec<f64>) -> Result<Self> {
        let (e, o) = veronese_sections(m)?;
        if even.len() != e.len() || odd.len() != o.len() {
            return Err(Error::DimensionMismatch(format!(
                "degree {m} needs {} even and {} odd multipliers",
                e.len(),
                o.len()
            )));
        }
        if even.iter().chain(&odd).any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::InvalidInput("section multipliers must be positive".into()));
        }
        Ok(SectionScaling { m, even, odd })
    }

    pub fn unit(m: usize) -> Result<Self> {
        let (e, o) = veronese_sections(m)?;
        SectionScaling::new(m, vec![1.0; e.len()], vec![1.0; o.len()])
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        SectionScaling::new(
            self.m,
            self.even.iter().map(|c| c * k).collect(),
            self.odd.iter().map(|c| c * k).collect(),
        )
    }
}

/// Which entries of the section B-matrix to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Entries {
    All,
    Diagonal,
}

fn cy_entries(
    s: &SectionScaling,
    which: Entries,
    spec: &QuadratureSpec,
    density: ChartDensity,
    exec: Execution,
) -> Result<Vec<Complex>> {
    let ctx = AlgebraContext::with_tolerance(2, 0.0)?;
    let n = s.even.len() + s.odd.len();
    let len = match which {
        Entries::All => n * n,
        Entries::Diagonal => n,
    };
    let theta = [ctx.generator(0)?, ctx.generator(1)?];
    let r = cy_integrate_p12_many(
        |z| {
            let pt = ProjectivePoint::new(
                vec![ctx.one(), ctx.scalar(z)],
                theta.to_vec(),
            )?;
            let b = veronese_map_scaled(s.m, &pt, &s.even, &s.odd)?.fs_b_matrix()?;
            Ok(match which {
                Entries::All => b.rows().iter().flatten().cloned().collect(),
                Entries::Diagonal => (0..n).map(|i| b.get(i, i).clone()).collect(),
            })
        },
        len,
        density,
        spec,
        exec,
    )?;
    Ok(r.value)
}

/// Integrated B-matrix of the scaled degree-`m` section embedding of P^{1|2},
/// split into even, odd and mixed blocks.
pub fn mv_blocks_cy(
    s: &SectionScaling,
    spec: &QuadratureSpec,
    density: ChartDensity,
    exec: Execution,
) -> Result<BalanceReport> {
    let ne = s.even.len();
    let n = ne + s.odd.len();
    let v = cy_entries(s, Entries::All, spec, density, exec)?;
    let at = |i: usize, j: usize| v[i * n + j];
    let even = (0..ne).map(|i| (0..ne).map(|j| at(i, j)).collect()).collect();
    let odd = (ne..n).map(|i| (ne..n).map(|j| at(i, j)).collect()).collect();
    let mut mixed: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if (i < ne) != (j < ne) {
                mixed = mixed.max(at(i, j).norm());
            }
        }
    }
    Ok(BalanceReport::from_blocks(even, odd, mixed))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyIterate {
    pub iteration: usize,
    pub residual: f64,
    pub lambda: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyBalanceOutcome {
    pub scaling: SectionScaling,
    pub report: BalanceReport,
    pub converged: bool,
    pub iterations: usize,
    pub tolerance: f64,
    pub history: Vec<CyIterate>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CySolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub density: ChartDensity,
}

impl Default for CySolverOptions {
    fn default() -> Self {
        CySolverOptions {
            tol: 1e-6,
            max_iterations: 500,
            density: ChartDensity::Flat,
        }
    }
}

fn diag_residual(d: &[Complex], ne: usize) -> (f64, f64, f64) {
    let block = |xs: &[Complex]| {
        let mean = xs.iter().map(|x| x.re).sum::<f64>() / xs.len().max(1) as f64;
        let res = xs
            .iter()
            .map(|x| (x - mean).norm())
            .fold(0.0, f64::max);
        (mean, res)
    };
    let (lambda, re) = block(&d[..ne]);
    let (eta, ro) = block(&d[ne..]);
    (lambda, eta, re.max(ro))
}

/// Fixed-point rescaling `c_l ← c_l / sqrt(|B_ll| / |block mean|)` until the
/// diagonal of each block is constant within `tol`.
///
/// Off-diagonal entries vanish identically by the angular selection rule and
/// charge conservation, so the iteration runs on the diagonal only; the final
/// report integrates the full matrix.
pub fn solve_cy_balance(
    initial: &SectionScaling,
    spec: &QuadratureSpec,
    opts: &CySolverOptions,
    exec: Execution,
) -> Result<CyBalanceOutcome> {
    let ne = initial.even.len();
    let mut s = initial.clone();
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    loop {
        let d = cy_entries(&s, Entries::Diagonal, spec, opts.density, exec)?;
        let (lambda, eta, residual) = diag_residual(&d, ne);
        history.push(CyIterate {
            iteration: iterations,
            residual,
            lambda,
            eta,
        });
        if residual <= opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations || !residual.is_finite() {
            break;
        }
        let update = |c: &f64, x: &Complex, mean: f64| c / (x.norm() / mean.abs()).sqrt();
        let even: Vec<f64> = s.even.iter().zip(&d[..ne]).map(|(c, x)| update(c, x, lambda)).collect();
        let odd: Vec<f64> = s.odd.iter().zip(&d[ne..]).map(|(c, x)| update(c, x, eta)).collect();
        // a common factor does not change B; pin the first multiplier to 1
        let k = even[0];
        s = SectionScaling::new(
            s.m,
            even.iter().map(|c| c / k).collect(),
            odd.iter().map(|c| c / k).collect(),
        )?;
        iterations += 1;
    }
    let report = mv_blocks_cy(&s, spec, opts.density, exec)?;
    Ok(CyBalanceOutcome {
        scaling: s,
        report,
        converged,
        iterations,
        tolerance: opts.tol,
        history,
    })
}

/// Wire form `{"n", "X", "Theta"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointEmbeddingJson {
    pub n: usize,
    #[serde(rename = "X")]
    pub x: [Multivector; 2],
    #[serde(rename = "Theta")]
    pub theta: Vec<Multivector>,
}

impl TryFrom<PointEmbeddingJson> for PointEmbedding {
    type Error = Error;
    fn try_from(j: PointEmbeddingJson) -> Result<Self> {
        if j.theta.len() != j.n || j.x[0].context().n_pairs() != j.n {
            return Err(Error::DimensionMismatch(format!(
                "n = {} does not match the data",
                j.n
            )));
        }
        let [x0, x1] = j.x;
        PointEmbedding::new(x0, x1, j.theta)
    }
}

impl Serialize for PointEmbedding {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointEmbeddingJson {
            n: self.n(),
            x: self.x.clone(),
            theta: self.theta.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointEmbedding {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PointEmbedding::try_from(PointEmbeddingJson::deserialize(d)?)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn ident() -> Matrix {
        vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]
    }

    fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn bosonic_embedding_has_zero_moment_matrix() {
        let e = PointEmbedding::linear([c(0.6, 0.2), c(-0.3, 0.9)], [c(0.0, 0.0); 2], &zeros(2)).unwrap();
        let m = moment_matrix_point(&e, PointWeight::None).unwrap();
        assert_eq!(max_diff(&m, &zeros(2)), 0.0);
        assert_eq!(su_block_point(&e, 0, 1).unwrap(), c(0.0, 0.0));
    }

    /// At `P = [1:0]`: `M = s·diag(2|det σ|² − |α̃₁|², |α̃₁|²)` with `s = −1` the
    /// sign of the top monomial, independent of `α̃₀`.
    #[test]
    fn exact_moment_matrix_at_base_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let at = [random_complex(&mut rng), random_complex(&mut rng)];
            let sigma: Matrix = (0..2).map(|_| (0..2).map(|_| random_complex(&mut rng)).collect()).collect();
            let d = det_sigma_sq(&sigma).unwrap();
            let e = PointEmbedding::linear([c(1.0, 0.0), c(0.0, 0.0)], at, &sigma).unwrap();
            let m = moment_matrix_point(&e, PointWeight::None).unwrap();
            let a1 = at[1].norm_sqr();
            let want = vec![
                vec![c(a1 - 2.0 * d, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(-a1, 0.0)],
            ];
            assert!(max_diff(&m, &want) < 1e-12);
        }
    }

    #[test]
    fn su_block_matches_det_over_norm_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let alpha = [random_complex(&mut rng), random_complex(&mut rng)];
            let at = [random_complex(&mut rng), random_complex(&mut rng)];
            let sigma: Matrix = (0..2).map(|_| (0..2).map(|_| random_complex(&mut rng)).collect()).collect();
            let e = PointEmbedding::linear(alpha, at, &sigma).unwrap();
            let a = alpha[0].norm_sqr() + alpha[1].norm_sqr();
            let lam = det_sigma_sq(&sigma).unwrap() / (a * a);
            let s = su_block_matrix(&e, PointWeight::None).unwrap();
            let want = vec![vec![c(lam, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(lam, 0.0)]];
            assert!(max_diff(&s, &want) < 1e-12);
        }
    }

    #[test]
    fn det_sigma_readings_coincide() {
        let sigma = vec![vec![c(1.0, 2.0), c(0.5, -1.0)], vec![c(0.0, 1.0), c(2.0, 0.0)]];
        let d = det_sigma_sq(&sigma).unwrap();
        let mut sst = zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                sst[i][j] = sigma[i].iter().zip(&sigma[j]).map(|(a, b)| a * b.conj()).sum();
            }
        }
        let det = sst[0][0] * sst[1][1] - sst[0][1] * sst[1][0];
        assert!((det - d).norm() < 1e-12);
    }

    #[test]
    fn theta_phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma: Matrix = (0..2).map(|_| (0..2).map(|_| random_complex(&mut rng)).collect()).collect();
        let e = PointEmbedding::linear(
            [random_complex(&mut rng), random_complex(&mut rng)],
            [random_complex(&mut rng), random_complex(&mut rng)],
            &sigma,
        )
        .unwrap();
        for w in [PointWeight::None, PointWeight::Exp] {
            let a = moment_matrix_point(&e, w).unwrap();
            let b = moment_matrix_point(&e.with_theta_phase(0.77), w).unwrap();
            assert!(max_diff(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn solver_examples() {
        let sol = solve_point_balance(&ident()).unwrap();
        assert!(sol.verified);
        assert!((sol.alpha_tilde[0] - 1.0).norm() < 1e-12);
        assert!((sol.report.lambda + sol.alpha_tilde[1].re.powi(2)).abs() < 1e-12);
        assert!((sol.report.eta - 1.0).abs() < 1e-12);
        assert_eq!(sol.report.lambda_plus_eta.map(|x| x.abs() < 1e-12), Some(true));

        let sol = solve_point_balance(&zeros(2)).unwrap();
        assert!(sol.verified);
        assert_eq!(sol.alpha_tilde, [c(0.0, 0.0); 2]);
        assert_eq!(sol.report.lambda, 0.0);

        let d = vec![vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
        let sol = solve_point_balance(&d).unwrap();
        assert!(sol.verified);
        assert!((sol.alpha_tilde[0] - 2.0).norm() < 1e-12);
        assert!((sol.report.lambda + 4.0).abs() < 1e-10);
    }

    #[test]
    fn point_sum_examples() {
        assert!(matches!(
            balance_residual_points(&[], PointWeight::None, Execution::Sequential),
            Err(Error::InvalidInput(_))
        ));
        let sol = solve_point_balance(&ident()).unwrap();
        let one = balance_residual_points(std::slice::from_ref(&sol.embedding), PointWeight::None, Execution::Sequential).unwrap();
        let two = balance_residual_points(
            &[sol.embedding.clone(), sol.embedding.clone()],
            PointWeight::None,
            Execution::Parallel,
        )
        .unwrap();
        assert!((two.lambda - 2.0 * one.lambda).abs() < 1e-12);
        assert!(two.residual <= 1e-10 && one.residual <= 1e-10);
        assert_eq!(one.mixed_max, 0.0);
    }

    /// `exp(iΣΘΘ̄)` with unitary σ, `α̃ = 0` and `Σ|α|² = 1` gives `s·B[α]`.
    #[test]
    fn exp_weight_reproduces_classical_matrix() {
        let alpha = [c(0.6, 0.0), c(0.0, 0.8)];
        let e = PointEmbedding::linear(alpha, [c(0.0, 0.0); 2], &ident()).unwrap();
        let m = moment_matrix_point(&e, PointWeight::Exp).unwrap();
        let b = classical_b_matrix(alpha);
        let neg: Matrix = b.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        assert!(max_diff(&m, &neg) < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let e = PointEmbedding::linear([c(1.0, 0.0), c(0.5, 0.5)], [c(0.2, 0.0), c(0.0, 0.3)], &ident()).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"Theta\""));
        let back: PointEmbedding = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn cy_blocks_at_unit_scaling() {
        let s = SectionScaling::unit(2).unwrap();
        let spec = QuadratureSpec::default();
        let r = mv_blocks_cy(&s, &spec, ChartDensity::Flat, Execution::default()).unwrap();
        assert_eq!(r.even_block.len(), 4);
        assert_eq!(r.odd_block.len(), 4);
        assert!(r.mixed_max <= 1e-8);
        assert!(r.even_hermiticity <= 1e-8 && r.odd_hermiticity <= 1e-8);
        let b1212 = r.even_block[3][3];
        let want = 8.0 * PI * PI / (3.0 * 3f64.sqrt());
        assert!((b1212 - want).norm() < 1e-6, "{b1212} vs {want}");
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(r.even_block[i][j].norm() <= 1e-8);
                    assert!(r.odd_block[i][j].norm() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn literal_abs_z_squared_density_diverges() {
        let s = SectionScaling::unit(2).unwrap();
        let r = mv_blocks_cy(&s, &QuadratureSpec::default(), ChartDensity::AbsZSquared, Execution::default());
        assert!(matches!(r, Err(Error::NonConvergent { .. })));
    }

    #[test]
    fn common_scaling_leaves_residual_unchanged() {
        let s = SectionScaling::new(2, vec![1.0, 0.7, 1.3, 0.9], vec![1.1, 1.0, 0.8, 1.2]).unwrap();
        let spec = QuadratureSpec::default();
        let a = mv_blocks_cy(&s, &spec, ChartDensity::Flat, Execution::default()).unwrap();
        let b = mv_blocks_cy(&s.scaled(3.5).unwrap(), &spec, ChartDensity::Flat, Execution::default()).unwrap();
        assert!((a.residual - b.residual).abs() < 1e-9);
    }
}
