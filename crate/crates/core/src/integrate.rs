//! Berezin extraction composed with quadrature over the complex plane.
//!
//! Plane integrals use the Lebesgue area element `dA = dx dy`. The radius is
//! compactified by `u = r²/(1+r²)`, so `dA = dφ du / (2(1−u)²)`; Gauss–Legendre
//! nodes are placed in `u ∈ (0, 1)` and equispaced nodes in `φ`. The equispaced
//! rule sums `e^{ikφ}` to exactly zero for `0 < |k| < angular`, which is what
//! makes off-diagonal moment entries vanish to rounding.

use std::f64::consts::TAU;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grassmann::{AlgebraContext, Complex, Exp, Multivector};

/// Doublings of both node counts tried before giving up.
pub const MAX_REFINEMENTS: u32 = 3;

/// Generator list of the four odd derivatives on P^{1|2}: `[θ₁, θ₂, θ̄₁, θ̄₂]`
/// in a two-pair algebra.
pub const CY_THETA_ORDER: [usize; 4] = [0, 1, 2, 3];

/// `ε₁₂`; with it `ε_{ij}∂_i∂_j = 2∂₁∂₂` for both the θ and θ̄ blocks.
pub const EPSILON_12: f64 = 1.0;

/// `(ε∂_θ∂_θ)(ε∂_θ̄∂_θ̄) = 4 ∂_{θ₁}∂_{θ₂}∂_{θ̄₁}∂_{θ̄₂}`.
pub const CY_CONTRACTION: f64 = 4.0 * EPSILON_12 * EPSILON_12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub radial: usize,
    pub angular: usize,
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial: 64,
            angular: 64,
            tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial < 4 || self.angular < 4 {
            return Err(Error::InvalidSpec(format!(
                "node counts must be at least 4, got {} radial and {} angular",
                self.radial, self.angular
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureResult<T> {
    pub value: T,
    /// Max-abs change of the last refinement.
    pub change: f64,
    pub radial: usize,
    pub angular: usize,
    pub refinements: u32,
}

struct PlaneRule {
    /// `(r, weight)` with the full `dA` Jacobian and the angular weight folded in.
    radial: Vec<(f64, f64)>,
    phases: Vec<Complex>,
}

impl PlaneRule {
    fn new(radial: usize, angular: usize) -> PlaneRule {
        let gl = GaussLegendre::new(NonZeroUsize::new(radial).expect("validated"));
        let dphi = TAU / angular as f64;
        let radial = gl
            .nodes()
            .zip(gl.weights())
            .map(|(x, w)| {
                let u = 0.5 * (x + 1.0);
                let wu = 0.5 * w;
                let r = (u / (1.0 - u)).sqrt();
                (r, wu / (2.0 * (1.0 - u) * (1.0 - u)) * dphi)
            })
            .collect();
        let phases = (0..angular)
            .map(|j| Complex::from_polar(1.0, dphi * j as f64))
            .collect();
        PlaneRule { radial, phases }
    }

    fn apply<F>(&self, f: &F, len: usize, exec: Execution) -> Result<Vec<Complex>>
    where
        F: Fn(Complex) -> Result<Vec<Complex>> + Sync,
    {
        let rows = exec.map(self.radial.len(), |k| -> Result<Vec<Complex>> {
            let (r, w) = self.radial[k];
            let mut row = vec![Complex::new(0.0, 0.0); len];
            for ph in &self.phases {
                let z = ph * r;
                let vals = f(z)?;
                if vals.len() != len {
                    return Err(Error::DimensionMismatch(format!(
                        "integrand returned {} values, expected {len}",
                        vals.len()
                    )));
                }
                for (acc, v) in row.iter_mut().zip(&vals) {
                    if !v.is_finite() {
                        return Err(Error::NonFinite(format!("{z}")));
                    }
                    *acc += v;
                }
            }
            Ok(row.into_iter().map(|x| x * w).collect())
        });
        let mut total = vec![Complex::new(0.0, 0.0); len];
        for row in rows {
            for (acc, v) in total.iter_mut().zip(row?) {
                *acc += v;
            }
        }
        Ok(total)
    }
}

fn max_change(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Integrates a vector of `len` functions over ℂ at once, refining by node
/// doubling until two successive rules agree within `spec.tol`.
pub fn plane_quadrature_vec<F>(
    f: F,
    len: usize,
    spec: &QuadratureSpec,
    exec: Execution,
) -> Result<QuadratureResult<Vec<Complex>>>
where
    F: Fn(Complex) -> Result<Vec<Complex>> + Sync,
{
    spec.validate()?;
    let (mut nr, mut na) = (spec.radial, spec.angular);
    let mut prev = PlaneRule::new(nr, na).apply(&f, len, exec)?;
    let mut change = f64::INFINITY;
    for k in 1..=MAX_REFINEMENTS {
        nr *= 2;
        na *= 2;
        let next = PlaneRule::new(nr, na).apply(&f, len, exec)?;
        change = max_change(&prev, &next);
        if change <= spec.tol {
            return Ok(QuadratureResult {
                value: next,
                change,
                radial: nr,
                angular: na,
                refinements: k,
            });
        }
        prev = next;
    }
    Err(Error::NonConvergent {
        change,
        tol: spec.tol,
    })
}

pub fn plane_quadrature<F>(
    f: F,
    spec: &QuadratureSpec,
    exec: Execution,
) -> Result<QuadratureResult<Complex>>
where
    F: Fn(Complex) -> Complex + Sync,
{
    let r = plane_quadrature_vec(|z| Ok(vec![f(z)]), 1, spec, exec)?;
    Ok(QuadratureResult {
        value: r.value[0],
        change: r.change,
        radial: r.radial,
        angular: r.angular,
        refinements: r.refinements,
    })
}

/// Bosonic density multiplying the Berezin-extracted integrand on P^{1|2}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartDensity {
    /// `|z|² dA`, the factor written in front of the CY integration rule.
    #[default]
    AbsZSquared,
    /// `dA`: the reduction of `ε_{ab} Z^a dZ^b` to the affine chart `Z = (1, z)`,
    /// which gives `dz` with no extra factor.
    Flat,
}

impl ChartDensity {
    fn factor(self, z: Complex) -> f64 {
        match self {
            ChartDensity::AbsZSquared => z.norm_sqr(),
            ChartDensity::Flat => 1.0,
        }
    }
}

/// `4 ∂_{θ₁}∂_{θ₂}∂_{θ̄₁}∂_{θ̄₂} F |_{θ=θ̄=0}`.
pub fn cy_extract(f: &Multivector) -> Result<Complex> {
    if f.context().n_pairs() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "P^{{1|2}} integrands live in a two-pair algebra, got {} pairs",
            f.context().n_pairs()
        )));
    }
    Ok(f.berezin_body(&CY_THETA_ORDER)? * CY_CONTRACTION)
}

/// `∫_ℂ |z|² dA · 4∂⁴F`.
pub fn cy_integrate_p12<F>(f: F, spec: &QuadratureSpec, exec: Execution) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Multivector> + Sync,
{
    cy_integrate_p12_with(f, ChartDensity::AbsZSquared, spec, exec)
}

pub fn cy_integrate_p12_with<F>(
    f: F,
    density: ChartDensity,
    spec: &QuadratureSpec,
    exec: Execution,
) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Multivector> + Sync,
{
    let r = cy_integrate_p12_many(|z| Ok(vec![f(z)?]), 1, density, spec, exec)?;
    Ok(r.value[0])
}

/// Several integrands sharing one evaluation per node.
pub fn cy_integrate_p12_many<F>(
    f: F,
    len: usize,
    density: ChartDensity,
    spec: &QuadratureSpec,
    exec: Execution,
) -> Result<QuadratureResult<Vec<Complex>>>
where
    F: Fn(Complex) -> Result<Vec<Multivector>> + Sync,
{
    plane_quadrature_vec(
        |z| {
            let w = density.factor(z);
            f(z)?
                .iter()
                .map(|m| Ok(cy_extract(m)? * w))
                .collect()
        },
        len,
        spec,
        exec,
    )
}

/// Optional measure factor of the point integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointWeight {
    #[default]
    None,
    /// `exp(i Σ_j Θ_j Θ̄_j)`.
    Exp,
}

/// `exp(i Σ_j Θ_j Θ̄_j)`.
pub fn exp_weight(ctx: &AlgebraContext, theta: &[Multivector]) -> Result<Multivector> {
    let mut s = ctx.zero();
    for t in theta {
        s += &t.checked_mul(&t.conjugate())?.scale(Complex::new(0.0, 1.0));
    }
    s.analytic_apply(&Exp)
}

/// `∫ Π_i dη_i dη̄_i F` over every generator pair, optionally weighted.
pub fn berezin_point_integrate(
    f: &Multivector,
    weight: PointWeight,
    theta: &[Multivector],
) -> Result<Complex> {
    let ctx = f.context();
    let order = ctx.point_measure_order();
    match weight {
        PointWeight::None => f.berezin_body(&order),
        PointWeight::Exp => f.checked_mul(&exp_weight(ctx, theta)?)?.berezin_body(&order),
    }
}
