//! Points of P^{p|q} with values in a Grassmann algebra.
//!
//! A point is a tuple `[z₀ : … : z_p | θ₁, …, θ_q]` of even and odd elements
//! with at least one `z_i` invertible, modulo invertible even rescaling. Charts
//! are computed views: dividing by `z_i` gives the affine coordinates
//! `Ξ_l = z_l/z_i`, `Θ_r = θ_r/z_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{AlgebraContext, Complex, Multivector, Parity};
use crate::supermatrix::SuperMatrix;

/// Tolerance of [`ProjectivePoint::projectively_equal`].
pub const PROJECTIVE_TOLERANCE: f64 = 1e-10;

const I: Complex = Complex::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint {
    ctx: AlgebraContext,
    even: Vec<Multivector>,
    odd: Vec<Multivector>,
}

fn check_parity(xs: &[Multivector], parity: Parity) -> Result<()> {
    if xs.iter().all(|x| x.is_zero() || x.parity() == Some(parity)) {
        Ok(())
    } else {
        Err(Error::ParityViolation { expected: parity })
    }
}

fn has_invertible(xs: &[Multivector]) -> bool {
    xs.iter()
        .any(|x| x.body().norm() > x.context().zero_tolerance().max(f64::MIN_POSITIVE))
}

impl ProjectivePoint {
    pub fn new(even: Vec<Multivector>, odd: Vec<Multivector>) -> Result<ProjectivePoint> {
        let ctx = *even
            .first()
            .ok_or_else(|| Error::InvalidInput("a point needs at least one even coordinate".into()))?
            .context();
        if even.iter().chain(&odd).any(|x| *x.context() != ctx) {
            return Err(Error::ContextMismatch);
        }
        check_parity(&even, Parity::Even)?;
        check_parity(&odd, Parity::Odd)?;
        if !has_invertible(&even) {
            return Err(Error::DegeneratePoint);
        }
        Ok(ProjectivePoint { ctx, even, odd })
    }

    /// Point whose coordinates are plain numbers (zero soul).
    pub fn from_bodies(ctx: AlgebraContext, even: &[Complex], odd_count: usize) -> Result<Self> {
        ProjectivePoint::new(
            even.iter().map(|c| ctx.scalar(*c)).collect(),
            vec![ctx.zero(); odd_count],
        )
    }

    pub fn context(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn p(&self) -> usize {
        self.even.len() - 1
    }

    pub fn q(&self) -> usize {
        self.odd.len()
    }

    pub fn even(&self) -> &[Multivector] {
        &self.even
    }

    pub fn odd(&self) -> &[Multivector] {
        &self.odd
    }

    /// All homogeneous coordinates, evens first.
    pub fn coords(&self) -> impl Iterator<Item = &Multivector> {
        self.even.iter().chain(&self.odd)
    }

    /// `λ·(z, θ)` for an invertible even `λ`.
    pub fn scale(&self, lambda: &Multivector) -> Result<ProjectivePoint> {
        if !lambda.is_zero() && !lambda.is_even() {
            return Err(Error::ParityViolation { expected: Parity::Even });
        }
        if lambda.body().norm() <= self.ctx.zero_tolerance().max(f64::MIN_POSITIVE) {
            return Err(Error::NonInvertible("rescaling factor"));
        }
        ProjectivePoint::new(
            self.even.iter().map(|z| lambda * z).collect(),
            self.odd.iter().map(|t| lambda * t).collect(),
        )
    }

    pub fn normalize(&self, chart: usize) -> Result<AffineChartPoint> {
        let pivot = self.even.get(chart).ok_or(Error::IndexOutOfRange {
            index: chart,
            size: self.even.len(),
        })?;
        let inv = pivot
            .invert()
            .map_err(|_| Error::ChartUndefined { chart })?;
        let mut xi: Vec<Multivector> = self.even.iter().map(|z| z * &inv).collect();
        xi[chart] = self.ctx.one();
        Ok(AffineChartPoint {
            chart,
            xi,
            theta: self.odd.iter().map(|t| t * &inv).collect(),
        })
    }

    /// Chart whose pivot has the largest body modulus.
    pub fn best_chart(&self) -> usize {
        (0..self.even.len())
            .max_by(|&a, &b| {
                self.even[a]
                    .body()
                    .norm()
                    .total_cmp(&self.even[b].body().norm())
            })
            .unwrap_or(0)
    }

    /// True iff `other = λ·self` for some invertible even `λ`.
    pub fn projectively_equal(&self, other: &ProjectivePoint) -> bool {
        if self.ctx != other.ctx || self.p() != other.p() || self.q() != other.q() {
            return false;
        }
        let chart = self.best_chart();
        let (Ok(a), Ok(b)) = (self.normalize(chart), other.normalize(chart)) else {
            return false;
        };
        a.xi.iter()
            .zip(&b.xi)
            .chain(a.theta.iter().zip(&b.theta))
            .all(|(x, y)| x.distance(y) <= PROJECTIVE_TOLERANCE)
    }

    /// `Σ z_i z̄_i + i Σ θ_A θ̄_A`, a real even element.
    pub fn super_norm(&self) -> Multivector {
        let mut acc = self.ctx.zero();
        for z in &self.even {
            acc += &(z * &z.conjugate());
        }
        for t in &self.odd {
            acc += &(t * &t.conjugate()).scale(I);
        }
        acc
    }

    /// `super_norm − r`; zero exactly on the quadric `‖(z, θ)‖² = r`.
    pub fn evaluate_constraint(&self, r: &Multivector) -> Result<Multivector> {
        self.super_norm().checked_sub(r)
    }

    /// `B = w w̃ / ‖(z, θ)‖²` with `w = (z, θ)` and `w̃ = (z̄, θ̄)`, the odd-odd
    /// block carrying an extra `i`: `B_{IK} = i θ_I θ̄_K / ‖·‖²`. Every block is
    /// conjugation-symmetric and the diagonal sums to 1.
    pub fn fs_b_matrix(&self) -> Result<SuperMatrix> {
        let inv = self.super_norm().invert()?;
        let w: Vec<&Multivector> = self.coords().collect();
        let bar: Vec<Multivector> = w.iter().map(|x| x.conjugate()).collect();
        let p1 = self.even.len();
        let entries = (0..w.len())
            .map(|i| {
                (0..w.len())
                    .map(|k| {
                        let num = w[i] * &bar[k];
                        let num = if i >= p1 && k >= p1 { num.scale(I) } else { num };
                        &num * &inv
                    })
                    .collect()
            })
            .collect();
        SuperMatrix::new(self.ctx, p1, self.odd.len(), entries)
    }
}

/// Affine coordinates in chart `i`: `Ξ_l = z_l/z_i` (with `Ξ_i = 1`) and
/// `Θ_r = θ_r/z_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineChartPoint {
    chart: usize,
    xi: Vec<Multivector>,
    theta: Vec<Multivector>,
}

impl AffineChartPoint {
    /// Builds a chart point from the affine evens `Ξ_l`, `l ≠ chart`.
    pub fn new(chart: usize, others: Vec<Multivector>, theta: Vec<Multivector>) -> Result<Self> {
        let ctx = *others
            .first()
            .or(theta.first())
            .ok_or_else(|| Error::InvalidInput("empty chart point".into()))?
            .context();
        if chart > others.len() {
            return Err(Error::IndexOutOfRange {
                index: chart,
                size: others.len() + 1,
            });
        }
        let mut xi = others;
        xi.insert(chart, ctx.one());
        let pt = ProjectivePoint::new(xi, theta)?;
        Ok(AffineChartPoint {
            chart,
            xi: pt.even,
            theta: pt.odd,
        })
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    /// All `Ξ_l` including `Ξ_chart = 1`.
    pub fn xi(&self) -> &[Multivector] {
        &self.xi
    }

    pub fn theta(&self) -> &[Multivector] {
        &self.theta
    }

    /// `Ξ^{(j)}_l = Ξ_l/Ξ_j`, `Θ^{(j)}_r = Θ_r/Ξ_j`.
    pub fn change_chart(&self, j: usize) -> Result<AffineChartPoint> {
        self.to_projective().normalize(j)
    }

    pub fn to_projective(&self) -> ProjectivePoint {
        let ctx = *self.xi[self.chart].context();
        ProjectivePoint {
            ctx,
            even: self.xi.clone(),
            odd: self.theta.clone(),
        }
    }

    /// `1 + Σ_{l≠i} |Ξ_l|² + i Σ Θ_r Θ̄_r`.
    pub fn fs_potential(&self) -> Multivector {
        self.to_projective().super_norm()
    }

    pub fn distance(&self, other: &AffineChartPoint) -> f64 {
        self.xi
            .iter()
            .zip(&other.xi)
            .chain(self.theta.iter().zip(&other.theta))
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

/// Potential of the degree-`m` section embedding of P^{1|2}: the super-norm of
/// the Veronese image. For `m = 2` its bosonic part is
/// `|z₀²|² + |z₀z₁|² + |z₁²|²`.
pub fn section_fs_potential(m: usize, pt: &AffineChartPoint) -> Result<Multivector> {
    Ok(veronese_map(m, &pt.to_projective())?.super_norm())
}

/// One monomial section `z₀^{a} z₁^{b} θ^{mask}` of `O(m)` on P^{1|2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Section {
    pub a: usize,
    pub b: usize,
    /// Bit 0 is θ₁, bit 1 is θ₂.
    pub theta_mask: u8,
}

impl Section {
    pub fn label(&self) -> String {
        let mut s = format!("z0^{} z1^{}", self.a, self.b);
        if self.theta_mask & 1 != 0 {
            s.push_str(" th1");
        }
        if self.theta_mask & 2 != 0 {
            s.push_str(" th2");
        }
        s
    }
}

/// Sections of `O(m)` on P^{1|2} in display order.
///
/// Even: `z₀^a z₁^{m−a}` for `a = m, …, 0`, then `z₀^a z₁^{m−2−a} θ₁θ₂` for
/// `a = m−2, …, 0`. Odd: `z₀^a z₁^{m−1−a} θ_I` for `a = m−1, …, 0`, `I = 1, 2`.
pub fn veronese_sections(m: usize) -> Result<(Vec<Section>, Vec<Section>)> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("section power must be ≥ 2, got {m}")));
    }
    let mut even: Vec<Section> = (0..=m)
        .rev()
        .map(|a| Section { a, b: m - a, theta_mask: 0 })
        .collect();
    even.extend((0..=m - 2).rev().map(|a| Section {
        a,
        b: m - 2 - a,
        theta_mask: 3,
    }));
    let odd = (0..m)
        .rev()
        .flat_map(|a| {
            [1u8, 2].map(|t| Section {
                a,
                b: m - 1 - a,
                theta_mask: t,
            })
        })
        .collect();
    Ok((even, odd))
}

fn evaluate_section(s: &Section, z0: &Multivector, z1: &Multivector, th: &[Multivector]) -> Multivector {
    let mut x = &z0.pow(s.a as u32) * &z1.pow(s.b as u32);
    if s.theta_mask & 1 != 0 {
        x = &x * &th[0];
    }
    if s.theta_mask & 2 != 0 {
        x = &x * &th[1];
    }
    x
}

/// Image of a P^{1|2} point in P^{2m−1|2m} under the monomial sections.
pub fn veronese_map(m: usize, pt: &ProjectivePoint) -> Result<ProjectivePoint> {
    let (e, o) = veronese_sections(m)?;
    veronese_map_scaled(m, pt, &vec![1.0; e.len()], &vec![1.0; o.len()])
}

/// Veronese image with section `l` multiplied by the given positive factor.
pub fn veronese_map_scaled(
    m: usize,
    pt: &ProjectivePoint,
    even_scale: &[f64],
    odd_scale: &[f64],
) -> Result<ProjectivePoint> {
    if (pt.p(), pt.q()) != (1, 2) {
        return Err(Error::DimensionMismatch(format!(
            "the section embedding needs a point of P^{{1|2}}, got P^{{{}|{}}}",
            pt.p(),
            pt.q()
        )));
    }
    let (e, o) = veronese_sections(m)?;
    if even_scale.len() != e.len() || odd_scale.len() != o.len() {
        return Err(Error::DimensionMismatch(format!(
            "degree {m} has {} even and {} odd sections",
            e.len(),
            o.len()
        )));
    }
    let (z0, z1, th) = (&pt.even[0], &pt.even[1], &pt.odd);
    let even = e
        .iter()
        .zip(even_scale)
        .map(|(s, c)| evaluate_section(s, z0, z1, th).scale(*c))
        .collect();
    let odd = o
        .iter()
        .zip(odd_scale)
        .map(|(s, c)| evaluate_section(s, z0, z1, th).scale(*c))
        .collect();
    ProjectivePoint::new(even, odd)
}

/// Wire form `{"p", "q", "even", "odd"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub p: usize,
    pub q: usize,
    pub even: Vec<Multivector>,
    pub odd: Vec<Multivector>,
}

impl TryFrom<PointJson> for ProjectivePoint {
    type Error = Error;
    fn try_from(j: PointJson) -> Result<ProjectivePoint> {
        if j.even.len() != j.p + 1 || j.odd.len() != j.q {
            return Err(Error::DimensionMismatch(format!(
                "P^{{{}|{}}} needs {} even and {} odd coordinates",
                j.p,
                j.q,
                j.p + 1,
                j.q
            )));
        }
        ProjectivePoint::new(j.even, j.odd)
    }
}

impl From<&ProjectivePoint> for PointJson {
    fn from(pt: &ProjectivePoint) -> Self {
        PointJson {
            p: pt.p(),
            q: pt.q(),
            even: pt.even.clone(),
            odd: pt.odd.clone(),
        }
    }
}

impl Serialize for ProjectivePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectivePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ProjectivePoint::try_from(PointJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
