//! (p|q)-graded matrices over a Grassmann algebra.
//!
//! Rows and columns `0..p` are even, `p..p+q` odd. In a homogeneous matrix the
//! diagonal blocks hold even elements and the off-diagonal blocks odd ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::even_linalg::{self, EvenMatrix};
use crate::grassmann::{AlgebraContext, Complex, EvenElement, Multivector, OddElement, Parity};
use crate::projective::ProjectivePoint;

#[derive(Clone, Debug, PartialEq)]
pub struct SuperMatrix {
    ctx: AlgebraContext,
    p: usize,
    q: usize,
    entries: Vec<Vec<Multivector>>,
}

impl SuperMatrix {
    pub fn new(
        ctx: AlgebraContext,
        p: usize,
        q: usize,
        entries: Vec<Vec<Multivector>>,
    ) -> Result<SuperMatrix> {
        let n = p + q;
        if entries.len() != n || entries.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "a ({p}|{q}) supermatrix needs {n}×{n} entries"
            )));
        }
        if entries.iter().flatten().any(|x| *x.context() != ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(SuperMatrix { ctx, p, q, entries })
    }

    pub fn identity(ctx: AlgebraContext, p: usize, q: usize) -> SuperMatrix {
        Self::diagonal(ctx, p, q, &vec![Complex::new(1.0, 0.0); p + q])
    }

    pub fn diagonal(ctx: AlgebraContext, p: usize, q: usize, diag: &[Complex]) -> SuperMatrix {
        let n = p + q;
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { ctx.scalar(diag[i]) } else { ctx.zero() })
                    .collect()
            })
            .collect();
        SuperMatrix { ctx, p, q, entries }
    }

    pub fn context(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn get(&self, i: usize, j: usize) -> &Multivector {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<Multivector>] {
        &self.entries
    }

    fn is_even_index(&self, i: usize) -> bool {
        i < self.p
    }

    /// Parity a homogeneous matrix must have at `(i, j)`.
    pub fn block_parity(&self, i: usize, j: usize) -> Parity {
        if self.is_even_index(i) == self.is_even_index(j) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, x)| {
                x.is_zero() || x.parity() == Some(self.block_parity(i, j))
            })
        })
    }

    pub fn matmul(&self, other: &SuperMatrix) -> Result<SuperMatrix> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if (self.p, self.q) != (other.p, other.q) {
            return Err(Error::DimensionMismatch(format!(
                "({}|{}) times ({}|{})",
                self.p, self.q, other.p, other.q
            )));
        }
        let entries = even_linalg::mul(&self.ctx, &self.entries, &other.entries);
        Ok(SuperMatrix { entries, ..self.clone() })
    }

    pub fn checked_sub(&self, other: &SuperMatrix) -> Result<SuperMatrix> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if (self.p, self.q) != (other.p, other.q) {
            return Err(Error::DimensionMismatch("subtraction of unequal shapes".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(SuperMatrix { entries, ..self.clone() })
    }

    /// Largest coefficient magnitude over all entries.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(Multivector::max_abs)
            .fold(0.0, f64::max)
    }

    /// Hermitian transpose `(g†)_{ij} = conj(g_{ji})`, with an extra factor
    /// `−i` on the two mixed blocks: `(a, α; β, b)† = (ā, −iβ̄; −iᾱ, b̄)`.
    /// For more than one row per block the same rule is applied entrywise.
    pub fn dagger(&self) -> SuperMatrix {
        let n = self.dim();
        let minus_i = Complex::new(0.0, -1.0);
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = self.entries[j][i].conjugate();
                        if self.block_parity(i, j) == Parity::Odd {
                            c.scale(minus_i)
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        SuperMatrix { entries, ..self.clone() }
    }

    fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> EvenMatrix {
        rows.map(|i| cols.clone().map(|j| self.entries[i][j].clone()).collect())
            .collect()
    }

    /// `Ber(g) = det(A − B D⁻¹ C) · det(D)⁻¹` for `g = (A, B; C, D)`.
    ///
    /// For (1|1) this is `z₁/z₂ − θ₁θ₂/z₂²`, the unique multiplicative choice.
    pub fn berezinian(&self) -> Result<EvenElement> {
        if !self.is_homogeneous() {
            return Err(Error::InvalidInput(
                "the Berezinian needs a homogeneous supermatrix".into(),
            ));
        }
        let (p, n) = (self.p, self.dim());
        let ctx = &self.ctx;
        let a = self.block(0..p, 0..p);
        let b = self.block(0..p, p..n);
        let c = self.block(p..n, 0..p);
        let d = self.block(p..n, p..n);
        let d_inv = even_linalg::inverse(ctx, &d)
            .map_err(|_| Error::NonInvertible("odd-odd block D"))?;
        let bdc = even_linalg::mul(ctx, &even_linalg::mul(ctx, &b, &d_inv), &c);
        let schur: EvenMatrix = a
            .iter()
            .zip(&bdc)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
            .collect();
        let num = even_linalg::det(ctx, &schur)?;
        let den = even_linalg::det(ctx, &d)?
            .invert()
            .map_err(|_| Error::NonInvertible("odd-odd block D"))?;
        EvenElement::new(&num * &den)
    }

    /// Linear action on homogeneous coordinates `(z, θ)`.
    pub fn act(&self, pt: &ProjectivePoint) -> Result<ProjectivePoint> {
        if self.ctx != *pt.context() {
            return Err(Error::ContextMismatch);
        }
        if (self.p, self.q) != (pt.p() + 1, pt.q()) {
            return Err(Error::DimensionMismatch(format!(
                "a ({}|{}) matrix cannot act on a point of P^{{{}|{}}}",
                self.p,
                self.q,
                pt.p(),
                pt.q()
            )));
        }
        let v: Vec<&Multivector> = pt.even().iter().chain(pt.odd()).collect();
        let image: Vec<Multivector> = self
            .entries
            .iter()
            .map(|row| {
                let mut acc = self.ctx.zero();
                for (g, x) in row.iter().zip(&v) {
                    acc += &(g * *x);
                }
                acc
            })
            .collect();
        let (even, odd) = image.split_at(self.p);
        ProjectivePoint::new(even.to_vec(), odd.to_vec())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnitaryReport {
    pub residual: f64,
    pub tolerance: f64,
    pub unitary: bool,
}

/// Residual `max |g†g − 𝕀|` over all coefficients.
pub fn is_unitary(g: &SuperMatrix, tolerance: f64) -> Result<UnitaryReport> {
    let prod = g.dagger().matmul(g)?;
    let residual = prod
        .checked_sub(&SuperMatrix::identity(g.ctx, g.p, g.q))?
        .max_abs();
    Ok(UnitaryReport {
        residual,
        tolerance,
        unitary: residual <= tolerance,
    })
}

/// `U = (1 − (i/2)γγ̄, i e^{iψ} γ̄; γ, e^{iψ}(1 + (i/2)γγ̄))`.
///
/// The upper-right sign makes `U†U = 𝕀` hold for the dagger above; with
/// `−i e^{iψ} γ̄` both off-diagonal entries of `U†U` are `±2`-multiples of `γ`.
pub fn u11_element(psi: f64, gamma: &OddElement) -> SuperMatrix {
    let ctx = *gamma.context();
    let g: &Multivector = gamma;
    let gg = g * &g.conjugate();
    let half_i = Complex::new(0.0, 0.5);
    let phase = Complex::from_polar(1.0, psi);
    let entries = vec![
        vec![
            &ctx.one() - &gg.scale(half_i),
            g.conjugate().scale(Complex::new(0.0, 1.0) * phase),
        ],
        vec![
            g.clone(),
            (&ctx.one() + &gg.scale(half_i)).scale(phase),
        ],
    ];
    SuperMatrix { ctx, p: 1, q: 1, entries }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sl11Report {
    pub berezinian: Multivector,
    /// `max |Ber(g) − 1|`.
    pub berezinian_residual: f64,
    /// `z₁ − z₂ − θ₁θ₂ z₂⁻¹`, equal to `z₂ (Ber(g) − 1)`.
    pub constraint: Multivector,
    pub constraint_residual: f64,
    pub tolerance: f64,
    pub in_sl11: bool,
}

pub fn sl11_check(g: &SuperMatrix, tolerance: f64) -> Result<Sl11Report> {
    if (g.p, g.q) != (1, 1) {
        return Err(Error::DimensionMismatch("SL(1|1) needs a (1|1) matrix".into()));
    }
    let ber: Multivector = g.berezinian()?.into_inner();
    let berezinian_residual = (&ber - &g.ctx.one()).max_abs();
    let [z1, t1] = [&g.entries[0][0], &g.entries[0][1]];
    let [t2, z2] = [&g.entries[1][0], &g.entries[1][1]];
    let z2_inv = z2
        .invert()
        .map_err(|_| Error::NonInvertible("odd-odd block D"))?;
    let constraint = &(z1 - z2) - &(&(t1 * t2) * &z2_inv);
    let constraint_residual = constraint.max_abs();
    Ok(Sl11Report {
        berezinian: ber,
        berezinian_residual,
        constraint,
        constraint_residual,
        tolerance,
        in_sl11: berezinian_residual <= tolerance,
    })
}

/// Wire form `{"p", "q", "entries"}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperMatrixJson {
    pub p: usize,
    pub q: usize,
    pub entries: Vec<Vec<Multivector>>,
}

impl TryFrom<SuperMatrixJson> for SuperMatrix {
    type Error = Error;
    fn try_from(j: SuperMatrixJson) -> Result<SuperMatrix> {
        let ctx = *j
            .entries
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| Error::InvalidInput("empty supermatrix".into()))?
            .context();
        SuperMatrix::new(ctx, j.p, j.q, j.entries)
    }
}

impl From<&SuperMatrix> for SuperMatrixJson {
    fn from(g: &SuperMatrix) -> Self {
        SuperMatrixJson {
            p: g.p,
            q: g.q,
            entries: g.entries.clone(),
        }
    }
}

impl Serialize for SuperMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SuperMatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SuperMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        SuperMatrix::try_from(SuperMatrixJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_homogeneous, random_invertible_even};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn random_gl11(ctx: &AlgebraContext, rng: &mut ChaCha8Rng) -> SuperMatrix {
        let entries = vec![
            vec![
                random_invertible_even(ctx, rng),
                random_homogeneous(ctx, rng, Parity::Odd, 0.8),
            ],
            vec![
                random_homogeneous(ctx, rng, Parity::Odd, 0.8),
                random_invertible_even(ctx, rng),
            ],
        ];
        SuperMatrix::new(*ctx, 1, 1, entries).unwrap()
    }

    /// Eight odd generators: z₁..z₄ are bodies, θ₁..θ₄ are generators.
    #[test]
    fn product_top_left_entry_is_z1z3_plus_theta1theta4() {
        let ctx = AlgebraContext::new(4).unwrap();
        let th = |k| ctx.eta(k).unwrap();
        let (z1, z2, z3, z4) = (c(2.0, 0.0), c(3.0, 0.0), c(5.0, 0.0), c(7.0, 0.0));
        let g1 = SuperMatrix::new(
            ctx,
            1,
            1,
            vec![vec![ctx.scalar(z1), th(0)], vec![th(1), ctx.scalar(z2)]],
        )
        .unwrap();
        let g2 = SuperMatrix::new(
            ctx,
            1,
            1,
            vec![vec![ctx.scalar(z3), th(2)], vec![th(3), ctx.scalar(z4)]],
        )
        .unwrap();
        let g3 = g1.matmul(&g2).unwrap();
        let want = &ctx.scalar(z1 * z3) + &(&th(0) * &th(3));
        assert_eq!(g3.get(0, 0), &want);
        assert!(g3.is_homogeneous());
    }

    #[test]
    fn identity_is_neutral_and_matmul_associates() {
        let ctx = AlgebraContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, b, g) = (
            random_gl11(&ctx, &mut rng),
            random_gl11(&ctx, &mut rng),
            random_gl11(&ctx, &mut rng),
        );
        let id = SuperMatrix::identity(ctx, 1, 1);
        assert_eq!(id.matmul(&g).unwrap(), g);
        let lhs = a.matmul(&b).unwrap().matmul(&g).unwrap();
        let rhs = a.matmul(&b.matmul(&g).unwrap()).unwrap();
        assert!(lhs.checked_sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn berezinian_of_diagonal_and_identity() {
        let ctx = AlgebraContext::new(2).unwrap();
        let g = SuperMatrix::diagonal(ctx, 1, 1, &[c(3.0, 1.0), c(2.0, 0.0)]);
        assert_eq!(g.berezinian().unwrap().body(), c(1.5, 0.5));
        let id = SuperMatrix::identity(ctx, 2, 2);
        assert_eq!(*id.berezinian().unwrap(), ctx.one());
    }

    #[test]
    fn berezinian_is_multiplicative() {
        let ctx = AlgebraContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let a = random_gl11(&ctx, &mut rng);
            let b = random_gl11(&ctx, &mut rng);
            let lhs = a.matmul(&b).unwrap().berezinian().unwrap();
            let rhs = &*a.berezinian().unwrap() * &*b.berezinian().unwrap();
            assert!(lhs.distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn berezinian_multiplicative_in_2_2() {
        let ctx = AlgebraContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let random = |rng: &mut ChaCha8Rng| {
            let entries = (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| {
                            if (i < 2) == (j < 2) {
                                let mut x = random_homogeneous(&ctx, rng, Parity::Even, 0.6);
                                if i == j {
                                    x = &x + &ctx.scalar(c(2.0, 0.0));
                                }
                                x
                            } else {
                                random_homogeneous(&ctx, rng, Parity::Odd, 0.6)
                            }
                        })
                        .collect()
                })
                .collect();
            SuperMatrix::new(ctx, 2, 2, entries).unwrap()
        };
        let (a, b) = (random(&mut rng), random(&mut rng));
        let lhs = a.matmul(&b).unwrap().berezinian().unwrap();
        let rhs = &*a.berezinian().unwrap() * &*b.berezinian().unwrap();
        assert!(lhs.distance(&rhs) < 1e-10);
    }

    #[test]
    fn nilpotent_d_block_is_rejected() {
        let ctx = AlgebraContext::new(2).unwrap();
        let e12 = &ctx.eta(0).unwrap() * &ctx.eta(1).unwrap();
        let g = SuperMatrix::new(
            ctx,
            1,
            1,
            vec![vec![ctx.one(), ctx.zero()], vec![ctx.zero(), e12]],
        )
        .unwrap();
        assert_eq!(g.berezinian(), Err(Error::NonInvertible("odd-odd block D")));
    }

    #[test]
    fn dagger_of_generic_11_matrix() {
        let ctx = AlgebraContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_gl11(&ctx, &mut rng);
        let d = g.dagger();
        let mi = c(0.0, -1.0);
        assert_eq!(d.get(0, 0), &g.get(0, 0).conjugate());
        assert_eq!(d.get(1, 1), &g.get(1, 1).conjugate());
        assert_eq!(d.get(0, 1), &g.get(1, 0).conjugate().scale(mi));
        assert_eq!(d.get(1, 0), &g.get(0, 1).conjugate().scale(mi));
        assert!(d.is_homogeneous());
        let id = SuperMatrix::identity(ctx, 1, 1);
        assert_eq!(id.dagger(), id);
    }

    #[test]
    fn dagger_reverses_products() {
        let ctx = AlgebraContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = random_gl11(&ctx, &mut rng);
            let b = random_gl11(&ctx, &mut rng);
            let lhs = a.matmul(&b).unwrap().dagger();
            let rhs = b.dagger().matmul(&a.dagger()).unwrap();
            assert!(lhs.checked_sub(&rhs).unwrap().max_abs() < 1e-12);
        }
    }

    /// With the homomorphic conjugation, `conj(−i conj(x)) = i x` for odd x and
    /// `conj(conj(x)) = x`, so applying the dagger twice returns the matrix.
    #[test]
    fn dagger_twice_is_recorded() {
        let ctx = AlgebraContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_gl11(&ctx, &mut rng);
        let twice = g.dagger().dagger();
        assert!(twice.checked_sub(&g).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn unitarity_examples() {
        let ctx = AlgebraContext::new(2).unwrap();
        let id = SuperMatrix::identity(ctx, 1, 1);
        assert_eq!(is_unitary(&id, 1e-13).unwrap().residual, 0.0);
        let d = SuperMatrix::diagonal(ctx, 1, 1, &[c(2.0, 0.0), c(1.0, 0.0)]);
        assert!(!is_unitary(&d, 1e-13).unwrap().unitary);
    }

    #[test]
    fn u11_element_is_unitary() {
        let ctx = AlgebraContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let gamma = OddElement::new(ctx.eta(0).unwrap()).unwrap();
        assert!(is_unitary(&u11_element(0.0, &gamma), 1e-13).unwrap().unitary);
        for _ in 0..20 {
            let psi = rng.gen_range(0.0..std::f64::consts::TAU);
            let gamma =
                OddElement::new(random_homogeneous(&ctx, &mut rng, Parity::Odd, 0.8)).unwrap();
            let u = u11_element(psi, &gamma);
            let rep = is_unitary(&u, 1e-13).unwrap();
            assert!(rep.unitary, "residual {}", rep.residual);
            let ber = u.berezinian().unwrap();
            assert!((ber.body().norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn u11_zero_gamma_is_diagonal_phase() {
        let ctx = AlgebraContext::new(2).unwrap();
        let u = u11_element(0.3, &OddElement::new(ctx.zero()).unwrap());
        let want = SuperMatrix::diagonal(ctx, 1, 1, &[c(1.0, 0.0), Complex::from_polar(1.0, 0.3)]);
        assert!(u.checked_sub(&want).unwrap().max_abs() < 1e-16);
    }

    /// The literal sign `−i e^{iψ} γ̄` leaves nonzero odd entries in `U†U`.
    #[test]
    fn printed_u11_sign_fails_unitarity() {
        let ctx = AlgebraContext::new(2).unwrap();
        let g = ctx.eta(0).unwrap();
        let gg = &g * &g.conjugate();
        let half_i = c(0.0, 0.5);
        let u = SuperMatrix::new(
            ctx,
            1,
            1,
            vec![
                vec![&ctx.one() - &gg.scale(half_i), g.conjugate().scale(c(0.0, -1.0))],
                vec![g.clone(), &ctx.one() + &gg.scale(half_i)],
            ],
        )
        .unwrap();
        let rep = is_unitary(&u, 1e-13).unwrap();
        assert!((rep.residual - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sl11_examples() {
        let ctx = AlgebraContext::new(2).unwrap();
        let id = SuperMatrix::identity(ctx, 1, 1);
        assert!(sl11_check(&id, 1e-12).unwrap().in_sl11);
        let d = SuperMatrix::diagonal(ctx, 1, 1, &[c(2.0, 0.0), c(1.0, 0.0)]);
        let rep = sl11_check(&d, 1e-12).unwrap();
        assert!(!rep.in_sl11);
        assert_eq!(rep.berezinian.body(), c(2.0, 0.0));

        // z₁ = z₂ + θ₁θ₂/z₂ is the Ber = 1 locus
        let (t1, t2) = (ctx.eta(0).unwrap(), ctx.eta(1).unwrap());
        let z2 = ctx.scalar(c(1.5, -0.5));
        let z1 = &z2 + &(&(&t1 * &t2) * &z2.invert().unwrap());
        let g = SuperMatrix::new(ctx, 1, 1, vec![vec![z1, t1], vec![t2, z2]]).unwrap();
        let rep = sl11_check(&g, 1e-12).unwrap();
        assert!(rep.in_sl11);
        assert!(rep.berezinian_residual < 1e-15 && rep.constraint_residual < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let ctx = AlgebraContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_gl11(&ctx, &mut rng);
        let s = serde_json::to_string(&g).unwrap();
        let back: SuperMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
