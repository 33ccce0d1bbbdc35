//! Seeded random elements for property checks and the self-test.

use rand::Rng;

use crate::grassmann::{AlgebraContext, Complex, Multivector, Parity};

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Every monomial present with probability `density`, coefficients uniform in
/// the unit square.
pub fn random_multivector<R: Rng + ?Sized>(
    ctx: &AlgebraContext,
    rng: &mut R,
    density: f64,
) -> Multivector {
    let n = 1u64 << ctx.n_generators();
    let mut terms = Vec::new();
    for mask in 0..n {
        if rng.gen_bool(density) {
            terms.push((mask, random_complex(rng)));
        }
    }
    Multivector::from_terms(*ctx, terms).expect("masks are in range")
}

pub fn random_homogeneous<R: Rng + ?Sized>(
    ctx: &AlgebraContext,
    rng: &mut R,
    parity: Parity,
    density: f64,
) -> Multivector {
    let n = 1u64 << ctx.n_generators();
    let mut terms = Vec::new();
    for mask in (0..n).filter(|m| Parity::of_mask(*m) == parity) {
        if rng.gen_bool(density) {
            terms.push((mask, random_complex(rng)));
        }
    }
    Multivector::from_terms(*ctx, terms).expect("masks are in range")
}

/// Even element whose body has modulus in `[0.5, 1.5]`.
pub fn random_invertible_even<R: Rng + ?Sized>(ctx: &AlgebraContext, rng: &mut R) -> Multivector {
    let soul = random_homogeneous(ctx, rng, Parity::Even, 0.8).soul();
    let r = rng.gen_range(0.5..1.5);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    &ctx.scalar(Complex::from_polar(r, phase)) + &soul
}
