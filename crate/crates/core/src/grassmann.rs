//! Complex Grassmann algebra Γ_G on `G = 2N` odd generators with a conjugation
//! pairing.
//!
//! Generator `i < N` is `η_{i+1}`, generator `i + N` is its conjugate
//! `η̄_{i+1}`. A monomial is a bitmask; bit `b` set means generator `b` occurs,
//! always in ascending order. Products of monomials pick up the sign of the
//! permutation that merges the two masks, computed from crossing counts.
//!
//! Conventions fixed here and used everywhere else:
//!
//! * Conjugation is an antilinear algebra homomorphism with **no** factor
//!   reversal, `conj(ab) = conj(a) conj(b)`. With it `i η η̄` is real, so the
//!   super-norm `Σ|z|² + i Σ θθ̄` is a real even element.
//! * [`Multivector::berezin`] applies iterated left derivatives, the leftmost
//!   generator of the list last. A point integral `∫ Π dη_i dη̄_i` uses the list
//!   `[η₁, η̄₁, η₂, η̄₂, …]`; with it `∫ η₁η̄₁ = -1`. The global sign this fixes
//!   drops out of every "matrix = λ·identity" condition.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-13;

/// Z₂ grading of a homogeneous element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_mask(mask: u64) -> Parity {
        if mask.count_ones().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sum(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

/// Shape of the algebra: number of conjugate pairs and the pruning threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraContext {
    n_pairs: usize,
    zero_tolerance: f64,
}

impl AlgebraContext {
    pub fn new(n_pairs: usize) -> Result<Self> {
        Self::with_tolerance(n_pairs, DEFAULT_ZERO_TOLERANCE)
    }

    pub fn with_tolerance(n_pairs: usize, zero_tolerance: f64) -> Result<Self> {
        if 2 * n_pairs > 64 {
            return Err(Error::TooManyGenerators(2 * n_pairs));
        }
        if !(zero_tolerance.is_finite() && zero_tolerance >= 0.0) {
            return Err(Error::InvalidTolerance(zero_tolerance));
        }
        Ok(AlgebraContext {
            n_pairs,
            zero_tolerance,
        })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn n_generators(&self) -> usize {
        2 * self.n_pairs
    }

    pub fn zero_tolerance(&self) -> f64 {
        self.zero_tolerance
    }

    fn generator_mask(&self) -> u64 {
        if self.n_generators() == 64 {
            u64::MAX
        } else {
            (1u64 << self.n_generators()) - 1
        }
    }

    /// Index of the generator paired with `k` under conjugation.
    pub fn conjugate_index(&self, k: usize) -> usize {
        if k < self.n_pairs {
            k + self.n_pairs
        } else {
            k - self.n_pairs
        }
    }

    pub fn zero(&self) -> Multivector {
        Multivector {
            ctx: *self,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(&self, c: impl Into<Complex>) -> Multivector {
        Multivector::monomial(*self, 0, c.into())
    }

    pub fn one(&self) -> Multivector {
        self.scalar(1.0)
    }

    /// Generator number `k` (0-based over all `2N` generators).
    pub fn generator(&self, k: usize) -> Result<Multivector> {
        if k >= self.n_generators() {
            return Err(Error::IndexOutOfRange {
                index: k,
                size: self.n_generators(),
            });
        }
        Ok(Multivector::monomial(*self, 1u64 << k, Complex::new(1.0, 0.0)))
    }

    /// `η_{i+1}`.
    pub fn eta(&self, i: usize) -> Result<Multivector> {
        if i >= self.n_pairs {
            return Err(Error::IndexOutOfRange {
                index: i,
                size: self.n_pairs,
            });
        }
        self.generator(i)
    }

    /// `η̄_{i+1}`.
    pub fn eta_bar(&self, i: usize) -> Result<Multivector> {
        if i >= self.n_pairs {
            return Err(Error::IndexOutOfRange {
                index: i,
                size: self.n_pairs,
            });
        }
        self.generator(i + self.n_pairs)
    }

    /// `[η₁, η̄₁, η₂, η̄₂, …]`, the generator order of `∫ Π dη_i dη̄_i`.
    pub fn point_measure_order(&self) -> Vec<usize> {
        (0..self.n_pairs)
            .flat_map(|i| [i, i + self.n_pairs])
            .collect()
    }
}

/// Sign of the permutation sorting the concatenation of monomial `a` followed
/// by monomial `b`. Requires `a & b == 0`.
#[inline]
pub(crate) fn merge_sign(a: u64, b: u64) -> f64 {
    let mut crossings = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        crossings += a.checked_shr(j + 1).unwrap_or(0).count_ones();
        rest &= rest - 1;
    }
    if crossings.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sparse element `Σ_I c_I θ^I` of Γ_G with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    ctx: AlgebraContext,
    terms: BTreeMap<u64, Complex>,
}

impl Multivector {
    fn monomial(ctx: AlgebraContext, mask: u64, c: Complex) -> Multivector {
        let mut terms = BTreeMap::new();
        if c.norm() > ctx.zero_tolerance {
            terms.insert(mask, c);
        }
        Multivector { ctx, terms }
    }

    /// Builds an element from `(mask, coefficient)` pairs; repeated masks add.
    pub fn from_terms<I>(ctx: AlgebraContext, terms: I) -> Result<Multivector>
    where
        I: IntoIterator<Item = (u64, Complex)>,
    {
        let mut out = BTreeMap::new();
        for (mask, c) in terms {
            if mask & !ctx.generator_mask() != 0 {
                return Err(Error::MaskOutOfRange {
                    mask,
                    generators: ctx.n_generators(),
                });
            }
            *out.entry(mask).or_insert(Complex::new(0.0, 0.0)) += c;
        }
        Ok(Multivector { ctx, terms: out }.pruned())
    }

    fn pruned(mut self) -> Multivector {
        let tol = self.ctx.zero_tolerance;
        self.terms.retain(|_, c| c.norm() > tol);
        self
    }

    pub fn context(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, Complex)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, mask: u64) -> Complex {
        self.terms.get(&mask).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the empty monomial: the value map `s ↦ s~`.
    pub fn body(&self) -> Complex {
        self.coefficient(0)
    }

    /// Nilpotent remainder `a - body(a)`.
    pub fn soul(&self) -> Multivector {
        let mut s = self.clone();
        s.terms.remove(&0);
        s
    }

    /// Parity when every stored monomial has the same parity. Zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| Parity::of_mask(*m));
        match it.next() {
            None => Some(Parity::Even),
            Some(first) => it.all(|p| p == first).then_some(first),
        }
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Max coefficientwise distance to `other`.
    pub fn distance(&self, other: &Multivector) -> f64 {
        let mut d: f64 = 0.0;
        for (m, c) in &self.terms {
            d = d.max((c - other.coefficient(*m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                d = d.max(c.norm());
            }
        }
        d
    }

    fn check_context(&self, other: &Multivector) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &Multivector) -> Result<Multivector> {
        self.check_context(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(*m).or_insert(Complex::new(0.0, 0.0)) += c;
        }
        Ok(Multivector {
            ctx: self.ctx,
            terms,
        }
        .pruned())
    }

    pub fn checked_sub(&self, other: &Multivector) -> Result<Multivector> {
        self.checked_add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: impl Into<Complex>) -> Multivector {
        let c = c.into();
        Multivector {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
        .pruned()
    }

    /// Grassmann product.
    pub fn checked_mul(&self, other: &Multivector) -> Result<Multivector> {
        self.check_context(other)?;
        let mut terms: BTreeMap<u64, Complex> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let v = ca * cb * merge_sign(*ma, *mb);
                *terms.entry(ma | mb).or_insert(Complex::new(0.0, 0.0)) += v;
            }
        }
        Ok(Multivector {
            ctx: self.ctx,
            terms,
        }
        .pruned())
    }

    pub fn pow(&self, k: u32) -> Multivector {
        let mut acc = self.ctx.one();
        for _ in 0..k {
            acc = &acc * self;
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    /// Antilinear homomorphism: conjugates coefficients and swaps `η_i ↔ η̄_i`
    /// inside each monomial, re-sorting with the Koszul sign.
    pub fn conjugate(&self) -> Multivector {
        let ctx = self.ctx;
        let terms = self
            .terms
            .iter()
            .map(|(mask, c)| {
                let (m, sign) = conjugate_mask(&ctx, *mask);
                (m, c.conj() * sign)
            })
            .collect();
        Multivector { ctx, terms }
    }

    /// Two-sided inverse `b⁻¹ Σ_k (−s/b)^k` for `a = b + s` with `b ≠ 0`.
    pub fn invert(&self) -> Result<Multivector> {
        let b = self.body();
        if b.norm() <= self.ctx.zero_tolerance {
            return Err(Error::NonInvertible("element"));
        }
        let inv_b = b.inv();
        let x = self.soul().scale(-inv_b);
        let mut sum = self.ctx.one();
        let mut power = self.ctx.one();
        loop {
            power = &power * &x;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(inv_b))
    }

    /// Formal Taylor expansion `Σ_k f^(k)(body) soul^k / k!`; finite because the
    /// soul is nilpotent.
    pub fn analytic_apply<F: AnalyticFunction + ?Sized>(&self, f: &F) -> Result<Multivector> {
        let b = self.body();
        let s = self.soul();
        let mut sum = self.ctx.scalar(f.derivative(0, b)?);
        let mut power = self.ctx.one();
        let mut factorial = 1.0;
        let mut k = 0usize;
        loop {
            k += 1;
            power = &power * &s;
            if power.is_zero() {
                break;
            }
            factorial *= k as f64;
            let d = f.derivative(k, b)?;
            sum = &sum + &power.scale(d / factorial);
        }
        Ok(sum)
    }

    /// Left derivative `∂/∂g`.
    pub fn left_derivative(&self, g: usize) -> Result<Multivector> {
        if g >= self.ctx.n_generators() {
            return Err(Error::IndexOutOfRange {
                index: g,
                size: self.ctx.n_generators(),
            });
        }
        let bit = 1u64 << g;
        let below = bit - 1;
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| *m & bit != 0)
            .map(|(m, c)| {
                let sign = if (m & below).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                (m ^ bit, c * sign)
            })
            .collect();
        Ok(Multivector {
            ctx: self.ctx,
            terms,
        })
    }

    /// Berezin integral over `gens`: `∂_{g₁}(∂_{g₂}(… ∂_{g_k}(a)))`, then every
    /// term still containing a listed generator is dropped.
    pub fn berezin(&self, gens: &[usize]) -> Result<Multivector> {
        let mut seen = 0u64;
        for &g in gens {
            if g >= self.ctx.n_generators() {
                return Err(Error::IndexOutOfRange {
                    index: g,
                    size: self.ctx.n_generators(),
                });
            }
            if seen & (1 << g) != 0 {
                return Err(Error::DuplicateGenerator(g));
            }
            seen |= 1 << g;
        }
        let mut out = self.clone();
        for &g in gens.iter().rev() {
            out = out.left_derivative(g)?;
        }
        out.terms.retain(|m, _| m & seen == 0);
        Ok(out)
    }

    /// Berezin integral followed by the body: the number the integral yields
    /// when `gens` exhausts every generator the integrand depends on.
    pub fn berezin_body(&self, gens: &[usize]) -> Result<Complex> {
        Ok(self.berezin(gens)?.body())
    }
}

fn conjugate_mask(ctx: &AlgebraContext, mask: u64) -> (u64, f64) {
    let mut acc = 0u64;
    let mut sign = 1.0;
    let mut rest = mask;
    while rest != 0 {
        let k = rest.trailing_zeros() as usize;
        let bit = 1u64 << ctx.conjugate_index(k);
        sign *= merge_sign(acc, bit);
        acc |= bit;
        rest &= rest - 1;
    }
    (acc, sign)
}

/// A scalar function known through its derivatives at a point.
pub trait AnalyticFunction {
    fn name(&self) -> &'static str;
    /// `f^(k)(at)`.
    fn derivative(&self, k: usize, at: Complex) -> Result<Complex>;
}

fn undefined(function: &'static str, at: Complex) -> Error {
    Error::Undefined {
        function,
        body: format!("{at}"),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Reciprocal;

impl AnalyticFunction for Reciprocal {
    fn name(&self) -> &'static str {
        "reciprocal"
    }

    fn derivative(&self, k: usize, at: Complex) -> Result<Complex> {
        if at.norm() == 0.0 {
            return Err(undefined(self.name(), at));
        }
        // (-1)^k k! / x^{k+1}
        let mut c = Complex::new(1.0, 0.0);
        for j in 1..=k {
            c *= -(j as f64);
        }
        Ok(c / at.powu(k as u32 + 1))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Exp;

impl AnalyticFunction for Exp {
    fn name(&self) -> &'static str {
        "exp"
    }

    fn derivative(&self, _k: usize, at: Complex) -> Result<Complex> {
        Ok(at.exp())
    }
}

/// Principal-branch logarithm.
#[derive(Clone, Copy, Debug)]
pub struct Log;

impl AnalyticFunction for Log {
    fn name(&self) -> &'static str {
        "log"
    }

    fn derivative(&self, k: usize, at: Complex) -> Result<Complex> {
        if at.norm() == 0.0 {
            return Err(undefined(self.name(), at));
        }
        if k == 0 {
            return Ok(at.ln());
        }
        // (-1)^{k-1} (k-1)! / x^k
        let mut c = Complex::new(1.0, 0.0);
        for j in 1..k {
            c *= -(j as f64);
        }
        Ok(c / at.powu(k as u32))
    }
}

/// `x^p` for real `p`, principal branch.
#[derive(Clone, Copy, Debug)]
pub struct Power(pub f64);

impl AnalyticFunction for Power {
    fn name(&self) -> &'static str {
        "power"
    }

    fn derivative(&self, k: usize, at: Complex) -> Result<Complex> {
        let p = self.0;
        let mut falling = 1.0;
        for j in 0..k {
            falling *= p - j as f64;
        }
        if falling == 0.0 {
            return Ok(Complex::new(0.0, 0.0));
        }
        let e = p - k as f64;
        if at.norm() == 0.0 {
            if e >= 0.0 && e.fract() == 0.0 {
                return Ok(if e == 0.0 {
                    Complex::new(falling, 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                });
            }
            return Err(undefined(self.name(), at));
        }
        Ok(at.powf(e) * falling)
    }
}

/// Function given by a closure `(k, x) ↦ f^(k)(x)`.
pub struct FromDerivatives<F> {
    pub name: &'static str,
    pub derivatives: F,
}

impl<F> AnalyticFunction for FromDerivatives<F>
where
    F: Fn(usize, Complex) -> Result<Complex>,
{
    fn name(&self) -> &'static str {
        self.name
    }

    fn derivative(&self, k: usize, at: Complex) -> Result<Complex> {
        (self.derivatives)(k, at)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> $tr<&'a Multivector> for &'a Multivector {
            type Output = Multivector;
            /// Panics if the operands come from different algebras.
            fn $method(self, rhs: &'a Multivector) -> Multivector {
                self.$checked(rhs).expect("Grassmann context mismatch")
            }
        }
        impl $tr<Multivector> for Multivector {
            type Output = Multivector;
            fn $method(self, rhs: Multivector) -> Multivector {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Multivector> for Multivector {
            type Output = Multivector;
            fn $method(self, rhs: &'a Multivector) -> Multivector {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        *self = &*self + rhs;
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let n = self.ctx.n_pairs;
        for (i, (mask, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            let mut rest = *mask;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                if k < n {
                    write!(f, "·η{}", k + 1)?;
                } else {
                    write!(f, "·η̄{}", k - n + 1)?;
                }
                rest &= rest - 1;
            }
        }
        Ok(())
    }
}

/// A multivector whose every monomial has even degree.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenElement(Multivector);

/// A multivector whose every monomial has odd degree.
#[derive(Clone, Debug, PartialEq)]
pub struct OddElement(Multivector);

impl EvenElement {
    pub fn new(m: Multivector) -> Result<Self> {
        if m.is_even() {
            Ok(EvenElement(m))
        } else {
            Err(Error::ParityViolation {
                expected: Parity::Even,
            })
        }
    }

    pub fn into_inner(self) -> Multivector {
        self.0
    }

    pub fn invert(&self) -> Result<EvenElement> {
        self.0
            .invert()
            .map(EvenElement)
            .map_err(|_| Error::NonInvertible("even element"))
    }

    pub fn analytic_apply<F: AnalyticFunction + ?Sized>(&self, f: &F) -> Result<EvenElement> {
        self.0.analytic_apply(f).map(EvenElement)
    }
}

impl OddElement {
    pub fn new(m: Multivector) -> Result<Self> {
        if m.is_odd() {
            Ok(OddElement(m))
        } else {
            Err(Error::ParityViolation {
                expected: Parity::Odd,
            })
        }
    }

    pub fn into_inner(self) -> Multivector {
        self.0
    }
}

impl Deref for EvenElement {
    type Target = Multivector;
    fn deref(&self) -> &Multivector {
        &self.0
    }
}

impl Deref for OddElement {
    type Target = Multivector;
    fn deref(&self) -> &Multivector {
        &self.0
    }
}

impl TryFrom<Multivector> for EvenElement {
    type Error = Error;
    fn try_from(m: Multivector) -> Result<Self> {
        EvenElement::new(m)
    }
}

impl TryFrom<Multivector> for OddElement {
    type Error = Error;
    fn try_from(m: Multivector) -> Result<Self> {
        OddElement::new(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub mask: u64,
    pub re: f64,
    pub im: f64,
}

/// Wire form `{"n_pairs": N, "terms": [{"mask", "re", "im"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultivectorJson {
    pub n_pairs: usize,
    pub terms: Vec<TermJson>,
}

impl From<&Multivector> for MultivectorJson {
    fn from(m: &Multivector) -> Self {
        MultivectorJson {
            n_pairs: m.ctx.n_pairs,
            terms: m
                .terms
                .iter()
                .map(|(mask, c)| TermJson {
                    mask: *mask,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl MultivectorJson {
    pub fn into_multivector(self, zero_tolerance: f64) -> Result<Multivector> {
        let ctx = AlgebraContext::with_tolerance(self.n_pairs, zero_tolerance)?;
        Multivector::from_terms(
            ctx,
            self.terms
                .into_iter()
                .map(|t| (t.mask, Complex::new(t.re, t.im))),
        )
    }
}

impl Serialize for Multivector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultivectorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multivector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MultivectorJson::deserialize(d)?
            .into_multivector(DEFAULT_ZERO_TOLERANCE)
            .map_err(serde::de::Error::custom)
    }
}
