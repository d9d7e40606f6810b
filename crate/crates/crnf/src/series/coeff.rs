//! Gaussian rational coefficients and small exact helpers around them.

use malachite_base::num::arithmetic::traits::{
    AbsSquared, CeilingSqrt, CheckedSqrt, Conjugate, Reciprocal,
};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::conversion::traits::RoundingFrom;
use malachite_base::rounding_modes::RoundingMode;
use malachite_nz::natural::Natural;
pub use malachite_q::gaussian_rational::GaussianRational;
pub use malachite_q::Rational;

pub type C = GaussianRational;

pub fn c(re: Rational, im: Rational) -> C {
    GaussianRational {
        real: re,
        imaginary: im,
    }
}

pub fn real(re: Rational) -> C {
    c(re, Rational::ZERO)
}

pub fn int(n: i64) -> C {
    real(Rational::from(n))
}

pub fn ratio(p: i64, q: i64) -> C {
    real(Rational::from_signeds(p, q))
}

pub fn complex_ratio(re: (i64, i64), im: (i64, i64)) -> C {
    c(
        Rational::from_signeds(re.0, re.1),
        Rational::from_signeds(im.0, im.1),
    )
}

pub fn i_unit() -> C {
    c(Rational::ZERO, Rational::ONE)
}

#[inline]
pub fn is_zero(a: &C) -> bool {
    a.real == Rational::ZERO && a.imaginary == Rational::ZERO
}

#[inline]
pub fn is_real(a: &C) -> bool {
    a.imaginary == Rational::ZERO
}

pub fn conj(a: &C) -> C {
    a.conjugate()
}

pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if *q < Rational::ZERO {
        return None;
    }
    q.checked_sqrt()
}

/// Product with a fast path for purely real operands.
#[inline]
pub fn mul(a: &C, b: &C) -> C {
    match (is_real(a), is_real(b)) {
        (true, true) => real(&a.real * &b.real),
        (true, false) => c(&a.real * &b.real, &a.real * &b.imaginary),
        (false, true) => c(&a.real * &b.real, &a.imaginary * &b.real),
        (false, false) => a * b,
    }
}

#[inline]
pub fn add_assign(acc: &mut C, b: &C) {
    acc.real += &b.real;
    if !is_real(b) {
        acc.imaginary += &b.imaginary;
    }
}

pub fn norm_sqr(a: &C) -> Rational {
    a.abs_squared()
}

pub fn inv(a: &C) -> Option<C> {
    if is_zero(a) {
        None
    } else {
        Some(a.reciprocal())
    }
}

pub fn scale_real(a: &C, q: &Rational) -> C {
    c(&a.real * q, &a.imaginary * q)
}

/// A rational upper bound of √q for q ≥ 0, exact when q is a perfect
/// square and otherwise within a relative error of about 2⁻⁶⁰.
pub fn sqrt_upper(q: &Rational) -> Rational {
    assert!(*q >= Rational::ZERO, "sqrt_upper of a negative rational");
    if let Some(r) = q.checked_sqrt() {
        return r;
    }
    let scale = Natural::from(1u32) << 60u64;
    let num = q.numerator_ref() * q.denominator_ref() * &scale * &scale;
    let root = (&num).ceiling_sqrt();
    Rational::from_naturals(root, q.denominator_ref() * &scale)
}

/// A rational lower bound of √q for q ≥ 0.
pub fn sqrt_lower(q: &Rational) -> Rational {
    assert!(*q >= Rational::ZERO, "sqrt_lower of a negative rational");
    if let Some(r) = q.checked_sqrt() {
        return r;
    }
    use malachite_base::num::arithmetic::traits::FloorSqrt;
    let scale = Natural::from(1u32) << 60u64;
    let num = q.numerator_ref() * q.denominator_ref() * &scale * &scale;
    let root = (&num).floor_sqrt();
    Rational::from_naturals(root, q.denominator_ref() * &scale)
}

/// Upper bound of |a|.
pub fn modulus_upper(a: &C) -> Rational {
    if is_real(a) {
        return if a.real < Rational::ZERO {
            -&a.real
        } else {
            a.real.clone()
        };
    }
    sqrt_upper(&norm_sqr(a))
}

pub fn to_f64(q: &Rational) -> f64 {
    f64::rounding_from(q, RoundingMode::Nearest).0
}

pub fn from_f64(x: f64) -> Rational {
    Rational::try_from(x).expect("finite float")
}

pub fn one() -> C {
    C::ONE
}

pub fn zero() -> C {
    C::ZERO
}

/// Parses a rational written as "p/q" or "p".
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: malachite_nz::integer::Integer = p.parse().ok()?;
    let q: malachite_nz::integer::Integer = q.parse().ok()?;
    if q == 0 {
        return None;
    }
    Some(Rational::from_integers(p, q))
}
