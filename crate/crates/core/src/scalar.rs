//! The exact coefficient field: complex numbers with real and imaginary
//! parts in ℚ(√2), built on arbitrary-precision rationals.
//!
//! Every constructor returns a canonical value, so structural equality is
//! numerical equality. Conversion to `f64` is deliberate and fallible.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// `n/d` for small literals; panics on a zero denominator.
    pub fn frac(n: i64, d: i64) -> Self {
        Rational::new(n, d).expect("literal with zero denominator")
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn checked_inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &other.0))
    }

    /// Integer power; negative exponents invert (error on zero base).
    pub fn pow(&self, exp: i32) -> Result<Self> {
        if exp < 0 {
            return self.checked_inv()?.pow(-exp);
        }
        Ok(Rational(num_traits::pow(self.0.clone(), exp as usize)))
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    /// Nearest double, within about one unit in the last place.
    pub fn to_f64(&self) -> Result<f64> {
        ratio_to_f64(self.0.numer(), self.0.denom())
    }
}

/// Correctly scaled quotient of two big integers: the top ~66 bits of the
/// quotient are formed exactly (with a sticky bit) and then rescaled.
fn ratio_to_f64(numer: &BigInt, denom: &BigInt) -> Result<f64> {
    if numer.is_zero() {
        return Ok(0.0);
    }
    let negative = numer.is_negative();
    let n = numer.magnitude();
    let d = denom.magnitude();
    let shift = 66i64 - (n.bits() as i64 - d.bits() as i64);
    let (num, den) =
        if shift >= 0 { (n << (shift as usize), d.clone()) } else { (n.clone(), d << ((-shift) as usize)) };
    let q = &num / &den;
    let sticky = !(&num % &den).is_zero();
    let q = (q << 1usize) | num_bigint::BigUint::from(sticky as u8);
    let mantissa = q.to_f64().unwrap_or(f64::INFINITY);
    let value = scale_by_pow2(mantissa, -(shift + 1));
    if !value.is_finite() {
        return Err(Error::Overflow(format!("{}/{}", numer, denom)));
    }
    Ok(if negative { -value } else { value })
}

fn scale_by_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p`, `p/q` and terminating decimals such as `-0.99`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let perr = |m: &str| Error::Parse { position: 0, message: format!("{m}: {s:?}") };
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| perr("bad numerator"))?;
            let q: BigInt = q.trim().parse().map_err(|_| perr("bad denominator"))?;
            return Rational::new(p, q);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let negative = int.trim_start().starts_with('-');
            let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
                BigInt::zero()
            } else {
                int.parse().map_err(|_| perr("bad decimal"))?
            };
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(perr("bad decimal"));
            }
            let frac_val: BigInt = frac.parse().map_err(|_| perr("bad decimal"))?;
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let mut value = BigRational::new(frac_val, scale);
            if negative {
                value = -value;
            }
            return Ok(Rational(BigRational::from_integer(int_part) + value));
        }
        let p: BigInt = s.parse().map_err(|_| perr("bad integer"))?;
        Ok(Rational::from_integer(p))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($ty:ty, $trait:ident, $method:ident, $impl:expr) => {
        impl<'a> $trait<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn $method(self, rhs: &'a $ty) -> $ty {
                let f: fn(&$ty, &$ty) -> $ty = $impl;
                f(self, rhs)
            }
        }
        impl $trait<$ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                let f: fn(&$ty, &$ty) -> $ty = $impl;
                f(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a $ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: &'a $ty) -> $ty {
                let f: fn(&$ty, &$ty) -> $ty = $impl;
                f(&self, rhs)
            }
        }
    };
}

forward_binop!(Rational, Add, add, |a, b| Rational(&a.0 + &b.0));
forward_binop!(Rational, Sub, sub, |a, b| Rational(&a.0 - &b.0));
forward_binop!(Rational, Mul, mul, |a, b| Rational(&a.0 * &b.0));

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// `a + b√2` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadExt {
    pub a: Rational,
    pub b: Rational,
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational) -> Self {
        QuadExt { a, b }
    }

    pub fn from_rational(a: Rational) -> Self {
        QuadExt { a, b: Rational::zero() }
    }

    pub fn zero() -> Self {
        QuadExt::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        QuadExt::from_rational(Rational::one())
    }

    pub fn sqrt2() -> Self {
        QuadExt { a: Rational::zero(), b: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The Galois conjugate `a − b√2`.
    pub fn galois_conj(&self) -> Self {
        QuadExt { a: self.a.clone(), b: -&self.b }
    }

    /// Field norm `a² − 2b²`.
    pub fn field_norm(&self) -> Rational {
        &self.a * &self.a - Rational::from_integer(2) * &self.b * &self.b
    }

    /// Exact sign of `a + b√2`.
    pub fn signum(&self) -> i32 {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == 0 || sa == sb {
            return if sa == 0 { sb } else { sa };
        }
        if sa == 0 {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2 = Rational::from_integer(2) * &self.b * &self.b;
        if a2 > b2 {
            sa
        } else {
            sb
        }
    }

    pub fn cmp_value(&self, other: &QuadExt) -> Ordering {
        (self - other).signum().cmp(&0)
    }

    pub fn checked_inv(&self) -> Result<Self> {
        if self.b.is_zero() {
            return Ok(QuadExt::from_rational(self.a.checked_inv()?));
        }
        let n = self.field_norm();
        let n = n.checked_inv()?;
        Ok(QuadExt { a: &self.a * &n, b: -(&self.b * &n) })
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QuadExt { a: &self.a * r, b: &self.b * r }
    }

    pub fn to_f64(&self) -> Result<f64> {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == 0 {
            return self.a.to_f64();
        }
        let a = self.a.to_f64()?;
        let b = self.b.to_f64()?;
        let value = if sa == 0 || sa == sb {
            a + b * std::f64::consts::SQRT_2
        } else {
            // opposite signs: divide the exact field norm by the cancellation-free conjugate
            self.field_norm().to_f64()? / (a - b * std::f64::consts::SQRT_2)
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Overflow(self.to_string()))
        }
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let radical = |b: &Rational| {
            if b.is_one() {
                "s2".to_string()
            } else {
                format!("{b}*s2")
            }
        };
        if self.a.is_zero() {
            if self.b.signum() < 0 {
                return write!(f, "-{}", radical(&self.b.abs()));
            }
            return write!(f, "{}", radical(&self.b));
        }
        let sign = if self.b.signum() < 0 { '-' } else { '+' };
        write!(f, "{}{}{}", self.a, sign, radical(&self.b.abs()))
    }
}

forward_binop!(QuadExt, Add, add, |x, y| QuadExt { a: &x.a + &y.a, b: &x.b + &y.b });
forward_binop!(QuadExt, Sub, sub, |x, y| QuadExt { a: &x.a - &y.a, b: &x.b - &y.b });
forward_binop!(QuadExt, Mul, mul, |x, y| {
    if x.b.is_zero() && y.b.is_zero() {
        return QuadExt::from_rational(&x.a * &y.a);
    }
    let two = Rational::from_integer(2);
    QuadExt { a: &x.a * &y.a + two * &x.b * &y.b, b: &x.a * &y.b + &x.b * &y.a }
});

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { a: -self.a, b: -self.b }
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { a: -&self.a, b: -&self.b }
    }
}

/// Complex number `re + i·im` with `re`, `im ∈ ℚ(√2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    pub re: QuadExt,
    pub im: QuadExt,
}

impl ExactScalar {
    pub fn new(re: QuadExt, im: QuadExt) -> Self {
        ExactScalar { re, im }
    }

    pub fn zero() -> Self {
        ExactScalar { re: QuadExt::zero(), im: QuadExt::zero() }
    }

    pub fn one() -> Self {
        ExactScalar::from_rational(Rational::one())
    }

    pub fn i() -> Self {
        ExactScalar { re: QuadExt::zero(), im: QuadExt::one() }
    }

    pub fn sqrt2() -> Self {
        ExactScalar::from_quad(QuadExt::sqrt2())
    }

    pub fn from_rational(r: Rational) -> Self {
        ExactScalar { re: QuadExt::from_rational(r), im: QuadExt::zero() }
    }

    pub fn from_quad(q: QuadExt) -> Self {
        ExactScalar { re: q, im: QuadExt::zero() }
    }

    pub fn from_integer(n: i64) -> Self {
        ExactScalar::from_rational(Rational::from_integer(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        ExactScalar::from_rational(Rational::frac(n, d))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.im.is_zero() && self.re.b.is_zero() && self.re.a.is_one()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Real and rational, returning the rational.
    pub fn as_rational(&self) -> Option<&Rational> {
        (self.im.is_zero() && self.re.b.is_zero()).then_some(&self.re.a)
    }

    pub fn conj(&self) -> Self {
        ExactScalar { re: self.re.clone(), im: -&self.im }
    }

    /// `|x|²`, an element of ℚ(√2).
    pub fn norm_sqr(&self) -> QuadExt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn checked_inv(&self) -> Result<Self> {
        if self.im.is_zero() {
            return Ok(ExactScalar::from_quad(self.re.checked_inv()?));
        }
        let n = self.norm_sqr().checked_inv()?;
        Ok(ExactScalar { re: &self.re * &n, im: -(&self.im * &n) })
    }

    pub fn checked_div(&self, other: &ExactScalar) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = other.as_rational() {
            let inv = r.checked_inv()?;
            return Ok(self.scale(&inv));
        }
        Ok(self * &other.checked_inv()?)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        ExactScalar { re: self.re.scale(r), im: self.im.scale(r) }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = ExactScalar::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_complex64(&self) -> Result<Complex64> {
        Ok(Complex64::new(self.re.to_f64()?, self.im.to_f64()?))
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({},{})", self.re, self.im)
        }
    }
}

impl FromStr for ExactScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        crate::text::parse_scalar(s)
    }
}

impl FromStr for QuadExt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let x = crate::text::parse_scalar(s)?;
        if !x.im.is_zero() {
            return Err(Error::Parse { position: 0, message: format!("not real: {s:?}") });
        }
        Ok(x.re)
    }
}

impl From<Rational> for ExactScalar {
    fn from(r: Rational) -> Self {
        ExactScalar::from_rational(r)
    }
}

impl From<QuadExt> for ExactScalar {
    fn from(q: QuadExt) -> Self {
        ExactScalar::from_quad(q)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::from_integer(n)
    }
}

forward_binop!(ExactScalar, Add, add, |x, y| ExactScalar { re: &x.re + &y.re, im: &x.im + &y.im });
forward_binop!(ExactScalar, Sub, sub, |x, y| ExactScalar { re: &x.re - &y.re, im: &x.im - &y.im });
forward_binop!(ExactScalar, Mul, mul, |x, y| {
    match (x.im.is_zero(), y.im.is_zero()) {
        (true, true) => ExactScalar::from_quad(&x.re * &y.re),
        (true, false) => ExactScalar { re: &x.re * &y.re, im: &x.re * &y.im },
        (false, true) => ExactScalar { re: &x.re * &y.re, im: &x.im * &y.re },
        (false, false) => ExactScalar { re: &x.re * &y.re - &x.im * &y.im, im: &x.re * &y.im + &x.im * &y.re },
    }
});

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { re: -self.re, im: -self.im }
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { re: -&self.re, im: -&self.im }
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        *self = &*self * rhs;
    }
}

impl std::iter::Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |acc, x| acc + x)
    }
}

/// Operation selector for [`field_op`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Conj,
    Negate,
}

/// Dispatches a field operation; unary operations ignore `y`.
pub fn field_op(x: &ExactScalar, y: &ExactScalar, op: FieldOp) -> Result<ExactScalar> {
    Ok(match op {
        FieldOp::Add => x + y,
        FieldOp::Sub => x - y,
        FieldOp::Mul => x * y,
        FieldOp::Div => x.checked_div(y)?,
        FieldOp::Conj => x.conj(),
        FieldOp::Negate => -x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: Rational, b: Rational) -> QuadExt {
        QuadExt::new(a, b)
    }

    #[test]
    fn one_plus_sqrt2() {
        let x = ExactScalar::one();
        let y = ExactScalar::sqrt2();
        let s = &x + &y;
        assert_eq!(s.re, q(Rational::one(), Rational::one()));
        assert_eq!(s.to_string(), "1+s2");
    }

    #[test]
    fn sqrt2_squared_is_two() {
        let r = ExactScalar::sqrt2() * ExactScalar::sqrt2();
        assert_eq!(r, ExactScalar::from_integer(2));
    }

    #[test]
    fn conjugation() {
        let x = ExactScalar::new(
            QuadExt::from_rational(Rational::frac(1, 2)),
            QuadExt::from_rational(Rational::frac(1, 3)),
        );
        let c = x.conj();
        assert_eq!(c.re, QuadExt::from_rational(Rational::frac(1, 2)));
        assert_eq!(c.im, QuadExt::from_rational(Rational::frac(-1, 3)));
        assert_eq!(c.to_string(), "(1/2,-1/3)");
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let x = ExactScalar::one();
        assert_eq!(x.checked_div(&ExactScalar::zero()), Err(Error::DivisionByZero));
        assert_eq!(field_op(&x, &ExactScalar::zero(), FieldOp::Div), Err(Error::DivisionByZero));
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn complex_division_round_trips() {
        let x: ExactScalar = "(1/2+s2,-3)".parse().unwrap();
        let y: ExactScalar = "(2,1/3*s2)".parse().unwrap();
        let z = x.checked_div(&y).unwrap();
        assert_eq!(&z * &y, x);
    }

    #[test]
    fn float_demotion() {
        assert_eq!(Rational::frac(7, 15).to_f64().unwrap(), 0.4666666666666667);
        // long division: 39/23 = 1.695652173913043478...
        let v = Rational::frac(39, 23).to_f64().unwrap();
        assert!((v - 1.6956521739130435).abs() <= 4.0 * f64::EPSILON * v);
        let s = q(Rational::one(), Rational::one()).to_f64().unwrap();
        assert!((s - 2.414213562373095).abs() <= 4.0 * f64::EPSILON * s);
    }

    #[test]
    fn float_demotion_with_cancellation() {
        // 99/70 approximates √2 closely, so 99/70 − √2 ≈ 7.215e-5 cancels badly in naive fp.
        let x = q(Rational::frac(99, 70), Rational::from_integer(-1));
        let v = x.to_f64().unwrap();
        // (99/70)² − 2 = 1/4900, divided by (99/70 + √2)
        let expected = (1.0 / 4900.0) / (99.0 / 70.0 + std::f64::consts::SQRT_2);
        assert!((v - expected).abs() <= 4.0 * f64::EPSILON * expected);
        assert_eq!(x.signum(), 1);
        assert_eq!((-x).signum(), -1);
    }

    #[test]
    fn huge_ratio_of_moderate_value() {
        let big = num_traits::pow(BigInt::from(3), 900);
        let r = Rational::new(&big * BigInt::from(2), big.clone()).unwrap();
        assert_eq!(r.to_f64().unwrap(), 2.0);
        let overflow = Rational::from_integer(big);
        assert!(matches!(overflow.to_f64(), Err(Error::Overflow(_))));
    }

    #[test]
    fn rational_text() {
        assert_eq!("3/6".parse::<Rational>().unwrap(), Rational::frac(1, 2));
        assert_eq!("-0.99".parse::<Rational>().unwrap(), Rational::frac(-99, 100));
        assert_eq!(Rational::frac(4, 2).to_string(), "2");
        assert_eq!(Rational::frac(-1, 3).to_string(), "-1/3");
    }

    #[test]
    fn quad_text() {
        let x = q(Rational::frac(1, 2), Rational::frac(-3, 4));
        assert_eq!(x.to_string(), "1/2-3/4*s2");
        assert_eq!(x.to_string().parse::<QuadExt>().unwrap(), x);
    }
}
