//! Exact scalars: rationals, Gaussian rationals standing in for the complex
//! numbers, and quaternions written as `a + b·j` over Gaussian rationals.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator by `num_rational`.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let s = s.strip_prefix('+').unwrap_or(s);
    if s.is_empty() {
        return Err(Error::Parse(format!("empty rational")));
    }
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Square root of a nonnegative rational when it is itself rational.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

pub fn sign(x: &Rational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// An element `re + im·i` of ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

pub type C = GaussianRational;

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GaussianRational { re, im: Rational::zero() }
    }

    pub fn int(n: i64) -> Self {
        Self::real(rat(n))
    }

    pub fn ints(re: i64, im: i64) -> Self {
        GaussianRational { re: rat(re), im: rat(im) }
    }

    pub fn i() -> Self {
        Self::ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        GaussianRational { re: self.re.clone(), im: -&self.im }
    }

    /// `|z|² = re² + im²`.
    pub fn norm(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_imaginary(&self) -> bool {
        self.re.is_zero()
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(GaussianRational { re: &self.re / &n, im: -&self.im / &n })
    }

    pub fn scale(&self, r: &Rational) -> Self {
        GaussianRational { re: &self.re * r, im: &self.im * r }
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> Self {
        GaussianRational { re: -&self.im, im: self.re.clone() }
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational { re: Rational::zero(), im: Rational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::int(1)
    }
}

impl From<Rational> for GaussianRational {
    fn from(r: Rational) -> Self {
        Self::real(r)
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

macro_rules! forward_binop {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a $t> for $t {
            type Output = $t;
            fn $m(self, o: &'a $t) -> $t {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<$t> for &'a $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t {
                self.$m(&o)
            }
        }
    };
}

impl<'a, 'b> Add<&'b C> for &'a C {
    type Output = C;
    fn add(self, o: &'b C) -> C {
        C { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a, 'b> Sub<&'b C> for &'a C {
    type Output = C;
    fn sub(self, o: &'b C) -> C {
        C { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a, 'b> Mul<&'b C> for &'a C {
    type Output = C;
    fn mul(self, o: &'b C) -> C {
        if self.im.is_zero() {
            return C { re: &self.re * &o.re, im: &self.re * &o.im };
        }
        if o.im.is_zero() {
            return C { re: &self.re * &o.re, im: &self.im * &o.re };
        }
        C {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a, 'b> Div<&'b C> for &'a C {
    type Output = C;
    fn div(self, o: &'b C) -> C {
        self * &o.inv().expect("division by zero Gaussian rational")
    }
}

forward_binop!(C, Add, add);
forward_binop!(C, Sub, sub);
forward_binop!(C, Mul, mul);
forward_binop!(C, Div, div);

impl Neg for C {
    type Output = C;
    fn neg(self) -> C {
        C { re: -self.re, im: -self.im }
    }
}

impl<'a> Neg for &'a C {
    type Output = C;
    fn neg(self) -> C {
        C { re: -&self.re, im: -&self.im }
    }
}

impl AddAssign<&C> for C {
    fn add_assign(&mut self, o: &C) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&C> for C {
    fn sub_assign(&mut self, o: &C) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&C> for C {
    fn mul_assign(&mut self, o: &C) {
        *self = &*self * o;
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return f.write_str(&fmt_rational(&self.re));
        }
        let im = format!("{}*i", fmt_rational(&self.im.abs()));
        if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-{im}")
            } else {
                f.write_str(&im)
            }
        } else {
            let op = if self.im.is_negative() { '-' } else { '+' };
            write!(f, "{}{op}{im}", fmt_rational(&self.re))
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for GaussianRational {
    type Err = Error;

    /// Accepts `p/q`, `r/s*i`, `p/q+r/s*i`, and the bare forms `i`, `-i`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = s.strip_suffix('i') else {
            return Ok(C::real(parse_rational(&s)?));
        };
        let body = body.strip_suffix('*').unwrap_or(body);
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(k, c)| (*c == '+' || *c == '-') && !body[..*k].ends_with('/'))
            .map(|(k, _)| k)
            .last();
        let (re, im) = match split {
            Some(k) => (parse_rational(&body[..k])?, &body[k..]),
            None => (Rational::zero(), body),
        };
        let im = match im {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            t => parse_rational(t)?,
        };
        Ok(C { re, im })
    }
}

/// A quaternion `a + b·j` with `a, b ∈ ℚ(i)`, `j² = −1` and `α·j = j·ᾱ`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalQuaternion {
    pub a: GaussianRational,
    pub b: GaussianRational,
}

pub type Q = RationalQuaternion;

impl RationalQuaternion {
    pub fn new(a: C, b: C) -> Self {
        Q { a, b }
    }

    pub fn complex(a: C) -> Self {
        Q { a, b: C::zero() }
    }

    pub fn j() -> Self {
        Q { a: C::zero(), b: C::one() }
    }

    /// `(α + βj)^q = α − β̄j`.
    pub fn anti_involution(&self) -> Self {
        Q { a: self.a.clone(), b: -self.b.conj() }
    }

    /// Quaternionic conjugate `ᾱ − βj`, which reverses products as well.
    pub fn conj(&self) -> Self {
        Q { a: self.a.conj(), b: -&self.b }
    }

    /// `x·x̄ = |a|² + |b|²`.
    pub fn norm(&self) -> Rational {
        self.a.norm() + self.b.norm()
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let c = self.conj();
        Some(Q { a: c.a.scale(&n.recip()), b: c.b.scale(&n.recip()) })
    }
}

pub fn quaternion_anti_involution(x: &Q) -> Q {
    x.anti_involution()
}

pub fn quaternion_multiply(x: &Q, y: &Q) -> Q {
    x * y
}

impl Zero for Q {
    fn zero() -> Self {
        Q { a: C::zero(), b: C::zero() }
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for Q {
    fn one() -> Self {
        Q::complex(C::one())
    }
}

impl<'a, 'b> Add<&'b Q> for &'a Q {
    type Output = Q;
    fn add(self, o: &'b Q) -> Q {
        Q { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl<'a, 'b> Sub<&'b Q> for &'a Q {
    type Output = Q;
    fn sub(self, o: &'b Q) -> Q {
        Q { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a, 'b> Mul<&'b Q> for &'a Q {
    type Output = Q;
    // (α+βj)(γ+δj) = (αγ − βδ̄) + (αδ + βγ̄)j
    fn mul(self, o: &'b Q) -> Q {
        Q {
            a: &self.a * &o.a - &self.b * &o.b.conj(),
            b: &self.a * &o.b + &self.b * &o.a.conj(),
        }
    }
}

forward_binop!(Q, Add, add);
forward_binop!(Q, Sub, sub);
forward_binop!(Q, Mul, mul);

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q { a: -self.a, b: -self.b }
    }
}

impl<'a> Neg for &'a Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q { a: -&self.a, b: -&self.b }
    }
}

impl fmt::Display for RationalQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+({})*j", self.a, self.b)
        }
    }
}

impl fmt::Debug for RationalQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for RationalQuaternion {
    type Err = Error;

    /// Accepts `<gaussian>+(<gaussian>)*j`, `(<gaussian>)*j` or a bare Gaussian rational.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = s.strip_suffix(")*j") else {
            return Ok(Q::complex(s.parse()?));
        };
        let open = body
            .rfind('(')
            .ok_or_else(|| Error::Parse(format!("bad quaternion {s:?}")))?;
        let b: C = body[open + 1..].parse()?;
        let (a, b) = match &body[..open] {
            "" | "+" => (C::zero(), b),
            "-" => (C::zero(), -b),
            head => {
                if let Some(a) = head.strip_suffix('+') {
                    (a.parse()?, b)
                } else if let Some(a) = head.strip_suffix('-') {
                    (a.parse()?, -b)
                } else {
                    return Err(Error::Parse(format!("bad quaternion {s:?}")));
                }
            }
        };
        Ok(Q { a, b })
    }
}

#[cfg(test)]
pub(crate) mod strategies {
    use super::*;
    use proptest::prelude::*;

    pub fn rational() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..12).prop_map(|(n, d)| ratio(n, d))
    }

    pub fn gaussian() -> impl Strategy<Value = C> {
        (rational(), rational()).prop_map(|(re, im)| C { re, im })
    }

    pub fn quaternion() -> impl Strategy<Value = Q> {
        (gaussian(), gaussian()).prop_map(|(a, b)| Q { a, b })
    }
}

#[cfg(test)]
mod tests {
    use super::strategies::*;
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    #[test]
    fn rational_canonical() {
        let r = ratio(4, -6);
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));
        assert_eq!(parse_rational("0/5").unwrap(), rat(0));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn rational_square_roots() {
        assert_eq!(rational_sqrt(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(rational_sqrt(&rat(2)), None);
        assert_eq!(rational_sqrt(&rat(-4)), None);
    }

    #[test]
    fn gaussian_text() {
        for s in ["0", "1/2", "3*i", "-1*i", "1/2+3/4*i", "-2-5/3*i"] {
            let z: C = s.parse().unwrap();
            assert_eq!(z.to_string(), s);
        }
        assert_eq!("i".parse::<C>().unwrap(), C::i());
        assert_eq!("-i".parse::<C>().unwrap(), -C::i());
        assert_eq!("2+i".parse::<C>().unwrap(), C::ints(2, 1));
        assert!("1/2+".parse::<C>().is_err());
        assert!("x".parse::<C>().is_err());
    }

    #[test]
    fn quaternion_examples() {
        let j = Q::j();
        assert_eq!(&j * &j, -Q::one());
        let i = Q::complex(C::i());
        assert_eq!(&i * &j + &j * &i, Q::zero());
        assert_eq!(q("1").anti_involution(), q("1"));
        assert_eq!(q("i+(2)*j").anti_involution(), q("i+(-2)*j"));
        assert_eq!(q("1/2-i+(3*i)*j").to_string(), "1/2-1*i+(3*i)*j");
        assert_eq!(q("(1)*j"), j);
        assert_eq!(q("2-(1)*j"), Q::new(C::int(2), C::int(-1)));
    }

    proptest! {
        #[test]
        fn gaussian_field(x in gaussian(), y in gaussian()) {
            prop_assert_eq!((&x * &y).conj(), x.conj() * y.conj());
            prop_assert_eq!((&x + &y).conj(), x.conj() + y.conj());
            if !x.is_zero() {
                prop_assert_eq!(&x * &x.inv().unwrap(), C::one());
                prop_assert!(x.norm() > Rational::zero());
            }
            prop_assert_eq!(x.to_string().parse::<C>().unwrap(), x);
        }

        #[test]
        fn quaternion_laws(x in quaternion(), y in quaternion(), z in quaternion()) {
            prop_assert_eq!((&x * &y).anti_involution(), y.anti_involution() * x.anti_involution());
            prop_assert_eq!(x.anti_involution().anti_involution(), x.clone());
            prop_assert_eq!((&x * &y) * &z, &x * (&y * &z));
            prop_assert_eq!(&x * &Q::one(), x.clone());
            prop_assert_eq!(&x * &x.conj(), Q::complex(C::real(x.norm())));
            if !x.is_zero() {
                prop_assert_eq!(&x * &x.inv().unwrap(), Q::one());
            }
            prop_assert_eq!(x.to_string().parse::<Q>().unwrap(), x);
        }

        #[test]
        fn complex_scalars_slide_past_j(a in gaussian()) {
            let lhs = &Q::complex(a.clone()) * &Q::j();
            let rhs = &Q::j() * &Q::complex(a.conj());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
