//! Coefficients living in a real quadratic field `ℚ(√q)`, with a complex
//! double fallback.
//!
//! Every exactness-sensitive construction in this crate (canonical low-pass
//! filters `p^{-1/2} Σ z^a`, sign flips, monomial modifiers) stays inside
//! `ℚ(√p)`. Arithmetic that leaves the field, either by mixing two different
//! radicands or by touching a value such as `e^{2πi/3}`, silently promotes the
//! result to [`Scalar::Approx`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// `rational + radical·√base` with `base` squarefree.
///
/// `base == 1` exactly when `radical == 0`, so equal values have equal
/// representations and structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    rational: BigRational,
    radical: BigRational,
    base: u64,
}

fn squarefree_split(n: u64) -> (u64, u64) {
    // n = k² · q with q squarefree
    let mut k = 1u64;
    let mut q = 1u64;
    let mut m = n;
    let mut f = 2u64;
    while f * f <= m {
        let mut e = 0;
        while m % f == 0 {
            m /= f;
            e += 1;
        }
        k *= f.pow(e / 2);
        if e % 2 == 1 {
            q *= f;
        }
        f += 1;
    }
    q *= m;
    (k, q)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // very large numerators/denominators: fall back to a log-scale ratio
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl Surd {
    fn normalized(rational: BigRational, radical: BigRational, base: u64) -> Self {
        if radical.is_zero() || base == 1 {
            let rational = if base == 1 { rational + radical } else { rational };
            Surd { rational, radical: BigRational::zero(), base: 1 }
        } else {
            Surd { rational, radical, base }
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Surd::normalized(r, BigRational::zero(), 1)
    }

    pub fn from_integer(n: i64) -> Self {
        Surd::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `√n` for a nonnegative integer `n`.
    pub fn sqrt(n: u64) -> Self {
        let (k, q) = squarefree_split(n);
        if q == 1 {
            Surd::from_integer(k as i64)
        } else {
            Surd::normalized(BigRational::zero(), ratio(k as i64, 1), q)
        }
    }

    /// `1/√n` for `n ≥ 1`.
    pub fn inv_sqrt(n: u64) -> Self {
        assert!(n >= 1, "inv_sqrt of zero");
        let (k, q) = squarefree_split(n);
        if q == 1 {
            Surd::from_rational(ratio(1, k as i64))
        } else {
            // 1/(k√q) = √q/(kq)
            Surd::normalized(BigRational::zero(), ratio(1, (k * q) as i64), q)
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn radical_part(&self) -> &BigRational {
        &self.radical
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.radical.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.radical.is_zero()
    }

    fn common_base(&self, other: &Surd) -> Option<u64> {
        match (self.base, other.base) {
            (1, b) | (b, 1) => Some(b),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn checked_add(&self, other: &Surd) -> Option<Surd> {
        let base = self.common_base(other)?;
        Some(Surd::normalized(
            &self.rational + &other.rational,
            &self.radical + &other.radical,
            base,
        ))
    }

    pub fn checked_mul(&self, other: &Surd) -> Option<Surd> {
        let base = self.common_base(other)?;
        let q = BigRational::from_integer(BigInt::from(base));
        let rational = &self.rational * &other.rational + &self.radical * &other.radical * q;
        let radical = &self.rational * &other.radical + &self.radical * &other.rational;
        Some(Surd::normalized(rational, radical, base))
    }

    pub fn neg(&self) -> Surd {
        Surd {
            rational: -self.rational.clone(),
            radical: -self.radical.clone(),
            base: self.base,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Surd> {
        if self.is_zero() {
            return None;
        }
        // (a + b√q)⁻¹ = (a − b√q)/(a² − q b²)
        let q = BigRational::from_integer(BigInt::from(self.base));
        let norm = &self.rational * &self.rational - &self.radical * &self.radical * q;
        Some(Surd::normalized(
            &self.rational / &norm,
            -(&self.radical / &norm),
            self.base,
        ))
    }

    /// Exact sign: -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.rational);
        let sb = sign_of(&self.radical);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let q = BigRational::from_integer(BigInt::from(self.base));
        let a2 = &self.rational * &self.rational;
        let b2q = &self.radical * &self.radical * q;
        match a2.cmp(&b2q) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.rational)
            + rational_to_f64(&self.radical) * (self.base as f64).sqrt()
    }
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radical.is_zero() {
            return write!(f, "{}", self.rational);
        }
        let sign = if self.radical.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}√{}", self.rational, sign, self.radical.abs(), self.base)
    }
}

impl FromStr for Surd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let parse_rat = |t: &str| -> Result<BigRational, Error> {
            let t = t.trim();
            let t = t.strip_prefix('+').unwrap_or(t);
            if t.is_empty() {
                return Ok(BigRational::one());
            }
            t.parse::<BigRational>()
                .map_err(|_| Error::Parse(format!("bad rational {t:?} in {s:?}")))
        };
        let Some(root) = s.find('√') else {
            return Ok(Surd::from_rational(parse_rat(s)?));
        };
        let head = &s[..root];
        let base: u64 = s[root + '√'.len_utf8()..]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad radicand in {s:?}")))?;
        // split "a±b" at the last sign that is not leading
        let split = head
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
            .map(|(i, _)| i)
            .last();
        let (a, b) = match split {
            Some(i) => (parse_rat(&head[..i])?, &head[i..]),
            None => (BigRational::zero(), head),
        };
        let b = match b.trim() {
            "-" => -BigRational::one(),
            t if t.starts_with('-') => -parse_rat(&t[1..])?,
            t => parse_rat(t)?,
        };
        let (k, q) = squarefree_split(base);
        Ok(Surd::normalized(a, b * ratio(k as i64, 1), q))
    }
}

/// A coefficient: exact in `ℚ(√q)` or approximate complex.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Surd),
    Approx(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Surd::from_integer(0))
    }

    pub fn one() -> Self {
        Scalar::Exact(Surd::from_integer(1))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(Surd::from_integer(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::Exact(Surd::from_rational(ratio(n, d)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Exact(Surd::from_rational(r))
    }

    pub fn sqrt(n: u64) -> Self {
        Scalar::Exact(Surd::sqrt(n))
    }

    pub fn inv_sqrt(n: u64) -> Self {
        Scalar::Exact(Surd::inv_sqrt(n))
    }

    pub fn approx(z: Complex64) -> Self {
        Scalar::Approx(z)
    }

    pub fn real(x: f64) -> Self {
        Scalar::Approx(Complex64::new(x, 0.0))
    }

    /// `e^{2πi·num/den}`, exact when it is `±1`.
    pub fn root_of_unity(num: i64, den: i64) -> Self {
        let r = num.rem_euclid(den);
        if r == 0 {
            Scalar::one()
        } else if 2 * r == den {
            Scalar::from_int(-1)
        } else {
            let t = 2.0 * std::f64::consts::PI * r as f64 / den as f64;
            Scalar::Approx(Complex64::new(t.cos(), t.sin()))
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Surd> {
        match self {
            Scalar::Exact(s) => Some(s),
            Scalar::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(s) => s.is_zero(),
            Scalar::Approx(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(s) => Complex64::new(s.to_f64(), 0.0),
            Scalar::Approx(z) => *z,
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(s) => Scalar::Exact(s.clone()),
            Scalar::Approx(z) => Scalar::Approx(z.conj()),
        }
    }

    /// `|x|²`.
    pub fn abs_sqr(&self) -> Scalar {
        match self {
            Scalar::Exact(s) => Scalar::Exact(s.checked_mul(s).expect("same base")),
            Scalar::Approx(z) => Scalar::real(z.norm_sqr()),
        }
    }

    pub fn abs(&self) -> f64 {
        self.to_complex().norm()
    }

    /// Promote to the approximate tier.
    pub fn to_approx(&self) -> Scalar {
        Scalar::Approx(self.to_complex())
    }

    pub fn inverse(&self) -> Option<Scalar> {
        match self {
            Scalar::Exact(s) => s.inverse().map(Scalar::Exact),
            Scalar::Approx(z) if z.norm_sqr() > 0.0 => Some(Scalar::Approx(z.inv())),
            Scalar::Approx(_) => None,
        }
    }

    pub fn div(&self, other: &Scalar) -> Option<Scalar> {
        other.inverse().map(|inv| self * &inv)
    }

    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) if a == b => true,
            _ => (self.to_complex() - other.to_complex()).norm() <= tol,
        }
    }

    /// Total order on real parts: exact comparison when both sides are exact
    /// and share a field, floating comparison otherwise.
    pub fn real_cmp(&self, other: &Scalar) -> Ordering {
        if let Scalar::Exact(d) = self - other {
            return d.signum().cmp(&0);
        }
        self.to_complex()
            .re
            .partial_cmp(&other.to_complex().re)
            .unwrap_or(Ordering::Equal)
    }

    /// Exact string `a±b√q` or a decimal rendering.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(s) => write!(f, "{s}"),
            Scalar::Approx(z) if z.im == 0.0 => write!(f, "{:?}", z.re),
            Scalar::Approx(z) => {
                let sign = if z.im < 0.0 { '-' } else { '+' };
                write!(f, "{:?}{}{:?}i", z.re, sign, z.im.abs())
            }
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_complex() == other.to_complex(),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<Complex64> for Scalar {
    fn from(z: Complex64) -> Self {
        Scalar::Approx(z)
    }
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if let (Scalar::Exact(a), Scalar::Exact(b)) = (self, rhs) {
            if let Some(s) = a.checked_add(b) {
                return Scalar::Exact(s);
            }
        }
        Scalar::Approx(self.to_complex() + rhs.to_complex())
    }
}

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if let (Scalar::Exact(a), Scalar::Exact(b)) = (self, rhs) {
            if let Some(s) = a.checked_mul(b) {
                return Scalar::Exact(s);
            }
        }
        Scalar::Approx(self.to_complex() * rhs.to_complex())
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(s) => Scalar::Exact(s.neg()),
            Scalar::Approx(z) => Scalar::Approx(-z),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl AddAssign<Scalar> for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        *self = &*self + &rhs;
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(s) => serializer.serialize_str(&s.to_string()),
            Scalar::Approx(z) if z.im == 0.0 => serializer.serialize_f64(z.re),
            Scalar::Approx(z) => [z.re, z.im].serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScalarVisitor;

        impl<'de> Visitor<'de> for ScalarVisitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an exact string \"a+b√q\", a number, or [re, im]")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                v.parse::<Surd>().map(Scalar::Exact).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
                Ok(Scalar::real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
                Ok(Scalar::real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
                Ok(Scalar::real(v as f64))
            }

            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> Result<Scalar, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                Ok(Scalar::Approx(Complex64::new(re, im)))
            }
        }

        deserializer.deserialize_any(ScalarVisitor)
    }
}
