//! Scalar rings and fields: arbitrary-precision rationals, the quadratic
//! field Q(sqrt 3), and the traits the matrix and polynomial code is generic over.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Commutative ring with unit, operated on by reference.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// A ring in which every nonzero element is invertible and equality is exact.
pub trait Field: Ring {
    fn inv(&self) -> Result<Self>;

    fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }
}

/// Exact coefficient fields that polynomials may carry.
pub trait Coefficient: Field + 'static {
    fn from_rational(r: Rational) -> Self;
    /// `sqrt3` if the field contains it.
    fn sqrt3() -> Option<Self>;
    /// Sign and magnitude text for rendering; `None` magnitude means unit.
    fn render_parts(&self) -> (bool, Option<String>);
}

impl Ring for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Field for Rational {
    fn inv(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.recip())
        }
    }
}

impl Coefficient for Rational {
    fn from_rational(r: Rational) -> Self {
        r
    }
    fn sqrt3() -> Option<Self> {
        None
    }
    fn render_parts(&self) -> (bool, Option<String>) {
        let mag = self.abs();
        let text = if One::is_one(&mag) { None } else { Some(mag.to_string()) };
        (self.is_negative(), text)
    }
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Element `rat_part + root_part * sqrt(3)` of the quadratic field Q(sqrt 3).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadExt3 {
    pub rat_part: Rational,
    pub root_part: Rational,
}

impl QuadExt3 {
    pub fn new(rat_part: Rational, root_part: Rational) -> Self {
        QuadExt3 { rat_part, root_part }
    }

    pub fn rational(r: Rational) -> Self {
        QuadExt3 { rat_part: r, root_part: Zero::zero() }
    }

    pub fn root3() -> Self {
        QuadExt3 { rat_part: Zero::zero(), root_part: One::one() }
    }

    pub fn is_rational(&self) -> bool {
        Zero::is_zero(&self.root_part)
    }

    /// Field norm `a^2 - 3 b^2`; nonzero for every nonzero element.
    pub fn norm(&self) -> Rational {
        &self.rat_part * &self.rat_part - int(3) * &self.root_part * &self.root_part
    }

    pub fn conjugate(&self) -> Self {
        QuadExt3 { rat_part: self.rat_part.clone(), root_part: -&self.root_part }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.rat_part.to_f64().unwrap_or(f64::NAN)
            + self.root_part.to_f64().unwrap_or(f64::NAN) * 3f64.sqrt()
    }
}

impl Ring for QuadExt3 {
    fn zero() -> Self {
        QuadExt3::rational(Zero::zero())
    }
    fn one() -> Self {
        QuadExt3::rational(One::one())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.rat_part) && Zero::is_zero(&self.root_part)
    }
    fn add(&self, other: &Self) -> Self {
        QuadExt3 {
            rat_part: &self.rat_part + &other.rat_part,
            root_part: &self.root_part + &other.root_part,
        }
    }
    fn sub(&self, other: &Self) -> Self {
        QuadExt3 {
            rat_part: &self.rat_part - &other.rat_part,
            root_part: &self.root_part - &other.root_part,
        }
    }
    fn mul(&self, other: &Self) -> Self {
        if self.is_rational() && other.is_rational() {
            return QuadExt3::rational(&self.rat_part * &other.rat_part);
        }
        // (a + b r)(c + d r) = (ac + 3bd) + (ad + bc) r
        let ac = &self.rat_part * &other.rat_part;
        let bd = &self.root_part * &other.root_part;
        let ad = &self.rat_part * &other.root_part;
        let bc = &self.root_part * &other.rat_part;
        QuadExt3 { rat_part: ac + int(3) * bd, root_part: ad + bc }
    }
    fn neg(&self) -> Self {
        QuadExt3 { rat_part: -&self.rat_part, root_part: -&self.root_part }
    }
}

impl Field for QuadExt3 {
    fn inv(&self) -> Result<Self> {
        if Ring::is_zero(self) {
            return Err(Error::DivisionByZero);
        }
        let norm = self.norm();
        let c = self.conjugate();
        Ok(QuadExt3 { rat_part: c.rat_part / &norm, root_part: c.root_part / norm })
    }
}

impl Coefficient for QuadExt3 {
    fn from_rational(r: Rational) -> Self {
        QuadExt3::rational(r)
    }
    fn sqrt3() -> Option<Self> {
        Some(QuadExt3::root3())
    }
    fn render_parts(&self) -> (bool, Option<String>) {
        if self.is_rational() {
            return self.rat_part.render_parts();
        }
        if Zero::is_zero(&self.rat_part) {
            let (neg, mag) = self.root_part.render_parts();
            let text = match mag {
                None => "sqrt3".to_string(),
                Some(m) => format!("{m} sqrt3"),
            };
            return (neg, Some(text));
        }
        let sign = if self.root_part.is_negative() { '-' } else { '+' };
        let root = match self.root_part.abs() {
            m if One::is_one(&m) => "sqrt3".to_string(),
            m => format!("{m} sqrt3"),
        };
        (false, Some(format!("({} {sign} {root})", self.rat_part)))
    }
}

impl fmt::Display for QuadExt3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.rat_part);
        }
        let (neg, mag) = self.render_parts();
        let body = mag.unwrap_or_else(|| "1".into());
        let body = body.trim_start_matches('(').trim_end_matches(')');
        if neg {
            write!(f, "-{body}")
        } else {
            write!(f, "{body}")
        }
    }
}

macro_rules! forward_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for QuadExt3 {
            type Output = QuadExt3;
            fn $m(self, rhs: QuadExt3) -> QuadExt3 {
                Ring::$m(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a QuadExt3> for &'a QuadExt3 {
            type Output = QuadExt3;
            fn $m(self, rhs: &QuadExt3) -> QuadExt3 {
                Ring::$m(self, rhs)
            }
        }
    )*};
}

forward_ops!(Add add, Sub sub, Mul mul);

impl Neg for QuadExt3 {
    type Output = QuadExt3;
    fn neg(self) -> QuadExt3 {
        Ring::neg(&self)
    }
}

/// The four field operations on Q(sqrt 3), dispatched by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

pub fn field_op(kind: FieldOp, x: &QuadExt3, y: Option<&QuadExt3>) -> Result<QuadExt3> {
    let rhs = || y.ok_or_else(|| Error::Precondition(format!("{kind:?} needs two operands")));
    Ok(match kind {
        FieldOp::Add => Ring::add(x, rhs()?),
        FieldOp::Sub => Ring::sub(x, rhs()?),
        FieldOp::Mul => Ring::mul(x, rhs()?),
        FieldOp::Inv => x.inv()?,
        FieldOp::Neg => Ring::neg(x),
    })
}
