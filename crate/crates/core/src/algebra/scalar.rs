//! The coefficient field Q(√2).
//!
//! Every matrix entry in the crate has coefficients of the form `r + s·√2`
//! with `r, s` rational. Only the diagonalizer actually needs the `s` part.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use super::rational::{int, rat, to_f64, Rational};
use crate::error::{Error, Result};

/// An element `r + s·√2` of Q(√2).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    r: Rational,
    s: Rational,
}

impl Scalar {
    pub fn new(r: Rational, s: Rational) -> Self {
        Scalar { r, s }
    }

    pub fn rational(r: Rational) -> Self {
        Scalar {
            r,
            s: Rational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(rat(num, den))
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(int(n))
    }

    /// `√2` itself.
    pub fn sqrt2() -> Self {
        Scalar {
            r: Rational::zero(),
            s: Rational::one(),
        }
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Scalar {
            r: Rational::zero(),
            s: rat(1, 2),
        }
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn s(&self) -> &Rational {
        &self.s
    }

    pub fn is_rational(&self) -> bool {
        self.s.is_zero()
    }

    /// The Galois conjugate `r − s·√2`.
    pub fn conj(&self) -> Self {
        Scalar {
            r: self.r.clone(),
            s: -self.s.clone(),
        }
    }

    /// The field norm `r² − 2s²`, zero only for the zero element.
    pub fn norm(&self) -> Rational {
        &self.r * &self.r - int(2) * &self.s * &self.s
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let c = self.conj();
        Ok(Scalar {
            r: c.r / &n,
            s: c.s / n,
        })
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.r) + to_f64(&self.s) * std::f64::consts::SQRT_2
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::default()
    }

    fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::rational(Rational::one())
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::rational(r)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar {
            r: &self.r + &rhs.r,
            s: &self.s + &rhs.s,
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar {
            r: &self.r - &rhs.r,
            s: &self.s - &rhs.s,
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
    fn mul(self, rhs: &Scalar) -> Scalar {
        let two_bd = int(2) * (&self.s * &rhs.s);
        Scalar {
            r: &self.r * &rhs.r + two_bd,
            s: &self.r * &rhs.s + &self.s * &rhs.r,
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            r: -self.r.clone(),
            s: -self.s.clone(),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            r: -self.r,
            s: -self.s,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $assign_tr<&Scalar> for Scalar {
            fn $assign(&mut self, rhs: &Scalar) {
                *self = (&*self).$method(rhs);
            }
        }
    };
}

forward_owned!(Add, add, AddAssign, add_assign);
forward_owned!(Sub, sub, SubAssign, sub_assign);
forward_owned!(Mul, mul, MulAssign, mul_assign);

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.r.is_zero(), self.s.is_zero()) {
            (_, true) => write!(f, "{}", self.r),
            (true, false) => write!(f, "{}√2", self.s),
            (false, false) => write!(f, "({} + {}√2)", self.r, self.s),
        }
    }
}
