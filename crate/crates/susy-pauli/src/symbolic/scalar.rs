//! Exact numeric scalars for the operator algebra: elements of Q(i, sqrt 2),
//! stored as (a + b sqrt 2) with Gaussian-rational a, b.
//!
//! sqrt 2 enters only through the 1/sqrt 2 normalization of the supercharges
//! and ladder operators; adjoining it keeps every identity check exact.

use num::rational::Ratio;
use num::{One, Zero};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub(crate) type Rat = Ratio<i128>;

/// `(ar + i ai) + (br + i bi) sqrt 2`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Scalar {
    ar: Rat,
    ai: Rat,
    br: Rat,
    bi: Rat,
}

impl Scalar {
    pub fn zero() -> Self {
        Self {
            ar: Rat::zero(),
            ai: Rat::zero(),
            br: Rat::zero(),
            bi: Rat::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            ar: Rat::one(),
            ..Self::zero()
        }
    }

    pub fn i() -> Self {
        Self {
            ai: Rat::one(),
            ..Self::zero()
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self {
            ar: Rat::from_integer(v as i128),
            ..Self::zero()
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self {
            ar: Rat::new(num as i128, den as i128),
            ..Self::zero()
        }
    }

    /// `num/den * i`.
    pub fn ratio_i(num: i64, den: i64) -> Self {
        Self {
            ai: Rat::new(num as i128, den as i128),
            ..Self::zero()
        }
    }

    pub fn sqrt2() -> Self {
        Self {
            br: Rat::one(),
            ..Self::zero()
        }
    }

    /// `1 / sqrt 2 = sqrt 2 / 2`.
    pub fn inv_sqrt2() -> Self {
        Self {
            br: Rat::new(1, 2),
            ..Self::zero()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ar.is_zero() && self.ai.is_zero() && self.br.is_zero() && self.bi.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self {
            ar: self.ar,
            ai: -self.ai,
            br: self.br,
            bi: -self.bi,
        }
    }

    pub fn eval(&self) -> Complex64 {
        let s = std::f64::consts::SQRT_2;
        Complex64::new(
            rat_f64(self.ar) + s * rat_f64(self.br),
            rat_f64(self.ai) + s * rat_f64(self.bi),
        )
    }
}

fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar {
            ar: self.ar + rhs.ar,
            ai: self.ai + rhs.ai,
            br: self.br + rhs.br,
            bi: self.bi + rhs.bi,
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            ar: -self.ar,
            ai: -self.ai,
            br: -self.br,
            bi: -self.bi,
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        // (a1 + b1 s)(a2 + b2 s) = (a1 a2 + 2 b1 b2) + (a1 b2 + b1 a2) s
        let cmul = |xr: Rat, xi: Rat, yr: Rat, yi: Rat| (xr * yr - xi * yi, xr * yi + xi * yr);
        let (a_r, a_i) = cmul(self.ar, self.ai, rhs.ar, rhs.ai);
        let (bb_r, bb_i) = cmul(self.br, self.bi, rhs.br, rhs.bi);
        let (ab_r, ab_i) = cmul(self.ar, self.ai, rhs.br, rhs.bi);
        let (ba_r, ba_i) = cmul(self.br, self.bi, rhs.ar, rhs.ai);
        let two = Rat::from_integer(2);
        Scalar {
            ar: a_r + two * bb_r,
            ai: a_i + two * bb_i,
            br: ab_r + ba_r,
            bi: ab_i + ba_i,
        }
    }
}

fn fmt_rat(r: Rat, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = 0;
        if !self.ar.is_zero() || (self.ai.is_zero() && self.br.is_zero() && self.bi.is_zero()) {
            fmt_rat(self.ar, f)?;
            parts += 1;
        }
        if !self.ai.is_zero() {
            if parts > 0 {
                write!(f, " + ")?;
            }
            fmt_rat(self.ai, f)?;
            write!(f, "*i")?;
            parts += 1;
        }
        if !self.br.is_zero() || !self.bi.is_zero() {
            if parts > 0 {
                write!(f, " + ")?;
            }
            write!(f, "(")?;
            fmt_rat(self.br, f)?;
            if !self.bi.is_zero() {
                write!(f, " + ")?;
                fmt_rat(self.bi, f)?;
                write!(f, "*i")?;
            }
            write!(f, ")*sqrt2")?;
        }
        Ok(())
    }
}
