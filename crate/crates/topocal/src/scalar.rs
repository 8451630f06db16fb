//! Scalar tower: f64, complex f64, exact rationals and exact Gaussian rationals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type C64 = Complex<f64>;
pub type Q = BigRational;
pub type CQ = Complex<BigRational>;

/// Field operations shared by every coefficient type.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const COMPLEX: bool;
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    /// `num / den` (exact for rationals).
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact binary value for rationals.
    fn from_f64(x: f64) -> Self;
    /// `None` when the imaginary part cannot be represented.
    fn from_c64(z: C64) -> Option<Self>;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> C64;

    fn abs2(&self) -> f64 {
        self.to_c64().norm_sqr()
    }

    /// Magnitude used for pivoting; exact types only need nonzero detection.
    fn magnitude(&self) -> f64 {
        self.abs2().sqrt()
    }
}

/// Scalars that contain the imaginary unit.
pub trait ComplexScalar: Scalar {
    fn imag_unit() -> Self;
    fn from_parts(re: Self, im: Self) -> Self;
    fn re_part(&self) -> Self;
    fn im_part(&self) -> Self;

    fn mul_i(&self) -> Self {
        self.clone() * Self::imag_unit()
    }
}

fn q_from_f64(x: f64) -> Q {
    BigRational::from_float(x).unwrap_or_else(<BigRational as Zero>::zero)
}

fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // very large numerators: scale down
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl Scalar for f64 {
    const COMPLEX: bool = false;
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_c64(z: C64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }
    fn conj(&self) -> Self {
        *self
    }
    fn to_c64(&self) -> C64 {
        C64::new(*self, 0.0)
    }
    fn abs2(&self) -> f64 {
        self * self
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    const COMPLEX: bool = true;
    const EXACT: bool = false;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        C64::new(num as f64 / den as f64, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn from_c64(z: C64) -> Option<Self> {
        Some(z)
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn abs2(&self) -> f64 {
        self.norm_sqr()
    }
}

impl ComplexScalar for C64 {
    fn imag_unit() -> Self {
        C64::new(0.0, 1.0)
    }
    fn from_parts(re: Self, im: Self) -> Self {
        re + im * C64::new(0.0, 1.0)
    }
    fn re_part(&self) -> Self {
        C64::new(self.re, 0.0)
    }
    fn im_part(&self) -> Self {
        C64::new(self.im, 0.0)
    }
    fn mul_i(&self) -> Self {
        C64::new(-self.im, self.re)
    }
}

impl Scalar for Q {
    const COMPLEX: bool = false;
    const EXACT: bool = true;
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Self {
        q_from_f64(x)
    }
    fn from_c64(z: C64) -> Option<Self> {
        (z.im == 0.0).then(|| q_from_f64(z.re))
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn to_c64(&self) -> C64 {
        C64::new(q_to_f64(self), 0.0)
    }
    fn magnitude(&self) -> f64 {
        q_to_f64(&self.abs())
    }
}

impl Scalar for CQ {
    const COMPLEX: bool = true;
    const EXACT: bool = true;
    fn zero() -> Self {
        Complex::new(<Q as Zero>::zero(), <Q as Zero>::zero())
    }
    fn one() -> Self {
        Complex::new(<Q as One>::one(), <Q as Zero>::zero())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn from_i64(n: i64) -> Self {
        Complex::new(<Q as Scalar>::from_i64(n), <Q as Zero>::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(<Q as Scalar>::from_ratio(num, den), <Q as Zero>::zero())
    }
    fn from_f64(x: f64) -> Self {
        Complex::new(q_from_f64(x), <Q as Zero>::zero())
    }
    fn from_c64(z: C64) -> Option<Self> {
        Some(Complex::new(q_from_f64(z.re), q_from_f64(z.im)))
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn to_c64(&self) -> C64 {
        C64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }
}

impl ComplexScalar for CQ {
    fn imag_unit() -> Self {
        Complex::new(<Q as Zero>::zero(), <Q as One>::one())
    }
    fn from_parts(re: Self, im: Self) -> Self {
        re + im * Self::imag_unit()
    }
    fn re_part(&self) -> Self {
        Complex::new(self.re.clone(), <Q as Zero>::zero())
    }
    fn im_part(&self) -> Self {
        Complex::new(self.im.clone(), <Q as Zero>::zero())
    }
    fn mul_i(&self) -> Self {
        Complex::new(-self.im.clone(), self.re.clone())
    }
}

/// Real scalars and their complexification.
pub trait RealScalar: Scalar {
    type Cx: ComplexScalar;
    fn complexify(&self) -> Self::Cx;
}

impl RealScalar for f64 {
    type Cx = C64;
    fn complexify(&self) -> C64 {
        C64::new(*self, 0.0)
    }
}

impl RealScalar for Q {
    type Cx = CQ;
    fn complexify(&self) -> CQ {
        Complex::new(self.clone(), <Q as Zero>::zero())
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}
