//! Coefficient domains for series and exact quantities.
//!
//! Two modes are provided: [`BigRational`] for bit-exact arithmetic and
//! [`Dd`], a double-double float carrying roughly 106 bits of mantissa.
//! Code that is generic over [`Scalar`] never mixes the two.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic domain used for series coefficients, pmf entries and exact
/// moments.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// `true` for the exact rational mode.
    const EXACT: bool;
    /// Short tag echoed in CLI headers and reports.
    const MODE: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(n: u64) -> Self;
    fn from_ratio(num: &BigRational) -> Self;
    /// Float mode accepts any finite value; exact mode converts the binary
    /// value exactly.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    /// Serialized form: `a/b` for rationals, round-trip decimal otherwise.
    fn render(&self) -> String;

    fn from_i64(n: i64) -> Self {
        if n < 0 {
            -Self::from_u64(n.unsigned_abs())
        } else {
            Self::from_u64(n as u64)
        }
    }

    fn powu(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const MODE: &'static str = "exact";

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: &BigRational) -> Self {
        num.clone()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Converts a rational to the nearest-ish f64, tolerating numerators and
/// denominators far outside the f64 range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    // keep ~60 significant bits of each before converting
    let ns = (nb - 60).max(0);
    let ds = (db - 60).max(0);
    let n = (r.numer() >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> ds as usize).to_f64().unwrap_or(1.0);
    let e = (ns - ds) as i32;
    (n / d) * 2f64.powi(e)
}

/// Double-double number: the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        if !h.is_finite() {
            return Dd { hi: h, lo: 0.0 };
        }
        Dd { hi: h, lo: l }
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hi + self.lo)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        Dd::renorm(s, e)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        Dd::renorm(p, e)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd::new(q1);
        }
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l } + Dd::new(q3)
    }
}

impl Scalar for Dd {
    const EXACT: bool = false;
    const MODE: &'static str = "float";

    fn zero() -> Self {
        Dd::new(0.0)
    }
    fn one() -> Self {
        Dd::new(1.0)
    }
    fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Dd::renorm(hi, lo)
    }
    fn from_ratio(r: &BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n.unsigned_abs() < (1 << 62) && d < (1 << 62) => {
                Dd::from_i64(n) / Dd::from_i64(d)
            }
            _ => Dd::new(ratio_to_f64(r)),
        }
    }
    fn from_f64(x: f64) -> Self {
        Dd::new(x)
    }
    fn to_f64(&self) -> f64 {
        self.hi + self.lo
    }
    fn is_finite(&self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
    fn is_negative(&self) -> bool {
        self.hi < 0.0
    }
    fn render(&self) -> String {
        format!("{}", self.to_f64())
    }
}
