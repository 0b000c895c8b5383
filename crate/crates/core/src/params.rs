use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{ratio_to_f64, Scalar};

/// Largest `m` for which exact rational arithmetic is offered.
pub const EXACT_MAX_M: u32 = 64;

/// Clumsiness probability, either as an exact rational or a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Clumsiness {
    Exact(BigRational),
    Float(f64),
}

impl Clumsiness {
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParams("zero denominator".into()));
        }
        Ok(Clumsiness::Exact(BigRational::new(num.into(), den.into())))
    }

    pub fn value(&self) -> f64 {
        match self {
            Clumsiness::Exact(r) => ratio_to_f64(r),
            Clumsiness::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Clumsiness::Exact(_))
    }

    fn check(&self) -> Result<()> {
        let ok = match self {
            Clumsiness::Exact(r) => !Signed::is_negative(r) && *r < BigRational::from_integer(1.into()),
            Clumsiness::Float(x) => x.is_finite() && *x >= 0.0 && *x < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("clumsiness p = {self} must lie in [0, 1)")))
        }
    }
}

impl fmt::Display for Clumsiness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clumsiness::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Clumsiness::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Parses `"a/b"` as an exact rational and anything else as a decimal float.
impl FromStr for Clumsiness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num: BigInt = a
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad numerator in {s:?}")))?;
            let den: BigInt = b
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad denominator in {s:?}")))?;
            if den.is_zero() {
                return Err(Error::InvalidParams("zero denominator".into()));
            }
            Ok(Clumsiness::Exact(BigRational::new(num, den)))
        } else {
            let x: f64 = s
                .parse()
                .map_err(|_| Error::InvalidParams(format!("cannot parse p from {s:?}")))?;
            Ok(Clumsiness::Float(x))
        }
    }
}

/// Number of coupon types `m` and clumsiness probability `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    m: u32,
    p: Clumsiness,
}

impl ModelParams {
    pub fn new(m: u32, p: Clumsiness) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        p.check()?;
        Ok(ModelParams { m, p })
    }

    /// Float-mode parameters.
    pub fn float(m: u32, p: f64) -> Result<Self> {
        Self::new(m, Clumsiness::Float(p))
    }

    /// Exact-mode parameters with `p = num/den`.
    pub fn exact(m: u32, num: i64, den: i64) -> Result<Self> {
        Self::new(m, Clumsiness::ratio(num, den)?)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p.value()
    }

    pub fn clumsiness(&self) -> &Clumsiness {
        &self.p
    }

    pub fn is_exact(&self) -> bool {
        self.p.is_exact()
    }

    /// Whether rational arithmetic is available: exact `p` and `m <= 64`.
    pub fn exact_capable(&self) -> bool {
        self.p.is_exact() && self.m <= EXACT_MAX_M
    }

    /// `p` in the scalar domain `S`. Exact mode refuses a float `p`.
    pub fn p_as<S: Scalar>(&self) -> Result<S> {
        match &self.p {
            Clumsiness::Exact(r) => Ok(S::from_ratio(r)),
            Clumsiness::Float(x) if !S::EXACT => Ok(S::from_f64(*x)),
            Clumsiness::Float(x) => Err(Error::InvalidParams(format!(
                "exact arithmetic needs a rational p, got {x}"
            ))),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.p() == 0.0
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} p={}", self.m, self.p)
    }
}
