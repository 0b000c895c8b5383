//! Weighted-language generating functions.
//!
//! Letters `c_i` (a successful collection of coupon `i`) carry weight
//! `(1-p)/m` and letters `d_i` (a clumsy loss of type `i`) carry `p/m`.
//! A language's ordinary generating function has `[z^n]` equal to the
//! total weight of its length-`n` words; the exponential one divides that
//! by `n!`.
//!
//! [`combine`] implements the three combinators algebraically. Whether the
//! languages involved really are disjoint, use disjoint letters, or factor
//! uniquely is the caller's obligation and is not checked here.

use std::fmt;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Ogf,
    Egf,
}

impl SeriesKind {
    fn name(self) -> &'static str {
        match self {
            SeriesKind::Ogf => "OGF",
            SeriesKind::Egf => "EGF",
        }
    }
}

/// Power series truncated at `order`, i.e. holding `order + 1` coefficients.
#[derive(Clone, PartialEq)]
pub struct FormalSeries<S> {
    coeffs: Vec<S>,
    kind: SeriesKind,
}

impl<S: Scalar> FormalSeries<S> {
    /// Builds a series from its coefficients; an empty vector is the zero
    /// series of order 0.
    pub fn new(mut coeffs: Vec<S>, kind: SeriesKind) -> Self {
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        FormalSeries { coeffs, kind }
    }

    pub fn zero(order: usize, kind: SeriesKind) -> Self {
        FormalSeries { coeffs: vec![S::zero(); order + 1], kind }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &S {
        &self.coeffs[n]
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.coeffs.truncate(order + 1);
        self
    }

    /// Reinterprets the weights: `[z^n]` of the OGF is `n!` times that of
    /// the EGF.
    pub fn to_kind(&self, kind: SeriesKind) -> Self {
        if kind == self.kind {
            return self.clone();
        }
        let mut fact = S::one();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if n > 0 {
                    fact = fact.clone() * S::from_u64(n as u64);
                }
                match kind {
                    SeriesKind::Ogf => c.clone() * fact.clone(),
                    SeriesKind::Egf => c.clone() / fact.clone(),
                }
            })
            .collect();
        FormalSeries { coeffs, kind }
    }

    /// Evaluates the truncated polynomial at `x` (Horner, in f64).
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    /// Series quotient `self / den`; requires a nonzero constant term in `den`.
    pub fn divide(&self, den: &FormalSeries<S>) -> Result<Self> {
        if den.coeffs[0].is_zero() {
            return Err(Error::InvalidParams("series divisor has zero constant term".into()));
        }
        let order = self.order().min(den.order());
        let coeffs = series_quotient(&self.coeffs[..=order], &den.coeffs, order);
        Ok(FormalSeries { coeffs, kind: self.kind })
    }
}

impl<S: Scalar> fmt::Debug for FormalSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.kind.name())?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c.render())?;
        }
        write!(f, "]")
    }
}

/// `[z^n] num/den` for `n <= order`. `den[0]` must be nonzero.
fn series_quotient<S: Scalar>(num: &[S], den: &[S], order: usize) -> Vec<S> {
    let d0 = den[0].clone();
    let mut out: Vec<S> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut acc = num.get(n).cloned().unwrap_or_else(S::zero);
        let upto = n.min(den.len() - 1);
        for k in 1..=upto {
            if !den[k].is_zero() {
                acc = acc - den[k].clone() * out[n - k].clone();
            }
        }
        out.push(acc / d0.clone());
    }
    out
}

fn poly_mul<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// A generating function kept as an unreduced polynomial ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalGF<S> {
    numerator: Vec<S>,
    denominator: Vec<S>,
}

impl<S: Scalar> RationalGF<S> {
    pub fn new(numerator: Vec<S>, denominator: Vec<S>) -> Result<Self> {
        match denominator.first() {
            Some(d0) if !d0.is_zero() => Ok(RationalGF { numerator, denominator }),
            _ => Err(Error::InvalidParams(
                "denominator must have a nonzero constant term".into(),
            )),
        }
    }

    pub fn numerator(&self) -> &[S] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[S] {
        &self.denominator
    }

    /// Series expansion as an OGF truncated at `order`.
    pub fn expand(&self, order: usize) -> FormalSeries<S> {
        FormalSeries {
            coeffs: series_quotient(&self.numerator, &self.denominator, order),
            kind: SeriesKind::Ogf,
        }
    }

    /// Pointwise value of the ratio at real `x`.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let horner = |p: &[S]| p.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64());
        horner(&self.numerator) / horner(&self.denominator)
    }
}

/// `e_k(x) = Σ_{l=0}^{k} x^l / l!`, with `e_{-1} = 0`.
pub fn partial_exponential<S: Scalar>(k: i64, x: &S) -> Result<S> {
    if k < -1 {
        return Err(Error::OutOfRange(format!("partial exponential index {k} < -1")));
    }
    let mut sum = S::zero();
    let mut term = S::one();
    for l in 0..=k {
        if l > 0 {
            term = term * x.clone() / S::from_u64(l as u64);
        }
        sum = sum + term.clone();
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LetterClass {
    Collect,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// words `x^0 … x^{k-1}`
    Below,
    /// words `x^k, x^{k+1}, …`
    AtOrAbove,
}

/// One of the primitive languages `c_i^{<k}`, `c_i^{>=k}`, `d_i^{<k}`, `d_i^{>=k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveLangSpec {
    pub letter_class: LetterClass,
    pub params: ModelParams,
    pub threshold: u64,
    pub direction: Direction,
}

/// EGF of a primitive language truncated at `order`: a partial (or tail of
/// the) exponential series in `r z` with letter weight `r`.
pub fn primitive_egf<S: Scalar>(spec: &PrimitiveLangSpec, order: usize) -> Result<FormalSeries<S>> {
    let p = spec.params.p_as::<S>()?;
    let m = S::from_u64(spec.params.m() as u64);
    let rate = match spec.letter_class {
        LetterClass::Collect => (S::one() - p) / m,
        LetterClass::Drop => p / m,
    };
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut term = S::one();
    for n in 0..=order {
        if n > 0 {
            term = term * rate.clone() / S::from_u64(n as u64);
        }
        let inside = match spec.direction {
            Direction::Below => (n as u64) < spec.threshold,
            Direction::AtOrAbove => (n as u64) >= spec.threshold,
        };
        coeffs.push(if inside { term.clone() } else { S::zero() });
    }
    Ok(FormalSeries { coeffs, kind: SeriesKind::Egf })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combinator {
    /// interleavings of words over disjoint letters: EGF product
    Shuffle,
    /// uniquely factorable concatenation: OGF product
    Concat,
    /// disjoint union: coefficientwise sum
    Union,
}

/// Applies a combinator to two series. The result has the smaller order.
pub fn combine<S: Scalar>(
    op: Combinator,
    a: &FormalSeries<S>,
    b: &FormalSeries<S>,
) -> Result<FormalSeries<S>> {
    let mismatch = |expected: &'static str, name: &'static str| Error::KindMismatch {
        op: name,
        expected,
        left: a.kind.name(),
        right: b.kind.name(),
    };
    let order = a.order().min(b.order());
    match op {
        Combinator::Shuffle | Combinator::Concat => {
            let (want, name) = if op == Combinator::Shuffle {
                (SeriesKind::Egf, "shuffle")
            } else {
                (SeriesKind::Ogf, "concat")
            };
            if a.kind != want || b.kind != want {
                return Err(mismatch(want.name(), name));
            }
            // EGF coefficients already carry the 1/n!, so both products are
            // plain Cauchy products of the stored coefficients.
            let coeffs = (0..=order)
                .map(|n| {
                    (0..=n).fold(S::zero(), |acc, k| {
                        acc + a.coeffs[k].clone() * b.coeffs[n - k].clone()
                    })
                })
                .collect();
            Ok(FormalSeries { coeffs, kind: want })
        }
        Combinator::Union => {
            if a.kind != b.kind {
                return Err(mismatch("matching kinds", "union"));
            }
            let coeffs = (0..=order)
                .map(|n| a.coeffs[n].clone() + b.coeffs[n].clone())
                .collect();
            Ok(FormalSeries { coeffs, kind: a.kind })
        }
    }
}

/// Borel-to-ordinary transform `∫₀^∞ φ̂(x t) e^{-t} dt` for `0 < x < 1`.
///
/// Uses `0 <= φ̂(u) <= e^u` to truncate at `T*` where the neglected tail
/// `e^{-(1-x)T*}/(1-x)` is below `rel_tol/10` of the running estimate, then
/// integrates `[0, T*]` with tanh-sinh.
pub fn laplace_borel<F>(egf_eval: F, x: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfRange(format!("Laplace-Borel point x = {x} must lie in (0, 1)")));
    }
    let decay = 1.0 - x;
    let integrand = |t: f64| egf_eval(x * t) * (-t).exp();
    let mut t_star = (10.0 / rel_tol).ln() / decay;
    for _ in 0..8 {
        let q = quad::integrate(&integrand, 0.0, t_star, rel_tol / 4.0)?;
        let tail = (-decay * t_star).exp() / decay;
        if tail <= 0.1 * rel_tol * q.value.abs() || q.value == 0.0 && tail < 1e-300 {
            return Ok(q.value);
        }
        // the tail bound is relative to the value; push T* out until it is
        let need = (10.0 / (rel_tol * q.value.abs().max(1e-300) * decay)).ln() / decay;
        t_star = need.max(t_star * 1.25);
    }
    Err(Error::Quadrature { estimate: f64::NAN, error_estimate: f64::NAN })
}

/// `φ_H(z) = (1-p)^m m! z^m / Π_{j=1}^m (m - j z)`.
pub fn ogf_h<S: Scalar>(params: &ModelParams) -> Result<RationalGF<S>> {
    let m = params.m() as usize;
    let q = S::one() - params.p_as::<S>()?;
    let mut factorial = S::one();
    for j in 2..=m {
        factorial = factorial * S::from_u64(j as u64);
    }
    let mut numerator = vec![S::zero(); m + 1];
    numerator[m] = q.powu(m as u64) * factorial;
    Ok(RationalGF::new(numerator, falling_denominator::<S>(m, 1))?)
}

/// `φ_G(z)` over the common denominator `Π_{k=1}^m (m - k z)`: numerator
/// `Σ_l m^{(l)} (1-p)^l z^l Π_{k=l+1}^m (m - k z)`.
pub fn ogf_g<S: Scalar>(params: &ModelParams) -> Result<RationalGF<S>> {
    let m = params.m() as usize;
    let q = S::one() - params.p_as::<S>()?;
    let mut numerator = vec![S::zero(); m + 1];
    let mut falling = S::one(); // m (m-1) … (m-l+1)
    let mut q_pow = S::one();
    for l in 0..=m {
        if l > 0 {
            falling = falling * S::from_u64((m - l + 1) as u64);
            q_pow = q_pow * q.clone();
        }
        let tail = falling_denominator::<S>(m, l + 1);
        let coef = falling.clone() * q_pow.clone();
        for (i, c) in tail.iter().enumerate() {
            numerator[l + i] = numerator[l + i].clone() + coef.clone() * c.clone();
        }
    }
    Ok(RationalGF::new(numerator, falling_denominator::<S>(m, 1))?)
}

/// Π_{k=from}^{m} (m - k z) as a coefficient list.
fn falling_denominator<S: Scalar>(m: usize, from: usize) -> Vec<S> {
    let mm = S::from_u64(m as u64);
    let mut poly = vec![S::one()];
    for k in from..=m {
        poly = poly_mul(&poly, &[mm.clone(), -S::from_u64(k as u64)]);
    }
    poly
}

/// Analytic EGF of `H`: `(1-p)^m (e^{u/m} - 1)^m`.
pub fn egf_h(params: &ModelParams, u: f64) -> f64 {
    let m = params.m() as f64;
    let q = 1.0 - params.p();
    (q * (u / m).exp_m1()).powf(m)
}

/// Analytic EGF of `G`: `[(1-p)(e^{u/m} - 1) + 1]^m`.
pub fn egf_g(params: &ModelParams, u: f64) -> f64 {
    let m = params.m() as f64;
    let q = 1.0 - params.p();
    (q * (u / m).exp_m1() + 1.0).powf(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dd;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn partial_exponential_examples() {
        assert_eq!(partial_exponential(-1, &q(5, 1)).unwrap(), q(0, 1));
        assert_eq!(partial_exponential(0, &q(3, 1)).unwrap(), q(1, 1));
        assert_eq!(partial_exponential(2, &q(1, 1)).unwrap(), q(5, 2));
        assert!(partial_exponential(-2, &q(1, 1)).is_err());
    }

    fn spec(class: LetterClass, m: u32, p: (i64, i64), k: u64, dir: Direction) -> PrimitiveLangSpec {
        PrimitiveLangSpec {
            letter_class: class,
            params: ModelParams::exact(m, p.0, p.1).unwrap(),
            threshold: k,
            direction: dir,
        }
    }

    #[test]
    fn primitive_egf_examples() {
        let s = spec(LetterClass::Collect, 1, (0, 1), 0, Direction::AtOrAbove);
        let e: FormalSeries<Q> = primitive_egf(&s, 3).unwrap();
        assert_eq!(e.coeffs(), &[q(1, 1), q(1, 1), q(1, 2), q(1, 6)]);

        let s = spec(LetterClass::Drop, 2, (1, 2), 1, Direction::AtOrAbove);
        let e: FormalSeries<Q> = primitive_egf(&s, 2).unwrap();
        assert_eq!(e.coeffs(), &[q(0, 1), q(1, 4), q(1, 32)]);

        let s = spec(LetterClass::Collect, 3, (1, 3), 1, Direction::Below);
        let e: FormalSeries<Q> = primitive_egf(&s, 2).unwrap();
        assert_eq!(e.coeffs(), &[q(1, 1), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn primitive_egf_rejects_float_p_in_exact_mode() {
        let s = PrimitiveLangSpec {
            letter_class: LetterClass::Drop,
            params: ModelParams::float(2, 0.5).unwrap(),
            threshold: 0,
            direction: Direction::AtOrAbove,
        };
        assert!(primitive_egf::<Q>(&s, 2).is_err());
        assert!(primitive_egf::<Dd>(&s, 2).is_ok());
    }

    #[test]
    fn shuffle_of_two_words_counts_interleavings() {
        // {be} and {dog} over a uniform five-letter alphabet
        let fifth = q(1, 5);
        let mut a = vec![q(0, 1); 6];
        a[2] = fifth.powu(2) / q(2, 1);
        let mut b = vec![q(0, 1); 6];
        b[3] = fifth.powu(3) / q(6, 1);
        let a = FormalSeries::new(a, SeriesKind::Egf);
        let b = FormalSeries::new(b, SeriesKind::Egf);
        let s = combine(Combinator::Shuffle, &a, &b).unwrap().to_kind(SeriesKind::Ogf);
        assert_eq!(s.coeff(5), &(q(10, 1) * fifth.powu(5)));
    }

    #[test]
    fn union_identity_and_concat_square() {
        let a = FormalSeries::new(vec![q(1, 3), q(2, 7), q(0, 1)], SeriesKind::Ogf);
        let z = FormalSeries::zero(2, SeriesKind::Ogf);
        assert_eq!(combine(Combinator::Union, &a, &z).unwrap(), a);

        let letter = FormalSeries::new(vec![q(0, 1), q(1, 4), q(0, 1), q(0, 1)], SeriesKind::Ogf);
        let sq = combine(Combinator::Concat, &letter, &letter).unwrap();
        assert_eq!(sq.coeffs(), &[q(0, 1), q(0, 1), q(1, 16), q(0, 1)]);
    }

    #[test]
    fn combine_kind_errors_and_order() {
        let o = FormalSeries::new(vec![q(1, 1); 4], SeriesKind::Ogf);
        let e = FormalSeries::new(vec![q(1, 1); 3], SeriesKind::Egf);
        assert!(matches!(
            combine(Combinator::Shuffle, &o, &e),
            Err(Error::KindMismatch { .. })
        ));
        assert!(combine(Combinator::Concat, &e, &e).is_err());
        assert!(combine(Combinator::Union, &o, &e).is_err());
        let u = combine(Combinator::Union, &o, &o.clone().truncate(1)).unwrap();
        assert_eq!(u.order(), 1);
    }

    #[test]
    fn laplace_borel_examples() {
        let v = laplace_borel(|u| (u / 2.0).exp(), 0.5, 1e-10).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-10 * 4.0 / 3.0);
        let v = laplace_borel(|_| 1.0, 0.3, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        // (e^{u/3} - 1)^3 at x = 0.4 against 1/binom(6.5, 3)
        let v = laplace_borel(|u| (u / 3.0).exp_m1().powi(3), 0.4, 1e-10).unwrap();
        let binom = 6.5 * 5.5 * 4.5 / 6.0;
        assert!((v - 1.0 / binom).abs() < 1e-9 / binom, "{v} vs {}", 1.0 / binom);
        assert!(laplace_borel(|_| 1.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn ogf_h_small_cases() {
        let h: RationalGF<Q> = ogf_h(&ModelParams::exact(1, 1, 3).unwrap()).unwrap();
        assert_eq!(h.numerator(), &[q(0, 1), q(2, 3)]);
        assert_eq!(h.denominator(), &[q(1, 1), q(-1, 1)]);

        let h: RationalGF<Q> = ogf_h(&ModelParams::exact(1, 0, 1).unwrap()).unwrap();
        assert_eq!(h.expand(4).coeffs(), &[q(0, 1), q(1, 1), q(1, 1), q(1, 1), q(1, 1)]);

        // 2z² / ((2 - z)(2 - 2z))
        let h: RationalGF<Q> = ogf_h(&ModelParams::exact(2, 0, 1).unwrap()).unwrap();
        assert_eq!(h.numerator(), &[q(0, 1), q(0, 1), q(2, 1)]);
        assert_eq!(h.denominator(), &[q(4, 1), q(-6, 1), q(2, 1)]);
    }

    #[test]
    fn ogf_g_small_cases() {
        let g: RationalGF<Q> = ogf_g(&ModelParams::exact(1, 1, 4).unwrap()).unwrap();
        // (1 - p z)/(1 - z)
        assert_eq!(g.numerator(), &[q(1, 1), q(-1, 4)]);
        assert_eq!(g.denominator(), &[q(1, 1), q(-1, 1)]);

        let g: RationalGF<Q> = ogf_g(&ModelParams::exact(1, 0, 1).unwrap()).unwrap();
        assert_eq!(g.expand(3).coeffs(), vec![q(1, 1); 4].as_slice());

        for m in 1..=5 {
            let g: RationalGF<Q> = ogf_g(&ModelParams::exact(m, 2, 7).unwrap()).unwrap();
            assert_eq!(g.expand(0).coeffs()[0], q(1, 1));
        }
    }

    #[test]
    fn rational_gf_needs_nonzero_constant() {
        assert!(RationalGF::<Q>::new(vec![q(1, 1)], vec![q(0, 1), q(1, 1)]).is_err());
        assert!(RationalGF::<Q>::new(vec![q(1, 1)], vec![]).is_err());
    }

    #[test]
    fn egf_kind_conversion_round_trip() {
        let s = FormalSeries::new(vec![q(1, 1), q(2, 1), q(3, 1), q(4, 1)], SeriesKind::Ogf);
        let e = s.to_kind(SeriesKind::Egf);
        assert_eq!(e.coeffs(), &[q(1, 1), q(2, 1), q(3, 2), q(2, 3)]);
        assert_eq!(e.to_kind(SeriesKind::Ogf), s);
    }
}
