//! Exact finite-`m` quantities of the collection time `T`.
//!
//! The pmf comes from two independent routes: a birth–death dynamic program
//! on the number of non-empty urns ([`pmf_markov`], the production path) and
//! series division of the `H` and `G` generating functions ([`pmf_series`]).

use num_rational::BigRational;

use crate::asymptotics::{i_extra, l_fn, n_fn};
use crate::error::{Error, Result};
use crate::langgf::{ogf_g, ogf_h, RationalGF};
use crate::params::ModelParams;
use crate::quad;
use crate::scalar::{Dd, Scalar};
use crate::special::{binom_shifted, compensated_sum, harmonic, harmonic2, ln_binom};

/// How a [`Pmf`]'s tail certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// `(1-q)^{⌈(n_max+1-m)/m⌉}` with `q = ((1-p)/m)^m`: every block of `m`
    /// days completes the collection with probability at least `q`.
    Geometric,
    /// The residual mass itself, used when the geometric bound is useless.
    Residual,
}

/// Truncated law of `T`: `probs[n] = P(T = n)` for `n <= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<S> {
    pub probs: Vec<S>,
    pub n_max: usize,
    /// `1 - Σ probs`, i.e. `P(T > n_max)`.
    pub tail_mass: S,
    /// Upper bound on `P(T > n_max)`.
    pub tail_certificate: S,
    pub certificate: Certificate,
    pub m: u32,
}

impl<S: Scalar> Pmf<S> {
    pub fn mode(&self) -> &'static str {
        S::MODE
    }

    /// `P(T <= n)` for `n <= n_max`.
    pub fn cdf(&self, n: usize) -> S {
        self.probs[..=n.min(self.n_max)]
            .iter()
            .fold(S::zero(), |acc, p| acc + p.clone())
    }

    /// `Σ n P(T=n)` and `Σ n² P(T=n)` over the stored range.
    pub fn partial_moments(&self) -> (S, S) {
        let mut first = S::zero();
        let mut second = S::zero();
        for (n, p) in self.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let n = S::from_u64(n as u64);
            first = first + n.clone() * p.clone();
            second = second + n.clone() * n * p.clone();
        }
        (first, second)
    }
}

fn check_n_max(params: &ModelParams, n_max: usize) -> Result<()> {
    if n_max < params.m() as usize {
        return Err(Error::OutOfRange(format!(
            "n_max = {n_max} must be at least m = {}",
            params.m()
        )));
    }
    Ok(())
}

/// `q = ((1-p)/m)^m`, the per-block completion probability.
fn block_probability<S: Scalar>(params: &ModelParams) -> Result<S> {
    let m = params.m() as u64;
    let q = (S::one() - params.p_as::<S>()?) / S::from_u64(m);
    Ok(q.powu(m))
}

/// Geometric tail bound `P(T > n_max) <= (1-q)^{⌈(n_max+1-m)/m⌉}`.
pub fn geometric_certificate<S: Scalar>(params: &ModelParams, n_max: usize) -> Result<S> {
    let m = params.m() as usize;
    let q = block_probability::<S>(params)?;
    let e = if n_max + 1 <= m { 0 } else { (n_max + 1 - m).div_ceil(m) };
    Ok((S::one() - q).powu(e as u64))
}

fn certify<S: Scalar>(params: &ModelParams, n_max: usize, tail_mass: &S) -> Result<(S, Certificate)> {
    let bound = geometric_certificate::<S>(params, n_max)?;
    if bound.to_f64() >= 1.0 - 1e-6 && tail_mass.to_f64() <= bound.to_f64() {
        Ok((tail_mass.clone(), Certificate::Residual))
    } else {
        Ok((bound, Certificate::Geometric))
    }
}

fn check_finite<S: Scalar>(values: &[S], what: &'static str) -> Result<()> {
    if values.iter().all(Scalar::is_finite) {
        Ok(())
    } else {
        Err(Error::Overflow { quantity: what, log_value: f64::INFINITY })
    }
}

/// Pmf by series division `[z^n] φ_H(z) / φ_G(z)`.
pub fn pmf_series<S: Scalar>(params: &ModelParams, n_max: usize) -> Result<Pmf<S>> {
    check_n_max(params, n_max)?;
    let h = ogf_h::<S>(params)?;
    let g = ogf_g::<S>(params)?;
    // both carry the denominator Π(m - kz), so H/G is the quotient of the
    // numerators: an order-m recurrence instead of a full series division
    let probs = if h.denominator() == g.denominator() {
        RationalGF::new(h.numerator().to_vec(), g.numerator().to_vec())?.expand(n_max).into_coeffs()
    } else {
        h.expand(n_max).divide(&g.expand(n_max))?.into_coeffs()
    };
    check_finite(&probs, "pmf series coefficient")?;
    let tail_mass = probs.iter().fold(S::one(), |acc, p| acc - p.clone());
    let (tail_certificate, certificate) = certify(params, n_max, &tail_mass)?;
    Ok(Pmf { probs, n_max, tail_mass, tail_certificate, certificate, m: params.m() })
}

/// Transition probabilities out of state `k` (number of non-empty urns).
struct Transitions<S> {
    up: Vec<S>,
    down: Vec<S>,
    stay: Vec<S>,
}

fn transitions<S: Scalar>(params: &ModelParams) -> Result<Transitions<S>> {
    let m = params.m() as u64;
    let p = params.p_as::<S>()?;
    let q = S::one() - p.clone();
    let mm = S::from_u64(m);
    let mut up = Vec::with_capacity(m as usize);
    let mut down = Vec::with_capacity(m as usize);
    let mut stay = Vec::with_capacity(m as usize);
    for k in 0..m {
        let filled = S::from_u64(k) / mm.clone();
        let empty = S::from_u64(m - k) / mm.clone();
        up.push(q.clone() * empty.clone());
        down.push(p.clone() * filled.clone());
        stay.push(q.clone() * filled + p.clone() * empty);
    }
    Ok(Transitions { up, down, stay })
}

/// Runs the urn-count chain; calls `emit(n, absorbed_mass)` per step and
/// stops when `emit` returns false. Returns the residual transient mass.
fn run_chain<S: Scalar>(params: &ModelParams, mut emit: impl FnMut(usize, S) -> bool) -> Result<S> {
    let m = params.m() as usize;
    let tr = transitions::<S>(params)?;
    let mut mass = vec![S::zero(); m];
    mass[0] = S::one();
    let mut next = vec![S::zero(); m];
    let mut n = 0usize;
    loop {
        n += 1;
        let absorbed = mass[m - 1].clone() * tr.up[m - 1].clone();
        for k in 0..m {
            let mut v = mass[k].clone() * tr.stay[k].clone();
            if k > 0 {
                v = v + mass[k - 1].clone() * tr.up[k - 1].clone();
            }
            if k + 1 < m {
                v = v + mass[k + 1].clone() * tr.down[k + 1].clone();
            }
            next[k] = v;
        }
        std::mem::swap(&mut mass, &mut next);
        if !emit(n, absorbed) {
            break;
        }
    }
    Ok(mass.into_iter().fold(S::zero(), |acc, x| acc + x))
}

/// Pmf by dynamic programming over the number of non-empty urns.
///
/// From `k < m` non-empty urns the chain moves to `k+1` w.p. `(1-p)(m-k)/m`,
/// to `k-1` w.p. `p k/m`, and stays otherwise; `m` is absorbing.
pub fn pmf_markov<S: Scalar>(params: &ModelParams, n_max: usize) -> Result<Pmf<S>> {
    check_n_max(params, n_max)?;
    let mut probs = Vec::with_capacity(n_max + 1);
    probs.push(S::zero());
    let tail_mass = run_chain::<S>(params, |n, a| {
        probs.push(a);
        n < n_max
    })?;
    check_finite(&probs, "pmf entry")?;
    let (tail_certificate, certificate) = certify(params, n_max, &tail_mass)?;
    Ok(Pmf { probs, n_max, tail_mass, tail_certificate, certificate, m: params.m() })
}

/// Runs the dynamic program until `P(T > n) <= tail_eps` or `n = max_n`.
pub fn pmf_markov_until<S: Scalar>(params: &ModelParams, tail_eps: f64, max_n: usize) -> Result<Pmf<S>> {
    let m = params.m() as usize;
    let max_n = max_n.max(m);
    let mut probs = Vec::new();
    probs.push(S::zero());
    // in S, so tails below f64 epsilon are still resolved in Dd mode
    let mut remaining = S::one();
    let tail_mass = run_chain::<S>(params, |n, a| {
        remaining = remaining.clone() - a.clone();
        probs.push(a);
        n < max_n && (n < m || remaining.to_f64() > tail_eps)
    })?;
    let n_max = probs.len() - 1;
    check_finite(&probs, "pmf entry")?;
    let (tail_certificate, certificate) = certify(params, n_max, &tail_mass)?;
    Ok(Pmf { probs, n_max, tail_mass, tail_certificate, certificate, m: params.m() })
}

/// `P(T > n) = 1 - Σ_{k<=n} P(T=k)`.
pub fn tail_from_pmf<S: Scalar>(pmf: &Pmf<S>, n: usize) -> Result<S> {
    if n > pmf.n_max {
        return Err(Error::OutOfRange(format!("n = {n} exceeds n_max = {}", pmf.n_max)));
    }
    Ok(S::one() - pmf.cdf(n))
}

/// Rigorous bound on `E T - Σ_{n<=n_max} n P(T=n)`.
///
/// The missing part equals `n_max P(T > n_max) + Σ_{k>=n_max} P(T > k)`, and
/// from any state the collection finishes within `m` days w.p. at least `q`,
/// so the second sum is at most `(m/q) P(T > n_max)`.
pub fn truncated_mean_bound(pmf: &Pmf<impl Scalar>, params: &ModelParams) -> f64 {
    let m = params.m() as f64;
    let q = ((1.0 - params.p()) / m).powf(m);
    (pmf.n_max as f64 + m / q) * pmf.tail_certificate.to_f64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    ClosedForm,
    PmfSum,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport<T> {
    pub mean: T,
    pub variance: T,
    pub second_moment: T,
    pub method: MomentMethod,
}

/// Largest `m ln(1/(1-p))` for which the float closed forms stay finite.
const LOG_OVERFLOW: f64 = 700.0;

fn overflow_guard(params: &ModelParams, power: f64, quantity: &'static str, log_value: impl Fn() -> f64) -> Result<()> {
    let m = params.m() as f64;
    if power * m * -(-params.p()).ln_1p() > LOG_OVERFLOW {
        return Err(Error::Overflow { quantity, log_value: log_value() });
    }
    Ok(())
}

/// Natural log of `E T` computed with log-sum-exp; finite even when `E T`
/// is not.
pub fn ln_mean(params: &ModelParams) -> f64 {
    let m = params.m();
    let lq = -(-params.p()).ln_1p();
    let logs: Vec<f64> = (1..=m).map(|l| l as f64 * lq - (l as f64).ln()).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (m as f64).ln() + top + logs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// `E T = m Σ_{l=1}^m 1/(l (1-p)^l)`.
pub fn mean_closed<S: Scalar>(params: &ModelParams) -> Result<S> {
    if !S::EXACT {
        overflow_guard(params, 1.0, "mean", || ln_mean(params))?;
    }
    let m = params.m() as u64;
    let inv_q = S::one() / (S::one() - params.p_as::<S>()?);
    let mut pow = S::one();
    let mut sum = S::zero();
    for l in 1..=m {
        pow = pow * inv_q.clone();
        sum = sum + pow.clone() / S::from_u64(l);
    }
    Ok(S::from_u64(m) * sum)
}

/// Float closed-form mean with compensated summation ascending in `l`.
pub fn mean_closed_f64(params: &ModelParams) -> Result<f64> {
    overflow_guard(params, 1.0, "mean", || ln_mean(params))?;
    let m = params.m();
    let lq = -(-params.p()).ln_1p();
    let s = compensated_sum((1..=m).map(|l| (l as f64 * lq).exp() / l as f64));
    Ok(m as f64 * s)
}

/// `Var T` as the sum of two nonnegative parts,
/// `m² Σ_{i,j} [(1-p)^{-(i+j)} - (1-p)^{-max(i,j)}]/(ij) + Σ_l (m/l)(m/l - 1)(1-p)^{-l}`.
///
/// The double sum is accumulated in `O(m)` as
/// `2 Σ_j (1-p)^{-j} E_{j-1}/j + Σ_i (1-p)^{-i}((1-p)^{-i} - 1)/i²` with
/// `E_k = Σ_{i<=k} ((1-p)^{-i} - 1)/i`; every term is nonnegative.
pub fn variance_closed<S: Scalar>(params: &ModelParams) -> Result<S> {
    if !S::EXACT {
        overflow_guard(params, 2.0, "variance", || 2.0 * ln_mean(params))?;
    }
    let m = params.m() as u64;
    let mm = S::from_u64(m);
    let inv_q = S::one() / (S::one() - params.p_as::<S>()?);
    let mut pow = S::one();
    let mut excess = S::zero(); // E_{l-1}
    let mut first = S::zero();
    let mut second = S::zero();
    for l in 1..=m {
        pow = pow * inv_q.clone();
        let lf = S::from_u64(l);
        let d = pow.clone() - S::one();
        first = first
            + S::from_u64(2) * pow.clone() * excess.clone() / lf.clone()
            + pow.clone() * d.clone() / (lf.clone() * lf.clone());
        excess = excess + d / lf.clone();
        let ratio = mm.clone() / lf;
        second = second + ratio.clone() * (ratio - S::one()) * pow.clone();
    }
    Ok(mm.clone() * mm * first + second)
}

/// `Var T` from the unsimplified expression
/// `(E T)² - E T - 2m² Σ_{l=2}^m H_{l-1}/(l (1-p)^l)`.
pub fn variance_closed_raw<S: Scalar>(params: &ModelParams) -> Result<S> {
    let m = params.m() as u64;
    let mm = S::from_u64(m);
    let inv_q = S::one() / (S::one() - params.p_as::<S>()?);
    let mean = mean_closed::<S>(params)?;
    let mut pow = inv_q.clone();
    let mut h_prev = S::one(); // H_{l-1} for l = 2
    let mut sum = S::zero();
    for l in 2..=m {
        pow = pow * inv_q.clone();
        sum = sum + h_prev.clone() * pow.clone() / S::from_u64(l);
        h_prev = h_prev + S::one() / S::from_u64(l);
    }
    Ok(mean.clone() * mean.clone() - mean - S::from_u64(2) * mm.clone() * mm * sum)
}

pub fn moments_closed<S: Scalar>(params: &ModelParams) -> Result<MomentReport<S>> {
    let mean = mean_closed::<S>(params)?;
    let variance = variance_closed::<S>(params)?;
    Ok(MomentReport {
        second_moment: variance.clone() + mean.clone() * mean.clone(),
        mean,
        variance,
        method: MomentMethod::ClosedForm,
    })
}

/// Moments of the truncated pmf (no tail correction).
pub fn moments_from_pmf<S: Scalar>(pmf: &Pmf<S>) -> MomentReport<S> {
    let (mean, second_moment) = pmf.partial_moments();
    MomentReport {
        variance: second_moment.clone() - mean.clone() * mean.clone(),
        mean,
        second_moment,
        method: MomentMethod::PmfSum,
    }
}

/// `Var T_{m,0} = m² H_m^{(2)} - m H_m`.
pub fn var_classical(m: u32) -> f64 {
    let mf = m as f64;
    mf * mf * harmonic2(m as u64) - mf * harmonic(m as u64)
}

/// Exact `Var T_{m,0}` in the scalar domain.
pub fn var_classical_exact<S: Scalar>(m: u32) -> S {
    let mut h = S::zero();
    let mut h2 = S::zero();
    for k in 1..=m as u64 {
        let kk = S::from_u64(k);
        h = h + S::one() / kk.clone();
        h2 = h2 + S::one() / (kk.clone() * kk);
    }
    let mm = S::from_u64(m as u64);
    mm.clone() * mm.clone() * h2 - mm * h
}

/// `M_{T_{m,0}}(t) = 1/binom(m e^{-t}, m)` for `t <= 0`, in log form.
pub fn mgf_classical(m: u32, t: f64) -> Result<f64> {
    if !(t <= 0.0) {
        return Err(Error::OutOfRange(format!("mgf argument t = {t} must be <= 0")));
    }
    let delta = m as f64 * (-t).exp_m1();
    Ok(binom_shifted(m as u64, delta).recip().value())
}

/// Status of the alternating-sum cross-check inside [`mgf_eval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SumFormCheck {
    /// Sum form not evaluated (`m` too large or `|t|` too large).
    Skipped,
    Agreed { sum_form: f64, rel_diff: f64 },
    /// Cancellation in the sum was too severe to compare; factored value kept.
    Cancellation { condition: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfValue {
    pub value: f64,
    pub check: SumFormCheck,
}

/// Largest `m` for which the sum form is used as a cross-check.
pub const SUM_FORM_MAX_M: u32 = 20;
const SUM_FORM_MAX_ABS_T: f64 = 5.0;

/// `1/Λ(t)` with `Λ(t) = Σ_{l=0}^m (-1)^l binom(m - m e^{-t}, l) (1-p)^{-l}`.
/// Returns the value and the condition number `Σ|terms| / |Σ terms|`.
pub fn mgf_sum_form(params: &ModelParams, t: f64) -> (f64, f64) {
    let m = params.m();
    let nu = -(m as f64) * (-t).exp_m1();
    let lq = -(-params.p()).ln_1p();
    let terms: Vec<f64> = (0..=m as u64)
        .map(|l| {
            let b = ln_binom(nu, l);
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            sign * b.sign * (b.ln_abs + l as f64 * lq).exp()
        })
        .collect();
    let total = compensated_sum(terms.iter().cloned());
    let abs: f64 = terms.iter().map(|x| x.abs()).sum();
    (1.0 / total, abs / total.abs())
}

/// `M_T(t)` for `t <= 0` from the factored form
/// `binom(m e^{-t}, m)^{-1} · I_{m,p}(t)`, cross-checked against the
/// alternating sum when `m <= 20` and `|t| <= 5`.
pub fn mgf_eval(params: &ModelParams, t: f64, rel_tol: f64) -> Result<MgfValue> {
    let classical = mgf_classical(params.m(), t)?;
    let extra = i_extra(params, t, rel_tol)?;
    let value = classical * extra;
    let check = if params.m() <= SUM_FORM_MAX_M && t.abs() <= SUM_FORM_MAX_ABS_T {
        let (sum_form, condition) = mgf_sum_form(params, t);
        if condition * f64::EPSILON * 16.0 > rel_tol {
            SumFormCheck::Cancellation { condition }
        } else {
            let rel_diff = ((sum_form - value) / value).abs();
            // the factored form carries the quadrature error, the sum form
            // only rounding
            if rel_diff > 100.0 * rel_tol.max(1e-14) {
                return Err(Error::Inconsistent(format!(
                    "mgf at t={t}: factored {value:e} vs sum form {sum_form:e}"
                )));
            }
            SumFormCheck::Agreed { sum_form, rel_diff }
        }
    } else {
        SumFormCheck::Skipped
    };
    Ok(MgfValue { value, check })
}

/// `E[T_{m,p} - T_{m,0}]` from the integrated-by-parts form
/// `(1-p)^{-m}/p · [(pm)²(1-p)^{m-1} + ∫₀¹ p³m²(m-1)(1-px)^{m-2} L(x) dx]`.
pub fn mean_diff_integral(params: &ModelParams, rel_tol: f64) -> Result<f64> {
    if params.is_degenerate() {
        return Ok(0.0);
    }
    let p = params.p();
    let m = params.m() as f64;
    let head = p * m * m / (1.0 - p);
    if params.m() == 1 {
        return Ok(head);
    }
    let integral = weighted_integral(params, l_fn, rel_tol)?;
    let v = head + p * p * m * m * (m - 1.0) * integral;
    finite(v, "mean difference")
}

/// `E[(T_{m,p} - T_{m,0})²] = 2E² - E + Ξ` with
/// `Ξ = (1-p)^{-m}/p · {2p²m³(1-p)^{m-1} + ∫₀¹ p³m³(m-1)(1-px)^{m-2} N(x) dx}`.
pub fn second_moment_diff(params: &ModelParams, rel_tol: f64) -> Result<f64> {
    if params.is_degenerate() {
        return Ok(0.0);
    }
    let p = params.p();
    let m = params.m() as f64;
    let mean = mean_diff_integral(params, rel_tol)?;
    let mut xi = 2.0 * p * m * m * m / (1.0 - p);
    if params.m() > 1 {
        xi += p * p * m * m * m * (m - 1.0) * weighted_integral(params, n_fn, rel_tol)?;
    }
    finite(2.0 * mean * mean - mean + xi, "second moment of the difference")
}

/// `∫₀¹ (1-px)^{m-2} (1-p)^{-m} w(x) dx`, with the power combined in the
/// exponent so that it cannot overflow before the integral does.
fn weighted_integral(params: &ModelParams, w: fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    let p = params.p();
    let m = params.m() as f64;
    let lq = (-p).ln_1p();
    let f = |x: f64| {
        let e = (m - 2.0) * (-p * x).ln_1p() - m * lq;
        e.exp() * w(x)
    };
    Ok(quad::integrate(f, 0.0, 1.0, rel_tol)?.value)
}

fn finite(v: f64, quantity: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { quantity, log_value: f64::INFINITY })
    }
}

/// Exact-mode pmf when available, else float mode, returned as f64.
pub fn pmf_f64(params: &ModelParams, n_max: usize) -> Result<Vec<f64>> {
    if params.exact_capable() {
        Ok(pmf_markov::<BigRational>(params, n_max)?.probs.iter().map(Scalar::to_f64).collect())
    } else {
        Ok(pmf_markov::<Dd>(params, n_max)?.probs.iter().map(Scalar::to_f64).collect())
    }
}
