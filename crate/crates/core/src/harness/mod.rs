//! Cross-validation: goodness-of-fit statistics, named suites that tie the
//! exact, simulation and asymptotic layers together, and their reports.

pub mod coverage;
mod suites;
pub mod words;

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

pub use suites::run_suite;

/// Kolmogorov–Smirnov statistic and its verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub n: usize,
    pub n2: Option<usize>,
    pub threshold: f64,
    pub pass: bool,
}

impl KsResult {
    pub fn with_threshold(self, threshold: f64) -> Self {
        KsResult { threshold, pass: self.statistic < threshold, ..self }
    }
}

/// One-sample KS distance of sorted samples from `cdf`. The default
/// threshold is the asymptotic 1% quantile `1.63/√n`.
pub fn ks_one_sample(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult { statistic: d, n: sorted.len(), n2: None, threshold: f64::NAN, pass: false }
        .with_threshold(1.63 / n.sqrt()))
}

/// Two-sample KS distance between sorted samples, by a merge scan.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let threshold = 1.63 * ((na + nb) / (na * nb)).sqrt();
    Ok(KsResult { statistic: d, n: a.len(), n2: Some(b.len()), threshold, pass: d < threshold })
}

/// Pearson chi-square statistic and upper-tail p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
}

/// Goodness of fit of `observed` counts against `expected` probabilities.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if observed.len() != expected.len() {
        return Err(Error::InvalidParams("bin count mismatch".into()));
    }
    let statistic = observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = observed.len() - 1;
    Ok(ChiSquare { statistic, dof, p_value: chi_square_tail(statistic, dof) })
}

/// Test of independence on a contingency table of counts.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<ChiSquare> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    let total: u64 = table.iter().flatten().sum();
    if total == 0 {
        return Err(Error::EmptySample);
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / total as f64;
            if e > 0.0 {
                statistic += (o as f64 - e).powi(2) / e;
            }
        }
    }
    let dof = (rows.saturating_sub(1)) * (cols.saturating_sub(1));
    Ok(ChiSquare { statistic, dof, p_value: chi_square_tail(statistic, dof) })
}

/// One verified claim inside a [`Report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub expected: Option<f64>,
    pub observed: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// `|observed - expected| <= tolerance`.
    pub fn abs(id: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        Check {
            id: id.into(),
            expected: Some(expected),
            observed: Some(observed),
            tolerance: Some(tolerance),
            pass: (observed - expected).abs() <= tolerance,
            note: None,
        }
    }

    /// `|observed - expected| <= tolerance·|expected|`.
    pub fn rel(id: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        Check {
            pass: (observed - expected).abs() <= tolerance * expected.abs(),
            ..Check::abs(id, expected, observed, 0.0)
        }
        .with_tolerance(tolerance)
    }

    /// `observed < bound`.
    pub fn below(id: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            id: id.into(),
            expected: None,
            observed: Some(observed),
            tolerance: Some(bound),
            pass: observed < bound,
            note: None,
        }
    }

    /// `observed <= bound`.
    pub fn at_most(id: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check { pass: observed <= bound, ..Check::below(id, observed, bound) }
    }

    /// `observed > bound`.
    pub fn above(id: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check { pass: observed > bound, ..Check::below(id, observed, bound) }
    }

    pub fn flag(id: impl Into<String>, pass: bool, note: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            expected: None,
            observed: None,
            tolerance: None,
            pass,
            note: Some(note.into()),
        }
    }

    pub fn failed(id: impl Into<String>, err: &Error) -> Self {
        Check::flag(id, false, format!("error: {err}"))
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub version: String,
    pub elapsed_ms: u64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub environment: Environment,
}

impl Report {
    pub fn new(suite: Suite, seed: u64) -> Self {
        Report {
            suite: suite.name().to_string(),
            pass: true,
            checks: Vec::new(),
            environment: Environment {
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                elapsed_ms: 0,
                threads: rayon::current_num_threads(),
            },
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    /// Records `f`'s checks, or a failed check named `id` if it errors.
    pub fn attempt(&mut self, id: &str, f: impl FnOnce(&mut Report) -> Result<()>) {
        if let Err(e) = f(self) {
            self.push(Check::failed(id, &e));
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Equality ignoring timing and thread count.
    pub fn same_content(&self, other: &Report) -> bool {
        self.suite == other.suite
            && self.pass == other.pass
            && self.checks == other.checks
            && self.environment.seed == other.environment.seed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Oracle,
    Moments,
    Mgf,
    Subcritical,
    Supercritical,
    Critical,
    Tau,
    Expansion,
    Tail,
    Independence,
    Language,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Oracle,
        Suite::Moments,
        Suite::Mgf,
        Suite::Subcritical,
        Suite::Supercritical,
        Suite::Critical,
        Suite::Tau,
        Suite::Expansion,
        Suite::Tail,
        Suite::Independence,
        Suite::Language,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Moments => "moments",
            Suite::Mgf => "mgf",
            Suite::Subcritical => "subcritical",
            Suite::Supercritical => "supercritical",
            Suite::Critical => "critical",
            Suite::Tau => "tau",
            Suite::Expansion => "expansion",
            Suite::Tail => "tail",
            Suite::Independence => "independence",
            Suite::Language => "language",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::InvalidParams(format!("unknown suite {s:?}")))
    }
}

/// Sizes, seed and tolerance overrides for [`run_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Multiplier on every Monte Carlo sample size.
    pub scale: f64,
    pub rel_tol: f64,
    pub samples: Option<usize>,
    pub ks_threshold: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 1, scale: 1.0, rel_tol: 1e-12, samples: None, ks_threshold: None }
    }
}

impl SuiteConfig {
    pub fn quick(seed: u64) -> Self {
        SuiteConfig { seed, scale: 0.05, ..Default::default() }
    }

    fn samples(&self, base: usize) -> usize {
        self.samples
            .unwrap_or_else(|| ((base as f64 * self.scale).round() as usize).max(100))
    }

    fn ks(&self, default: f64) -> f64 {
        self.ks_threshold.unwrap_or(default)
    }

    fn sub_seed(&self, k: u64) -> u64 {
        self.seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Round-trip decimal for CSV cells.
pub fn csv_float(x: f64) -> String {
    format!("{x:?}")
}

/// Writes a comma-separated table with a header row and LF line endings.
pub fn write_csv<W, I>(mut out: W, header: &[&str], rows: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
