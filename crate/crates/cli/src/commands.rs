use clumsy::asymptotics::{
    gumbel_cdf, gumbel_quantile, mean_asymptotic, tail_bound, tau_c_laplace, variance_asymptotic,
    Regime,
};
use clumsy::exact::{
    mean_closed_f64, mgf_classical, mgf_eval, moments_closed, moments_from_pmf, pmf_markov,
    pmf_markov_until, tail_from_pmf, truncated_mean_bound, variance_closed, Pmf, SumFormCheck,
};
use clumsy::harness::{ks_one_sample, ks_two_sample, run_suite, Suite, SuiteConfig};
use clumsy::scalar::{Dd, Scalar};
use clumsy::simulate::{
    sample_limit_law, simulate_batch, simulate_pairs, simulate_tau_batch, BirthDeathSpec,
    SampleSummary,
};
use clumsy::{Error, ModelParams, Result};
use num_rational::BigRational;

use crate::output::{Cell, Table};

/// Exact arithmetic when `p` is rational and `m` small enough.
pub fn mode(params: &ModelParams) -> &'static str {
    if params.exact_capable() {
        BigRational::MODE
    } else {
        Dd::MODE
    }
}

fn cell<S: Scalar>(x: &S) -> Cell {
    if S::EXACT {
        Cell::Text(x.render())
    } else {
        Cell::Float(x.to_f64())
    }
}

pub fn pmf(params: &ModelParams, n_max: usize) -> Result<Table> {
    if params.exact_capable() {
        pmf_table(&pmf_markov::<BigRational>(params, n_max)?)
    } else {
        pmf_table(&pmf_markov::<Dd>(params, n_max)?)
    }
}

fn pmf_table<S: Scalar>(pmf: &Pmf<S>) -> Result<Table> {
    let mut t = Table::new(&["n", "probability", "cumulative", "tail_certificate"]);
    let mut cumulative = S::zero();
    for (n, p) in pmf.probs.iter().enumerate().skip(1) {
        cumulative = cumulative + p.clone();
        t.row(vec![n.into(), cell(p), cell(&cumulative), cell(&pmf.tail_certificate)]);
    }
    t.note("tail_mass", pmf.tail_mass.render());
    t.note("certificate", format!("{:?}", pmf.certificate).to_lowercase());
    Ok(t)
}

pub fn moments(params: &ModelParams, n_max: Option<usize>) -> Result<Table> {
    if params.exact_capable() {
        let pmf = pmf_markov::<BigRational>(params, n_max.unwrap_or(200))?;
        moments_table(params, &pmf)
    } else {
        let pmf = match n_max {
            Some(n) => pmf_markov::<Dd>(params, n)?,
            None => pmf_markov_until::<Dd>(params, 1e-17, 20_000_000)?,
        };
        moments_table(params, &pmf)
    }
}

fn moments_table<S: Scalar>(params: &ModelParams, pmf: &Pmf<S>) -> Result<Table> {
    let closed = moments_closed::<S>(params)?;
    let summed = moments_from_pmf(pmf);
    let mut t = Table::new(&["quantity", "closed_form", "pmf_sum", "difference", "bound"]);
    let bound = truncated_mean_bound(pmf, params);
    let mean_gap = closed.mean.clone() - summed.mean.clone();
    // the pmf sums are shown as floats even in exact mode: their rationals
    // run to hundreds of digits
    let f = |x: &S| Cell::Float(x.to_f64());
    t.row(vec!["mean".into(), cell(&closed.mean), f(&summed.mean), f(&mean_gap), bound.into()]);
    let var_gap = closed.variance.clone() - summed.variance.clone();
    t.row(vec!["variance".into(), cell(&closed.variance), f(&summed.variance), f(&var_gap), Cell::Empty]);
    t.note("pmf_n_max", pmf.n_max);
    t.note("pmf_tail_mass", pmf.tail_mass.to_f64());
    Ok(t)
}

pub fn mgf(params: &ModelParams, ts: &[f64], rel_tol: f64) -> Result<Table> {
    let mut t = Table::new(&["t", "mgf", "classical", "extra_factor", "sum_form", "rel_diff"]);
    for &x in ts {
        let v = mgf_eval(params, x, rel_tol)?;
        let classical = mgf_classical(params.m(), x)?;
        let (sum_form, rel_diff) = match v.check {
            SumFormCheck::Agreed { sum_form, rel_diff } => (Some(sum_form), Some(rel_diff)),
            _ => (None, None),
        };
        t.row(vec![x.into(), v.value.into(), classical.into(), (v.value / classical).into(), sum_form.into(), rel_diff.into()]);
    }
    Ok(t)
}

pub fn tail(params: &ModelParams, rs: &[usize], rel_tol: f64) -> Result<Table> {
    let top = rs.iter().copied().max().unwrap_or(1).max(1);
    let exact: Vec<Cell> = if params.exact_capable() {
        let pmf = pmf_markov::<BigRational>(params, top)?;
        rs.iter().map(|&r| tail_at(&pmf, r).map(|x| cell(&x))).collect::<Result<_>>()?
    } else {
        let pmf = pmf_markov::<Dd>(params, top)?;
        rs.iter().map(|&r| tail_at(&pmf, r).map(|x| cell(&x))).collect::<Result<_>>()?
    };
    let mut t = Table::new(&["r", "exact_tail", "bound"]);
    for (&r, e) in rs.iter().zip(exact) {
        t.row(vec![r.into(), e, tail_bound(params, r as f64, rel_tol)?.into()]);
    }
    Ok(t)
}

/// `P(T >= r)`.
fn tail_at<S: Scalar>(pmf: &Pmf<S>, r: usize) -> Result<S> {
    if r == 0 {
        return Err(Error::OutOfRange("tail needs r >= 1".into()));
    }
    tail_from_pmf(pmf, r - 1)
}

fn summary_row(name: &str, s: &SampleSummary) -> Vec<Cell> {
    vec![name.into(), s.n.into(), s.mean.into(), s.variance.into(), s.std_error().into(), s.min.into(), s.max.into()]
}

const SUMMARY_HEADER: [&str; 7] = ["variable", "n", "mean", "variance", "std_error", "min", "max"];

pub fn simulate(params: &ModelParams, samples: usize, seed: u64, raw: Option<&std::path::Path>) -> Result<Table> {
    let batch = simulate_batch(params, samples, seed, false)?;
    let mut t = Table::new(&SUMMARY_HEADER);
    t.row(summary_row("clumsy", &batch.clumsy));
    t.row(summary_row("classical", &batch.classical));
    t.row(summary_row("difference", &batch.difference));
    if let Ok(mean) = mean_closed_f64(params) {
        t.note("exact_mean", mean);
    }
    if let Some(path) = raw {
        let pairs = simulate_pairs(params, samples, seed)?;
        let rows = pairs.iter().map(|s| {
            vec![s.t_classical.to_string(), s.t_clumsy.to_string(), s.difference().to_string()]
        });
        let file = std::fs::File::create(path).map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
        clumsy::harness::write_csv(std::io::BufWriter::new(file), &["t_classical", "t_clumsy", "difference"], rows)
            .map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
        t.note("raw_samples", path.display().to_string());
    }
    Ok(t)
}

pub fn tau(c: f64, ss: &[f64], samples: usize, seed: u64, rel_tol: f64) -> Result<Table> {
    let spec = BirthDeathSpec::new(c)?;
    let taus = if samples > 0 { Some(simulate_tau_batch(&spec, samples, seed)?) } else { None };
    let mut t = Table::new(&["s", "laplace", "mc_estimate", "mc_std_error"]);
    for &s in ss {
        let exact = tau_c_laplace(c, s, rel_tol)?;
        let (est, se) = match &taus {
            Some(v) => {
                let w: Vec<f64> = v.iter().map(|x| (-s * x).exp()).collect();
                let sum = SampleSummary::from_values(&w, false, seed, 0);
                (Some(sum.mean), Some(sum.std_error()))
            }
            None => (None, None),
        };
        t.row(vec![s.into(), exact.into(), est.into(), se.into()]);
    }
    if let Some(v) = &taus {
        let s = SampleSummary::from_values(v, false, seed, 0);
        t.note("tau_mean", s.mean);
        t.note("tau_samples", s.n);
    }
    Ok(t)
}

/// Critical regimes without an explicit `c` take `c = m p`.
pub fn resolve_regime(regime: Regime, c: Option<f64>, params: &ModelParams) -> Result<Regime> {
    match regime {
        Regime::Critical { .. } => Regime::critical(c.unwrap_or(params.m() as f64 * params.p())),
        r if c.is_some() => Err(Error::InvalidParams(format!("--c only applies to the critical regime, not {r}"))),
        r => Ok(r),
    }
}

pub fn limit(params: &ModelParams, regime: Regime, samples: usize, seed: u64, points: usize) -> Result<Table> {
    let batch = simulate_batch(params, samples, seed, true)?;
    let rescaling = regime.rescaling(params.m(), params.p());
    let sample: Vec<f64> = batch
        .clumsy
        .sorted_samples
        .unwrap_or_default()
        .iter()
        .map(|&x| rescaling.apply(x))
        .collect();
    let mut t = Table::new(&["level", "sample_quantile", "limit_quantile"]);
    let quantile = |sorted: &[f64], u: f64| sorted[((u * sorted.len() as f64) as usize).min(sorted.len() - 1)];
    let levels: Vec<f64> = (1..=points).map(|k| k as f64 / (points + 1) as f64).collect();
    match regime {
        Regime::Subcritical | Regime::Supercritical => {
            let (cdf, inv): (fn(f64) -> f64, fn(f64) -> f64) = if regime == Regime::Subcritical {
                (gumbel_cdf, gumbel_quantile)
            } else {
                (|x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() }, |u| -(-u).ln_1p())
            };
            let ks = ks_one_sample(&sample, cdf)?;
            t.note("ks_statistic", ks.statistic);
            t.note("ks_threshold", ks.threshold);
            for u in levels {
                t.row(vec![u.into(), quantile(&sample, u).into(), inv(u).into()]);
            }
        }
        Regime::Critical { .. } => {
            let limit = sample_limit_law(regime, samples, seed.wrapping_add(0x9E37_79B9_7F4A_7C15))?;
            let reference = limit.sorted_samples.unwrap_or_default();
            let ks = ks_two_sample(&sample, &reference)?;
            t.note("ks_statistic", ks.statistic);
            t.note("ks_threshold", ks.threshold);
            for u in levels {
                t.row(vec![u.into(), quantile(&sample, u).into(), quantile(&reference, u).into()]);
            }
        }
        Regime::FixedP => {
            return Err(Error::RegimeMismatch("the fixed-p regime has no limit law to compare with".into()))
        }
    }
    t.note("regime", regime.to_string());
    t.note("samples", samples);
    Ok(t)
}

pub fn expand(params: &ModelParams, regime: Regime, rel_tol: f64) -> Result<Table> {
    let mut t = Table::new(&["quantity", "exact", "asymptotic", "relative_error"]);
    let exact_mean = mean_closed_f64(params);
    let exact_var = variance_closed::<Dd>(params).map(|v| v.to_f64());
    for (name, exact, asym) in [
        ("mean", exact_mean, mean_asymptotic(params, regime, rel_tol)?),
        ("variance", exact_var, variance_asymptotic(params, regime, rel_tol)?),
    ] {
        match exact {
            Ok(e) => t.row(vec![name.into(), e.into(), asym.into(), ((asym - e) / e).into()]),
            Err(Error::Overflow { log_value, .. }) => {
                t.note(&format!("{name}_ln_exact"), log_value);
                t.row(vec![name.into(), "overflow".into(), asym.into(), Cell::Empty]);
            }
            Err(e) => return Err(e),
        }
    }
    t.note("regime", regime.to_string());
    Ok(t)
}

pub fn verify(suites: &[Suite], config: &SuiteConfig, report: Option<&std::path::Path>) -> Result<(Table, bool)> {
    let mut t = Table::new(&["suite", "pass", "checks", "failures", "elapsed_ms"]);
    let mut all = true;
    let mut docs = Vec::new();
    for &s in suites {
        let r = run_suite(s, config);
        all &= r.pass;
        let failures: Vec<&str> = r.failures().map(|c| c.id.as_str()).collect();
        t.row(vec![
            s.name().into(),
            r.pass.to_string().into(),
            r.checks.len().into(),
            failures.join(" ").into(),
            r.environment.elapsed_ms.into(),
        ]);
        docs.push(r);
    }
    if let Some(path) = report {
        let text = serde_json::to_string_pretty(&docs).expect("reports serialize");
        std::fs::write(path, text).map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
        t.note("report", path.display().to_string());
    }
    Ok((t, all))
}
