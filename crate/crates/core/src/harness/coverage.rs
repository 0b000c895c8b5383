//! Which check ids exercise which result.

/// `(result, check-id prefix)` pairs. Every prefix must match at least one
/// check emitted by the suites.
pub const MANIFEST: &[(&str, &str)] = &[
    ("law of T as J = H/G coefficients", "oracle.rational."),
    ("float and exact pmf agree", "oracle.float."),
    ("pmf support, normalization and tail certificate", "oracle.invariants."),
    ("closed-form mean and variance", "moments."),
    ("variance decomposition into two terms", "moments.variance_forms."),
    ("pmf truncation bound on the mean", "moments.truncation."),
    ("MGF factorizes as classical times extra factor", "mgf.factorization."),
    ("MGF as reciprocal of a finite sum", "mgf.sum_form."),
    ("MGF equals the transform of the pmf", "mgf.pmf_transform."),
    ("Gumbel limit when mp vanishes", "subcritical."),
    ("exponential limit when mp diverges", "supercritical."),
    ("Gumbel plus killed birth-death time at mp -> c", "critical."),
    ("Laplace transform of the birth-death time", "tau."),
    ("fixed-p expansions of mean and variance", "expansion.fixed_p."),
    ("extra factor converges to the birth-death transform", "expansion.critical_extra_factor."),
    ("classical MGF limit", "expansion.classical_mgf_limit."),
    ("critical mean asymptotics", "expansion.critical_mean."),
    ("critical variance asymptotics", "expansion.critical_variance."),
    ("Chernoff-type tail bound", "tail."),
    ("coupling difference independent of the classical time", "independence.correlation"),
    ("coupling variance splits additively", "independence.variance_decomposition"),
    ("exact variance identity through difference moments", "independence.exact_identity."),
    ("coupled marginal has the clumsy law", "independence.marginal."),
    ("language membership matches the rational OGFs", "language.h."),
    ("H = J G factorization", "language.factorisation."),
    ("shuffle and concatenation decomposition", "language.shuffle."),
    ("Laplace-Borel transform links EGF and OGF", "language.laplace_borel."),
];

#[cfg(test)]
mod tests {
    use super::super::{run_suite, Suite, SuiteConfig};
    use super::*;

    #[test]
    fn every_entry_is_exercised() {
        let config = SuiteConfig::quick(3);
        let ids: Vec<String> = Suite::ALL
            .iter()
            .filter(|s| !matches!(s, Suite::Moments | Suite::Expansion))
            .flat_map(|&s| run_suite(s, &config).checks.into_iter().map(|c| c.id))
            .collect();
        for (result, prefix) in MANIFEST {
            if prefix.starts_with("moments.") || prefix.starts_with("expansion.") {
                continue;
            }
            assert!(ids.iter().any(|id| id.starts_with(prefix)), "{result}: no check {prefix}");
        }
    }
}
