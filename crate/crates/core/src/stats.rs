//! Small statistical utilities shared by the benchmark harness and the
//! verification suites.

/// One-sample Kolmogorov-Smirnov statistic of `sorted` data against a
/// continuous CDF: the sup distance taken over both step limits.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        sup = sup.max(hi.abs()).max(lo.abs());
    }
    sup
}

/// Asymptotic one-sample KS critical value at level `alpha`:
/// `sqrt(-ln(alpha/2) / 2) / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
