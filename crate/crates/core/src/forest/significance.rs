use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided Welch t-test p-value for two samples of 0/1 outcomes with
/// proportions `p1`, `p0` and sizes `n1`, `n0`.
///
/// Sample variances use the `n - 1` denominator. A size-1 sample
/// contributes no variance. With zero pooled variance the result is 1.0
/// when the proportions agree and 0.0 otherwise.
pub fn welch_bernoulli(p1: f64, n1: usize, p0: f64, n0: usize) -> f64 {
    let mean_var = |p: f64, n: usize| {
        if n < 2 {
            0.0
        } else {
            (p * (1.0 - p)).max(0.0) / (n - 1) as f64
        }
    };
    let v1 = mean_var(p1, n1);
    let v0 = mean_var(p0, n0);
    let se2 = v1 + v0;
    if se2 <= 0.0 || !se2.is_finite() {
        return if p1 == p0 { 1.0 } else { 0.0 };
    }
    let t = (p1 - p0) / se2.sqrt();
    let dof_term = |v: f64, n: usize| if v > 0.0 { v * v / (n - 1) as f64 } else { 0.0 };
    let df = se2 * se2 / (dof_term(v1, n1) + dof_term(v0, n0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

/// p-value comparing two net-of-guessing accuracies measured on `n1` and
/// `n0` samples.
pub fn significance_test(new_acc: f64, last_acc: f64, n1: usize, n0: usize, guess_acc: f64) -> f64 {
    welch_bernoulli(new_acc + guess_acc, n1, last_acc + guess_acc, n0)
}
