//! Welch's t-test, Fisher's exact test and multi-seed convergence summaries.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WelchResult {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(Error::InsufficientSamples { needed: 2, got: s.len() });
        }
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchResult { t, df, p: student_t_two_sided(t, df) })
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `I_x(a, b)` via the modified-Lentz continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // the fraction converges fastest for x < (a + 1)/(a + b + 2)
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_TERMS: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_TERMS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Two-sided Fisher exact p for `[[a, b], [c, d]]`: total probability of all
/// tables with the same margins that are no more likely than the observed one.
pub fn fisher_exact_2x2(table: [[u64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = table;
    let row1 = a + b;
    let row2 = c + d;
    let col1 = a + c;
    let n = row1 + row2;
    if n == 0 {
        return 1.0;
    }
    let ln_denominator =
        ln_factorial(n) - ln_factorial(row1) - ln_factorial(row2) - ln_factorial(col1) - ln_factorial(n - col1);
    let ln_p = |x: u64| -> f64 {
        // table with top-left cell x
        -(ln_factorial(x) + ln_factorial(row1 - x) + ln_factorial(col1 - x) + ln_factorial(row2 + x - col1))
            - ln_denominator
    };
    let lo = col1.saturating_sub(row2);
    let hi = row1.min(col1);
    let observed = ln_p(a);
    // relative slack so ties with the observed table are counted
    let cutoff = observed + 1e-7_f64.ln_1p();
    let p: f64 = (lo..=hi).map(ln_p).filter(|&lp| lp <= cutoff).map(f64::exp).sum();
    p.min(1.0)
}

/// Final-epoch accuracies of one training run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub final_train_acc: f64,
    pub final_test_acc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    pub n_seeds: usize,
    pub n_converged: usize,
    /// Mean final test accuracy over converged seeds; absent when none converged.
    pub converged_mean_acc: Option<f64>,
    /// Sample standard deviation over converged seeds; absent with fewer than two.
    pub converged_std: Option<f64>,
    pub failed_mean_acc: Option<f64>,
    pub all_seed_mean_acc: Option<f64>,
    pub threshold: f64,
}

pub const CONVERGENCE_THRESHOLD: f64 = 0.60;

/// Convergence is judged on final TRAIN accuracy (`> threshold`); reported
/// accuracies are final TEST accuracies.
pub fn summarize(outcomes: &[SeedOutcome], threshold: f64) -> ConvergenceSummary {
    let (conv, failed): (Vec<f64>, Vec<f64>) = {
        let mut c = Vec::new();
        let mut f = Vec::new();
        for o in outcomes {
            if o.final_train_acc > threshold {
                c.push(o.final_test_acc);
            } else {
                f.push(o.final_test_acc);
            }
        }
        (c, f)
    };
    let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let all: Vec<f64> = outcomes.iter().map(|o| o.final_test_acc).collect();
    ConvergenceSummary {
        n_seeds: outcomes.len(),
        n_converged: conv.len(),
        converged_mean_acc: mean(&conv),
        converged_std: (conv.len() >= 2).then(|| mean_var(&conv).1.sqrt()),
        failed_mean_acc: mean(&failed),
        all_seed_mean_acc: mean(&all),
        threshold,
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (0 for fewer than two values).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    mean_var(xs).1.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn welch_identical_samples() {
        let a = [0.9, 0.95, 0.97, 0.92];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn welch_matches_reference_values() {
        // scipy.stats.ttest_ind(..., equal_var=False)
        let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(close(r.t, -1.0, 1e-12));
        assert!(close(r.df, 8.0, 1e-12));
        assert!(close(r.p, 0.346_593_507_087_334_16, 1e-6), "{}", r.p);

        let r = welch_t_test(&[1.1, 2.5, 3.3, 4.0], &[5.5, 6.1, 7.9, 8.8, 9.0, 10.2]).unwrap();
        assert!(close(r.t, -5.380_896_486_403_454, 1e-10));
        assert!(close(r.df, 7.942_923_384_203_827, 1e-10));
        assert!(close(r.p, 6.769_769_114_576_875e-4, 1e-6), "{}", r.p);
    }

    #[test]
    fn welch_separated_samples() {
        let a: Vec<f64> = (0..30).map(|i| 0.95 + 0.001 * i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| 0.80 + 0.001 * i as f64).collect();
        assert!(welch_t_test(&a, &b).unwrap().p < 1e-6);
    }

    #[test]
    fn welch_errors() {
        assert!(matches!(welch_t_test(&[1.0], &[1.0, 2.0]), Err(Error::InsufficientSamples { .. })));
        assert!(matches!(welch_t_test(&[1.0, 1.0], &[1.0, 1.0]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn fisher_examples() {
        assert!(close(fisher_exact_2x2([[47, 53], [48, 52]]), 1.0, 1e-12));
        // only the two extreme tables are as unlikely: 2 / C(20, 10)
        assert!(close(fisher_exact_2x2([[10, 0], [0, 10]]), 2.0 / 184_756.0, 1e-9));
        assert!(close(fisher_exact_2x2([[3, 7], [9, 2]]), 0.029_973_122_852_379_81, 1e-9));
        assert_eq!(fisher_exact_2x2([[5, 5], [5, 5]]), 1.0);
    }

    #[test]
    fn ln_gamma_factorials() {
        for (n, f) in [(1u64, 1.0f64), (5, 120.0), (10, 3_628_800.0)] {
            assert!(close(ln_factorial(n), f.ln(), 1e-13) || f == 1.0);
        }
        assert!(ln_factorial(0).abs() < 1e-14);
    }

    #[test]
    fn summarize_cases() {
        let all_good: Vec<SeedOutcome> =
            (0..4).map(|_| SeedOutcome { final_train_acc: 0.9, final_test_acc: 0.8 }).collect();
        let s = summarize(&all_good, CONVERGENCE_THRESHOLD);
        assert_eq!(s.n_converged, 4);

        let none: Vec<SeedOutcome> =
            (0..3).map(|_| SeedOutcome { final_train_acc: 0.5, final_test_acc: 0.5 }).collect();
        let s = summarize(&none, CONVERGENCE_THRESHOLD);
        assert_eq!(s.n_converged, 0);
        assert_eq!(s.converged_mean_acc, None);
        assert_eq!(s.converged_std, None);

        // hand check: converged tests 0.9, 1.0 (mean 0.95, sd 0.0707…);
        // failed 0.5; all-seed mean 0.8. Train accuracy 0.6 exactly is not converged.
        let mixed = [
            SeedOutcome { final_train_acc: 0.95, final_test_acc: 0.9 },
            SeedOutcome { final_train_acc: 0.60, final_test_acc: 0.5 },
            SeedOutcome { final_train_acc: 0.99, final_test_acc: 1.0 },
        ];
        let s = summarize(&mixed, CONVERGENCE_THRESHOLD);
        assert_eq!(s.n_converged, 2);
        assert!(close(s.converged_mean_acc.unwrap(), 0.95, 1e-15));
        assert!(close(s.converged_std.unwrap(), 0.005f64.sqrt(), 1e-12));
        assert!(close(s.all_seed_mean_acc.unwrap(), 0.8, 1e-15));
        assert_eq!(s.failed_mean_acc, Some(0.5));
    }
}
