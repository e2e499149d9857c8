//! Distribution tails used by the test kernels, on top of `statrs`.

use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, gamma_ur};

// erfc through the incomplete gamma; statrs' own erfc is only good to ~1e-11
fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        return 1.0;
    }
    if x > 0.0 {
        gamma_ur(0.5, x * x)
    } else {
        1.0 + gamma_lr(0.5, x * x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail `P(Z > z)` of the standard normal, computed without
/// cancellation for large `z`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if !x.is_finite() {
        return 0.0;
    }
    gamma_ur(df / 2.0, x / 2.0)
}

/// Two-tailed p-value of a Student-t statistic.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Upper tail of the F distribution.
pub fn f_sf(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if !f.is_finite() {
        return 0.0;
    }
    let x = df2 / (df2 + df1 * f);
    beta_reg(df2 / 2.0, df1 / 2.0, x).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Maclaurin series for erf, summed to convergence; independent of the
    /// incomplete-gamma route. Accurate for |x| < 3 in f64.
    fn erf_series(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = x;
        let mut n = 0.0;
        loop {
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
            n += 1.0;
            term *= -x * x / n;
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn normal_cdf_against_series() {
        for &z in &[-2.758, -1.96, -1.0, -0.3, 0.0, 0.7, 1.5, 2.5, 3.7847] {
            let want = 0.5 * (1.0 + erf_series(z / std::f64::consts::SQRT_2));
            assert!((normal_cdf(z) - want).abs() < 1e-10, "z={z}");
        }
        assert!((normal_cdf(-2.758) - 0.002_907).abs() < 1e-5);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi2_df2_closed_form() {
        for &x in &[0.1, 1.0, 5.991, 9.317, 16.635, 40.0] {
            assert!((chi2_sf(x, 2.0) - (-x / 2.0).exp()).abs() < 1e-12, "x={x}");
        }
        assert!((chi2_sf(9.317, 2.0) - 0.009_481).abs() < 1e-6);
    }

    #[test]
    fn chi2_df1_matches_normal() {
        for &z in &[0.5f64, 1.0, 1.96, 3.0] {
            let (a, b) = (chi2_sf(z * z, 1.0), 2.0 * normal_sf(z));
            assert!((a - b).abs() < 1e-12, "z={z} {a} {b}");
        }
    }

    #[test]
    fn student_t_closed_forms() {
        // df = 1 is Cauchy; df = 2 has a closed-form CDF.
        for &t in &[0.2f64, 1.0, 2.5, 10.0] {
            let cauchy = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
            assert!((student_t_two_tailed(t, 1.0) - cauchy).abs() < 1e-12);
            let df2 = 1.0 - t / (2.0 + t * t).sqrt();
            assert!((student_t_two_tailed(t, 2.0) - df2).abs() < 1e-12);
        }
        assert!((student_t_two_tailed(0.0, 10.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn f_sf_closed_form() {
        // df1 = 2: P(F > x) = (1 + 2x/df2)^(-df2/2)
        for &(x, d2) in &[(0.5f64, 10.0f64), (3.0, 20.0), (7.5, 145.0)] {
            let want = (1.0 + 2.0 * x / d2).powf(-d2 / 2.0);
            assert!((f_sf(x, 2.0, d2) - want).abs() < 1e-12);
        }
        // F(1, d) = t(d)^2
        assert!((f_sf(4.0, 1.0, 30.0) - student_t_two_tailed(2.0, 30.0)).abs() < 1e-12);
    }
}
