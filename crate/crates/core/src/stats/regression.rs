//! Two-step hierarchical OLS: condition dummies, then alignment.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::special::{f_sf, student_t_two_tailed};
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalOls {
    pub n: usize,
    /// Level used as the dummy-coding reference.
    pub reference: String,
    pub r2_step1: f64,
    pub r2_step2: f64,
    pub beta_alignment: f64,
    pub se_alignment: f64,
    pub t_alignment: f64,
    pub p_beta: f64,
    pub delta_r2: f64,
    pub f_change: f64,
    pub p_delta: f64,
}

struct Fit {
    beta: DVector<f64>,
    rss: f64,
    xtx_inv: DMatrix<f64>,
}

fn fit(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Fit, StatsError> {
    let xtx = x.transpose() * x;
    let svd = xtx.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin / smax < 1e-12 {
        return Err(StatsError::SingularDesign);
    }
    let xtx_inv = xtx.try_inverse().ok_or(StatsError::SingularDesign)?;
    let beta = &xtx_inv * x.transpose() * y;
    let resid = y - x * &beta;
    Ok(Fit {
        beta,
        rss: resid.norm_squared(),
        xtx_inv,
    })
}

/// Step 1 regresses `outcome` on dummy-coded `condition` (reference level
/// `low` when present, otherwise the alphabetically first label); step 2
/// adds `alignment`. Reports the alignment slope with its t-test and the
/// R-squared change with its incremental F-test.
pub fn hierarchical_ols(
    outcome: &[f64],
    condition: &[&str],
    alignment: &[f64],
) -> Result<HierarchicalOls, StatsError> {
    let n = outcome.len();
    if condition.len() != n {
        return Err(StatsError::LengthMismatch(n, condition.len()));
    }
    if alignment.len() != n {
        return Err(StatsError::LengthMismatch(n, alignment.len()));
    }
    let mut levels: Vec<&str> = condition.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let reference = if levels.contains(&"low") { "low" } else { levels[0] };
    let dummies: Vec<&str> = levels.iter().copied().filter(|l| *l != reference).collect();

    let p1 = 1 + dummies.len();
    let p2 = p1 + 1;
    if n <= p2 + 2 {
        return Err(StatsError::TooFewObservations { need: p2 + 3, got: n });
    }

    let y = DVector::from_column_slice(outcome);
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if tss == 0.0 {
        return Err(StatsError::Undefined("outcome has zero variance".into()));
    }

    let x2 = DMatrix::from_fn(n, p2, |i, j| {
        if j == 0 {
            1.0
        } else if j <= dummies.len() {
            f64::from(u8::from(condition[i] == dummies[j - 1]))
        } else {
            alignment[i]
        }
    });
    let x1 = x2.columns(0, p1).into_owned();

    let f1 = fit(&x1, &y)?;
    let f2 = fit(&x2, &y)?;
    let r2_step1 = 1.0 - f1.rss / tss;
    let r2_step2 = 1.0 - f2.rss / tss;

    let df_resid = (n - p2) as f64;
    let beta = f2.beta[p2 - 1];
    let sigma2 = f2.rss / df_resid;
    let se = (sigma2 * f2.xtx_inv[(p2 - 1, p2 - 1)]).sqrt();
    let perfect = f2.rss <= 1e-20 * tss;
    let (t, p_beta) = if perfect {
        (f64::INFINITY, 0.0)
    } else {
        let t = beta / se;
        (t, student_t_two_tailed(t, df_resid))
    };
    let (f_change, p_delta) = if perfect {
        (f64::INFINITY, 0.0)
    } else {
        let f = (f1.rss - f2.rss).max(0.0) / (f2.rss / df_resid);
        (f, f_sf(f, 1.0, df_resid))
    };

    Ok(HierarchicalOls {
        n,
        reference: reference.to_string(),
        r2_step1,
        r2_step2,
        beta_alignment: beta,
        se_alignment: se,
        t_alignment: t,
        p_beta,
        delta_r2: r2_step2 - r2_step1,
        f_change,
        p_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_equal_to_alignment() {
        let align = [0.1, 0.5, 0.3, 0.9, 0.7, 0.2, 0.4, 0.8];
        let cond = ["low", "low", "medium", "medium", "high", "high", "low", "medium"];
        let r = hierarchical_ols(&align, &cond, &align).unwrap();
        assert!((r.r2_step2 - 1.0).abs() < 1e-12);
        assert!((r.delta_r2 - (1.0 - r.r2_step1)).abs() < 1e-12);
        assert!((r.beta_alignment - 1.0).abs() < 1e-10);
        assert_eq!(r.reference, "low");
    }

    #[test]
    fn collinear_design_is_rejected() {
        // alignment is a function of condition, so it duplicates the dummies
        let cond = ["low", "low", "medium", "medium", "high", "high", "low", "high"];
        let align: Vec<f64> = cond.iter().map(|c| match *c { "low" => 0.2, "medium" => 0.5, _ => 0.9 }).collect();
        let y = [1.0, 2.0, 3.0, 2.0, 5.0, 4.0, 1.5, 4.5];
        assert_eq!(hierarchical_ols(&y, &cond, &align), Err(StatsError::SingularDesign));
    }

    #[test]
    fn too_few_rows() {
        let r = hierarchical_ols(&[1.0, 2.0, 3.0], &["low", "medium", "high"], &[0.1, 0.2, 0.3]);
        assert!(matches!(r, Err(StatsError::TooFewObservations { .. })));
    }
}
