//! Internal-consistency coefficients over an observations x items matrix.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::PsychometricsError;
use crate::stats::sample_variance;

/// Item responses, one row per observation, one column per item.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemMatrix {
    pub item_ids: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ItemMatrix {
    pub fn new(item_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, PsychometricsError> {
        let k = item_ids.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != k) {
            return Err(PsychometricsError::Matrix(format!(
                "row {bad} has {} values, expected {k}",
                rows[bad].len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(PsychometricsError::Matrix("non-finite value".into()));
        }
        Ok(ItemMatrix { item_ids, rows })
    }

    /// Unnamed matrix; items are labelled `item1..itemK`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, PsychometricsError> {
        let k = rows.first().map_or(0, Vec::len);
        Self::new((1..=k).map(|i| format!("item{i}")).collect(), rows)
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn n_observations(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    fn totals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    fn check_shape(&self) -> Result<(), PsychometricsError> {
        if self.n_items() < 2 {
            return Err(PsychometricsError::TooFewItems(self.n_items()));
        }
        if self.n_observations() < 3 {
            return Err(PsychometricsError::TooFewObservations(self.n_observations()));
        }
        Ok(())
    }

    /// CSV with a header row of item ids.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), PsychometricsError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.item_ids)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| v.to_string()))?;
        }
        out.flush().map_err(|e| PsychometricsError::Io("<csv>".into(), e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, PsychometricsError> {
        let mut input = csv::Reader::from_reader(r);
        let ids: Vec<String> = input.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in input.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| PsychometricsError::Matrix(format!("row {}: `{c}` is not a number", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::new(ids, rows)
    }

    fn correlation(&self) -> Result<DMatrix<f64>, PsychometricsError> {
        let k = self.n_items();
        let n = self.n_observations() as f64;
        let cols: Vec<Vec<f64>> = (0..k).map(|j| self.column(j)).collect();
        let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();
        let sds: Vec<f64> = cols
            .iter()
            .zip(&means)
            .map(|(c, m)| (c.iter().map(|v| (v - m).powi(2)).sum::<f64>()).sqrt())
            .collect();
        if let Some(j) = sds.iter().position(|s| *s == 0.0) {
            return Err(PsychometricsError::Undefined(format!(
                "item `{}` has zero variance",
                self.item_ids[j]
            )));
        }
        Ok(DMatrix::from_fn(k, k, |a, b| {
            if a == b {
                return 1.0;
            }
            let s: f64 = cols[a]
                .iter()
                .zip(&cols[b])
                .map(|(x, y)| (x - means[a]) * (y - means[b]))
                .sum();
            (s / (sds[a] * sds[b])).clamp(-1.0, 1.0)
        }))
    }
}

/// `k/(k-1) * (1 - sum(item variances) / total variance)`.
pub fn cronbach_alpha(m: &ItemMatrix) -> Result<f64, PsychometricsError> {
    m.check_shape()?;
    let k = m.n_items() as f64;
    let item_var: f64 = (0..m.n_items()).map(|j| sample_variance(&m.column(j))).sum();
    let total_var = sample_variance(&m.totals());
    if total_var <= 0.0 {
        return Err(PsychometricsError::Undefined("total score has zero variance".into()));
    }
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

pub const OMEGA_ESTIMATOR: &str = "single-factor omega, first-principal-component loadings";

/// Single-factor omega with loadings taken from the first principal
/// component of the item correlation matrix, `sqrt(eig1) * |v1j|`, capped at 1.
pub fn mcdonald_omega(m: &ItemMatrix) -> Result<f64, PsychometricsError> {
    m.check_shape()?;
    let r = m.correlation()?;
    let eig = SymmetricEigen::new(r);
    let (top, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    if value <= 0.0 {
        return Err(PsychometricsError::Undefined("correlation matrix has no positive eigenvalue".into()));
    }
    let v = eig.eigenvectors.column(top);
    let loadings: Vec<f64> = v.iter().map(|x| (value.sqrt() * x.abs()).min(1.0)).collect();
    let sum: f64 = loadings.iter().sum();
    let uniq: f64 = loadings.iter().map(|l| 1.0 - l * l).sum();
    Ok(sum * sum / (sum * sum + uniq))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda6 {
    pub value: f64,
    /// At least one item regression hit a rank-deficient design and was
    /// solved with the SVD pseudo-inverse.
    pub pseudo_inverse_used: bool,
}

/// Squared multiple correlation of item `j` on all other items, by OLS with
/// an intercept. The boolean flags a rank-deficient design.
pub fn squared_multiple_correlation(m: &ItemMatrix, j: usize) -> (f64, bool) {
    let n = m.n_observations();
    let k = m.n_items();
    let y = DVector::from_vec(m.column(j));
    let x = DMatrix::from_fn(n, k, |i, c| {
        if c == 0 {
            1.0
        } else {
            let src = if c <= j { c - 1 } else { c };
            m.rows[i][src]
        }
    });
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10 * n.max(k) as f64;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let beta = svd.solve(&y, tol).expect("U and V were computed");
    let resid = &y - &x * beta;
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let smc = if tss == 0.0 { 0.0 } else { (1.0 - resid.norm_squared() / tss).clamp(0.0, 1.0) };
    (smc, rank < k)
}

/// Guttman's lambda-6: `1 - sum(var_j * (1 - SMC_j)) / var_total`.
pub fn guttman_lambda6(m: &ItemMatrix) -> Result<Lambda6, PsychometricsError> {
    m.check_shape()?;
    let total_var = sample_variance(&m.totals());
    if total_var <= 0.0 {
        return Err(PsychometricsError::Undefined("total score has zero variance".into()));
    }
    let mut unexplained = 0.0;
    let mut flagged = false;
    for j in 0..m.n_items() {
        let (smc, rank_deficient) = squared_multiple_correlation(m, j);
        flagged |= rank_deficient;
        unexplained += sample_variance(&m.column(j)) * (1.0 - smc);
    }
    Ok(Lambda6 {
        value: 1.0 - unexplained / total_var,
        pseudo_inverse_used: flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubscaleReliability {
    pub subscale: String,
    pub alpha: Option<f64>,
    pub omega: Option<f64>,
    pub lambda6: Option<f64>,
    pub lambda6_pseudo_inverse: bool,
    pub n_items: usize,
    pub n_observations: usize,
    /// Reasons for any coefficient left undefined.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub omega_estimator: String,
    pub subscales: Vec<SubscaleReliability>,
}

pub fn subscale_reliability(subscale: &str, m: &ItemMatrix) -> SubscaleReliability {
    let mut notes = Vec::new();
    let mut keep = |r: Result<f64, PsychometricsError>, what: &str| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{what}: {e}"));
            None
        }
    };
    let alpha = keep(cronbach_alpha(m), "alpha");
    let omega = keep(mcdonald_omega(m), "omega");
    let l6 = guttman_lambda6(m);
    let (lambda6, pinv) = match l6 {
        Ok(l) => (Some(l.value), l.pseudo_inverse_used),
        Err(e) => {
            notes.push(format!("lambda6: {e}"));
            (None, false)
        }
    };
    SubscaleReliability {
        subscale: subscale.to_string(),
        alpha,
        omega,
        lambda6,
        lambda6_pseudo_inverse: pinv,
        n_items: m.n_items(),
        n_observations: m.n_observations(),
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: Vec<Vec<f64>>) -> ItemMatrix {
        ItemMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn perfectly_correlated_items() {
        let data = m((1..=6).map(|v| vec![v as f64; 4]).collect());
        assert!((cronbach_alpha(&data).unwrap() - 1.0).abs() < 1e-12);
        assert!((mcdonald_omega(&data).unwrap() - 1.0).abs() < 1e-9);
        let l6 = guttman_lambda6(&data).unwrap();
        assert!((l6.value - 1.0).abs() < 1e-9);
        assert!(l6.pseudo_inverse_used);
    }

    #[test]
    fn anticorrelated_pair_has_zero_total_variance() {
        let data = m(vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(cronbach_alpha(&data), Err(PsychometricsError::Undefined(_))));
        assert!(matches!(guttman_lambda6(&data), Err(PsychometricsError::Undefined(_))));
    }

    #[test]
    fn smc_matches_inverse_correlation_route() {
        // Independent route: SMC_j = 1 - 1 / (R^-1)_jj.
        let data = m(vec![
            vec![1.0, 2.0, 2.0],
            vec![2.0, 2.0, 3.0],
            vec![3.0, 4.0, 3.0],
            vec![4.0, 3.0, 5.0],
            vec![5.0, 5.0, 4.0],
            vec![2.0, 1.0, 1.0],
        ]);
        let r_inv = data.correlation().unwrap().try_inverse().unwrap();
        for j in 0..3 {
            let (smc, flagged) = squared_multiple_correlation(&data, j);
            assert!(!flagged);
            assert!((smc - (1.0 - 1.0 / r_inv[(j, j)])).abs() < 1e-9, "item {j}");
        }
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(cronbach_alpha(&m(vec![vec![1.0]; 5])), Err(PsychometricsError::TooFewItems(1))));
        assert!(matches!(
            cronbach_alpha(&m(vec![vec![1.0, 2.0]; 2])),
            Err(PsychometricsError::TooFewObservations(2))
        ));
        let constant_item = m(vec![vec![1.0, 3.0], vec![2.0, 3.0], vec![3.0, 3.0]]);
        assert!(matches!(mcdonald_omega(&constant_item), Err(PsychometricsError::Undefined(_))));
    }

    #[test]
    fn csv_round_trip() {
        let data = ItemMatrix::new(vec!["a".into(), "b".into()], vec![vec![1.0, 2.5], vec![3.0, 4.0]]).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "a,b\n1,2.5\n3,4\n");
        assert_eq!(ItemMatrix::read_csv(buf.as_slice()).unwrap(), data);
    }
}
