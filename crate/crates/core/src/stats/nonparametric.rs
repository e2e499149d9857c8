//! Kruskal-Wallis, Mann-Whitney U, and Bonferroni adjustment.

use serde::{Deserialize, Serialize};

use super::rank::{average_ranks, tie_term};
use super::special::{chi2_sf, normal_cdf};
use super::{EffectKind, GroupedSample, StatsError, TestResult};

/// Tie-corrected Kruskal-Wallis H with a chi-square(k - 1) p-value and rank
/// eta-squared effect size.
pub fn kruskal_wallis(sample: &GroupedSample) -> Result<TestResult, StatsError> {
    let n = sample.total();
    if n < 5 {
        return Err(StatsError::TooFewObservations { need: 5, got: n });
    }
    let k = sample.groups().len();
    let pooled: Vec<f64> = sample.groups().iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let ranks = average_ranks(&pooled);
    let nf = n as f64;

    let mut offset = 0;
    let mut sum = 0.0;
    for (_, values) in sample.groups() {
        let r: f64 = ranks[offset..offset + values.len()].iter().sum();
        sum += r * r / values.len() as f64;
        offset += values.len();
    }
    let h_raw = 12.0 / (nf * (nf + 1.0)) * sum - 3.0 * (nf + 1.0);
    let correction = 1.0 - tie_term(&pooled) / (nf * nf * nf - nf);
    // every value tied: no rank information at all
    let h = if correction <= 0.0 { 0.0 } else { (h_raw / correction).max(0.0) };
    let sizes = sample.groups().iter().map(|(_, v)| v.len()).collect();
    let mut result = kruskal_wallis_from_statistic(h, k, n)?;
    result.group_sizes = sizes;
    Ok(result)
}

/// Evaluates p-value and effect size for a known H.
pub fn kruskal_wallis_from_statistic(h: f64, k: usize, n: usize) -> Result<TestResult, StatsError> {
    if k < 2 || n <= k {
        return Err(StatsError::InvalidArgument(format!("need k >= 2 and n > k (k={k}, n={n})")));
    }
    let df = (k - 1) as f64;
    Ok(TestResult {
        statistic: h,
        p_value: chi2_sf(h, df).clamp(0.0, 1.0),
        effect_size: (h - k as f64 + 1.0) / (n - k) as f64,
        effect_kind: EffectKind::RankEtaSquared,
        df: Some(df),
        group_sizes: Vec::new(),
    })
}

/// Mann-Whitney comparison of group `a` against group `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// `min(U_a, U_b)`, the conventionally reported statistic.
    pub u: f64,
    /// U counted in the a-direction: pairs where a beats b, ties count 1/2.
    pub u_a: f64,
    /// Continuity-corrected normal deviate (non-positive by construction).
    pub z: f64,
    pub test: TestResult,
}

impl MannWhitney {
    pub fn p_value(&self) -> f64 {
        self.test.p_value
    }

    pub fn r(&self) -> f64 {
        self.test.effect_size
    }

    /// `true` when group `b` tends to be larger than group `a`.
    pub fn b_dominates(&self) -> bool {
        self.u_a < self.test.group_sizes[0] as f64 * self.test.group_sizes[1] as f64 / 2.0
    }
}

pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::InvalidArgument("both samples must be non-empty".into()));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u_a = rank_sum_a - na * (na + 1.0) / 2.0;
    let u = u_a.min(na * nb - u_a);
    let mut out = mann_whitney_from_u(u, a.len(), b.len(), tie_term(&pooled))?;
    out.u_a = u_a;
    Ok(out)
}

/// Normal approximation for a given U. `tie_term` is `sum(t^3 - t)` over
/// tie groups of the pooled sample (0 when there are no ties).
pub fn mann_whitney_from_u(u: f64, na: usize, nb: usize, tie_term: f64) -> Result<MannWhitney, StatsError> {
    if na == 0 || nb == 0 {
        return Err(StatsError::InvalidArgument("both samples must be non-empty".into()));
    }
    let (n1, n2) = (na as f64, nb as f64);
    let n = n1 + n2;
    let u_min = u.min(n1 * n2 - u);
    let mu = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)).max(1.0));
    let z = if var > 0.0 {
        ((u_min - mu + 0.5) / var.sqrt()).min(0.0)
    } else {
        0.0
    };
    let p = (2.0 * normal_cdf(z)).clamp(0.0, 1.0);
    Ok(MannWhitney {
        u: u_min,
        u_a: u,
        z,
        test: TestResult {
            statistic: u_min,
            p_value: p,
            effect_size: z.abs() / n.sqrt(),
            effect_kind: EffectKind::RFromZ,
            df: None,
            group_sizes: vec![na, nb],
        },
    })
}

/// `min(1, p * m)` for each p-value.
pub fn bonferroni(p_values: &[f64], m: usize) -> Vec<f64> {
    let m = m.max(p_values.len()) as f64;
    p_values.iter().map(|p| (p * m).min(1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(v: Vec<Vec<f64>>) -> GroupedSample {
        GroupedSample::new(v.into_iter().enumerate().map(|(i, g)| (format!("g{i}"), g)).collect()).unwrap()
    }

    #[test]
    fn kw_from_published_statistics() {
        let r = kruskal_wallis_from_statistic(9.317, 3, 150).unwrap();
        assert!((r.p_value - (-9.317f64 / 2.0).exp()).abs() < 1e-12);
        assert!((r.effect_size - 7.317 / 147.0).abs() < 1e-12);
        let r = kruskal_wallis_from_statistic(16.635, 3, 150).unwrap();
        assert!((r.p_value - 2.44e-4).abs() < 1e-6);
        assert!((r.effect_size - 14.635 / 147.0).abs() < 1e-12);
    }

    #[test]
    fn kw_identical_groups() {
        let r = kruskal_wallis(&groups(vec![vec![2.0; 4], vec![2.0; 4], vec![2.0; 4]])).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = kruskal_wallis(&groups(vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]])).unwrap();
        assert!(r.statistic.abs() < 1e-12);
    }

    #[test]
    fn kw_hand_example() {
        // ranks: g0 = {1,2,3}, g1 = {4,5,6}; H = 12/42 * (36/3 + 225/3) - 21 = 3.857142...
        let r = kruskal_wallis(&groups(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]])).unwrap();
        assert!((r.statistic - 27.0 / 7.0).abs() < 1e-12);
        assert_eq!(r.group_sizes, vec![3, 3]);
    }

    #[test]
    fn mw_published_rows() {
        let r = mann_whitney_from_u(850.0, 50, 50, 0.0).unwrap();
        assert!((r.p_value() - 0.005_885).abs() < 2e-5, "{}", r.p_value());
        assert!((r.r() - 0.2754).abs() < 1e-3);
        let r = mann_whitney_from_u(700.5, 50, 50, 0.0).unwrap();
        assert!((r.r() - 0.3785).abs() < 1e-3);
        assert!(r.p_value() < 2e-4);
    }

    #[test]
    fn mw_complete_separation() {
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.u_a, 0.0);
        assert!(r.b_dominates());
        let r = mann_whitney(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.u, r.u_a), (0.0, 9.0));
        assert!(!r.b_dominates());
    }

    #[test]
    fn mw_all_tied() {
        let r = mann_whitney(&[1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.p_value(), 1.0);
        assert_eq!(r.r(), 0.0);
    }

    #[test]
    fn bonferroni_examples() {
        let adj = bonferroni(&[0.005, 0.9, 0.0006], 3);
        assert!((adj[0] - 0.015).abs() < 1e-15);
        assert_eq!(adj[1], 1.0);
        assert!((adj[2] - 0.0018).abs() < 1e-15);
    }
}
