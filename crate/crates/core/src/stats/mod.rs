//! Statistical kernels: rank tests, effect sizes, correlations,
//! hierarchical OLS, and k-means with silhouette-based model selection.

pub mod cluster;
pub mod correlation;
pub mod nonparametric;
pub mod rank;
pub mod regression;
pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cluster::{kmeans, select_k, silhouette, KMeansFit, KSelection};
pub use correlation::{pearson, spearman, Correlation};
pub use nonparametric::{
    bonferroni, kruskal_wallis, kruskal_wallis_from_statistic, mann_whitney, mann_whitney_from_u,
    MannWhitney,
};
pub use regression::{hierarchical_ols, HierarchicalOls};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("input lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("coefficient undefined: {0}")]
    Undefined(String),
    #[error("design matrix is singular (collinear predictors)")]
    SingularDesign,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    /// Kruskal-Wallis `(H - k + 1) / (n - k)`.
    RankEtaSquared,
    /// Rank-biserial r computed from the normal approximation, `|Z| / sqrt(N)`.
    RFromZ,
}

impl EffectKind {
    pub fn label(self) -> &'static str {
        match self {
            EffectKind::RankEtaSquared => "rank eta-squared",
            EffectKind::RFromZ => "rank-biserial r (Z-based)",
        }
    }
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub effect_size: f64,
    pub effect_kind: EffectKind,
    pub df: Option<f64>,
    pub group_sizes: Vec<usize>,
}

/// Labeled groups of observations for omnibus tests.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSample {
    groups: Vec<(String, Vec<f64>)>,
}

impl GroupedSample {
    pub fn new(groups: Vec<(String, Vec<f64>)>) -> Result<Self, StatsError> {
        if groups.len() < 2 {
            return Err(StatsError::InvalidArgument("need at least two groups".into()));
        }
        for (label, values) in &groups {
            if values.is_empty() {
                return Err(StatsError::InvalidArgument(format!("group `{label}` is empty")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::InvalidArgument(format!("group `{label}` has non-finite values")));
            }
        }
        Ok(GroupedSample { groups })
    }

    pub fn groups(&self) -> &[(String, Vec<f64>)] {
        &self.groups
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|(_, v)| v.len()).sum()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator). NaN for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Conventional significance stars.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}
