//! Multi-trait multi-method and criterion validity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PsychometricsError;
use crate::model::Trait;
use crate::stats::pearson;

pub const CORRELATION_METHOD: &str = "pearson";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtmmTrait {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub convergent_r: Option<f64>,
    /// Mean absolute r against the non-matching columns of the second method.
    pub mean_nontarget_r: Option<f64>,
    pub max_nontarget_r: Option<f64>,
    pub delta: Option<f64>,
    /// Cells left out because a column had zero variance.
    pub undefined_cells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtmmReport {
    pub correlation: String,
    pub n_runs: usize,
    pub traits: Vec<MtmmTrait>,
    /// Full 5 x 5 matrix, rows = first method, columns = second method.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub mean_convergent_r: Option<f64>,
    pub mean_delta: Option<f64>,
}

fn column(rows: &[[f64; 5]], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Correlates trait scores from two instruments given in matching run order.
pub fn mtmm(method_a: &[[f64; 5]], method_b: &[[f64; 5]]) -> Result<MtmmReport, PsychometricsError> {
    if method_a.len() != method_b.len() {
        return Err(PsychometricsError::Matrix(format!(
            "row counts differ ({} vs {})",
            method_a.len(),
            method_b.len()
        )));
    }
    if method_a.len() < 3 {
        return Err(PsychometricsError::TooFewObservations(method_a.len()));
    }
    let matrix: Vec<Vec<Option<f64>>> = (0..5)
        .map(|i| {
            let a = column(method_a, i);
            (0..5).map(|j| pearson(&a, &column(method_b, j)).ok().map(|c| c.r)).collect()
        })
        .collect();

    let traits: Vec<MtmmTrait> = Trait::ALL
        .iter()
        .map(|&t| {
            let i = t.index();
            let mut undefined = Vec::new();
            for j in 0..5 {
                if matrix[i][j].is_none() {
                    undefined.push(format!("{} x {}", t.key(), Trait::ALL[j].key()));
                }
            }
            let convergent = matrix[i][i];
            let off: Vec<f64> = (0..5).filter(|&j| j != i).filter_map(|j| matrix[i][j]).map(f64::abs).collect();
            let mean_nt = mean_of(off.iter().copied());
            let max_nt = off.iter().copied().reduce(f64::max);
            MtmmTrait {
                trait_: t,
                convergent_r: convergent,
                mean_nontarget_r: mean_nt,
                max_nontarget_r: max_nt,
                delta: convergent.zip(mean_nt).map(|(c, m)| c - m),
                undefined_cells: undefined,
            }
        })
        .collect();

    Ok(MtmmReport {
        correlation: CORRELATION_METHOD.into(),
        n_runs: method_a.len(),
        mean_convergent_r: mean_of(traits.iter().filter_map(|t| t.convergent_r)),
        mean_delta: mean_of(traits.iter().filter_map(|t| t.delta)),
        traits,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn matches(self, r: f64) -> bool {
        match self {
            Sign::Positive => r > 0.0,
            Sign::Negative => r < 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub criterion: String,
    pub sign: Sign,
}

impl Expectation {
    pub fn new(t: Trait, criterion: &str, sign: Sign) -> Self {
        Expectation {
            trait_: t,
            criterion: criterion.to_string(),
            sign,
        }
    }
}

/// Theory-driven trait/criterion links, keyed by the criterion subscale names
/// used in the bundled criteria inventory.
pub fn default_expectations() -> Vec<Expectation> {
    use Sign::*;
    use Trait::*;
    vec![
        Expectation::new(Extraversion, "positive_affect", Positive),
        Expectation::new(Extraversion, "negative_affect", Negative),
        Expectation::new(Agreeableness, "physical_aggression", Negative),
        Expectation::new(Agreeableness, "verbal_aggression", Negative),
        Expectation::new(Agreeableness, "anger", Negative),
        Expectation::new(Agreeableness, "hostility", Negative),
        Expectation::new(Conscientiousness, "achievement", Positive),
        Expectation::new(Conscientiousness, "conformity_tradition", Positive),
        Expectation::new(Conscientiousness, "security", Positive),
        Expectation::new(EmotionalStability, "anger", Negative),
        Expectation::new(EmotionalStability, "hostility", Negative),
        Expectation::new(Openness, "creative_self_efficacy", Positive),
        Expectation::new(Openness, "creative_personal_identity", Positive),
    ]
}

/// Correlations observed in the original GPT-4o validation, for side-by-side
/// display only: `(trait, criterion, r)`.
pub const REFERENCE_CRITERION_R: [(Trait, &str, f64); 13] = [
    (Trait::Extraversion, "positive_affect", 0.87),
    (Trait::Extraversion, "negative_affect", -0.01),
    (Trait::Agreeableness, "physical_aggression", -0.83),
    (Trait::Agreeableness, "verbal_aggression", -0.87),
    (Trait::Agreeableness, "anger", -0.03),
    (Trait::Agreeableness, "hostility", -0.39),
    (Trait::Conscientiousness, "achievement", 0.12),
    (Trait::Conscientiousness, "conformity_tradition", 0.54),
    (Trait::Conscientiousness, "security", 0.95),
    (Trait::EmotionalStability, "anger", -0.98),
    (Trait::EmotionalStability, "hostility", -0.89),
    (Trait::Openness, "creative_self_efficacy", 0.96),
    (Trait::Openness, "creative_personal_identity", 0.97),
];

/// Reference MTMM figures from the original validation run.
pub const REFERENCE_MEAN_CONVERGENT_R: f64 = 0.989;
pub const REFERENCE_MEAN_DELTA: f64 = 0.922;
pub const REFERENCE_MAX_NONTARGET_R: f64 = 0.28;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub criterion: String,
    pub expected: Sign,
    pub r: Option<f64>,
    pub p_value: Option<f64>,
    pub satisfied: bool,
    pub reference_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub correlation: String,
    pub n_runs: usize,
    pub results: Vec<CriterionResult>,
    pub satisfied: usize,
}

pub fn criterion_validity(
    traits: &[[f64; 5]],
    criteria: &BTreeMap<String, Vec<f64>>,
    expectations: &[Expectation],
) -> Result<CriterionReport, PsychometricsError> {
    for (name, col) in criteria {
        if col.len() != traits.len() {
            return Err(PsychometricsError::Matrix(format!(
                "criterion `{name}` has {} rows, expected {}",
                col.len(),
                traits.len()
            )));
        }
    }
    let mut results = Vec::with_capacity(expectations.len());
    for ex in expectations {
        let reference_r = REFERENCE_CRITERION_R
            .iter()
            .find(|(t, c, _)| *t == ex.trait_ && *c == ex.criterion)
            .map(|x| x.2);
        let Some(col) = criteria.get(&ex.criterion) else {
            results.push(CriterionResult {
                trait_: ex.trait_,
                criterion: ex.criterion.clone(),
                expected: ex.sign,
                r: None,
                p_value: None,
                satisfied: false,
                reference_r,
                note: Some("criterion not measured".into()),
            });
            continue;
        };
        let (r, p, note) = match pearson(&column(traits, ex.trait_.index()), col) {
            Ok(c) => (Some(c.r), Some(c.p_value), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        results.push(CriterionResult {
            trait_: ex.trait_,
            criterion: ex.criterion.clone(),
            expected: ex.sign,
            satisfied: r.is_some_and(|r| ex.sign.matches(r)),
            r,
            p_value: p,
            reference_r,
            note,
        });
    }
    Ok(CriterionReport {
        correlation: CORRELATION_METHOD.into(),
        n_runs: traits.len(),
        satisfied: results.iter().filter(|r| r.satisfied).count(),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Vec<[f64; 5]> {
        (0..n)
            .map(|i| {
                let x = i as f64;
                [1.0 + (x * 0.37) % 4.0, 1.0 + (x * 0.71) % 4.0, 1.0 + (x * 1.13) % 4.0, 1.0 + (x * 0.53) % 4.0, 1.0 + (x * 0.91) % 4.0]
            })
            .collect()
    }

    #[test]
    fn copy_gives_unit_convergence() {
        let a = rows(30);
        let rep = mtmm(&a, &a).unwrap();
        for t in &rep.traits {
            assert!((t.convergent_r.unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(t.delta.unwrap(), t.convergent_r.unwrap() - t.mean_nontarget_r.unwrap());
        }
    }

    #[test]
    fn zero_variance_column_is_flagged() {
        let a = rows(10);
        let mut b = a.clone();
        for r in &mut b {
            r[2] = 3.0;
        }
        let rep = mtmm(&a, &b).unwrap();
        let e = &rep.traits[Trait::Extraversion.index()];
        assert!(e.convergent_r.is_none());
        assert!(e.delta.is_none());
        assert!(!e.undefined_cells.is_empty());
        assert!(rep.traits[0].mean_nontarget_r.is_some());
        assert!(rep.mean_delta.is_some());
    }

    #[test]
    fn criterion_signs() {
        let t = rows(20);
        let mut crit = BTreeMap::new();
        crit.insert("positive_affect".to_string(), t.iter().map(|r| 2.0 * r[2] + 1.0).collect());
        crit.insert("negative_affect".to_string(), t.iter().map(|r| -r[2]).collect());
        let rep = criterion_validity(&t, &crit, &default_expectations()).unwrap();
        assert!((rep.results[0].r.unwrap() - 1.0).abs() < 1e-12);
        assert!(rep.results[0].satisfied);
        assert!((rep.results[1].r.unwrap() + 1.0).abs() < 1e-12);
        assert!(rep.results[1].satisfied);
        assert_eq!(rep.satisfied, 2);
        assert_eq!(rep.results[9].reference_r, Some(-0.98));
    }
}
