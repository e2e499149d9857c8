use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{band_of, Band, Level, ModelError, Trait, TraitProfile, TraitScores};
use crate::stats::spearman;

/// A miss within this many Likert points of the target band counts as close.
pub const CLOSE_MISS_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissKind {
    None,
    Close,
    Far,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityObservation {
    pub profile: TraitProfile,
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub targeted_level: Level,
    pub measured_score: f64,
    pub measured_band: Band,
    #[serde(rename = "match")]
    pub is_match: bool,
    pub miss_kind: MissKind,
}

impl FidelityObservation {
    pub fn new(profile: TraitProfile, t: Trait, score: f64) -> Result<Self, ModelError> {
        let level = profile.level(t);
        let band = band_of(score)?;
        let is_match = band == level.band();
        let miss_kind = if is_match {
            MissKind::None
        } else if level.band().distance(score) <= CLOSE_MISS_THRESHOLD {
            MissKind::Close
        } else {
            MissKind::Far
        };
        Ok(FidelityObservation {
            profile,
            trait_: t,
            targeted_level: level,
            measured_score: score,
            measured_band: band,
            is_match,
            miss_kind,
        })
    }
}

/// The five observations for one measured profile.
pub fn observe(profile: TraitProfile, scores: &TraitScores) -> Vec<FidelityObservation> {
    Trait::ALL
        .iter()
        .map(|&t| FidelityObservation::new(profile, t, scores.get(t)).expect("TraitScores are in range"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitFidelity {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub n: usize,
    pub matches: usize,
    /// Spearman rho of target code (1, 2, 3) against measured score; absent
    /// unless all three levels were targeted and scores vary.
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub n_observations: usize,
    pub n_matches: usize,
    pub match_rate: f64,
    pub per_trait: Vec<TraitFidelity>,
    pub mean_rho: Option<f64>,
    pub misses_by_kind: BTreeMap<MissKind, usize>,
    pub misses_by_level: BTreeMap<Level, usize>,
    pub reference: ReferenceFidelity,
}

/// Published live-model figures, shown next to local results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFidelity {
    pub matches: usize,
    pub observations: usize,
    pub match_rate: f64,
    pub mean_rho: f64,
    pub note: String,
}

impl Default for ReferenceFidelity {
    fn default() -> Self {
        ReferenceFidelity {
            matches: 1122,
            observations: 1215,
            match_rate: 0.923,
            mean_rho: 0.97,
            note: "GPT-4o, all 243 profiles, Mini-IPIP; every miss was a close Medium miss".into(),
        }
    }
}

pub fn fidelity(observations: &[FidelityObservation]) -> FidelityReport {
    let n = observations.len();
    let n_matches = observations.iter().filter(|o| o.is_match).count();
    let mut misses_by_kind = BTreeMap::new();
    let mut misses_by_level = BTreeMap::new();
    for o in observations.iter().filter(|o| !o.is_match) {
        *misses_by_kind.entry(o.miss_kind).or_insert(0) += 1;
        *misses_by_level.entry(o.targeted_level).or_insert(0) += 1;
    }
    let per_trait: Vec<TraitFidelity> = Trait::ALL
        .iter()
        .map(|&t| {
            let obs: Vec<&FidelityObservation> = observations.iter().filter(|o| o.trait_ == t).collect();
            let codes: Vec<f64> = obs.iter().map(|o| f64::from(o.targeted_level.ordinal())).collect();
            let scores: Vec<f64> = obs.iter().map(|o| o.measured_score).collect();
            let mut levels: Vec<Level> = obs.iter().map(|o| o.targeted_level).collect();
            levels.sort();
            levels.dedup();
            let corr = (levels.len() == 3).then(|| spearman(&codes, &scores).ok()).flatten();
            TraitFidelity {
                trait_: t,
                n: obs.len(),
                matches: obs.iter().filter(|o| o.is_match).count(),
                rho: corr.map(|c| c.r),
                p_value: corr.map(|c| c.p_value),
            }
        })
        .collect();
    let rhos: Vec<f64> = per_trait.iter().filter_map(|t| t.rho).collect();
    FidelityReport {
        n_observations: n,
        n_matches,
        match_rate: if n == 0 { 0.0 } else { n_matches as f64 / n as f64 },
        mean_rho: (!rhos.is_empty()).then(|| rhos.iter().sum::<f64>() / rhos.len() as f64),
        per_trait,
        misses_by_kind,
        misses_by_level,
        reference: ReferenceFidelity::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFidelity {
    pub profile: TraitProfile,
    pub n_runs: usize,
    pub n_observations: usize,
    pub in_band: usize,
    pub in_band_rate: f64,
    pub per_trait_in_band: BTreeMap<Trait, usize>,
    /// Published in-band counts per uniform condition, out of 200.
    pub reference_in_band: BTreeMap<Level, usize>,
    pub observations: Vec<FidelityObservation>,
}

pub fn summarize_condition(profile: TraitProfile, runs: &[TraitScores]) -> ConditionFidelity {
    let observations: Vec<FidelityObservation> = runs.iter().flat_map(|s| observe(profile, s)).collect();
    let in_band = observations.iter().filter(|o| o.is_match).count();
    let mut per_trait = BTreeMap::new();
    for t in Trait::ALL {
        per_trait.insert(t, observations.iter().filter(|o| o.trait_ == t && o.is_match).count());
    }
    ConditionFidelity {
        profile,
        n_runs: runs.len(),
        n_observations: observations.len(),
        in_band,
        in_band_rate: if observations.is_empty() { 0.0 } else { in_band as f64 / observations.len() as f64 },
        per_trait_in_band: per_trait,
        reference_in_band: [(Level::Low, 200), (Level::Medium, 180), (Level::High, 200)].into_iter().collect(),
        observations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn miss_classification() {
        let p = TraitProfile::uniform(Level::Medium);
        let o = FidelityObservation::new(p, Trait::Openness, 3.9).unwrap();
        assert!(!o.is_match);
        assert_eq!(o.miss_kind, MissKind::Close);
        let o = FidelityObservation::new(p, Trait::Openness, 4.5).unwrap();
        assert_eq!(o.miss_kind, MissKind::Far);
        let o = FidelityObservation::new(p, Trait::Openness, 3.67).unwrap();
        assert!(o.is_match);
        assert_eq!(o.miss_kind, MissKind::None);
        let low = TraitProfile::uniform(Level::Low);
        assert_eq!(FidelityObservation::new(low, Trait::Openness, 2.33).unwrap().miss_kind, MissKind::Close);
    }

    #[test]
    fn report_counts() {
        let mut obs = Vec::new();
        for (level, score) in [(Level::Low, 1.5), (Level::Medium, 3.0), (Level::High, 4.5), (Level::Medium, 3.9)] {
            let s = TraitScores::new([score; 5]).unwrap();
            obs.extend(observe(TraitProfile::uniform(level), &s));
        }
        let r = fidelity(&obs);
        assert_eq!(r.n_observations, 20);
        assert_eq!(r.n_matches, 15);
        assert_eq!(r.misses_by_kind[&MissKind::Close], 5);
        assert_eq!(r.misses_by_level[&Level::Medium], 5);
        assert!(r.per_trait.iter().all(|t| t.rho.is_some()));

        let all_match = fidelity(&obs[..15]);
        assert!(all_match.misses_by_kind.is_empty());
        assert_eq!(all_match.match_rate, 1.0);
    }
}
