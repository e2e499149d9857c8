//! Big-Five vocabulary, expression bands, and user-agent alignment math.
//!
//! Every vector in the crate is laid out in the canonical trait order
//! `O, C, E, A, ES` defined by [`Trait::ALL`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("trait score {0} is outside [1, 5]")]
    ScoreOutOfRange(f64),
    #[error("unknown trait name `{0}`")]
    UnknownTrait(String),
    #[error("unknown level `{0}` (expected low, medium, or high)")]
    UnknownLevel(String),
    #[error("profile code `{0}` must be five letters from L, M, H")]
    BadProfileCode(String),
}

/// One of the five personality domains. Neuroticism is represented by its
/// reversed pole, Emotional Stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trait {
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    EmotionalStability,
}

impl Trait {
    /// Canonical order used for every vector layout and serialization.
    pub const ALL: [Trait; 5] = [
        Trait::Openness,
        Trait::Conscientiousness,
        Trait::Extraversion,
        Trait::Agreeableness,
        Trait::EmotionalStability,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Trait::Openness => "Openness",
            Trait::Conscientiousness => "Conscientiousness",
            Trait::Extraversion => "Extraversion",
            Trait::Agreeableness => "Agreeableness",
            Trait::EmotionalStability => "Emotional Stability",
        }
    }

    /// Snake-case identifier, also the subscale name used by inventories.
    pub fn key(self) -> &'static str {
        match self {
            Trait::Openness => "openness",
            Trait::Conscientiousness => "conscientiousness",
            Trait::Extraversion => "extraversion",
            Trait::Agreeableness => "agreeableness",
            Trait::EmotionalStability => "emotional_stability",
        }
    }

    /// Short column name used in study CSV files.
    pub fn short(self) -> &'static str {
        match self {
            Trait::Openness => "o",
            Trait::Conscientiousness => "c",
            Trait::Extraversion => "e",
            Trait::Agreeableness => "a",
            Trait::EmotionalStability => "es",
        }
    }

    /// Maps an inventory subscale name onto a trait. The boolean is `true`
    /// when the subscale measures the reversed pole (Neuroticism).
    pub fn from_subscale(name: &str) -> Option<(Trait, bool)> {
        let norm: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let t = match norm.as_str() {
            "o" | "openness" | "intellect" | "imagination" | "intellectimagination" => Trait::Openness,
            "c" | "conscientiousness" => Trait::Conscientiousness,
            "e" | "extraversion" | "extroversion" => Trait::Extraversion,
            "a" | "agreeableness" => Trait::Agreeableness,
            "es" | "emotionalstability" => Trait::EmotionalStability,
            "n" | "neuroticism" => return Some((Trait::EmotionalStability, true)),
            _ => return None,
        };
        Some((t, false))
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Trait {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match Trait::from_subscale(s) {
            Some((t, false)) => Ok(t),
            _ => Err(ModelError::UnknownTrait(s.to_string())),
        }
    }
}

/// Targeted expression level of one trait.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    /// Ordinal code 1, 2, 3.
    pub fn ordinal(self) -> u8 {
        match self {
            Level::Low => 1,
            Level::Medium => 2,
            Level::High => 3,
        }
    }

    /// The agent setting on the 1-5 trait scale (1, 3, 5).
    pub fn ca_setting(self) -> f64 {
        match self {
            Level::Low => 1.0,
            Level::Medium => 3.0,
            Level::High => 5.0,
        }
    }

    pub fn band(self) -> Band {
        match self {
            Level::Low => Band::Low,
            Level::Medium => Band::Medium,
            Level::High => Band::High,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Level::Low => 'L',
            Level::Medium => 'M',
            Level::High => 'H',
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Medium => "medium",
            Level::High => "high",
        }
    }

    pub fn opposite(self) -> Level {
        match self {
            Level::Low => Level::High,
            Level::Medium => Level::Medium,
            Level::High => Level::Low,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" | "l" | "1" => Ok(Level::Low),
            "medium" | "m" | "2" => Ok(Level::Medium),
            "high" | "h" | "3" => Ok(Level::High),
            _ => Err(ModelError::UnknownLevel(s.to_string())),
        }
    }
}

/// A full Big-Five configuration of the agent: one level per trait.
/// Serialized as its five-letter code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TraitProfile {
    levels: [Level; 5],
}

impl TraitProfile {
    pub fn new(levels: [Level; 5]) -> Self {
        TraitProfile { levels }
    }

    pub fn uniform(level: Level) -> Self {
        TraitProfile { levels: [level; 5] }
    }

    pub fn level(&self, t: Trait) -> Level {
        self.levels[t.index()]
    }

    pub fn levels(&self) -> [Level; 5] {
        self.levels
    }

    pub fn with_level(mut self, t: Trait, level: Level) -> Self {
        self.levels[t.index()] = level;
        self
    }

    /// The agent's numeric settings (1/3/5) in canonical order.
    pub fn settings(&self) -> [f64; 5] {
        self.levels.map(Level::ca_setting)
    }

    /// Five-letter code such as `LMHHL`.
    pub fn code(&self) -> String {
        self.levels.iter().map(|l| l.letter()).collect()
    }

    pub fn from_code(code: &str) -> Result<Self, ModelError> {
        let chars: Vec<char> = code.trim().chars().collect();
        if chars.len() != 5 {
            return Err(ModelError::BadProfileCode(code.to_string()));
        }
        let mut levels = [Level::Low; 5];
        for (slot, ch) in levels.iter_mut().zip(chars) {
            *slot = match ch.to_ascii_uppercase() {
                'L' => Level::Low,
                'M' => Level::Medium,
                'H' => Level::High,
                _ => return Err(ModelError::BadProfileCode(code.to_string())),
            };
        }
        Ok(TraitProfile { levels })
    }
}

impl FromStr for TraitProfile {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TraitProfile::from_code(s)
    }
}

impl TryFrom<String> for TraitProfile {
    type Error = ModelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        TraitProfile::from_code(&s)
    }
}

impl From<TraitProfile> for String {
    fn from(p: TraitProfile) -> Self {
        p.code()
    }
}

impl fmt::Display for TraitProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// Five trait scores on the 1-5 scale, canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 5]", into = "[f64; 5]")]
pub struct TraitScores {
    scores: [f64; 5],
}

impl TraitScores {
    pub fn new(scores: [f64; 5]) -> Result<Self, ModelError> {
        for &s in &scores {
            if !s.is_finite() || !(1.0..=5.0).contains(&s) {
                return Err(ModelError::ScoreOutOfRange(s));
            }
        }
        Ok(TraitScores { scores })
    }

    pub fn get(&self, t: Trait) -> f64 {
        self.scores[t.index()]
    }

    pub fn as_array(&self) -> [f64; 5] {
        self.scores
    }
}

impl TryFrom<[f64; 5]> for TraitScores {
    type Error = ModelError;

    fn try_from(v: [f64; 5]) -> Result<Self, Self::Error> {
        TraitScores::new(v)
    }
}

impl From<TraitScores> for [f64; 5] {
    fn from(s: TraitScores) -> Self {
        s.scores
    }
}

/// Fixed measurement band for a 1-5 trait score.
///
/// Low is `[1.00, 2.33)`, Medium `[2.33, 3.67]`, High `(3.67, 5.00]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Low,
    Medium,
    High,
}

pub const BAND_LOW_UPPER: f64 = 2.33;
pub const BAND_MEDIUM_UPPER: f64 = 3.67;

impl Band {
    /// Closed bounds `(lo, hi)` of the band interval, ignoring openness.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Band::Low => (1.0, BAND_LOW_UPPER),
            Band::Medium => (BAND_LOW_UPPER, BAND_MEDIUM_UPPER),
            Band::High => (BAND_MEDIUM_UPPER, 5.0),
        }
    }

    /// Distance from `score` to the nearest point of this band; zero inside.
    pub fn distance(self, score: f64) -> f64 {
        let (lo, hi) = self.bounds();
        if score < lo {
            lo - score
        } else if score > hi {
            score - hi
        } else {
            0.0
        }
    }
}

pub fn band_of(score: f64) -> Result<Band, ModelError> {
    if !score.is_finite() || !(1.0..=5.0).contains(&score) {
        return Err(ModelError::ScoreOutOfRange(score));
    }
    Ok(if score < BAND_LOW_UPPER {
        Band::Low
    } else if score <= BAND_MEDIUM_UPPER {
        Band::Medium
    } else {
        Band::High
    })
}

/// Largest possible Euclidean distance between a trait vector and a setting
/// vector on the 1-5 scale: `sqrt(5 * 4^2)`.
pub fn max_distance() -> f64 {
    80f64.sqrt()
}

/// Per-trait absolute distance `|P_i - C_i|`, each in `[0, 4]`.
pub fn trait_distances(p: &TraitScores, c: &TraitProfile) -> [f64; 5] {
    let settings = c.settings();
    let mut out = [0.0; 5];
    for (i, d) in out.iter_mut().enumerate() {
        *d = (p.scores[i] - settings[i]).abs();
    }
    out
}

/// `1 - ||P - C|| / sqrt(80)`, in `[0, 1]`.
pub fn alignment_score(p: &TraitScores, c: &TraitProfile) -> f64 {
    let sq: f64 = trait_distances(p, c).iter().map(|d| d * d).sum();
    1.0 - sq.sqrt() / max_distance()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_boundaries() {
        assert_eq!(band_of(2.33).unwrap(), Band::Medium);
        assert_eq!(band_of(1.0).unwrap(), Band::Low);
        assert_eq!(band_of(3.67).unwrap(), Band::Medium);
        assert_eq!(band_of(3.6701).unwrap(), Band::High);
        assert_eq!(band_of(2.3299).unwrap(), Band::Low);
        assert_eq!(band_of(5.0).unwrap(), Band::High);
        assert!(band_of(0.999).is_err());
        assert!(band_of(5.001).is_err());
        assert!(band_of(f64::NAN).is_err());
    }

    #[test]
    fn level_mapping_is_injective() {
        let codes: Vec<(u8, f64)> = Level::ALL.iter().map(|l| (l.ordinal(), l.ca_setting())).collect();
        assert_eq!(codes, vec![(1, 1.0), (2, 3.0), (3, 5.0)]);
    }

    #[test]
    fn distances_examples() {
        let p = TraitScores::new([4.25, 2.0, 3.0, 5.0, 1.0]).unwrap();
        assert_eq!(
            trait_distances(&p, &TraitProfile::uniform(Level::Low)),
            [3.25, 1.0, 2.0, 4.0, 0.0]
        );
        let ones = TraitScores::new([1.0; 5]).unwrap();
        assert_eq!(trait_distances(&ones, &TraitProfile::uniform(Level::High)), [4.0; 5]);
    }

    #[test]
    fn alignment_examples() {
        let mid = TraitProfile::uniform(Level::Medium);
        let threes = TraitScores::new([3.0; 5]).unwrap();
        assert_eq!(alignment_score(&threes, &mid), 1.0);
        let ones = TraitScores::new([1.0; 5]).unwrap();
        assert_eq!(alignment_score(&ones, &TraitProfile::uniform(Level::High)), 0.0);
        let p = TraitScores::new([4.0, 4.0, 3.0, 4.0, 3.0]).unwrap();
        let want = 1.0 - 3f64.sqrt() / 80f64.sqrt();
        assert!((alignment_score(&p, &mid) - want).abs() < 1e-12);
        assert!((want - 0.806_351).abs() < 1e-6);
    }

    #[test]
    fn profile_codes_round_trip() {
        let p = TraitProfile::new([Level::Low, Level::Medium, Level::High, Level::High, Level::Low]);
        assert_eq!(p.code(), "LMHHL");
        assert_eq!(TraitProfile::from_code("lmhhl").unwrap(), p);
        assert!(TraitProfile::from_code("LMHX").is_err());
    }

    #[test]
    fn subscale_names() {
        assert_eq!(Trait::from_subscale("Neuroticism"), Some((Trait::EmotionalStability, true)));
        assert_eq!(Trait::from_subscale("Intellect/Imagination"), Some((Trait::Openness, false)));
        assert_eq!("emotional_stability".parse::<Trait>().unwrap(), Trait::EmotionalStability);
        assert!(Trait::from_subscale("positive_affect").is_none());
    }

    #[test]
    fn scores_reject_out_of_range() {
        assert!(TraitScores::new([0.5, 3.0, 3.0, 3.0, 3.0]).is_err());
        let parsed: Result<TraitScores, _> = serde_json::from_str("[1,2,3,4,6]");
        assert!(parsed.is_err());
    }
}
