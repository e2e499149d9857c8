//! Participant study data: ingest, perception scoring, and the four
//! research-question pipelines (condition effects, alignment, per-trait
//! distances, alignment clusters).

pub mod export;
pub mod ingest;
pub mod reference;
pub mod rq;
pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Level, TraitProfile, TraitScores};
use crate::stats::StatsError;

pub use export::{write_tables, StudyReport};
pub use ingest::{ingest, ingest_reader, write_csv, IngestReport, RowDiagnostic, REQUIRED_COLUMNS};
pub use rq::{rq1, rq2, rq3, rq4, ClusterProfile, Rq1Report, Rq2Report, Rq3Report, Rq4Report};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("no data rows")]
    Empty,
    #[error("incomplete items for {0}")]
    IncompleteItems(Measure),
    #[error("item value {value} outside 1..={scale_max} for {measure}")]
    ItemOutOfRange { measure: Measure, value: u8, scale_max: u8 },
    #[error("need at least {need} records, got {got}")]
    TooFewRecords { need: usize, got: usize },
    #[error("clustering is degenerate: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// The six user-perception outcomes, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Intelligence,
    Enjoyment,
    Anthropomorphism,
    Adoption,
    Trust,
    Likeability,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::Intelligence,
        Measure::Enjoyment,
        Measure::Anthropomorphism,
        Measure::Adoption,
        Measure::Trust,
        Measure::Likeability,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// CSV column name.
    pub fn column(self) -> &'static str {
        match self {
            Measure::Intelligence => "intelligence",
            Measure::Enjoyment => "enjoyment",
            Measure::Anthropomorphism => "anthropomorphism",
            Measure::Adoption => "adoption",
            Measure::Trust => "trust",
            Measure::Likeability => "likeability",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Measure::Intelligence => "Intelligence",
            Measure::Enjoyment => "Enjoyment",
            Measure::Anthropomorphism => "Anthropomorphism",
            Measure::Adoption => "Intention to Adopt",
            Measure::Trust => "Trust",
            Measure::Likeability => "Likeability",
        }
    }

    pub fn scale_max(self) -> u8 {
        match self {
            Measure::Enjoyment | Measure::Adoption | Measure::Trust => 7,
            _ => 5,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Measure {
    type Err = StudyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.column() == s)
            .ok_or_else(|| StudyError::Schema(format!("unknown measure `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyItem {
    pub text: String,
    pub reverse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureKey {
    pub measure: Measure,
    pub scale_max: u8,
    pub items: Vec<KeyItem>,
}

/// Item lists and keying for the perception questionnaires. Semantic
/// differentials are coded so the positive pole is the scale maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionKey {
    pub measures: Vec<MeasureKey>,
}

fn items(texts: &[&str], reversed: usize) -> Vec<KeyItem> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| KeyItem {
            text: t.to_string(),
            reverse: i < reversed,
        })
        .collect()
}

impl Default for PerceptionKey {
    fn default() -> Self {
        let m = |measure: Measure, texts: &[&str], reversed: usize| MeasureKey {
            measure,
            scale_max: measure.scale_max(),
            items: items(texts, reversed),
        };
        PerceptionKey {
            measures: vec![
                m(
                    Measure::Intelligence,
                    &[
                        "incompetent / competent",
                        "ignorant / knowledgeable",
                        "irresponsible / responsible",
                        "unintelligent / intelligent",
                        "foolish / sensible",
                    ],
                    0,
                ),
                m(
                    Measure::Enjoyment,
                    &[
                        "While using the chatbot, I found the interaction enjoyable.",
                        "While using the chatbot, I found this interaction interesting.",
                        "While using the chatbot, I found the interaction fun.",
                    ],
                    0,
                ),
                m(
                    Measure::Anthropomorphism,
                    &[
                        "machinelike / humanlike",
                        "unconscious / conscious",
                        "artificial / lifelike",
                        "rigid / elegant",
                    ],
                    0,
                ),
                m(
                    Measure::Adoption,
                    &[
                        "I intend to start using the chatbot within the next month.",
                        "In the next months, I plan to experiment with or regularly use the chatbot.",
                    ],
                    0,
                ),
                m(
                    Measure::Trust,
                    &[
                        "The chatbot is deceptive.",
                        "The chatbot behaves in an underhanded manner.",
                        "I am suspicious of the chatbot's intent, action, or outputs.",
                        "I am wary of the chatbot.",
                        "The chatbot will have a harmful or injurious outcome.",
                        "I am confident in the chatbot.",
                        "The chatbot has integrity.",
                        "The chatbot is dependable.",
                        "The chatbot is reliable.",
                        "I can trust the chatbot.",
                    ],
                    5,
                ),
                m(
                    Measure::Likeability,
                    &[
                        "unpleasant / pleasant",
                        "dislike / like",
                        "unfriendly / friendly",
                        "unkind / kind",
                        "awful / nice",
                    ],
                    0,
                ),
            ],
        }
    }
}

impl PerceptionKey {
    pub fn measure(&self, m: Measure) -> &MeasureKey {
        self.measures.iter().find(|k| k.measure == m).expect("key covers every measure")
    }
}

/// Reverse-keys and averages one measure's raw items.
pub fn score_perception(raw: &[u8], key: &MeasureKey) -> Result<f64, StudyError> {
    if raw.len() != key.items.len() {
        return Err(StudyError::IncompleteItems(key.measure));
    }
    let mut sum = 0.0;
    for (&v, item) in raw.iter().zip(&key.items) {
        if v < 1 || v > key.scale_max {
            return Err(StudyError::ItemOutOfRange {
                measure: key.measure,
                value: v,
                scale_max: key.scale_max,
            });
        }
        let keyed = if item.reverse { key.scale_max + 1 - v } else { v };
        sum += f64::from(keyed);
    }
    Ok(sum / raw.len() as f64)
}

/// Scores every measure that has raw items.
pub fn score_perceptions(
    raw: &BTreeMap<Measure, Vec<u8>>,
    key: &PerceptionKey,
) -> Result<BTreeMap<Measure, f64>, StudyError> {
    raw.iter().map(|(m, items)| Ok((*m, score_perception(items, key.measure(*m))?))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub participant_id: String,
    pub condition: Level,
    pub traits: TraitScores,
    /// Missing cells stay `None` and are excluded per analysis.
    pub perceptions: [Option<f64>; 6],
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub raw_items: BTreeMap<Measure, Vec<u8>>,
}

impl StudyRecord {
    pub fn perception(&self, m: Measure) -> Option<f64> {
        self.perceptions[m.index()]
    }
}

/// Agent configuration behind each study condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaProfiles(pub BTreeMap<Level, TraitProfile>);

impl Default for CaProfiles {
    fn default() -> Self {
        CaProfiles(Level::ALL.iter().map(|&l| (l, TraitProfile::uniform(l))).collect())
    }
}

impl CaProfiles {
    pub fn get(&self, condition: Level) -> Result<TraitProfile, StudyError> {
        self.0
            .get(&condition)
            .copied()
            .ok_or_else(|| StudyError::Schema(format!("no agent profile for condition `{condition}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perception_examples() {
        let key = PerceptionKey::default();
        let trust = score_perception(&[1, 1, 1, 1, 1, 7, 7, 7, 7, 7], key.measure(Measure::Trust)).unwrap();
        assert_eq!(trust, 7.0);
        assert_eq!(score_perception(&[6, 5, 7], key.measure(Measure::Enjoyment)).unwrap(), 6.0);
        assert_eq!(score_perception(&[3, 4, 3, 4], key.measure(Measure::Anthropomorphism)).unwrap(), 3.5);
        assert!(matches!(
            score_perception(&[9, 1, 1, 1, 1, 7, 7, 7, 7, 7], key.measure(Measure::Trust)),
            Err(StudyError::ItemOutOfRange { value: 9, .. })
        ));
        assert!(matches!(
            score_perception(&[6, 5], key.measure(Measure::Enjoyment)),
            Err(StudyError::IncompleteItems(Measure::Enjoyment))
        ));
    }

    #[test]
    fn key_shape() {
        let key = PerceptionKey::default();
        let sizes: Vec<(usize, u8)> = key.measures.iter().map(|m| (m.items.len(), m.scale_max)).collect();
        assert_eq!(sizes, vec![(5, 5), (3, 7), (4, 5), (2, 7), (10, 7), (5, 5)]);
        assert_eq!(key.measure(Measure::Trust).items.iter().filter(|i| i.reverse).count(), 5);
    }
}
