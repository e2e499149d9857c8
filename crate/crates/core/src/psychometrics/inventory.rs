use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PsychometricsError;
use crate::model::{Trait, TraitScores};

const MINI_IPIP: &str = include_str!("../../data/inventories/mini_ipip.json");
const IPIP_MARKERS: &str = include_str!("../../data/inventories/ipip_markers_10.json");
const CRITERIA_DEMO: &str = include_str!("../../data/inventories/criteria_demo.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub text: String,
    pub subscale: String,
    #[serde(default)]
    pub reverse: bool,
}

/// A Likert questionnaire: items, keying, and subscale membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inventory {
    pub inventory_id: String,
    pub scale_max: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub items: Vec<Item>,
}

impl Inventory {
    pub fn from_json(text: &str) -> Result<Self, PsychometricsError> {
        let inv: Inventory = serde_json::from_str(text)?;
        inv.validate()?;
        Ok(inv)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PsychometricsError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| PsychometricsError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn mini_ipip() -> Self {
        Self::from_json(MINI_IPIP).expect("bundled Mini-IPIP is valid")
    }

    /// Ten IPIP marker items, usable as a second trait method in demos.
    pub fn ipip_markers() -> Self {
        Self::from_json(IPIP_MARKERS).expect("bundled marker inventory is valid")
    }

    /// Placeholder criterion scales for exercising criterion validity.
    pub fn criteria_demo() -> Self {
        Self::from_json(CRITERIA_DEMO).expect("bundled criteria inventory is valid")
    }

    pub fn validate(&self) -> Result<(), PsychometricsError> {
        let bad = |m: String| Err(PsychometricsError::InvalidInventory(m));
        if !matches!(self.scale_max, 5 | 7) {
            return bad(format!("scale_max must be 5 or 7, got {}", self.scale_max));
        }
        if self.items.is_empty() {
            return bad("inventory has no items".into());
        }
        let mut seen = HashSet::new();
        for item in &self.items {
            if !seen.insert(item.id.as_str()) {
                return bad(format!("duplicate item id `{}`", item.id));
            }
            if item.subscale.trim().is_empty() {
                return bad(format!("item `{}` has no subscale", item.id));
            }
            if item.text.trim().is_empty() {
                return bad(format!("item `{}` has no text", item.id));
            }
        }
        Ok(())
    }

    /// Subscale names in order of first appearance.
    pub fn subscales(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for item in &self.items {
            if !out.contains(&item.subscale.as_str()) {
                out.push(&item.subscale);
            }
        }
        out
    }

    pub fn items_of<'a>(&'a self, subscale: &'a str) -> impl Iterator<Item = &'a Item> + 'a {
        self.items.iter().filter(move |i| i.subscale == subscale)
    }

    pub fn item(&self, id: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }
}

/// One completed administration of an inventory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseSheet {
    pub inventory_id: String,
    pub answers: BTreeMap<String, u8>,
}

impl ResponseSheet {
    pub fn new(inventory_id: impl Into<String>) -> Self {
        ResponseSheet {
            inventory_id: inventory_id.into(),
            answers: BTreeMap::new(),
        }
    }
}

pub const EMOTIONAL_STABILITY: &str = "emotional_stability";

/// Keys reverse items (`x -> scale_max + 1 - x`) and averages each subscale.
/// A 5-point inventory with a Neuroticism subscale also yields
/// `emotional_stability = 6 - neuroticism`.
pub fn score_sheet(inv: &Inventory, sheet: &ResponseSheet) -> Result<BTreeMap<String, f64>, PsychometricsError> {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for item in &inv.items {
        let raw = *sheet
            .answers
            .get(&item.id)
            .ok_or_else(|| PsychometricsError::IncompleteSheet(item.id.clone()))?;
        if raw < 1 || raw > inv.scale_max {
            return Err(PsychometricsError::AnswerOutOfRange {
                item: item.id.clone(),
                value: raw,
                scale_max: inv.scale_max,
            });
        }
        let keyed = if item.reverse { inv.scale_max + 1 - raw } else { raw };
        let slot = sums.entry(item.subscale.clone()).or_insert((0.0, 0));
        slot.0 += f64::from(keyed);
        slot.1 += 1;
    }
    let mut scores: BTreeMap<String, f64> = sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();
    if inv.scale_max == 5 {
        let neuro = scores
            .iter()
            .find(|(k, _)| Trait::from_subscale(k) == Some((Trait::EmotionalStability, true)))
            .map(|(_, v)| *v);
        if let Some(n) = neuro {
            scores.entry(EMOTIONAL_STABILITY.to_string()).or_insert(6.0 - n);
        }
    }
    Ok(scores)
}

/// Pulls the five trait scores out of a scored subscale map.
pub fn trait_scores(scores: &BTreeMap<String, f64>) -> Option<TraitScores> {
    let mut out = [f64::NAN; 5];
    for (name, value) in scores {
        if let Some((t, false)) = Trait::from_subscale(name) {
            out[t.index()] = *value;
        }
    }
    if out.iter().any(|v| v.is_nan()) {
        return None;
    }
    TraitScores::new(out).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(reverse: [bool; 4]) -> Inventory {
        Inventory {
            inventory_id: "t".into(),
            scale_max: 5,
            description: None,
            items: (0..4)
                .map(|i| Item {
                    id: format!("i{i}"),
                    text: format!("item {i}"),
                    subscale: "x".into(),
                    reverse: reverse[i],
                })
                .collect(),
        }
    }

    fn sheet(values: [u8; 4]) -> ResponseSheet {
        ResponseSheet {
            inventory_id: "t".into(),
            answers: values.iter().enumerate().map(|(i, v)| (format!("i{i}"), *v)).collect(),
        }
    }

    #[test]
    fn mini_ipip_shape() {
        let inv = Inventory::mini_ipip();
        assert_eq!(inv.items.len(), 20);
        assert_eq!(inv.scale_max, 5);
        for s in inv.subscales() {
            assert_eq!(inv.items_of(s).count(), 4, "{s}");
        }
        assert_eq!(inv.items.iter().filter(|i| i.reverse).count(), 11);
        Inventory::ipip_markers();
        Inventory::criteria_demo();
    }

    #[test]
    fn scoring_examples() {
        let s = score_sheet(&tiny([false; 4]), &sheet([5, 5, 5, 5])).unwrap();
        assert_eq!(s["x"], 5.0);
        let s = score_sheet(&tiny([false, true, false, true]), &sheet([4, 2, 5, 3])).unwrap();
        assert_eq!(s["x"], 4.0);
    }

    #[test]
    fn emotional_stability_from_neuroticism() {
        let mut inv = tiny([false; 4]);
        for item in &mut inv.items {
            item.subscale = "neuroticism".into();
        }
        let s = score_sheet(&inv, &sheet([2, 3, 2, 3])).unwrap();
        assert_eq!(s["neuroticism"], 2.5);
        assert_eq!(s[EMOTIONAL_STABILITY], 3.5);
        inv.scale_max = 7;
        assert!(!score_sheet(&inv, &sheet([2, 3, 2, 3])).unwrap().contains_key(EMOTIONAL_STABILITY));
    }

    #[test]
    fn incomplete_and_out_of_range() {
        let mut sh = sheet([1, 2, 3, 4]);
        sh.answers.remove("i2");
        assert!(matches!(score_sheet(&tiny([false; 4]), &sh), Err(PsychometricsError::IncompleteSheet(id)) if id == "i2"));
        assert!(matches!(
            score_sheet(&tiny([false; 4]), &sheet([1, 2, 6, 4])),
            Err(PsychometricsError::AnswerOutOfRange { value: 6, .. })
        ));
    }

    #[test]
    fn invalid_inventories() {
        let mut inv = tiny([false; 4]);
        inv.scale_max = 6;
        assert!(inv.validate().is_err());
        let mut inv = tiny([false; 4]);
        inv.items[1].id = "i0".into();
        assert!(inv.validate().is_err());
        let mut inv = tiny([false; 4]);
        inv.items[0].subscale = " ".into();
        assert!(inv.validate().is_err());
    }
}
