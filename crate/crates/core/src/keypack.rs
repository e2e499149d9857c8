//! Trait Modulation Key packs.
//!
//! A pack holds one Personality Key and one Style Cues Key for each of the
//! fifteen (trait, level) pairs. Packs live in JSON files so research teams
//! can swap in their own validated key sets.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Level, Trait};

const DEFAULT_PACK: &str = include_str!("../data/keypack_default.json");

#[derive(Debug, Error)]
pub enum KeyPackError {
    #[error("cannot read key pack {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("key pack does not parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("key pack is missing ({0}, {1})")]
    MissingPair(Trait, Level),
    #[error("key pack defines ({0}, {1}) more than once")]
    DuplicatePair(Trait, Level),
    #[error("key ({0}, {1}) is invalid: {2}")]
    InvalidKey(Trait, Level, String),
}

/// The two key payloads for a single (trait, level) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Key {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub level: Level,
    /// Personality Key: the behavioral stance, written in second person.
    pub personality: String,
    /// Style Cues Key: linguistic directives.
    pub style_cues: Vec<String>,
    /// Where the text came from, e.g. `published` or `reconstructed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl Key {
    fn validate(&self) -> Result<(), KeyPackError> {
        let bad = |why: &str| KeyPackError::InvalidKey(self.trait_, self.level, why.to_string());
        let text = self.personality.trim_start();
        if text.is_empty() {
            return Err(bad("personality text is empty"));
        }
        if !text.starts_with("You") {
            return Err(bad("personality text must open in second person (\"You...\")"));
        }
        if self.style_cues.is_empty() || self.style_cues.iter().any(|c| c.trim().is_empty()) {
            return Err(bad("style cues must be a non-empty list of non-empty strings"));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct PackFile {
    pack_id: String,
    #[serde(default)]
    description: Option<String>,
    keys: Vec<Key>,
}

/// A complete, validated set of 15 keys.
#[derive(Debug, Clone)]
pub struct KeyPack {
    pub pack_id: String,
    pub description: Option<String>,
    pub source_path: String,
    keys: BTreeMap<(Trait, Level), Key>,
}

impl KeyPack {
    pub fn from_json(text: &str, source_path: &str) -> Result<Self, KeyPackError> {
        let file: PackFile = serde_json::from_str(text)?;
        let mut keys = BTreeMap::new();
        for key in file.keys {
            key.validate()?;
            let pair = (key.trait_, key.level);
            if keys.insert(pair, key).is_some() {
                return Err(KeyPackError::DuplicatePair(pair.0, pair.1));
            }
        }
        for t in Trait::ALL {
            for l in Level::ALL {
                if !keys.contains_key(&(t, l)) {
                    return Err(KeyPackError::MissingPair(t, l));
                }
            }
        }
        Ok(KeyPack {
            pack_id: file.pack_id,
            description: file.description,
            source_path: source_path.to_string(),
            keys,
        })
    }

    /// The pack bundled with the crate.
    pub fn bundled() -> Self {
        Self::from_json(DEFAULT_PACK, "<bundled>").expect("bundled key pack is valid")
    }

    pub fn key(&self, t: Trait, level: Level) -> &Key {
        &self.keys[&(t, level)]
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.keys.values()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

pub fn load_keypack(path: impl AsRef<Path>) -> Result<KeyPack, KeyPackError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| KeyPackError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    KeyPack::from_json(&text, &path.display().to_string())
}

/// Raw text of the bundled default pack, for writing out and editing.
pub fn bundled_pack_json() -> &'static str {
    DEFAULT_PACK
}

#[cfg(test)]
mod tests {
    use super::*;

    fn without(t: &str, l: &str) -> String {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_PACK).unwrap();
        let keys = v["keys"].as_array_mut().unwrap();
        keys.retain(|k| !(k["trait"] == t && k["level"] == l));
        v.to_string()
    }

    #[test]
    fn bundled_pack_is_complete() {
        let pack = KeyPack::bundled();
        assert_eq!(pack.len(), 15);
        assert_eq!(pack.pack_id, "tmk-default-v1");
    }

    #[test]
    fn bundled_agreeableness_high_is_published_text() {
        let pack = KeyPack::bundled();
        let key = pack.key(Trait::Agreeableness, Level::High);
        assert_eq!(
            key.personality,
            "You are trustful, kind, considerate, and warm. You try to be cooperative and helpful to others."
        );
        assert_eq!(key.style_cues.len(), 10);
        assert_eq!(key.provenance.as_deref(), Some("published"));
        let reconstructed = pack
            .keys()
            .filter(|k| k.provenance.as_deref() == Some("reconstructed"))
            .count();
        assert_eq!(reconstructed, 14);
    }

    #[test]
    fn missing_pair_is_named() {
        let err = KeyPack::from_json(&without("openness", "medium"), "t").unwrap_err();
        assert!(matches!(err, KeyPackError::MissingPair(Trait::Openness, Level::Medium)));
    }

    #[test]
    fn duplicate_pair_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_PACK).unwrap();
        let first = v["keys"][0].clone();
        v["keys"].as_array_mut().unwrap().push(first);
        let err = KeyPack::from_json(&v.to_string(), "t").unwrap_err();
        assert!(matches!(err, KeyPackError::DuplicatePair(Trait::Openness, Level::Low)));
    }

    #[test]
    fn personality_must_be_second_person() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_PACK).unwrap();
        v["keys"][0]["personality"] = "I am conventional.".into();
        assert!(matches!(
            KeyPack::from_json(&v.to_string(), "t"),
            Err(KeyPackError::InvalidKey(..))
        ));
        v["keys"][0]["personality"] = "You are conventional.".into();
        v["keys"][0]["style_cues"] = serde_json::json!([]);
        assert!(matches!(
            KeyPack::from_json(&v.to_string(), "t"),
            Err(KeyPackError::InvalidKey(..))
        ));
    }

    #[test]
    fn parse_error_surfaces() {
        assert!(matches!(KeyPack::from_json("{", "t"), Err(KeyPackError::Parse(_))));
    }
}
